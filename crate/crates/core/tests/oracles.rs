mod common;

macro_rules! oracle {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                if let Err(e) = common::$name() {
                    panic!("{e}");
                }
            }
        )*
    };
}

oracle!(
    p1_characteristic_polynomial,
    biproper_controller_realization,
    p4_realization_matches_fraction,
    unstable_lag_response,
    discrete_dc_gain,
    scalar_zero_order_hold,
    first_order_h2_norm,
    band_pass_h2_against_quadrature,
    sampled_first_order_norm,
    band_pass_ratio_at_fast_sampling,
    unstable_pole_count_of_p3,
    p1_loop_eigenvalues,
    shifted_square_wave,
    gaussian_noise_moments,
    open_loop_step_response,
    double_lag_filter_step,
    band_pass_leading_markov_parameter,
    band_pass_nulls_offsets,
    p4_noise_free_residual,
    hand_least_squares,
    p1_noise_free_parameters,
    p1o_svf_gap,
    arx_recovers_difference_equation,
    arx_dc_gain,
    chordal_gain_pair,
    nu_gap_gain_pair,
    parameter_error_arithmetic,
    covariance_at_millisecond,
    bode_unstable_lag,
    bode_clustering_of_p1_models,
);
