//! Transfer-function and state-space models, discretization and H2 norms.

mod design;
mod h2;
mod interconnect;
mod model;
mod statespace;

pub use design::{minreal, observer_regulator, place, place_observer, place_siso};
pub use h2::{h2_norm_ct, h2_norm_dt, lyap_ct, lyap_dt};
pub use interconnect::closed_loop_assemble;
pub use model::{CMatrix, LinearModel, MatrixFraction, Model, RationalTransfer, BOUNDARY_TOL};
pub use statespace::{c2d_zoh, realize, realize_mfd, realize_siso, DiscreteStateSpace, StateSpace};

use crate::poly::{PolyOp, Polynomial};

/// Exact coefficient arithmetic on two polynomials.
pub fn poly_mul_add(a: &Polynomial, b: &Polynomial, op: PolyOp) -> Polynomial {
    Polynomial::combine(a, b, op)
}

/// Number of unstable poles, read from the model's realization.
pub fn rhp_pole_count<M: LinearModel + ?Sized>(model: &M) -> crate::Result<usize> {
    model.unstable_pole_count()
}
