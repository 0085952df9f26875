//! Excitation and noise generation, exact closed-loop propagation on a fine
//! grid, and decimation to the identification interval.

mod closed_loop;
mod record;
mod signals;

pub use closed_loop::{simulate_closed_loop, whole_ratio, LoopSimulator, SimulationConfig};
pub use record::{decimate, FineRecord, SampledRecord};
pub use signals::{
    channel_rng, gen_noise, gen_square_wave, mix_seed, ExcitationKind, ExcitationSpec, NoiseSpec,
};
