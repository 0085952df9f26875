//! Fast-sampling continuous-time system identification with state-variable
//! filters, a discrete ARX baseline and ν-gap scoring.

pub mod arx;
pub mod csvfmt;
pub mod error;
pub mod harness;
pub mod lsq;
pub mod lti;
pub mod metrics;
pub mod poly;
pub mod sim;
pub mod svf;

pub use error::{Error, Result};
pub use poly::{PolyOp, Polynomial};
