//! Weighted Hermite-function sums, their Gaussian envelopes, and Hermite
//! expansions evolved under the harmonic oscillator.
//!
//! Every quantity that can leave the `f64` range is carried as a
//! [`SignedLog`]; convert with [`SignedLog::to_f64`] only when the magnitude is
//! known to be representable.

// `!(a < b)` is used on purpose so that NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decay_sum;
pub mod error;
pub mod hermite;
pub mod oscillator;
pub mod report;
pub mod signed_log;

pub use decay_sum::{
    direct_sum, envelope, find_nmax, sharpness_certificate, tail_bound, ArgumentProfile, SharpnessCertificate,
    SumParams,
};
pub use error::{Error, Result};
pub use hermite::{hermite_exact, phi_coordinate, plancherel_rotach_estimate, PhiCoordinate};
pub use oscillator::{
    decay_certificate, evolve, expand, vemuri_decay_check, Evolution, HermiteCoefficients, QuadratureSpec, TailBound,
    TestFunction,
};
pub use signed_log::SignedLog;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
