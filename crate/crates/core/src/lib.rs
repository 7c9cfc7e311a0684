//! Explicit concatenated codes for the binary deletion channel and the
//! Poisson repeat channel: inner-code construction, blow-up and buffer
//! encoding, threshold decoding, channel simulation and the probability and
//! rate analysis behind the parameter choices.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod harness;
pub mod inner;
pub mod io;
pub mod num;
pub mod outer;
pub mod scheme;
pub mod strings;

pub use error::{Error, Result};

/// Double-precision analysis types.
pub type ProbReport64 = analysis::ProbReport<f64>;
pub type VerifyReport64 = analysis::VerifyReport<f64>;
pub type RatePair64 = analysis::RatePair<f64>;

/// Single-precision analysis types.
pub type ProbReport32 = analysis::ProbReport<f32>;
pub type VerifyReport32 = analysis::VerifyReport<f32>;
pub type RatePair32 = analysis::RatePair<f32>;

/// Exact decoding-radius fraction of the outer code.
pub type Fraction = num_rational::Ratio<u64>;
