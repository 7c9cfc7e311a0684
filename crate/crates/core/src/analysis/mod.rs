//! Run-transition probabilities, the γ and ξ aggregates, rate formulas and
//! the published parameter presets.
//!
//! Everything here is generic over the scalar type; `f64` is the working
//! precision and `f32` is supported for cheap sweeps.

mod presets;
mod probs;
mod rate;
mod tails;

pub use presets::{presets, verify_preset, ChannelKind, GammaMethod, Preset, VerifyReport, ANALYSIS_M, R_OUT};
pub use probs::{
    expected_x, probs_bdc_bounds, probs_bdc_exact, probs_bdc_lengths, probs_bdc_regime, probs_prc, Mode,
    ProbReport, PrcMode,
};
pub use rate::{
    beta_total, denominator_constant, rate_bdc, rate_bdc_uniform, rate_from_lengths, rate_prc,
    rate_prc_uniform, RatePair,
};
pub use tails::{binomial_cdf, binomial_pmf, binomial_sf, poisson_cdf, poisson_pmf, poisson_sf};
