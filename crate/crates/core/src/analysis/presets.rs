//! Published parameter sets and their re-verification.

use serde::Serialize;

use super::probs::{probs_bdc_bounds, probs_bdc_lengths, probs_bdc_regime, probs_prc, PrcMode, ProbReport};
use super::rate::{rate_bdc_uniform, rate_from_lengths, rate_prc_uniform};
use crate::error::Result;
use crate::inner::inner_rate_formula;
use crate::num::{lit, Real};

/// Outer rate assumed for the published rates, `1 - 2^-20`.
pub const R_OUT: f64 = 1.0 - 1.0 / 1_048_576.0;

/// Inner length used for the `1/m` term (large enough to be negligible).
pub const ANALYSIS_M: f64 = 1e6;

/// Tolerance on the recomputed inner rate.
pub const R_IN_TOLERANCE: f64 = 2e-3;

/// Relative tolerance on the recomputed final rate.
pub const RATE_TOLERANCE: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Bdc,
    Prc,
}

/// How the γ of a preset is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum GammaMethod {
    /// Exact binomial tails at the preset's `p` with tabulated `N1`, `N2`.
    ExactLengths { n1: u64, n2: u64 },
    /// Poisson-limit bounds valid for `1 - p <= q`.
    PoissonBound { q: f64 },
    /// Exact tails at the regime edge `p_edge`, `P^(1)→(2)` from the Poisson
    /// bound with `q` or exactly at the edge when `q` is absent.
    Regime { p_edge: f64, p12_q: Option<f64> },
    /// PRC bounds uniform over `λ <= λ_max`.
    PrcBound { lambda_max: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Preset {
    pub name: String,
    pub channel: ChannelKind,
    /// `p` or `λ` at which the rate is evaluated; for regimes this is the
    /// worst case of the range.
    pub param: f64,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub t: u64,
    pub beta1: f64,
    pub mb: f64,
    pub delta_in: f64,
    pub delta_out: f64,
    pub expected_r_in: f64,
    pub expected_rate: f64,
    pub method: GammaMethod,
}

fn table_row(p: f64, beta1: f64, n1: u64, t: u64, n2: u64, r_in: f64, delta_in: f64, rate: f64) -> Preset {
    Preset {
        name: format!("table-p{p:.2}"),
        channel: ChannelKind::Bdc,
        param: p,
        m1: None,
        m2: None,
        t,
        beta1,
        mb: 1e-5,
        delta_in,
        delta_out: 1.0 / 1_048_576.0,
        expected_r_in: r_in,
        expected_rate: rate,
        method: GammaMethod::ExactLengths { n1, n2 },
    }
}

/// The eleven fixed-`p` rows, the three BDC regimes and the PRC preset.
pub fn presets() -> Vec<Preset> {
    let mut out = vec![
        table_row(0.50, 0.497, 8, 7, 27, 0.5456, 0.00922, 0.050682),
        table_row(0.55, 0.519, 9, 8, 34, 0.5525, 0.00825, 0.043005),
        table_row(0.60, 0.508, 10, 8, 38, 0.5184, 0.01120, 0.035935),
        table_row(0.65, 0.519, 13, 9, 49, 0.5545, 0.00810, 0.029926),
        table_row(0.70, 0.509, 15, 9, 57, 0.5267, 0.01051, 0.024353),
        table_row(0.75, 0.524, 20, 10, 75, 0.5400, 0.00910, 0.019420),
        table_row(0.80, 0.514, 24, 10, 96, 0.5289, 0.01022, 0.014830),
        table_row(0.85, 0.526, 34, 11, 138, 0.5413, 0.00895, 0.010701),
        table_row(0.90, 0.537, 54, 12, 224, 0.5534, 0.00773, 0.006845),
        table_row(0.95, 0.53, 108, 12, 452, 0.5402, 0.00893, 0.003305),
        table_row(0.99, 0.52, 541, 12, 2280, 0.5318, 0.00985, 0.000641),
    ];
    let regime = |name: &str, p: f64, m1: f64, t: u64, m2: f64, beta1: f64, delta_in: f64, r_in: f64, coeff: f64, method| Preset {
        name: name.into(),
        channel: ChannelKind::Bdc,
        param: p,
        m1: Some(m1),
        m2: Some(m2),
        t,
        beta1,
        mb: 1e-5,
        delta_in,
        delta_out: 1.0 / 1_048_576.0,
        expected_r_in: r_in,
        expected_rate: coeff * (1.0 - p),
        method,
    };
    out.push(regime(
        "regime-p-ge-0.9",
        0.9,
        5.41,
        12,
        22.8,
        0.522,
        0.01052,
        0.5229,
        0.5229 / 8.34933,
        GammaMethod::PoissonBound { q: 0.1 },
    ));
    out.push(regime(
        "regime-0.57-p-0.9",
        0.57,
        5.59,
        13,
        23.5,
        0.53,
        0.008013,
        0.55224,
        0.55224 / 8.81416,
        GammaMethod::Regime {
            p_edge: 0.9,
            p12_q: Some(0.43),
        },
    ));
    out.push(regime(
        "regime-p-le-0.57",
        0.0,
        5.59,
        13,
        20.21,
        0.53,
        0.006147,
        0.577475,
        0.57747 / 8.47706,
        GammaMethod::Regime {
            p_edge: 0.57,
            p12_q: None,
        },
    ));
    out.push(Preset {
        name: "prc-lambda-le-0.5".into(),
        channel: ChannelKind::Prc,
        param: 0.5,
        m1: Some(5.49),
        m2: Some(24.2),
        t: 13,
        beta1: 0.532,
        mb: 1e-5,
        delta_in: 0.00954,
        delta_out: 1.0 / 1_048_576.0,
        expected_r_in: 0.53186,
        expected_rate: 0.5318 * 0.5 / (8.58349 + 0.766 * 0.5),
        method: GammaMethod::PrcBound { lambda_max: 0.5 },
    });
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport<F> {
    pub name: String,
    pub param: f64,
    pub probs: ProbReport<F>,
    pub delta_in: f64,
    pub gamma_lt_delta: bool,
    pub r_in: F,
    pub r_in_ok: bool,
    pub final_rate: F,
    pub paper_rate: f64,
    pub rel_err: F,
    pub rate_ok: bool,
    /// `rate >= (1-p)/16` for the BDC, `rate > λ/17` for the PRC.
    pub theorem_ok: bool,
    /// Human-readable description of every failed check.
    pub failures: Vec<String>,
}

impl<F: Real> VerifyReport<F> {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Recomputes `R_in`, the γ used for decodability and the final rate.
pub fn verify_preset<F: Real>(preset: &Preset) -> Result<VerifyReport<F>> {
    let beta1: F = lit(preset.beta1);
    let delta_in: F = lit(preset.delta_in);
    let param: F = lit(preset.param);
    let mb: F = lit(preset.mb);
    let r_out: F = lit(R_OUT);
    let m: F = lit(ANALYSIS_M);
    let t = preset.t;
    let m1 = || lit::<F>(preset.m1.expect("preset with M1"));
    let m2 = || lit::<F>(preset.m2.expect("preset with M2"));

    let r_in = inner_rate_formula(beta1, delta_in)?;
    let probs = match preset.method {
        GammaMethod::ExactLengths { n1, n2 } => probs_bdc_lengths(n1, n2, t, param, beta1)?,
        GammaMethod::PoissonBound { q } => probs_bdc_bounds(m1(), m2(), t, lit(q), beta1)?,
        GammaMethod::Regime { p_edge, p12_q } => {
            probs_bdc_regime(m1(), m2(), t, beta1, lit(p_edge), p12_q.map(lit))?
        }
        GammaMethod::PrcBound { lambda_max } => {
            probs_prc(m1(), m2(), t, lit(lambda_max), beta1, PrcMode::Bound)?
        }
    };
    let final_rate = match (preset.method, preset.channel) {
        (GammaMethod::ExactLengths { n1, n2 }, _) => {
            rate_from_lengths(beta1, n1, n2, mb, F::one() - param, r_in, r_out, m)
        }
        (_, ChannelKind::Bdc) => rate_bdc_uniform(m1(), m2(), mb, beta1, param, r_in, r_out, m),
        (_, ChannelKind::Prc) => rate_prc_uniform(m1(), m2(), mb, beta1, param, r_in, r_out, m),
    };

    let paper_rate = preset.expected_rate;
    let rel_err = (final_rate - lit(paper_rate)) / lit(paper_rate);
    let gamma_lt_delta = probs.gamma < delta_in;
    let r_in_err = (r_in - lit(preset.expected_r_in)).abs();
    let r_in_ok = r_in_err <= lit(R_IN_TOLERANCE);
    let rate_ok = rel_err.abs() <= lit(RATE_TOLERANCE);
    let theorem_ok = match preset.channel {
        ChannelKind::Bdc => final_rate >= (F::one() - param) / lit(16.0),
        ChannelKind::Prc => final_rate > param / lit(17.0),
    };

    let mut failures = Vec::new();
    if !gamma_lt_delta {
        failures.push(format!(
            "gamma {} >= delta_in {} (excess {})",
            probs.gamma,
            preset.delta_in,
            probs.gamma - delta_in
        ));
    }
    if !r_in_ok {
        failures.push(format!("R_in {r_in} differs from {} by {r_in_err}", preset.expected_r_in));
    }
    if !rate_ok {
        failures.push(format!("final rate {final_rate} differs from {paper_rate} by {rel_err} relative"));
    }
    if !theorem_ok {
        failures.push(format!("final rate {final_rate} below the guaranteed fraction of the parameter"));
    }

    Ok(VerifyReport {
        name: preset.name.clone(),
        param: preset.param,
        probs,
        delta_in: preset.delta_in,
        gamma_lt_delta,
        r_in,
        r_in_ok,
        final_rate,
        paper_rate,
        rel_err,
        rate_ok,
        theorem_ok,
        failures,
    })
}
