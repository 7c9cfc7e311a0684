//! The four run-transition probabilities for both channels, exact and as
//! uniform upper bounds.

use serde::Serialize;

use super::tails::{binomial_cdf, binomial_pmf, binomial_sf, poisson_cdf, poisson_sf};
use crate::error::{Error, Result};
use crate::num::{ceil_snap, lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Bound,
}

/// `P12 = P^(1)→(2)`, `P10 = P^(1)→(0)`, `P21 = P^(2)→(1)`,
/// `P20 = P^(2)→(0)` and the aggregates computed from them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbReport<F> {
    pub p12: F,
    pub p10: F,
    pub p21: F,
    pub p20: F,
    pub gamma: F,
    pub xi: F,
    pub beta1: F,
    pub mode: Mode,
}

impl<F: Real> ProbReport<F> {
    pub fn new(beta1: F, p12: F, p10: F, p21: F, p20: F, mode: Mode) -> Self {
        let beta2 = Self::beta2_of(beta1);
        let two = lit::<F>(2.0);
        let gamma = beta1 * p12 + beta2 * p21 + (two * beta1 + beta2) * p10 + lit::<F>(4.0) * beta2 * p20;
        let xi = beta1 * (p12 + two * p10) + beta2 * (p21 + lit::<F>(3.0) * p20);
        Self {
            p12,
            p10,
            p21,
            p20,
            gamma,
            xi,
            beta1,
            mode,
        }
    }

    pub fn beta2(&self) -> F {
        Self::beta2_of(self.beta1)
    }

    fn beta2_of(beta1: F) -> F {
        (F::one() - beta1) / lit(2.0)
    }

    /// Upper bound on `E[X]` for one codeword of length `m`:
    /// `γ m + P^(1)→(0)`.
    pub fn x_upper(&self, m: usize) -> F {
        self.gamma * F::from_usize(m).unwrap() + self.p10
    }

    /// Lower bound on `E[X]`: `ξ m`.
    pub fn x_lower(&self, m: usize) -> F {
        self.xi * F::from_usize(m).unwrap()
    }
}

fn check_unit_open<F: Real>(name: &str, v: F) -> Result<()> {
    if v > F::zero() && v < F::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name}={v} must lie strictly between 0 and 1")))
    }
}

fn check_beta1<F: Real>(beta1: F) -> Result<()> {
    check_unit_open("beta1", beta1)
}

/// Exact BDC probabilities with the blow-up lengths given directly.
pub fn probs_bdc_lengths<F: Real>(n1: u64, n2: u64, t: u64, p: F, beta1: F) -> Result<ProbReport<F>> {
    check_unit_open("p", p)?;
    check_beta1(beta1)?;
    let s = F::one() - p;
    Ok(ProbReport::new(
        beta1,
        binomial_sf(n1, t + 1, s),
        binomial_pmf(n1, 0, s),
        binomial_cdf(n2, t, s),
        binomial_pmf(n2, 0, s),
        Mode::Exact,
    ))
}

/// Exact BDC probabilities with `N1 = ⌈M1/(1-p)⌉`, `N2 = ⌈M2/(1-p)⌉`.
pub fn probs_bdc_exact<F: Real>(m1: F, m2: F, t: u64, p: F, beta1: F) -> Result<ProbReport<F>> {
    check_unit_open("p", p)?;
    let s = F::one() - p;
    probs_bdc_lengths(ceil_snap(m1 / s), ceil_snap(m2 / s), t, p, beta1)
}

fn poisson_bound_p12<F: Real>(m1: F, t: u64, q: F) -> F {
    poisson_sf(m1 + q, t + 1)
}

fn check_bound_region<F: Real>(m1: F, m2: F, t: u64, q: F) -> Result<()> {
    check_unit_open("q", q)?;
    let tf = F::from_u64(t).unwrap();
    if tf < m1 + q {
        return Err(Error::InvalidParameter(format!(
            "bound needs T >= M1 + q, got T={t} M1+q={}",
            m1 + q
        )));
    }
    if tf > m2 - F::one() {
        return Err(Error::InvalidParameter(format!("bound needs T <= M2 - 1, got T={t} M2={m2}")));
    }
    Ok(())
}

/// Poisson-limit upper bounds valid for every `p` with `1 - p <= q`.
pub fn probs_bdc_bounds<F: Real>(m1: F, m2: F, t: u64, q: F, beta1: F) -> Result<ProbReport<F>> {
    check_beta1(beta1)?;
    check_bound_region(m1, m2, t, q)?;
    Ok(ProbReport::new(
        beta1,
        poisson_bound_p12(m1, t, q),
        (-m1).exp(),
        poisson_cdf(m2, t),
        (-m2).exp(),
        Mode::Bound,
    ))
}

/// Bounds for a range of `p` whose upper end is `p_edge`: the full-deletion
/// and 2-to-1 probabilities are evaluated exactly at `p_edge`, where they
/// are largest. `P^(1)→(2)` uses the Poisson bound with `q` when given and
/// the exact value at `p_edge` otherwise.
pub fn probs_bdc_regime<F: Real>(
    m1: F,
    m2: F,
    t: u64,
    beta1: F,
    p_edge: F,
    p12_q: Option<F>,
) -> Result<ProbReport<F>> {
    let at_edge = probs_bdc_exact(m1, m2, t, p_edge, beta1)?;
    let p12 = match p12_q {
        Some(q) => {
            check_bound_region(m1, m2, t, q)?;
            poisson_bound_p12(m1, t, q)
        }
        None => at_edge.p12,
    };
    Ok(ProbReport::new(beta1, p12, at_edge.p10, at_edge.p21, at_edge.p20, Mode::Bound))
}

/// Which PRC quantity to compute.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PrcMode {
    /// Means `λ⌈M/λ⌉` at the given `λ`.
    Exact,
    /// Uniform bounds for all `λ` up to the given `λ` (taken as `λ_max`).
    Bound,
}

pub fn probs_prc<F: Real>(m1: F, m2: F, t: u64, lambda: F, beta1: F, mode: PrcMode) -> Result<ProbReport<F>> {
    if !(lambda > F::zero()) {
        return Err(Error::InvalidParameter(format!("lambda={lambda} must be positive")));
    }
    check_beta1(beta1)?;
    Ok(match mode {
        PrcMode::Exact => {
            let mu1 = lambda * F::from_u64(ceil_snap(m1 / lambda)).unwrap();
            let mu2 = lambda * F::from_u64(ceil_snap(m2 / lambda)).unwrap();
            ProbReport::new(
                beta1,
                poisson_sf(mu1, t + 1),
                (-mu1).exp(),
                poisson_cdf(mu2, t),
                (-mu2).exp(),
                Mode::Exact,
            )
        }
        PrcMode::Bound => ProbReport::new(
            beta1,
            poisson_sf(m1 + lambda, t + 1),
            (-m1).exp(),
            poisson_cdf(m2, t),
            (-m2).exp(),
            Mode::Bound,
        ),
    })
}

/// Exact `E[X]` for a codeword with the given run kinds (1 or 2) when its
/// runs behave independently with the probabilities of `r`.
///
/// A 1-run contributes 1 with probability `P^(1)→(2)`; a 2-run contributes
/// 1 when `1 <= Z <= T`, which has probability `P^(2)→(1) - P^(2)→(0)`. An
/// erased run contributes its length plus the next run's length, or plus 2
/// for the last run.
pub fn expected_x<F: Real>(kinds: &[usize], r: &ProbReport<F>) -> F {
    let last = kinds.len().saturating_sub(1);
    let mut acc = crate::num::CompensatedSum::new();
    for (j, &k) in kinds.iter().enumerate() {
        let (flip, erase) = match k {
            1 => (r.p12, r.p10),
            2 => (r.p21 - r.p20, r.p20),
            _ => panic!("run kind {k} is not 1 or 2"),
        };
        let erased_cost = if j < last { k + kinds[j + 1] } else { k + 2 };
        acc.add(flip + erase * F::from_usize(erased_cost).unwrap());
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bdc_examples() {
        let r = probs_bdc_exact(4.0f64, 2.0, 1, 0.5, 0.5).unwrap();
        assert!((r.p10 - 0.00390625).abs() < 1e-15);
        assert!((r.p21 - 0.3125).abs() < 1e-15);
        assert!(probs_bdc_exact(4.0f64, 2.0, 1, 0.0, 0.5).is_err());
        assert!(probs_bdc_exact(4.0f64, 2.0, 1, 1.0, 0.5).is_err());
    }

    #[test]
    fn aggregates_follow_their_definitions() {
        let r = ProbReport::new(0.5f64, 0.1, 0.2, 0.3, 0.4, Mode::Exact);
        let b2 = 0.25;
        assert!((r.gamma - (0.5 * 0.1 + b2 * 0.3 + 1.25 * 0.2 + 4.0 * b2 * 0.4)).abs() < 1e-15);
        assert!((r.xi - (0.5 * (0.1 + 0.4) + b2 * (0.3 + 1.2))).abs() < 1e-15);
    }

    #[test]
    fn bound_preconditions() {
        assert!(probs_bdc_bounds(5.41f64, 22.8, 12, 0.1, 0.522).is_ok());
        assert!(probs_bdc_bounds(5.41f64, 22.8, 5, 0.1, 0.522).is_err());
        assert!(probs_bdc_bounds(5.41f64, 12.5, 12, 0.1, 0.522).is_err());
        let r = probs_bdc_bounds(5.41f64, 22.8, 12, 0.1, 0.522).unwrap();
        assert!((r.p10 - 0.004472).abs() < 1e-6);
    }

    #[test]
    fn prc_examples() {
        let r = probs_prc(2.0f64, 20.0, 12, 0.5, 0.5, PrcMode::Exact).unwrap();
        assert!((r.p10 - (-2.0f64).exp()).abs() < 1e-15);
        assert!(probs_prc(2.0f64, 20.0, 12, 0.0, 0.5, PrcMode::Exact).is_err());
    }

    #[test]
    fn expected_x_of_clean_channel_is_zero() {
        let r = ProbReport::new(0.5f64, 0.0, 0.0, 0.0, 0.0, Mode::Exact);
        assert_eq!(expected_x(&[1, 2, 1], &r), 0.0);
        let r = ProbReport::new(0.5f64, 0.0, 1.0, 0.0, 0.0, Mode::Exact);
        // each 1-run erased: (1 + 2) + (1 + 2)
        assert_eq!(expected_x(&[1, 2, 1], &r), 6.0);
    }
}
