//! Rate of the concatenated construction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{ceil_snap, lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatePair<F> {
    pub with_ceilings: F,
    pub no_ceilings: F,
}

/// `β = β1 + β2 = (1 + β1) / 2`.
pub fn beta_total<F: Real>(beta1: F) -> F {
    (F::one() + beta1) / lit(2.0)
}

/// `β1 M1 + β2 M2 + M_B`.
pub fn denominator_constant<F: Real>(beta1: F, m1: F, m2: F, mb: F) -> F {
    let beta2 = (F::one() - beta1) / lit(2.0);
    beta1 * m1 + beta2 * m2 + mb
}

/// `R_in R_out / (β1 N1 + β2 N2 + M_B/f + 1/m)` for explicit blow-up
/// lengths, where `f` is `1 - p` or `λ`. Pass `m = ∞` to drop the last term.
pub fn rate_from_lengths<F: Real>(beta1: F, n1: u64, n2: u64, mb: F, f: F, r_in: F, r_out: F, m: F) -> F {
    let beta2 = (F::one() - beta1) / lit(2.0);
    let denom = beta1 * F::from_u64(n1).unwrap() + beta2 * F::from_u64(n2).unwrap() + mb / f + m.recip();
    r_in * r_out / denom
}

fn check_positive<F: Real>(name: &str, v: F) -> Result<()> {
    if v > F::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name}={v} must be positive")))
    }
}

fn rate_pair<F: Real>(m1: F, m2: F, mb: F, beta1: F, f: F, r_in: F, r_out: F, m: F) -> Result<RatePair<F>> {
    for (name, v) in [("M1", m1), ("M2", m2), ("M_B", mb), ("beta1", beta1), ("R_in", r_in), ("R_out", r_out), ("m", m)] {
        check_positive(name, v)?;
    }
    let n1 = ceil_snap(m1 / f);
    let n2 = ceil_snap(m2 / f);
    Ok(RatePair {
        with_ceilings: rate_from_lengths(beta1, n1, n2, mb, f, r_in, r_out, m),
        no_ceilings: r_in * r_out * f / denominator_constant(beta1, m1, m2, mb),
    })
}

/// BDC rate with the ceilings kept and with them dropped.
pub fn rate_bdc<F: Real>(m1: F, m2: F, mb: F, beta1: F, p: F, r_in: F, r_out: F, m: F) -> Result<RatePair<F>> {
    if !(p >= F::zero() && p < F::one()) {
        return Err(Error::InvalidParameter(format!("p={p} must lie in [0, 1)")));
    }
    rate_pair(m1, m2, mb, beta1, F::one() - p, r_in, r_out, m)
}

/// PRC rate with the ceilings kept and with them dropped.
pub fn rate_prc<F: Real>(m1: F, m2: F, mb: F, beta1: F, lambda: F, r_in: F, r_out: F, m: F) -> Result<RatePair<F>> {
    check_positive("lambda", lambda)?;
    rate_pair(m1, m2, mb, beta1, lambda, r_in, r_out, m)
}

fn uniform<F: Real>(m1: F, m2: F, mb: F, beta1: F, f: F, r_in: F, r_out: F, m: F) -> F {
    r_in * r_out * f / (denominator_constant(beta1, m1, m2, mb) + beta_total(beta1) * f + f / m)
}

/// Ceiling-free lower bound
/// `R_in R_out (1-p) / (β1 M1 + β2 M2 + β(1-p) + M_B + (1-p)/m)`.
pub fn rate_bdc_uniform<F: Real>(m1: F, m2: F, mb: F, beta1: F, p: F, r_in: F, r_out: F, m: F) -> F {
    uniform(m1, m2, mb, beta1, F::one() - p, r_in, r_out, m)
}

/// PRC analogue of [`rate_bdc_uniform`] with `λ` in place of `1 - p`.
pub fn rate_prc_uniform<F: Real>(m1: F, m2: F, mb: F, beta1: F, lambda: F, r_in: F, r_out: F, m: F) -> F {
    uniform(m1, m2, mb, beta1, lambda, r_in, r_out, m)
}
