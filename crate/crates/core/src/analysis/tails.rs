//! Binomial and Poisson probabilities, summed term by term in log space.

use crate::num::{ln_choose, ln_gamma, CompensatedSum, Real};

/// `Pr[Bin(n, s) = k]`.
pub fn binomial_pmf<F: Real>(n: u64, k: u64, s: F) -> F {
    if k > n {
        return F::zero();
    }
    let one = F::one();
    // the log form is undefined on the boundary
    if s <= F::zero() {
        return if k == 0 { one } else { F::zero() };
    }
    if s >= one {
        return if k == n { one } else { F::zero() };
    }
    let kf = F::from_u64(k).unwrap();
    let rest = F::from_u64(n - k).unwrap();
    (ln_choose::<F>(n, k) + kf * s.ln() + rest * (-s).ln_1p()).exp()
}

/// `Pr[Bin(n, s) <= k]`.
pub fn binomial_cdf<F: Real>(n: u64, k: u64, s: F) -> F {
    if k >= n {
        return F::one();
    }
    (0..=k).map(|i| binomial_pmf(n, i, s)).collect::<CompensatedSum<F>>().total()
}

/// `Pr[Bin(n, s) >= k]`, summed over the upper tail directly.
pub fn binomial_sf<F: Real>(n: u64, k: u64, s: F) -> F {
    if k == 0 {
        return F::one();
    }
    if k > n {
        return F::zero();
    }
    (k..=n).map(|i| binomial_pmf(n, i, s)).collect::<CompensatedSum<F>>().total()
}

/// `e^{-μ} μ^k / k!`.
pub fn poisson_pmf<F: Real>(mu: F, k: u64) -> F {
    if mu <= F::zero() {
        return if k == 0 { F::one() } else { F::zero() };
    }
    let kf = F::from_u64(k).unwrap();
    (-mu + kf * mu.ln() - ln_gamma(kf + F::one())).exp()
}

/// `Pr[Poisson(μ) <= k] = e^{-μ} Σ_{i<=k} μ^i / i!`.
pub fn poisson_cdf<F: Real>(mu: F, k: u64) -> F {
    (0..=k).map(|i| poisson_pmf(mu, i)).collect::<CompensatedSum<F>>().total()
}

/// `Pr[Poisson(μ) >= k]`, summed over the upper tail until the terms stop
/// contributing.
pub fn poisson_sf<F: Real>(mu: F, k: u64) -> F {
    if k == 0 {
        return F::one();
    }
    let mut acc = CompensatedSum::new();
    let mode = mu.to_u64().unwrap_or(0);
    let mut i = k;
    loop {
        let term = poisson_pmf(mu, i);
        acc.add(term);
        if i > mode && term <= acc.total() * F::epsilon() * crate::num::lit(1e-3) {
            break;
        }
        i += 1;
    }
    acc.total()
}
