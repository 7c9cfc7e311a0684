//! Scalar abstraction and the small numerical kernels shared by the
//! analysis code: compensated summation, log-gamma, tolerant ceilings and
//! binary entropy.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the analysis routines are generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Relative slack used when snapping a quotient to a nearby integer.
    fn snap_tolerance() -> Self;
}

impl Real for f32 {
    fn snap_tolerance() -> Self {
        1e-5
    }
}

impl Real for f64 {
    fn snap_tolerance() -> Self {
        1e-9
    }
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub fn from_usize<F: Real>(x: usize) -> F {
    F::from_usize(x).expect("integer representable in scalar type")
}

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<F> {
    sum: F,
    carry: F,
}

impl<F: Real> Default for CompensatedSum<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Real> CompensatedSum<F> {
    pub fn new() -> Self {
        Self {
            sum: F::zero(),
            carry: F::zero(),
        }
    }

    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> F {
        self.sum + self.carry
    }
}

impl<F: Real> FromIterator<F> for CompensatedSum<F> {
    fn from_iter<I: IntoIterator<Item = F>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Sums an iterator with compensation.
pub fn compensated_sum<F: Real, I: IntoIterator<Item = F>>(iter: I) -> F {
    iter.into_iter().collect::<CompensatedSum<F>>().total()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function (Lanczos, g = 7, nine terms).
///
/// Valid for `x > 0`; uses the reflection formula below one half.
pub fn ln_gamma<F: Real>(x: F) -> F {
    let half = lit::<F>(0.5);
    if x < half {
        // Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let pi = F::PI();
        return (pi / (pi * x).sin()).abs().ln() - ln_gamma(F::one() - x);
    }
    let x = x - F::one();
    let mut acc = lit::<F>(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += lit::<F>(c) / (x + from_usize(i));
    }
    let t = x + lit::<F>(LANCZOS_G) + half;
    lit::<F>(0.5) * (F::TAU()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// `ln C(n, k)`. Returns `-inf` for `k > n`.
///
/// For small `min(k, n - k)` this sums `ln((n - i)/(i + 1))`; the log-gamma
/// difference loses about `ε ln Γ(n)` to cancellation once `n` is in the
/// thousands.
pub fn ln_choose<F: Real>(n: u64, k: u64) -> F {
    if k > n {
        return F::neg_infinity();
    }
    let k = k.min(n - k);
    if k == 0 {
        return F::zero();
    }
    let nf = F::from_u64(n).unwrap();
    let kf = F::from_u64(k).unwrap();
    if k <= LN_CHOOSE_PRODUCT_MAX {
        return (0..k)
            .map(|i| (F::from_u64(n - i).unwrap() / F::from_u64(i + 1).unwrap()).ln())
            .collect::<CompensatedSum<F>>()
            .total();
    }
    ln_gamma(nf + F::one()) - ln_gamma(kf + F::one()) - ln_gamma(nf - kf + F::one())
}

const LN_CHOOSE_PRODUCT_MAX: u64 = 256;

/// Ceiling that treats values within a relative tolerance of an integer
/// as that integer, so quotients such as `22.8 / (1 - 0.9)` give 228.
pub fn ceil_snap<F: Real>(x: F) -> u64 {
    let r = x.round();
    let tol = F::snap_tolerance() * F::one().max(x.abs());
    let v = if (x - r).abs() <= tol { r } else { x.ceil() };
    v.max(F::zero()).to_u64().unwrap_or(u64::MAX)
}

/// Floor with the same integer snapping as [`ceil_snap`].
pub fn floor_snap<F: Real>(x: F) -> u64 {
    let r = x.round();
    let tol = F::snap_tolerance() * F::one().max(x.abs());
    let v = if (x - r).abs() <= tol { r } else { x.floor() };
    v.max(F::zero()).to_u64().unwrap_or(u64::MAX)
}

/// Binary entropy in bits. Callers guarantee `0 < x < 1`.
pub fn binary_entropy<F: Real>(x: F) -> F {
    let one = F::one();
    -(x * x.log2()) - (one - x) * (one - x).log2()
}
