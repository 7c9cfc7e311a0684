//! Binary strings, their run decomposition, LCS / edit distance, and the
//! constrained family `S_{m,β1}` of strings starting and ending with `1`
//! that contain only 1-runs and 2-runs.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite binary string. Each element is `0` or `1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Builds from raw symbols; any nonzero byte is read as `1`.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        Self(bits.into_iter().map(|b| u8::from(b != 0)).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn push(&mut self, bit: u8) {
        self.0.push(u8::from(bit != 0));
    }

    pub fn push_run(&mut self, bit: u8, len: usize) {
        let bit = u8::from(bit != 0);
        self.0.extend(std::iter::repeat_n(bit, len));
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn slice(&self, start: usize, end: usize) -> BitString {
        BitString(self.0[start..end].to_vec())
    }

    pub fn runs(&self) -> RunString {
        runs_of(self)
    }

    /// Packs a string of at most 64 bits, first bit in the least
    /// significant position.
    pub(crate) fn pack(&self) -> Option<u64> {
        if self.len() > 64 {
            return None;
        }
        Some(
            self.0
                .iter()
                .enumerate()
                .fold(0u64, |w, (i, &b)| w | (u64::from(b) << i)),
        )
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl serde::Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.bytes()
            .map(|c| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(Error::Parse(format!("invalid bit character {:?}", c as char))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitString)
    }
}

impl From<&str> for BitString {
    /// Panics on characters other than `0` / `1`; intended for literals.
    fn from(s: &str) -> Self {
        s.parse().expect("bit string literal")
    }
}

/// A maximal block of equal symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Run {
    pub bit: u8,
    pub len: usize,
}

/// Alternating run decomposition of a [`BitString`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RunString {
    runs: Vec<Run>,
}

impl RunString {
    /// Validates alternation and nonzero lengths.
    pub fn new(runs: Vec<Run>) -> Result<Self> {
        for (i, r) in runs.iter().enumerate() {
            if r.len == 0 || r.bit > 1 {
                return Err(Error::InvalidParameter(format!("bad run at {i}: {r:?}")));
            }
            if i > 0 && runs[i - 1].bit == r.bit {
                return Err(Error::InvalidParameter(format!(
                    "runs {} and {i} do not alternate",
                    i - 1
                )));
            }
        }
        Ok(Self { runs })
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn bit_len(&self) -> usize {
        self.runs.iter().map(|r| r.len).sum()
    }

    pub fn to_bits(&self) -> BitString {
        let mut out = BitString::new();
        for r in &self.runs {
            out.push_run(r.bit, r.len);
        }
        out
    }

    /// Number of runs of length one and two; `None` if a longer run exists.
    pub fn short_run_counts(&self) -> Option<(usize, usize)> {
        let mut r1 = 0;
        let mut r2 = 0;
        for r in &self.runs {
            match r.len {
                1 => r1 += 1,
                2 => r2 += 1,
                _ => return None,
            }
        }
        Some((r1, r2))
    }
}

pub fn runs_of(s: &BitString) -> RunString {
    let mut runs: Vec<Run> = Vec::new();
    for &b in s.bits() {
        match runs.last_mut() {
            Some(r) if r.bit == b => r.len += 1,
            _ => runs.push(Run { bit: b, len: 1 }),
        }
    }
    RunString { runs }
}

/// `(length, r1, r2)` of a member of `S_{m, β1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SProfile {
    pub m: usize,
    pub r1: usize,
    pub r2: usize,
}

impl SProfile {
    pub fn new(m: usize, r1: usize, r2: usize) -> Result<Self> {
        let bad = |reason| Err(Error::InvalidProfile { m, r1, r2, reason });
        if m != r1 + 2 * r2 {
            return bad("m must equal r1 + 2*r2");
        }
        if (r1 + r2).is_multiple_of(2) {
            return bad("run count r1 + r2 must be odd");
        }
        Ok(Self { m, r1, r2 })
    }

    /// Profile of a string already known to lie in `S`.
    pub fn of(s: &BitString) -> Result<Self> {
        if !in_s(s) {
            return Err(Error::NotInS(s.to_string()));
        }
        let (r1, r2) = s.runs().short_run_counts().expect("checked by in_s");
        Self::new(s.len(), r1, r2)
    }

    pub fn runs(&self) -> usize {
        self.r1 + self.r2
    }

    pub fn beta1(&self) -> f64 {
        self.r1 as f64 / self.m as f64
    }

    pub fn beta2(&self) -> f64 {
        self.r2 as f64 / self.m as f64
    }

    /// `|S_{m,β1}| = C(r1 + r2, r1)`.
    pub fn count(&self) -> u128 {
        binomial_u128(self.runs() as u64, self.r1 as u64)
    }
}

pub(crate) fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// Membership in `S`: nonempty, starts and ends with 1, runs of length ≤ 2.
pub fn in_s(s: &BitString) -> bool {
    let b = s.bits();
    !b.is_empty()
        && b[0] == 1
        && b[b.len() - 1] == 1
        && b.windows(3).all(|w| !(w[0] == w[1] && w[1] == w[2]))
}

/// `true` iff `needle` is a subsequence of `hay` (greedy matching).
pub fn is_subsequence(needle: &BitString, hay: &BitString) -> bool {
    let mut it = hay.bits().iter();
    needle.bits().iter().all(|c| it.any(|h| h == c))
}

/// LCS length over any alphabet with two-row dynamic programming.
pub fn lcs_len_by<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Insertion/deletion edit distance over any alphabet.
pub fn edit_distance_by<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.len() + b.len() - 2 * lcs_len_by(a, b)
}

pub fn lcs_len(a: &BitString, b: &BitString) -> usize {
    lcs_len_by(a.bits(), b.bits())
}

pub fn edit_distance(a: &BitString, b: &BitString) -> usize {
    edit_distance_by(a.bits(), b.bits())
}

/// One longest common subsequence. On the traceback a match is taken
/// whenever possible, otherwise the step moves left in `b`.
pub fn lcs(a: &BitString, b: &BitString) -> BitString {
    let (a, b) = (a.bits(), b.bits());
    let w = b.len() + 1;
    let mut t = vec![0usize; (a.len() + 1) * w];
    for i in 0..a.len() {
        for j in 0..b.len() {
            t[(i + 1) * w + j + 1] = if a[i] == b[j] {
                t[i * w + j] + 1
            } else {
                t[(i + 1) * w + j].max(t[i * w + j + 1])
            };
        }
    }
    let (mut i, mut j) = (a.len(), b.len());
    let mut out = Vec::with_capacity(t[i * w + j]);
    while i > 0 && j > 0 {
        if a[i - 1] == b[j - 1] {
            out.push(a[i - 1]);
            i -= 1;
            j -= 1;
        } else if t[i * w + j - 1] >= t[(i - 1) * w + j] {
            j -= 1;
        } else {
            i -= 1;
        }
    }
    out.reverse();
    BitString(out)
}

/// Bit-parallel LCS length for short binary strings (`a.len() <= 64`).
pub(crate) struct PackedLcs {
    len: usize,
    mask: u64,
    matches: [u64; 2],
}

impl PackedLcs {
    pub(crate) fn new(a: &BitString) -> Option<Self> {
        let ones = a.pack()?;
        let len = a.len();
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        Some(Self {
            len,
            mask,
            matches: [!ones & mask, ones],
        })
    }

    pub(crate) fn lcs_with(&self, b: &[u8]) -> usize {
        let mut v = self.mask;
        for &c in b {
            let u = v & self.matches[c as usize];
            v = (v.wrapping_add(u) | (v - u)) & self.mask;
        }
        self.len - v.count_ones() as usize
    }
}

/// All members of `S_{m,β1}` for the profile, in lexicographic order.
pub fn enumerate_s(profile: &SProfile) -> Result<Vec<BitString>> {
    let profile = SProfile::new(profile.m, profile.r1, profile.r2)?;
    let mut out = Vec::with_capacity(profile.count().min(1 << 24) as usize);
    let mut buf = Vec::with_capacity(profile.m);
    enumerate_into(&mut buf, 1, profile.r1, profile.r2, &mut out);
    Ok(out)
}

// Depth-first over runs. At a run of bit b the two choices first differ at
// the next position: a 2-run continues with b, a 1-run switches to !b. So
// for b = 0 the 2-run branch is lexicographically smaller, for b = 1 the
// 1-run branch is.
fn enumerate_into(buf: &mut Vec<u8>, bit: u8, r1: usize, r2: usize, out: &mut Vec<BitString>) {
    if r1 + r2 == 0 {
        out.push(BitString(buf.clone()));
        return;
    }
    let order: [usize; 2] = if bit == 0 { [2, 1] } else { [1, 2] };
    for len in order {
        let (n1, n2) = match len {
            1 if r1 > 0 => (r1 - 1, r2),
            2 if r2 > 0 => (r1, r2 - 1),
            _ => continue,
        };
        buf.extend(std::iter::repeat_n(bit, len));
        enumerate_into(buf, 1 - bit, n1, n2, out);
        buf.truncate(buf.len() - len);
    }
}

/// Flips the middle bit of every three consecutive equal bits, scanning
/// left to right, producing a string of the same length inside `S`.
pub fn s_normalize(s: &BitString) -> Result<BitString> {
    let b = s.bits();
    if b.is_empty() || b[0] != 1 || b[b.len() - 1] != 1 {
        return Err(Error::InvalidParameter(format!(
            "s_normalize needs a string starting and ending with 1, got {s}"
        )));
    }
    let mut v = b.to_vec();
    for i in 1..v.len().saturating_sub(1) {
        if v[i - 1] == v[i] && v[i] == v[i + 1] {
            v[i] ^= 1;
        }
    }
    Ok(BitString(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(pairs: &[(u8, usize)]) -> RunString {
        RunString::new(pairs.iter().map(|&(bit, len)| Run { bit, len }).collect()).unwrap()
    }

    #[test]
    fn runs_of_examples() {
        assert_eq!(runs_of(&"0111001".into()), rs(&[(0, 1), (1, 3), (0, 2), (1, 1)]));
        assert_eq!(runs_of(&BitString::new()), RunString::default());
        assert_eq!(
            runs_of(&"1100101".into()),
            rs(&[(1, 2), (0, 2), (1, 1), (0, 1), (1, 1)])
        );
    }

    #[test]
    fn run_string_rejects_non_alternating() {
        let bad = vec![Run { bit: 1, len: 1 }, Run { bit: 1, len: 2 }];
        assert!(RunString::new(bad).is_err());
        assert!(RunString::new(vec![Run { bit: 0, len: 0 }]).is_err());
    }

    #[test]
    fn lcs_examples() {
        assert_eq!(lcs_len(&"1110101".into(), &"11001".into()), 5);
        assert_eq!(lcs_len(&"1101".into(), &"1011".into()), 3);
        let s: BitString = "0110100".into();
        assert_eq!(lcs_len(&s, &s), 7);
        assert_eq!(lcs(&"1101".into(), &"1011".into()).len(), 3);
    }

    #[test]
    fn edit_distance_examples() {
        let s: BitString = "10110".into();
        assert_eq!(edit_distance(&s, &s), 0);
        assert_eq!(edit_distance(&"1101".into(), &"1011".into()), 2);
        assert_eq!(edit_distance(&BitString::new(), &s), 5);
    }

    #[test]
    fn enumerate_profile_7_3_2() {
        let all = enumerate_s(&SProfile::new(7, 3, 2).unwrap()).unwrap();
        assert_eq!(all.len(), 10);
        assert!(all.contains(&"1100101".into()));
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }

    #[test]
    fn enumerate_trivial_and_invalid() {
        let one = enumerate_s(&SProfile { m: 1, r1: 1, r2: 0 }).unwrap();
        assert_eq!(one, vec![BitString::from("1")]);
        assert!(SProfile::new(4, 0, 2).is_err());
        assert!(enumerate_s(&SProfile { m: 4, r1: 0, r2: 2 }).is_err());
        assert!(SProfile::new(5, 1, 1).is_err());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(s_normalize(&"111".into()).unwrap(), BitString::from("101"));
        assert_eq!(s_normalize(&"101".into()).unwrap(), BitString::from("101"));
        let n = s_normalize(&"11111".into()).unwrap();
        assert_eq!(n, BitString::from("10101"));
        assert!(in_s(&n));
        assert!(s_normalize(&"0110".into()).is_err());
    }

    #[test]
    fn subsequence_check() {
        assert!(is_subsequence(&"101".into(), &"11011".into()));
        assert!(!is_subsequence(&"000".into(), &"10101".into()));
        assert!(is_subsequence(&BitString::new(), &"1".into()));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("10a1".parse::<BitString>().is_err());
        assert_eq!("".parse::<BitString>().unwrap(), BitString::new());
    }

    proptest::proptest! {
        #[test]
        fn packed_lcs_matches_dp(
            a in proptest::collection::vec(0u8..2, 0..=64),
            b in proptest::collection::vec(0u8..2, 0..40),
        ) {
            let packed = PackedLcs::new(&BitString::from_bits(a.iter().copied())).unwrap();
            proptest::prop_assert_eq!(packed.lcs_with(&b), lcs_len_by(&a, &b));
        }
    }

    #[test]
    fn packed_lcs_needs_a_word() {
        assert!(PackedLcs::new(&BitString::zeros(65)).is_none());
    }
}
