//! The inner code: a greedy code inside `S_{m,β1}` whose codewords pairwise
//! share no common subsequence of length `m - d`, together with the
//! deletion/insertion ball machinery used to size it.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use itertools::Itertools;
use num_bigint::BigUint;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::{binary_entropy, Real};
use crate::strings::{
    edit_distance, enumerate_s, in_s, is_subsequence, lcs_len, BitString, PackedLcs, Run, SProfile,
};

/// Candidate-count ceiling for the greedy construction without `force`.
pub const CANDIDATE_LIMIT: u128 = 10_000_000;

/// Profile plus decoding radius `d` (the radius is `d` symbols, `δ = d/m`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct InnerParams {
    pub profile: SProfile,
    pub d: usize,
}

impl InnerParams {
    pub fn new(m: usize, r1: usize, r2: usize, d: usize) -> Result<Self> {
        let profile = SProfile::new(m, r1, r2)?;
        if d > m {
            return Err(Error::InvalidParameter(format!("radius d={d} exceeds m={m}")));
        }
        Ok(Self { profile, d })
    }

    pub fn m(&self) -> usize {
        self.profile.m
    }

    pub fn delta(&self) -> f64 {
        self.d as f64 / self.profile.m as f64
    }
}

/// Greedy inner code. Codewords are kept in lexicographic order and the
/// symbol of a codeword is its position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerCodebook {
    params: InnerParams,
    codewords: Vec<BitString>,
}

impl InnerCodebook {
    /// Wraps a codeword list after checking every invariant.
    pub fn from_codewords(params: InnerParams, codewords: Vec<BitString>) -> Result<Self> {
        let cb = Self { params, codewords };
        cb.validate()?;
        Ok(cb)
    }

    pub fn params(&self) -> &InnerParams {
        &self.params
    }

    pub fn codewords(&self) -> &[BitString] {
        &self.codewords
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn index_of(&self, word: &BitString) -> Option<usize> {
        self.codewords.binary_search(word).ok()
    }

    /// `log2 |C| / m`.
    pub fn measured_rate(&self) -> f64 {
        if self.codewords.is_empty() {
            return 0.0;
        }
        (self.codewords.len() as f64).log2() / self.params.m() as f64
    }

    /// The first `q` codewords.
    pub fn truncated(&self, q: usize) -> Result<Self> {
        if q > self.len() {
            return Err(Error::InnerTooSmall {
                available: self.len(),
                needed: q,
            });
        }
        Ok(Self {
            params: self.params,
            codewords: self.codewords[..q].to_vec(),
        })
    }

    /// Checks membership, ordering and pairwise separation `ED > 2d`.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        for (i, c) in self.codewords.iter().enumerate() {
            if c.len() != p.m() || !in_s(c) {
                return Err(Error::Validation(format!("codeword {i} ({c}) not in S_m")));
            }
            if SProfile::of(c)? != p.profile {
                return Err(Error::Validation(format!("codeword {i} ({c}) has the wrong profile")));
            }
            if i > 0 && self.codewords[i - 1] >= *c {
                return Err(Error::Validation(format!("codeword {i} is out of lexicographic order")));
            }
        }
        if let Some((i, j)) = self.first_close_pair() {
            return Err(Error::Validation(format!(
                "codewords {i} and {j} are within edit distance {}",
                2 * p.d
            )));
        }
        Ok(())
    }

    /// First pair violating `ED(c, c') > 2d`, found by exhaustive search.
    pub fn first_close_pair(&self) -> Option<(usize, usize)> {
        let limit = 2 * self.params.d;
        let cws = &self.codewords;
        (0..cws.len())
            .into_par_iter()
            .filter_map(|i| {
                (i + 1..cws.len())
                    .find(|&j| edit_distance(&cws[i], &cws[j]) <= limit)
                    .map(|j| (i, j))
            })
            .min()
    }

    pub fn encode(&self, symbol: usize) -> Result<&BitString> {
        self.codewords.get(symbol).ok_or(Error::SymbolOutOfRange {
            symbol,
            size: self.codewords.len(),
        })
    }

    /// Index of a codeword nearest to `window` in edit distance, smallest
    /// index on ties. Panics on an empty codebook.
    pub fn decode(&self, window: &BitString) -> usize {
        assert!(!self.codewords.is_empty(), "decode on an empty codebook");
        let m = self.params.m();
        let mut best = (usize::MAX, 0usize);
        for (i, c) in self.codewords.iter().enumerate() {
            let l = match PackedLcs::new(c) {
                Some(p) => p.lcs_with(window.bits()),
                None => lcs_len(c, window),
            };
            let ed = m + window.len() - 2 * l;
            if ed < best.0 {
                best = (ed, i);
            }
        }
        best.1
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = format!(
            "innercode v1 m={} r1={} r2={} d={} count={}\n",
            p.m(),
            p.profile.r1,
            p.profile.r2,
            p.d,
            self.len()
        );
        for c in &self.codewords {
            writeln!(out, "{c}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty codebook file".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("innercode") || fields.next() != Some("v1") {
            return Err(Error::Parse(format!("bad codebook header: {header}")));
        }
        let kv = crate::io::parse_header_fields(fields)?;
        let get = |k: &str| crate::io::field_usize(&kv, k);
        let params = InnerParams::new(get("m")?, get("r1")?, get("r2")?, get("d")?)?;
        let count = get("count")?;
        let codewords = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse::<BitString>())
            .collect::<Result<Vec<_>>>()?;
        if codewords.len() != count {
            return Err(Error::Parse(format!(
                "codebook header says {count} codewords, found {}",
                codewords.len()
            )));
        }
        Self::from_codewords(params, codewords)
    }
}

/// Greedy construction over `S_{m,β1}` in lexicographic order.
///
/// A candidate is kept iff its LCS with every kept codeword is `< m - d`.
pub fn construct_inner(params: &InnerParams, force: bool) -> Result<InnerCodebook> {
    let candidates = params.profile.count();
    if candidates > CANDIDATE_LIMIT && !force {
        return Err(Error::TooManyCandidates {
            candidates,
            limit: CANDIDATE_LIMIT,
        });
    }
    let m = params.m();
    let reject_at = m - params.d;
    let mut codewords: Vec<BitString> = Vec::new();
    let mut packed: Vec<PackedLcs> = Vec::new();
    for cand in enumerate_s(&params.profile)? {
        let too_close = match PackedLcs::new(&cand) {
            Some(_) => {
                let bits = cand.bits();
                if packed.len() > 512 {
                    packed.par_iter().any(|p| p.lcs_with(bits) >= reject_at)
                } else {
                    packed.iter().any(|p| p.lcs_with(bits) >= reject_at)
                }
            }
            None => codewords.par_iter().any(|c| lcs_len(c, &cand) >= reject_at),
        };
        if !too_close {
            if let Some(p) = PackedLcs::new(&cand) {
                packed.push(p);
            }
            codewords.push(cand);
        }
    }
    Ok(InnerCodebook {
        params: *params,
        codewords,
    })
}

/// Lower-bound rate `β h(β1/β) − (δ+β) h(δ/(δ+β)) − β h(δ/β)` with
/// `β = (1 + β1)/2` and no slack term.
pub fn inner_rate_formula<F: Real>(beta1: F, delta: F) -> Result<F> {
    let one = F::one();
    let bad = |what: &str, v: F| {
        Err(Error::InvalidParameter(format!(
            "inner rate: {what} = {v} is outside (0, 1)"
        )))
    };
    let open = |v: F| v > F::zero() && v < one;
    if !open(beta1) {
        return bad("beta1", beta1);
    }
    if !open(delta) {
        return bad("delta", delta);
    }
    let beta = (one + beta1) / (one + one);
    let args = [
        ("beta1/beta", beta1 / beta),
        ("delta/(delta+beta)", delta / (delta + beta)),
        ("delta/beta", delta / beta),
    ];
    for (what, v) in args {
        if !open(v) {
            return bad(what, v);
        }
    }
    Ok(beta * binary_entropy(args[0].1)
        - (delta + beta) * binary_entropy(args[1].1)
        - beta * binary_entropy(args[2].1))
}

/// Deletion ball bound `C(r1 + r2 + d, d)`.
pub fn deletion_ball_bound(params: &InnerParams) -> BigUint {
    binomial_big(params.profile.runs() + params.d, params.d)
}

/// Insertion ball bound `(d + 1) · C(r1 + r2, d)` for the target profile.
pub fn insertion_ball_bound(target: &SProfile, d: usize) -> BigUint {
    BigUint::from(d + 1) * binomial_big(target.runs(), d)
}

pub(crate) fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u8);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u8);
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Members of `S` that are subsequences of `s` with length `|s| − d`,
/// by exhaustive deletion. Intended for desk-scale checks.
pub fn deletion_ball_s(s: &BitString, d: usize) -> BTreeSet<BitString> {
    let n = s.len();
    if d > n {
        return BTreeSet::new();
    }
    (0..n)
        .combinations(d)
        .map(|del| {
            let mut keep = BitString::new();
            let mut it = del.iter().peekable();
            for (i, &b) in s.bits().iter().enumerate() {
                if it.peek() == Some(&&i) {
                    it.next();
                } else {
                    keep.push(b);
                }
            }
            keep
        })
        .filter(in_s)
        .collect()
}

#[derive(Clone, Copy)]
struct EmbedRun {
    bit: u8,
    len: usize,
    frozen: bool,
}

/// Every string of `S_target` containing `s_sub` as a subsequence, produced
/// by the three-step embedding: split `x` chosen 2-runs into three 1-runs
/// (the first of which is frozen), append alternating 1-runs on the right,
/// then double a selection of non-frozen 1-runs.
pub fn embed_all(s_sub: &BitString, target: &SProfile) -> Result<BTreeSet<BitString>> {
    let target = SProfile::new(target.m, target.r1, target.r2)?;
    let sub_profile = SProfile::of(s_sub)?;
    if s_sub.len() > target.m {
        return Err(Error::InvalidParameter(format!(
            "s_sub of length {} is longer than the target length {}",
            s_sub.len(),
            target.m
        )));
    }
    let d = target.m - s_sub.len();
    let (r1, r2) = (sub_profile.r1, sub_profile.r2);
    let total_runs = target.runs();
    let runs = s_sub.runs();
    let two_runs: Vec<usize> = runs
        .runs()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.len == 2)
        .map(|(i, _)| i)
        .collect();

    let mut out = BTreeSet::new();
    for x in 0..=d.min(r2) {
        let Some(appended) = total_runs.checked_sub(r1 + r2 + 2 * x) else {
            continue;
        };
        // step 3 doubles d - (βm - r1 - r2 - x) runs
        let Some(doubled) = (d + x + r1 + r2).checked_sub(total_runs) else {
            continue;
        };
        for split in two_runs.iter().copied().combinations(x) {
            let layout = split_and_append(runs.runs(), &split, appended);
            let free: Vec<usize> = layout
                .iter()
                .enumerate()
                .filter(|(_, r)| r.len == 1 && !r.frozen)
                .map(|(i, _)| i)
                .collect();
            if doubled > free.len() {
                continue;
            }
            for grow in free.iter().copied().combinations(doubled) {
                let mut s = BitString::new();
                let mut g = grow.iter().peekable();
                for (i, r) in layout.iter().enumerate() {
                    let len = if g.peek() == Some(&&i) {
                        g.next();
                        2
                    } else {
                        r.len
                    };
                    s.push_run(r.bit, len);
                }
                out.insert(s);
            }
        }
    }
    Ok(out)
}

fn split_and_append(runs: &[Run], split: &[usize], appended: usize) -> Vec<EmbedRun> {
    let mut layout = Vec::with_capacity(runs.len() + 2 * split.len() + appended);
    let mut sp = split.iter().peekable();
    for (i, r) in runs.iter().enumerate() {
        if sp.peek() == Some(&&i) {
            sp.next();
            layout.push(EmbedRun { bit: r.bit, len: 1, frozen: true });
            layout.push(EmbedRun { bit: 1 - r.bit, len: 1, frozen: false });
            layout.push(EmbedRun { bit: r.bit, len: 1, frozen: false });
        } else {
            layout.push(EmbedRun { bit: r.bit, len: r.len, frozen: false });
        }
    }
    let mut last = layout.last().map_or(0, |r| r.bit);
    for _ in 0..appended {
        last = 1 - last;
        layout.push(EmbedRun { bit: last, len: 1, frozen: false });
    }
    layout
}

/// Insertion ball by filtering `S_target`; refuses `target.m > 15`.
pub fn insertion_ball_bruteforce(s_sub: &BitString, target: &SProfile) -> Result<BTreeSet<BitString>> {
    let target = SProfile::new(target.m, target.r1, target.r2)?;
    if target.m > 15 {
        return Err(Error::InvalidParameter(format!(
            "brute-force insertion ball limited to m <= 15, got {}",
            target.m
        )));
    }
    Ok(enumerate_s(&target)?
        .into_iter()
        .filter(|s| is_subsequence(s_sub, s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> BTreeSet<BitString> {
        xs.iter().map(|&s| BitString::from(s)).collect()
    }

    #[test]
    fn radius_zero_accepts_everything() {
        let cb = construct_inner(&InnerParams::new(7, 3, 2, 0).unwrap(), false).unwrap();
        assert_eq!(cb.len(), 10);
    }

    #[test]
    fn radius_two_at_m7_is_separated() {
        let params = InnerParams::new(7, 3, 2, 2).unwrap();
        let cb = construct_inner(&params, false).unwrap();
        let all = enumerate_s(&params.profile).unwrap();
        assert_eq!(cb.codewords()[0], all[0]);
        for (i, a) in cb.codewords().iter().enumerate() {
            for b in &cb.codewords()[i + 1..] {
                assert!(edit_distance(a, b) > 4);
            }
        }
    }

    #[test]
    fn encode_decode_round_trip() {
        let cb = construct_inner(&InnerParams::new(9, 5, 2, 1).unwrap(), false).unwrap();
        for i in 0..cb.len() {
            assert_eq!(cb.decode(cb.encode(i).unwrap()), i);
        }
        assert!(cb.encode(cb.len()).is_err());
        // every codeword is at distance m from the empty window
        assert_eq!(cb.decode(&BitString::new()), 0);
    }

    #[test]
    fn rate_formula_rejects_out_of_range() {
        assert!(inner_rate_formula(0.0f64, 0.1).is_err());
        assert!(inner_rate_formula(0.5f64, 1.0).is_err());
        assert!(inner_rate_formula(0.5f64, 0.01).is_ok());
    }

    #[test]
    fn deletion_bound_examples() {
        let p = InnerParams::new(7, 3, 2, 2).unwrap();
        assert_eq!(deletion_ball_bound(&p), BigUint::from(21u32));
        let p0 = InnerParams::new(7, 3, 2, 0).unwrap();
        assert_eq!(deletion_ball_bound(&p0), BigUint::from(1u32));
    }

    #[test]
    fn embed_small_example() {
        let target = SProfile::new(5, 1, 2).unwrap();
        let got = embed_all(&"101".into(), &target).unwrap();
        assert_eq!(got, set(&["10011", "11011", "11001"]));
        assert_eq!(got, insertion_ball_bruteforce(&"101".into(), &target).unwrap());
        assert!(BigUint::from(got.len()) <= insertion_ball_bound(&target, 2));
        assert_eq!(insertion_ball_bound(&target, 2), BigUint::from(9u32));
    }

    #[test]
    fn embed_identity_and_errors() {
        let s: BitString = "1100101".into();
        let p = SProfile::of(&s).unwrap();
        assert_eq!(embed_all(&s, &p).unwrap(), set(&["1100101"]));
        assert!(embed_all(&"10001".into(), &p).is_err());
        assert!(embed_all(&"0110".into(), &p).is_err());
    }

    #[test]
    fn brute_force_guards() {
        assert_eq!(
            insertion_ball_bruteforce(&"1".into(), &SProfile::new(1, 1, 0).unwrap()).unwrap(),
            set(&["1"])
        );
        assert!(insertion_ball_bruteforce(&"11".into(), &SProfile { m: 3, r1: 1, r2: 1 }).is_err());
        let big = SProfile::new(17, 9, 4).unwrap();
        assert!(insertion_ball_bruteforce(&"1".into(), &big).is_err());
    }

    #[test]
    fn codebook_text_round_trip() {
        let cb = construct_inner(&InnerParams::new(7, 3, 2, 2).unwrap(), false).unwrap();
        let back = InnerCodebook::from_text(&cb.to_text()).unwrap();
        assert_eq!(back, cb);
        let tampered = cb.to_text().replace("count=", "count=9");
        assert!(InnerCodebook::from_text(&tampered).is_err());
    }

    #[test]
    fn loader_rejects_close_pairs() {
        let params = InnerParams::new(7, 3, 2, 2).unwrap();
        let all = enumerate_s(&params.profile).unwrap();
        assert!(InnerCodebook::from_codewords(params, all[..2].to_vec()).is_err());
    }

    #[test]
    fn guard_trips_without_force() {
        // C(41, 21) is far above the limit; the guard fires before enumeration
        let p = InnerParams::new(61, 21, 20, 2).unwrap();
        assert!(matches!(
            construct_inner(&p, false),
            Err(Error::TooManyCandidates { .. })
        ));
    }
}
