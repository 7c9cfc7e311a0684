//! Outer insertion-deletion code over the alphabet `{0, .., q-1}`.
//!
//! [`OuterCode`] is the black-box contract; [`GreedyOuterCode`] is a small
//! seeded greedy code that satisfies it at desk scale.

use std::fmt::Write as _;

use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::strings::{edit_distance_by, lcs_len_by};

/// Largest message space the greedy construction will enumerate.
pub const MAX_MESSAGES: u64 = 1_000_000;

/// Random candidates drawn per required codeword before giving up.
pub const POOL_FACTOR: u64 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OuterSpec {
    pub q: usize,
    pub n: usize,
    pub k: usize,
    /// Decoding radius as a fraction of `n`.
    pub delta_out: Ratio<u64>,
}

impl OuterSpec {
    pub fn new(q: usize, n: usize, k: usize, delta_out: Ratio<u64>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!("outer alphabet q={q} must be at least 2")));
        }
        if k > n {
            return Err(Error::InvalidParameter(format!("outer k={k} exceeds n={n}")));
        }
        if *delta_out.numer() == 0 || delta_out >= Ratio::from_integer(1) {
            return Err(Error::InvalidParameter(format!(
                "delta_out={delta_out} must lie strictly between 0 and 1"
            )));
        }
        Ok(Self { q, n, k, delta_out })
    }

    /// `⌊δ_out · n⌋`, the number of symbol edits the code must absorb.
    pub fn radius(&self) -> usize {
        (self.delta_out * Ratio::from_integer(self.n as u64)).to_integer() as usize
    }

    /// Whether `ed > 2 δ_out n`, evaluated exactly.
    pub fn separated(&self, ed: usize) -> bool {
        let lhs = ed as u128 * *self.delta_out.denom() as u128;
        let rhs = 2 * self.n as u128 * *self.delta_out.numer() as u128;
        lhs > rhs
    }

    /// `q^k`, or `None` on overflow.
    pub fn message_count(&self) -> Option<u64> {
        (self.q as u64).checked_pow(self.k as u32)
    }

    /// `k / n` of the constructed code.
    pub fn rate(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.k as f64 / self.n as f64
        }
    }

    fn check_message(&self, message: &[usize]) -> Result<()> {
        if message.len() != self.k {
            return Err(Error::MessageLength {
                got: message.len(),
                expected: self.k,
            });
        }
        if let Some(&s) = message.iter().find(|&&s| s >= self.q) {
            return Err(Error::SymbolOutOfRange { symbol: s, size: self.q });
        }
        Ok(())
    }

    /// Base-`q` rank of a message, most significant symbol first.
    pub fn rank(&self, message: &[usize]) -> Result<u64> {
        self.check_message(message)?;
        Ok(message.iter().fold(0u64, |acc, &s| acc * self.q as u64 + s as u64))
    }

    pub fn unrank(&self, mut rank: u64) -> Vec<usize> {
        let mut msg = vec![0; self.k];
        for slot in msg.iter_mut().rev() {
            *slot = (rank % self.q as u64) as usize;
            rank /= self.q as u64;
        }
        msg
    }
}

/// Encoder/decoder pair with the insertion-deletion guarantee:
/// `decode(y) = x` whenever the symbol edit distance between `encode(x)`
/// and `y` is at most `δ_out · n`.
pub trait OuterCode: Send + Sync {
    fn spec(&self) -> &OuterSpec;
    fn encode(&self, message: &[usize]) -> Result<Vec<usize>>;
    /// Total: any symbol sequence yields some message.
    fn decode(&self, received: &[usize]) -> Vec<usize>;
}

/// Greedy code: codewords drawn from a seeded pseudorandom stream and kept
/// when far enough from every kept word. Codeword `i` encodes the message of
/// rank `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyOuterCode {
    spec: OuterSpec,
    seed: u64,
    codewords: Vec<Vec<usize>>,
}

impl GreedyOuterCode {
    pub fn construct(spec: OuterSpec, seed: u64) -> Result<Self> {
        let needed = spec
            .message_count()
            .filter(|&c| c <= MAX_MESSAGES)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "q^k = {}^{} exceeds the greedy limit of {MAX_MESSAGES} messages",
                    spec.q, spec.k
                ))
            })? as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut codewords: Vec<Vec<usize>> = Vec::with_capacity(needed);
        let pool = POOL_FACTOR * needed as u64;
        let mut drawn = 0u64;
        while codewords.len() < needed {
            if drawn == pool {
                return Err(Error::PoolExhausted {
                    achieved: codewords.len(),
                    needed,
                });
            }
            drawn += 1;
            let cand: Vec<usize> = (0..spec.n).map(|_| rng.gen_range(0..spec.q)).collect();
            if codewords
                .iter()
                .all(|c| spec.separated(edit_distance_by(c, &cand)))
            {
                codewords.push(cand);
            }
        }
        Ok(Self { spec, seed, codewords })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }

    /// First pair closer than `2 δ_out n`, by exhaustive search.
    pub fn first_close_pair(&self) -> Option<(usize, usize)> {
        let cws = &self.codewords;
        (0..cws.len()).find_map(|i| {
            (i + 1..cws.len())
                .find(|&j| !self.spec.separated(edit_distance_by(&cws[i], &cws[j])))
                .map(|j| (i, j))
        })
    }

    pub fn to_text(&self) -> String {
        let s = &self.spec;
        let mut out = format!(
            "outercode v1 q={} n={} k={} dout_num={} dout_den={} seed={}\n",
            s.q,
            s.n,
            s.k,
            s.delta_out.numer(),
            s.delta_out.denom(),
            self.seed
        );
        for c in &self.codewords {
            let line = c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            writeln!(out, "{line}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty outer code file".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("outercode") || fields.next() != Some("v1") {
            return Err(Error::Parse(format!("bad outer code header: {header}")));
        }
        let kv = crate::io::parse_header_fields(fields)?;
        let num: u64 = crate::io::field(&kv, "dout_num")?;
        let den: u64 = crate::io::field(&kv, "dout_den")?;
        if den == 0 {
            return Err(Error::Parse("dout_den must be nonzero".into()));
        }
        let spec = OuterSpec::new(
            crate::io::field(&kv, "q")?,
            crate::io::field(&kv, "n")?,
            crate::io::field(&kv, "k")?,
            Ratio::new(num, den),
        )?;
        let seed = crate::io::field(&kv, "seed")?;
        // an empty codeword (n = 0) is written as an empty line, so only
        // trailing blank lines are ignored here
        let mut body: Vec<&str> = lines.collect();
        let expected = spec.message_count().unwrap_or(u64::MAX) as usize;
        while body.len() > expected && body.last().is_some_and(|l| l.trim().is_empty()) {
            body.pop();
        }
        let codewords = body
            .iter()
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad symbol {t:?}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let code = Self { spec, seed, codewords };
        code.validate()?;
        Ok(code)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.spec;
        let expected = s.message_count().unwrap_or(u64::MAX);
        if self.codewords.len() as u64 != expected {
            return Err(Error::Validation(format!(
                "outer code has {} codewords, expected q^k = {expected}",
                self.codewords.len()
            )));
        }
        for (i, c) in self.codewords.iter().enumerate() {
            if c.len() != s.n || c.iter().any(|&x| x >= s.q) {
                return Err(Error::Validation(format!("outer codeword {i} is malformed")));
            }
        }
        if let Some((i, j)) = self.first_close_pair() {
            return Err(Error::Validation(format!(
                "outer codewords {i} and {j} are not separated by more than 2*delta_out*n"
            )));
        }
        Ok(())
    }
}

impl OuterCode for GreedyOuterCode {
    fn spec(&self) -> &OuterSpec {
        &self.spec
    }

    fn encode(&self, message: &[usize]) -> Result<Vec<usize>> {
        let r = self.spec.rank(message)?;
        Ok(self.codewords[r as usize].clone())
    }

    fn decode(&self, received: &[usize]) -> Vec<usize> {
        let mut best = (usize::MAX, 0usize);
        for (i, c) in self.codewords.iter().enumerate() {
            let ed = c.len() + received.len() - 2 * lcs_len_by(c, received);
            if ed < best.0 {
                best = (ed, i);
            }
        }
        self.spec.unrank(best.1 as u64)
    }
}
