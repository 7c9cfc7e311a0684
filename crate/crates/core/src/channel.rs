//! Seeded simulators for the binary deletion channel and the Poisson repeat
//! channel.
//!
//! Randomness comes from ChaCha8 keyed by the master seed, with the stream
//! index selecting one of its 2^64 independent streams.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strings::BitString;

/// Largest Poisson mean accepted by the multiply-uniforms sampler.
pub const POISSON_LAMBDA_MAX: f64 = 700.0;

pub type ChannelRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "lowercase")]
pub enum ChannelModel {
    Bdc(f64),
    Prc(f64),
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelModel::Bdc(p) if !(0.0..=1.0).contains(&p) => Err(Error::InvalidParameter(
                format!("deletion probability p={p} outside [0, 1]"),
            )),
            ChannelModel::Prc(l) if !(0.0..=POISSON_LAMBDA_MAX).contains(&l) => Err(
                Error::InvalidParameter(format!("repeat mean lambda={l} outside [0, {POISSON_LAMBDA_MAX}]")),
            ),
            _ => Ok(()),
        }
    }

    /// Expected copies per transmitted bit: `1 - p` or `λ`.
    pub fn survival_rate(&self) -> f64 {
        match *self {
            ChannelModel::Bdc(p) => 1.0 - p,
            ChannelModel::Prc(l) => l,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ChannelModel::Bdc(_) => "bdc",
            ChannelModel::Prc(_) => "prc",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            ChannelModel::Bdc(p) | ChannelModel::Prc(p) => p,
        }
    }

    pub fn from_kind(kind: &str, param: f64) -> Result<Self> {
        let model = match kind {
            "bdc" => ChannelModel::Bdc(param),
            "prc" => ChannelModel::Prc(param),
            other => return Err(Error::Parse(format!("unknown channel kind {other:?}"))),
        };
        model.validate()?;
        Ok(model)
    }

    /// Sends `bits` through the channel, recording how many output copies
    /// each input bit produced.
    pub fn transmit<R: Rng + ?Sized>(&self, bits: &BitString, rng: &mut R) -> Transmission {
        match *self {
            ChannelModel::Bdc(p) => bdc_transmission(bits, p, rng),
            ChannelModel::Prc(l) => prc_transmission(bits, l, rng),
        }
    }
}

/// Position in the splittable generator family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChannelRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Channel output plus the per-input-bit copy counts (0 or 1 for the BDC).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub output: BitString,
    pub counts: Vec<u32>,
}

fn bdc_transmission<R: Rng + ?Sized>(bits: &BitString, p: f64, rng: &mut R) -> Transmission {
    let keep = 1.0 - p;
    let mut output = BitString::new();
    let counts = bits
        .bits()
        .iter()
        .map(|&b| {
            let kept = rng.gen_bool(keep);
            if kept {
                output.push(b);
            }
            kept as u32
        })
        .collect();
    Transmission { output, counts }
}

fn prc_transmission<R: Rng + ?Sized>(bits: &BitString, lambda: f64, rng: &mut R) -> Transmission {
    let limit = (-lambda).exp();
    let mut output = BitString::new();
    let counts = bits
        .bits()
        .iter()
        .map(|&b| {
            let c = knuth_poisson(limit, rng);
            output.push_run(b, c as usize);
            c
        })
        .collect();
    Transmission { output, counts }
}

pub fn bdc_transmit<R: Rng + ?Sized>(bits: &BitString, p: f64, rng: &mut R) -> Result<BitString> {
    ChannelModel::Bdc(p).validate()?;
    Ok(bdc_transmission(bits, p, rng).output)
}

pub fn prc_transmit<R: Rng + ?Sized>(bits: &BitString, lambda: f64, rng: &mut R) -> Result<BitString> {
    ChannelModel::Prc(lambda).validate()?;
    Ok(prc_transmission(bits, lambda, rng).output)
}

/// Poisson(λ) variate: multiply uniforms until the product drops to
/// `e^{-λ}` or below.
pub fn poisson_sample<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u32> {
    if !(0.0..=POISSON_LAMBDA_MAX).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "poisson mean lambda={lambda} outside [0, {POISSON_LAMBDA_MAX}]"
        )));
    }
    Ok(knuth_poisson((-lambda).exp(), rng))
}

fn knuth_poisson<R: Rng + ?Sized>(limit: f64, rng: &mut R) -> u32 {
    let mut k = 0u32;
    let mut prod: f64 = rng.gen();
    while prod > limit {
        k += 1;
        prod *= rng.gen::<f64>();
    }
    k
}
