//! The concatenated scheme: outer encode, inner encode, run blow-up and
//! zero buffers on the way out; buffer identification, run thresholding,
//! inner and outer decoding on the way back.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use num_rational::Ratio;
use serde::Serialize;

use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::inner::{construct_inner, InnerCodebook, InnerParams};
use crate::io::{field, KeyValues};
use crate::num::{ceil_snap, floor_snap};
use crate::outer::{GreedyOuterCode, OuterCode, OuterSpec};
use crate::strings::{edit_distance, BitString};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeParams {
    pub channel: ChannelModel,
    pub m1: f64,
    pub m2: f64,
    pub mb: f64,
    pub t: usize,
    pub inner: InnerParams,
    pub outer: OuterSpec,
}

/// Run and buffer lengths after blow-up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlowUp {
    pub n1: usize,
    pub n2: usize,
    pub b: usize,
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let f = self.channel.survival_rate();
        if f <= 0.0 {
            return bad(format!("channel {:?} transmits nothing", self.channel));
        }
        if !(self.m1 > 0.0 && self.m2 > 0.0 && self.mb > 0.0) {
            return bad("M1, M2 and M_B must be positive".into());
        }
        let t = self.t as f64;
        if !(self.m1 < t && t < self.m2) {
            return bad(format!("need M1 < T < M2, got M1={} T={} M2={}", self.m1, self.t, self.m2));
        }
        if let ChannelModel::Prc(l) = self.channel {
            if self.m2 <= l {
                return bad(format!("need M2 > lambda, got M2={} lambda={l}", self.m2));
            }
        }
        let lens = self.lengths();
        if lens.n1 >= lens.n2 {
            return bad(format!("blow-up lengths N1={} N2={} not increasing", lens.n1, lens.n2));
        }
        if lens.b == 0 {
            return bad("buffer length is zero".into());
        }
        Ok(())
    }

    /// `N1 = ⌈M1/f⌉`, `N2 = ⌈M2/f⌉`, `B = ⌈M_B m/f⌉` with `f = 1-p` or `λ`.
    pub fn lengths(&self) -> BlowUp {
        let f = self.channel.survival_rate();
        let m = self.inner.m() as f64;
        BlowUp {
            n1: ceil_snap(self.m1 / f) as usize,
            n2: ceil_snap(self.m2 / f) as usize,
            b: ceil_snap(self.mb * m / f) as usize,
        }
    }

    /// Zero runs strictly longer than this are buffers.
    pub fn buffer_threshold(&self) -> usize {
        buffer_threshold(self.inner.m(), self.mb)
    }

    /// Key=value descriptor text.
    pub fn to_descriptor(&self, seed: u64, codebook: Option<&str>, outer: Option<&str>) -> String {
        let p = self;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k}={v}").unwrap();
        kv("channel", p.channel.kind().into());
        kv("param", p.channel.param().to_string());
        kv("M1", p.m1.to_string());
        kv("M2", p.m2.to_string());
        kv("MB", p.mb.to_string());
        kv("T", p.t.to_string());
        kv("m", p.inner.m().to_string());
        kv("r1", p.inner.profile.r1.to_string());
        kv("r2", p.inner.profile.r2.to_string());
        kv("d", p.inner.d.to_string());
        kv("q", p.outer.q.to_string());
        kv("n", p.outer.n.to_string());
        kv("k", p.outer.k.to_string());
        kv("dout", p.outer.delta_out.to_string());
        kv("seed", seed.to_string());
        if let Some(c) = codebook {
            kv("codebook", c.into());
        }
        if let Some(o) = outer {
            kv("outer", o.into());
        }
        out
    }

    /// Reads the scheme keys out of a key=value map.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let channel = ChannelModel::from_kind(&field::<String>(kv, "channel")?, field(kv, "param")?)?;
        let inner = InnerParams::new(field(kv, "m")?, field(kv, "r1")?, field(kv, "r2")?, field(kv, "d")?)?;
        let dout = parse_ratio(&field::<String>(kv, "dout")?)?;
        let outer = OuterSpec::new(field(kv, "q")?, field(kv, "n")?, field(kv, "k")?, dout)?;
        let params = Self {
            channel,
            m1: field(kv, "M1")?,
            m2: field(kv, "M2")?,
            mb: field(kv, "MB")?,
            t: field(kv, "T")?,
            inner,
            outer,
        };
        params.validate()?;
        Ok(params)
    }
}

/// Parses `a/b` or a bare integer.
pub fn parse_ratio(s: &str) -> Result<Ratio<u64>> {
    let bad = || Error::Parse(format!("bad ratio {s:?}"));
    let (a, b) = match s.split_once('/') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => (s.trim().parse().map_err(|_| bad())?, 1u64),
    };
    if b == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(a, b))
}

/// `⌊M_B m / 2⌋`.
pub fn buffer_threshold(m: usize, mb: f64) -> usize {
    floor_snap(mb * m as f64 / 2.0) as usize
}

/// Scheme descriptor as stored on disk: parameters, seed and the optional
/// paths of serialized components.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeDescriptor {
    pub params: SchemeParams,
    pub seed: u64,
    pub codebook: Option<PathBuf>,
    pub outer: Option<PathBuf>,
}

impl SchemeDescriptor {
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        Ok(Self {
            params: SchemeParams::from_key_values(kv)?,
            seed: crate::io::field_or(kv, "seed", 0)?,
            codebook: kv.get("codebook").map(PathBuf::from),
            outer: kv.get("outer").map(PathBuf::from),
        })
    }
}

/// Half-open span `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Where every inner codeword, blown-up run and buffer sits in an encoded
/// string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub symbols: Vec<usize>,
    pub codewords: Vec<Span>,
    /// Inner-codeword run lengths (1 or 2) per codeword.
    pub run_kinds: Vec<Vec<usize>>,
    pub runs: Vec<Vec<Span>>,
    pub buffers: Vec<Span>,
    pub total_len: usize,
}

#[derive(Clone)]
pub struct Scheme {
    params: SchemeParams,
    inner: InnerCodebook,
    inner_size: usize,
    outer: Arc<dyn OuterCode>,
    lengths: BlowUp,
    seed: u64,
}

impl std::fmt::Debug for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scheme")
            .field("params", &self.params)
            .field("lengths", &self.lengths)
            .field("inner_size", &self.inner_size)
            .field("seed", &self.seed)
            .finish()
    }
}

/// Builds the inner codebook and the greedy outer code, then assembles the
/// scheme.
pub fn build_scheme(params: &SchemeParams, seed: u64, force: bool) -> Result<Scheme> {
    params.validate()?;
    let inner = construct_inner(&params.inner, force)?;
    if inner.len() < params.outer.q {
        return Err(Error::InnerTooSmall {
            available: inner.len(),
            needed: params.outer.q,
        });
    }
    let outer = GreedyOuterCode::construct(params.outer, seed)?;
    Scheme::from_parts(params, &inner, Arc::new(outer), seed)
}

impl Scheme {
    /// Assembles a scheme from already built components. The inner codebook
    /// is cut down to its first `q` codewords.
    pub fn from_parts(
        params: &SchemeParams,
        inner: &InnerCodebook,
        outer: Arc<dyn OuterCode>,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        if *inner.params() != params.inner {
            return Err(Error::Validation("inner codebook parameters do not match the scheme".into()));
        }
        if *outer.spec() != params.outer {
            return Err(Error::Validation("outer code parameters do not match the scheme".into()));
        }
        Ok(Self {
            params: *params,
            inner: inner.truncated(params.outer.q)?,
            inner_size: inner.len(),
            outer,
            lengths: params.lengths(),
            seed,
        })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn lengths(&self) -> BlowUp {
        self.lengths
    }

    /// The usable (truncated) inner codebook.
    pub fn inner(&self) -> &InnerCodebook {
        &self.inner
    }

    /// Size of the inner codebook before truncation.
    pub fn inner_size(&self) -> usize {
        self.inner_size
    }

    pub fn outer(&self) -> &dyn OuterCode {
        self.outer.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `n (r1 N1 + r2 N2) + (n - 1) B`.
    pub fn encoded_len(&self) -> usize {
        let p = self.params.inner.profile;
        let BlowUp { n1, n2, b } = self.lengths;
        let n = self.params.outer.n;
        n * (p.r1 * n1 + p.r2 * n2) + n.saturating_sub(1) * b
    }

    /// Message bits per transmitted bit, `k log2 q / encoded_len`.
    pub fn rate(&self) -> f64 {
        let o = self.params.outer;
        o.k as f64 * (o.q as f64).log2() / self.encoded_len() as f64
    }

    pub fn encode(&self, message: &[usize]) -> Result<BitString> {
        Ok(self.encode_with_layout(message)?.0)
    }

    pub fn encode_with_layout(&self, message: &[usize]) -> Result<(BitString, Layout)> {
        let symbols = self.outer.encode(message)?;
        self.lay_out(&symbols, false)
    }

    /// One blown-up inner codeword with a buffer on each side.
    pub fn framed_codeword(&self, symbol: usize) -> Result<(BitString, Layout)> {
        self.lay_out(&[symbol], true)
    }

    fn lay_out(&self, symbols: &[usize], framed: bool) -> Result<(BitString, Layout)> {
        let BlowUp { n1, n2, b } = self.lengths;
        let mut bits = BitString::new();
        let mut layout = Layout {
            symbols: symbols.to_vec(),
            codewords: Vec::with_capacity(symbols.len()),
            run_kinds: Vec::with_capacity(symbols.len()),
            runs: Vec::with_capacity(symbols.len()),
            buffers: Vec::new(),
            total_len: 0,
        };
        let push_buffer = |bits: &mut BitString, layout: &mut Layout| {
            let start = bits.len();
            bits.push_run(0, b);
            layout.buffers.push(Span { start, end: bits.len() });
        };
        if framed {
            push_buffer(&mut bits, &mut layout);
        }
        for (i, &sym) in symbols.iter().enumerate() {
            if i > 0 {
                push_buffer(&mut bits, &mut layout);
            }
            let cw = self.inner.encode(sym)?;
            let start = bits.len();
            let mut kinds = Vec::new();
            let mut spans = Vec::new();
            for run in cw.runs().runs() {
                let len = if run.len == 1 { n1 } else { n2 };
                let s = bits.len();
                bits.push_run(run.bit, len);
                kinds.push(run.len);
                spans.push(Span { start: s, end: bits.len() });
            }
            layout.codewords.push(Span { start, end: bits.len() });
            layout.run_kinds.push(kinds);
            layout.runs.push(spans);
        }
        if framed {
            push_buffer(&mut bits, &mut layout);
        }
        layout.total_len = bits.len();
        Ok((bits, layout))
    }

    pub fn decode(&self, received: &BitString) -> Vec<usize> {
        self.decode_with_trace(received, None).0
    }

    /// Decodes and records what each step saw. With ground truth the trace
    /// also classifies error events and computes the per-codeword X.
    pub fn decode_with_trace(
        &self,
        received: &BitString,
        truth: Option<GroundTruth<'_>>,
    ) -> (Vec<usize>, DecodeTrace) {
        let split = split_buffers(received, self.params.buffer_threshold());
        let mut threshold_outputs = Vec::with_capacity(split.windows.len());
        let mut inner_symbols = Vec::with_capacity(split.windows.len());
        for w in &split.windows {
            let out = threshold_decode(&received.slice(w.start, w.end), self.params.t);
            inner_symbols.push(self.inner.decode(&out));
            threshold_outputs.push(out);
        }
        let message = self.outer.decode(&inner_symbols);
        let truth_trace = truth.map(|gt| {
            classify(
                gt,
                &split,
                &threshold_outputs,
                &inner_symbols,
                &self.inner,
                received.len(),
                self.params.t,
            )
        });
        let trace = DecodeTrace {
            window_boundaries: split.windows.iter().map(|w| (w.start, w.end)).collect(),
            threshold_outputs,
            inner_symbols,
            empty_windows_dropped: split.empty_dropped,
            truth: truth_trace,
        };
        (message, trace)
    }
}

/// Replaces each 1-run by `n1` copies and each 2-run by `n2` copies.
pub fn blow_up(codeword: &BitString, n1: usize, n2: usize) -> Result<BitString> {
    let mut out = BitString::new();
    for run in codeword.runs().runs() {
        match run.len {
            1 => out.push_run(run.bit, n1),
            2 => out.push_run(run.bit, n2),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "blow-up input {codeword} has a run of length {}",
                    run.len
                )))
            }
        }
    }
    Ok(out)
}

/// Result of scanning a received string for buffers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BufferSplit {
    pub windows: Vec<Span>,
    pub buffers: Vec<Span>,
    pub empty_dropped: usize,
}

/// Splits on maximal zero runs longer than `threshold`, dropping empty
/// segments.
pub fn split_buffers(bits: &BitString, threshold: usize) -> BufferSplit {
    let mut split = BufferSplit {
        windows: Vec::new(),
        buffers: Vec::new(),
        empty_dropped: 0,
    };
    let mut start = 0;
    let mut pos = 0;
    for run in bits.runs().runs() {
        let end = pos + run.len;
        if run.bit == 0 && run.len > threshold {
            if pos > start {
                split.windows.push(Span { start, end: pos });
            } else {
                split.empty_dropped += 1;
            }
            split.buffers.push(Span { start: pos, end });
            start = end;
        }
        pos = end;
    }
    if pos > start {
        split.windows.push(Span { start, end: pos });
    } else if !split.buffers.is_empty() {
        split.empty_dropped += 1;
    }
    split
}

/// Windows between identified buffers (zero runs strictly longer than
/// `⌊M_B m / 2⌋`).
pub fn identify_buffers(bits: &BitString, m: usize, mb: f64) -> Vec<BitString> {
    split_buffers(bits, buffer_threshold(m, mb))
        .windows
        .iter()
        .map(|w| bits.slice(w.start, w.end))
        .collect()
}

/// Runs longer than `t` become 2-runs, the rest 1-runs.
pub fn threshold_decode(window: &BitString, t: usize) -> BitString {
    let mut out = BitString::new();
    for run in window.runs().runs() {
        out.push_run(run.bit, if run.len > t { 2 } else { 1 });
    }
    out
}

/// `|r'|` for a run with `z` survivors: 2 above the threshold, 1 for
/// `1..=t`, 0 when erased.
pub fn observed_run_len(z: u64, t: usize) -> usize {
    if z == 0 {
        0
    } else if z > t as u64 {
        2
    } else {
        1
    }
}

/// The per-codeword distortion `X = Σ X_j` from run kinds (1 or 2) and
/// survivor counts.
pub fn x_statistic(kinds: &[usize], z: &[u64], t: usize) -> usize {
    assert_eq!(kinds.len(), z.len(), "one survivor count per run");
    let last = kinds.len().saturating_sub(1);
    (0..kinds.len())
        .map(|j| {
            let observed = observed_run_len(z[j], t);
            if observed == kinds[j] {
                0
            } else if z[j] > 0 {
                1
            } else if j < last {
                kinds[j] + kinds[j + 1]
            } else {
                kinds[j] + 2
            }
        })
        .sum()
}

/// Encoder layout plus the channel's per-bit copy counts.
#[derive(Clone, Copy, Debug)]
pub struct GroundTruth<'a> {
    pub layout: &'a Layout,
    pub counts: &'a [u32],
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ErrorEvents {
    pub deleted_buffer: u64,
    pub spurious_buffer: u64,
    pub wrong_inner_decode: u64,
}

impl ErrorEvents {
    pub fn add(&mut self, other: &ErrorEvents) {
        self.deleted_buffer += other.deleted_buffer;
        self.spurious_buffer += other.spurious_buffer;
        self.wrong_inner_decode += other.wrong_inner_decode;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TruthTrace {
    /// Ground truth did not match the received string; nothing else set.
    pub record_mismatch: bool,
    /// Windows correspond one-to-one, in order, with the sent codewords.
    pub aligned: bool,
    pub per_codeword_x: Vec<usize>,
    /// Survivor count of every blown-up run, per codeword.
    pub per_codeword_z: Vec<Vec<u64>>,
    /// `ED(c, c̃)` for codewords that own exactly one window.
    pub per_codeword_ed: Vec<Option<usize>>,
    pub events: ErrorEvents,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodeTrace {
    pub window_boundaries: Vec<(usize, usize)>,
    pub threshold_outputs: Vec<BitString>,
    pub inner_symbols: Vec<usize>,
    pub empty_windows_dropped: usize,
    pub truth: Option<TruthTrace>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Owner {
    Codeword(usize),
    Buffer(usize),
}

fn classify(
    gt: GroundTruth<'_>,
    split: &BufferSplit,
    threshold_outputs: &[BitString],
    inner_symbols: &[usize],
    inner: &InnerCodebook,
    received_len: usize,
    t: usize,
) -> TruthTrace {
    let layout = gt.layout;
    let produced: u64 = gt.counts.iter().map(|&c| c as u64).sum();
    if gt.counts.len() != layout.total_len || produced != received_len as u64 {
        return TruthTrace {
            record_mismatch: true,
            ..TruthTrace::default()
        };
    }

    let mut owner = vec![None; layout.total_len];
    for (i, s) in layout.codewords.iter().enumerate() {
        owner[s.start..s.end].fill(Some(Owner::Codeword(i)));
    }
    for (i, s) in layout.buffers.iter().enumerate() {
        owner[s.start..s.end].fill(Some(Owner::Buffer(i)));
    }
    let mut origin = Vec::with_capacity(received_len);
    for (i, &c) in gt.counts.iter().enumerate() {
        origin.extend(std::iter::repeat_n(i, c as usize));
    }
    let owners_in = |s: &Span| -> BTreeSet<Owner> {
        origin[s.start..s.end].iter().filter_map(|&i| owner[i]).collect()
    };

    let ncw = layout.codewords.len();
    let mut events = ErrorEvents::default();
    let mut detected = vec![false; layout.buffers.len()];
    let mut spurious_hit = vec![false; ncw];
    for b in &split.buffers {
        let owners = owners_in(b);
        let mut any_buffer = false;
        for o in &owners {
            if let Owner::Buffer(i) = *o {
                detected[i] = true;
                any_buffer = true;
            }
        }
        if !any_buffer {
            for o in &owners {
                if let Owner::Codeword(i) = *o {
                    spurious_hit[i] = true;
                }
            }
        }
    }
    events.deleted_buffer = detected.iter().filter(|&&d| !d).count() as u64;
    events.spurious_buffer = spurious_hit.iter().filter(|&&s| s).count() as u64;

    let mut windows_of = vec![Vec::new(); ncw];
    let mut window_cws = Vec::with_capacity(split.windows.len());
    for (w, span) in split.windows.iter().enumerate() {
        let cws: Vec<usize> = owners_in(span)
            .into_iter()
            .filter_map(|o| match o {
                Owner::Codeword(i) => Some(i),
                Owner::Buffer(_) => None,
            })
            .collect();
        for &c in &cws {
            windows_of[c].push(w);
        }
        window_cws.push(cws);
    }
    let mut per_codeword_ed = vec![None; ncw];
    let mut aligned = split.windows.len() == ncw;
    for c in 0..ncw {
        let clean = windows_of[c].len() == 1 && window_cws[windows_of[c][0]] == [c];
        aligned &= clean && windows_of[c][0] == c;
        if clean {
            let w = windows_of[c][0];
            let sent = inner.encode(layout.symbols[c]).expect("layout symbol in range");
            per_codeword_ed[c] = Some(edit_distance(sent, &threshold_outputs[w]));
            if inner_symbols[w] != layout.symbols[c] {
                events.wrong_inner_decode += 1;
            }
        }
    }

    let per_codeword_z: Vec<Vec<u64>> = layout
        .runs
        .iter()
        .map(|spans| {
            spans
                .iter()
                .map(|s| gt.counts[s.start..s.end].iter().map(|&c| c as u64).sum())
                .collect()
        })
        .collect();
    let per_codeword_x = layout
        .run_kinds
        .iter()
        .zip(&per_codeword_z)
        .map(|(k, z)| x_statistic(k, z, t))
        .collect();

    TruthTrace {
        record_mismatch: false,
        aligned,
        per_codeword_x,
        per_codeword_z,
        per_codeword_ed,
        events,
    }
}
