//! Monte Carlo experiments, desk-scale presets and the CSV/JSON reports
//! behind the command line tool.
//!
//! Trials run in parallel with one RNG stream per trial index, and results
//! are gathered in trial order, so a report depends only on its inputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    expected_x, presets, probs_bdc_exact, probs_prc, rate_bdc, verify_preset, PrcMode, ProbReport, R_OUT,
};
use crate::channel::{ChannelModel, RngStream};
use crate::error::{Error, Result};
use crate::inner::{construct_inner, inner_rate_formula, InnerCodebook, InnerParams};
use crate::io::{field_or, parse_key_values, KeyValues};
use crate::outer::{GreedyOuterCode, OuterSpec};
use crate::scheme::{ErrorEvents, GroundTruth, Scheme, SchemeDescriptor, SchemeParams};
use crate::strings::BitString;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "DELCHAN_THREADS";

/// `⌊(M1 + M2) / 2⌋`, the threshold halfway between the expected survivor
/// counts of the two run kinds.
pub fn midway_threshold(m1: f64, m2: f64) -> usize {
    ((m1 + m2) / 2.0).floor() as usize
}

fn desk_inner() -> InnerParams {
    InnerParams::new(25, 13, 6, 2).expect("valid desk profile")
}

fn desk_outer() -> OuterSpec {
    OuterSpec::new(16, 32, 2, Ratio::new(1, 4)).expect("valid desk outer spec")
}

/// Named desk-scale configurations.
pub const DESK_PRESETS: [&str; 5] = ["desk-bdc", "desk-bdc-e2e", "desk-bdc-lossless", "desk-prc", "desk-prc-e2e"];

/// Desk configuration by name.
///
/// The `-e2e` and `-lossless` variants raise `M_B` from 0.5 to 3 so that the
/// buffer threshold `⌊M_B m/2⌋` clears every blown-up zero run inside a
/// codeword; with `M_B = 0.5` the threshold is 6 and every 2-run of zeros is
/// read as a buffer.
pub fn desk_preset(name: &str) -> Result<SchemeParams> {
    let bdc = |p: f64, mb: f64| SchemeParams {
        channel: ChannelModel::Bdc(p),
        m1: 4.2,
        m2: 17.5,
        mb,
        t: midway_threshold(4.2, 17.5),
        inner: desk_inner(),
        outer: desk_outer(),
    };
    let prc = |mb: f64| SchemeParams {
        channel: ChannelModel::Prc(0.5),
        m1: 5.0,
        m2: 20.0,
        mb,
        t: midway_threshold(5.0, 20.0),
        inner: desk_inner(),
        outer: desk_outer(),
    };
    let params = match name {
        "desk-bdc" => bdc(0.3, 0.5),
        "desk-bdc-e2e" => bdc(0.3, 3.0),
        "desk-bdc-lossless" => bdc(0.0, 3.0),
        "desk-prc" => prc(0.5),
        "desk-prc-e2e" => prc(3.0),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown preset {other:?} (known: {})",
                DESK_PRESETS.join(", ")
            )))
        }
    };
    params.validate()?;
    Ok(params)
}

/// Runs `f` on a pool sized by `DELCHAN_THREADS` when set.
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Which experiment `simulate` runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentMode {
    SingleCodeword,
    EndToEnd,
    Transitions,
    Sweep,
}

impl FromStr for ExperimentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "single_codeword" => Self::SingleCodeword,
            "end_to_end" => Self::EndToEnd,
            "transitions" => Self::Transitions,
            "sweep" => Self::Sweep,
            other => return Err(Error::Parse(format!("unknown mode {other:?}"))),
        })
    }
}

/// Default trial count when a config names none.
pub const DEFAULT_TRIALS: u64 = 10_000;

/// Default dense-grid size of a sweep.
pub const DEFAULT_GRID: usize = 99;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: SchemeDescriptor,
    pub trials: u64,
    pub master_seed: u64,
    pub mode: ExperimentMode,
    pub grid: usize,
}

impl ExperimentConfig {
    /// Reads an experiment from key=value pairs.
    ///
    /// The scheme comes from `preset=<name>`, from `scheme=<descriptor
    /// path>` resolved against `base`, or from inline scheme keys. Other keys:
    /// `trials`, `master_seed`, `mode`, `grid` and the construction `seed`.
    pub fn from_key_values(kv: &KeyValues, base: &Path) -> Result<Self> {
        let scheme = if let Some(name) = kv.get("preset") {
            SchemeDescriptor {
                params: desk_preset(name)?,
                seed: field_or(kv, "seed", 0)?,
                codebook: None,
                outer: None,
            }
        } else if let Some(path) = kv.get("scheme") {
            let (desc, _) = read_descriptor(&base.join(path))?;
            desc
        } else {
            SchemeDescriptor::from_key_values(kv)?
        };
        let cfg = Self {
            scheme,
            trials: field_or(kv, "trials", DEFAULT_TRIALS)?,
            master_seed: field_or(kv, "master_seed", 0)?,
            mode: field_or(kv, "mode", ExperimentMode::SingleCodeword)?,
            grid: field_or(kv, "grid", DEFAULT_GRID)?,
        };
        check_trials(cfg.trials)?;
        Ok(cfg)
    }
}

/// Reads a descriptor file and resolves its component paths against the
/// file's directory.
pub fn read_descriptor(path: &Path) -> Result<(SchemeDescriptor, PathBuf)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut desc = SchemeDescriptor::from_key_values(&parse_key_values(&text)?)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    desc.codebook = desc.codebook.map(|p| dir.join(p));
    desc.outer = desc.outer.map(|p| dir.join(p));
    Ok((desc, dir))
}

/// Loads the serialized components a descriptor names and builds the rest.
pub fn load_scheme(desc: &SchemeDescriptor, force: bool) -> Result<Scheme> {
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|e| Error::Validation(format!("cannot read {}: {e}", p.display())))
    };
    let inner = match &desc.codebook {
        Some(p) => {
            let cb = InnerCodebook::from_text(&read(p)?)?;
            cb.validate()?;
            cb
        }
        None => construct_inner(&desc.params.inner, force)?,
    };
    if inner.len() < desc.params.outer.q {
        return Err(Error::InnerTooSmall {
            available: inner.len(),
            needed: desc.params.outer.q,
        });
    }
    let outer = match &desc.outer {
        Some(p) => {
            let o = GreedyOuterCode::from_text(&read(p)?)?;
            o.validate()?;
            o
        }
        None => GreedyOuterCode::construct(desc.params.outer, desc.seed)?,
    };
    Scheme::from_parts(&desc.params, &inner, Arc::new(outer), desc.seed)
}

/// Exact transition probabilities for a scheme's channel and lengths.
pub fn analytic_probs(params: &SchemeParams) -> Result<ProbReport<f64>> {
    let beta1 = params.inner.profile.beta1();
    let t = params.t as u64;
    match params.channel {
        ChannelModel::Bdc(p) if p == 0.0 => {
            // nothing is ever deleted and N1 <= T < N2 is checked by the caller
            let l = params.lengths();
            let p12 = if l.n1 > params.t { 1.0 } else { 0.0 };
            let p21 = if l.n2 <= params.t { 1.0 } else { 0.0 };
            Ok(ProbReport::new(beta1, p12, 0.0, p21, 0.0, crate::analysis::Mode::Exact))
        }
        ChannelModel::Bdc(p) => probs_bdc_exact(params.m1, params.m2, t, p, beta1),
        ChannelModel::Prc(l) => probs_prc(params.m1, params.m2, t, l, beta1, PrcMode::Exact),
    }
}

/// Parameters echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub channel: ChannelModel,
    pub m1: f64,
    pub m2: f64,
    pub mb: f64,
    pub t: usize,
    pub m: usize,
    pub r1: usize,
    pub r2: usize,
    pub d: usize,
    pub q: usize,
    pub n: usize,
    pub k: usize,
    pub delta_out: String,
    pub n1: usize,
    pub n2: usize,
    pub b: usize,
    pub buffer_threshold: usize,
}

impl ConfigEcho {
    pub fn of(params: &SchemeParams) -> Self {
        let l = params.lengths();
        Self {
            channel: params.channel,
            m1: params.m1,
            m2: params.m2,
            mb: params.mb,
            t: params.t,
            m: params.inner.m(),
            r1: params.inner.profile.r1,
            r2: params.inner.profile.r2,
            d: params.inner.d,
            q: params.outer.q,
            n: params.outer.n,
            k: params.outer.k,
            delta_out: params.outer.delta_out.to_string(),
            n1: l.n1,
            n2: l.n2,
            b: l.b,
            buffer_threshold: params.buffer_threshold(),
        }
    }
}

/// Counts of observed run transitions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TransitionCounts {
    pub ones: u64,
    pub twos: u64,
    pub one_to_two: u64,
    pub one_to_zero: u64,
    pub two_to_one: u64,
    pub two_to_zero: u64,
}

impl TransitionCounts {
    /// Records one run of kind `kind` with `z` survivors under threshold `t`.
    /// `two_to_one` counts every `z <= t`, including erasures.
    pub fn record(&mut self, kind: usize, z: u64, t: usize) {
        let t = t as u64;
        if kind == 1 {
            self.ones += 1;
            self.one_to_two += (z > t) as u64;
            self.one_to_zero += (z == 0) as u64;
        } else {
            self.twos += 1;
            self.two_to_one += (z <= t) as u64;
            self.two_to_zero += (z == 0) as u64;
        }
    }

    pub fn merge(&mut self, o: &TransitionCounts) {
        self.ones += o.ones;
        self.twos += o.twos;
        self.one_to_two += o.one_to_two;
        self.one_to_zero += o.one_to_zero;
        self.two_to_one += o.two_to_one;
        self.two_to_zero += o.two_to_zero;
    }

    /// Empirical `[P12, P10, P21, P20]`.
    pub fn frequencies(&self) -> [f64; 4] {
        let f = |c: u64, n: u64| if n == 0 { 0.0 } else { c as f64 / n as f64 };
        [
            f(self.one_to_two, self.ones),
            f(self.one_to_zero, self.ones),
            f(self.two_to_one, self.twos),
            f(self.two_to_zero, self.twos),
        ]
    }
}

/// One probability compared against its exact value with a 3σ binomial
/// band.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbCheck {
    pub name: String,
    pub exact: f64,
    pub empirical: f64,
    pub sigma: f64,
    pub ok: bool,
}

impl ProbCheck {
    pub fn new(name: &str, exact: f64, empirical: f64, samples: u64) -> Self {
        let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
        // a zero-width band only admits the exact value itself
        let ok = (empirical - exact).abs() <= 3.0 * sigma + 1e-12;
        Self {
            name: name.into(),
            exact,
            empirical,
            sigma,
            ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingleCodewordTrial {
    pub trial: u64,
    pub symbol: usize,
    pub x: usize,
    pub ed: Option<usize>,
    pub inner_correct: bool,
    pub deleted_buffer: u64,
    pub spurious_buffer: u64,
    pub aligned: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingleCodewordReport {
    pub mode: &'static str,
    pub config: ConfigEcho,
    pub trials: u64,
    pub master_seed: u64,
    pub analytic: ProbReport<f64>,
    pub mean_x: f64,
    pub var_x: f64,
    pub stderr_x: f64,
    /// `ξ m` and `γ m + P^(1)→(0)`.
    pub x_lower: f64,
    pub x_upper: f64,
    /// `E[X]` averaged over the codebook, from the exact run probabilities.
    pub expected_x: f64,
    pub sandwich_ok: bool,
    pub events: ErrorEvents,
    pub inner_errors: u64,
    pub buffers_sent: u64,
    pub deleted_buffer_freq: f64,
    pub deleted_buffer_bound: f64,
    pub deleted_buffer_ok: bool,
    pub transitions: TransitionCounts,
    pub transition_checks: Vec<ProbCheck>,
    pub per_trial: Vec<SingleCodewordTrial>,
}

impl SingleCodewordReport {
    pub fn passed(&self) -> bool {
        self.sandwich_ok
    }
}

fn mean_var(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let mean = xs.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

fn transition_checks(exact: &ProbReport<f64>, c: &TransitionCounts) -> Vec<ProbCheck> {
    let e = c.frequencies();
    vec![
        ProbCheck::new("P12", exact.p12, e[0], c.ones),
        ProbCheck::new("P10", exact.p10, e[1], c.ones),
        ProbCheck::new("P21", exact.p21, e[2], c.twos),
        ProbCheck::new("P20", exact.p20, e[3], c.twos),
    ]
}

/// Sends one blown-up codeword framed by two buffers per trial and records
/// the X statistic and the error events.
pub fn run_single_codeword(scheme: &Scheme, trials: u64, master_seed: u64) -> Result<SingleCodewordReport> {
    check_trials(trials)?;
    let params = *scheme.params();
    let analytic = analytic_probs(&params)?;
    let q = params.outer.q;
    let work = |i: u64| {
        let mut rng = RngStream::new(master_seed, i).rng();
        let symbol = rng.gen_range(0..q);
        let (bits, layout) = scheme.framed_codeword(symbol).expect("symbol below q");
        let tx = params.channel.transmit(&bits, &mut rng);
        let gt = GroundTruth {
            layout: &layout,
            counts: &tx.counts,
        };
        let (_, trace) = scheme.decode_with_trace(&tx.output, Some(gt));
        let truth = trace.truth.expect("ground truth supplied");
        let mut counts = TransitionCounts::default();
        for (&kind, &z) in layout.run_kinds[0].iter().zip(&truth.per_codeword_z[0]) {
            counts.record(kind, z, params.t);
        }
        let inner_correct = trace.inner_symbols.len() == 1 && trace.inner_symbols[0] == symbol;
        (
            SingleCodewordTrial {
                trial: i,
                symbol,
                x: truth.per_codeword_x[0],
                ed: truth.per_codeword_ed[0],
                inner_correct,
                deleted_buffer: truth.events.deleted_buffer,
                spurious_buffer: truth.events.spurious_buffer,
                aligned: truth.aligned,
            },
            truth.events,
            counts,
        )
    };
    let results: Vec<_> = with_pool(|| (0..trials).into_par_iter().map(work).collect())?;

    let mut events = ErrorEvents::default();
    let mut transitions = TransitionCounts::default();
    let mut per_trial = Vec::with_capacity(results.len());
    for (rec, ev, tc) in results {
        events.add(&ev);
        transitions.merge(&tc);
        per_trial.push(rec);
    }
    let (mean_x, var_x) = mean_var(per_trial.iter().map(|r| r.x as f64));
    let stderr_x = (var_x / trials as f64).sqrt();
    let m = params.inner.m();
    let x_lower = analytic.x_lower(m);
    let x_upper = analytic.x_upper(m);
    let cb = scheme.inner();
    let expected = (0..q)
        .map(|s| {
            let kinds: Vec<usize> = cb.codewords()[s].runs().runs().iter().map(|r| r.len).collect();
            expected_x(&kinds, &analytic)
        })
        .sum::<f64>()
        / q as f64;
    let sandwich_ok = mean_x >= x_lower - 3.0 * stderr_x && mean_x <= x_upper + 3.0 * stderr_x;

    let buffers_sent = 2 * trials;
    let deleted_buffer_freq = events.deleted_buffer as f64 / buffers_sent as f64;
    let deleted_buffer_bound = (-params.mb * m as f64 / 8.0).exp();
    let sigma_b = (deleted_buffer_bound * (1.0 - deleted_buffer_bound) / buffers_sent as f64).sqrt();
    let deleted_buffer_ok = deleted_buffer_freq <= deleted_buffer_bound + 3.0 * sigma_b;
    let inner_errors = per_trial.iter().filter(|r| !r.inner_correct).count() as u64;

    Ok(SingleCodewordReport {
        mode: "single_codeword",
        config: ConfigEcho::of(&params),
        trials,
        master_seed,
        transition_checks: transition_checks(&analytic, &transitions),
        analytic,
        mean_x,
        var_x,
        stderr_x,
        x_lower,
        x_upper,
        expected_x: expected,
        sandwich_ok,
        events,
        inner_errors,
        buffers_sent,
        deleted_buffer_freq,
        deleted_buffer_bound,
        deleted_buffer_ok,
        transitions,
        per_trial,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionReport {
    pub mode: &'static str,
    pub config: ConfigEcho,
    pub trials: u64,
    pub master_seed: u64,
    pub exact: ProbReport<f64>,
    pub counts: TransitionCounts,
    pub checks: Vec<ProbCheck>,
    pub ok: bool,
}

/// Transmits one blown-up 1-run and one blown-up 2-run per trial and
/// compares the observed transition frequencies with the exact values.
pub fn run_transitions(params: &SchemeParams, trials: u64, master_seed: u64) -> Result<TransitionReport> {
    check_trials(trials)?;
    params.validate()?;
    let exact = analytic_probs(params)?;
    let l = params.lengths();
    let one = BitString::from_bits(std::iter::repeat_n(1, l.n1));
    let two = BitString::from_bits(std::iter::repeat_n(1, l.n2));
    let work = |i: u64| {
        let mut rng = RngStream::new(master_seed, i).rng();
        let z1 = params.channel.transmit(&one, &mut rng).output.len() as u64;
        let z2 = params.channel.transmit(&two, &mut rng).output.len() as u64;
        let mut c = TransitionCounts::default();
        c.record(1, z1, params.t);
        c.record(2, z2, params.t);
        c
    };
    let parts: Vec<TransitionCounts> = with_pool(|| (0..trials).into_par_iter().map(work).collect())?;
    let mut counts = TransitionCounts::default();
    for c in &parts {
        counts.merge(c);
    }
    let checks = transition_checks(&exact, &counts);
    let ok = checks.iter().all(|c| c.ok);
    Ok(TransitionReport {
        mode: "transitions",
        config: ConfigEcho::of(params),
        trials,
        master_seed,
        exact,
        counts,
        checks,
        ok,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndToEndTrial {
    pub trial: u64,
    pub success: bool,
    pub windows: usize,
    pub deleted_buffer: u64,
    pub spurious_buffer: u64,
    pub wrong_inner_decode: u64,
    pub aligned: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndToEndReport {
    pub mode: &'static str,
    pub config: ConfigEcho,
    pub trials: u64,
    pub master_seed: u64,
    pub rate: f64,
    pub successes: u64,
    pub success_rate: f64,
    pub events: ErrorEvents,
    pub aligned_trials: u64,
    pub per_trial: Vec<EndToEndTrial>,
}

impl EndToEndReport {
    /// At least 95% of the messages decoded.
    pub fn passed(&self) -> bool {
        self.successes * 100 >= self.trials * 95
    }
}

/// Encodes a random message per trial, transmits it and decodes it.
pub fn run_end_to_end(scheme: &Scheme, trials: u64, master_seed: u64) -> Result<EndToEndReport> {
    check_trials(trials)?;
    let params = *scheme.params();
    let work = |i: u64| {
        let mut rng = RngStream::new(master_seed, i).rng();
        let message: Vec<usize> = (0..params.outer.k).map(|_| rng.gen_range(0..params.outer.q)).collect();
        let (bits, layout) = scheme.encode_with_layout(&message).expect("valid random message");
        let tx = params.channel.transmit(&bits, &mut rng);
        let gt = GroundTruth {
            layout: &layout,
            counts: &tx.counts,
        };
        let (decoded, trace) = scheme.decode_with_trace(&tx.output, Some(gt));
        let truth = trace.truth.expect("ground truth supplied");
        EndToEndTrial {
            trial: i,
            success: decoded == message,
            windows: trace.window_boundaries.len(),
            deleted_buffer: truth.events.deleted_buffer,
            spurious_buffer: truth.events.spurious_buffer,
            wrong_inner_decode: truth.events.wrong_inner_decode,
            aligned: truth.aligned,
        }
    };
    let per_trial: Vec<EndToEndTrial> = with_pool(|| (0..trials).into_par_iter().map(work).collect())?;
    let mut events = ErrorEvents::default();
    for t in &per_trial {
        events.add(&ErrorEvents {
            deleted_buffer: t.deleted_buffer,
            spurious_buffer: t.spurious_buffer,
            wrong_inner_decode: t.wrong_inner_decode,
        });
    }
    let successes = per_trial.iter().filter(|t| t.success).count() as u64;
    Ok(EndToEndReport {
        mode: "end_to_end",
        config: ConfigEcho::of(&params),
        trials,
        master_seed,
        rate: scheme.rate(),
        successes,
        success_rate: successes as f64 / trials as f64,
        events,
        aligned_trials: per_trial.iter().filter(|t| t.aligned).count() as u64,
        per_trial,
    })
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    Ok(())
}

/// Serialized output of one experiment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentOutput {
    /// Pretty JSON for the Monte Carlo modes, CSV for a sweep.
    pub report: String,
    /// Per-trial CSV where the mode has one.
    pub csv: Option<String>,
    pub passed: bool,
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Runs the experiment a config describes. The output depends only on the
/// config.
pub fn run_experiment(cfg: &ExperimentConfig, force: bool) -> Result<ExperimentOutput> {
    Ok(match cfg.mode {
        ExperimentMode::SingleCodeword => {
            let scheme = load_scheme(&cfg.scheme, force)?;
            let r = run_single_codeword(&scheme, cfg.trials, cfg.master_seed)?;
            ExperimentOutput {
                report: to_json(&r)?,
                csv: Some(single_codeword_csv(&r)),
                passed: r.passed(),
            }
        }
        ExperimentMode::EndToEnd => {
            let scheme = load_scheme(&cfg.scheme, force)?;
            let r = run_end_to_end(&scheme, cfg.trials, cfg.master_seed)?;
            ExperimentOutput {
                report: to_json(&r)?,
                csv: Some(end_to_end_csv(&r)),
                passed: r.passed(),
            }
        }
        ExperimentMode::Transitions => {
            let r = run_transitions(&cfg.scheme.params, cfg.trials, cfg.master_seed)?;
            ExperimentOutput {
                report: to_json(&r)?,
                csv: None,
                passed: r.ok,
            }
        }
        ExperimentMode::Sweep => {
            let (report, passed) = sweep_csv(cfg.grid)?;
            ExperimentOutput {
                report,
                csv: None,
                passed,
            }
        }
    })
}

/// Per-trial CSV for the single-codeword mode.
pub fn single_codeword_csv(r: &SingleCodewordReport) -> String {
    let mut out = String::from("trial,symbol,x,ed,inner_correct,deleted_buffer,spurious_buffer,aligned\n");
    for t in &r.per_trial {
        let ed = t.ed.map_or(String::new(), |e| e.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            t.trial, t.symbol, t.x, ed, t.inner_correct, t.deleted_buffer, t.spurious_buffer, t.aligned
        )
        .unwrap();
    }
    out
}

/// Per-trial CSV for the end-to-end mode.
pub fn end_to_end_csv(r: &EndToEndReport) -> String {
    let mut out = String::from("trial,success,windows,deleted_buffer,spurious_buffer,wrong_inner_decode,aligned\n");
    for t in &r.per_trial {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            t.trial, t.success, t.windows, t.deleted_buffer, t.spurious_buffer, t.wrong_inner_decode, t.aligned
        )
        .unwrap();
    }
    out
}

/// One line per preset; the flag is true when every preset verifies.
pub fn analyze_csv() -> Result<(String, bool)> {
    let mut out = String::from(
        "preset,p_or_lambda,P12,P10,P21,P20,gamma,xi,delta_in,gamma_lt_delta,R_in,final_rate,paper_rate,rel_err\n",
    );
    let mut all_ok = true;
    for preset in presets() {
        let r = verify_preset::<f64>(&preset)?;
        all_ok &= r.passed();
        let p = &r.probs;
        writeln!(
            out,
            "{},{},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{},{},{:e}",
            r.name,
            r.param,
            p.p12,
            p.p10,
            p.p21,
            p.p20,
            p.gamma,
            p.xi,
            r.delta_in,
            r.gamma_lt_delta,
            r.r_in,
            r.final_rate,
            r.paper_rate,
            r.rel_err
        )
        .unwrap();
    }
    Ok((out, all_ok))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub source: &'static str,
    pub p: f64,
    pub table_rate: f64,
    pub curve: f64,
    pub lower_bound: f64,
}

/// The eleven fixed-`p` rates followed by `grid` points of the ceiling-free
/// rate of the regime that covers each `p`.
pub fn sweep_rows(grid: usize) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    let all = presets();
    for preset in all.iter().filter(|p| p.name.starts_with("table")) {
        let r = verify_preset::<f64>(preset)?;
        rows.push(SweepRow {
            source: "table",
            p: preset.param,
            table_rate: r.final_rate,
            curve: (1.0 - preset.param) / 15.71,
            lower_bound: (1.0 - preset.param) / 16.0,
        });
    }
    let regime = |name: &str| all.iter().find(|p| p.name == name).expect("regime preset");
    for i in 0..grid {
        let p = (i + 1) as f64 / (grid + 1) as f64;
        let pre = if p >= 0.9 {
            regime("regime-p-ge-0.9")
        } else if p > 0.57 {
            regime("regime-0.57-p-0.9")
        } else {
            regime("regime-p-le-0.57")
        };
        let r_in = inner_rate_formula(pre.beta1, pre.delta_in)?;
        let rate = rate_bdc(pre.m1.unwrap(), pre.m2.unwrap(), pre.mb, pre.beta1, p, r_in, R_OUT, 1e6)?;
        rows.push(SweepRow {
            source: "grid",
            p,
            table_rate: rate.no_ceilings,
            curve: (1.0 - p) / 15.71,
            lower_bound: (1.0 - p) / 16.0,
        });
    }
    Ok(rows)
}

/// Sweep CSV; the flag is true when every row meets `(1-p)/16`.
pub fn sweep_csv(grid: usize) -> Result<(String, bool)> {
    let rows = sweep_rows(grid)?;
    let mut out = String::from("source,p,table_rate,curve,lower_bound\n");
    let mut ok = true;
    for r in &rows {
        ok &= r.table_rate >= r.lower_bound;
        writeln!(out, "{},{},{},{},{}", r.source, r.p, r.table_rate, r.curve, r.lower_bound).unwrap();
    }
    Ok((out, ok))
}
