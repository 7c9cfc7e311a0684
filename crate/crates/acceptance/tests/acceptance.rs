//! Exit-gate checks. Runs every criterion, prints one line each and exits
//! nonzero when any fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use delchan::analysis::{beta_total, denominator_constant, presets, verify_preset, ChannelKind};
use delchan::harness::{
    desk_preset, run_end_to_end, run_experiment, run_single_codeword, run_transitions, ExperimentConfig, THREADS_ENV,
};
use delchan::inner::{
    construct_inner, deletion_ball_bound, deletion_ball_s, embed_all, insertion_ball_bound, insertion_ball_bruteforce,
    InnerParams,
};
use delchan::io::parse_key_values;
use delchan::scheme::build_scheme;
use delchan::strings::{enumerate_s, BitString, SProfile};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            o.ok = false;
            o.detail.push_str(&format!("; runtime {took:?} over {limit:?}"));
        }
    }
    (o, took)
}

fn table_rows() -> Vec<delchan::analysis::Preset> {
    presets().into_iter().filter(|p| p.name.starts_with("table")).collect()
}

fn table_reproduction() -> Outcome {
    let mut bad = Vec::new();
    for row in table_rows() {
        let r = verify_preset::<f64>(&row).unwrap();
        if !r.r_in_ok {
            bad.push(format!("{}: R_in {:.5} vs {}", row.name, r.r_in, row.expected_r_in));
        }
        if !r.rate_ok {
            bad.push(format!(
                "{}: rate {:.6} vs {} ({:+.2}%)",
                row.name,
                r.final_rate,
                row.expected_rate,
                100.0 * r.rel_err
            ));
        }
    }
    let n = table_rows().len();
    if bad.is_empty() {
        outcome(true, format!("{n} rows: R_in within 2e-3, rate within 1%"))
    } else {
        outcome(false, bad.join("; "))
    }
}

fn decodability() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for p in presets() {
        let r = verify_preset::<f64>(&p).unwrap();
        checked += 1;
        if !r.gamma_lt_delta {
            bad.push(format!(
                "{}: gamma {:.10} >= delta_in {} (excess {:.2e})",
                p.name,
                r.probs.gamma,
                p.delta_in,
                r.probs.gamma - p.delta_in
            ));
        }
    }
    if bad.is_empty() {
        outcome(true, format!("gamma < delta_in for {checked} presets"))
    } else {
        outcome(false, bad.join("; "))
    }
}

fn regime_constants() -> Outcome {
    let want = [
        ("regime-p-ge-0.9", 8.27323, 0.761),
        ("regime-0.57-p-0.9", 8.48521, 0.765),
        ("regime-p-le-0.57", 7.71206, 0.765),
        ("prc-lambda-le-0.5", 8.58349, 0.766),
    ];
    let all = presets();
    let mut bad = Vec::new();
    let mut got = Vec::new();
    for (name, d, b) in want {
        let p = all.iter().find(|p| p.name == name).unwrap();
        let dc = denominator_constant(p.beta1, p.m1.unwrap(), p.m2.unwrap(), p.mb);
        let beta = beta_total(p.beta1);
        got.push(format!("{dc:.5}/{beta:.3}"));
        if (dc - d).abs() >= 5e-6 || (beta - b).abs() >= 5e-4 {
            bad.push(format!("{name}: {dc} vs {d}, beta {beta} vs {b}"));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { got.join(", ") } else { bad.join("; ") })
}

fn theorem_inequality() -> Outcome {
    let mut bad = Vec::new();
    for p in presets() {
        let is_table = p.name.starts_with("table");
        if !is_table && p.channel != ChannelKind::Prc {
            continue;
        }
        let r = verify_preset::<f64>(&p).unwrap();
        let (ok, floor) = match p.channel {
            ChannelKind::Bdc => (r.final_rate >= (1.0 - p.param) / 16.0, (1.0 - p.param) / 16.0),
            ChannelKind::Prc => (r.final_rate > p.param / 17.0, p.param / 17.0),
        };
        if !ok {
            bad.push(format!("{}: {} vs {}", p.name, r.final_rate, floor));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "all rates clear their floors".into() } else { bad.join("; ") })
}

fn valid_profiles(max_m: usize) -> Vec<SProfile> {
    (1..=max_m)
        .flat_map(|m| (0..=m / 2).filter_map(move |r2| SProfile::new(m, m - 2 * r2, r2).ok()))
        .collect()
}

fn combinatorial_oracles() -> Outcome {
    let mut subs_checked = 0u64;
    let mut bad = Vec::new();
    for target in valid_profiles(11) {
        let members = enumerate_s(&target).unwrap();
        let mut subs: BTreeSet<BitString> = BTreeSet::new();
        for s in &members {
            for d in 0..=3.min(target.m - 1) {
                let ball = deletion_ball_s(s, d);
                let params = InnerParams::new(target.m, target.r1, target.r2, d).unwrap();
                if u64::try_from(&deletion_ball_bound(&params)).unwrap() < ball.len() as u64 {
                    bad.push(format!("deletion ball of {s} at d={d} has {}", ball.len()));
                }
                subs.extend(ball);
            }
        }
        for sub in &subs {
            let fast = embed_all(sub, &target).unwrap();
            let slow = insertion_ball_bruteforce(sub, &target).unwrap();
            let d = target.m - sub.len();
            if fast != slow {
                bad.push(format!("embedding of {sub} into {target:?} differs"));
            }
            if u64::try_from(&insertion_ball_bound(&target, d)).unwrap() < slow.len() as u64 {
                bad.push(format!("insertion ball of {sub} has {}", slow.len()));
            }
            subs_checked += 1;
        }
    }
    bad.truncate(5);
    outcome(bad.is_empty(), if bad.is_empty() { format!("{subs_checked} substrings agree") } else { bad.join("; ") })
}

/// Insertion/deletion distance by the textbook recurrence.
fn wagner_fischer(a: &[u8], b: &[u8]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, &x) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, &y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] } else { 1 + prev[j + 1].min(cur[j]) };
        }
        prev = cur;
    }
    prev[b.len()]
}

fn inner_separation() -> Outcome {
    let mut configs: Vec<InnerParams> = valid_profiles(7)
        .into_iter()
        .filter(|p| p.m == 7)
        .flat_map(|p| [2, 1].map(|d| InnerParams::new(7, p.r1, p.r2, d).unwrap()))
        .collect();
    configs.push(InnerParams::new(25, 13, 6, 2).unwrap());
    let mut sizes = Vec::new();
    for params in configs {
        let cb = construct_inner(&params, false).unwrap();
        let words = cb.codewords();
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                let ed = wagner_fischer(words[i].bits(), words[j].bits());
                if ed <= 2 * params.d {
                    return outcome(false, format!("m={} codewords {i},{j} at distance {ed}", params.m()));
                }
            }
        }
        sizes.push(format!("m={} r1={} d={} |C|={}", params.m(), params.profile.r1, params.d, words.len()));
    }
    outcome(true, sizes.join(", "))
}

fn sandwich() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, seed) in [("desk-bdc", 7001u64), ("desk-prc", 7002)] {
        let scheme = build_scheme(&desk_preset(name).unwrap(), 0, false).unwrap();
        let r = run_single_codeword(&scheme, 10_000, seed).unwrap();
        let lo = r.x_lower - 3.0 * r.stderr_x;
        let hi = r.x_upper + 3.0 * r.stderr_x;
        let inside = r.mean_x >= lo && r.mean_x <= hi;
        ok &= inside;
        parts.push(format!("{name}: mean X {:.4} in [{lo:.4}, {hi:.4}] {inside}", r.mean_x));
    }
    outcome(ok, parts.join("; "))
}

fn transitions() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, seed) in [("desk-bdc", 8001u64), ("desk-prc", 8002)] {
        let r = run_transitions(&desk_preset(name).unwrap(), 100_000, seed).unwrap();
        ok &= r.ok;
        let cells: Vec<String> = r
            .checks
            .iter()
            .map(|c| format!("{} {:.5}/{:.5}{}", c.name, c.empirical, c.exact, if c.ok { "" } else { "!" }))
            .collect();
        parts.push(format!("{name}: {}", cells.join(" ")));
    }
    outcome(ok, parts.join("; "))
}

fn buffer_bound() -> Outcome {
    let scheme = build_scheme(&desk_preset("desk-bdc").unwrap(), 0, false).unwrap();
    let r = run_single_codeword(&scheme, 10_000, 9001).unwrap();
    let sigma = (r.deleted_buffer_bound * (1.0 - r.deleted_buffer_bound) / r.buffers_sent as f64).sqrt();
    let limit = r.deleted_buffer_bound + 3.0 * sigma;
    let ok = r.deleted_buffer_freq <= limit && r.deleted_buffer_bound < 0.5;
    outcome(
        ok,
        format!(
            "deleted {}/{} = {:.5} <= {:.5} + 3 sigma",
            r.events.deleted_buffer, r.buffers_sent, r.deleted_buffer_freq, r.deleted_buffer_bound
        ),
    )
}

fn end_to_end() -> Outcome {
    let noisy = build_scheme(&desk_preset("desk-bdc-e2e").unwrap(), 0, false).unwrap();
    let a = run_end_to_end(&noisy, 100, 10_001).unwrap();
    let clean = build_scheme(&desk_preset("desk-bdc-lossless").unwrap(), 0, false).unwrap();
    let b = run_end_to_end(&clean, 100, 10_002).unwrap();
    outcome(
        a.successes >= 95 && b.successes == 100,
        format!("p=0.3: {}/100, p=0: {}/100", a.successes, b.successes),
    )
}

fn determinism() -> Outcome {
    let kv = parse_key_values("preset=desk-bdc\nmode=single_codeword\ntrials=2000\nmaster_seed=42\n").unwrap();
    let cfg = ExperimentConfig::from_key_values(&kv, Path::new(".")).unwrap();
    let run = |threads: &str| {
        std::env::set_var(THREADS_ENV, threads);
        run_experiment(&cfg, false).unwrap()
    };
    let (a, b) = (run("1"), run("4"));
    std::env::remove_var(THREADS_ENV);
    let same = a.report == b.report && a.csv == b.csv;
    outcome(same && !a.report.is_empty(), format!("{} report bytes, identical: {same}", a.report.len()))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Option<Duration>, fn() -> Outcome)> = vec![
        ("table reproduction", Some(Duration::from_secs(1)), table_reproduction),
        ("decodability condition", Some(Duration::from_secs(1)), decodability),
        ("regime constants", None, regime_constants),
        ("rate floor", None, theorem_inequality),
        ("combinatorial oracles", Some(Duration::from_secs(60)), combinatorial_oracles),
        ("inner-code separation", Some(Duration::from_secs(300)), inner_separation),
        ("Monte Carlo sandwich", Some(Duration::from_secs(120)), sandwich),
        ("transition probabilities", None, transitions),
        ("buffer-error bound", None, buffer_bound),
        ("end-to-end decoding", None, end_to_end),
        ("determinism", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let (o, took) = timed(limit, f);
        failed += !o.ok as usize;
        println!(
            "criterion {:>2} {} {name} ({:.2}s): {}",
            i + 1,
            if o.ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            o.detail
        );
    }
    if failed == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria fail");
        ExitCode::FAILURE
    }
}
