//! Command-line front end.
//!
//! Exit status: 0 when every check passes, 1 on a verification failure, 2 on
//! a configuration or input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use delchan::harness::{
    analyze_csv, desk_preset, load_scheme, read_descriptor, run_experiment, sweep_csv, ExperimentConfig,
};
use delchan::inner::{construct_inner, InnerParams};
use delchan::io::{field, parse_key_values, KeyValues};
use delchan::outer::GreedyOuterCode;
use delchan::scheme::{SchemeDescriptor, SchemeParams};
use delchan::strings::BitString;
use delchan::{Error, Result};

#[derive(Parser)]
#[command(name = "delchan", version, about = "Concatenated codes for deletion and repeat channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (construction seed for `construct`, master seed for `simulate`)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the inner codebook and, for a full scheme config, the outer code
    /// and a scheme descriptor. `--out` names the output directory.
    Construct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        r1: Option<usize>,
        #[arg(long)]
        r2: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        /// Allow candidate sets above the enumeration limit
        #[arg(long)]
        force: bool,
    },
    /// Encode a comma-separated message with the scheme in `--config`.
    Encode {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        message: String,
        #[arg(long)]
        force: bool,
    },
    /// Decode a received bit string (file or `-` for stdin).
    Decode {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Run a Monte Carlo experiment and write a JSON report.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Named desk preset used when no config is given
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        /// single_codeword, end_to_end, transitions or sweep
        #[arg(long)]
        mode: Option<String>,
        /// Per-trial CSV path
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Verify every published parameter set and write CSV.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Rates of the fixed-p rows and a dense p grid as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
    },
}

/// A run either finishes with its checks passed or failed.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(cli.command);
    eprintln!("elapsed {:.3}s", start.elapsed().as_secs_f64());
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read_config(path: &Option<PathBuf>) -> Result<(KeyValues, PathBuf)> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Validation(format!("cannot read {}: {e}", p.display())))?;
            let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((parse_key_values(&text)?, dir))
        }
        None => Ok((KeyValues::new(), PathBuf::new())),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            fs::write(p, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn scheme_from_config(common: &Common, force: bool) -> Result<delchan::scheme::Scheme> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("--config <scheme descriptor> is required".into()))?;
    let (desc, _) = read_descriptor(path)?;
    load_scheme(&desc, force)
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Construct {
            common,
            m,
            r1,
            r2,
            d,
            force,
        } => construct(&common, [m, r1, r2, d], force),
        Command::Encode { common, message, force } => {
            let scheme = scheme_from_config(&common, force)?;
            let symbols = message
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad symbol {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let bits = scheme.encode(&symbols)?;
            emit(&common.out, &format!("{bits}\n"))?;
            Ok(Outcome::Pass)
        }
        Command::Decode { common, input, force } => {
            let scheme = scheme_from_config(&common, force)?;
            let text = if input.as_os_str() == "-" {
                std::io::read_to_string(std::io::stdin())?
            } else {
                fs::read_to_string(&input)?
            };
            let bits: BitString = text.trim().parse()?;
            let message = scheme.decode(&bits);
            let line: Vec<String> = message.iter().map(usize::to_string).collect();
            emit(&common.out, &format!("{}\n", line.join(",")))?;
            Ok(Outcome::Pass)
        }
        Command::Simulate {
            common,
            preset,
            trials,
            mode,
            csv,
            force,
        } => {
            let (mut kv, base) = read_config(&common.config)?;
            if let Some(p) = preset {
                kv.insert("preset".into(), p);
            }
            if !kv.contains_key("preset") && !kv.contains_key("scheme") && !kv.contains_key("channel") {
                kv.insert("preset".into(), "desk-bdc".into());
            }
            if let Some(t) = trials {
                kv.insert("trials".into(), t.to_string());
            }
            if let Some(s) = common.seed {
                kv.insert("master_seed".into(), s.to_string());
            }
            if let Some(m) = mode {
                kv.insert("mode".into(), m);
            }
            let cfg = ExperimentConfig::from_key_values(&kv, &base)?;
            simulate(&cfg, &common.out, &csv, force)
        }
        Command::Analyze { common } => {
            let (text, ok) = analyze_csv()?;
            emit(&common.out, &text)?;
            Ok(if ok { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Sweep { common, grid } => {
            let (kv, base) = read_config(&common.config)?;
            let grid = match grid {
                Some(g) => g,
                None if kv.is_empty() => delchan::harness::DEFAULT_GRID,
                None => {
                    let mut kv = kv;
                    kv.entry("preset".into()).or_insert_with(|| "desk-bdc".into());
                    ExperimentConfig::from_key_values(&kv, &base)?.grid
                }
            };
            let (text, ok) = sweep_csv(grid)?;
            emit(&common.out, &text)?;
            Ok(if ok { Outcome::Pass } else { Outcome::Fail })
        }
    }
}

fn construct(common: &Common, flags: [Option<usize>; 4], force: bool) -> Result<Outcome> {
    let (mut kv, _) = read_config(&common.config)?;
    for (key, v) in ["m", "r1", "r2", "d"].into_iter().zip(flags) {
        if let Some(v) = v {
            kv.insert(key.into(), v.to_string());
        }
    }
    if let Some(name) = kv.get("preset").cloned() {
        let params = desk_preset(&name)?;
        for line in params.to_descriptor(0, None, None).lines() {
            let (k, v) = line.split_once('=').expect("descriptor line");
            kv.entry(k.into()).or_insert_with(|| v.into());
        }
    }
    if let Some(s) = common.seed {
        kv.insert("seed".into(), s.to_string());
    }
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;

    let full = kv.contains_key("channel");
    let inner_params = InnerParams::new(field(&kv, "m")?, field(&kv, "r1")?, field(&kv, "r2")?, field(&kv, "d")?)?;
    // a full config is validated before the expensive construction
    let desc = if full { Some(SchemeDescriptor::from_key_values(&kv)?) } else { None };
    let inner = construct_inner(&inner_params, force)?;
    fs::write(dir.join("codebook.txt"), inner.to_text())?;
    println!("inner_size={}", inner.len());
    println!("inner_rate={}", inner.measured_rate());

    if let Some(desc) = desc {
        let params: SchemeParams = desc.params;
        if inner.len() < params.outer.q {
            return Err(Error::InnerTooSmall {
                available: inner.len(),
                needed: params.outer.q,
            });
        }
        let outer = GreedyOuterCode::construct(params.outer, desc.seed)?;
        fs::write(dir.join("outer.txt"), outer.to_text())?;
        fs::write(
            dir.join("scheme.desc"),
            params.to_descriptor(desc.seed, Some("codebook.txt"), Some("outer.txt")),
        )?;
        println!("outer_rate={}", params.outer.rate());
    }
    Ok(Outcome::Pass)
}

fn simulate(cfg: &ExperimentConfig, out: &Option<PathBuf>, csv: &Option<PathBuf>, force: bool) -> Result<Outcome> {
    let sim = run_experiment(cfg, force)?;
    if let (Some(path), Some(text)) = (csv, &sim.csv) {
        fs::write(path, text)?;
    }
    emit(out, &sim.report)?;
    Ok(if sim.passed { Outcome::Pass } else { Outcome::Fail })
}
