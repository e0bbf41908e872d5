use std::io::{ErrorKind, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use pairwise_topk::bounds;
use pairwise_topk::harness::{self, ExperimentConfig};
use pairwise_topk::ingest::{self, MissingPolicy, NormalizedInstance};
use pairwise_topk::oracle::Model;
use pairwise_topk::verify;
use pairwise_topk::{seed, PreferenceInstance};

#[derive(Parser)]
#[command(name = "pairwise-topk", version, about = "Top-k selection from noisy pairwise comparisons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded experiment described by a JSON config.
    Run {
        /// Config file, or `-` for stdin.
        #[arg(long)]
        config: String,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the sample-complexity expressions for equal gaps.
    Bounds {
        #[arg(long)]
        gap: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        k: usize,
        /// `a,b,c`, `start:stop:step` or `start:stop:log`.
        #[arg(long)]
        n_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check SST, STI and γ-relaxed conditions of a matrix or .pwg file.
    Validate {
        #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
        pwg: Option<PathBuf>,
        /// JSON file with `{"n": .., "p": [[..], ..]}`.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value = "error")]
        missing: MissingPolicy,
        /// Check this many random triples instead of all of them.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the normalized JSON form of a .pwg file.
    ParsePwg {
        path: PathBuf,
        #[arg(long, default_value = "error")]
        missing: MissingPolicy,
    },
}

type CliResult<T> = Result<T, String>;

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Writes to stdout; a reader that hung up early is not an error.
fn emit(text: &str) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(format!("stdout: {e}")),
        _ => Ok(()),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => emit(text),
    }
}

fn emit_json<T: serde::Serialize>(value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    emit(&text)
}

fn load_pwg(path: &Path, missing: MissingPolicy) -> CliResult<(ingest::PwgDocument, PreferenceInstance)> {
    let doc = ingest::parse_pwg(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    let inst = ingest::to_preference_instance(&doc, missing).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((doc, inst))
}

fn run(config: &str, out: Option<&Path>) -> CliResult<()> {
    let (text, base) = if config == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| format!("stdin: {e}"))?;
        (s, PathBuf::from("."))
    } else {
        let path = Path::new(config);
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (read_text(path)?, base)
    };
    let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| format!("config: {e}"))?;
    if let Model::Empirical { pwg: Some(p), .. } = &mut cfg.instance.model {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    let report = harness::run_experiment(&cfg).map_err(|e| e.to_string())?;
    write_output(out, &report.to_csv())
}

fn validate(inst: &PreferenceInstance, gamma: f64, sample: Option<usize>, seed_value: u64) -> CliResult<Value> {
    let n = inst.n();
    let (sst, sti) = match sample {
        Some(samples) => {
            let mut rng = seed::rng_from(seed_value);
            let sst = verify::validate_sst_sampled(inst, samples, &mut rng);
            let sti = verify::validate_sti_sampled(inst, samples, &mut rng);
            (sst, sti)
        }
        None if n > verify::EXACT_VALIDATION_CAP => {
            return Err(format!(
                "n = {n} exceeds the exact-validation cap of {}; pass --sample",
                verify::EXACT_VALIDATION_CAP
            ))
        }
        None => (verify::validate_sst(inst), verify::validate_sti(inst)),
    };
    let mut out = json!({
        "n": n,
        "sampled": sample.is_some(),
        "sst": sst.pass,
        "sti": sti.pass,
        "sst_witness": sst.witness,
        "sti_witness": sti.witness,
        "gamma": gamma,
    });
    let key = format!("gamma{gamma}");
    match verify::validate_gamma(inst, gamma) {
        Ok(g) => {
            out["gamma_pass"] = json!(g.pass);
            out[key] = json!(g.pass);
            out["min_gamma"] = json!(g.min_gamma);
            out["gamma_order"] = json!(g.order);
            out["gamma_witness"] = json!(g.witness);
        }
        Err(e) => {
            out["gamma_pass"] = Value::Null;
            out[key] = Value::Null;
            out["gamma_error"] = json!(e.to_string());
        }
    }
    Ok(out)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config, out } => run(&config, out.as_deref()),
        Command::Bounds { gap, delta, k, n_grid, out } => {
            let grid = bounds::parse_grid(&n_grid).map_err(|e| e.to_string())?;
            let rows = bounds::growth_table(gap, delta, k, &grid).map_err(|e| e.to_string())?;
            write_output(out.as_deref(), &bounds::growth_csv(&rows))
        }
        Command::Validate { pwg, matrix, gamma, missing, sample, seed } => {
            let inst = match (pwg, matrix) {
                (Some(p), _) => load_pwg(&p, missing)?.1,
                (None, Some(m)) => {
                    serde_json::from_str(&read_text(&m)?).map_err(|e| format!("{}: {e}", m.display()))?
                }
                (None, None) => unreachable!("clap requires one input"),
            };
            emit_json(&validate(&inst, gamma, sample, seed)?)
        }
        Command::ParsePwg { path, missing } => {
            let (doc, inst) = load_pwg(&path, missing)?;
            emit_json(&NormalizedInstance::new(&doc, &inst))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
