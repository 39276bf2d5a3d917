//! Command-line front end: reproducible simulation, monitoring, conjecture
//! emission, and prover checks, glued together by one JSON config.
//!
//! Exit codes, all covered by integration tests:
//!
//! | code | meaning                                         |
//! |------|-------------------------------------------------|
//! | 0    | success / final verdict Stable / SZS Theorem    |
//! | 2    | config, argument, or output-path error          |
//! | 3    | simulation aborted (singularity or actuation)   |
//! | 4    | malformed or out-of-order monitor input         |
//! | 5    | prover unavailable or unlaunchable              |
//! | 10   | final verdict Warning                           |
//! | 20   | final verdict Violation                         |
//! | 21   | SZS CounterSatisfiable                          |
//! | 22   | SZS GaveUp, Timeout, or Error                   |

mod config;

use clap::{Parser, Subcommand};
use lyapguard::fof::{emit_conjecture, run_prover, vdot_conclusion, FofError, ProverCmd, SzsStatus};
use lyapguard::lyapunov::Branch;
use lyapguard::monitor::{Monitor, MonitorState};
use lyapguard::sim::{run, ClosedLoop, CsvSampleReader};
use lyapguard::Vec6;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

const EXIT_CONFIG: u8 = 2;
const EXIT_ABORT: u8 = 3;
const EXIT_BAD_INPUT: u8 = 4;
const EXIT_NO_PROVER: u8 = 5;
const EXIT_WARNING: u8 = 10;
const EXIT_VIOLATION: u8 = 20;
const EXIT_COUNTERSAT: u8 = 21;
const EXIT_UNDECIDED: u8 = 22;

#[derive(Parser)]
#[command(name = "lyapguard", version, about = "Robust attitude control runs with a Lyapunov runtime monitor")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured scenario and write the trajectory log.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Trajectory CSV destination, overriding the config's output.csv.
        /// A certificate summary goes next to it with extension cert.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a trajectory log through the runtime monitor.
    Monitor {
        #[arg(long)]
        config: PathBuf,
        /// Sample CSV to check, or `-` for a pipe from `simulate`.
        #[arg(default_value = "-")]
        input: String,
        /// Transition NDJSON destination, overriding output.transitions.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Feed only every Nth sample (1 = all).
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        every: u32,
    },
    /// Write one stability conjecture as a TPTP problem file.
    EmitFof {
        #[arg(long)]
        config: PathBuf,
        /// The six error-state values, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        e: Vec<f64>,
        /// 15 = switching branch, 16 = boundary-layer branch.
        #[arg(long, value_parser = parse_branch)]
        branch: Branch,
        /// Destination; defaults to the conjecture name, lowercased, plus .p
        #[arg(long)]
        out: Option<PathBuf>,
        /// Conjecture name; empty selects the branch's canonical name.
        #[arg(long, default_value = "")]
        name: String,
    },
    /// Emit a conjecture, run a prover on it, and report the SZS verdict.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// The six error-state values, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        e: Vec<f64>,
        /// 15 = switching branch, 16 = boundary-layer branch.
        #[arg(long, value_parser = parse_branch)]
        branch: Branch,
        /// Prover binary; falls back to $LYAPGUARD_PROVER.
        #[arg(long)]
        prover: Option<PathBuf>,
        /// Extra prover flag, inserted before the problem file; repeatable.
        #[arg(long = "prover-arg", allow_hyphen_values = true)]
        prover_args: Vec<String>,
        /// Wall-clock budget for the prover, in seconds.
        #[arg(long, default_value_t = 60.0)]
        timeout_s: f64,
    },
}

fn parse_branch(s: &str) -> Result<Branch, String> {
    match s {
        "15" => Ok(Branch::Outside),
        "16" => Ok(Branch::BoundaryLayer),
        _ => Err(String::from("branch must be 15 or 16")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Simulate { config, out } => cmd_simulate(&config, out),
        Cmd::Monitor {
            config,
            input,
            out,
            every,
        } => cmd_monitor(&config, &input, out, every as usize),
        Cmd::EmitFof {
            config,
            e,
            branch,
            out,
            name,
        } => cmd_emit_fof(&config, &e, branch, out, &name),
        Cmd::Check {
            config,
            e,
            branch,
            prover,
            prover_args,
            timeout_s,
        } => cmd_check(&config, &e, branch, prover, prover_args, timeout_s),
    };
    ExitCode::from(code)
}

fn fail(code: u8, msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    code
}

/// Create the parent directory of a declared output path, then write.
fn write_output(path: &Path, bytes: &[u8]) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn cmd_simulate(config_path: &Path, out: Option<PathBuf>) -> u8 {
    let loaded = match config::load(config_path) {
        Ok(l) => l,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let c = &loaded.config;
    let cl = ClosedLoop {
        plant: &c.plant,
        est: &loaded.est,
        gains: &c.gains,
        bounds: &c.bounds,
        template: &c.v_bound_template,
        cert: &loaded.cert,
    };
    let outcome = match run(&cl, &c.scenario) {
        Ok(o) => o,
        Err(e) => return fail(EXIT_CONFIG, e),
    };

    let csv_path = out.unwrap_or_else(|| c.output.csv.clone());
    if let Err(e) = write_output(&csv_path, outcome.log.to_csv_string().as_bytes()) {
        return fail(EXIT_CONFIG, e);
    }
    let summary_path = csv_path.with_extension("cert.json");
    let summary = serde_json::to_string_pretty(&loaded.cert.summary())
        .expect("certificate summary serializes");
    if let Err(e) = write_output(&summary_path, summary.as_bytes()) {
        return fail(EXIT_CONFIG, e);
    }

    println!(
        "wrote {} samples to {} (certificate summary: {})",
        outcome.log.samples.len(),
        csv_path.display(),
        summary_path.display(),
    );
    match outcome.abort {
        None => 0,
        Some(e) => fail(EXIT_ABORT, format!("run aborted: {e}")),
    }
}

fn cmd_monitor(config_path: &Path, input: &str, out: Option<PathBuf>, every: usize) -> u8 {
    let loaded = match config::load(config_path) {
        Ok(l) => l,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let mcfg = match loaded.monitor_config() {
        Ok(m) => m,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let mut monitor = Monitor::new(mcfg, loaded.est, loaded.config.scenario.reference);

    let reader: Box<dyn BufRead> = if input == "-" {
        Box::new(std::io::stdin().lock())
    } else {
        match std::fs::File::open(input) {
            Ok(f) => Box::new(std::io::BufReader::new(f)),
            Err(e) => return fail(EXIT_CONFIG, format!("cannot read {input}: {e}")),
        }
    };

    let ndjson_path = out.unwrap_or_else(|| loaded.config.output.transitions.clone());
    if let Err(e) = write_output(&ndjson_path, b"") {
        return fail(EXIT_CONFIG, e);
    }
    let mut ndjson = match std::fs::File::create(&ndjson_path) {
        Ok(f) => std::io::BufWriter::new(f),
        Err(e) => {
            return fail(
                EXIT_CONFIG,
                format!("cannot write {}: {e}", ndjson_path.display()),
            )
        }
    };

    let mut transitions = 0usize;
    let mut fed = 0usize;
    for (idx, row) in CsvSampleReader::new(reader).enumerate() {
        let sample = match row {
            Ok(s) => s,
            Err(e) => return fail(EXIT_BAD_INPUT, e),
        };
        if idx % every != 0 {
            continue;
        }
        fed += 1;
        match monitor.feed(&sample) {
            Ok(Some(transition)) => {
                transitions += 1;
                let line = serde_json::to_string(&transition).expect("transition serializes");
                if writeln!(ndjson, "{line}").is_err() {
                    return fail(EXIT_CONFIG, format!("cannot write {}", ndjson_path.display()));
                }
            }
            Ok(None) => {}
            Err(e) => return fail(EXIT_BAD_INPUT, e),
        }
    }
    if ndjson.flush().is_err() {
        return fail(EXIT_CONFIG, format!("cannot write {}", ndjson_path.display()));
    }

    let state = monitor.state();
    println!(
        "verdict: {state} ({fed} samples, {transitions} transitions, log: {})",
        ndjson_path.display(),
    );
    match state {
        MonitorState::Stable => 0,
        MonitorState::Warning => EXIT_WARNING,
        MonitorState::Violation => EXIT_VIOLATION,
    }
}

fn build_conjecture(
    config_path: &Path,
    e: &[f64],
    branch: Branch,
    name: &str,
) -> Result<lyapguard::fof::FofConjecture, (u8, String)> {
    if e.len() != 6 {
        return Err((
            EXIT_CONFIG,
            format!("--e needs exactly 6 comma-separated values, got {}", e.len()),
        ));
    }
    let loaded = config::load(config_path).map_err(|e| (EXIT_CONFIG, e))?;
    let e_vec = Vec6::from_column_slice(e);
    let poly = vdot_conclusion(&loaded.cert, &loaded.config.bounds, branch);
    emit_conjecture(
        &loaded.config.bounds,
        &loaded.config.v_bound_template,
        &e_vec,
        &poly,
        name,
        branch,
    )
    .map_err(|e| (EXIT_CONFIG, e.to_string()))
}

fn cmd_emit_fof(
    config_path: &Path,
    e: &[f64],
    branch: Branch,
    out: Option<PathBuf>,
    name: &str,
) -> u8 {
    let conj = match build_conjecture(config_path, e, branch, name) {
        Ok(c) => c,
        Err((code, msg)) => return fail(code, msg),
    };
    let out_path =
        out.unwrap_or_else(|| PathBuf::from(format!("{}.p", conj.name.to_lowercase())));
    if let Err(e) = write_output(&out_path, conj.render().as_bytes()) {
        return fail(EXIT_CONFIG, e);
    }
    println!("wrote {} ({})", out_path.display(), conj.name);
    0
}

fn cmd_check(
    config_path: &Path,
    e: &[f64],
    branch: Branch,
    prover: Option<PathBuf>,
    prover_args: Vec<String>,
    timeout_s: f64,
) -> u8 {
    if !timeout_s.is_finite() || timeout_s <= 0.0 {
        return fail(EXIT_CONFIG, format!("timeout must be > 0 s, got {timeout_s}"));
    }
    let conj = match build_conjecture(config_path, e, branch, "") {
        Ok(c) => c,
        Err((code, msg)) => return fail(code, msg),
    };
    let path = match prover.or_else(|| std::env::var_os("LYAPGUARD_PROVER").map(PathBuf::from)) {
        Some(p) => p,
        None => {
            return fail(
                EXIT_NO_PROVER,
                "no prover configured: pass --prover /path/to/prover or set LYAPGUARD_PROVER",
            )
        }
    };
    let cmd = ProverCmd {
        path,
        args: prover_args,
    };
    let result = match run_prover(&cmd, &conj, Duration::from_secs_f64(timeout_s)) {
        Ok(r) => r,
        Err(FofError::Spawn { path, source }) => {
            return fail(
                EXIT_NO_PROVER,
                format!(
                    "cannot launch prover {}: {source}; pass --prover or set LYAPGUARD_PROVER",
                    path.display()
                ),
            )
        }
        Err(e) => return fail(EXIT_NO_PROVER, e),
    };

    println!(
        "{}: SZS status {} ({:.2} s)",
        conj.name, result.status, result.wall_time
    );
    match result.status {
        SzsStatus::Theorem => 0,
        SzsStatus::CounterSatisfiable => EXIT_COUNTERSAT,
        SzsStatus::GaveUp | SzsStatus::Timeout | SzsStatus::Error => EXIT_UNDECIDED,
    }
}
