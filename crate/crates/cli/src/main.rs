//! `nodal-morse`: analyse single instances, run random verification
//! campaigns and sweep Hill-operator bands.
//!
//! Machine output (JSON or CSV) goes to stdout, a human summary to stderr.
//! Exit codes: 0 pass, 1 a theorem identity failed, 2 bad input,
//! 3 hypotheses violated, 4 numerical failure.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nodal_morse::campaign::{analyze_instance, hill_sweep, run_campaign, AnalysisStatus, CampaignParams};
use nodal_morse::hill::Potential;
use nodal_morse::instance::InstanceFile;
use nodal_morse::Error;

const THREADS_VAR: &str = "NODAL_MORSE_THREADS";
const HILL_TOL: f64 = 1e-3;

const EXIT_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_HYPOTHESES: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "nodal-morse", version, about = "Nodal defect vs magnetic Morse index")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline for eigenvalue `n` of one instance file.
    Analyze {
        #[arg(long)]
        file: PathBuf,
        /// 1-based eigenvalue index.
        #[arg(long)]
        n: usize,
    },
    /// Random campaign over connected graphs.
    Verify {
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        max_vertices: usize,
        #[arg(long)]
        max_extra_edges: usize,
        #[arg(long)]
        seed: u64,
        /// Print the full report as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Band edges, Floquet eigenvalue samples and the Hessian identity for a
    /// Hill operator.
    Hill {
        /// `zero`, `const:c`, `cos:a` or `fourier:a1,b1,a2,b2,...`
        #[arg(long)]
        potential: String,
        #[arg(long)]
        band: usize,
        #[arg(long, default_value_t = 33)]
        samples: usize,
        /// Emit `alpha,lambda` rows instead of JSON.
        #[arg(long)]
        csv: bool,
    },
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    let code = match e {
        Error::InstanceFormat(_)
        | Error::PotentialSpec(_)
        | Error::IndexOutOfRange { .. }
        | Error::InvalidRange { .. }
        | Error::BandNotFound(_) => EXIT_INPUT,
        _ => EXIT_NUMERICAL,
    };
    ExitCode::from(code)
}

fn input_error(msg: String) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn print_json(value: &impl serde::Serialize) {
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn threads() -> Result<usize, String> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(t),
            _ => Err(format!("{THREADS_VAR} must be a positive integer, got {v:?}")),
        },
    }
}

fn analyze(file: PathBuf, n: usize) -> ExitCode {
    let text = match std::fs::read_to_string(&file) {
        Ok(t) => t,
        Err(e) => return input_error(format!("{}: {e}", file.display())),
    };
    let op = match InstanceFile::parse(&text).and_then(|f| f.to_operator()) {
        Ok(op) => op,
        Err(e) => return fail(&e),
    };
    let out = match analyze_instance(&op, n) {
        Ok(out) => out,
        Err(e) => return fail(&e),
    };
    print_json(&out);
    match out.status {
        AnalysisStatus::Passed => {
            let r = out.record.as_ref().expect("tested pairs carry a record");
            eprintln!(
                "n = {n}: ν = {}, μ = {}, β = {}, defect = {}, FD index = {}: pass",
                r.nu, r.mu, r.beta, r.defect, r.fd_index
            );
            ExitCode::SUCCESS
        }
        AnalysisStatus::Failed => {
            let r = out.record.as_ref().expect("tested pairs carry a record");
            eprintln!("n = {n}: FAILED: {}", r.violations.join("; "));
            ExitCode::from(EXIT_MISMATCH)
        }
        AnalysisStatus::HypothesesViolated => {
            match (&out.vanishing, &out.note) {
                (Some(v), _) => eprintln!(
                    "n = {n}: hypotheses violated, φ vanishes at {}; n₊ = {}, n₋ = {}, β = {}, FD nullity = {}",
                    v.x0, v.n_plus, v.n_minus, v.beta, v.fd_nullity
                ),
                (None, Some(note)) => eprintln!("n = {n}: hypotheses violated: {note}"),
                (None, None) => eprintln!("n = {n}: hypotheses violated"),
            }
            ExitCode::from(EXIT_HYPOTHESES)
        }
    }
}

fn verify(params: CampaignParams, json: bool) -> ExitCode {
    let threads = match threads() {
        Ok(t) => t,
        Err(msg) => return input_error(msg),
    };
    let report = match run_campaign(&params, threads) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if json {
        print_json(&report);
    }
    let s = &report.summary;
    eprintln!(
        "{} trials, {} pairs: {} passed, {} skipped (hypotheses), {} skipped (ill-conditioned), {} failed; \
         max relative Hessian discrepancy {:.2e}",
        s.trials, s.pairs, s.passed, s.skipped_hypotheses, s.skipped_ill_conditioned, s.failures,
        s.max_relative_discrepancy
    );
    for f in &report.failures {
        eprintln!("  trial {} (seed {}), n = {}: {}", f.trial, f.seed, f.n, f.violations.join("; "));
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_MISMATCH)
    }
}

fn hill(spec: &str, band: usize, samples: usize, csv: bool) -> ExitCode {
    let sweep = match Potential::parse(spec).and_then(|q| hill_sweep(q, band, samples)) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    if csv {
        let mut w = csv::Writer::from_writer(std::io::stdout());
        let rows = std::iter::once(w.write_record(["alpha", "lambda"]))
            .chain(sweep.samples.iter().map(|(a, l)| w.write_record([a.to_string(), l.to_string()])))
            .collect::<Result<Vec<_>, _>>();
        if let Err(e) = rows.and_then(|_| w.flush().map_err(csv::Error::from)) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    } else {
        print_json(&sweep);
    }
    let (lo, hi) = (&sweep.edges[0], &sweep.edges[1]);
    eprintln!("band {band}: [{:.10}, {:.10}]", lo.lambda, hi.lambda);
    match (&sweep.hessian, &sweep.hessian_error) {
        (Some(r), _) => {
            eprintln!(
                "Λ̈(0) = {:.8}, -2/Δ' = {:.8}, relative gap {:.2e}, Morse index {}",
                r.fd_second_derivative, r.predicted, r.relative_discrepancy, r.morse_index
            );
            if r.holds(HILL_TOL) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_MISMATCH)
            }
        }
        (None, Some(e)) => {
            eprintln!("Hessian identity not checked: {e}");
            ExitCode::from(EXIT_HYPOTHESES)
        }
        (None, None) => ExitCode::SUCCESS,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze { file, n } => analyze(file, n),
        Command::Verify { trials, max_vertices, max_extra_edges, seed, json } => {
            verify(CampaignParams { trials, max_vertices, max_extra_edges, seed }, json)
        }
        Command::Hill { potential, band, samples, csv } => hill(&potential, band, samples, csv),
    }
}
