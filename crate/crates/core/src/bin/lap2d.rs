use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lap2d::harness::{run_study, selftest, StudyConfig, StudyKind};
use lap2d::problem_model::builtin_problems;
use lap2d::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "lap2d", version, about = "Limiting-absorption studies for planar elliptic operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one study and write its JSON report and CSV tables.
    Study {
        /// Flat `key = value` configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        study: Option<String>,
        #[arg(long)]
        problem: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Nodes per side.
        #[arg(long)]
        n: Option<usize>,
        /// Half width L of the computational square.
        #[arg(long)]
        half_width: Option<f64>,
        /// Extra `key=value` overrides, applied last.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Kernel identities, discretization order and oracle agreement.
    Selftest {
        #[arg(long, default_value_t = 257)]
        n: usize,
    },
    /// Print the problem catalog.
    ListProblems,
    /// Print the study names.
    ListStudies,
}

fn build_config(
    config: Option<PathBuf>,
    study: Option<String>,
    problem: Option<String>,
    out: Option<PathBuf>,
    n: Option<usize>,
    half_width: Option<f64>,
    overrides: Vec<String>,
) -> lap2d::Result<StudyConfig> {
    let mut cfg = match config {
        Some(path) => StudyConfig::load(&path)?,
        None => StudyConfig::default(),
    };
    if let Some(s) = study {
        cfg.study = s.parse()?;
    }
    if let Some(p) = problem {
        cfg.problem = p;
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    if let Some(n) = n {
        cfg.n = n;
    }
    if let Some(l) = half_width {
        cfg.half_width = l;
    }
    for kv in overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn error_code(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_SOLVER })
}

fn configure_threads() {
    if let Some(n) = std::env::var("LAP2D_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second initialization only happens in tests; ignore it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    match cli.command {
        Command::Study {
            config,
            study,
            problem,
            out,
            n,
            half_width,
            overrides,
        } => {
            let cfg = match build_config(config, study, problem, out, n, half_width, overrides) {
                Ok(c) => c,
                Err(e) => return error_code(&e),
            };
            let report = match run_study(&cfg) {
                Ok(r) => r,
                Err(e) => return error_code(&e),
            };
            for note in &report.notes {
                println!("note: {note}");
            }
            for flag in &report.numerics.flags {
                println!("flag: {flag}");
            }
            for check in &report.numerics.checks {
                println!("{}", check.line());
            }
            match report.write(&cfg.out_dir) {
                Ok(paths) => {
                    for p in paths {
                        println!("wrote {}", p.display());
                    }
                }
                Err(e) => return error_code(&e),
            }
            println!("total {:.1}s", report.timing.total_seconds);
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
        Command::Selftest { n } => match selftest(n, 0.01) {
            Ok(checks) => {
                for c in &checks {
                    println!("{}", c.line());
                }
                if checks.iter().all(|c| c.passed) {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_FAIL)
                }
            }
            Err(e) => error_code(&e),
        },
        Command::ListProblems => {
            for p in builtin_problems() {
                println!("{:<20} {}", p.name, p.description);
            }
            ExitCode::SUCCESS
        }
        Command::ListStudies => {
            for s in StudyKind::ALL {
                println!("{s}");
            }
            ExitCode::SUCCESS
        }
    }
}
