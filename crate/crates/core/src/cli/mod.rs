//! The `chaincalc` command line.
//!
//! Exit codes: 0 when every case passes, 1 on a verification failure, 2 on
//! usage or parse errors. `CHAINCALC_THREADS` sets the worker count.

pub mod converge;
pub mod demo;
pub mod experiments;
pub mod report;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::flow::FlowConfig;
use converge::{ConvergeOptions, Theorem};
use demo::{Demo, DemoOptions};
use experiments::{ChainSource, Experiment, FlowOptions, NormOptions, StrategyArg};
use report::Report;
use verify::{OracleKind, Suite, VerifyOptions};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const THREADS_ENV: &str = "CHAINCALC_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// An inclusive level range written `a..b`, or a single level `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Levels(pub usize, pub usize);

impl std::str::FromStr for Levels {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("expected a..b, got {s:?}");
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => {
                let a = s.trim().parse().map_err(|_| bad())?;
                (a, a)
            }
        };
        if a > b {
            return Err(format!("empty level range {s:?}"));
        }
        Ok(Levels(a, b))
    }
}

#[derive(Debug, Parser)]
#[command(name = "chaincalc", version, about = "Dirac chain calculus: verification suites, convergence tables and demos")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Level range `a..b`.
    #[arg(long, global = true)]
    pub levels: Option<Levels>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, value_enum, default_value_t = OracleKind::Analytic)]
    pub oracle: OracleKind,
    /// Override the case tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a randomised identity suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Tabulate a theorem over refinement levels.
    Converge {
        #[arg(value_enum)]
        theorem: Theorem,
        /// Form in the expression language, e.g. `dx2: x1`.
        #[arg(long)]
        form: Option<String>,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Reproduce a named construction.
    Demo {
        #[arg(value_enum)]
        name: Demo,
        /// Directory for per-level chain dumps.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Bracket the norm of a chain.
    Norm {
        /// `cube`, `refinement`, `zero` or a chain file.
        #[arg(long, default_value = "cube")]
        chain: ChainSource,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Pairing)]
        strategy: StrategyArg,
    },
    /// Chains carried by the rotation flow.
    Flow {
        #[arg(long, value_enum, default_value_t = Experiment::Ftc)]
        experiment: Experiment,
        #[arg(long, default_value_t = 64)]
        n_sub: usize,
        #[arg(long, default_value_t = 1e-3)]
        h_t: f64,
    },
}

/// Installs the global worker pool from `CHAINCALC_THREADS`.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| Error::Invalid(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
    // A pool installed earlier in the process stays in place.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// What a command produced.
pub struct Output {
    pub report: Report,
    /// Plain-text rendering for `--format csv`.
    pub csv: String,
}

fn cases_csv(r: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "expected", "computed", "abs_err", "tol", "pass"]).expect("in-memory");
    for c in &r.cases {
        w.write_record([
            c.id.clone(),
            c.expected.to_string(),
            c.computed.to_string(),
            c.abs_err.to_string(),
            c.tol.to_string(),
            c.pass.to_string(),
        ])
        .expect("in-memory");
    }
    String::from_utf8(w.into_inner().expect("in-memory")).expect("utf-8")
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<(Output, Format)> {
    let levels = cli.levels.map(|Levels(a, b)| (a, b));
    let (report, csv, default) = match &cli.command {
        Command::Verify { suite, samples } => {
            let opts = VerifyOptions { seed: cli.seed, samples: *samples, oracle: cli.oracle, tol: cli.tol };
            let r = verify::run(*suite, &opts)?;
            let c = cases_csv(&r);
            (r, c, Format::Json)
        }
        Command::Converge { theorem, form, samples } => {
            let mut opts = ConvergeOptions { form: form.clone(), seed: cli.seed, samples: *samples, ..Default::default() };
            if let Some(l) = levels {
                opts.levels = l;
            }
            let (r, t) = converge::run(*theorem, &opts)?;
            (r, t.to_csv(), Format::Csv)
        }
        Command::Demo { name, dump } => {
            let r = demo::run(*name, &DemoOptions { levels, tol: cli.tol }, dump.as_deref())?;
            let c = cases_csv(&r);
            (r, c, Format::Json)
        }
        Command::Norm { chain, r, strategy } => {
            let mut opts = NormOptions { chain: chain.clone(), r: *r, strategy: *strategy, ..Default::default() };
            if let Some(l) = levels {
                opts.levels = l;
            }
            if let Some(t) = cli.tol {
                opts.tol = t;
            }
            let rep = experiments::run_norm(&opts)?;
            let c = cases_csv(&rep);
            (rep, c, Format::Json)
        }
        Command::Flow { experiment, n_sub, h_t } => {
            let cfg = FlowConfig { h_t: *h_t, n_sub: *n_sub, bounds: None };
            cfg.validate()?;
            let level = levels.map_or(6, |l| l.1);
            let r = experiments::run_flow(&FlowOptions { experiment: *experiment, level, cfg, tol: cli.tol })?;
            let c = cases_csv(&r);
            (r, c, Format::Json)
        }
    };
    Ok((Output { report, csv }, cli.format.unwrap_or(default)))
}

fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                s.write_all(b"\n")?;
            }
            s.flush()
        }
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    match execute(&cli) {
        Ok((out, fmt)) => {
            let text = match fmt {
                Format::Json => out.report.to_json(),
                Format::Csv => out.csv,
            };
            if let Err(e) = emit(&text, cli.out.as_deref()) {
                eprintln!("error: writing report: {e}");
                return EXIT_USAGE;
            }
            for c in out.report.failures() {
                eprintln!("FAIL {}: expected {}, computed {}, error {:e} > {:e}", c.id, c.expected, c.computed, c.abs_err, c.tol);
            }
            if out.report.passed() {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_ranges() {
        assert_eq!("2..8".parse::<Levels>().unwrap(), Levels(2, 8));
        assert_eq!("5".parse::<Levels>().unwrap(), Levels(5, 5));
        assert!("8..2".parse::<Levels>().is_err());
        assert!("a..b".parse::<Levels>().is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["chaincalc", "verify", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["chaincalc", "demo", "nope"]), EXIT_USAGE);
        assert_eq!(run(["chaincalc", "converge", "stokes", "--levels", "3..x"]), EXIT_USAGE);
        let out = std::env::temp_dir().join(format!("chaincalc-cli-{}.csv", std::process::id()));
        let o = out.to_str().unwrap();
        assert_eq!(run(["chaincalc", "converge", "stokes", "--form", "dx2: x1 *", "--out", o]), EXIT_USAGE);
        assert_eq!(run(["chaincalc", "converge", "stokes", "--levels", "3..5", "--out", o]), EXIT_PASS);
        assert!(std::fs::read_to_string(&out).unwrap().starts_with("j,lhs,rhs,err,ratio"));
        std::fs::remove_file(out).unwrap();
    }
}
