use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fdmo::config::SpecConfig;
use fdmo::harness::{self, Format, Method, Scenario, ScenarioResult};
use fdmo::Error;

/// Bandwidth and power allocation for full-duplex video pairs.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one system described by a TOML file.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
        /// Write the solver's per-iteration trace to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a builtin scenario or a scenario file.
    Scenario {
        name: String,
        #[command(flatten)]
        opts: RunOpts,
        /// Worker threads for the sweep rows.
        #[arg(long, default_value_t = default_threads())]
        threads: usize,
    },
    /// List the builtin scenarios.
    ListScenarios,
}

#[derive(clap::Args)]
struct RunOpts {
    /// Override the convergence tolerance (dB).
    #[arg(long)]
    eps: Option<f64>,
    /// Override the solver iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Directory for result files; results go to stdout if omitted.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Methods to run; defaults to the scenario's own list, or optimal.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Long,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Optimal,
    Ebop,
    Both,
    Oracle,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Optimal => vec![Method::Optimal],
            MethodArg::Ebop => vec![Method::Ebop],
            MethodArg::Both => vec![Method::Optimal, Method::Ebop],
            MethodArg::Oracle => vec![Method::Oracle],
        }
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Printed on stderr as a single JSON object.
fn report(kind: &str, message: &str, method: Option<Method>) -> ExitCode {
    let mut obj = serde_json::json!({ "error": kind, "message": message });
    if let Some(m) = method {
        obj["method"] = m.as_str().into();
    }
    eprintln!("{obj}");
    ExitCode::from(if kind == "infeasible" { 2 } else { 1 })
}

fn fail(e: Error) -> ExitCode {
    report(e.kind(), &e.to_string(), None)
}

fn output(result: &ScenarioResult, opts: &RunOpts) -> Result<(), Error> {
    let format = match opts.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Long => Format::Long,
    };
    match &opts.out_dir {
        Some(dir) => {
            for path in harness::emit(result, format, dir)? {
                eprintln!("wrote {}", path.display());
            }
        }
        None => match format {
            Format::Csv => print!("{}", result.to_csv()),
            Format::Long => print!("{}", result.to_long_csv()),
        },
    }
    Ok(())
}

fn solve(config: &Path, opts: &RunOpts, trace: Option<&Path>) -> ExitCode {
    let mut cfg = match SpecConfig::load(config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Some(eps) = opts.eps {
        cfg.eps = eps;
    }
    let spec = match cfg.build() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let methods = opts.method.map_or(vec![Method::Optimal], MethodArg::methods);
    let max_iter = opts.max_iter.unwrap_or(fdmo::solver::SolverConfig::default().max_iter);
    let name = config.file_stem().map_or("solve".into(), |s| s.to_string_lossy().into_owned());
    let result = harness::run_spec(&name, &spec, &methods, max_iter);
    if let Some(path) = trace {
        let trace = result.rows.iter().find_map(|r| r.outcome.as_ref().ok()?.trace.as_ref());
        if let Some((ub, cbv)) = trace {
            if let Err(e) = write_trace(path, ub, cbv) {
                return fail(e);
            }
        }
    }
    if let Err(e) = output(&result, opts) {
        return fail(e);
    }
    match result.rows.iter().find_map(|r| r.outcome.as_ref().err().map(|f| (r.method, f))) {
        Some((method, f)) => report(f.kind, &f.message, Some(method)),
        None => ExitCode::SUCCESS,
    }
}

fn write_trace(path: &Path, ub: &[f64], cbv: &[f64]) -> Result<(), Error> {
    let io = |source| Error::Io { path: path.into(), source };
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv { path: path.into(), source: e })?;
    let csv_err = |e| Error::Csv { path: path.into(), source: e };
    w.write_record(["iteration", "upper_bound", "best_value"]).map_err(csv_err)?;
    for (i, (u, b)) in ub.iter().zip(cbv).enumerate() {
        w.write_record([(i + 1).to_string(), harness::fmt12(*u), harness::fmt12(*b)]).map_err(csv_err)?;
    }
    w.flush().map_err(io)
}

fn scenario(name: &str, opts: &RunOpts, threads: usize) -> ExitCode {
    let mut sc = match Scenario::resolve(name) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    if let Some(eps) = opts.eps {
        sc.spec.eps = eps;
    }
    if let Some(m) = opts.method {
        sc.methods = m.methods();
    }
    if let Some(n) = opts.max_iter {
        sc.max_iter = n;
    }
    match harness::run_scenario(&sc, threads).and_then(|r| output(&r, opts)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { config, opts, trace } => solve(&config, &opts, trace.as_deref()),
        Command::Scenario { name, opts, threads } => scenario(&name, &opts, threads),
        Command::ListScenarios => {
            for name in harness::builtin_names() {
                let sc = harness::builtin(name).expect("builtin exists");
                println!("{name}\t{}", sc.description);
            }
            ExitCode::SUCCESS
        }
    }
}
