//! Parameter sweeps over a base configuration, with results written as CSV.
//!
//! A scenario names one swept quantity. Each sweep value is written into the
//! base configuration at one or more dotted paths such as
//! `pairs.0.users.1.theta`, optionally as `offset + scale·x`, and every
//! requested method is run on the resulting spec.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{ebop, grid_oracle, OracleGrid};
use crate::config::SpecConfig;
use crate::error::{Error, Result};
use crate::fd::{solve_fd_with, Allocation, SystemSpec};
use crate::solver::{SolverConfig, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Optimal,
    Ebop,
    Oracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Optimal => "optimal",
            Method::Ebop => "ebop",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTarget {
    pub path: String,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub offset: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Name of the swept quantity, used as the x column header.
    pub label: String,
    pub values: Vec<f64>,
    pub targets: Vec<SweepTarget>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub methods: Vec<Method>,
    /// Iteration cap of the optimal solver.
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    pub sweep: Sweep,
    pub spec: SpecConfig,
}

fn default_max_iter() -> usize {
    SolverConfig::default().max_iter
}

const BUILTIN: [(&str, &str); 7] = [
    ("fig3", include_str!("../data/scenarios/fig3.toml")),
    ("theta-both", include_str!("../data/scenarios/theta-both.toml")),
    ("weight", include_str!("../data/scenarios/weight.toml")),
    ("theta-2pairs", include_str!("../data/scenarios/theta-2pairs.toml")),
    ("fig10", include_str!("../data/scenarios/fig10.toml")),
    ("table3pairs", include_str!("../data/scenarios/table3pairs.toml")),
    ("table4pairs", include_str!("../data/scenarios/table4pairs.toml")),
];

/// Names of the shipped scenarios.
pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

pub fn builtin(name: &str) -> Option<Scenario> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::parse(text).expect("bundled scenario parses"))
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// A builtin name or a path to a scenario file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        match builtin(name_or_path) {
            Some(s) => Ok(s),
            None if Path::new(name_or_path).exists() => Self::load(Path::new(name_or_path)),
            None => Err(Error::Config(format!("no scenario or file named {name_or_path:?}"))),
        }
    }

    /// Checks the sweep and that every sweep value yields a valid spec.
    pub fn validate(&self) -> Result<()> {
        let values = &self.sweep.values;
        if values.is_empty() {
            return Err(Error::Config(format!("scenario {}: empty sweep", self.name)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("scenario {}: sweep values must be finite", self.name)));
        }
        let up = values.windows(2).all(|w| w[1] > w[0]);
        let down = values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Config(format!("scenario {}: sweep values must be strictly monotone", self.name)));
        }
        if self.sweep.targets.is_empty() {
            return Err(Error::Config(format!("scenario {}: sweep has no target path", self.name)));
        }
        if self.methods.is_empty() {
            return Err(Error::Config(format!("scenario {}: no methods", self.name)));
        }
        for &x in values {
            self.spec_at(x)?;
        }
        Ok(())
    }

    /// The base configuration with sweep value `x` applied.
    pub fn config_at(&self, x: f64) -> Result<SpecConfig> {
        let mut doc = toml::Value::try_from(&self.spec).map_err(|e| Error::Config(e.to_string()))?;
        for t in &self.sweep.targets {
            let slot = lookup(&mut doc, &t.path)
                .ok_or_else(|| Error::Config(format!("sweep path {:?} does not exist", t.path)))?;
            if !matches!(slot, toml::Value::Float(_) | toml::Value::Integer(_)) {
                return Err(Error::Config(format!("sweep path {:?} is not numeric", t.path)));
            }
            *slot = toml::Value::Float(t.offset + t.scale * x);
        }
        doc.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn spec_at(&self, x: f64) -> Result<SystemSpec> {
        self.config_at(x)?.build()
    }

    pub fn k(&self) -> usize {
        self.spec.pairs.len()
    }
}

fn lookup<'v>(doc: &'v mut toml::Value, path: &str) -> Option<&'v mut toml::Value> {
    let mut cur = doc;
    for part in path.split('.') {
        cur = match cur {
            toml::Value::Table(t) => t.get_mut(part)?,
            toml::Value::Array(a) => a.get_mut(part.parse::<usize>().ok()?)?,
            _ => return None,
        };
    }
    Some(cur)
}

/// Successful result of one method at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub allocation: Allocation,
    pub iterations: usize,
    /// Optimality gap of the solver, or the oracle's resolution bound.
    pub gap: Option<f64>,
    pub eps: Option<f64>,
    pub solver_status: Option<Status>,
    /// Upper bound and incumbent per iteration, for the optimal method.
    pub trace: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub x: f64,
    pub method: Method,
    pub outcome: std::result::Result<Solved, Failure>,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: String,
    pub label: String,
    pub k: usize,
    pub rows: Vec<Row>,
}

/// Runs every method at every sweep value on at most `threads` workers.
/// Rows come back in sweep order, methods in the order listed. Failures
/// are recorded in their row and the run goes on.
pub fn run_scenario(scenario: &Scenario, threads: usize) -> Result<ScenarioResult> {
    run_scenario_with(scenario, threads, &OracleGrid::default())
}

pub fn run_scenario_with(scenario: &Scenario, threads: usize, grid: &OracleGrid) -> Result<ScenarioResult> {
    scenario.validate()?;
    let jobs: Vec<(f64, Method)> = scenario
        .sweep
        .values
        .iter()
        .flat_map(|&x| scenario.methods.iter().map(move |&m| (x, m)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(x, method)| {
                let start = Instant::now();
                let outcome = scenario
                    .spec_at(x)
                    .and_then(|spec| run_method(&spec, method, scenario.max_iter, grid))
                    .map_err(|e| Failure { kind: e.kind(), message: e.to_string() });
                Row { x, method, outcome, wall_time: start.elapsed() }
            })
            .collect()
    });
    Ok(ScenarioResult {
        scenario: scenario.name.clone(),
        label: scenario.sweep.label.clone(),
        k: scenario.k(),
        rows,
    })
}

/// Runs `methods` on a single spec. The result has one row per method,
/// with `x = 1` under the label `run`.
pub fn run_spec(name: &str, spec: &SystemSpec, methods: &[Method], max_iter: usize) -> ScenarioResult {
    let grid = OracleGrid::default();
    let rows = methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let outcome = run_method(spec, method, max_iter, &grid)
                .map_err(|e| Failure { kind: e.kind(), message: e.to_string() });
            Row { x: 1.0, method, outcome, wall_time: start.elapsed() }
        })
        .collect();
    ScenarioResult { scenario: name.into(), label: "run".into(), k: spec.k(), rows }
}

fn run_method(spec: &SystemSpec, method: Method, max_iter: usize, grid: &OracleGrid) -> Result<Solved> {
    match method {
        Method::Optimal => {
            let config = SolverConfig { max_iter, ..SolverConfig::default().with_eps(spec.eps) };
            let (allocation, report) = solve_fd_with(spec, &config)?;
            Ok(Solved {
                allocation,
                iterations: report.iterations,
                gap: Some(report.gap),
                eps: Some(report.eps),
                solver_status: Some(report.status),
                trace: Some((report.upper_bounds, report.best_values)),
            })
        }
        Method::Ebop => Ok(Solved {
            allocation: ebop(spec)?,
            iterations: 0,
            gap: None,
            eps: None,
            solver_status: None,
            trace: None,
        }),
        Method::Oracle => {
            let r = grid_oracle(spec, grid)?;
            Ok(Solved {
                allocation: r.allocation,
                iterations: 0,
                gap: Some(r.resolution_bound),
                eps: None,
                solver_status: None,
                trace: None,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    /// One row per sweep value and method.
    #[default]
    Csv,
    /// `scenario,x,series,value`, one numeric value per line.
    Long,
}

/// One emitted line of the wide table.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub x: f64,
    pub method: String,
    pub status: String,
    pub solver_status: String,
    /// Numeric columns in header order; `None` for empty cells.
    pub values: Vec<Option<f64>>,
    pub detail: String,
}

/// Names of the numeric columns for `k` pairs.
pub fn numeric_columns(k: usize) -> Vec<String> {
    let mut cols = vec!["weighted_sum".to_string()];
    for prefix in ["B", "P1", "P2", "Q1", "Q2"] {
        cols.extend((1..=k).map(|i| format!("{prefix}_{i}")));
    }
    cols.extend(["iterations", "gap", "eps"].map(String::from));
    cols
}

/// `v` rounded to 12 significant digits, in the shortest form that parses
/// back to the rounded value.
pub fn fmt12(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

impl Row {
    pub fn record(&self, k: usize) -> Record {
        let (status, solver_status, values, detail) = match &self.outcome {
            Ok(s) => {
                let a = &s.allocation;
                let mut v = vec![Some(a.weighted_sum_quality)];
                v.extend(a.bw.iter().chain(&a.p1).chain(&a.p2).chain(&a.psnr).map(|&x| Some(x)));
                v.push(Some(s.iterations as f64));
                v.push(s.gap);
                v.push(s.eps);
                let st = s.solver_status.map_or("", |st| st.as_str());
                ("ok".to_string(), st.to_string(), v, String::new())
            }
            Err(f) => (f.kind.to_string(), String::new(), vec![None; numeric_columns(k).len()], f.message.clone()),
        };
        Record { x: self.x, method: self.method.as_str().into(), status, solver_status, values, detail }
    }
}

impl ScenarioResult {
    pub fn records(&self) -> Vec<Record> {
        self.rows.iter().map(|r| r.record(self.k)).collect()
    }

    /// The wide table as CSV text.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.label.clone(), "method".into(), "status".into(), "solver_status".into()];
        header.extend(numeric_columns(self.k));
        header.push("detail".into());
        w.write_record(&header).expect("write to memory");
        for r in self.records() {
            let mut line = vec![fmt12(r.x), r.method, r.status, r.solver_status];
            line.extend(r.values.iter().map(|v| v.map_or(String::new(), fmt12)));
            line.push(r.detail);
            w.write_record(&line).expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }

    /// The long table as CSV text. Empty cells are left out.
    pub fn to_long_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scenario", "x", "series", "value"]).expect("write to memory");
        let cols = numeric_columns(self.k);
        for r in self.records() {
            for (c, v) in cols.iter().zip(&r.values) {
                if let Some(v) = v {
                    let series = format!("{}:{c}", r.method);
                    w.write_record([self.scenario.as_str(), &fmt12(r.x), &series, &fmt12(*v)])
                        .expect("write to memory");
                }
            }
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }

    /// Wall time per row. Kept apart from the results so that those are
    /// reproducible byte for byte.
    pub fn to_timing_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([self.label.as_str(), "method", "wall_time_s"]).expect("write to memory");
        for r in &self.rows {
            w.write_record([fmt12(r.x), r.method.as_str().into(), format!("{:.6}", r.wall_time.as_secs_f64())])
                .expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }
}

/// Parses the wide table written by [`ScenarioResult::to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<Record>> {
    let bad = |e: csv::Error| Error::Config(format!("result table: {e}"));
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let width = r.headers().map_err(bad)?.len();
    if width < 5 {
        return Err(Error::Config("result table: too few columns".into()));
    }
    let num = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            return Ok(None);
        }
        s.parse().map(Some).map_err(|_| Error::Config(format!("result table: bad number {s:?}")))
    };
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(bad)?;
        let x = num(&rec[0])?.ok_or_else(|| Error::Config("result table: missing x".into()))?;
        let values = (4..width - 1).map(|i| num(&rec[i])).collect::<Result<_>>()?;
        out.push(Record {
            x,
            method: rec[1].to_string(),
            status: rec[2].to_string(),
            solver_status: rec[3].to_string(),
            values,
            detail: rec[width - 1].to_string(),
        });
    }
    Ok(out)
}

/// Writes `<scenario>.csv` or `<scenario>.long.csv`, plus
/// `<scenario>.timing.csv`, into `dir`. Returns the paths written.
pub fn emit(result: &ScenarioResult, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    if result.rows.is_empty() {
        return Err(Error::Contract("nothing to emit".into()));
    }
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.into(), source })?;
    let (suffix, body) = match format {
        Format::Csv => ("csv", result.to_csv()),
        Format::Long => ("long.csv", result.to_long_csv()),
    };
    let files = [
        (dir.join(format!("{}.{suffix}", result.scenario)), body),
        (dir.join(format!("{}.timing.csv", result.scenario)), result.to_timing_csv()),
    ];
    for (path, text) in &files {
        std::fs::write(path, text).map_err(|source| Error::Io { path: path.clone(), source })?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
