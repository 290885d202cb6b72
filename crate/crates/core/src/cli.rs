//! Sweep driver behind the `uavcov` binary.
//!
//! Every command evaluates a grid over one parameter and writes one row per
//! grid point, as CSV preceded by a `#` header holding the resolved
//! parameter set, or as a JSON document with the same content.

use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::coverage::{self, Scheme};
use crate::error::Error;
use crate::geometry::HoleGeometry;
use crate::interference::LaplaceContext;
use crate::montecarlo::{self, with_workers};
use crate::params::{db_to_linear, SystemParams};

#[derive(Debug, Parser)]
#[command(name = "uavcov", version, about = "Coverage of a UAV-assisted malfunction area")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conditional coverage of a user at distance r0 from the disc centre.
    Coverage(CoverageArgs),
    /// Expected share of the disc served by each class.
    AreaFractions(SweepArgs),
    /// Normalized spectral efficiency of all three schemes.
    Nse(SweepArgs),
    /// Cross-check the analytics against simulation.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Simulate,
    Both,
}

impl Mode {
    fn analytic(self) -> bool {
        matches!(self, Mode::Analytic | Mode::Both)
    }

    fn simulate(self) -> bool {
        matches!(self, Mode::Simulate | Mode::Both)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML parameter file; missing keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every simulated quantity.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Drops per simulated point; defaults to `sim_drops` from the config.
    #[arg(long)]
    pub drops: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// VAR:START:STOP:STEPS[:log] with VAR one of r0, H, R_c, lambda, delta, epsilon_db.
    #[arg(long)]
    pub sweep: Option<SweepSpec>,
    #[arg(long, value_enum, default_value_t = Mode::Analytic)]
    pub mode: Mode,
}

#[derive(Debug, Clone, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, default_value = "proposed", value_parser = parse_scheme)]
    pub scheme: Scheme,
    /// User distance from the disc centre, in meters.
    #[arg(long, default_value_t = 200.0)]
    pub r0: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Largest accepted |analytic - simulated| difference.
    #[arg(long, default_value_t = 0.02)]
    pub tolerance: f64,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepVar {
    R0,
    H,
    Rc,
    Lambda,
    Delta,
    EpsilonDb,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::R0 => "r0",
            SweepVar::H => "H",
            SweepVar::Rc => "R_c",
            SweepVar::Lambda => "lambda",
            SweepVar::Delta => "delta",
            SweepVar::EpsilonDb => "epsilon_db",
        }
    }

    /// Sets this variable in a parameter set and user distance.
    pub fn apply(self, value: f64, params: &mut SystemParams, r0: &mut f64) {
        match self {
            SweepVar::R0 => *r0 = value,
            SweepVar::H => params.uav_height = value,
            SweepVar::Rc => params.radius_rc = value,
            SweepVar::Lambda => params.bs_density = value,
            SweepVar::Delta => params.delta = value,
            SweepVar::EpsilonDb => params.sir_threshold = db_to_linear(value),
        }
    }

    /// Current value of this variable.
    pub fn current(self, params: &SystemParams, r0: f64) -> f64 {
        match self {
            SweepVar::R0 => r0,
            SweepVar::H => params.uav_height,
            SweepVar::Rc => params.radius_rc,
            SweepVar::Lambda => params.bs_density,
            SweepVar::Delta => params.delta,
            SweepVar::EpsilonDb => 10.0 * params.sir_threshold.log10(),
        }
    }
}

impl FromStr for SweepVar {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "r0" => SweepVar::R0,
            "H" => SweepVar::H,
            "R_c" => SweepVar::Rc,
            "lambda" => SweepVar::Lambda,
            "delta" => SweepVar::Delta,
            "epsilon_db" => SweepVar::EpsilonDb,
            other => {
                return Err(format!(
                    "unknown sweep variable '{other}' (expected r0, H, R_c, lambda, delta or epsilon_db)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

/// A one-dimensional parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub scale: Scale,
}

impl SweepSpec {
    /// A grid holding only the variable's current value.
    fn single(variable: SweepVar, value: f64) -> Self {
        Self {
            variable,
            start: value,
            stop: value,
            steps: 1,
            scale: Scale::Linear,
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.variable.name(), self.start, self.stop, self.steps)?;
        if self.scale == Scale::Log {
            write!(f, ":log")?;
        }
        Ok(())
    }
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(format!("sweep '{s}' must look like VAR:START:STOP:STEPS[:log]"));
        }
        let variable = parts[0].parse()?;
        let num = |p: &str| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("sweep bound '{p}' is not a finite number"))
        };
        let start = num(parts[1])?;
        let stop = num(parts[2])?;
        let steps = parts[3]
            .parse::<usize>()
            .map_err(|_| format!("sweep steps '{}' is not a positive integer", parts[3]))?;
        let scale = match parts.get(4) {
            None | Some(&"lin") | Some(&"linear") => Scale::Linear,
            Some(&"log") => Scale::Log,
            Some(other) => return Err(format!("unknown sweep scale '{other}'")),
        };
        if !(start < stop) {
            return Err(format!("sweep start {start} must be below stop {stop}"));
        }
        if steps < 2 {
            return Err(format!("sweep needs at least 2 steps, got {steps}"));
        }
        if scale == Scale::Log && !(start > 0.0) {
            return Err("logarithmic sweep needs a positive start".into());
        }
        Ok(Self {
            variable,
            start,
            stop,
            steps,
            scale,
        })
    }
}

/// Failure of a CLI run, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Malformed flags, configuration or parameters (exit 2).
    Input(String),
    /// A numerical routine failed at a grid point (exit 3).
    Numerical(String),
    /// The validation gate found checks out of tolerance (exit 1).
    Gate(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Gate(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn at_point(variable: SweepVar, value: f64, err: Error) -> Self {
        let msg = format!("{} = {value}: {err}", variable.name());
        match err {
            Error::Integration { .. } => CliError::Numerical(msg),
            _ => CliError::Input(msg),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) | CliError::Gate(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Integration { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// A finished table: a header block, column names and rows of cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub command: &'static str,
    pub meta: Vec<(String, String)>,
    pub params: Option<SystemParams>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v}"),
            Cell::Text(t) => t.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Text(t) => json!(t),
            Cell::Empty => Value::Null,
        }
    }
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# uavcov {}", self.command);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} = {v}");
        }
        if let Some(p) = &self.params {
            for line in p.to_toml_string().lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let meta: Map<String, Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "command": self.command,
            "meta": meta,
            "params": self.params,
            "columns": self.columns,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("table serializes");
        text.push('\n');
        text
    }
}

fn load_params(common: &CommonArgs) -> Result<SystemParams, CliError> {
    let params = match &common.config {
        Some(path) => SystemParams::load(path)?,
        None => SystemParams::default(),
    };
    Ok(params.validated()?)
}

fn drops_for(common: &CommonArgs, params: &SystemParams) -> Result<u64, CliError> {
    let drops = common.drops.unwrap_or(params.sim_drops);
    if drops == 0 {
        return Err(CliError::Input("--drops must be at least 1".into()));
    }
    Ok(drops)
}

/// Parameter set and user distance at one grid point, validated.
fn point_params(
    base: &SystemParams,
    r0: f64,
    variable: SweepVar,
    value: f64,
) -> Result<(SystemParams, f64), CliError> {
    let mut p = *base;
    let mut r = r0;
    variable.apply(value, &mut p, &mut r);
    let p = p
        .validated()
        .map_err(|e| CliError::at_point(variable, value, e))?;
    Ok((p, r))
}

fn common_meta(command_args: &CommonArgs, sweep: &SweepSpec, mode: Option<Mode>) -> Vec<(String, String)> {
    let mut meta = vec![("sweep".to_string(), sweep.to_string())];
    if let Some(m) = mode {
        meta.push(("mode".into(), format!("{m:?}").to_lowercase()));
    }
    meta.push(("seed".into(), command_args.seed.to_string()));
    meta
}

fn n(v: f64) -> Cell {
    Cell::Num(v)
}

/// Runs a fallible job per grid point, in parallel, keeping grid order.
fn per_point<T: Send>(
    grid: &[f64],
    job: impl Fn(f64) -> Result<T, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    grid.par_iter().map(|&v| job(v)).collect()
}

pub fn cmd_coverage(args: &CoverageArgs) -> Result<Table, CliError> {
    let common = &args.sweep.common;
    let base = load_params(common)?;
    let mode = args.sweep.mode;
    let scheme = args.scheme;
    let sweep = args
        .sweep
        .sweep
        .clone()
        .unwrap_or_else(|| SweepSpec::single(SweepVar::R0, args.r0));
    let grid = sweep.grid();
    let var = sweep.variable;
    let drops = if mode.simulate() { drops_for(common, &base)? } else { 0 };

    let points: Vec<(SystemParams, f64)> = grid
        .iter()
        .map(|&v| point_params(&base, args.r0, var, v))
        .collect::<Result<_, _>>()?;
    for (p, r0) in &points {
        if !(0.0..=p.radius_rc).contains(r0) {
            return Err(CliError::Input(format!(
                "r0 = {r0} lies outside the disc of radius {}",
                p.radius_rc
            )));
        }
    }

    let analytic = if mode.analytic() {
        Some(per_point(&grid, |v| {
            let (p, r0) = point_params(&base, args.r0, var, v)?;
            coverage::scheme_coverage(&p, scheme, r0).map_err(|e| CliError::at_point(var, v, e))
        })?)
    } else {
        None
    };

    let simulated = if mode.simulate() {
        if var == SweepVar::EpsilonDb {
            // the threshold does not change the drops, so simulate once
            let (p, r0) = &points[0];
            let outcomes = montecarlo::simulate_drops(p, *r0, drops, common.seed)?;
            Some(
                points
                    .iter()
                    .map(|(p, _)| montecarlo::coverage_from_drops(&outcomes, scheme, p.sir_threshold))
                    .collect::<Vec<_>>(),
            )
        } else {
            let mut out = Vec::with_capacity(points.len());
            for (p, r0) in &points {
                out.push(montecarlo::estimate_scheme_coverage(p, scheme, *r0, drops, common.seed)?);
            }
            Some(out)
        }
    } else {
        None
    };

    let columns = [var.name(), "pc1", "pc2", "pc3", "total", "estimate", "ci_halfwidth", "scheme", "seed"];
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut row = vec![n(v)];
            match &analytic {
                Some(a) => row.extend([n(a[i].pc1), n(a[i].pc2), n(a[i].pc3), n(a[i].total)]),
                None => row.extend(std::iter::repeat_n(Cell::Empty, 4)),
            }
            match &simulated {
                Some(s) => row.extend([n(s[i].estimate), n(s[i].half_width)]),
                None => row.extend([Cell::Empty, Cell::Empty]),
            }
            row.push(Cell::Text(scheme.to_string()));
            row.push(Cell::Text(common.seed.to_string()));
            row
        })
        .collect();

    let mut meta = common_meta(common, &sweep, Some(mode));
    meta.push(("scheme".into(), scheme.to_string()));
    meta.push(("r0".into(), args.r0.to_string()));
    if mode.simulate() {
        meta.push(("drops".into(), drops.to_string()));
    }
    Ok(Table {
        command: "coverage",
        meta,
        params: Some(base),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    })
}

pub fn cmd_area_fractions(args: &SweepArgs) -> Result<Table, CliError> {
    let common = &args.common;
    let base = load_params(common)?;
    let sweep = args
        .sweep
        .clone()
        .unwrap_or_else(|| SweepSpec::single(SweepVar::Delta, base.delta));
    if matches!(sweep.variable, SweepVar::R0 | SweepVar::EpsilonDb) {
        return Err(CliError::Input(format!(
            "area fractions do not depend on {}; sweep H, R_c, delta or lambda",
            sweep.variable.name()
        )));
    }
    let var = sweep.variable;
    let grid = sweep.grid();
    let mode = args.mode;
    let drops = if mode.simulate() { drops_for(common, &base)? } else { 0 };

    let analytic = if mode.analytic() {
        Some(per_point(&grid, |v| {
            let (p, _) = point_params(&base, 0.0, var, v)?;
            coverage::area_fractions(&p).map_err(|e| CliError::at_point(var, v, e))
        })?)
    } else {
        None
    };
    let simulated = if mode.simulate() {
        let mut out = Vec::with_capacity(grid.len());
        for &v in &grid {
            let (p, _) = point_params(&base, 0.0, var, v)?;
            out.push(montecarlo::estimate_area_fractions(&p, drops, common.seed)?);
        }
        Some(out)
    } else {
        None
    };

    let columns = [var.name(), "f1", "f2", "f3", "sim_f1", "sim_f2", "sim_f3"];
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut row = vec![n(v)];
            match &analytic {
                Some(a) => row.extend(a[i].fractions().map(n)),
                None => row.extend(std::iter::repeat_n(Cell::Empty, 3)),
            }
            match &simulated {
                Some(s) => row.extend(s[i].fractions().map(n)),
                None => row.extend(std::iter::repeat_n(Cell::Empty, 3)),
            }
            row
        })
        .collect();
    let mut meta = common_meta(common, &sweep, Some(mode));
    if mode.simulate() {
        meta.push(("drops".into(), drops.to_string()));
    }
    Ok(Table {
        command: "area-fractions",
        meta,
        params: Some(base),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    })
}

pub fn cmd_nse(args: &SweepArgs) -> Result<Table, CliError> {
    let common = &args.common;
    let base = load_params(common)?;
    let sweep = args
        .sweep
        .clone()
        .unwrap_or_else(|| SweepSpec::single(SweepVar::Rc, base.radius_rc));
    if sweep.variable == SweepVar::R0 {
        return Err(CliError::Input(
            "NSE averages over the user position; r0 cannot be swept".into(),
        ));
    }
    let var = sweep.variable;
    let grid = sweep.grid();
    let mode = args.mode;
    let drops = if mode.simulate() { drops_for(common, &base)? } else { 0 };

    let analytic = if mode.analytic() {
        Some(per_point(&grid, |v| {
            let (p, _) = point_params(&base, 0.0, var, v)?;
            Scheme::ALL
                .iter()
                .map(|&s| coverage::nse_report(&p, s).map(|r| r.nse))
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| CliError::at_point(var, v, e))
        })?)
    } else {
        None
    };
    let simulated = if mode.simulate() {
        let mut out = Vec::with_capacity(grid.len());
        for &v in &grid {
            let (p, _) = point_params(&base, 0.0, var, v)?;
            let outcomes = montecarlo::simulate_disc_drops(&p, drops, common.seed)?;
            out.push(
                Scheme::ALL
                    .map(|s| montecarlo::nse_from_drops(&outcomes, s, p.sir_threshold))
                    .to_vec(),
            );
        }
        Some(out)
    } else {
        None
    };

    let columns = [
        var.name(),
        "nse_proposed",
        "nse_uav_only",
        "nse_ground_only",
        "sim_nse_proposed",
        "sim_nse_uav_only",
        "sim_nse_ground_only",
    ];
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut row = vec![n(v)];
            match &analytic {
                Some(a) => row.extend(a[i].iter().copied().map(n)),
                None => row.extend(std::iter::repeat_n(Cell::Empty, 3)),
            }
            match &simulated {
                Some(s) => row.extend(s[i].iter().copied().map(n)),
                None => row.extend(std::iter::repeat_n(Cell::Empty, 3)),
            }
            row
        })
        .collect();
    let mut meta = common_meta(common, &sweep, Some(mode));
    if mode.simulate() {
        meta.push(("drops".into(), drops.to_string()));
    }
    Ok(Table {
        command: "nse",
        meta,
        params: Some(base),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    })
}

/// One analytic-versus-simulation comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub analytic: f64,
    pub simulated: f64,
    /// `|analytic - simulated|`, or the KS distance for distribution checks.
    pub delta: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn difference(name: String, analytic: f64, simulated: f64, limit: f64) -> Self {
        let delta = (analytic - simulated).abs();
        Self {
            name,
            analytic,
            simulated,
            delta,
            limit,
            pass: delta <= limit,
        }
    }
}

/// Operating points of the conditional Laplace check: `(r0, r1)` with the
/// transform evaluated at `s = r1^α ε`.
const LAPLACE_POINTS: [(f64, f64); 4] = [(450.0, 80.0), (400.0, 150.0), (300.0, 250.0), (150.0, 400.0)];

/// Every analytic-versus-simulation check of the validation gate.
pub fn validation_checks(params: &SystemParams, drops: u64, seed: u64, tolerance: f64) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();

    let r0 = 200.0;
    let outcomes = montecarlo::simulate_drops(params, r0, drops, seed)?;
    for db in [-10.0, -5.0, 0.0, 5.0, 10.0] {
        let p = SystemParams {
            sir_threshold: db_to_linear(db),
            ..*params
        };
        let a = coverage::conditional_coverage(&p, r0)?.total;
        let s = montecarlo::coverage_from_drops(&outcomes, Scheme::Proposed, p.sir_threshold).estimate;
        checks.push(Check::difference(format!("coverage r0={r0} eps_db={db}"), a, s, tolerance));
    }

    let fractions = coverage::area_fractions(params)?;
    let sim = montecarlo::estimate_area_fractions(params, 5 * drops, seed)?;
    for (i, (a, s)) in fractions.fractions().into_iter().zip(sim.fractions()).enumerate() {
        checks.push(Check::difference(format!("area fraction f{}", i + 1), a, s, tolerance));
    }

    let ks_n = 5 * drops;
    for r0 in [0.0, 150.0, 300.0, 450.0] {
        let geometry = HoleGeometry::from_params(params, r0)?;
        let mut samples = montecarlo::sample_nearest_distances(params, r0, ks_n, seed)?;
        let d = montecarlo::ks_statistic(&mut samples, |r| geometry.nearest_bs_cdf(r));
        let limit = montecarlo::ks_critical_99(samples.len());
        checks.push(Check {
            name: format!("nearest-distance KS r0={r0}"),
            analytic: 0.0,
            simulated: d,
            delta: d,
            limit,
            pass: d <= limit,
        });
    }

    let trials = (drops / 20).max(100);
    for (r0, r1) in LAPLACE_POINTS {
        if r1 <= params.radius_rc - r0 || r0 > params.radius_rc {
            continue;
        }
        let s = r1.powf(params.alpha_nlos) * params.sir_threshold;
        let a = LaplaceContext::new(params, r0, r1)?.laplace_i2(s)?;
        let (m, _) = montecarlo::estimate_conditional_laplace(params, r0, r1, s, trials, seed)?;
        checks.push(Check::difference(format!("laplace r0={r0} r1={r1}"), a, m, tolerance));
    }
    Ok(checks)
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<(Table, bool), CliError> {
    let common = &args.common;
    let params = load_params(common)?;
    let drops = drops_for(common, &params)?;
    if !(args.tolerance >= 0.0) {
        return Err(CliError::Input("--tolerance must be non-negative".into()));
    }
    let checks = validation_checks(&params, drops, common.seed, args.tolerance)?;
    let all_pass = checks.iter().all(|c| c.pass);
    let rows = checks
        .iter()
        .map(|c| {
            vec![
                Cell::Text(c.name.clone()),
                n(c.analytic),
                n(c.simulated),
                n(c.delta),
                n(c.limit),
                Cell::Text(if c.pass { "pass" } else { "FAIL" }.into()),
            ]
        })
        .collect();
    let meta = vec![
        ("seed".to_string(), common.seed.to_string()),
        ("drops".to_string(), drops.to_string()),
        ("tolerance".to_string(), args.tolerance.to_string()),
    ];
    let table = Table {
        command: "validate",
        meta,
        params: Some(params),
        columns: ["check", "analytic", "simulated", "delta", "limit", "status"]
            .iter()
            .map(|c| c.to_string())
            .collect(),
        rows,
    };
    Ok((table, all_pass))
}

fn emit(table: &Table, common: &CommonArgs) -> Result<(), CliError> {
    let text = if common.json { table.to_json() } else { table.to_csv() };
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    with_workers(|| match &cli.command {
        Command::Coverage(a) => emit(&cmd_coverage(a)?, &a.sweep.common),
        Command::AreaFractions(a) => emit(&cmd_area_fractions(a)?, &a.common),
        Command::Nse(a) => emit(&cmd_nse(a)?, &a.common),
        Command::Validate(a) => {
            let (table, all_pass) = cmd_validate(a)?;
            emit(&table, &a.common)?;
            if a.common.out.is_some() {
                // keep the report visible when it goes to a file
                eprint!("{}", table.to_csv());
            }
            if all_pass {
                Ok(())
            } else {
                let failed: Vec<String> = table
                    .rows
                    .iter()
                    .filter(|r| r.last() == Some(&Cell::Text("FAIL".into())))
                    .map(|r| format!("{} (delta {})", r[0].csv(), r[3].csv()))
                    .collect();
                Err(CliError::Gate(format!("failed checks: {}", failed.join("; "))))
            }
        }
    })
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
