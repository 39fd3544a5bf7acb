//! Subcommand implementations. Each command writes its outputs plus a run
//! manifest into the output directory and returns a short text report.

use std::fs;
use std::path::{Path, PathBuf};

use plcp_radar::analytic::{self, PathLossConvention};
use plcp_radar::montecarlo::EstimateWithCI;
use plcp_radar::optimizer::{
    default_beamwidth_grid, run_sweep, Engine, OptimizerError, Scenario, SweepAxis, SweepGrid, SweepOutcome, SweepRow,
    SweepTable,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ConventionSelection, EngineSelection, ScenarioConfig};
use crate::csvio::{self, OptimumRow};
use crate::figures::{self, Panel, PanelData};
use crate::manifest::Manifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Validation(_) => 4,
        }
    }
}

impl From<OptimizerError> for CliError {
    fn from(e: OptimizerError) -> Self {
        match e {
            OptimizerError::Analytic(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub engine: Option<EngineSelection>,
    pub convention: Option<ConventionSelection>,
    pub sweep_axis: Option<String>,
    pub sweep_values: Option<Vec<f64>>,
}

impl Overrides {
    pub fn apply(&self, mut c: ScenarioConfig) -> Result<ScenarioConfig, ConfigError> {
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(t) = self.trials {
            c.trials = t;
        }
        if let Some(e) = self.engine {
            c.engine = e;
        }
        if let Some(v) = self.convention {
            c.convention = v;
        }
        if let Some(a) = &self.sweep_axis {
            c.sweep_axis = Some(a.clone());
        }
        if let Some(v) = &self.sweep_values {
            c.sweep_values = v.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<ScenarioConfig, CliError> {
    let base = match path {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    Ok(overrides.apply(base)?)
}

#[derive(Debug, Clone)]
pub struct Context {
    pub config: ScenarioConfig,
    pub out: PathBuf,
    /// Test hook: evaluates the analytic engine with a one-way target path
    /// loss so that `validate` must fail.
    pub corrupt_beta_prime: bool,
}

impl Context {
    pub fn new(config: ScenarioConfig, out: impl Into<PathBuf>) -> Self {
        Self {
            config,
            out: out.into(),
            corrupt_beta_prime: false,
        }
    }

    fn scenario(&self) -> Result<Scenario, CliError> {
        let mut s = self.config.scenario()?;
        if self.corrupt_beta_prime {
            s.model.path_loss = PathLossConvention::OneWay;
        }
        Ok(s)
    }
}

/// Text for stdout plus the files written.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub text: String,
    pub outputs: Vec<PathBuf>,
}

struct Outputs<'a> {
    ctx: &'a Context,
    manifest: Manifest,
    written: Vec<PathBuf>,
}

impl<'a> Outputs<'a> {
    fn new(ctx: &'a Context, command: &str) -> Result<Self, CliError> {
        fs::create_dir_all(&ctx.out).map_err(|e| CliError::Io(format!("{}: {e}", ctx.out.display())))?;
        Ok(Self {
            ctx,
            manifest: Manifest::new(command, &ctx.config),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.ctx.out.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.manifest.outputs.push(name.to_string());
        self.written.push(path);
        Ok(())
    }

    fn finish(mut self, text: String) -> Result<Report, CliError> {
        let name = self.manifest.file_name();
        let json = self.manifest.to_json();
        let path = self.ctx.out.join(&name);
        fs::write(&path, json).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(Report {
            text,
            outputs: self.written,
        })
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

fn table_text(rows: &[SweepRow]) -> String {
    let mut s = String::from("grid_axis grid_value engine p_d l_avg n_r n_d std_err\n");
    for r in rows {
        s.push_str(&format!(
            "{} {} {} {} {} {} {} {}\n",
            r.grid_axis,
            r.grid_value,
            r.engine,
            fmt_opt(r.p_d),
            fmt_opt(r.l_avg),
            fmt_opt(r.n_r),
            fmt_opt(r.n_d),
            fmt_opt(r.std_err)
        ));
    }
    s
}

fn failure_messages(out: &SweepOutcome) -> Vec<String> {
    out.failures
        .iter()
        .map(|f| {
            format!(
                "{}={} [{}]: {}",
                out.table.rows[0].grid_axis, f.grid_value, f.engine, f.message
            )
        })
        .collect()
}

/// One line of `analytic.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRow {
    pub p_d: f64,
    pub noise_factor: f64,
    pub interference_exponent: f64,
    pub quad_error: f64,
    pub l_avg_paper: f64,
    pub l_avg_campbell: f64,
    pub convention: String,
    pub n_r: f64,
    pub n_d: f64,
}

pub const ANALYTIC_HEADER: &str =
    "p_d,noise_factor,interference_exponent,quad_error,l_avg_paper,l_avg_campbell,convention,n_r,n_d";

pub fn analytic(ctx: &Context) -> Result<Report, CliError> {
    let s = ctx.scenario()?;
    let numeric = |e: analytic::AnalyticError| CliError::Numeric(e.to_string());
    let pd = analytic::detection_probability(&s.radar, &s.net, &s.sector, s.sector.range(), &s.quadrature, &s.model)
        .map_err(numeric)?;
    let l = analytic::avg_line_length(&s.net, &s.sector, &s.quadrature, s.convention).map_err(numeric)?;
    let n_r = s.net.lambda_p * l.value();
    let row = AnalyticRow {
        p_d: pd.value,
        noise_factor: pd.noise_factor,
        interference_exponent: pd.interference_exponent,
        quad_error: pd.error,
        l_avg_paper: l.paper_literal,
        l_avg_campbell: l.campbell,
        convention: format!("{:?}", ctx.config.convention).to_lowercase(),
        n_r,
        n_d: n_r * pd.value,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.serialize(&row)?;
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    let mut out = Outputs::new(ctx, "analytic")?;
    out.write("analytic.csv", &String::from_utf8_lossy(&bytes))?;
    let text = format!(
        "p_D = {:.6} (e(R) = {:.6}, exponent = {:.6}, quadrature error {:.2e})\n\
         l_avg = {:.6} m ({}; paper-literal {:.6} m, campbell {:.6} m)\n\
         n(R) = {:.6}, n_D >= {:.6}\n",
        row.p_d,
        row.noise_factor,
        row.interference_exponent,
        row.quad_error,
        l.value(),
        row.convention,
        row.l_avg_paper,
        row.l_avg_campbell,
        row.n_r,
        row.n_d
    );
    out.finish(text)
}

pub fn simulate(ctx: &Context) -> Result<Report, CliError> {
    let s = ctx.scenario()?;
    let grid = SweepGrid::new(SweepAxis::HalfBeamwidth, vec![ctx.config.omega_b_deg], s)?;
    let result = run_sweep(&grid, &[Engine::MonteCarlo])?;
    let mut out = Outputs::new(ctx, "simulate")?;
    out.manifest.failures = failure_messages(&result);
    out.write("simulate.csv", &csvio::sweep_to_csv(&result.table)?)?;
    let row = &result.table.rows[0];
    let Some(p) = row.p_d else {
        let msg = out.manifest.failures.join("; ");
        out.finish(String::new())?;
        return Err(CliError::Numeric(msg));
    };
    let n = row.trials.unwrap_or(ctx.config.trials);
    let ci = EstimateWithCI::from_successes((p * n as f64).round() as u64, n, ctx.config.confidence);
    let text = format!(
        "p_D = {:.6} +/- {:.6} (SE), {:.0}% CI [{:.6}, {:.6}], {} trials, seed {}\n\
         l_avg = {:.6} m, n(R) = {:.6}, n_D = {:.6}\n",
        ci.mean,
        ci.std_err,
        100.0 * ci.confidence,
        ci.lower,
        ci.upper,
        n,
        ctx.config.seed,
        row.l_avg.unwrap_or(f64::NAN),
        row.n_r.unwrap_or(f64::NAN),
        row.n_d.unwrap_or(f64::NAN)
    );
    out.finish(text)
}

pub fn sweep(ctx: &Context) -> Result<Report, CliError> {
    let axis = ctx
        .config
        .sweep_axis()
        .ok_or_else(|| CliError::Usage("sweep needs an axis (--axis or sweep_axis)".into()))?;
    if ctx.config.sweep_values.is_empty() {
        return Err(CliError::Usage(
            "sweep needs grid values (--values or sweep_values)".into(),
        ));
    }
    let grid = SweepGrid::new(axis, ctx.config.sweep_values.clone(), ctx.scenario()?)?;
    let result = run_sweep(&grid, &ctx.config.engine.engines())?;
    let mut out = Outputs::new(ctx, "sweep")?;
    out.manifest.failures = failure_messages(&result);
    out.write("sweep.csv", &csvio::sweep_to_csv(&result.table)?)?;
    let failures = out.manifest.failures.clone();
    let report = out.finish(table_text(&result.table.rows))?;
    if failures.is_empty() {
        Ok(report)
    } else {
        Err(CliError::Numeric(failures.join("; ")))
    }
}

pub fn optimize(ctx: &Context) -> Result<Report, CliError> {
    let grid_deg = if ctx.config.omega_grid_deg.is_empty() {
        default_beamwidth_grid()
    } else {
        ctx.config.omega_grid_deg.clone()
    };
    let grid = SweepGrid::new(SweepAxis::HalfBeamwidth, grid_deg, ctx.scenario()?)?;
    let engines = ctx.config.engine.engines();
    let result = run_sweep(&grid, &engines)?;
    let mut out = Outputs::new(ctx, "optimize")?;
    out.manifest.failures = failure_messages(&result);
    out.write("optimize.csv", &csvio::sweep_to_csv(&result.table)?)?;
    let mut optima = Vec::new();
    let mut text = String::new();
    for &e in &engines {
        match result.table.optimum(e) {
            Ok(o) => {
                text.push_str(&format!(
                    "[{e}] Omega_B* = {} deg (2 Omega_B* = {} deg), n_D* = {:.6}{}\n",
                    o.grid_value,
                    2.0 * o.grid_value,
                    o.value,
                    if o.saturated() {
                        ", saturated at grid boundary"
                    } else {
                        ""
                    }
                ));
                optima.push(OptimumRow {
                    series: e.to_string(),
                    grid_axis: SweepAxis::Range,
                    grid_value: ctx.config.r_m,
                    omega_b_star_deg: o.grid_value,
                    n_d_star: o.value,
                    saturated: o.saturated(),
                });
            }
            Err(err) => out.manifest.failures.push(format!("[{e}] {err}")),
        }
    }
    out.write("optimum.csv", &csvio::optimum_to_csv(&optima)?)?;
    let failures = out.manifest.failures.clone();
    let report = out.finish(text)?;
    if failures.is_empty() {
        Ok(report)
    } else {
        Err(CliError::Numeric(failures.join("; ")))
    }
}

/// Built-in cross-engine grid: `(λ_L, λ_P, Ω_B deg)` at the configured range.
pub const VALIDATION_GRID: [(f64, f64, f64); 5] = [
    (0.0, 0.01, 10.0),
    (0.005, 0.01, 10.0),
    (0.05, 0.05, 5.0),
    (0.05, 0.1, 15.0),
    (0.01, 0.1, 10.0),
];

/// Absolute tolerance floor of the cross-engine check.
pub const VALIDATION_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub lambda_l: f64,
    pub lambda_p: f64,
    pub omega_b_deg: f64,
    pub r_m: f64,
    pub p_d_analytic: Option<f64>,
    pub p_d_mc: Option<f64>,
    pub std_err: Option<f64>,
    pub delta: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl ValidationRow {
    fn new(point: (f64, f64, f64), r_m: f64, analytic: Option<f64>, mc: Option<(f64, f64)>) -> Self {
        let (delta, tolerance, pass) = match (analytic, mc) {
            (Some(a), Some((m, se))) => {
                let d = (a - m).abs();
                let tol = VALIDATION_TOLERANCE.max(3.0 * se);
                (Some(d), Some(tol), d <= tol)
            }
            _ => (None, None, false),
        };
        Self {
            lambda_l: point.0,
            lambda_p: point.1,
            omega_b_deg: point.2,
            r_m,
            p_d_analytic: analytic,
            p_d_mc: mc.map(|m| m.0),
            std_err: mc.map(|m| m.1),
            delta,
            tolerance,
            pass,
        }
    }
}

pub fn validate(ctx: &Context) -> Result<Report, CliError> {
    let base = ctx.scenario()?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &point in &VALIDATION_GRID {
        let s = base
            .with(SweepAxis::LambdaL, point.0)
            .and_then(|s| s.with(SweepAxis::LambdaP, point.1))
            .and_then(|s| s.with(SweepAxis::HalfBeamwidth, point.2))?;
        let a = analytic::detection_probability(&s.radar, &s.net, &s.sector, s.sector.range(), &s.quadrature, &s.model);
        let m = plcp_radar::montecarlo::estimate_pd(&s.radar, &s.net, &s.sector, s.sector.range(), &s.mc);
        if let Err(e) = &a {
            failures.push(format!("{point:?} analytic: {e}"));
        }
        if let Err(e) = &m {
            failures.push(format!("{point:?} mc: {e}"));
        }
        rows.push(ValidationRow::new(
            point,
            ctx.config.r_m,
            a.ok().map(|d| d.value),
            m.ok().map(|e| (e.mean, e.std_err)),
        ));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    let mut out = Outputs::new(ctx, "validate")?;
    out.manifest.failures = failures;
    out.write("validate.csv", &String::from_utf8_lossy(&bytes))?;
    let mut text = String::from("lambda_l lambda_p omega_b_deg p_d_analytic p_d_mc delta tolerance result\n");
    for r in &rows {
        text.push_str(&format!(
            "{} {} {} {} {} {} {} {}\n",
            r.lambda_l,
            r.lambda_p,
            r.omega_b_deg,
            fmt_opt(r.p_d_analytic),
            fmt_opt(r.p_d_mc),
            fmt_opt(r.delta),
            fmt_opt(r.tolerance),
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    let report = out.finish(text)?;
    if failed == 0 {
        Ok(report)
    } else {
        Err(CliError::Validation(format!(
            "{failed} of {} points outside tolerance\n{}",
            rows.len(),
            report.text
        )))
    }
}

pub fn figures_cmd(ctx: &Context, panels: &[Panel]) -> Result<Report, CliError> {
    let base = ctx.scenario()?;
    let engines = ctx.config.engine.engines();
    let mut out = Outputs::new(ctx, "figures")?;
    let mut text = String::new();
    for &panel in panels {
        let spec = panel.spec();
        let result = figures::evaluate(&spec, &base, &engines).map_err(CliError::Numeric)?;
        let csv_text = match &result.data {
            PanelData::Sweep(rows) => csvio::panel_to_csv(rows)?,
            PanelData::Optimum(rows) => csvio::optimum_to_csv(rows)?,
        };
        out.write(&format!("{panel}.csv"), &csv_text)?;
        out.write(&format!("{panel}.svg"), &figures::chart(&spec, &result.data).render())?;
        text.push_str(&format!("{panel}: {} series over {}\n", spec.series.len(), spec.axis));
        out.manifest.failures.extend(result.failures);
    }
    let failures = out.manifest.failures.clone();
    let report = out.finish(text)?;
    if failures.is_empty() {
        Ok(report)
    } else {
        Err(CliError::Numeric(failures.join("; ")))
    }
}

/// Reads a sweep CSV back; used by tests and downstream tooling.
pub fn read_sweep(path: &Path) -> Result<SweepTable, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(csvio::sweep_from_csv(&text)?)
}
