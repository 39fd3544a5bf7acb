//! Parameter sweeps over either engine and grid search for the half-beamwidth
//! maximizing the expected number of detections `n_D`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{
    self, AnalyticError, InterferenceModel, LengthConvention, NetworkParams, QuadratureSpec, RadarParams,
};
use crate::geometry::{GeometryError, SectorGeometry};
use crate::montecarlo::{self, McError, McSpec};
use crate::units::db_to_linear;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("no engine selected")]
    NoEngines,
    #[error("grid is empty")]
    EmptyGrid,
    #[error("grid values must be finite and strictly increasing (index {index})")]
    GridOrder { index: usize },
    #[error("grid and value lengths differ ({grid} vs {values})")]
    LengthMismatch { grid: usize, values: usize },
    #[error("grid value {value} invalid for axis {axis}: {reason}")]
    GridValue {
        axis: SweepAxis,
        value: f64,
        reason: String,
    },
    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),
    #[error("unknown engine `{0}`")]
    UnknownEngine(String),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

/// Swept parameter. Values are in the units of [`SweepAxis::name`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SweepAxis {
    HalfBeamwidth,
    LambdaP,
    LambdaL,
    Range,
    Threshold,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 5] = [
        SweepAxis::HalfBeamwidth,
        SweepAxis::LambdaP,
        SweepAxis::LambdaL,
        SweepAxis::Range,
        SweepAxis::Threshold,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::HalfBeamwidth => "omega_b_deg",
            SweepAxis::LambdaP => "lambda_p",
            SweepAxis::LambdaL => "lambda_l",
            SweepAxis::Range => "r_m",
            SweepAxis::Threshold => "beta_db",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = OptimizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| OptimizerError::UnknownAxis(s.to_string()))
    }
}

impl From<SweepAxis> for String {
    fn from(a: SweepAxis) -> String {
        a.name().to_string()
    }
}

impl TryFrom<String> for SweepAxis {
    type Error = OptimizerError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Engine {
    Analytic,
    MonteCarlo,
}

impl Engine {
    pub fn tag(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Engine {
    type Err = OptimizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "mc" => Ok(Engine::MonteCarlo),
            _ => Err(OptimizerError::UnknownEngine(s.to_string())),
        }
    }
}

impl From<Engine> for String {
    fn from(e: Engine) -> String {
        e.tag().to_string()
    }
}

impl TryFrom<String> for Engine {
    type Error = OptimizerError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Everything needed to evaluate one operating point with either engine. The
/// target sits at the sector range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub radar: RadarParams,
    pub net: NetworkParams,
    pub sector: SectorGeometry,
    pub quadrature: QuadratureSpec,
    /// Model used by the analytic engine.
    pub model: InterferenceModel,
    pub convention: LengthConvention,
    /// Simulation settings; `mc.model` is the simulated model.
    pub mc: McSpec,
}

impl Scenario {
    /// Returns a copy with `axis` set to `value`.
    pub fn with(&self, axis: SweepAxis, value: f64) -> Result<Scenario, OptimizerError> {
        let bad = |reason: String| OptimizerError::GridValue { axis, value, reason };
        let geometry = |e: GeometryError| bad(e.to_string());
        let analytic = |e: AnalyticError| bad(e.to_string());
        let mut s = *self;
        match axis {
            SweepAxis::HalfBeamwidth => {
                s.sector = s.sector.with_half_beamwidth(value.to_radians()).map_err(geometry)?;
            }
            SweepAxis::Range => {
                s.sector = s.sector.with_range(value).map_err(geometry)?;
            }
            SweepAxis::LambdaP => s.net = NetworkParams::new(s.net.lambda_l, value).map_err(analytic)?,
            SweepAxis::LambdaL => s.net = NetworkParams::new(value, s.net.lambda_p).map_err(analytic)?,
            SweepAxis::Threshold => {
                if !value.is_finite() {
                    return Err(bad("expected a finite threshold in dB".into()));
                }
                s.radar.threshold = db_to_linear(value);
            }
        }
        Ok(s)
    }

    pub fn value(&self, axis: SweepAxis) -> f64 {
        match axis {
            SweepAxis::HalfBeamwidth => self.sector.half_beamwidth().to_degrees(),
            SweepAxis::Range => self.sector.range(),
            SweepAxis::LambdaP => self.net.lambda_p,
            SweepAxis::LambdaL => self.net.lambda_l,
            SweepAxis::Threshold => crate::units::linear_to_db(self.radar.threshold),
        }
    }
}

/// Strictly increasing values of one axis around a fixed scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    axis: SweepAxis,
    values: Vec<f64>,
    base: Scenario,
}

impl SweepGrid {
    pub fn new(axis: SweepAxis, values: Vec<f64>, base: Scenario) -> Result<Self, OptimizerError> {
        check_increasing(&values)?;
        for &v in &values {
            base.with(axis, v)?;
        }
        Ok(Self { axis, values, base })
    }

    pub fn axis(&self) -> SweepAxis {
        self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn base(&self) -> &Scenario {
        &self.base
    }
}

fn check_increasing(values: &[f64]) -> Result<(), OptimizerError> {
    if values.is_empty() {
        return Err(OptimizerError::EmptyGrid);
    }
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() || (i > 0 && *v <= values[i - 1]) {
            return Err(OptimizerError::GridOrder { index: i });
        }
    }
    Ok(())
}

/// `1°, 1.5°, …, 20°`.
pub fn default_beamwidth_grid() -> Vec<f64> {
    (0..=38).map(|i| 1.0 + 0.5 * i as f64).collect()
}

/// One engine evaluated at one grid point. Numeric fields are `None` when the
/// evaluation failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub grid_axis: SweepAxis,
    pub grid_value: f64,
    pub engine: Engine,
    pub p_d: Option<f64>,
    pub l_avg: Option<f64>,
    pub n_r: Option<f64>,
    pub n_d: Option<f64>,
    /// Standard error of `p_d` (MC) or the quadrature error estimate
    /// (analytic).
    pub std_err: Option<f64>,
    /// Monte Carlo trial count; empty for analytic rows.
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn engine_rows(&self, engine: Engine) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.engine == engine)
    }

    /// Grid search over the `n_d` column of `engine`'s rows. Failed rows are
    /// skipped.
    pub fn optimum(&self, engine: Engine) -> Result<Optimum, OptimizerError> {
        let (grid, nd): (Vec<f64>, Vec<f64>) = self
            .engine_rows(engine)
            .filter_map(|r| r.n_d.map(|n| (r.grid_value, n)))
            .unzip();
        argmax_on_grid(&grid, &nd)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub index: usize,
    pub grid_value: f64,
    pub engine: Engine,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub table: SweepTable,
    pub failures: Vec<PointFailure>,
}

#[derive(Debug, Error)]
enum PointError {
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Mc(#[from] McError),
}

fn analytic_row(s: &Scenario, axis: SweepAxis, x: f64) -> Result<SweepRow, PointError> {
    let l = analytic::avg_line_length(&s.net, &s.sector, &s.quadrature, s.convention)?.value();
    let n_r = s.net.lambda_p * l;
    let pd = analytic::detection_probability(&s.radar, &s.net, &s.sector, s.sector.range(), &s.quadrature, &s.model)?;
    Ok(SweepRow {
        grid_axis: axis,
        grid_value: x,
        engine: Engine::Analytic,
        p_d: Some(pd.value),
        l_avg: Some(l),
        n_r: Some(n_r),
        n_d: Some(n_r * pd.value),
        std_err: Some(pd.error),
        trials: None,
    })
}

fn mc_row(s: &Scenario, axis: SweepAxis, x: f64) -> Result<SweepRow, PointError> {
    let pd = montecarlo::estimate_pd(&s.radar, &s.net, &s.sector, s.sector.range(), &s.mc)?;
    let chords = montecarlo::estimate_chord_stats(&s.net, &s.sector, &s.mc)?;
    let n_r = chords.count.mean;
    Ok(SweepRow {
        grid_axis: axis,
        grid_value: x,
        engine: Engine::MonteCarlo,
        p_d: Some(pd.mean),
        l_avg: Some(chords.length.mean),
        n_r: Some(n_r),
        n_d: Some(n_r * pd.mean),
        std_err: Some(pd.std_err),
        trials: Some(pd.trials),
    })
}

/// Evaluates `engines` at every grid point. Points run concurrently; rows are
/// ordered by grid index, then by engine order in `engines`. A failing point
/// yields a row with empty numeric fields and an entry in `failures`.
pub fn run_sweep(grid: &SweepGrid, engines: &[Engine]) -> Result<SweepOutcome, OptimizerError> {
    if engines.is_empty() {
        return Err(OptimizerError::NoEngines);
    }
    let axis = grid.axis;
    let jobs: Vec<(usize, f64, Engine)> = grid
        .values
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| engines.iter().map(move |&e| (i, x, e)))
        .collect();
    let results: Vec<(usize, f64, Engine, Result<SweepRow, String>)> = jobs
        .into_par_iter()
        .map(|(i, x, e)| {
            let r = grid.base.with(axis, x).map_err(|err| err.to_string()).and_then(|s| {
                match e {
                    Engine::Analytic => analytic_row(&s, axis, x),
                    Engine::MonteCarlo => mc_row(&s, axis, x),
                }
                .map_err(|err| err.to_string())
            });
            (i, x, e, r)
        })
        .collect();
    let mut table = SweepTable::default();
    let mut failures = Vec::new();
    for (index, x, engine, r) in results {
        match r {
            Ok(row) => table.rows.push(row),
            Err(message) => {
                table.rows.push(SweepRow {
                    grid_axis: axis,
                    grid_value: x,
                    engine,
                    p_d: None,
                    l_avg: None,
                    n_r: None,
                    n_d: None,
                    std_err: None,
                    trials: None,
                });
                failures.push(PointFailure {
                    index,
                    grid_value: x,
                    engine,
                    message,
                });
            }
        }
    }
    Ok(SweepOutcome { table, failures })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Saturation {
    Interior,
    /// The maximum is the smallest grid value.
    LowerBoundary,
    /// The maximum is the largest grid value; the curve may still be rising.
    UpperBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub index: usize,
    pub grid_value: f64,
    pub value: f64,
    pub saturation: Saturation,
}

impl Optimum {
    pub fn saturated(&self) -> bool {
        self.saturation != Saturation::Interior
    }
}

/// Index of the largest value; ties go to the smaller grid value.
pub fn argmax_on_grid(grid: &[f64], values: &[f64]) -> Result<Optimum, OptimizerError> {
    if grid.len() != values.len() {
        return Err(OptimizerError::LengthMismatch {
            grid: grid.len(),
            values: values.len(),
        });
    }
    check_increasing(grid)?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    let saturation = if best + 1 == grid.len() {
        Saturation::UpperBoundary
    } else if best == 0 {
        Saturation::LowerBoundary
    } else {
        Saturation::Interior
    };
    Ok(Optimum {
        index: best,
        grid_value: grid[best],
        value: values[best],
        saturation,
    })
}

/// Analytic `n_D` at each half-beamwidth of `grid_deg`, in degrees.
pub fn n_detections_curve(scenario: &Scenario, grid_deg: &[f64]) -> Result<Vec<f64>, OptimizerError> {
    check_increasing(grid_deg)?;
    grid_deg
        .par_iter()
        .map(|&deg| {
            let s = scenario.with(SweepAxis::HalfBeamwidth, deg)?;
            Ok(analytic::n_detections_lower_bound(
                &s.radar,
                &s.net,
                &s.sector,
                &s.quadrature,
                &s.model,
                s.convention,
            )?)
        })
        .collect()
}

/// Half-beamwidth (degrees) on `grid_deg` maximizing the analytic `n_D`.
pub fn optimal_beamwidth(scenario: &Scenario, grid_deg: &[f64]) -> Result<Optimum, OptimizerError> {
    let nd = n_detections_curve(scenario, grid_deg)?;
    argmax_on_grid(grid_deg, &nd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::RadarParamsDb;

    fn scenario(lambda_l: f64, lambda_p: f64) -> Scenario {
        Scenario {
            radar: RadarParamsDb::default().to_linear().unwrap(),
            net: NetworkParams::new(lambda_l, lambda_p).unwrap(),
            sector: SectorGeometry::from_degrees(10.0, 15.0).unwrap(),
            quadrature: QuadratureSpec::default(),
            model: InterferenceModel::default(),
            convention: LengthConvention::Campbell,
            mc: McSpec {
                trials: 200,
                seed: 5,
                ..McSpec::default()
            },
        }
    }

    #[test]
    fn argmax_example() {
        let o = argmax_on_grid(&[5.0, 10.0, 15.0], &[0.1, 0.3, 0.2]).unwrap();
        assert_eq!(o.grid_value, 10.0);
        assert_eq!(o.value, 0.3);
        assert_eq!(o.saturation, Saturation::Interior);
    }

    #[test]
    fn argmax_ties_go_to_smaller_beamwidth() {
        let o = argmax_on_grid(&[1.0, 2.0, 3.0, 4.0], &[0.1, 0.4, 0.4, 0.2]).unwrap();
        assert_eq!(o.grid_value, 2.0);
    }

    #[test]
    fn argmax_flags_boundaries() {
        assert_eq!(
            argmax_on_grid(&[1.0, 2.0, 3.0], &[0.1, 0.2, 0.3]).unwrap().saturation,
            Saturation::UpperBoundary
        );
        assert_eq!(
            argmax_on_grid(&[1.0, 2.0, 3.0], &[0.3, 0.2, 0.1]).unwrap().saturation,
            Saturation::LowerBoundary
        );
    }

    #[test]
    fn argmax_rejects_bad_grids() {
        assert_eq!(argmax_on_grid(&[], &[]), Err(OptimizerError::EmptyGrid));
        assert!(matches!(
            argmax_on_grid(&[1.0, 1.0], &[0.0, 0.0]),
            Err(OptimizerError::GridOrder { .. })
        ));
        assert!(matches!(
            argmax_on_grid(&[1.0], &[0.0, 0.0]),
            Err(OptimizerError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn default_grid_spans_one_to_twenty_degrees() {
        let g = default_beamwidth_grid();
        assert_eq!(g.first(), Some(&1.0));
        assert_eq!(g.last(), Some(&20.0));
        assert!(g.windows(2).all(|w| (w[1] - w[0] - 0.5).abs() < 1e-12));
    }

    #[test]
    fn empty_engine_set_is_an_error() {
        let g = SweepGrid::new(SweepAxis::Range, vec![5.0], scenario(0.01, 0.01)).unwrap();
        assert_eq!(run_sweep(&g, &[]), Err(OptimizerError::NoEngines));
    }

    #[test]
    fn sweep_grid_validates_values() {
        let s = scenario(0.01, 0.01);
        assert!(SweepGrid::new(SweepAxis::HalfBeamwidth, vec![5.0, 4.0], s).is_err());
        assert!(SweepGrid::new(SweepAxis::HalfBeamwidth, vec![5.0, 95.0], s).is_err());
        assert!(SweepGrid::new(SweepAxis::LambdaP, vec![-1.0], s).is_err());
        assert!(SweepGrid::new(SweepAxis::Range, vec![], s).is_err());
    }

    #[test]
    fn range_sweep_decreases_detection_probability() {
        let g = SweepGrid::new(SweepAxis::Range, vec![5.0, 15.0, 30.0], scenario(0.01, 0.01)).unwrap();
        let out = run_sweep(&g, &[Engine::Analytic]).unwrap();
        assert!(out.failures.is_empty());
        let pd: Vec<f64> = out.table.rows.iter().map(|r| r.p_d.unwrap()).collect();
        assert!(pd[0] > pd[1] && pd[1] > pd[2], "{pd:?}");
    }

    #[test]
    fn rows_are_ordered_by_grid_then_engine() {
        let g = SweepGrid::new(SweepAxis::HalfBeamwidth, vec![5.0, 10.0], scenario(0.01, 0.01)).unwrap();
        let out = run_sweep(&g, &[Engine::MonteCarlo, Engine::Analytic]).unwrap();
        let order: Vec<(f64, Engine)> = out.table.rows.iter().map(|r| (r.grid_value, r.engine)).collect();
        assert_eq!(
            order,
            vec![
                (5.0, Engine::MonteCarlo),
                (5.0, Engine::Analytic),
                (10.0, Engine::MonteCarlo),
                (10.0, Engine::Analytic)
            ]
        );
        assert_eq!(out.table.rows[0].trials, Some(200));
        assert_eq!(out.table.rows[1].trials, None);
    }

    #[test]
    fn failing_points_are_recorded_and_the_sweep_continues() {
        // beams of 45° and wider have no single interference interval
        let g = SweepGrid::new(SweepAxis::HalfBeamwidth, vec![10.0, 50.0], scenario(0.01, 0.01)).unwrap();
        let out = run_sweep(&g, &[Engine::Analytic]).unwrap();
        assert_eq!(out.table.rows.len(), 2);
        assert!(out.table.rows[0].p_d.is_some());
        assert!(out.table.rows[1].p_d.is_none());
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].index, 1);
    }

    #[test]
    fn axis_and_engine_names_round_trip() {
        for a in SweepAxis::ALL {
            assert_eq!(a.name().parse::<SweepAxis>().unwrap(), a);
        }
        for e in [Engine::Analytic, Engine::MonteCarlo] {
            assert_eq!(e.tag().parse::<Engine>().unwrap(), e);
        }
        assert!("omega".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn scenario_axis_values_round_trip() {
        let s = scenario(0.01, 0.02);
        for (a, v) in [
            (SweepAxis::HalfBeamwidth, 7.5),
            (SweepAxis::Range, 22.0),
            (SweepAxis::LambdaP, 0.3),
            (SweepAxis::LambdaL, 0.004),
            (SweepAxis::Threshold, 3.0),
        ] {
            let t = s.with(a, v).unwrap();
            assert!((t.value(a) - v).abs() < 1e-12);
        }
    }
}
