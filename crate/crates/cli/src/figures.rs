//! Figure panels: fixed parameter grids reproducing the detection-probability
//! trends (`fig6a`–`fig6c`), the `n_D` trade-off (`fig7a`) and the optimal
//! beamwidth curves (`fig7b`, `fig8`).

use std::fmt;
use std::str::FromStr;

use plcp_radar::optimizer::{
    default_beamwidth_grid, optimal_beamwidth, run_sweep, Engine, PointFailure, Scenario, SweepAxis, SweepGrid,
};

use crate::csvio::{OptimumRow, PanelRow};
use crate::svg::{Chart, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Panel {
    /// p_D vs R
    Fig6a,
    /// p_D vs λ_P
    Fig6b,
    /// p_D vs 2Ω_B
    Fig6c,
    /// n_D vs 2Ω_B
    Fig7a,
    /// Ω_B* vs λ_P
    Fig7b,
    /// Ω_B* vs R
    Fig8,
}

impl Panel {
    pub const ALL: [Panel; 6] = [
        Panel::Fig6a,
        Panel::Fig6b,
        Panel::Fig6c,
        Panel::Fig7a,
        Panel::Fig7b,
        Panel::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Panel::Fig6a => "fig6a",
            Panel::Fig6b => "fig6b",
            Panel::Fig6c => "fig6c",
            Panel::Fig7a => "fig7a",
            Panel::Fig7b => "fig7b",
            Panel::Fig8 => "fig8",
        }
    }

    /// Expands a selector (`fig6`, `fig6a`, `fig7`, `fig8`, `all`).
    pub fn select(selector: &str) -> Result<Vec<Panel>, String> {
        match selector {
            "all" => Ok(Self::ALL.to_vec()),
            "fig6" => Ok(vec![Panel::Fig6a, Panel::Fig6b, Panel::Fig6c]),
            "fig7" => Ok(vec![Panel::Fig7a, Panel::Fig7b]),
            other => other.parse().map(|p| vec![p]),
        }
    }

    pub fn spec(self) -> PanelSpec {
        use SweepAxis::*;
        let s = |pairs: &[(SweepAxis, f64)]| pairs.to_vec();
        match self {
            Panel::Fig6a => PanelSpec {
                panel: self,
                kind: PanelKind::DetectionProbability,
                axis: Range,
                values: (1..=10).map(|i| 5.0 * i as f64).collect(),
                series: vec![
                    s(&[(LambdaL, 0.005), (LambdaP, 0.01), (HalfBeamwidth, 10.0)]),
                    s(&[(LambdaL, 0.05), (LambdaP, 0.05), (HalfBeamwidth, 10.0)]),
                    s(&[(LambdaL, 0.01), (LambdaP, 0.1), (HalfBeamwidth, 5.0)]),
                ],
                x_scale: 1.0,
                title: "Detection probability vs range",
                x_label: "R (m)",
                y_label: "p_D",
            },
            Panel::Fig6b => PanelSpec {
                panel: self,
                kind: PanelKind::DetectionProbability,
                axis: LambdaP,
                values: vec![0.005, 0.01, 0.02, 0.03, 0.05, 0.07, 0.1, 0.15, 0.2],
                series: vec![
                    s(&[(LambdaL, 0.005), (HalfBeamwidth, 5.0)]),
                    s(&[(LambdaL, 0.005), (HalfBeamwidth, 10.0)]),
                    s(&[(LambdaL, 0.05), (HalfBeamwidth, 5.0)]),
                    s(&[(LambdaL, 0.05), (HalfBeamwidth, 10.0)]),
                ],
                x_scale: 1.0,
                title: "Detection probability vs vehicle density",
                x_label: "lambda_P (1/m)",
                y_label: "p_D",
            },
            Panel::Fig6c => PanelSpec {
                panel: self,
                kind: PanelKind::DetectionProbability,
                axis: HalfBeamwidth,
                values: (1..=20).map(f64::from).collect(),
                series: vec![
                    s(&[(LambdaL, 0.005), (LambdaP, 0.01)]),
                    s(&[(LambdaL, 0.01), (LambdaP, 0.1)]),
                ],
                x_scale: 2.0,
                title: "Detection probability vs beamwidth",
                x_label: "2 Omega_B (deg)",
                y_label: "p_D",
            },
            Panel::Fig7a => PanelSpec {
                panel: self,
                kind: PanelKind::Detections,
                axis: HalfBeamwidth,
                values: default_beamwidth_grid(),
                series: vec![
                    s(&[(LambdaL, 0.05), (LambdaP, 0.05)]),
                    s(&[(LambdaL, 0.01), (LambdaP, 0.01)]),
                ],
                x_scale: 2.0,
                title: "Expected detections vs beamwidth",
                x_label: "2 Omega_B (deg)",
                y_label: "n_D",
            },
            Panel::Fig7b => PanelSpec {
                panel: self,
                kind: PanelKind::OptimalBeamwidth,
                axis: LambdaP,
                values: vec![0.005, 0.01, 0.02, 0.05, 0.1, 0.2],
                series: vec![s(&[(LambdaL, 0.005)]), s(&[(LambdaL, 0.01)]), s(&[(LambdaL, 0.05)])],
                x_scale: 1.0,
                title: "Optimal half-beamwidth vs vehicle density",
                x_label: "lambda_P (1/m)",
                y_label: "Omega_B* (deg)",
            },
            Panel::Fig8 => PanelSpec {
                panel: self,
                kind: PanelKind::OptimalBeamwidth,
                axis: Range,
                values: vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0],
                series: vec![
                    s(&[(LambdaL, 0.01), (LambdaP, 0.01)]),
                    s(&[(LambdaL, 0.05), (LambdaP, 0.05)]),
                ],
                x_scale: 1.0,
                title: "Optimal half-beamwidth vs range",
                x_label: "R (m)",
                y_label: "Omega_B* (deg)",
            },
        }
    }
}

impl fmt::Display for Panel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Panel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown panel `{s}`; expected all, fig6, fig6a-c, fig7, fig7a-b or fig8"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelKind {
    DetectionProbability,
    Detections,
    OptimalBeamwidth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelSpec {
    pub panel: Panel,
    pub kind: PanelKind,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// Fixed overrides per curve.
    pub series: Vec<Vec<(SweepAxis, f64)>>,
    /// Multiplier from grid value to plotted x (2 for full beamwidth).
    pub x_scale: f64,
    pub title: &'static str,
    pub x_label: &'static str,
    pub y_label: &'static str,
}

pub fn series_label(overrides: &[(SweepAxis, f64)]) -> String {
    overrides
        .iter()
        .map(|(a, v)| format!("{a}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn apply(base: &Scenario, overrides: &[(SweepAxis, f64)]) -> Result<Scenario, String> {
    overrides
        .iter()
        .try_fold(*base, |s, &(a, v)| s.with(a, v))
        .map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub enum PanelData {
    Sweep(Vec<PanelRow>),
    Optimum(Vec<OptimumRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelOutput {
    pub data: PanelData,
    pub failures: Vec<String>,
}

/// Evaluates one panel around `base`. Optimal-beamwidth panels always use the
/// analytic engine.
pub fn evaluate(spec: &PanelSpec, base: &Scenario, engines: &[Engine]) -> Result<PanelOutput, String> {
    match spec.kind {
        PanelKind::DetectionProbability | PanelKind::Detections => {
            let mut rows = Vec::new();
            let mut failures = Vec::new();
            for overrides in &spec.series {
                let label = series_label(overrides);
                let s = apply(base, overrides)?;
                let grid = SweepGrid::new(spec.axis, spec.values.clone(), s).map_err(|e| e.to_string())?;
                let out = run_sweep(&grid, engines).map_err(|e| e.to_string())?;
                rows.extend(out.table.rows.iter().map(|r| PanelRow::new(&label, r)));
                failures.extend(out.failures.iter().map(|f: &PointFailure| {
                    format!(
                        "{} {label} {}={} [{}]: {}",
                        spec.panel, spec.axis, f.grid_value, f.engine, f.message
                    )
                }));
            }
            Ok(PanelOutput {
                data: PanelData::Sweep(rows),
                failures,
            })
        }
        PanelKind::OptimalBeamwidth => {
            let grid = default_beamwidth_grid();
            let mut rows = Vec::new();
            for overrides in &spec.series {
                let label = series_label(overrides);
                let s = apply(base, overrides)?;
                for &x in &spec.values {
                    let point = s.with(spec.axis, x).map_err(|e| e.to_string())?;
                    let o = optimal_beamwidth(&point, &grid)
                        .map_err(|e| format!("{} {label} {}={x}: {e}", spec.panel, spec.axis))?;
                    rows.push(OptimumRow {
                        series: label.clone(),
                        grid_axis: spec.axis,
                        grid_value: x,
                        omega_b_star_deg: o.grid_value,
                        n_d_star: o.value,
                        saturated: o.saturated(),
                    });
                }
            }
            Ok(PanelOutput {
                data: PanelData::Optimum(rows),
                failures: Vec::new(),
            })
        }
    }
}

pub fn chart(spec: &PanelSpec, data: &PanelData) -> Chart {
    let mut series: Vec<Series> = Vec::new();
    let mut push = |label: String, x: f64, y: Option<f64>| {
        let y = y.unwrap_or(f64::NAN);
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((x, y)),
            None => series.push(Series {
                label,
                points: vec![(x, y)],
            }),
        }
    };
    match data {
        PanelData::Sweep(rows) => {
            for r in rows {
                let y = match spec.kind {
                    PanelKind::Detections => r.n_d,
                    _ => r.p_d,
                };
                push(format!("{} [{}]", r.series, r.engine), r.grid_value * spec.x_scale, y);
            }
        }
        PanelData::Optimum(rows) => {
            for r in rows {
                push(r.series.clone(), r.grid_value * spec.x_scale, Some(r.omega_b_star_deg));
            }
        }
    }
    Chart {
        title: spec.title.to_string(),
        x_label: spec.x_label.to_string(),
        y_label: spec.y_label.to_string(),
        series,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors_expand() {
        assert_eq!(Panel::select("fig6").unwrap().len(), 3);
        assert_eq!(Panel::select("fig7").unwrap(), vec![Panel::Fig7a, Panel::Fig7b]);
        assert_eq!(Panel::select("fig8").unwrap(), vec![Panel::Fig8]);
        assert_eq!(Panel::select("all").unwrap().len(), 6);
        assert!(Panel::select("fig9").is_err());
    }

    #[test]
    fn grids_are_strictly_increasing() {
        for p in Panel::ALL {
            let s = p.spec();
            assert!(s.values.windows(2).all(|w| w[0] < w[1]), "{p}");
        }
    }

    #[test]
    fn labels_list_overrides() {
        assert_eq!(
            series_label(&[(SweepAxis::LambdaL, 0.005), (SweepAxis::HalfBeamwidth, 10.0)]),
            "lambda_l=0.005 omega_b_deg=10"
        );
    }
}
