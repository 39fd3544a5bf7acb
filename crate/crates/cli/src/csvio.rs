//! CSV schemas. UTF-8, LF line endings, floats in shortest round-trip form,
//! empty cells for missing values.
//!
//! Sweep output: `grid_axis,grid_value,engine,p_d,l_avg,n_r,n_d,std_err,trials`
//! with `grid_axis` one of `omega_b_deg` (deg), `lambda_p` (1/m), `lambda_l`
//! (1/m²), `r_m` (m), `beta_db` (dB); `l_avg` in m; `std_err` is the standard
//! error of `p_d`.
//!
//! Figure panels prepend a `series` column to the sweep schema. Optimal
//! beamwidth panels use
//! `series,grid_axis,grid_value,omega_b_star_deg,n_d_star,saturated`.

use plcp_radar::optimizer::{Engine, SweepAxis, SweepRow, SweepTable};
use serde::{Deserialize, Serialize};

pub const SWEEP_HEADER: &str = "grid_axis,grid_value,engine,p_d,l_avg,n_r,n_d,std_err,trials";
pub const PANEL_HEADER: &str = "series,grid_axis,grid_value,engine,p_d,l_avg,n_r,n_d,std_err,trials";
pub const OPTIMUM_HEADER: &str = "series,grid_axis,grid_value,omega_b_star_deg,n_d_star,saturated";

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, csv::Error> {
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn rows<T: Serialize>(header: &str, rows: &[T]) -> Result<String, csv::Error> {
    if rows.is_empty() {
        return Ok(format!("{header}\n"));
    }
    let mut w = writer();
    for r in rows {
        w.serialize(r)?;
    }
    finish(w)
}

fn parse<T: for<'de> Deserialize<'de>>(header: &str, text: &str) -> Result<Vec<T>, csv::Error> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let found = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if found != header {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected header `{found}`, expected `{header}`"),
        )));
    }
    r.deserialize().collect()
}

pub fn sweep_to_csv(table: &SweepTable) -> Result<String, csv::Error> {
    rows(SWEEP_HEADER, &table.rows)
}

pub fn sweep_from_csv(text: &str) -> Result<SweepTable, csv::Error> {
    Ok(SweepTable {
        rows: parse(SWEEP_HEADER, text)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub series: String,
    pub grid_axis: SweepAxis,
    pub grid_value: f64,
    pub engine: Engine,
    pub p_d: Option<f64>,
    pub l_avg: Option<f64>,
    pub n_r: Option<f64>,
    pub n_d: Option<f64>,
    pub std_err: Option<f64>,
    pub trials: Option<u64>,
}

impl PanelRow {
    pub fn new(series: &str, r: &SweepRow) -> Self {
        Self {
            series: series.to_string(),
            grid_axis: r.grid_axis,
            grid_value: r.grid_value,
            engine: r.engine,
            p_d: r.p_d,
            l_avg: r.l_avg,
            n_r: r.n_r,
            n_d: r.n_d,
            std_err: r.std_err,
            trials: r.trials,
        }
    }
}

pub fn panel_to_csv(rows_: &[PanelRow]) -> Result<String, csv::Error> {
    rows(PANEL_HEADER, rows_)
}

pub fn panel_from_csv(text: &str) -> Result<Vec<PanelRow>, csv::Error> {
    parse(PANEL_HEADER, text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumRow {
    pub series: String,
    pub grid_axis: SweepAxis,
    pub grid_value: f64,
    pub omega_b_star_deg: f64,
    pub n_d_star: f64,
    pub saturated: bool,
}

pub fn optimum_to_csv(rows_: &[OptimumRow]) -> Result<String, csv::Error> {
    rows(OPTIMUM_HEADER, rows_)
}

pub fn optimum_from_csv(text: &str) -> Result<Vec<OptimumRow>, csv::Error> {
    parse(OPTIMUM_HEADER, text)
}

/// True if `values` is strictly decreasing.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// True if `values` never increases.
pub fn non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}
