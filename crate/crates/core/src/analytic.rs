//! Deterministic evaluation of the mean in-beam street length, the mean
//! number of vehicles in the ego sector and the detection success
//! probability, by nested adaptive quadrature.
//!
//! The interference field is the Poisson line Cox process of vehicles on the
//! streets other than the ego street. Streets are generated with density
//! `λ_L` per unit `rad × m` of the representation space; vehicles sit on each
//! street with linear density `λ_P`. The field is truncated to streets with
//! `r < r_max` and, on each street, to vehicles within `line_half_window` of
//! the foot of the perpendicular. The Monte Carlo engine samples exactly the
//! same truncated field, so the two engines are directly comparable.
//!
//! With a path-loss exponent of 2 the aggregate interference of an untruncated
//! field grows without bound (logarithmically in the truncation radius), so
//! the truncation radius is a model parameter rather than a numerical one.
//! [`truncation_sensitivity`] reports how much it matters.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    self, alpha_n, chord, corner_offsets, interference_bounds, sector_chord, GeneratingPoint, GeometryError,
    IntersectionFrame, SectorGeometry,
};
use crate::quadrature::{integrate, Integral, QuadratureError, Tolerance};
use crate::units::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm, SPEED_OF_LIGHT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("invalid radar parameter `{field}`: {reason}")]
    Radar { field: &'static str, reason: String },
    #[error("invalid network parameter `{field}`: {reason}")]
    Network { field: &'static str, reason: String },
    #[error("invalid quadrature setting `{field}`: {reason}")]
    Quadrature { field: &'static str, reason: String },
    #[error("target range {target} m must lie in (0, {range}] m")]
    TargetRange { target: f64, range: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{what} did not converge: {source}")]
    NotConverged {
        what: &'static str,
        #[source]
        source: QuadratureError,
    },
}

/// Radar and channel parameters in linear SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarParams {
    /// W
    pub transmit_power: f64,
    pub path_loss_exponent: f64,
    /// m²
    pub mean_rcs: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    /// Hz
    pub carrier_frequency: f64,
    /// W/Hz
    pub noise_density: f64,
    /// Hz
    pub bandwidth: f64,
    /// SINR detection threshold (linear).
    pub threshold: f64,
}

/// The same parameters in the units radar data sheets use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarParamsDb {
    pub p_dbm: f64,
    pub alpha: f64,
    pub sigma_dbsm: f64,
    pub gt_dbi: f64,
    pub gr_dbi: f64,
    pub fc_ghz: f64,
    pub nd_dbm_per_hz: f64,
    pub w_khz: f64,
    pub beta_db: f64,
}

impl Default for RadarParamsDb {
    /// 76.5 GHz automotive radar operating point.
    fn default() -> Self {
        Self {
            p_dbm: 10.0,
            alpha: 2.0,
            sigma_dbsm: 30.0,
            gt_dbi: 10.0,
            gr_dbi: 10.0,
            fc_ghz: 76.5,
            nd_dbm_per_hz: -174.0,
            w_khz: 25.0,
            beta_db: 10.0,
        }
    }
}

impl RadarParamsDb {
    pub fn to_linear(&self) -> Result<RadarParams, AnalyticError> {
        RadarParams::new(RadarParams {
            transmit_power: dbm_to_watts(self.p_dbm),
            path_loss_exponent: self.alpha,
            mean_rcs: db_to_linear(self.sigma_dbsm),
            tx_gain: db_to_linear(self.gt_dbi),
            rx_gain: db_to_linear(self.gr_dbi),
            carrier_frequency: self.fc_ghz * 1e9,
            noise_density: dbm_to_watts(self.nd_dbm_per_hz),
            bandwidth: self.w_khz * 1e3,
            threshold: db_to_linear(self.beta_db),
        })
    }
}

fn check_radar(field: &'static str, v: f64, allow_zero: bool) -> Result<(), AnalyticError> {
    let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
    if ok {
        Ok(())
    } else {
        Err(AnalyticError::Radar {
            field,
            reason: format!(
                "expected a finite {} value, got {v}",
                if allow_zero { "non-negative" } else { "positive" }
            ),
        })
    }
}

impl RadarParams {
    /// Validates a set of linear parameters.
    pub fn new(p: RadarParams) -> Result<Self, AnalyticError> {
        check_radar("transmit_power [W]", p.transmit_power, false)?;
        check_radar("mean_rcs [m^2]", p.mean_rcs, false)?;
        check_radar("tx_gain", p.tx_gain, false)?;
        check_radar("rx_gain", p.rx_gain, false)?;
        check_radar("carrier_frequency [Hz]", p.carrier_frequency, false)?;
        check_radar("noise_density [W/Hz]", p.noise_density, true)?;
        check_radar("bandwidth [Hz]", p.bandwidth, true)?;
        check_radar("threshold", p.threshold, true)?;
        if !(p.path_loss_exponent.is_finite() && p.path_loss_exponent >= 1.0) {
            return Err(AnalyticError::Radar {
                field: "path_loss_exponent",
                reason: format!("expected a finite value ≥ 1, got {}", p.path_loss_exponent),
            });
        }
        Ok(p)
    }

    pub fn to_db(&self) -> RadarParamsDb {
        RadarParamsDb {
            p_dbm: watts_to_dbm(self.transmit_power),
            alpha: self.path_loss_exponent,
            sigma_dbsm: linear_to_db(self.mean_rcs),
            gt_dbi: linear_to_db(self.tx_gain),
            gr_dbi: linear_to_db(self.rx_gain),
            fc_ghz: self.carrier_frequency / 1e9,
            nd_dbm_per_hz: watts_to_dbm(self.noise_density),
            w_khz: self.bandwidth / 1e3,
            beta_db: linear_to_db(self.threshold),
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Effective receive aperture `G_r λ² / 4π`, m².
    pub fn effective_aperture(&self) -> f64 {
        let l = self.wavelength();
        self.rx_gain * l * l / (4.0 * PI)
    }

    /// `γ = G_t A_e / (4π)²`.
    pub fn gamma(&self) -> f64 {
        self.tx_gain * self.effective_aperture() / (16.0 * PI * PI)
    }

    /// Target echo power for a unit-RCS target at `range`.
    pub fn echo_gain(&self, range: f64, convention: PathLossConvention) -> f64 {
        self.gamma() * self.transmit_power * convention.target_path_gain(range, self.path_loss_exponent)
    }

    /// Normalized interference threshold `β' = 4πβ / (σ̄ R^{-2α})`.
    pub fn beta_prime(&self, target_range: f64, convention: PathLossConvention) -> f64 {
        4.0 * PI * self.threshold / (self.mean_rcs * convention.target_path_gain(target_range, self.path_loss_exponent))
    }

    /// Noise-only success probability `e(R) = exp(−βN / (σ̄ γ P R^{-2α}))`.
    pub fn noise_factor(&self, target_range: f64, convention: PathLossConvention) -> f64 {
        let n = noise_power(self);
        if n == 0.0 || self.threshold == 0.0 {
            return 1.0;
        }
        (-self.threshold * n / (self.mean_rcs * self.echo_gain(target_range, convention))).exp()
    }
}

/// Noise power `N = N_d W` in watts.
pub fn noise_power(p: &RadarParams) -> f64 {
    p.noise_density * p.bandwidth
}

/// Exponent applied to the target range in the echo power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathLossConvention {
    /// `R^{-2α}`: the echo travels out and back.
    #[default]
    TwoWay,
    /// `R^{-α}`. Physically wrong for a monostatic echo; kept as a negative
    /// control for cross-engine validation.
    OneWay,
}

impl PathLossConvention {
    pub fn target_path_gain(self, range: f64, alpha: f64) -> f64 {
        match self {
            PathLossConvention::TwoWay => range.powf(-2.0 * alpha),
            PathLossConvention::OneWay => range.powf(-alpha),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Street generating-point density per unit (rad × m).
    pub lambda_l: f64,
    /// Vehicles per metre of street.
    pub lambda_p: f64,
}

impl NetworkParams {
    pub fn new(lambda_l: f64, lambda_p: f64) -> Result<Self, AnalyticError> {
        for (field, v) in [("lambda_l [1/m^2]", lambda_l), ("lambda_p [1/m]", lambda_p)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(AnalyticError::Network {
                    field,
                    reason: format!("expected a finite non-negative density, got {v}"),
                });
            }
        }
        Ok(Self { lambda_l, lambda_p })
    }
}

/// How other radars point along their street.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// Every vehicle points along its street towards the ego radar.
    #[default]
    FacingEgo,
    /// Each vehicle points either way along its street with probability 1/2.
    RandomTwoWay,
}

impl Orientation {
    /// Fraction of vehicles that face the ego radar.
    pub fn facing_fraction(self) -> f64 {
        match self {
            Orientation::FacingEgo => 1.0,
            Orientation::RandomTwoWay => 0.5,
        }
    }
}

/// Modelling switches shared by both engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InterferenceModel {
    pub orientation: Orientation,
    /// Add vehicles on the ego street as interferers.
    pub same_street: bool,
    pub path_loss: PathLossConvention,
}

/// Numerical settings of the analytic engine, including the truncation of the
/// interference field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Street truncation radius; `None` means 10 × the sector range.
    pub r_max: Option<f64>,
    /// Half-length of the vehicle window around each street's perpendicular
    /// foot; `None` means 2 × `r_max`. May be infinite.
    pub line_half_window: Option<f64>,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            abs_tol: 1e-8,
            r_max: None,
            line_half_window: None,
            max_subdivisions: 400,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self, s: &SectorGeometry) -> Result<(), AnalyticError> {
        let bad = |field, reason: String| Err(AnalyticError::Quadrature { field, reason });
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return bad("rel_tol", format!("expected a value in (0, 1), got {}", self.rel_tol));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return bad("abs_tol", format!("expected a positive value, got {}", self.abs_tol));
        }
        let r_max = self.r_max(s);
        if !(r_max.is_finite() && r_max > s.range()) {
            return bad(
                "r_max [m]",
                format!(
                    "expected a finite radius above the sector range {} m, got {r_max}",
                    s.range()
                ),
            );
        }
        let w = self.line_half_window(s);
        if w.is_nan() || w <= 0.0 {
            return bad("line_half_window [m]", format!("expected a positive length, got {w}"));
        }
        if self.max_subdivisions == 0 {
            return bad("max_subdivisions", "expected at least 1".into());
        }
        Ok(())
    }

    pub fn r_max(&self, s: &SectorGeometry) -> f64 {
        self.r_max.unwrap_or(10.0 * s.range())
    }

    pub fn line_half_window(&self, s: &SectorGeometry) -> f64 {
        self.line_half_window.unwrap_or(2.0 * self.r_max(s))
    }

    fn tolerance(&self, rel: f64, abs: f64) -> Tolerance {
        Tolerance {
            rel,
            abs,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// How the mean in-beam street length is assembled from chord lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthConvention {
    /// `2π λ_L R · l̄` with `l̄ = (1/πR) Σ ∬ l_i dθ du` over crossings `0 ≤ u ≤ R`,
    /// `θ ∈ [0, π)`, integrating in `(θ, u)` without a Jacobian.
    PaperLiteral,
    /// Campbell's formula `λ_L ∬ l dr dθ`, written in crossing coordinates
    /// as `λ_L ∬ l |sin θ| du dθ` and covering every street that meets the
    /// sector, including those crossing the ego street behind the radar or
    /// beyond `R`. Agrees with the Monte Carlo mean.
    #[default]
    Campbell,
}

/// Mean total street length inside the ego sector, in both conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvgLineLength {
    pub paper_literal: f64,
    pub campbell: f64,
    /// Campbell contribution of streets crossing at `0 ≤ u ≤ R`.
    pub campbell_crossing_in_range: f64,
    pub convention: LengthConvention,
}

impl AvgLineLength {
    pub fn value(&self) -> f64 {
        self.get(self.convention)
    }

    pub fn get(&self, c: LengthConvention) -> f64 {
        match c {
            LengthConvention::PaperLiteral => self.paper_literal,
            LengthConvention::Campbell => self.campbell,
        }
    }
}

fn converged(r: Result<Integral, QuadratureError>, what: &'static str) -> Result<Integral, AnalyticError> {
    r.map_err(|source| AnalyticError::NotConverged { what, source })
}

/// Runs a nested quadrature: the closure passed to `body` records the first
/// inner failure, which is surfaced after the outer integral completes.
struct InnerFailure(Cell<Option<QuadratureError>>);

impl InnerFailure {
    fn new() -> Self {
        Self(Cell::new(None))
    }

    fn value(&self, r: Result<Integral, QuadratureError>) -> f64 {
        match r {
            Ok(i) => i.value,
            Err(e) => {
                let partial = e.partial;
                let prev = self.0.take();
                self.0.set(prev.or(Some(e)));
                partial
            }
        }
    }

    fn check(self, what: &'static str) -> Result<(), AnalyticError> {
        match self.0.into_inner() {
            None => Ok(()),
            Some(source) => Err(AnalyticError::NotConverged { what, source }),
        }
    }
}

/// `∬ weight(θ) · l(θ, u) dθ du` over one of the four chord regions, with the
/// inner θ-range given by `limits(u)`.
fn chord_region<L, W, P>(
    u_range: (f64, f64),
    limits: L,
    weight: W,
    piece: P,
    tol: &Tolerance,
    failures: &InnerFailure,
) -> Result<Integral, QuadratureError>
where
    L: Fn(f64) -> (f64, f64),
    W: Fn(f64) -> f64 + Copy,
    P: Fn(f64, f64) -> f64 + Copy,
{
    let inner_tol = Tolerance {
        rel: tol.rel * 0.1,
        abs: tol.abs * 0.1,
        ..*tol
    };
    integrate(
        |u| {
            let (lo, hi) = limits(u);
            failures.value(integrate(|t| weight(t) * piece(u, t).max(0.0), lo, hi, &[], &inner_tol))
        },
        u_range.0,
        u_range.1,
        &[],
        tol,
    )
}

/// The four chord-region integrals, each weighted by `weight(θ)`.
fn chord_integrals<W: Fn(f64) -> f64 + Copy>(
    s: &SectorGeometry,
    weight: W,
    tol: &Tolerance,
) -> Result<f64, AnalyticError> {
    let w = s.half_beamwidth();
    let range = s.range();
    let uc = range * w.cos();
    let failures = InnerFailure::new();
    let an = |u: f64| alpha_n(u, s);
    let regions = [
        chord_region(
            (0.0, range),
            |u| (0.0, an(u)),
            weight,
            |u, t| chord::l1(u, t, w, range),
            tol,
            &failures,
        ),
        chord_region(
            (0.0, uc),
            |u| (an(u), PI - an(u)),
            weight,
            |u, t| chord::l2(u, t, w),
            tol,
            &failures,
        ),
        chord_region(
            (0.0, range),
            |u| (PI - an(u), PI),
            weight,
            |u, t| chord::l3(u, t, w, range),
            tol,
            &failures,
        ),
        chord_region(
            (uc, range),
            |u| (an(u), PI - an(u)),
            weight,
            |u, t| chord::l4(u, t, range),
            tol,
            &failures,
        ),
    ];
    let mut total = 0.0;
    for r in regions {
        total += converged(r, "chord-length integral")?.value;
    }
    failures.check("chord-length integral")?;
    Ok(total)
}

/// `∬ sector_chord dr dθ` over streets that do not cross the ego street
/// within `[0, R]`.
fn off_range_chords(s: &SectorGeometry, tol: &Tolerance) -> Result<f64, AnalyticError> {
    let w = s.half_beamwidth();
    let range = s.range();
    let failures = InnerFailure::new();
    let inner_tol = Tolerance {
        rel: tol.rel * 0.1,
        abs: tol.abs * 0.1,
        ..*tol
    };
    let chord_at = |t: f64, r: f64| match GeneratingPoint::new(t, r) {
        Ok(g) => sector_chord(&g, s),
        Err(_) => 0.0,
    };
    // crossing behind the radar (θ ∈ (π, 2π)), any r < R
    let behind = integrate(
        |t| {
            failures.value(integrate(
                |r| chord_at(t, r),
                0.0,
                range,
                &corner_offsets(t, s),
                &inner_tol,
            ))
        },
        PI,
        TAU,
        &[PI + w, TAU - w],
        tol,
    );
    // crossing beyond R (θ ∈ (0, π), R sin θ < r < R)
    let beyond = integrate(
        |t| {
            failures.value(integrate(
                |r| chord_at(t, r),
                range * t.sin(),
                range,
                &corner_offsets(t, s),
                &inner_tol,
            ))
        },
        0.0,
        PI,
        &[w, FRAC_PI_2, PI - w],
        tol,
    );
    let total =
        converged(behind, "off-range chord integral")?.value + converged(beyond, "off-range chord integral")?.value;
    failures.check("off-range chord integral")?;
    Ok(total)
}

/// Mean total length of (non-ego) streets inside the ego sector.
///
/// Both conventions are evaluated; `convention` picks the one reported by
/// [`AvgLineLength::value`]. The result is exactly linear in `λ_L`.
pub fn avg_line_length(
    net: &NetworkParams,
    s: &SectorGeometry,
    q: &QuadratureSpec,
    convention: LengthConvention,
) -> Result<AvgLineLength, AnalyticError> {
    if !(q.rel_tol > 0.0 && q.abs_tol > 0.0) {
        q.validate(s)?;
    }
    let range = s.range();
    // absolute tolerances scale with the sector area so that tiny beams still converge
    let tol = q.tolerance(q.rel_tol * 0.1, q.abs_tol * s.area().max(f64::MIN_POSITIVE));
    let unweighted = chord_integrals(s, |_| 1.0, &tol)?;
    let weighted = chord_integrals(s, |t: f64| t.sin().abs(), &tol)?;
    let off_range = off_range_chords(s, &tol)?;
    let l_bar = unweighted / (PI * range);
    Ok(AvgLineLength {
        paper_literal: 2.0 * PI * net.lambda_l * range * l_bar,
        campbell: net.lambda_l * (weighted + off_range),
        campbell_crossing_in_range: net.lambda_l * weighted,
        convention,
    })
}

/// Mean number of vehicles inside the ego sector, `n(R) = λ_P l_avg`.
pub fn expected_interferers(
    net: &NetworkParams,
    s: &SectorGeometry,
    q: &QuadratureSpec,
    convention: LengthConvention,
) -> Result<f64, AnalyticError> {
    Ok(net.lambda_p * avg_line_length(net, s, q, convention)?.value())
}

/// Result of [`detection_probability`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// `p_D(β)`
    pub value: f64,
    /// `e(R)`
    pub noise_factor: f64,
    /// Exponent of the interference term, `p_D = e(R) exp(−exponent)`.
    pub interference_exponent: f64,
    /// Absolute error estimate of `value`.
    pub error: f64,
}

/// `∫ β' / (w^α + β') dv` over the forward-offset interval `[lo, hi]` of the
/// street in frame `f`. `hi` may be `+∞`.
pub fn interference_integral(
    f: &IntersectionFrame,
    lo: f64,
    hi: f64,
    beta_prime: f64,
    alpha: f64,
    tol: &Tolerance,
) -> Result<f64, QuadratureError> {
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) || beta_prime == 0.0 {
        return Ok(0.0);
    }
    let r = f.r();
    let v_foot = f.foot_offset();
    // w² = (v − v_foot)² + r²
    if alpha == 2.0 {
        let c = (r * r + beta_prime).sqrt();
        let at = |v: f64| {
            if v == f64::INFINITY {
                FRAC_PI_2
            } else {
                ((v - v_foot) / c).atan()
            }
        };
        return Ok(beta_prime / c * (at(hi) - at(lo)));
    }
    numeric_interference_integral(r, lo - v_foot, hi - v_foot, beta_prime, alpha, tol)
}

/// The same integral by quadrature after the substitution `v − v_foot = r tan φ`.
pub(crate) fn numeric_interference_integral(
    r: f64,
    lo: f64,
    hi: f64,
    beta_prime: f64,
    alpha: f64,
    tol: &Tolerance,
) -> Result<f64, QuadratureError> {
    let phi = |x: f64| if x == f64::INFINITY { FRAC_PI_2 } else { (x / r).atan() };
    let (p0, p1) = (phi(lo), phi(hi));
    let integrand = |p: f64| {
        let c = p.cos();
        if c <= 0.0 {
            return if alpha > 2.0 {
                0.0
            } else {
                beta_prime * r.powf(1.0 - alpha)
            };
        }
        let w = r / c;
        beta_prime * r / (c * c * (w.powf(alpha) + beta_prime))
    };
    integrate(integrand, p0, p1, &[], tol).map(|i| i.value)
}

/// Branch-wise θ ranges where a street can carry interferers.
fn interfering_angle_ranges(w: f64) -> [(f64, f64, [f64; 1]); 4] {
    [
        (0.0, 2.0 * w, [w]),
        (PI - 2.0 * w, PI, [PI - w]),
        (PI, PI + w, [PI + w]),
        (TAU - w, TAU, [TAU - w]),
    ]
}

struct FieldSetup {
    beta_prime: f64,
    alpha: f64,
    lambda_eff: f64,
    r_max: f64,
    half_window: f64,
    w: f64,
}

/// `∫_0^{2π} ∫_0^{r_max} 1 − exp(−λ_eff ∫_{[a,b] ∩ window} β'/(w^α+β') dv) dr dθ`
fn street_field_integral(setup: &FieldSetup, tol: &Tolerance) -> Result<Integral, AnalyticError> {
    let failures = InnerFailure::new();
    let r_tol = Tolerance {
        rel: tol.rel * 0.1,
        abs: tol.abs * 0.1,
        ..*tol
    };
    let v_tol = Tolerance {
        rel: tol.rel * 0.01,
        abs: tol.abs * 0.01,
        ..*tol
    };
    let per_street = |t: f64, r: f64| -> f64 {
        let st = t.sin();
        if st.abs() < geometry::PARALLEL_SIN_TOL || r <= 0.0 {
            return 0.0;
        }
        let f = IntersectionFrame::new(r / st, t);
        let iv = match interference_bounds(&f, setup.w) {
            Ok(iv) => iv,
            Err(_) => return 0.0,
        };
        let vf = f.foot_offset();
        let iv = iv.clamp(vf - setup.half_window, vf + setup.half_window);
        if iv.is_empty() {
            return 0.0;
        }
        let j = failures.value(
            interference_integral(&f, iv.lower, iv.upper, setup.beta_prime, setup.alpha, &v_tol)
                .map(|value| Integral { value, error: 0.0 }),
        );
        -(-setup.lambda_eff * j).exp_m1()
    };
    let mut total = Integral { value: 0.0, error: 0.0 };
    for (lo, hi, breaks) in interfering_angle_ranges(setup.w) {
        let part = integrate(
            |t| failures.value(integrate(|r| per_street(t, r), 0.0, setup.r_max, &[], &r_tol)),
            lo,
            hi,
            &breaks,
            tol,
        );
        let part = converged(part, "interference field integral")?;
        total.value += part.value;
        total.error += part.error;
    }
    failures.check("interference field integral")?;
    Ok(total)
}

/// Exponent contributed by vehicles on the ego street ahead of the radar,
/// `λ_eff ∫_0^{W} β' / (y^α + β') dy`.
fn same_street_exponent(setup: &FieldSetup, tol: &Tolerance) -> Result<f64, AnalyticError> {
    // the ego street seen as a crossing street with u = 0, θ → 0 limit: w = |v|
    let f = IntersectionFrame::new(0.0, 0.0);
    let j = converged(
        interference_integral(&f, 0.0, setup.half_window, setup.beta_prime, setup.alpha, tol)
            .map(|value| Integral { value, error: 0.0 }),
        "same-street interference integral",
    )?;
    Ok(setup.lambda_eff * j.value)
}

fn validate_inputs(
    p: &RadarParams,
    net: &NetworkParams,
    s: &SectorGeometry,
    target_range: f64,
    q: &QuadratureSpec,
) -> Result<(), AnalyticError> {
    RadarParams::new(*p)?;
    NetworkParams::new(net.lambda_l, net.lambda_p)?;
    q.validate(s)?;
    if !(target_range > 0.0 && target_range <= s.range()) {
        return Err(AnalyticError::TargetRange {
            target: target_range,
            range: s.range(),
        });
    }
    Ok(())
}

fn exponent(
    p: &RadarParams,
    net: &NetworkParams,
    s: &SectorGeometry,
    target_range: f64,
    q: &QuadratureSpec,
    model: &InterferenceModel,
    rel_tol: f64,
) -> Result<Integral, AnalyticError> {
    let setup = FieldSetup {
        beta_prime: p.beta_prime(target_range, model.path_loss),
        alpha: p.path_loss_exponent,
        lambda_eff: net.lambda_p * model.orientation.facing_fraction(),
        r_max: q.r_max(s),
        half_window: q.line_half_window(s),
        w: s.half_beamwidth(),
    };
    // interference_bounds rejects beams of π/4 and wider
    interference_bounds(&IntersectionFrame::new(1.0, 1.0), setup.w)?;
    let mut e = Integral { value: 0.0, error: 0.0 };
    if net.lambda_l > 0.0 && setup.lambda_eff > 0.0 && setup.beta_prime > 0.0 {
        // absolute tolerance is in units of the exponent, divided by λ_L
        let tol = q.tolerance(rel_tol, q.abs_tol / net.lambda_l);
        let i = street_field_integral(&setup, &tol)?;
        e.value += net.lambda_l * i.value;
        e.error += net.lambda_l * i.error;
    }
    if model.same_street && setup.lambda_eff > 0.0 && setup.beta_prime > 0.0 {
        e.value += same_street_exponent(&setup, &q.tolerance(rel_tol * 0.01, q.abs_tol * 0.01))?;
    }
    Ok(e)
}

/// Probability that the ego radar detects a target at `target_range`:
/// `p_D = e(R) · exp(−λ_L ∬ 1 − exp(−λ_P ∫_a^b 1 − 1/(1 + β' w^{-α}) dv) dr dθ)`.
///
/// The inner offset interval `[a, b]` is [`interference_bounds`] of each
/// street, clipped to the vehicle window. The returned error estimate targets
/// `max(rel_tol · p_D, abs_tol)`.
pub fn detection_probability(
    p: &RadarParams,
    net: &NetworkParams,
    s: &SectorGeometry,
    target_range: f64,
    q: &QuadratureSpec,
    model: &InterferenceModel,
) -> Result<Detection, AnalyticError> {
    validate_inputs(p, net, s, target_range, q)?;
    let noise_factor = p.noise_factor(target_range, model.path_loss);
    // δp/p ≈ δ(exponent), so the exponent needs an absolute error ≤ rel_tol;
    // a coarse pass sizes the relative tolerance accordingly
    let coarse = exponent(p, net, s, target_range, q, model, 1e-2)?;
    let rel = q.rel_tol / coarse.value.max(1.0);
    let e = exponent(p, net, s, target_range, q, model, rel)?;
    let value = noise_factor * (-e.value).exp();
    Ok(Detection {
        value,
        noise_factor,
        interference_exponent: e.value,
        error: value * e.error,
    })
}

/// Lower bound on the mean number of successful detections,
/// `n_D ≥ n(R) · p_D(R)`.
pub fn n_detections_lower_bound(
    p: &RadarParams,
    net: &NetworkParams,
    s: &SectorGeometry,
    q: &QuadratureSpec,
    model: &InterferenceModel,
    convention: LengthConvention,
) -> Result<f64, AnalyticError> {
    let n = expected_interferers(net, s, q, convention)?;
    if n == 0.0 {
        return Ok(0.0);
    }
    let pd = detection_probability(p, net, s, s.range(), q, model)?;
    Ok(n * pd.value)
}

/// `p_D` with the street truncation radius (and the default vehicle window,
/// if not overridden) at `r_max` and at `2 r_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSensitivity {
    pub r_max: f64,
    pub at_r_max: f64,
    pub at_double: f64,
}

impl TruncationSensitivity {
    pub fn delta(&self) -> f64 {
        self.at_r_max - self.at_double
    }
}

pub fn truncation_sensitivity(
    p: &RadarParams,
    net: &NetworkParams,
    s: &SectorGeometry,
    target_range: f64,
    q: &QuadratureSpec,
    model: &InterferenceModel,
) -> Result<TruncationSensitivity, AnalyticError> {
    let r_max = q.r_max(s);
    let at_r_max = detection_probability(p, net, s, target_range, q, model)?.value;
    let doubled = QuadratureSpec {
        r_max: Some(2.0 * r_max),
        line_half_window: q.line_half_window.map(|w| 2.0 * w),
        ..*q
    };
    let at_double = detection_probability(p, net, s, target_range, &doubled, model)?.value;
    Ok(TruncationSensitivity {
        r_max,
        at_r_max,
        at_double,
    })
}
