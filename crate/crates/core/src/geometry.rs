//! Planar geometry of the street network as seen from the ego radar.
//!
//! Conventions used throughout the crate:
//!
//! * The ego radar sits at the origin and its boresight is the `+y` axis.
//!   The ego street is the line `x = 0`, i.e. the generating point `(0, 0)`.
//! * A street is the line `x cos θ + y sin θ = r` for a generating point
//!   `(θ, r)` with `θ ∈ [0, 2π)` and `r ≥ 0`.
//! * A street that is not parallel to the ego street crosses it at
//!   `(0, u)` with `u = r / sin θ`. Offsets `v` along that street are signed
//!   and measured from the crossing point in the *forward* direction, the
//!   along-street unit vector with a non-negative `y` component.
//! * Other radars point along their street towards the ego radar, i.e. the
//!   along-street direction with a positive projection onto the line of
//!   sight back to the origin.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;

use thiserror::Error;

/// Absolute tolerance used when deciding which interval branch an angle
/// belongs to. Boundary angles go to the lower branch.
pub const BRANCH_ANGLE_TOL: f64 = 1e-12;

/// Below this `|sin θ|` a street is treated as parallel to the ego street.
pub const PARALLEL_SIN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("half beamwidth must lie in (0, {max_deg}°), got {value_rad} rad")]
    HalfBeamwidth { value_rad: f64, max_deg: f64 },
    #[error("sector range must be a positive finite length in metres, got {0}")]
    Range(f64),
    #[error("generating point angle must lie in [0, 2π), got {0} rad")]
    Angle(f64),
    #[error("generating point distance must be a finite length ≥ 0 m, got {0}")]
    Distance(f64),
}

/// Minimal 2-D vector in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A street in the representation space `[0, 2π) × [0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratingPoint {
    theta: f64,
    r: f64,
}

impl GeneratingPoint {
    pub fn new(theta: f64, r: f64) -> Result<Self, GeometryError> {
        if !(0.0..TAU).contains(&theta) {
            return Err(GeometryError::Angle(theta));
        }
        if !(r.is_finite() && r >= 0.0) {
            return Err(GeometryError::Distance(r));
        }
        Ok(Self { theta, r })
    }

    /// Like [`GeneratingPoint::new`] but wraps any finite angle into `[0, 2π)`.
    pub fn wrapped(theta: f64, r: f64) -> Result<Self, GeometryError> {
        if !theta.is_finite() {
            return Err(GeometryError::Angle(theta));
        }
        let mut t = theta.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        if t >= TAU {
            t = 0.0;
        }
        Self::new(t, r)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Unit normal `(cos θ, sin θ)`; the foot of the perpendicular is `r` times it.
    pub fn normal(&self) -> Vec2 {
        Vec2::new(self.theta.cos(), self.theta.sin())
    }

    pub fn foot(&self) -> Vec2 {
        self.normal().scale(self.r)
    }

    /// Unit tangent `(-sin θ, cos θ)`.
    pub fn tangent(&self) -> Vec2 {
        Vec2::new(-self.theta.sin(), self.theta.cos())
    }

    /// Point at signed offset `s` from the foot of the perpendicular, along [`Self::tangent`].
    pub fn point_at(&self, s: f64) -> Vec2 {
        self.foot() + self.tangent().scale(s)
    }
}

/// Ego radar sector: apex at the origin, boresight `+y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorGeometry {
    half_beamwidth: f64,
    range: f64,
}

impl SectorGeometry {
    pub fn new(half_beamwidth: f64, range: f64) -> Result<Self, GeometryError> {
        if !(half_beamwidth > 0.0 && half_beamwidth < FRAC_PI_2) {
            return Err(GeometryError::HalfBeamwidth {
                value_rad: half_beamwidth,
                max_deg: 90.0,
            });
        }
        if !(range.is_finite() && range > 0.0) {
            return Err(GeometryError::Range(range));
        }
        Ok(Self { half_beamwidth, range })
    }

    pub fn from_degrees(half_beamwidth_deg: f64, range: f64) -> Result<Self, GeometryError> {
        Self::new(half_beamwidth_deg.to_radians(), range)
    }

    pub fn half_beamwidth(&self) -> f64 {
        self.half_beamwidth
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn with_half_beamwidth(&self, half_beamwidth: f64) -> Result<Self, GeometryError> {
        Self::new(half_beamwidth, self.range)
    }

    pub fn with_range(&self, range: f64) -> Result<Self, GeometryError> {
        Self::new(self.half_beamwidth, range)
    }

    pub fn area(&self) -> f64 {
        self.half_beamwidth * self.range * self.range
    }
}

/// Where a street crosses the ego street.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionFrame {
    /// Signed distance from the ego radar to the crossing point along `+y`.
    pub u: f64,
    /// Crossing angle, equal to the street's generating angle.
    pub theta: f64,
}

impl IntersectionFrame {
    /// Frame from a crossing distance and angle, without going through a
    /// generating point. `theta` must not make the street parallel.
    pub fn new(u: f64, theta: f64) -> Self {
        Self { u, theta }
    }

    /// Perpendicular distance of the street from the origin.
    pub fn r(&self) -> f64 {
        (self.u * self.theta.sin()).abs()
    }

    pub fn crossing(&self) -> Vec2 {
        Vec2::new(0.0, self.u)
    }

    /// Forward along-street unit vector (non-negative `y` component).
    pub fn forward(&self) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        if c >= 0.0 {
            Vec2::new(-s, c)
        } else {
            Vec2::new(s, -c)
        }
    }

    /// Position of the point at signed forward offset `v` from the crossing.
    pub fn point_at(&self, v: f64) -> Vec2 {
        self.crossing() + self.forward().scale(v)
    }

    /// Forward offset of the foot of the perpendicular from the origin.
    pub fn foot_offset(&self) -> f64 {
        -self.u * self.theta.cos().abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intersection {
    Crossing(IntersectionFrame),
    Parallel,
}

impl Intersection {
    pub fn frame(self) -> Option<IntersectionFrame> {
        match self {
            Intersection::Crossing(f) => Some(f),
            Intersection::Parallel => None,
        }
    }
}

/// Crossing of a street with the ego street, or `Parallel` when `|sin θ| < 1e-12`.
pub fn intersection_frame(g: &GeneratingPoint) -> Intersection {
    let s = g.theta.sin();
    if s.abs() < PARALLEL_SIN_TOL {
        Intersection::Parallel
    } else {
        Intersection::Crossing(IntersectionFrame {
            u: g.r / s,
            theta: g.theta,
        })
    }
}

/// Membership test for the ego sector. The apex itself is excluded.
pub fn sector_contains(p: Vec2, s: &SectorGeometry) -> bool {
    let d = p.norm();
    d > 0.0 && d <= s.range && p.y > d * s.half_beamwidth.cos()
}

/// Position and boresight (unit vector) of another radar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarPose {
    pub position: Vec2,
    pub boresight: Vec2,
}

/// True iff each radar lies strictly inside the other's angular cone. Range
/// is not checked: distant interferers are attenuated by path loss instead.
pub fn mutual_interference(ego: &SectorGeometry, other: &RadarPose, other_half_beamwidth: f64) -> bool {
    let p = other.position;
    let d = p.norm();
    if d == 0.0 {
        return false;
    }
    let ego_sees_other = p.y > d * ego.half_beamwidth.cos();
    let other_sees_ego = (-p).dot(other.boresight) > d * other_half_beamwidth.cos();
    ego_sees_other && other_sees_ego
}

/// Along-street boresight for a vehicle at `position` on a street with unit
/// tangent `tangent`: whichever of `±tangent` points towards the ego radar.
pub fn facing_ego(position: Vec2, tangent: Vec2) -> Vec2 {
    if (-position).dot(tangent) >= 0.0 {
        tangent
    } else {
        -tangent
    }
}

/// Pose of a vehicle at forward offset `v` on the street described by `f`,
/// oriented towards the ego radar.
pub fn facing_pose(f: &IntersectionFrame, v: f64) -> RadarPose {
    let position = f.point_at(v);
    RadarPose {
        position,
        boresight: facing_ego(position, f.forward()),
    }
}

/// Closed interval `[lower, upper]` of forward offsets where a vehicle and the
/// ego radar are mutually in beam. `upper` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub empty: bool,
}

impl InterferenceInterval {
    pub const EMPTY: InterferenceInterval = InterferenceInterval {
        lower: 0.0,
        upper: 0.0,
        empty: true,
    };

    /// Builds a normalized interval; degenerate or inverted bounds give `EMPTY`.
    pub fn from_bounds(a: f64, b: f64) -> Self {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi <= lo {
            Self::EMPTY
        } else {
            Self {
                lower: lo,
                upper: hi,
                empty: false,
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn is_unbounded(&self) -> bool {
        !self.empty && self.upper == f64::INFINITY
    }

    pub fn contains(&self, v: f64) -> bool {
        !self.empty && v >= self.lower && v <= self.upper
    }

    pub fn length(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.upper - self.lower
        }
    }

    /// Intersection with `[lo, hi]`.
    pub fn clamp(&self, lo: f64, hi: f64) -> Self {
        if self.empty {
            return Self::EMPTY;
        }
        Self::from_bounds_ordered(self.lower.max(lo), self.upper.min(hi))
    }

    fn from_bounds_ordered(lo: f64, hi: f64) -> Self {
        if hi > lo {
            Self {
                lower: lo,
                upper: hi,
                empty: false,
            }
        } else {
            Self::EMPTY
        }
    }
}

impl fmt::Display for InterferenceInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            write!(f, "∅")
        } else {
            write!(f, "[{}, {}]", self.lower, self.upper)
        }
    }
}

/// Which closed-form branch of the interval construction applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalBranch {
    /// Crossing ahead, `0 < θ ≤ Ω`: street stays in beam forever.
    AheadShallow,
    /// Crossing ahead, `Ω < θ ≤ 2Ω`: street leaves the beam.
    AheadSteep,
    /// Crossing ahead, `π − 2Ω ≤ θ ≤ π − Ω`: mirror of `AheadSteep`.
    AheadSteepMirrored,
    /// Crossing ahead, `π − Ω < θ < π`: mirror of `AheadShallow`.
    AheadShallowMirrored,
    /// Crossing behind, `π < θ < π + Ω`.
    Behind,
    /// Crossing behind, `2π − Ω < θ < 2π`: mirror of `Behind`.
    BehindMirrored,
    None,
}

/// Branch selection for a frame and half beamwidth (assumed `< π/4`).
pub fn interval_branch(f: &IntersectionFrame, half_beamwidth: f64) -> IntervalBranch {
    let t = f.theta;
    let w = half_beamwidth;
    let tol = BRANCH_ANGLE_TOL;
    if f.u >= 0.0 {
        if t > 0.0 && t <= w + tol {
            IntervalBranch::AheadShallow
        } else if t > w + tol && t <= 2.0 * w + tol {
            IntervalBranch::AheadSteep
        } else if t >= PI - 2.0 * w - tol && t <= PI - w + tol {
            IntervalBranch::AheadSteepMirrored
        } else if t > PI - w + tol && t < PI {
            IntervalBranch::AheadShallowMirrored
        } else {
            IntervalBranch::None
        }
    } else if t > PI && t < PI + w - tol {
        IntervalBranch::Behind
    } else if t > TAU - w + tol && t < TAU {
        IntervalBranch::BehindMirrored
    } else {
        IntervalBranch::None
    }
}

/// Forward-offset interval on a street where a vehicle facing the ego radar
/// and the ego radar are mutually in beam.
///
/// The lower end `a` and upper end `b` follow the closed forms below, with
/// `Ω` the common half beamwidth and `u` the signed crossing distance:
///
/// | branch | `a` | `b` |
/// |---|---|---|
/// | `0 < θ ≤ Ω` | `u sin(θ−Ω)/sin Ω` | `∞` |
/// | `Ω < θ ≤ 2Ω` | `u sin(θ−Ω)/sin Ω` | `u sin Ω/sin(θ−Ω)` |
/// | `π−2Ω ≤ θ ≤ π−Ω` | `u sin(θ+Ω)/sin Ω` | `u sin Ω/sin(θ+Ω)` |
/// | `π−Ω < θ < π` | `u sin(θ+Ω)/sin Ω` | `∞` |
/// | `π < θ < π+Ω` (`u < 0`) | `−u sin Ω/sin(θ−Ω)` | `∞` |
/// | `2π−Ω < θ < 2π` (`u < 0`) | `−u sin Ω/sin(θ+Ω)` | `∞` |
///
/// Everything else is empty. The half beamwidth must lie in `(0, π/4)`; above
/// that the mutual set on one street can split into two pieces.
pub fn interference_bounds(f: &IntersectionFrame, half_beamwidth: f64) -> Result<InterferenceInterval, GeometryError> {
    if !(half_beamwidth > 0.0 && half_beamwidth < FRAC_PI_4) {
        return Err(GeometryError::HalfBeamwidth {
            value_rad: half_beamwidth,
            max_deg: 45.0,
        });
    }
    let w = half_beamwidth;
    let sw = w.sin();
    let u = f.u;
    let t = f.theta;
    // a ratio whose denominator has collapsed to (numerically) zero or flipped
    // sign at a branch boundary is an unbounded end
    let unbounded_if_degenerate = |num: f64, den: f64| {
        if den <= 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    };
    let interval = match interval_branch(f, w) {
        IntervalBranch::AheadShallow => InterferenceInterval::from_bounds(u * (t - w).sin() / sw, f64::INFINITY),
        IntervalBranch::AheadSteep => {
            InterferenceInterval::from_bounds(u * (t - w).sin() / sw, unbounded_if_degenerate(u * sw, (t - w).sin()))
        }
        IntervalBranch::AheadSteepMirrored => {
            InterferenceInterval::from_bounds(u * (t + w).sin() / sw, unbounded_if_degenerate(u * sw, (t + w).sin()))
        }
        IntervalBranch::AheadShallowMirrored => {
            InterferenceInterval::from_bounds(u * (t + w).sin() / sw, f64::INFINITY)
        }
        IntervalBranch::Behind => {
            InterferenceInterval::from_bounds(unbounded_if_degenerate(-u * sw, (t - w).sin()), f64::INFINITY)
        }
        IntervalBranch::BehindMirrored => {
            InterferenceInterval::from_bounds(unbounded_if_degenerate(-u * sw, (t + w).sin()), f64::INFINITY)
        }
        IntervalBranch::None => InterferenceInterval::EMPTY,
    };
    Ok(interval)
}

/// Distance from the ego radar to the point at forward offset `v` from the
/// crossing: `√((u + v|cos θ|)² + (v sin θ)²)`.
pub fn interferer_distance(f: &IntersectionFrame, v: f64) -> f64 {
    let (s, c) = f.theta.sin_cos();
    (f.u + v * c.abs()).hypot(v * s)
}

/// Angle from the crossing point `(0, u)` to the sector's arc corner,
/// `arctan(R sin Ω / |R cos Ω − u|)`, which is `π/2` at `u = R cos Ω`.
pub fn alpha_n(u: f64, s: &SectorGeometry) -> f64 {
    let (sw, cw) = s.half_beamwidth.sin_cos();
    let r = s.range;
    (r * sw).atan2((r * cw - u).abs())
}

/// Chord pieces of a street through `(0, u)`, `0 ≤ u ≤ R`.
pub(crate) mod chord {
    /// Distance from the crossing back to the right-hand beam edge.
    pub fn to_near_edge(u: f64, theta: f64, w: f64) -> f64 {
        u * w.sin() / (theta + w).sin()
    }

    /// Distance from the crossing forward to the left-hand beam edge.
    pub fn to_far_edge(u: f64, theta: f64, w: f64) -> f64 {
        u * w.sin() / (theta - w).sin()
    }

    pub fn half_disk_term(u: f64, theta: f64, range: f64) -> f64 {
        let st = theta.sin();
        (range * range - u * u * st * st).max(0.0).sqrt()
    }

    /// Edge then arc, `θ ≤ α_n`.
    pub fn l1(u: f64, theta: f64, w: f64, range: f64) -> f64 {
        to_near_edge(u, theta, w) + half_disk_term(u, theta, range) - u * theta.cos()
    }

    /// Edge to edge, `u ≤ R cos Ω`.
    pub fn l2(u: f64, theta: f64, w: f64) -> f64 {
        let st = theta.sin();
        let ct = theta.cos();
        let tw = w.tan();
        2.0 * u * st * tw / (st * st - ct * ct * tw * tw)
    }

    /// Mirror of `l1`, `θ > π − α_n`.
    pub fn l3(u: f64, theta: f64, w: f64, range: f64) -> f64 {
        to_far_edge(u, theta, w) + half_disk_term(u, theta, range) + u * theta.cos()
    }

    /// Arc to arc, `u ≥ R cos Ω`.
    pub fn l4(u: f64, theta: f64, range: f64) -> f64 {
        2.0 * half_disk_term(u, theta, range)
    }
}

/// Length of a street inside the ego sector, by cases on where it enters and
/// leaves (beam edge or arc). Defined for crossings `0 ≤ u ≤ R` with
/// `θ ∈ (0, π]`; any other frame yields `0`.
pub fn chord_length(f: &IntersectionFrame, s: &SectorGeometry) -> f64 {
    let u = f.u;
    let t = f.theta;
    let w = s.half_beamwidth;
    let range = s.range;
    if !(0.0..=range).contains(&u) || !(t > 0.0 && t <= PI) {
        return 0.0;
    }
    let an = alpha_n(u, s);
    let l = if t <= an {
        chord::l1(u, t, w, range)
    } else if t <= PI - an {
        if u <= range * w.cos() {
            chord::l2(u, t, w)
        } else {
            chord::l4(u, t, range)
        }
    } else {
        chord::l3(u, t, w, range)
    };
    l.max(0.0)
}

/// Exact length of `street ∩ sector` for an arbitrary street, by clipping the
/// street's disk chord against the two half-planes of the beam wedge.
pub fn sector_chord(g: &GeneratingPoint, s: &SectorGeometry) -> f64 {
    let range = s.range;
    if g.r >= range {
        return 0.0;
    }
    let h = (range * range - g.r * g.r).sqrt();
    let (mut lo, mut hi) = (-h, h);
    let foot = g.foot();
    let tangent = g.tangent();
    let (sw, cw) = s.half_beamwidth.sin_cos();
    // inward normals of the left and right beam edges
    for n in [Vec2::new(cw, sw), Vec2::new(-cw, sw)] {
        let c0 = n.dot(foot);
        let c1 = n.dot(tangent);
        // c0 + t c1 >= 0
        if c1.abs() < 1e-300 {
            if c0 < 0.0 {
                return 0.0;
            }
        } else if c1 > 0.0 {
            lo = lo.max(-c0 / c1);
        } else {
            hi = hi.min(-c0 / c1);
        }
        if hi <= lo {
            return 0.0;
        }
    }
    hi - lo
}

/// Perpendicular distances `r` at which a street with normal angle `theta`
/// passes through one of the two outer corners of the sector. The chord
/// length is smooth in `r` between these points.
pub fn corner_offsets(theta: f64, s: &SectorGeometry) -> [f64; 2] {
    let (sw, cw) = s.half_beamwidth.sin_cos();
    let n = Vec2::new(theta.cos(), theta.sin());
    [
        n.dot(Vec2::new(s.range * sw, s.range * cw)),
        n.dot(Vec2::new(-s.range * sw, s.range * cw)),
    ]
}
