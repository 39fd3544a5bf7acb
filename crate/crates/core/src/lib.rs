//! Interference-limited detection for automotive radars on a random street
//! network.
//!
//! Streets form a Poisson line process and vehicles are Poisson points on each
//! street. Two engines evaluate the same model: [`analytic`] by nested
//! quadrature and [`montecarlo`] by simulation. [`optimizer`] sweeps either
//! engine over a parameter grid and picks the half-beamwidth that maximizes
//! the expected number of detected vehicles.

pub mod analytic;
pub mod geometry;
pub mod montecarlo;
pub mod optimizer;
pub mod quadrature;
pub mod units;

pub use analytic::{
    avg_line_length, detection_probability, expected_interferers, n_detections_lower_bound, noise_power,
    truncation_sensitivity, AnalyticError, InterferenceModel, LengthConvention, NetworkParams, Orientation,
    PathLossConvention, QuadratureSpec, RadarParams, RadarParamsDb,
};
pub use geometry::{
    interference_bounds, interferer_distance, intersection_frame, mutual_interference, sector_contains,
    GeneratingPoint, GeometryError, InterferenceInterval, Intersection, IntersectionFrame, RadarPose, SectorGeometry,
    Vec2,
};
