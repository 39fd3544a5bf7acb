//! Monte Carlo engine: samples the street network, the vehicles, fading and
//! target RCS, and estimates the analytic quantities empirically.
//!
//! Trial `i` draws from `ChaCha8Rng` seeded with `seed` on stream `i`, so every
//! trial is independent of how trials are partitioned across threads. Per-trial
//! results are collected in trial order and reduced serially, which makes the
//! estimates bit-identical for any thread count.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::analytic::{noise_power, InterferenceModel, NetworkParams, Orientation, RadarParams};
use crate::geometry::{
    mutual_interference, sector_chord, sector_contains, GeneratingPoint, RadarPose, SectorGeometry, Vec2,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("confidence level must lie in (0, 1), got {0}")]
    Confidence(f64),
    #[error("invalid simulation window `{field}`: {reason}")]
    Window { field: &'static str, reason: String },
    #[error("target range {target} m must lie in (0, {range}] m")]
    TargetRange { target: f64, range: f64 },
}

/// Spatial truncation of the simulated field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Windows {
    /// Streets are sampled with `r < r_sim`.
    pub r_sim: f64,
    /// Vehicles are sampled within this distance of each street's foot.
    pub line_half_window: f64,
}

impl Windows {
    /// `r_sim = 10 R`, `line_half_window = 2 r_sim`.
    pub fn for_sector(s: &SectorGeometry) -> Self {
        let r_sim = 10.0 * s.range();
        Self {
            r_sim,
            line_half_window: 2.0 * r_sim,
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        for (field, v) in [
            ("r_sim [m]", self.r_sim),
            ("line_half_window [m]", self.line_half_window),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(McError::Window {
                    field,
                    reason: format!("expected a finite positive length, got {v}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    pub trials: u64,
    pub seed: u64,
    /// `None` uses [`Windows::for_sector`].
    pub windows: Option<Windows>,
    pub model: InterferenceModel,
    pub confidence: f64,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 0,
            windows: None,
            model: InterferenceModel::default(),
            confidence: 0.99,
        }
    }
}

impl McSpec {
    pub fn windows(&self, s: &SectorGeometry) -> Windows {
        self.windows.unwrap_or_else(|| Windows::for_sector(s))
    }

    fn validate(&self, s: &SectorGeometry) -> Result<Windows, McError> {
        if self.trials == 0 {
            return Err(McError::NoTrials);
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(McError::Confidence(self.confidence));
        }
        let w = self.windows(s);
        w.validate()?;
        Ok(w)
    }
}

/// A vehicle on a street, at signed offset `offset` from the foot of the
/// perpendicular along the street tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vehicle {
    pub offset: f64,
    /// Boresight is `heading × tangent`, with `heading = ±1`.
    pub heading: f64,
    /// Unit-mean exponential power fading towards the ego radar.
    pub fading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Street {
    pub line: GeneratingPoint,
    pub vehicles: Vec<Vehicle>,
}

impl Street {
    pub fn position(&self, v: &Vehicle) -> Vec2 {
        self.line.point_at(v.offset)
    }

    pub fn pose(&self, v: &Vehicle) -> RadarPose {
        RadarPose {
            position: self.position(v),
            boresight: self.line.tangent().scale(v.heading),
        }
    }
}

/// One sample of the network seen from the ego radar.
#[derive(Debug, Clone, PartialEq)]
pub struct PlcpRealization {
    /// Streets other than the ego street.
    pub streets: Vec<Street>,
    /// Vehicles on the ego street (`x = 0`); empty unless same-street
    /// interference is enabled. Offsets are the `y` coordinate.
    pub ego_street: Street,
    /// RCS of the target at the ego boresight, m².
    pub target_rcs: f64,
}

/// The ego street as a generating point: `θ = 0, r = 0` is the line `x = 0`,
/// with tangent `+y`.
fn ego_line() -> GeneratingPoint {
    GeneratingPoint::new(0.0, 0.0).expect("valid ego line")
}

fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean > 0.0 {
        Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
    } else {
        0
    }
}

/// Visits one realization in its fixed draw order.
trait Visitor {
    fn street(&mut self, _line: &GeneratingPoint) {}
    fn ego_street(&mut self) {}
    fn vehicle(&mut self, line: &GeneratingPoint, v: Vehicle);
}

struct Sampler<'a> {
    net: &'a NetworkParams,
    windows: Windows,
    model: InterferenceModel,
    mean_rcs: f64,
}

impl Sampler<'_> {
    fn rng(seed: u64, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        rng
    }

    fn vehicles<V: Visitor>(&self, rng: &mut ChaCha8Rng, line: &GeneratingPoint, visitor: &mut V) {
        let w = self.windows.line_half_window;
        let n = poisson_count(rng, self.net.lambda_p * 2.0 * w);
        let tangent = line.tangent();
        for _ in 0..n {
            let offset = rng.random_range(-w..w);
            let heading = match self.model.orientation {
                Orientation::FacingEgo => {
                    let p = line.point_at(offset);
                    if (-p).dot(tangent) >= 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                Orientation::RandomTwoWay => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            let fading: f64 = Exp1.sample(rng);
            visitor.vehicle(
                line,
                Vehicle {
                    offset,
                    heading,
                    fading,
                },
            );
        }
    }

    /// Draws one realization, returning the target RCS.
    fn run<V: Visitor>(&self, seed: u64, trial: u64, visitor: &mut V) -> f64 {
        let mut rng = Self::rng(seed, trial);
        let n = poisson_count(&mut rng, self.net.lambda_l * TAU * self.windows.r_sim);
        for _ in 0..n {
            let theta = rng.random_range(0.0..TAU);
            let r = rng.random::<f64>() * self.windows.r_sim;
            let line = GeneratingPoint::new(theta, r).expect("sampled inside the representation space");
            visitor.street(&line);
            self.vehicles(&mut rng, &line, visitor);
        }
        if self.model.same_street {
            visitor.ego_street();
            self.vehicles(&mut rng, &ego_line(), visitor);
        }
        let rcs: f64 = Exp1.sample(&mut rng);
        rcs * self.mean_rcs
    }
}

struct Collect {
    streets: Vec<Street>,
    ego: Street,
    on_ego: bool,
}

impl Visitor for Collect {
    fn street(&mut self, line: &GeneratingPoint) {
        self.streets.push(Street {
            line: *line,
            vehicles: Vec::new(),
        });
    }

    fn ego_street(&mut self) {
        self.on_ego = true;
    }

    fn vehicle(&mut self, _line: &GeneratingPoint, v: Vehicle) {
        match self.streets.last_mut() {
            Some(s) if !self.on_ego => s.vehicles.push(v),
            _ => self.ego.vehicles.push(v),
        }
    }
}

/// Samples trial `trial` of the sequence identified by `seed`.
///
/// The same `(seed, trial)` always yields the same realization, and the
/// estimators below see exactly these draws.
pub fn sample_realization(
    net: &NetworkParams,
    p: &RadarParams,
    windows: Windows,
    model: &InterferenceModel,
    seed: u64,
    trial: u64,
) -> PlcpRealization {
    let sampler = Sampler {
        net,
        windows,
        model: *model,
        mean_rcs: p.mean_rcs,
    };
    let mut c = Collect {
        streets: Vec::new(),
        ego: Street {
            line: ego_line(),
            vehicles: Vec::new(),
        },
        on_ego: false,
    };
    let target_rcs = sampler.run(seed, trial, &mut c);
    PlcpRealization {
        streets: c.streets,
        ego_street: c.ego,
        target_rcs,
    }
}

/// Monte Carlo estimate with a two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub std_err: f64,
    pub trials: u64,
    pub confidence: f64,
    pub lower: f64,
    pub upper: f64,
}

impl EstimateWithCI {
    pub fn covers(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Normal-approximation interval around the sample mean.
    pub fn from_samples(samples: &[f64], confidence: f64) -> Self {
        let (mean, std_err) = mean_and_std_err(samples);
        let z = z_value(confidence);
        Self {
            mean,
            std_err,
            trials: samples.len() as u64,
            confidence,
            lower: mean - z * std_err,
            upper: mean + z * std_err,
        }
    }

    /// Wilson score interval for a success fraction. Unlike the normal
    /// interval it stays non-degenerate when every trial succeeds.
    pub fn from_successes(successes: u64, trials: u64, confidence: f64) -> Self {
        let n = trials as f64;
        let k = successes as f64;
        let mean = k / n;
        let var = if trials > 1 {
            (k * (1.0 - mean) * (1.0 - mean) + (n - k) * mean * mean) / (n - 1.0)
        } else {
            0.0
        };
        let z = z_value(confidence);
        let z2 = z * z;
        let centre = (mean + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = z / (1.0 + z2 / n) * (mean * (1.0 - mean) / n + z2 / (4.0 * n * n)).sqrt();
        Self {
            mean,
            std_err: (var / n).sqrt(),
            trials,
            confidence,
            lower: (centre - half).max(0.0),
            upper: (centre + half).min(1.0),
        }
    }
}

fn mean_and_std_err(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

/// Two-sided standard normal quantile for `confidence`.
pub fn z_value(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + 0.5 * confidence)
}

fn per_trial<T: Send, F: Fn(u64) -> T + Sync + Send>(trials: u64, f: F) -> Vec<T> {
    (0..trials).into_par_iter().map(f).collect()
}

struct Interference<'a> {
    sector: &'a SectorGeometry,
    alpha: f64,
    total: f64,
}

impl Visitor for Interference<'_> {
    fn vehicle(&mut self, line: &GeneratingPoint, v: Vehicle) {
        let pose = RadarPose {
            position: line.point_at(v.offset),
            boresight: line.tangent().scale(v.heading),
        };
        if mutual_interference(self.sector, &pose, self.sector.half_beamwidth()) {
            self.total += v.fading * pose.position.norm().powf(-self.alpha);
        }
    }
}

/// Per-trial `(Σ h w^{-α}, σ_c)` over mutually in-beam vehicles.
fn interference_trials(
    p: &RadarParams,
    net: &NetworkParams,
    s: &SectorGeometry,
    windows: Windows,
    mc: &McSpec,
) -> Vec<(f64, f64)> {
    let sampler = Sampler {
        net,
        windows,
        model: mc.model,
        mean_rcs: p.mean_rcs,
    };
    per_trial(mc.trials, |trial| {
        let mut acc = Interference {
            sector: s,
            alpha: p.path_loss_exponent,
            total: 0.0,
        };
        let rcs = sampler.run(mc.seed, trial, &mut acc);
        (acc.total, rcs)
    })
}

/// Fraction of realizations in which
/// `γ σ_c P R^{-2α} > β (N + Σ 4π γ P h w^{-α})`, summing over vehicles that
/// pass [`mutual_interference`].
pub fn estimate_pd(
    p: &RadarParams,
    net: &NetworkParams,
    s: &SectorGeometry,
    target_range: f64,
    mc: &McSpec,
) -> Result<EstimateWithCI, McError> {
    let windows = mc.validate(s)?;
    if !(target_range > 0.0 && target_range <= s.range()) {
        return Err(McError::TargetRange {
            target: target_range,
            range: s.range(),
        });
    }
    let echo = p.echo_gain(target_range, mc.model.path_loss);
    let noise = noise_power(p);
    let per_interferer = 4.0 * PI * p.gamma() * p.transmit_power;
    let successes = interference_trials(p, net, s, windows, mc)
        .into_iter()
        .filter(|&(i, rcs)| rcs * echo > p.threshold * (noise + per_interferer * i))
        .count() as u64;
    Ok(EstimateWithCI::from_successes(successes, mc.trials, mc.confidence))
}

/// Mean aggregate interference power at the ego radar, W.
pub fn estimate_interference_power(
    p: &RadarParams,
    net: &NetworkParams,
    s: &SectorGeometry,
    mc: &McSpec,
) -> Result<EstimateWithCI, McError> {
    let windows = mc.validate(s)?;
    let per_interferer = 4.0 * PI * p.gamma() * p.transmit_power;
    let samples: Vec<f64> = interference_trials(p, net, s, windows, mc)
        .into_iter()
        .map(|(i, _)| per_interferer * i)
        .collect();
    Ok(EstimateWithCI::from_samples(&samples, mc.confidence))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordStats {
    /// Total street length inside the sector, m.
    pub length: EstimateWithCI,
    /// Number of vehicles inside the sector.
    pub count: EstimateWithCI,
}

struct InSector<'a> {
    sector: &'a SectorGeometry,
    length: f64,
    count: u64,
}

impl Visitor for InSector<'_> {
    fn street(&mut self, line: &GeneratingPoint) {
        self.length += sector_chord(line, self.sector);
    }

    fn vehicle(&mut self, line: &GeneratingPoint, v: Vehicle) {
        if sector_contains(line.point_at(v.offset), self.sector) {
            self.count += 1;
        }
    }
}

/// Mean in-sector street length (by exact chord clipping) and mean in-sector
/// vehicle count. Vehicles on the ego street are never counted.
pub fn estimate_chord_stats(net: &NetworkParams, s: &SectorGeometry, mc: &McSpec) -> Result<ChordStats, McError> {
    let windows = mc.validate(s)?;
    let model = InterferenceModel {
        same_street: false,
        ..mc.model
    };
    let sampler = Sampler {
        net,
        windows,
        model,
        mean_rcs: 1.0,
    };
    let per: Vec<(f64, f64)> = per_trial(mc.trials, |trial| {
        let mut acc = InSector {
            sector: s,
            length: 0.0,
            count: 0,
        };
        sampler.run(mc.seed, trial, &mut acc);
        (acc.length, acc.count as f64)
    });
    let lengths: Vec<f64> = per.iter().map(|x| x.0).collect();
    let counts: Vec<f64> = per.iter().map(|x| x.1).collect();
    Ok(ChordStats {
        length: EstimateWithCI::from_samples(&lengths, mc.confidence),
        count: EstimateWithCI::from_samples(&counts, mc.confidence),
    })
}
