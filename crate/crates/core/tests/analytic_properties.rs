use plcp_radar::analytic::{
    avg_line_length, detection_probability, expected_interferers, n_detections_lower_bound, InterferenceModel,
    LengthConvention, NetworkParams, QuadratureSpec, RadarParams, RadarParamsDb,
};
use plcp_radar::geometry::SectorGeometry;
use proptest::prelude::*;

const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct Point {
    lambda_l: f64,
    lambda_p: f64,
    omega_deg: f64,
    range: f64,
    beta_db: f64,
    nd_dbm_per_hz: f64,
}

impl Point {
    fn radar(&self) -> RadarParams {
        RadarParamsDb {
            beta_db: self.beta_db,
            nd_dbm_per_hz: self.nd_dbm_per_hz,
            ..RadarParamsDb::default()
        }
        .to_linear()
        .unwrap()
    }

    fn net(&self) -> NetworkParams {
        NetworkParams::new(self.lambda_l, self.lambda_p).unwrap()
    }

    fn sector(&self) -> SectorGeometry {
        SectorGeometry::from_degrees(self.omega_deg, self.range).unwrap()
    }

    fn p_d_at(&self, target: f64) -> f64 {
        detection_probability(
            &self.radar(),
            &self.net(),
            &self.sector(),
            target,
            &QuadratureSpec::default(),
            &InterferenceModel::default(),
        )
        .unwrap()
        .value
    }

    fn p_d(&self) -> f64 {
        self.p_d_at(self.range)
    }
}

fn point() -> impl Strategy<Value = Point> {
    (
        0.0..0.08f64,
        0.0..0.2f64,
        1.0..30.0f64,
        5.0..50.0f64,
        -5.0..20.0f64,
        -174.0..-120.0f64,
    )
        .prop_map(|(lambda_l, lambda_p, omega_deg, range, beta_db, nd_dbm_per_hz)| Point {
            lambda_l,
            lambda_p,
            omega_deg,
            range,
            beta_db,
            nd_dbm_per_hz,
        })
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + SLACK)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn probability_is_a_probability(p in point()) {
        let v = p.p_d();
        prop_assert!((0.0..=1.0).contains(&v), "{v}");
    }

    #[test]
    fn harder_threshold_lowers_p_d(p in point(), step in 0.5..6.0f64) {
        let v: Vec<f64> = (0..3).map(|k| Point { beta_db: p.beta_db + step * k as f64, ..p }.p_d()).collect();
        prop_assert!(non_increasing(&v), "{v:?}");
    }

    #[test]
    fn more_noise_lowers_p_d(p in point(), step in 1.0..15.0f64) {
        let v: Vec<f64> = (0..3).map(|k| Point { nd_dbm_per_hz: p.nd_dbm_per_hz + step * k as f64, ..p }.p_d()).collect();
        prop_assert!(non_increasing(&v), "{v:?}");
    }

    #[test]
    fn denser_streets_lower_p_d(p in point(), step in 0.002..0.03f64) {
        let v: Vec<f64> = (0..3).map(|k| Point { lambda_l: p.lambda_l + step * k as f64, ..p }.p_d()).collect();
        prop_assert!(non_increasing(&v), "{v:?}");
    }

    #[test]
    fn denser_traffic_lowers_p_d(p in point(), step in 0.005..0.05f64) {
        let v: Vec<f64> = (0..3).map(|k| Point { lambda_p: p.lambda_p + step * k as f64, ..p }.p_d()).collect();
        prop_assert!(non_increasing(&v), "{v:?}");
    }

    #[test]
    fn wider_beam_lowers_p_d(p in point(), step in 0.5..5.0f64) {
        let v: Vec<f64> = (0..3).map(|k| Point { omega_deg: p.omega_deg + step * k as f64, ..p }.p_d()).collect();
        prop_assert!(non_increasing(&v), "{v:?}");
    }

    #[test]
    fn farther_target_lowers_p_d(p in point()) {
        let v: Vec<f64> = [0.4, 0.7, 1.0].iter().map(|f| p.p_d_at(f * p.range)).collect();
        prop_assert!(non_increasing(&v), "{v:?}");
    }

    #[test]
    fn mean_length_is_linear_in_street_density(p in point(), k in 0.1..10.0f64) {
        let q = QuadratureSpec::default();
        for conv in [LengthConvention::Campbell, LengthConvention::PaperLiteral] {
            let a = avg_line_length(&p.net(), &p.sector(), &q, conv).unwrap().value();
            let scaled = NetworkParams::new(p.lambda_l * k, p.lambda_p).unwrap();
            let b = avg_line_length(&scaled, &p.sector(), &q, conv).unwrap().value();
            prop_assert!((b - k * a).abs() <= 1e-9 * (k * a).max(1e-300), "{a} {b}");
        }
    }

    #[test]
    fn detections_never_exceed_vehicles_in_sector(p in point()) {
        let q = QuadratureSpec::default();
        let m = InterferenceModel::default();
        for conv in [LengthConvention::Campbell, LengthConvention::PaperLiteral] {
            let n = expected_interferers(&p.net(), &p.sector(), &q, conv).unwrap();
            let nd = n_detections_lower_bound(&p.radar(), &p.net(), &p.sector(), &q, &m, conv).unwrap();
            prop_assert!(nd <= n && nd >= 0.0, "{nd} {n}");
        }
    }

    #[test]
    fn halving_the_tolerance_stays_within_the_coarse_tolerance(p in point()) {
        let coarse = QuadratureSpec { rel_tol: 1e-3, ..QuadratureSpec::default() };
        let fine = QuadratureSpec { rel_tol: 5e-4, ..coarse };
        let m = InterferenceModel::default();
        let a = detection_probability(&p.radar(), &p.net(), &p.sector(), p.range, &coarse, &m).unwrap().value;
        let b = detection_probability(&p.radar(), &p.net(), &p.sector(), p.range, &fine, &m).unwrap().value;
        prop_assert!((a - b).abs() < 1e-3, "{a} {b}");
    }
}
