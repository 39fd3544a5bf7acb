use std::f64::consts::TAU;

use plcp_radar::geometry::{
    chord_length, facing_pose, interference_bounds, intersection_frame, mutual_interference, sector_chord,
    GeneratingPoint, SectorGeometry,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // 64 cases × 20 000 offsets ≈ 1.3e6 vehicles.
    #[test]
    fn interval_membership_matches_the_predicate(
        theta in 0.0..TAU,
        r in 0.1..200.0f64,
        omega_deg in 1.0..44.0f64,
        offsets in prop::collection::vec(-1.0..1.0f64, 20_000),
    ) {
        let w = omega_deg.to_radians();
        let g = GeneratingPoint::new(theta, r).unwrap();
        let Some(f) = intersection_frame(&g).frame() else { return Ok(()) };
        let iv = interference_bounds(&f, w).unwrap();
        let ego = SectorGeometry::new(w, 1.0).unwrap();
        let scale = f.u.abs().max(1.0);
        let mut disagreements = 0;
        for x in offsets {
            // spread offsets over many scales around the crossing
            let v = scale * x / (1.0 - x * x).max(1e-9);
            let near_edge = (v - iv.lower).abs() <= 1e-9 * scale
                || (iv.upper.is_finite() && (v - iv.upper).abs() <= 1e-9 * scale);
            if !near_edge && iv.contains(v) != mutual_interference(&ego, &facing_pose(&f, v), w) {
                disagreements += 1;
            }
        }
        prop_assert_eq!(disagreements, 0);
    }

    #[test]
    fn sector_chord_agrees_with_closed_form_pieces(
        u_frac in 0.0..1.0f64,
        theta in 1e-3..std::f64::consts::PI,
        omega_deg in 1.0..44.0f64,
        range in 1.0..60.0f64,
    ) {
        let s = SectorGeometry::from_degrees(omega_deg, range).unwrap();
        let u = u_frac * range;
        let g = GeneratingPoint::new(theta, u * theta.sin()).unwrap();
        let f = intersection_frame(&g).frame().unwrap();
        let a = chord_length(&f, &s);
        let b = sector_chord(&g, &s);
        prop_assert!((a - b).abs() <= 1e-9 * range, "{a} {b}");
    }

    #[test]
    fn chord_never_exceeds_the_sector_diameter(theta in 0.0..TAU, r in 0.0..100.0f64, omega_deg in 1.0..44.0f64, range in 1.0..60.0f64) {
        let s = SectorGeometry::from_degrees(omega_deg, range).unwrap();
        let l = sector_chord(&GeneratingPoint::new(theta, r).unwrap(), &s);
        prop_assert!(l >= 0.0 && l <= 2.0 * range);
    }
}
