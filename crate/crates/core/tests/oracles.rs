//! The crate against independent brute-force references: series values of the
//! analytic profile, distances by unrolling the gluing, exhaustive covers.

mod common;

use common::{exhaustive_cover, power_profile, RawTree};
use icrt::massmeasure::{EmpiricalMeasure, MeasureKind};
use icrt::measure::{expected_mass, inverse_expected_mass, psi, MuRealization};
use icrt::params::ThetaFamily;
use icrt::rtree::IcrtTree;
use proptest::prelude::*;

// Reference values from an arbitrary-precision series evaluation, frozen.
const HARMONIC_MASS_10: f64 = 2.501_431_175_170_062;
const HARMONIC_PSI_10: f64 = 17.717_008_710_729_198;
const HARMONIC_SCALE_4: f64 = 68.348_399_187_369_09;
const POWER_TWO_THIRDS_MASS_10: f64 = 5.142_681_725_207_000_3;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn frozen_values_agree_with_direct_sums() {
    let c = 6f64.sqrt() / std::f64::consts::PI;
    let (m, p) = power_profile(c, 1.0, 10.0, 2_000_000);
    assert!(rel(m, HARMONIC_MASS_10) < 1e-10, "{m}");
    assert!(rel(p, HARMONIC_PSI_10) < 1e-10, "{p}");
    // sum i^(-4/3) with the same midpoint tail
    let n = 2_000_000u64;
    let z: f64 = (1..=n).rev().map(|i| (i as f64).powf(-4.0 / 3.0)).sum::<f64>() + 3.0 * (n as f64 + 0.5).powf(-1.0 / 3.0);
    let (m, _) = power_profile(1.0 / z.sqrt(), 2.0 / 3.0, 10.0, 2_000_000);
    assert!(rel(m, POWER_TWO_THIRDS_MASS_10) < 1e-9, "{m}");
}

#[test]
fn harmonic_profile_matches_frozen_values() {
    let h = ThetaFamily::Harmonic;
    assert!(rel(expected_mass(&h, 10.0), HARMONIC_MASS_10) < 1e-9);
    assert!(rel(psi(&h, 10.0), HARMONIC_PSI_10) < 1e-9);
    assert!(rel(inverse_expected_mass(&h, 4.0).unwrap(), HARMONIC_SCALE_4) < 1e-9);
    let p = ThetaFamily::power_law(2.0 / 3.0);
    assert!(rel(expected_mass(&p, 10.0), POWER_TWO_THIRDS_MASS_10) < 1e-9);
}

#[test]
fn profiles_match_direct_sums_across_scales() {
    let c = 6f64.sqrt() / std::f64::consts::PI;
    for l in [0.1, 1.0, 37.0, 500.0] {
        let (m, p) = power_profile(c, 1.0, l, 2_000_000);
        let h = ThetaFamily::Harmonic;
        assert!(rel(expected_mass(&h, l), m) < 1e-9, "l = {l}");
        assert!(rel(psi(&h, l), p) < 1e-9, "l = {l}");
    }
}

fn raw_tree() -> impl Strategy<Value = RawTree> {
    (1usize..=50)
        .prop_flat_map(|n| (prop::collection::vec(0.01f64..3.0, n), prop::collection::vec(0.0f64..=1.0, n)))
        .prop_map(|(g, f)| RawTree::from_gaps(&g, &f))
}

fn integer_tree() -> impl Strategy<Value = RawTree> {
    (1usize..=12)
        .prop_flat_map(|n| (prop::collection::vec(1u32..=3, n), prop::collection::vec(0.0f64..=1.0, n)))
        .prop_map(|(gaps, fracs)| {
            let mut t = RawTree::from_gaps(&gaps.iter().map(|&g| f64::from(g)).collect::<Vec<_>>(), &fracs);
            for z in &mut t.z {
                *z = z.floor();
            }
            t
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn metric_queries_match_unrolled_distances(t in raw_tree(), picks in prop::collection::vec(0.0f64..=1.0, 6)) {
        let tree = IcrtTree::from_cuts(&t.y, &t.z).unwrap();
        let total = t.total();
        let c: Vec<f64> = picks.iter().map(|u| u * total).collect();
        for w in c.windows(2) {
            let d = tree.distance_at(w[0], w[1]).unwrap();
            prop_assert!((d - t.dist(w[0], w[1])).abs() <= 1e-10);
        }
        let (l1, l2) = if c[4] <= c[5] { (c[4], c[5]) } else { (c[5], c[4]) };
        for &x in &c[..4] {
            let p = tree.point(x).unwrap();
            let (_, dmin) = t.nearest_below(x, l1);
            prop_assert!((tree.distance_to_truncation(p, l1).unwrap() - dmin).abs() <= 1e-10);
            let q = tree.project(p, l1).unwrap();
            prop_assert!(q.coord <= l1);
            prop_assert!((t.dist(x, q.coord) - dmin).abs() <= 1e-10);
        }
        if l1 > 0.0 {
            prop_assert!((tree.hausdorff_truncation(l1, l2).unwrap() - t.hausdorff(l1, l2)).abs() <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn greedy_cover_is_minimal(t in integer_tree(), e in 1u32..6) {
        let tree = IcrtTree::from_cuts(&t.y, &t.z).unwrap();
        let eps = f64::from(e);
        prop_assert_eq!(tree.ball_cover_count(t.total(), eps).unwrap(), exhaustive_cover(&t, eps));
    }

    #[test]
    fn length_ball_mass_matches_grid(t in raw_tree(), u in 0.0f64..=1.0, eps in 0.05f64..2.0) {
        let tree = IcrtTree::from_cuts(&t.y, &t.z).unwrap();
        let l = t.total();
        let mu = MuRealization::lebesgue();
        let m = EmpiricalMeasure::new(MeasureKind::LengthNormalized, &tree, &mu, l).unwrap();
        let x = u * l;
        let got = m.ball_mass(tree.point(x).unwrap(), eps).unwrap();
        let n = 20_000;
        let h = l / n as f64;
        let inside = (0..n).filter(|&i| t.dist(x, (i as f64 + 0.5) * h) <= eps).count();
        // Each segment crosses the ball boundary a bounded number of times.
        let slack = (t.y.len() as f64 * 2.0 + 2.0) * h / l;
        prop_assert!((got - inside as f64 / n as f64).abs() <= slack, "{} vs {}", got, inside as f64 / n as f64);
    }
}
