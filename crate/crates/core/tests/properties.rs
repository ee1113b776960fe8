//! Structural invariants checked on generated inputs.

mod common;

use common::RawTree;
use icrt::dimension::{closed_form_dimension, theoretical_dimensions};
use icrt::io::{read_cuts, write_cuts};
use icrt::massmeasure::{simulate_urn, urn_track, EmpiricalMeasure, MeasureKind, Subtree, TestFunction};
use icrt::measure::{expected_mass, inverse_expected_mass, psi, sample_mu, MuRealization};
use icrt::params::{make_theta, ThetaFamily};
use icrt::rng::SeedStream;
use icrt::rtree::IcrtTree;
use icrt::stickbreak::{sample_classical_with_measure, sample_cuts_new, StopRule};
use proptest::prelude::*;

fn raw_tree(max: usize) -> impl Strategy<Value = RawTree> {
    (1usize..=max)
        .prop_flat_map(|n| (prop::collection::vec(0.01f64..3.0, n), prop::collection::vec(0.0f64..=1.0, n)))
        .prop_map(|(g, f)| RawTree::from_gaps(&g, &f))
}

fn family() -> impl Strategy<Value = ThetaFamily> {
    prop_oneof![
        Just(ThetaFamily::Brownian),
        Just(ThetaFamily::Harmonic),
        (0.51f64..0.99).prop_map(ThetaFamily::power_law),
        (0.05f64..0.95).prop_map(|t0: f64| {
            let rest = (1.0 - t0 * t0).sqrt();
            ThetaFamily::explicit(t0, vec![rest * 0.8, rest * 0.6])
        }),
    ]
}

fn explicit_measure() -> impl Strategy<Value = MuRealization> {
    (0.0f64..2.0, prop::collection::vec((0.0f64..20.0, 0.01f64..1.5), 0..12))
        .prop_filter("non-empty", |(d, a)| *d > 0.0 || !a.is_empty())
        .prop_map(|(d, a)| MuRealization::new(d, a, None).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncations_are_normalized_and_sorted(f in family(), k in 0usize..3000) {
        let t = make_theta(&f, k).unwrap();
        prop_assert!(t.atoms.windows(2).all(|w| w[0] >= w[1]));
        let kept: f64 = t.atoms.iter().map(|w| w * w).sum();
        prop_assert!((t.theta0 * t.theta0 + kept + t.residual_square_mass - 1.0).abs() <= 1e-9);
        let again = make_theta(&f, k).unwrap();
        prop_assert!(t.atoms.iter().zip(&again.atoms).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(t.residual_square_mass.to_bits(), again.residual_square_mass.to_bits());
    }

    #[test]
    fn expected_mass_is_concave_increasing(f in family(), l0 in 0.01f64..100.0, h in 0.01f64..10.0) {
        let e: Vec<f64> = (0..3).map(|i| expected_mass(&f, l0 + i as f64 * h)).collect();
        let drift = f.theta0().powi(2);
        let tol = 1e-12 * e[2];
        prop_assert!(e[0] >= drift * l0 - tol);
        prop_assert!(e[1] >= e[0] && e[2] >= e[1]);
        prop_assert!(e[2] - 2.0 * e[1] + e[0] <= tol);
        let (p, le) = (psi(&f, l0), l0 * e[0]);
        prop_assert!(p <= le * (1.0 + 1e-12) && le <= 2.0 * p * (1.0 + 1e-12));
    }

    #[test]
    fn scale_inverts_expected_mass(f in family(), m in 0.01f64..50.0) {
        let l = inverse_expected_mass(&f, m).unwrap();
        prop_assert!((expected_mass(&f, l) - m).abs() <= 1e-9 * m);
    }

    #[test]
    fn measure_mass_is_monotone(mu in explicit_measure(), a in 0.0f64..25.0, b in 0.0f64..25.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(mu.mass(lo).unwrap() <= mu.mass(hi).unwrap());
    }

    #[test]
    fn sampled_cuts_are_valid(mu in explicit_measure(), seed in any::<u64>(), n in 1usize..200) {
        let cuts = sample_cuts_new(&mu, StopRule::Cuts(n), &mut SeedStream::new(seed).stream(0)).unwrap();
        prop_assert_eq!(cuts.len(), n);
        prop_assert!(cuts.y.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(cuts.z.iter().zip(&cuts.y).all(|(z, y)| *z >= 0.0 && z <= y));
        prop_assert!(cuts.cum_mass.windows(2).all(|w| w[0] <= w[1]));
        let total: f64 = cuts.seg_len.iter().sum();
        prop_assert!((total - cuts.total_length()).abs() <= 1e-9 * cuts.total_length());
    }

    #[test]
    fn classical_cuts_are_valid(seed in any::<u64>(), h in 0.5f64..6.0) {
        let theta = make_theta(&ThetaFamily::explicit(0.6, vec![0.64, 0.48]), 2).unwrap();
        let (cuts, _) = sample_classical_with_measure(&theta, StopRule::Horizon(h), &mut SeedStream::new(seed).stream(0)).unwrap();
        prop_assert!(cuts.y.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(cuts.y.iter().all(|&y| y <= h));
        prop_assert!(cuts.z.iter().zip(&cuts.y).all(|(z, y)| z <= y));
    }

    #[test]
    fn cut_tables_round_trip(seed in any::<u64>(), n in 1usize..50) {
        let cuts = sample_cuts_new(&MuRealization::lebesgue(), StopRule::Cuts(n), &mut SeedStream::new(seed).stream(1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cuts.csv");
        write_cuts(std::fs::File::create(&path).unwrap(), &cuts).unwrap();
        let back = read_cuts(&path).unwrap();
        prop_assert_eq!(back.y, cuts.y);
        prop_assert_eq!(back.z, cuts.z);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn distance_is_a_tree_metric(t in raw_tree(40), u in prop::collection::vec(0.0f64..=1.0, 4)) {
        let tree = IcrtTree::from_cuts(&t.y, &t.z).unwrap();
        let p: Vec<_> = u.iter().map(|v| tree.point(v * t.total()).unwrap()).collect();
        let d = |i: usize, j: usize| tree.distance(p[i], p[j]);
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert_eq!(d(0, 0), 0.0);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
        let lhs = d(0, 1) + d(2, 3);
        let rhs = (d(0, 2) + d(1, 3)).max(d(0, 3) + d(1, 2));
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn hausdorff_shrinks_as_the_lower_level_grows(t in raw_tree(40), u in prop::collection::vec(0.001f64..=1.0, 3)) {
        let tree = IcrtTree::from_cuts(&t.y, &t.z).unwrap();
        let mut l: Vec<f64> = u.iter().map(|v| v * t.total()).collect();
        l.sort_by(f64::total_cmp);
        let a = tree.hausdorff_truncation(l[0], l[2]).unwrap();
        let b = tree.hausdorff_truncation(l[1], l[2]).unwrap();
        prop_assert!(a >= b);
        prop_assert_eq!(tree.hausdorff_truncation(l[1], l[1]).unwrap(), 0.0);
    }

    #[test]
    fn packing_and_cover_sandwich(t in raw_tree(30), frac in 0.01f64..0.5) {
        let tree = IcrtTree::from_cuts(&t.y, &t.z).unwrap();
        let sk = tree.skeleton(t.total()).unwrap();
        let eps = frac * sk.diameter().max(1e-3);
        let cover = sk.cover_count(eps).unwrap();
        prop_assert!(sk.packing_count(2.0 * eps).unwrap() <= cover);
        prop_assert!(cover <= sk.packing_count(eps).unwrap());
        prop_assert!(sk.cover_count(2.0 * eps).unwrap() <= cover);
    }

    #[test]
    fn ball_mass_grows_to_one(t in raw_tree(30), u in 0.0f64..=1.0, e in 0.01f64..1.0) {
        let tree = IcrtTree::from_cuts(&t.y, &t.z).unwrap();
        let l = t.total();
        let atoms: Vec<(f64, f64)> = t.y.iter().step_by(3).map(|&y| (y * 0.5, 0.3)).collect();
        let mu = MuRealization::new(0.5, atoms, None).unwrap();
        let diameter = tree.skeleton(l).unwrap().diameter();
        let c = tree.point(u * l).unwrap();
        for kind in MeasureKind::ALL {
            let m = EmpiricalMeasure::new(kind, &tree, &mu, l).unwrap();
            let small = m.ball_mass(c, e * diameter).unwrap();
            let large = m.ball_mass(c, (e * 1.5).min(1.0) * diameter).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&small));
            prop_assert!(small <= large + 1e-12);
            prop_assert!((m.ball_mass(c, diameter).unwrap() - 1.0).abs() <= 1e-12);
            prop_assert!((m.integrate(&TestFunction::Constant).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn subtree_urn_is_monotone(seed in any::<u64>(), a in 2usize..20) {
        let theta = make_theta(&ThetaFamily::Harmonic, 200).unwrap();
        let mut rng = SeedStream::new(seed).stream(0);
        let mu = sample_mu(&theta, &mut rng);
        let cuts = sample_cuts_new(&mu, StopRule::Cuts(60), &mut rng).unwrap();
        let urn = urn_track(&cuts, &mu, a, Subtree::Hanging(a / 2)).unwrap();
        prop_assert!(urn.a_values.iter().zip(&urn.m_values).all(|(x, m)| x <= m));
        prop_assert!(urn.a_values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(urn.m_values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn simulated_urn_is_monotone(seed in any::<u64>(), a0 in 0.1f64..5.0, extra in 0.0f64..5.0) {
        let urn = simulate_urn(a0, a0 + extra, |i| 1.0 / i as f64, 100, &mut SeedStream::new(seed).stream(0));
        prop_assert!(urn.a_values.iter().zip(&urn.m_values).all(|(x, m)| *x <= *m + 1e-12));
        prop_assert!(urn.a_values.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn power_law_dimension_matches_stable_index() {
    for alpha in [0.55, 0.6, 2.0 / 3.0, 0.75, 0.9] {
        let d = closed_form_dimension(&ThetaFamily::power_law(alpha)).unwrap();
        let gamma = 1.0 / alpha;
        assert!((d - gamma / (gamma - 1.0)).abs() < 1e-12);
        assert!((d - 1.0 / (1.0 - alpha)).abs() < 1e-12);
    }
}

#[test]
fn dimension_bounds_are_ordered_and_stable_in_grid() {
    for f in [ThetaFamily::Brownian, ThetaFamily::power_law(0.6), ThetaFamily::power_law(0.8)] {
        let coarse = theoretical_dimensions(&f, 24).unwrap();
        let fine = theoretical_dimensions(&f, 40).unwrap();
        for d in [&coarse, &fine] {
            assert!(d.lower.unwrap() <= d.upper.unwrap() + 1e-12);
        }
        let band = (coarse.upper.unwrap() - fine.upper.unwrap()).abs().max(1e-3);
        assert!(fine.upper.unwrap() >= coarse.upper.unwrap() - band);
    }
}
