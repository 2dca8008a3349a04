//! Property tests for the invariants of the state, channel, entropy, bound
//! and sweep layers.

use proptest::prelude::*;

use superact::bounds::{
    branch_table, erasure_superactivation_bound, evaluate, noisy_erasure_bound, nonconvexity_bound,
    numeric_crosscheck_erasure_protocol, BoundKind, HSign,
};
use superact::centropy::{alicki_fannes_envelope, conditional_entropy, state_coherent_info};
use superact::channels::{choi_state, depolarizing_channel, erasure_channel, flagged_mixture, QuantumChannel};
use superact::pdit::{make_approx_pdit, make_pdit, random_swap_twists, untwist, werner_shield};
use superact::qalg::linalg::{self, max_abs_diff};
use superact::qalg::{random_density, random_pure, random_unitary, trace_distance, vn_entropy, SystemLayout};
use superact::sweep::{run_sweep, Range, SweepSpec};

fn bipartite(da: usize, db: usize) -> SystemLayout {
    SystemLayout::new([("A", da), ("B", db)]).unwrap()
}

fn tripartite(da: usize, db: usize, dc: usize) -> SystemLayout {
    SystemLayout::new([("A", da), ("B", db), ("C", dc)]).unwrap()
}

fn some_channel(kind: u8, p: f64, d: usize) -> QuantumChannel {
    match kind % 3 {
        0 => erasure_channel(p, d).unwrap(),
        1 => depolarizing_channel(p, d).unwrap(),
        _ => flagged_mixture(p, &erasure_channel(0.3, d).unwrap(), &depolarizing_channel(0.6, d).unwrap()).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn entropy_within_dimension_bounds(da in 2usize..4, db in 1usize..4, seed in any::<u64>()) {
        let rho = random_density(bipartite(da, db), seed);
        let s = vn_entropy(&rho).unwrap();
        prop_assert!(s >= -1e-12);
        prop_assert!(s <= ((da * db) as f64).log2() + 1e-9);
    }

    #[test]
    fn subadditivity_and_triangle(da in 2usize..4, db in 2usize..4, seed in any::<u64>()) {
        let rho = random_density(bipartite(da, db), seed);
        let sab = vn_entropy(&rho).unwrap();
        let sa = vn_entropy(&rho.partial_trace(&["A"]).unwrap()).unwrap();
        let sb = vn_entropy(&rho.partial_trace(&["B"]).unwrap()).unwrap();
        prop_assert!(sab <= sa + sb + 1e-9);
        prop_assert!((sa - sb).abs() <= sab + 1e-9);
    }

    #[test]
    fn strong_subadditivity(seed in any::<u64>()) {
        let rho = random_density(tripartite(2, 2, 2), seed);
        let s = |keep: &[&str]| vn_entropy(&rho.partial_trace(keep).unwrap()).unwrap();
        let sabc = vn_entropy(&rho).unwrap();
        prop_assert!(sabc + s(&["B"]) <= s(&["A", "B"]) + s(&["B", "C"]) + 1e-9);
    }

    #[test]
    fn pure_state_marginals_match(da in 2usize..4, db in 2usize..4, seed in any::<u64>()) {
        let psi = random_pure(bipartite(da, db), seed);
        prop_assert!(vn_entropy(&psi).unwrap().abs() <= 1e-9);
        let sa = vn_entropy(&psi.partial_trace(&["A"]).unwrap()).unwrap();
        let sb = vn_entropy(&psi.partial_trace(&["B"]).unwrap()).unwrap();
        prop_assert!((sa - sb).abs() <= 1e-9);
    }

    #[test]
    fn partial_trace_preserves_trace(seed in any::<u64>()) {
        let rho = random_density(tripartite(2, 3, 2), seed);
        for keep in [&["A"][..], &["B", "C"][..], &["A", "C"][..]] {
            let red = rho.partial_trace(keep).unwrap();
            prop_assert!((red.trace().re - 1.0).abs() <= 1e-10);
            prop_assert!(red.min_eigenvalue() >= -1e-10);
        }
    }

    #[test]
    fn partial_transpose_is_involution(da in 2usize..4, db in 2usize..4, seed in any::<u64>()) {
        let rho = random_density(bipartite(da, db), seed);
        let once = rho.partial_transpose(&["B"]).unwrap();
        let twice = linalg::partial_transpose_matrix(rho.layout(), &once, &[1]);
        prop_assert!(max_abs_diff(&twice, rho.matrix()) <= 1e-14);
        // full transpose preserves the spectrum
        let full = rho.partial_transpose(&["A", "B"]).unwrap();
        let a = linalg::hermitian_eigenvalues(&full);
        let b = rho.eigenvalues();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn entropy_unitarily_invariant(seed in any::<u64>(), useed in any::<u64>()) {
        let rho = random_density(bipartite(2, 3), seed);
        let u = random_unitary(6, useed);
        let moved = rho.conjugate(u.matrix()).unwrap();
        prop_assert!((vn_entropy(&rho).unwrap() - vn_entropy(&moved).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn trace_distance_is_a_metric(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let l = bipartite(2, 2);
        let (a, b, c) = (random_density(l.clone(), s1), random_density(l.clone(), s2), random_density(l, s3));
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!(ab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() <= 1e-12);
    }

    #[test]
    fn conditional_entropy_bounds(seed in any::<u64>(), pure in any::<bool>()) {
        let l = bipartite(2, 3);
        let rho = if pure { random_pure(l, seed) } else { random_density(l, seed) };
        let s = conditional_entropy(&rho, &["A"], &["B"]).unwrap();
        prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&s));
        let ic = state_coherent_info(&rho, &["A"], &["B"]).unwrap();
        prop_assert!((ic + s).abs() <= 1e-12);
    }

    #[test]
    fn alicki_fannes_envelope_holds(seed in any::<u64>(), eps in 0.001f64..0.5) {
        let l = bipartite(2, 4);
        let rho = random_density(l.clone(), seed);
        let tau = random_pure(l, seed.wrapping_add(1));
        let t = (eps / trace_distance(&rho, &tau).unwrap()).min(1.0);
        let near = rho.mix(&tau, t).unwrap();
        let gap = (conditional_entropy(&rho, &["A"], &["B"]).unwrap()
            - conditional_entropy(&near, &["A"], &["B"]).unwrap()).abs();
        prop_assert!(gap <= alicki_fannes_envelope(2, eps).unwrap() + 1e-9);
    }

    #[test]
    fn channels_preserve_trace(kind in any::<u8>(), p in 0.0f64..=1.0, d in 2usize..4, seed in any::<u64>()) {
        let ch = some_channel(kind, p, d);
        let rho = random_density(SystemLayout::single("A", d).unwrap(), seed);
        let out = ch.apply(&rho).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() <= 1e-10);
        prop_assert!(out.min_eigenvalue() >= -1e-10);
        let env = ch.complementary_apply(&rho).unwrap();
        prop_assert!((env.trace().re - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn complement_matches_dilation(kind in any::<u8>(), p in 0.0f64..=1.0, seed in any::<u64>()) {
        let ch = some_channel(kind, p, 2);
        let rho = random_density(SystemLayout::single("A", 2).unwrap(), seed);
        let joint = ch.stinespring_apply(&rho).unwrap();
        let labels = joint.layout().labels();
        let env = joint.partial_trace(&labels[1..]).unwrap();
        let out = joint.partial_trace(&labels[..1]).unwrap();
        prop_assert!(max_abs_diff(env.matrix(), ch.complementary_apply(&rho).unwrap().matrix()) <= 1e-10);
        prop_assert!(max_abs_diff(out.matrix(), ch.apply(&rho).unwrap().matrix()) <= 1e-10);
        // pure input: S(B) = S(E)
        let psi = random_pure(SystemLayout::single("A", 2).unwrap(), seed);
        let sb = vn_entropy(&ch.apply(&psi).unwrap()).unwrap();
        let se = vn_entropy(&ch.complementary_apply(&psi).unwrap()).unwrap();
        prop_assert!((sb - se).abs() <= 1e-9);
    }

    #[test]
    fn choi_marginal_is_maximally_mixed(kind in any::<u8>(), p in 0.0f64..=1.0, d in 2usize..4) {
        let ch = some_channel(kind, p, d);
        let choi = choi_state(&ch).unwrap();
        let labels = choi.state().layout().labels();
        let marginal = choi.state().partial_trace(&labels[..1]).unwrap();
        let ideal = linalg::identity(d).scale(1.0 / d as f64);
        prop_assert!(max_abs_diff(marginal.matrix(), &ideal) <= 1e-10);
    }

    #[test]
    fn table_identity(kappa in 0.0f64..=1.0, p in 0.0f64..=1.0, d in 2usize..9) {
        let t = branch_table(kappa, p, d).unwrap();
        prop_assert!((t.rate() - nonconvexity_bound(kappa, p, d).unwrap()).abs() <= 1e-12);
        prop_assert_eq!(t.entries[2].value, 0.0);
        prop_assert_eq!(t.entries[8].value, 0.0);
    }

    #[test]
    fn noiseless_erasure_consistency(p in 0.0f64..=1.0, d in 2usize..9) {
        prop_assert_eq!(noisy_erasure_bound(p, 0.0, d).unwrap(), erasure_superactivation_bound(p, d).unwrap());
    }

    #[test]
    fn nonconvexity_peaks_at_half(k1 in 0.001f64..0.999, k2 in 0.001f64..0.999, d in 2usize..6) {
        let f = |k| nonconvexity_bound(k, 0.5, d).unwrap();
        prop_assert!(f(k1) > 0.0);
        let (lo, hi) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
        if hi - lo > 1e-6 && hi <= 0.5 {
            prop_assert!(f(lo) < f(hi));
        }
        if hi - lo > 1e-6 && lo >= 0.5 {
            prop_assert!(f(lo) > f(hi));
        }
        prop_assert!(f(k1) <= f(0.5));
    }

    #[test]
    fn bound_point_sign_label(kappa in 0.0f64..=1.0, p in 0.0f64..=1.0, eps in 0.0f64..=1.0, paper in any::<bool>()) {
        let h = if paper { HSign::Paper } else { HSign::Conservative };
        for kind in [BoundKind::Nonconvexity, BoundKind::NoisyErasure, BoundKind::Depolarizing] {
            let pt = evaluate(kind, kappa, p, eps, 2, h).unwrap();
            prop_assert_eq!(pt.positive, pt.value > 0.0);
        }
    }

    #[test]
    fn random_pbits_survive_erasure(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let g = make_pdit(2, &werner_shield(), &random_swap_twists(seed)).unwrap();
        let r = numeric_crosscheck_erasure_protocol(p, &g).unwrap();
        prop_assert!((r.unerased - 1.0).abs() <= 1e-9);
        prop_assert!(r.erased <= 1e-9);
        prop_assert!((r.joint - r.average).abs() <= 1e-9);
    }

    #[test]
    fn approx_pdit_band(seed in any::<u64>(), eps in 0.01f64..0.3) {
        let g = make_pdit(2, &werner_shield(), &random_swap_twists(seed)).unwrap();
        let a = make_approx_pdit(2, g.shield(), g.twists(), eps, seed).unwrap();
        let dist = a.untwist_distance().unwrap();
        prop_assert!(dist <= eps + 1e-9 && dist >= 0.5 * eps - 1e-9);
        prop_assert!(a.key_attack_epsilon().unwrap() <= 2.0 * eps + 1e-9);
        prop_assert!(trace_distance(&untwist(&g), &superact::pdit::untwisted_reference(2, g.shield()).unwrap()).unwrap() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sweep_grid_complete_and_deterministic(
        pmin in 0.0f64..0.5, span in 0.0f64..0.5, step in 0.02f64..0.2, kappa in 0.0f64..=1.0,
    ) {
        let mut spec = SweepSpec::new(BoundKind::Nonconvexity);
        let r = Range { min: pmin, max: pmin + span, step };
        spec.ranges.insert("p".into(), r);
        spec.ranges.insert("kappa".into(), Range { min: kappa, max: kappa, step: 0.1 });
        let a = run_sweep(&spec).unwrap();
        prop_assert_eq!(a.points.len(), r.len());
        prop_assert!(a.points.iter().all(|pt| pt.positive == (pt.value > 0.0)));
        let csv = a.to_csv();
        prop_assert_eq!(csv.lines().count(), r.len() + 1);
        prop_assert_eq!(csv, run_sweep(&spec).unwrap().to_csv());
        let max = a.points.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(a.summary.max_value, max);
    }
}
