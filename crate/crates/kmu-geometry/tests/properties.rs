//! Randomized invariance and soundness properties over the whole
//! pipeline: frame algebra, structure axioms, induced curvature
//! symmetries, the plane bounds, and the minimizer.

use kmu_geometry::{
    chen_lemma, check_theorem1, check_theorem2, delta, fundamental_identity, min_sectional,
    orthonormalize, random_submanifold, sectional_curvature, validate_structure, DeltaOptions,
    Domain, KMuStructure, PlaneSection, SigmaMode, SubmanifoldPoint, Tolerances,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ambient_choices() -> impl Strategy<Value = (f64, Option<f64>)> {
    prop_oneof![
        Just((1.0, Some(-3.0))),
        Just((1.0, Some(2.0))),
        Just((0.5, None)),
        Just((0.0, None)),
    ]
}

fn structure(kappa: f64, c: Option<f64>) -> KMuStructure {
    KMuStructure::canonical(3, kappa, c).unwrap()
}

fn seeded_orthogonal(d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let cols: Vec<DVector<f64>> = (0..d)
            .map(|_| DVector::from_iterator(d, (0..d).map(|_| rng.random_range(-1.0..1.0))))
            .collect();
        if let Ok(frame) = orthonormalize(&cols) {
            if frame.len() == d {
                return frame.matrix().clone();
            }
        }
    }
}

fn random_plane(sub: &SubmanifoldPoint, seed: u64, in_distribution: bool) -> PlaneSection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sub.n();
    // The generators put xi in the last tangent slot, so zeroing the
    // last coordinate keeps the plane inside the contact distribution.
    let free = if in_distribution { n - 1 } else { n };
    loop {
        let mut a = DVector::zeros(n);
        let mut b = DVector::zeros(n);
        for i in 0..free {
            a[i] = rng.random_range(-1.0..1.0);
            b[i] = rng.random_range(-1.0..1.0);
        }
        let av = sub.tangent_frame().from_coords(&a);
        let bv = sub.tangent_frame().from_coords(&b);
        if let Ok(onb) = orthonormalize(&[av, bv]) {
            return PlaneSection::new(onb.col(0).unwrap(), onb.col(1).unwrap()).unwrap();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orthonormalize_yields_orthonormal_spanning_frames(
        d in 3usize..8,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..=d);
        let cols: Vec<DVector<f64>> = (0..k)
            .map(|_| DVector::from_iterator(d, (0..d).map(|_| rng.random_range(-5.0..5.0))))
            .collect();
        prop_assume!(cols.iter().all(|c| c.norm() > 1e-6));
        if let Ok(frame) = orthonormalize(&cols) {
            prop_assert!(frame.gram_residual() < 1e-9);
            for c in &cols {
                // Every input is reproduced by its coordinates in the
                // output frame: the span is preserved.
                let back = frame.from_coords(&frame.coords(c));
                prop_assert!((back - c).norm() < 1e-8 * c.norm().max(1.0));
            }
        }
    }

    #[test]
    fn structure_axioms_survive_orthogonal_conjugation(
        (kappa, c) in ambient_choices(),
        seed in any::<u64>(),
    ) {
        let s = structure(kappa, c);
        let d = s.dim();
        let q = seeded_orthogonal(d, seed);
        let conj = KMuStructure::from_parts(
            s.m(),
            s.kappa(),
            s.mu(),
            s.c(),
            &q * s.phi() * q.transpose(),
            &q * s.xi(),
            &q * s.h() * q.transpose(),
        ).unwrap();
        let report = validate_structure(&conj, 1e-8);
        prop_assert!(report.passed(), "worst residual {}", report.max_residual());
    }

    #[test]
    fn plane_invariants_are_rotation_invariant_and_bounded(
        (kappa, c) in ambient_choices(),
        n in 3usize..6,
        seed in any::<u64>(),
        angle in -3.0f64..3.0,
    ) {
        let s = structure(kappa, c);
        let sub = random_submanifold(&s, n, seed, SigmaMode::Contact, 0.6).unwrap();
        let plane = random_plane(&sub, seed ^ 0xabcd, false);
        let inv = sub.plane_invariants(&plane).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&inv.alpha));
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&inv.beta));
        let rotated = sub.plane_invariants(&plane.rotated(angle)).unwrap();
        prop_assert!((inv.alpha - rotated.alpha).abs() < 1e-10);
        prop_assert!((inv.beta - rotated.beta).abs() < 1e-10);
        prop_assert!((inv.gamma - rotated.gamma).abs() < 1e-10);
    }

    #[test]
    fn plane_restrictions_conjugate_under_rotation(
        (kappa, c) in ambient_choices(),
        n in 3usize..6,
        seed in any::<u64>(),
        angle in -3.0f64..3.0,
    ) {
        let s = structure(kappa, c);
        let sub = random_submanifold(&s, n, seed, SigmaMode::Contact, 0.6).unwrap();
        let plane = random_plane(&sub, seed ^ 0x77, false);
        let (h0, p0) = sub.plane_restrictions(&plane).unwrap();
        let (h1, p1) = sub.plane_restrictions(&plane.rotated(angle)).unwrap();
        // Traces and determinants of the restricted operators are
        // basis-free plane data.
        prop_assert!((h0.trace() - h1.trace()).abs() < 1e-10);
        prop_assert!((h0.determinant() - h1.determinant()).abs() < 1e-10);
        prop_assert!((p0.determinant() - p1.determinant()).abs() < 1e-10);
    }

    #[test]
    fn induced_tensor_has_curvature_symmetries(
        (kappa, c) in ambient_choices(),
        n in 3usize..5,
        seed in any::<u64>(),
        mode in prop_oneof![Just(SigmaMode::Contact), Just(SigmaMode::Raw)],
    ) {
        let s = structure(kappa, c);
        let sub = random_submanifold(&s, n, seed, mode, 0.8).unwrap();
        let t = sub.induced_tensor().unwrap();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = t.get(i, j, k, l);
                        prop_assert!((v + t.get(j, i, k, l)).abs() < 1e-9);
                        prop_assert!((v + t.get(i, j, l, k)).abs() < 1e-9);
                        prop_assert!((v - t.get(k, l, i, j)).abs() < 1e-9);
                        let cyc = v + t.get(j, k, i, l) + t.get(k, i, j, l);
                        prop_assert!(cyc.abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn chen_lemma_holds_on_random_constrained_tuples(
        body in prop::collection::vec(-3.0f64..3.0, 2..6),
    ) {
        let n = body.len() as f64;
        let sum: f64 = body.iter().sum();
        let sq: f64 = body.iter().map(|v| v * v).sum();
        let last = if body.len() == 2 {
            2.0 * body[0] * body[1]
        } else {
            sum * sum / (n - 1.0) - sq
        };
        let mut a = body.clone();
        a.push(last);
        let r = chen_lemma(&a, &Tolerances::default()).unwrap();
        prop_assert!(r.satisfied, "gap {}", r.gap);
    }

    #[test]
    fn chen_lemma_equality_on_constructed_tuples(
        a1 in -2.0f64..2.0,
        a2 in -2.0f64..2.0,
        extra in 0usize..3,
    ) {
        let mut body = vec![a1, a2];
        body.extend(std::iter::repeat(a1 + a2).take(1 + extra));
        let n = body.len() as f64;
        let sum: f64 = body.iter().sum();
        let sq: f64 = body.iter().map(|v| v * v).sum();
        let mut a = body.clone();
        a.push(sum * sum / (n - 1.0) - sq);
        let r = chen_lemma(&a, &Tolerances::default()).unwrap();
        prop_assert!(r.equality, "gap {}", r.gap);
    }

    #[test]
    fn scalar_identity_residual_is_negligible(
        (kappa, c) in ambient_choices(),
        n in 3usize..6,
        seed in any::<u64>(),
        mode in prop_oneof![Just(SigmaMode::Contact), Just(SigmaMode::Raw)],
        scale in 0.0f64..1.2,
    ) {
        let s = structure(kappa, c);
        let sub = random_submanifold(&s, n, seed, mode, scale).unwrap();
        let r = fundamental_identity(&sub, &Tolerances::default()).unwrap();
        prop_assert!(r.gap.abs() < 1e-8, "residual {}", r.gap);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plane_bound_gap_is_never_negative(
        (kappa, c) in ambient_choices(),
        n in 3usize..5,
        seed in any::<u64>(),
        mode in prop_oneof![Just(SigmaMode::Contact), Just(SigmaMode::Raw)],
        scale in 0.0f64..1.0,
    ) {
        let s = structure(kappa, c);
        let sub = random_submanifold(&s, n, seed, mode, scale).unwrap();
        let plane = random_plane(&sub, seed ^ 0x5eed, false);
        let r = check_theorem1(&sub, &plane, &Tolerances::default()).unwrap();
        prop_assert!(r.gap >= -1e-8, "gap {}", r.gap);
    }

    #[test]
    fn distribution_bound_gap_is_never_negative(
        (kappa, c) in ambient_choices(),
        n in 3usize..5,
        seed in any::<u64>(),
        scale in 0.0f64..1.0,
    ) {
        let s = structure(kappa, c);
        let sub = random_submanifold(&s, n, seed, SigmaMode::Contact, scale).unwrap();
        let plane = random_plane(&sub, seed ^ 0xd15c, true);
        let r = check_theorem2(&sub, &plane, &Tolerances::default()).unwrap();
        prop_assert!(r.gap >= -1e-8, "gap {}", r.gap);
    }

    #[test]
    fn plane_bound_sides_are_basis_free(
        (kappa, c) in ambient_choices(),
        n in 3usize..5,
        seed in any::<u64>(),
        angle in -3.0f64..3.0,
    ) {
        let s = structure(kappa, c);
        let sub = random_submanifold(&s, n, seed, SigmaMode::Contact, 0.7).unwrap();
        let plane = random_plane(&sub, seed ^ 0x10ad, false);
        let r0 = check_theorem1(&sub, &plane, &Tolerances::default()).unwrap();
        let r1 = check_theorem1(&sub, &plane.rotated(angle), &Tolerances::default()).unwrap();
        prop_assert!((r0.lhs - r1.lhs).abs() < 1e-9);
        prop_assert!((r0.rhs - r1.rhs).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn minimizer_never_exceeds_probed_planes(
        (kappa, c) in ambient_choices(),
        n in 3usize..5,
        seed in any::<u64>(),
    ) {
        let s = structure(kappa, c);
        let sub = random_submanifold(&s, n, seed, SigmaMode::Contact, 0.7).unwrap();
        let opts = DeltaOptions { restarts: 12, ..DeltaOptions::default() };
        let min = min_sectional(&sub, Domain::All, &opts).unwrap();
        for probe in 0..20u64 {
            let plane = random_plane(&sub, seed.wrapping_add(probe), false);
            let k = sectional_curvature(&sub, &plane).unwrap();
            prop_assert!(min.min_k <= k + 1e-9, "min {} probe {}", min.min_k, k);
        }
    }

    #[test]
    fn restricting_the_domain_cannot_lower_the_min(
        (kappa, c) in ambient_choices(),
        n in 3usize..5,
        seed in any::<u64>(),
    ) {
        let s = structure(kappa, c);
        let sub = random_submanifold(&s, n, seed, SigmaMode::Contact, 0.7).unwrap();
        let opts = DeltaOptions { restarts: 12, ..DeltaOptions::default() };
        let all = delta(&sub, Domain::All, &opts).unwrap();
        let dist = delta(&sub, Domain::D, &opts).unwrap();
        prop_assert!(dist.min_k >= all.min_k - 1e-9,
            "distribution min {} below global min {}", dist.min_k, all.min_k);
    }
}
