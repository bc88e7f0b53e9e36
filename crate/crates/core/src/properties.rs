//! Property tests over randomly drawn weights.

use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use crate::analysis::{
    classify_operator, girard_consistency, hessian_spectrum, minor_determinant_check,
    monotone_pair, monotonicity_check, omega_sign_audit, volume_identity_error,
};
use crate::complex::{MetricAssignment, Preset};
use crate::flow::{assemble_laplacian, curvature, curvature_rhs};
use crate::tetra::{complement, ConformalTetra};

fn weight() -> impl Strategy<Value = f64> {
    (-std::f64::consts::LN_10..std::f64::consts::LN_10).prop_map(f64::exp)
}

fn tetra() -> impl Strategy<Value = ConformalTetra> {
    [weight(), weight(), weight(), weight()]
        .prop_map(|r| ConformalTetra::new(r).unwrap())
        .prop_filter("nondegenerate", |t| !t.is_degenerate())
}

fn preset_state() -> impl Strategy<Value = (Preset, Vec<f64>)> {
    (any::<bool>(), proptest::collection::vec(weight(), 5)).prop_map(|(simplex, w)| {
        let p = if simplex {
            Preset::Boundary4Simplex
        } else {
            Preset::DoubleTetrahedron
        };
        (p, w)
    })
}

fn build(p: Preset, w: &[f64]) -> Option<(crate::SimplicialComplex, MetricAssignment)> {
    let (c, _) = p.build();
    let m = MetricAssignment::from_dense(&c, &w[..c.num_vertices()]).ok()?;
    curvature(&c, &m).ok()?;
    Some((c, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn angle_ranges_and_sum(t in tetra()) {
        let s = t.scalars().unwrap();
        prop_assert!(s.volume > 0.0);
        prop_assert!(s.dihedral.iter().all(|&b| b > 0.0 && b < PI));
        prop_assert!(s.solid.iter().all(|&a| a > 0.0 && a < TAU));
        prop_assert!(s.solid.iter().sum::<f64>() <= TAU);
    }

    #[test]
    fn jacobian_identities(t in tetra()) {
        let block = t.omega_block().unwrap();
        prop_assert!(block.max_row_residual(&t.weights()) <= 1e-12);
        prop_assert!(block.symmetry_defect() <= 1e-12);
        prop_assert!((0..4).all(|a| block.dalpha[a][a] < 0.0));
        let r = t.weights();
        for a in 0..4 {
            let off: f64 = (0..4).filter(|&b| b != a).map(|b| block.omega[a][b]).sum();
            let diag = -block.dalpha[a][a] * r[a];
            prop_assert!((off - diag).abs() <= 1e-12 * diag.abs().max(off.abs()) * 10.0);
        }
    }

    #[test]
    fn independent_geometry_agrees(t in tetra()) {
        prop_assert!(girard_consistency(&t).unwrap() <= 1e-10);
        prop_assert!(volume_identity_error(&t).unwrap() <= 1e-9);
        let closed = t.weights().iter().product::<f64>() * t.nondegeneracy_q().sqrt() / 3.0;
        prop_assert!((t.volume().unwrap() - closed).abs() <= 1e-9 * closed);
    }

    #[test]
    fn q_gradient_euler_identity(t in tetra()) {
        let g = t.q_gradient();
        let r = t.weights();
        let dot: f64 = (0..4).map(|a| g[a] * r[a]).sum();
        let q = t.nondegeneracy_q();
        let scale: f64 = (0..4).map(|a| (g[a] * r[a]).abs()).sum();
        prop_assert!((dot + 2.0 * q).abs() <= 1e-12 * scale);
    }

    #[test]
    fn homogeneity(t in tetra(), log_lambda in -7.0f64..7.0) {
        let lambda = log_lambda.exp();
        let s = t.scaled(lambda).unwrap();
        let (a, b) = (t.solid_angles().unwrap(), s.solid_angles().unwrap());
        prop_assert!((0..4).all(|i| (a[i] - b[i]).abs() <= 1e-12 * TAU));
        let q_ratio = s.nondegeneracy_q() * lambda * lambda / t.nondegeneracy_q();
        prop_assert!((q_ratio - 1.0).abs() <= 1e-9);
        let (ft, fs) = (t.face_geometry().1, s.face_geometry().1);
        prop_assert!((0..4).all(|i| (fs[i] / (ft[i] * lambda * lambda) - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn trailing_slot_permutation(t in tetra(), perm in Just([1usize, 2, 3]).prop_shuffle()) {
        let r = t.weights();
        let p = ConformalTetra::new([r[0], r[perm[0]], r[perm[1]], r[perm[2]]]).unwrap();
        let (a, b) = (t.solid_angles().unwrap(), p.solid_angles().unwrap());
        prop_assert!((a[0] - b[0]).abs() <= 1e-12);
        for k in 0..3 {
            prop_assert!((b[k + 1] - a[perm[k]]).abs() <= 1e-12);
        }
    }

    #[test]
    fn spectrum_and_minors(t in tetra()) {
        let s = hessian_spectrum(&t).unwrap();
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(s.eigenvalues[3].abs() <= 1e-9 * s.spectral_radius);
        prop_assert!(s.eigenvalues[2] < -1e-12 * s.spectral_radius);
        prop_assert!(s.null_vector_angle >= 0.0 && s.null_vector_angle <= 1e-7);
        prop_assert!(minor_determinant_check(&t).unwrap() <= 1e-8);
    }

    #[test]
    fn omega_signs(t in tetra()) {
        let report = omega_sign_audit(&t).unwrap();
        prop_assert!(report.is_consistent(), "{:?}", report);
        let r = t.weights();
        for [a, b] in report.negative_pairs {
            let [c, d] = complement(a, b);
            prop_assert!(r[a] > r[c].min(r[d]) && r[b] > r[c].min(r[d]));
        }
    }

    #[test]
    fn solid_angles_order_reverses_weights(t in tetra()) {
        let r = t.weights();
        let alpha = t.solid_angles().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!(monotone_pair(r[i], r[j], -alpha[i], -alpha[j]));
            }
        }
    }

    #[test]
    fn dbeta_negative_at_minimum(t in tetra()) {
        let i = t.min_slot();
        let r = t.weights();
        for j in (0..4).filter(|&j| j != i) {
            if r[j] > r[i] {
                prop_assert!(t.dbeta_dri(i, j).unwrap() < 0.0);
            }
        }
    }

    #[test]
    fn preset_operator_properties((p, w) in preset_state()) {
        prop_assume!(build(p, &w).is_some());
        let (c, m) = build(p, &w).unwrap();
        let class = classify_operator(&c, &m).unwrap();
        prop_assert_eq!(class.parabolic, class.negative_edges.is_empty());
        if class.parabolic {
            prop_assert!(class.parabolic_like_for_k);
        }
        prop_assert!(monotonicity_check(&c, &m).unwrap().all);
        prop_assert!(class.parabolic_like_for_k);

        let lap = assemble_laplacian(&c, &m).unwrap();
        prop_assert!(lap.self_adjointness_defect() <= 1e-12);
        let k = curvature(&c, &m).unwrap().k;
        let applied = lap.apply(&k);
        let rhs = curvature_rhs(&c, &m).unwrap();
        let scale = applied.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        prop_assert!(rhs.iter().zip(&applied).all(|(a, b)| (a - b).abs() <= 1e-10 * scale));
    }

    #[test]
    fn curvature_is_scale_free((p, w) in preset_state(), log_lambda in -7.0f64..7.0) {
        prop_assume!(build(p, &w).is_some());
        let (c, m) = build(p, &w).unwrap();
        let k = curvature(&c, &m).unwrap().k;
        let ks = curvature(&c, &m.scaled(log_lambda.exp()).unwrap()).unwrap().k;
        prop_assert!(k.iter().zip(&ks).all(|(a, b)| (a - b).abs() <= 1e-11));
    }
}
