//! Properties of the feedback bound, its constraint system, and the
//! Fourier-Motzkin cross-check.

mod common;

use common::{random_fb_scheme, random_product_channel, rng, OracleDist};
use keyrate_core::channel::{build_joint_fb, S, V1, V2, X, Y2, Z};
use keyrate_core::prob::{ConditionalPmf, Variable};
use keyrate_core::{
    build_fb_constraints, eval_inner_fb, fm_eliminate, positive_part, reduce_to_wiretap,
    verify_fm_matches_closed_form, FeedbackScheme, WiretapMode,
};

#[test]
fn feedback_bound_matches_oracle_on_random_instances() {
    let mut r = rng(2001);
    for _ in 0..50 {
        let channel = common::random_binary_channel(&mut r);
        let scheme = random_fb_scheme(&mut r, &channel, (2, 2));
        let joint = build_joint_fb(&channel, &scheme).unwrap();
        let p = eval_inner_fb(&joint).unwrap();
        let o = OracleDist::from_joint(&joint);
        let r1 = positive_part(
            (o.mi(&[X, S], &[V1], &[]) - o.mi(&[V1], &[Y2], &[]))
                .min(o.mi(&[X, S], &[V1], &[]) - o.mi(&[V1], &[Z], &[])),
        );
        let r2 = positive_part(
            (o.mi(&[X, S], &[V2], &[]) - o.mi(&[V2], &["Y1"], &[]))
                .min(o.mi(&[X, S], &[V2], &[]) - o.mi(&[V2], &[Z], &[])),
        );
        let sum = positive_part(o.mi(&[X, S], &[V1, V2], &[]) - o.mi(&[V1, V2], &[Z], &[]));
        assert!((p.r1_max - r1).abs() < 1e-9, "{} vs {}", p.r1_max, r1);
        assert!((p.r2_max - r2).abs() < 1e-9);
        assert!((p.sum_max - sum).abs() < 1e-9);
    }
}

#[test]
fn factorization_identity_holds_on_composed_joints() {
    let mut r = rng(2002);
    for _ in 0..50 {
        let channel = common::random_binary_channel(&mut r);
        let scheme = random_fb_scheme(&mut r, &channel, (3, 2));
        let joint = build_joint_fb(&channel, &scheme).unwrap();
        let lhs = joint.entropy(&[V1], &[V2, Y2]).unwrap();
        let rhs = joint.entropy(&[V1], &[Y2]).unwrap();
        assert!((lhs - rhs).abs() < 1e-10, "H(V1|V2,Y2)={lhs} H(V1|Y2)={rhs}");
        let lhs2 = joint.entropy(&[V2], &[V1, "Y1"]).unwrap();
        let rhs2 = joint.entropy(&[V2], &["Y1"]).unwrap();
        assert!((lhs2 - rhs2).abs() < 1e-10);
    }
}

#[test]
fn single_receiver_reduction_matches_one_receiver_formula() {
    // Collapse receiver 2: the key-1 cap reduces to [I(X,S;V1)-I(V1;Z)]+,
    // recomputed through the oracle.
    let mut r = rng(2003);
    for _ in 0..20 {
        let channel = common::random_binary_channel(&mut r);
        let reduced = reduce_to_wiretap(&channel, WiretapMode::FbKeepRx1).unwrap();
        let x = ConditionalPmf::new(
            vec![Variable::new(X, 2)],
            vec![Variable::new(S, 2)],
            common::random_rows(&mut r, 2, 2),
        )
        .unwrap();
        let v1 = ConditionalPmf::new(
            vec![Variable::new(V1, 2)],
            vec![Variable::new("Y1", 2)],
            common::random_rows(&mut r, 2, 2),
        )
        .unwrap();
        let v2 = ConditionalPmf::new(
            vec![Variable::new(V2, 1)],
            vec![Variable::new(Y2, 1)],
            vec![1.0],
        )
        .unwrap();
        let scheme = FeedbackScheme::new(x, v1, v2).unwrap();
        let joint = build_joint_fb(&reduced, &scheme).unwrap();
        let p = eval_inner_fb(&joint).unwrap();
        let o = OracleDist::from_joint(&joint);
        let want = positive_part(o.mi(&[X, S], &[V1], &[]) - o.mi(&[V1], &[Z], &[]));
        assert!(
            (p.r1_max - want).abs() < 1e-12,
            "r1_max {} vs one-receiver formula {want}",
            p.r1_max
        );
        // The cross-receiver term vanishes with the collapsed output.
        assert!(p.terms.i_v1_y2.abs() < 1e-12);
    }
}

#[test]
fn constraint_entropies_match_direct_recomputation() {
    let mut r = rng(2004);
    for _ in 0..20 {
        let channel = random_product_channel(&mut r);
        let scheme = random_fb_scheme(&mut r, &channel, (2, 2));
        let joint = build_joint_fb(&channel, &scheme).unwrap();
        let e = keyrate_core::region::fb::fb_entropies(&joint).unwrap();
        let checks = [
            (e.h_v1_given_xs, joint.entropy(&[V1], &[X, S]).unwrap()),
            (e.h_v2_given_xs, joint.entropy(&[V2], &[X, S]).unwrap()),
            (e.h_v1v2_given_xs, joint.entropy(&[V1, V2], &[X, S]).unwrap()),
            (e.h_v1_given_z, joint.entropy(&[V1], &[Z]).unwrap()),
            (e.h_v2_given_z, joint.entropy(&[V2], &[Z]).unwrap()),
            (e.h_v1v2_given_z, joint.entropy(&[V1, V2], &[Z]).unwrap()),
            (e.h_v1_given_v2y2, joint.entropy(&[V1], &[V2, Y2]).unwrap()),
            (e.h_v2_given_v1y1, joint.entropy(&[V2], &[V1, "Y1"]).unwrap()),
        ];
        for (a, b) in checks {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn fm_projection_matches_closed_form_on_product_kernels() {
    // With conditionally independent output streams the quantizers are
    // conditionally independent given (X,S), and the projected constraint
    // system coincides with the closed form everywhere on the grid.
    let mut r = rng(2005);
    for i in 0..50 {
        let channel = random_product_channel(&mut r);
        let scheme = random_fb_scheme(&mut r, &channel, (2, 2));
        let joint = build_joint_fb(&channel, &scheme).unwrap();
        let report = verify_fm_matches_closed_form(&joint, 0.01, 1e-6, false).unwrap();
        assert!(
            report.quantizer_coupling.abs() < 1e-10,
            "instance {i}: coupling {}",
            report.quantizer_coupling
        );
        assert!(
            report.disagreements.is_empty(),
            "instance {i}: first disagreement {:?}",
            report.disagreements.first()
        );
        assert!(report.identity_gap_rx1 < 1e-10);
        assert!(report.identity_gap_rx2 < 1e-10);
    }
}

#[test]
fn fm_projection_invariant_under_inequality_order() {
    let mut r = rng(2006);
    for _ in 0..10 {
        let channel = random_product_channel(&mut r);
        let scheme = random_fb_scheme(&mut r, &channel, (2, 2));
        let joint = build_joint_fb(&channel, &scheme).unwrap();
        let sys = build_fb_constraints(&joint, false).unwrap();
        let mut reversed = sys.clone();
        reversed.inequalities.reverse();
        let a = fm_eliminate(&sys, &["Rp1", "Rp2"]).unwrap();
        let b = fm_eliminate(&reversed, &["Rp1", "Rp2"]).unwrap();
        // Membership-equivalent over a grid.
        for i in 0..=60 {
            for j in 0..=60 {
                let pt = [i as f64 * 0.02, j as f64 * 0.02];
                assert_eq!(
                    a.contains(&pt, 1e-9),
                    b.contains(&pt, 1e-9),
                    "order changed the feasible set at {pt:?}"
                );
            }
        }
    }
}

#[test]
fn literal_cross_pair_flag_changes_the_charged_rate() {
    // Under the literal index pairing the second cross-receiver constraint
    // charges R1+Rp1, so R2 escapes that cap.
    let mut r = rng(2007);
    let channel = random_product_channel(&mut r);
    let scheme = random_fb_scheme(&mut r, &channel, (2, 2));
    let joint = build_joint_fb(&channel, &scheme).unwrap();
    let symmetric = build_fb_constraints(&joint, false).unwrap();
    let literal = build_fb_constraints(&joint, true).unwrap();
    assert_eq!(symmetric.inequalities.len(), literal.inequalities.len());
    let row_sym = &symmetric.inequalities[7];
    let row_lit = &literal.inequalities[7];
    assert_eq!(row_sym.constant, row_lit.constant);
    assert_ne!(row_sym.coeffs, row_lit.coeffs);
}
