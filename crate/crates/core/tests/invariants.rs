use proptest::prelude::*;
use ultraflat::constructions::descendant;
use ultraflat::extension::choose_ramification;
use ultraflat::indices::{gamma_mixed_sequences, IndexEstimate};
use ultraflat::weight::{associated_matrix, log_h_from_sequence, omega_from_sequence};
use ultraflat::{
    check_property, mixed_gamma_statistic, Property, SequenceTransform, WeightFunction, WeightOp, WeightSequence,
};

/// Normalized log-convex sequences: `ln μ_1 ≥ 0`, nondecreasing increments.
fn log_convex(max_len: usize) -> impl Strategy<Value = WeightSequence<f64>> {
    (0.0..1.0f64, prop::collection::vec(0.0..0.4f64, 16..max_len)).prop_map(|(first, steps)| {
        let mut q = vec![0.0, first];
        for s in steps {
            let last = *q.last().unwrap();
            q.push(last + s);
        }
        WeightSequence::from_log_quotients(q, "random").unwrap()
    })
}

/// Sequences with `ln μ_p = e ln p + c_p`, `c_p` nondecreasing and bounded:
/// polynomially growing quotients as in the examples.
fn polynomial_growth() -> impl Strategy<Value = WeightSequence<f64>> {
    (1.2..3.5f64, prop::collection::vec(0.0..0.02f64, 64..256)).prop_map(|(e, bumps)| {
        let mut q = vec![0.0];
        let mut c = 0.0;
        for (i, b) in bumps.iter().enumerate() {
            c += b;
            q.push(e * ((i + 1) as f64).ln() + c);
        }
        WeightSequence::from_log_quotients(q, "poly").unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn values_are_prefix_sums_of_quotients(m in log_convex(200)) {
        let mut acc = 0.0f64;
        for p in 1..=m.horizon() {
            acc += m.log_quotient(p);
            prop_assert!((m.log_value(p) - acc).abs() <= 1e-9 * acc.abs().max(1.0));
        }
    }

    #[test]
    fn root_of_value_is_below_quotient(m in log_convex(200)) {
        for p in 1..=m.horizon() {
            prop_assert!(m.log_value(p) / p as f64 <= m.log_quotient(p) + 1e-12);
        }
    }

    #[test]
    fn nq_verdict_is_invariant_under_roots(m in polynomial_growth(), r in 0.5..3.0f64) {
        let direct = check_property(&m, Property::NonQuasianalytic(r)).unwrap();
        let root = m.transform(SequenceTransform::Power(1.0 / r)).unwrap();
        let via_root = check_property(&root, Property::NonQuasianalytic(1.0)).unwrap();
        prop_assert_eq!(direct.verdict, via_root.verdict);
    }

    #[test]
    fn mixed_statistic_is_invariant_under_roots(
        m in polynomial_growth(),
        extra in 0.0..1.0f64,
        r in 0.5..2.5f64,
    ) {
        let n = m.transform(SequenceTransform::Power(1.0 + extra)).unwrap();
        let direct = mixed_gamma_statistic(&m, &n, r).unwrap();
        let mr = m.transform(SequenceTransform::Power(1.0 / r)).unwrap();
        let nr = n.transform(SequenceTransform::Power(1.0 / r)).unwrap();
        let via_root = mixed_gamma_statistic(&mr, &nr, 1.0).unwrap();
        prop_assert!((direct.sup - via_root.sup).abs() <= 1e-9 * direct.sup.abs().max(1.0));
    }

    #[test]
    fn h_is_dual_to_omega(m in polynomial_growth(), frac in 0.0..1.0f64) {
        let top = m.log_validity_radius();
        let t = (-(frac * 0.99 * top) - 0.01).exp();
        let lh = log_h_from_sequence(&m, t).unwrap();
        let om = omega_from_sequence(&m, 1.0 / t).unwrap();
        prop_assert!((lh + om).abs() <= 1e-10 * om.abs().max(1.0));
    }

    #[test]
    fn omega_of_root_scales(m in polynomial_growth(), r in 1.1..3.0f64, frac in 0.0..1.0f64) {
        // ω_{M^{1/r}}(t) = (1/r) ω_M(t^r) wherever t^r is inside the horizon.
        let root = m.transform(SequenceTransform::Power(1.0 / r)).unwrap();
        let ln_t = frac * 0.95 * m.log_validity_radius() / r;
        let lhs = omega_from_sequence(&root, ln_t.exp()).unwrap();
        let rhs = omega_from_sequence(&m, (r * ln_t).exp()).unwrap() / r;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matrix_rows_grow_in_l_and_satisfy_mg(r in 1.3..3.0f64, l in 0.1..2.0f64, j in 1usize..30, k in 1usize..30) {
        let w = WeightFunction::from_sequence(WeightSequence::gevrey(r, 512).unwrap()).unwrap();
        let matrix = associated_matrix(&w, vec![l, 2.0 * l]).unwrap();
        let small = matrix.log_entry(l, j).unwrap();
        let large = matrix.log_entry(2.0 * l, j).unwrap();
        prop_assert!(small <= large + 1e-9);
        let lhs = matrix.log_entry(l, j + k).unwrap();
        let rhs = large + matrix.log_entry(2.0 * l, k).unwrap();
        prop_assert!(lhs <= rhs + 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn index_brackets_are_ordered(rm in 0.5..1.5f64, gap in 0.3..1.5f64) {
        let m = WeightSequence::gevrey(rm, 1024).unwrap();
        let n = WeightSequence::gevrey(rm + gap, 1024).unwrap();
        let est = gamma_mixed_sequences(&m, &n).unwrap();
        prop_assert!(est.lo <= est.estimate && est.estimate <= est.hi);
        // γ(M,N) ≤ μ(N) = rm + gap, up to one bisection step.
        prop_assert!(est.lo <= rm + gap + 0.05);
    }

    #[test]
    fn descendant_dominates_gevrey(r in 0.5..1.8f64, extra in 0.3..1.5f64) {
        let n = WeightSequence::gevrey(r + extra, 512).unwrap();
        let d = descendant(&n, r).unwrap();
        for k in 1..=512 {
            prop_assert!(d.l.log_quotient(k) >= r * (k as f64).ln() - 1e-9);
        }
    }

    #[test]
    fn ramification_meets_its_constraints(gamma in 0.1..3.0f64, room in 0.001..2.0f64, a in 0.1..8.0f64) {
        let big = gamma + room;
        let bracket = IndexEstimate {
            estimate: big, lo: big, hi: big + 0.02, method: "fixed".into(), trace: vec![], unbounded: false, notes: vec![],
        };
        let p = choose_ramification(gamma, &bracket, a).unwrap();
        prop_assert!(gamma < p.delta && p.delta < big);
        prop_assert!(p.s * p.delta < 1.0 && 1.0 < p.s * big);
    }

    #[test]
    fn iota_is_an_involution(s in 1.1..4.0f64, t in 1e-3..1e3f64) {
        let w = WeightFunction::power(s).unwrap();
        let twice = w.transform(WeightOp::Iota).unwrap().transform(WeightOp::Iota).unwrap();
        prop_assert!((twice.eval(t).unwrap() - w.eval(t).unwrap()).abs() <= 1e-12 * w.eval(t).unwrap().max(1.0));
    }
}
