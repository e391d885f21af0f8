use approx::assert_relative_eq;
use ultraflat::constructions::{
    descendant, descendant_mg_check, factorial_block_example, heir_pair_for_sector, recursive_block_example,
    mixed_pair_example, Variant,
};
use ultraflat::indices::{gamma_mixed_sequences, RESOLUTION};
use ultraflat::report::bounded_verdict;
use ultraflat::{check_property, Error, Property, Verdict, WeightFunction, WeightSequence};

/// `Σ_{j > n} j^{-2}` by Euler–Maclaurin.
fn inverse_square_tail(n: usize) -> f64 {
    let n = n as f64;
    1.0 / n - 1.0 / (2.0 * n * n) + 1.0 / (6.0 * n.powi(3)) - 1.0 / (30.0 * n.powi(5))
}

#[test]
fn descendant_of_gevrey_square_matches_direct_sums() {
    let big_p = 1024;
    let n = WeightSequence::<f64>::gevrey(2.0, big_p).unwrap();
    let d = descendant(&n, 1.0).unwrap();
    // τ_k = 1/k + Σ_{j ≥ k} 1/j², σ_k = τ_1 k / τ_k.
    let mut suffix = vec![0.0; big_p + 2];
    suffix[big_p + 1] = inverse_square_tail(big_p);
    for k in (1..=big_p).rev() {
        suffix[k] = suffix[k + 1] + 1.0 / (k * k) as f64;
    }
    let tau = |k: usize| 1.0 / k as f64 + suffix[k];
    for k in [1usize, 2, 3, 10, 100, 1000] {
        let sigma = tau(1) * k as f64 / tau(k);
        assert_relative_eq!(d.sigma.log_quotient(k).exp(), sigma, max_relative = 1e-3);
    }
    assert_eq!(d.sigma.log_quotient(1), 0.0);
    // σ_k / k² stays between positive bounds.
    let ratios: Vec<f64> = (1..=big_p).map(|k| (d.sigma.log_quotient(k) - 2.0 * (k as f64).ln()).exp()).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(lo > 0.5 && hi < 2.0 + 2.0 * 1.6449, "{lo} {hi}");
    assert!(d.checks.iter().all(|c| c.verdict.holds()), "{:?}", d.checks);
}

#[test]
fn descendant_needs_nonquasianalyticity() {
    let n = WeightSequence::<f64>::gevrey(1.0, 512).unwrap();
    assert!(matches!(descendant(&n, 1.0), Err(Error::Divergent(_))));
}

#[test]
fn descendant_of_factorial_blocks_outgrows_gevrey() {
    let n = factorial_block_example::<f64>(40319).unwrap();
    let d = descendant(&n, 1.0).unwrap();
    let excess = |k: usize| d.l.log_quotient(k) - (k as f64).ln();
    assert!(excess(40319) > excess(5039) && excess(5039) > excess(719) && excess(719) > excess(119));
}

#[test]
fn descendant_is_maximal_among_gevrey_minorants() {
    let n = WeightSequence::<f64>::gevrey(2.0, 1024).unwrap();
    let d = descendant(&n, 1.0).unwrap();
    for order in [1.0, 1.5] {
        let trace: Vec<(f64, f64)> = (1..=1024)
            .map(|k| (k as f64, (order * (k as f64).ln() - d.sigma.log_quotient(k)).exp()))
            .collect();
        assert_eq!(bounded_verdict(&trace).0, Verdict::Holds, "order {order}");
    }
}

#[test]
fn descendant_grows_with_r() {
    let n = WeightSequence::<f64>::gevrey(3.0, 1024).unwrap();
    let narrow = descendant(&n, 1.0).unwrap();
    let wide = descendant(&n, 2.0).unwrap();
    let trace: Vec<(f64, f64)> = (1..=1024)
        .map(|k| (k as f64, (wide.sigma.log_quotient(k) - narrow.sigma.log_quotient(k)).exp()))
        .collect();
    assert_eq!(bounded_verdict(&trace).0, Verdict::Holds);
}

#[test]
fn ramified_descendant_keeps_the_index() {
    let n = WeightSequence::<f64>::gevrey(2.5, 1024).unwrap();
    for r in [1.0, 1.5] {
        let d = descendant(&n, r).unwrap();
        let e = gamma_mixed_sequences(&d.l, &n).unwrap();
        assert!(e.hi >= r - RESOLUTION, "r = {r}: {e:?}");
    }
}

#[test]
fn mg_criterion_for_gevrey() {
    let check = descendant_mg_check(&WeightSequence::<f64>::gevrey(2.0, 2048).unwrap()).unwrap();
    assert!(check.criterion.verdict.holds() && check.descendant_mg.verdict.holds() && check.consistent);
}

#[test]
fn factorial_blocks_mg_statistics() {
    let n = factorial_block_example::<f64>(40319).unwrap();
    let check = descendant_mg_check(&n).unwrap();
    assert!(check.alternative.witness >= 0.25, "{}", check.alternative.witness);
    assert!(check.descendant_mg.verdict.holds());
    assert!(check_property(&n, Property::ModerateGrowth).unwrap().verdict.fails());
}

#[test]
fn factorial_block_ratios_and_sums() {
    let n = factorial_block_example::<f64>(80639).unwrap();
    let mut fact = 1usize;
    for p in 1..=7usize {
        fact *= p;
        let last = fact * (p + 1) - 1;
        let ratio = (n.log_quotient(2 * last) - n.log_quotient(last)).exp();
        let expected = 2.0 * ((p + 1) * (p + 1)) as f64 / p as f64;
        assert_relative_eq!(ratio, expected, max_relative = 1e-12);
    }
    // Blocks 1..=5 contribute 1/2 + … + 1/32.
    let sum: f64 = (1..=719).map(|k| (-n.log_quotient(k)).exp()).sum();
    assert_relative_eq!(sum, 1.0 - 1.0 / 32.0, max_relative = 1e-13);
}

#[test]
fn heir_of_cube_root() {
    let w = WeightFunction::power(3.0).unwrap();
    let (sigma, cert) = heir_pair_for_sector(&w, 2.0).unwrap();
    for t in [1.0f64, 8.0, 1e3, 1e6] {
        assert_relative_eq!(sigma.eval(t).unwrap(), 3.0 * t.cbrt() - 3.0, max_relative = 1e-8, epsilon = 1e-10);
        assert!(sigma.eval(t).unwrap() + 3.0 >= w.eval(t).unwrap());
    }
    assert!(cert.mu_omega.contains(3.0));
    assert!(cert.probe.verdict.holds() && cert.bracket.hi >= 2.0);
}

#[test]
fn heir_refuses_r_beyond_the_order() {
    let w = WeightFunction::power(3.0).unwrap();
    assert!(matches!(heir_pair_for_sector(&w, 3.5), Err(Error::Precondition(_))));
}

#[test]
fn recursive_examples_and_moderate_growth() {
    // The no-mg variant's blow-up of μ_{2p}/μ_p first shows in the third
    // block, which starts at d_3 = 677² + 1.
    let mg = recursive_block_example::<f64>(2.0, Variant::Mg, 1 << 20).unwrap();
    let no_mg = recursive_block_example::<f64>(2.0, Variant::NoMg, 1 << 20).unwrap();
    assert_eq!(no_mg.d[2], 458_330);
    let verdict = |ex: &ultraflat::constructions::RecursiveBlockExample<f64>| {
        check_property(&ex.sequence, Property::ModerateGrowth).unwrap().verdict
    };
    assert_eq!(verdict(&mg), Verdict::Holds);
    assert_eq!(verdict(&no_mg), Verdict::Fails);
    for ex in [&mg, &no_mg] {
        assert!(ex.checks[0].verdict.holds() && ex.checks[1].verdict.holds());
    }
}

#[test]
fn mixed_pair_constraints() {
    assert_eq!(mixed_pair_example::<f64>(1.2, 2.0, Variant::Mg, 256).unwrap().constraint, 1.2 * 1.4);
    let e = mixed_pair_example::<f64>(1.2, 2.0, Variant::NoMg, 256).unwrap_err();
    assert!(e.to_string().contains("2.8800"), "{e}");
    let ok = mixed_pair_example::<f64>(1.2, 3.0, Variant::NoMg, 256).unwrap();
    assert!(ok.diagnostics[0].verdict.holds());
    assert!(mixed_pair_example::<f64>(2.0, 1.5, Variant::Mg, 256).is_err());
}
