use proptest::prelude::*;

use wcep::classic;
use wcep::harness::{generate_pair, GeneratorSpec, VerificationReport, WeightMode};
use wcep::solver::{solve_constraints, MatrixConstraint};
use wcep::weighted::{self, core_ep_decompose};
use wcep::{CMatrix, ToleranceConfig, WeightedPair, C64};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn mode() -> impl Strategy<Value = WeightMode> {
    prop::sample::select(WeightMode::ALL.to_vec())
}

fn instance() -> impl Strategy<Value = GeneratorSpec> {
    (2usize..=6, 0usize..=3, mode(), any::<u64>())
        .prop_map(|(n, k, m, seed)| GeneratorSpec::new(n, k.min(n), m, seed))
}

fn complex_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n).prop_map(move |v| {
        CMatrix::from_vec(
            n,
            n,
            v.into_iter().map(|(re, im)| C64::new(re, im)).collect(),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn weighted_core_ep_routes_agree(spec in instance()) {
        let pair = generate_pair(&spec).unwrap();
        let t = tol();
        let direct = weighted::w_core_ep_direct(&pair, &t).unwrap();
        prop_assert!(direct.verified(&t), "{:?}", direct.failing(&t));
        let g = weighted::w_core_ep_gdrazin(&pair, &t).unwrap().value;
        let o = weighted::w_core_ep_13w(&pair, &t).unwrap().value;
        prop_assert!(direct.value.distance(&g) < 1e-8);
        prop_assert!(direct.value.distance(&o) < 1e-8);
    }

    #[test]
    fn unit_weight_reduces_to_core_ep(spec in instance()) {
        let a = generate_pair(&GeneratorSpec { weight_mode: WeightMode::Identity, ..spec }).unwrap().a;
        let t = tol();
        let pair = WeightedPair::unweighted(a.clone()).unwrap();
        let weighted = weighted::w_core_ep_direct(&pair, &t).unwrap().value;
        prop_assert!(weighted.distance(&classic::core_ep(&a, &t).unwrap().value) < 1e-8);
        let core = classic::core(&a, &t).unwrap();
        let w_core = weighted::w_core(&pair, &t).unwrap();
        prop_assert_eq!(core.exists, w_core.exists);
        if core.exists {
            prop_assert!(core.value.distance(&w_core.value) < 1e-8);
        }
    }

    #[test]
    fn weighted_core_exists_iff_low_index(spec in instance()) {
        let pair = generate_pair(&spec).unwrap();
        let t = tol();
        let wc = weighted::w_core(&pair, &t).unwrap();
        let g = classic::group(&pair.aw(), &t).unwrap();
        if wc.exists {
            prop_assert!(wc.verified(&t), "{:?}", wc.failing(&t));
            // On its domain the weighted core inverse is the weighted core-EP inverse.
            let ep = weighted::w_core_ep_direct(&pair, &t).unwrap().value;
            prop_assert!(wc.value.distance(&ep) < 1e-8);
        }
        if spec.weight_mode != WeightMode::RandomSingular {
            prop_assert_eq!(wc.exists, g.exists);
        }
    }

    #[test]
    fn decomposition_recovers_a(spec in instance()) {
        let pair = generate_pair(&spec).unwrap();
        let d = core_ep_decompose(&pair, &tol()).unwrap();
        prop_assert!(d.verified(&tol()), "{:?}", d.residuals);
        prop_assert!(pair.a.distance(&(&d.z + &d.y)) < 1e-12);
    }

    #[test]
    fn drazin_and_moore_penrose_certify(a in (2usize..=5).prop_flat_map(complex_matrix)) {
        let t = tol();
        let mp = classic::moore_penrose(&a, &t).unwrap();
        prop_assert!(mp.verified(&t), "{:?}", mp.failing(&t));
        let d = classic::drazin(&a, &t).unwrap();
        prop_assert!(d.verified(&t), "{:?}", d.failing(&t));
    }

    #[test]
    fn solver_recovers_consistent_systems(
        (l, r, x) in (2usize..=4).prop_flat_map(|n| (complex_matrix(n), complex_matrix(n), complex_matrix(n)))
    ) {
        let n = l.rows();
        let target = l.matmul(&x).matmul(&r);
        let sol = solve_constraints((n, n), &[MatrixConstraint::single(l.clone(), r.clone(), target.clone())], &tol()).unwrap();
        prop_assert!(sol.feasible);
        let got = l.matmul(&sol.solution).matmul(&r);
        prop_assert!(got.distance(&target) <= 1e-8 * (1.0 + target.frobenius_norm()));
    }

    #[test]
    fn report_json_round_trips(
        suite in "[A-Za-z0-9.-]{1,20}",
        trials in 0usize..10_000,
        failures in 0usize..100,
        worst in 0.0f64..1e3,
        seed in any::<u64>(),
        notes in ".{0,80}",
    ) {
        let r = VerificationReport { suite, trials, failures, worst_residual: worst, seed, notes };
        prop_assert_eq!(VerificationReport::from_json(&r.to_json()).unwrap(), r);
    }
}
