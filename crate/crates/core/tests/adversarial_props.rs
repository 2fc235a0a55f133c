mod common;

use common::*;
use proptest::prelude::*;
use testscore::adversarial::{
    gen_ces_mean_tightness, gen_mean_fails_bestshot, gen_quantile_ces, gen_quantile_fails_linear,
    gen_welfare_example1, gen_welfare_example2, measure, validate, Generator, GENERATOR_NAMES,
};
use testscore::utility::EvalOptions;

fn opts() -> EvalOptions {
    EvalOptions::default()
}

fn assert_validates(inst: &testscore::adversarial::AdversarialInstance) {
    let report = validate(inst, &opts()).unwrap();
    assert!(report.pass, "{:#?}", report.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mean_bestshot_validates(k in 1usize..=4, a in 1.1..20.0f64, frac in 0.0..0.99f64) {
        let p = frac * (1.0 / a).min(0.99);
        let inst = gen_mean_fails_bestshot(k, a, p).unwrap();
        assert_validates(&inst);
        let opt = naive_best_subset(&inst.scenario, 0, k);
        prop_assert!(inst.expected["opt"].holds(opt), "naive opt {} vs {:?}", opt, inst.expected["opt"]);
    }

    #[test]
    fn quantile_linear_validates(k in 2usize..=4, a in 1.1..10.0f64, frac in 0.01..0.99f64) {
        let p = 1.0 / k as f64 + frac * (1.0 - 1.0 / k as f64);
        assert_validates(&gen_quantile_fails_linear(k, a, p).unwrap());
    }

    #[test]
    fn ces_mean_validates(k in 1usize..=4, r in 1.0..4.0f64, a in 1.0..300.0f64, eps in 0.001..0.2f64) {
        let inst = gen_ces_mean_tightness(k, r, a, eps).unwrap();
        assert_validates(&inst);
        let u_m = naive_utility(&inst.scenario, 0, &(0..k).collect::<Vec<_>>());
        prop_assert!(inst.expected["u_m"].holds(u_m));
    }

    #[test]
    fn quantile_ces_validates(
        k in 1usize..=3,
        extra in 0usize..=3,
        r in 1.0..3.0f64,
        theta_frac in 0.05..0.95f64,
        a in 0.0..3.0f64,
        b in 0.0..3.0f64,
        c in 0.0..6.0f64,
    ) {
        let theta = theta_frac * k as f64;
        assert_validates(&gen_quantile_ces(k, r, theta, a, b, c, 3 * k + extra).unwrap());
    }
}

#[test]
fn welfare_examples_validate_and_match_naive_optimum() {
    for r in 2..=3 {
        let ex1 = gen_welfare_example1(r).unwrap();
        assert_validates(&ex1);
        assert!(ex1.expected["opt"].holds(naive_best_assignment(&ex1.scenario)));

        let ex2 = gen_welfare_example2(r).unwrap();
        assert_validates(&ex2);
        assert!(ex2.expected["opt"].holds(naive_best_assignment(&ex2.scenario)));
    }
    assert_validates(&gen_welfare_example1(4).unwrap());
    for r in 4..=8 {
        assert_validates(&gen_welfare_example2(r).unwrap());
    }
}

#[test]
fn oversized_welfare_example_reports_budget() {
    let inst = gen_welfare_example1(6).unwrap();
    assert!(matches!(validate(&inst, &opts()), Err(testscore::Error::BudgetExceeded { .. })));
}

#[test]
fn mean_greedy_ratio_falls_as_team_grows() {
    let (a, p) = (9.0, 0.1);
    let ratios: Vec<f64> = [2, 4, 8]
        .iter()
        .map(|&k| measure(&gen_mean_fails_bestshot(k, a, p).unwrap(), &opts()).unwrap()["mean_greedy_ratio"])
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] <= w[0]), "{ratios:?}");
    assert!(ratios[2] < ratios[0]);
}

#[test]
fn generators_reject_out_of_range_parameters() {
    assert!(gen_mean_fails_bestshot(3, 0.5, 0.1).is_err());
    assert!(gen_mean_fails_bestshot(3, 4.0, 0.5).is_err());
    assert!(gen_quantile_fails_linear(4, 3.0, 0.2).is_err());
    assert!(gen_ces_mean_tightness(3, 0.5, 10.0, 0.01).is_err());
    assert!(gen_quantile_ces(2, 2.0, 1.0, 1.0, 1.0, 1.0, 5).is_err());
    assert!(gen_quantile_ces(2, 2.0, 2.0, 1.0, 1.0, 1.0, 6).is_err());
    assert!(gen_welfare_example1(1).is_err());
    assert!(gen_welfare_example2(1).is_err());
}

#[test]
fn every_named_generator_builds_from_parameters() {
    for name in GENERATOR_NAMES {
        let p = if name == "quantile_linear" { 0.5 } else { 0.2 };
        let values = [("k", 3.0), ("a", 4.0), ("p", p), ("r", 2.0), ("theta", 1.0), ("b", 1.0), ("c", 3.0), ("n", 9.0)];
        let params = Generator::param_names(name)
            .unwrap()
            .iter()
            .map(|p| {
                let v = values.iter().find(|(k, _)| k == p).map_or(0.01, |(_, v)| *v);
                (p.to_string(), v)
            })
            .collect();
        let g = Generator::from_params(name, &params).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(g.name(), name);
        let inst = g.generate().unwrap();
        assert_validates(&inst);
    }
    assert!(Generator::from_params("welfare_ex1", &[("q".to_string(), 1.0)].into_iter().collect()).is_err());
}
