use num_rational::Ratio;
use proptest::prelude::*;
use rsat_core::csp::*;
use rsat_core::predicates::satisfying_fraction;
use rsat_core::reductions::negate_half;
use rsat_core::rng::RngState;
use rsat_core::stats::{chi_square_independence, chi_square_uniform, within_sigmas};

const SIGNIFICANCE: f64 = 1e-3;

fn category(l: &Literal, n: usize) -> usize {
    l.var + if l.sign == Sign::Minus { n } else { 0 }
}

#[test]
fn random_formula_marginals_are_uniform() {
    let n = 10;
    let p = PredicateSpec::sat(3).unwrap();
    let mut rng = RngState::new(11);
    let j = random_formula(n, 100_000, &p, &mut rng).unwrap();
    for pos in 0..3 {
        let mut counts = vec![0u64; 2 * n];
        for c in j.constraints() {
            counts[category(&c.tuple().entries()[pos], n)] += 1;
        }
        let t = chi_square_uniform(&counts).unwrap();
        assert!(!t.rejects_at(SIGNIFICANCE), "position {pos}: p = {}", t.p_value);
    }
}

#[test]
fn random_formula_with_n_equal_to_arity_uses_every_variable() {
    let p = PredicateSpec::sat(4).unwrap();
    let mut rng = RngState::new(3);
    let j = random_formula(4, 200, &p, &mut rng).unwrap();
    for c in j.constraints() {
        let mut vars: Vec<usize> = c.tuple().entries().iter().map(|l| l.var).collect();
        vars.sort_unstable();
        assert_eq!(vars, vec![0, 1, 2, 3]);
    }
}

#[test]
fn generators_are_deterministic() {
    let p = PredicateSpec::tkm(2, 3).unwrap();
    let psi = Assignment::random(12, &mut RngState::new(1));
    let a = random_formula(12, 50, &p, &mut RngState::new(9)).unwrap();
    let b = random_formula(12, 50, &p, &mut RngState::new(9)).unwrap();
    assert_eq!(a, b);
    let a = random_mixed_formula(12, 50, &p, &mut RngState::new(9)).unwrap();
    let b = random_mixed_formula(12, 50, &p, &mut RngState::new(9)).unwrap();
    assert_eq!(a, b);
    let a = planted_formula(12, 50, &p, &psi, &mut RngState::new(9)).unwrap();
    let b = planted_formula(12, 50, &p, &psi, &mut RngState::new(9)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn random_sat3_value_near_seven_eighths() {
    let n = 20;
    let p = PredicateSpec::sat(3).unwrap();
    let mut rng = RngState::new(2024);
    let psi = Assignment::random(n, &mut rng);
    let j = random_formula(n, 100_000, &p, &mut rng).unwrap();
    let v = value_under(&j, &psi).unwrap();
    let v = *v.numer() as f64 / *v.denom() as f64;
    assert!((v - 0.875).abs() <= 0.01, "value {v}");
}

#[test]
fn mixed_polarity_is_binomial() {
    let p = PredicateSpec::tkm(2, 2).unwrap();
    let m = 10_000u64;
    let j = random_mixed_formula(16, m as usize, &p, &mut RngState::new(5)).unwrap();
    let negated = j
        .constraints()
        .iter()
        .filter(|c| matches!(c.predicate(), PredicateSpec::NotTkm { .. }))
        .count();
    assert!(within_sigmas(negated as f64 / m as f64, 0.5, m, 3.0), "{negated}");
    assert!(random_mixed_formula(16, 0, &p, &mut RngState::new(5)).unwrap().is_empty());
}

fn polarity_position_table(j: &Formula, n: usize, pos: usize) -> Vec<Vec<u64>> {
    let mut table = vec![vec![0u64; 2 * n]; 2];
    for c in j.constraints() {
        let row = matches!(c.predicate(), PredicateSpec::NotTkm { .. }) as usize;
        table[row][category(&c.tuple().entries()[pos], n)] += 1;
    }
    table
}

#[test]
fn negate_half_matches_random_mixed_formula() {
    // Each side is tested on its own marginals, then the two are compared in
    // one contingency table.
    let (n, k, m, count) = (12, 2, 2, 20_000);
    let p = PredicateSpec::tkm(k, m).unwrap();
    let mut rng = RngState::new(77);
    let source = random_formula(n, count, &p, &mut rng).unwrap();
    let via_negation = negate_half(&source, &mut rng).unwrap();
    let direct = random_mixed_formula(n, count, &p, &mut rng).unwrap();

    let neg_count = |j: &Formula| {
        j.constraints()
            .iter()
            .filter(|c| matches!(c.predicate(), PredicateSpec::NotTkm { .. }))
            .count() as u64
    };
    let a = neg_count(&via_negation);
    let b = neg_count(&direct);
    assert!(within_sigmas(a as f64 / count as f64, 0.5, count as u64, 3.0));
    let polarity = chi_square_independence(&[
        vec![a, count as u64 - a],
        vec![b, count as u64 - b],
    ])
    .unwrap();
    assert!(!polarity.rejects_at(SIGNIFICANCE), "polarity p = {}", polarity.p_value);

    for pos in 0..k * m {
        let ta = polarity_position_table(&via_negation, n, pos);
        let tb = polarity_position_table(&direct, n, pos);
        for (name, t) in [("negate_half", &ta), ("mixed", &tb)] {
            let test = chi_square_independence(t).unwrap();
            assert!(!test.rejects_at(SIGNIFICANCE), "{name} pos {pos}: p = {}", test.p_value);
        }
        let mut joint = Vec::new();
        joint.extend(ta.iter().cloned());
        joint.extend(tb.iter().cloned());
        let test = chi_square_independence(&joint).unwrap();
        assert!(!test.rejects_at(SIGNIFICANCE), "joint pos {pos}: p = {}", test.p_value);
    }
}

#[test]
fn planted_acceptance_rate_tracks_satisfying_fraction() {
    let n = 10;
    let p = PredicateSpec::tkm(2, 2).unwrap();
    let frac = satisfying_fraction(&p).unwrap();
    let expected = frac.numer().to_string().parse::<f64>().unwrap()
        / frac.denom().to_string().parse::<f64>().unwrap();
    let mut rng = RngState::new(8);
    let psi = Assignment::random(n, &mut rng);
    let trials = 20_000u64;
    let mut attempts = 0u64;
    for _ in 0..trials {
        let (c, used) = planted_constraint(n, &p, &psi, &mut rng).unwrap();
        assert!(eval_constraint(&c, &psi).unwrap());
        attempts += used;
    }
    let rate = trials as f64 / attempts as f64;
    // Attempts are geometric, so the rate is within a few percent at this size.
    assert!((rate - expected).abs() < 0.02, "rate {rate} vs {expected}");
}

fn independent_val(j: &Formula) -> Ratio<u64> {
    let n = j.n();
    let mut best = 0u64;
    for mask in 0u64..1 << n {
        let sat = j
            .constraints()
            .iter()
            .filter(|c| {
                c.tuple()
                    .entries()
                    .iter()
                    .any(|l| (mask >> l.var & 1 == 1) == (l.sign == Sign::Plus))
            })
            .count() as u64;
        best = best.max(sat);
    }
    Ratio::new(best, j.len() as u64)
}

#[test]
fn brute_force_val_matches_independent_enumerator() {
    let p = PredicateSpec::sat(3).unwrap();
    for seed in 0..10 {
        let j = random_formula(12, 60, &p, &mut RngState::new(seed)).unwrap();
        let (val, witness) = brute_force_val(&j).unwrap();
        assert_eq!(val, independent_val(&j), "seed {seed}");
        assert_eq!(value_under(&j, &witness).unwrap(), val);
    }
}

proptest! {
    #[test]
    fn value_under_is_a_fraction_and_satisfiable_iff_val_one(
        seed in any::<u64>(), n in 3usize..8, m in 1usize..40, k in 1usize..4,
    ) {
        prop_assume!(n >= k);
        let p = PredicateSpec::sat(k).unwrap();
        let mut rng = RngState::new(seed);
        let j = random_formula(n, m, &p, &mut rng).unwrap();
        let psi = Assignment::random(n, &mut rng);
        let v = value_under(&j, &psi).unwrap();
        prop_assert!(v <= Ratio::from_integer(1));
        let (val, _) = brute_force_val(&j).unwrap();
        prop_assert!(v <= val);
        let sat = brute_force_satisfiable(&j).unwrap();
        prop_assert_eq!(sat.is_some(), val == Ratio::from_integer(1));
        if let Some(w) = sat {
            prop_assert_eq!(value_under(&j, &w).unwrap(), Ratio::from_integer(1));
        }
    }

    #[test]
    fn planted_formulas_are_satisfied(seed in any::<u64>(), n in 4usize..12, m in 0usize..30) {
        let p = PredicateSpec::tkm(2, 2).unwrap();
        let mut rng = RngState::new(seed);
        let psi = Assignment::random(n, &mut rng);
        let j = planted_formula(n, m, &p, &psi, &mut rng).unwrap();
        prop_assert_eq!(value_under(&j, &psi).unwrap(), Ratio::from_integer(1));
    }

    #[test]
    fn constraint_eval_agrees_with_truth_table(seed in any::<u64>(), k in 1usize..3, m in 1usize..3) {
        let p = PredicateSpec::not_tkm(k, m).unwrap();
        let table = p.to_truth_table().unwrap();
        let n = 4.max(k * m);
        let mut rng = RngState::new(seed);
        let c = random_constraint(n, &p, &mut rng).unwrap();
        let ct = Constraint::new(table, c.tuple().clone()).unwrap();
        for mask in 0..1u64 << n {
            let psi = Assignment::from_mask(mask, n);
            prop_assert_eq!(eval_constraint(&c, &psi).unwrap(), eval_constraint(&ct, &psi).unwrap());
        }
    }
}

#[test]
fn complementary_pair_has_value_half() {
    let p = PredicateSpec::sat(1).unwrap();
    let j = Formula::new(
        1,
        vec![
            Constraint::new(p.clone(), SignedTuple::new(vec![Literal::pos(0)]).unwrap()).unwrap(),
            Constraint::new(p, SignedTuple::new(vec![Literal::neg(0)]).unwrap()).unwrap(),
        ],
    )
    .unwrap();
    assert_eq!(brute_force_val(&j).unwrap().0, Ratio::new(1, 2));
    assert!(brute_force_satisfiable(&j).unwrap().is_none());
}
