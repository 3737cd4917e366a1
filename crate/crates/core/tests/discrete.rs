mod common;

use std::sync::Arc;

use adversary_core::discrete::{
    delta_h, difficulty_mbar, difficulty_predictive, enumeration_size, feasible_inputs, feasible_sequences, rollout,
    synthesize_discrete, synthesize_discrete_constrained, synthesize_predictive, DiscreteScenario, EnumerationConfig,
    InputSequence,
};
use adversary_core::scenarios::gridworld::{build_gridworld, build_gridworld_with_cache, RewardCache, GRID_FLOOR};
use adversary_core::{
    BarrierFunction, ClassKappa, DiscreteDynamics, Error, Execution, InputVector, ReachAvoidSpec, StateVector, TestMap,
    TestSpace, TestVector,
};
use proptest::prelude::*;
use rand::Rng;

use common::rng;

/// Walker on the integer line: step by -1, 0 or +1 toward `goal`, keeping
/// half a cell away from the obstacle at `d`.
fn line(goal: f64, tests: Vec<f64>) -> DiscreteScenario {
    let dynamics = DiscreteDynamics::new(
        vec![
            ("back".into(), InputVector::from([-1.0])),
            ("hold".into(), InputVector::from([0.0])),
            ("fwd".into(), InputVector::from([1.0])),
        ],
        |x, u| vec![x[0] + u[0]],
    )
    .unwrap();
    let reach = BarrierFunction::discrete("goal", move |x, _| -(x[0] - goal).abs());
    let avoid = BarrierFunction::discrete("obstacle", |x, d| (x[0] - d[0]).abs() - 0.5);
    let spec = ReachAvoidSpec::new(reach, vec![avoid], vec![ClassKappa::Linear(1.0)], 0.0, f64::INFINITY).unwrap();
    let tests = tests.into_iter().map(|d| TestVector::from([d])).collect();
    DiscreteScenario::new("line", dynamics, spec, TestSpace::Finite(tests)).unwrap()
}

#[test]
fn gridworld_increments_and_feasibility() {
    let s = build_gridworld([7, 9]).unwrap();
    let x = [4.0, 4.0];
    let d = [5.0, 4.0];
    let right = s.dynamics().index_of("right").unwrap();
    // Stepping onto the obstacle gives R* = -10.1, so h^G = -0.1.
    assert!((s.spec().min_avoid(&s.dynamics().step_index(&x, right), &d) + 0.1).abs() < 1e-12);
    let feasible = feasible_inputs(s.spec(), s.dynamics(), &x, &d);
    let labels: Vec<_> = feasible.iter().map(|&i| s.dynamics().label(i)).collect();
    assert_eq!(labels, ["stay", "left", "up", "down"]);
    let stay = s.dynamics().alphabet()[0].clone();
    assert_eq!(delta_h(s.spec().reach(), s.dynamics(), &x, &stay, &d), 0.0);
}

#[test]
fn goal_on_goal_collapses_difficulty() {
    let s = build_gridworld([7, 9]).unwrap();
    let r = difficulty_mbar(&s, &[2.0, 3.0], &[7.0, 9.0], GRID_FLOOR);
    assert_eq!(r.value, 0.0);
    assert_eq!(r.maximizer, Some(0));
}

#[test]
fn rollout_and_labels() {
    let s = build_gridworld([7, 9]).unwrap();
    let seq = InputSequence::from_labels(&["right", "right", "up", "left"], s.dynamics()).unwrap();
    assert_eq!(rollout(s.dynamics(), &[0.0, 0.0], &seq).as_slice(), &[1.0, 1.0]);
    assert_eq!(seq.labels(s.dynamics()), ["right", "right", "up", "left"]);
    // Blocked at the wall.
    let seq = InputSequence::from_labels(&["left", "down"], s.dynamics()).unwrap();
    assert_eq!(rollout(s.dynamics(), &[0.0, 0.0], &seq).as_slice(), &[0.0, 0.0]);
    assert!(InputSequence::from_labels(&["jump"], s.dynamics()).is_err());
    assert!(InputSequence::new(vec![5], s.dynamics()).is_err());
}

#[test]
fn gridworld_adversary_puts_obstacle_on_goal() {
    let cache = Arc::new(RewardCache::new());
    let s = build_gridworld_with_cache([7, 9], Arc::clone(&cache)).unwrap();
    for x in [[0.0, 0.0], [4.0, 4.0], [7.0, 8.0], [9.0, 0.0]] {
        let r = synthesize_discrete(&s, &StateVector::from(x), GRID_FLOOR, &EnumerationConfig::default()).unwrap();
        assert_eq!(r.d_star.as_slice(), &[7.0, 9.0]);
        assert_eq!(r.difficulty, 0.0);
        assert_eq!(r.evaluations, 100);
    }
    assert_eq!(cache.len(), 100);
}

#[test]
fn symmetric_ties_prefer_the_goal() {
    // Obstacle at [1, 1] leaves the corner agent no progress this step, tying
    // with the obstacle on the goal; one step further only the goal still blocks.
    let s = build_gridworld([8, 8]).unwrap();
    let x = StateVector::from([0.0, 0.0]);
    assert_eq!(difficulty_mbar(&s, &x, &[1.0, 1.0], GRID_FLOOR).value, 0.0);
    let r = synthesize_discrete(&s, &x, GRID_FLOOR, &EnumerationConfig::default()).unwrap();
    assert_eq!(r.d_star.as_slice(), &[8.0, 8.0]);
    assert_eq!(r.difficulty, 0.0);
    assert!(r.warnings.iter().any(|w| w.contains("tie")));
    let n1 = synthesize_predictive(&s, &x, GRID_FLOOR, 1, &EnumerationConfig::default()).unwrap();
    assert_eq!((n1.d_star, n1.difficulty), (r.d_star, r.difficulty));
}

#[test]
fn feasible_sequences_enumerate_lexicographically() {
    let s = line(5.0, vec![1.0]);
    let seqs = feasible_sequences(s.spec(), s.dynamics(), &[0.0], &[1.0], 2, false).unwrap();
    // Terminal 1 is excluded: (hold, fwd), (fwd, hold).
    let all: Vec<Vec<usize>> = (0..3).flat_map(|a| (0..3).map(move |b| vec![a, b])).collect();
    let expected: Vec<_> = all.into_iter().filter(|s| s[0] + s[1] != 3).collect();
    assert_eq!(seqs.iter().map(|s| s.indices().to_vec()).collect::<Vec<_>>(), expected);
    assert!(feasible_sequences(s.spec(), s.dynamics(), &[0.0], &[1.0], 0, false).is_err());
}

#[test]
fn path_constraints_are_opt_in() {
    // Walking through the obstacle at 1 to land on 2.
    let s = line(5.0, vec![1.0]);
    let terminal = difficulty_predictive(&s, &[0.0], &[1.0], -10.0, 2).unwrap();
    assert_eq!(terminal.value, 2.0);
    let strict = s.clone().with_path_constraints(true);
    let path = difficulty_predictive(&strict, &[0.0], &[1.0], -10.0, 2).unwrap();
    assert_eq!(path.value, 0.0);
    assert!(path.value <= terminal.value);
}

#[test]
fn one_step_horizon_matches_mbar() {
    let mut rng = rng(3);
    let s = build_gridworld([7, 9]).unwrap();
    for _ in 0..30 {
        let x = [rng.random_range(0..10) as f64, rng.random_range(0..10) as f64];
        let d = [rng.random_range(0..10) as f64, rng.random_range(0..10) as f64];
        let a = difficulty_mbar(&s, &x, &d, GRID_FLOOR);
        let b = difficulty_predictive(&s, &x, &d, GRID_FLOOR, 1).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.maximizer, b.maximizer);
    }
}

/// Independent two-step oracle: nested loops over the alphabet, terminal check only.
fn two_step_oracle(s: &DiscreteScenario, x: &[f64], d: &[f64], m: f64) -> f64 {
    let dyns = s.dynamics();
    let h = s.spec().reach();
    let mut best = f64::NEG_INFINITY;
    for u0 in dyns.alphabet() {
        let x1 = dyns.step(x, u0);
        for u1 in dyns.alphabet() {
            let x2 = dyns.step(&x1, u1);
            if s.spec().avoid().iter().all(|g| g.value(&x2, d) >= 0.0) {
                best = best.max(h.value(&x2, d) - h.value(x, d));
            }
        }
    }
    if best == f64::NEG_INFINITY { m } else { best }
}

#[test]
fn two_step_predictive_matches_oracle() {
    let s = build_gridworld([7, 9]).unwrap();
    let mut rng = rng(11);
    for _ in 0..30 {
        let x = StateVector::from([rng.random_range(0..10) as f64, rng.random_range(0..10) as f64]);
        let r = synthesize_predictive(&s, &x, GRID_FLOOR, 2, &EnumerationConfig::default()).unwrap();
        let TestSpace::Finite(tests) = s.test_space() else { unreachable!() };
        let oracle = tests
            .iter()
            .map(|d| two_step_oracle(&s, &x, d, GRID_FLOOR))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r.difficulty, oracle);
        assert_eq!(r.input_sequence.as_ref().map(Vec::len), Some(2));
    }
}

#[test]
fn constrained_map_excluding_goal() {
    let base = build_gridworld([7, 9]).unwrap();
    let s = base
        .with_test_space(TestSpace::Mapped(TestMap::new(|_, _| {
            TestSpace::Finite(
                adversary_core::scenarios::gridworld::all_cells()
                    .into_iter()
                    .filter(|d| d.as_slice() != [7.0, 9.0])
                    .collect(),
            )
        })))
        .unwrap();
    let x = StateVector::from([2.0, 2.0]);
    let r = synthesize_discrete_constrained(&s, &x, 0.0, GRID_FLOOR, 1, &EnumerationConfig::default()).unwrap();
    assert_ne!(r.d_star.as_slice(), &[7.0, 9.0]);
    assert!(r.difficulty > 0.0);
    assert_eq!(r.candidates, 99);
    assert!(matches!(
        synthesize_discrete(&s, &x, GRID_FLOOR, &EnumerationConfig::default()),
        Err(Error::InvalidTestSpace(_))
    ));
}

#[test]
fn enumeration_budget_is_enforced() {
    assert_eq!(enumeration_size(5, 3, 100), 12_500);
    assert_eq!(enumeration_size(5, 200, 100), u128::MAX);
    let s = build_gridworld([7, 9]).unwrap();
    let cfg = EnumerationConfig { budget: 1000, ..EnumerationConfig::default() };
    let err = synthesize_predictive(&s, &StateVector::from([0.0, 0.0]), GRID_FLOOR, 2, &cfg).unwrap_err();
    assert_eq!(err, Error::BudgetExceeded { required: 2500, budget: 1000 });
}

#[test]
fn box_test_spaces_are_rejected() {
    let s = line(5.0, vec![1.0]);
    let b = adversary_core::BoxSet::new(vec![0.0], vec![1.0]).unwrap();
    assert!(s.with_test_space(TestSpace::Box(b)).is_err());
}

#[test]
fn trapped_walker_falls_to_floor() {
    // A narrow obstacle on the walker only blocks 'hold'.
    let s = line(5.0, vec![0.0, 3.0]);
    let r = difficulty_mbar(&s, &[0.0], &[0.0], -10.0);
    assert_eq!(r.value, 1.0);
    // A wide one blocks all three successors.
    let wide = BarrierFunction::discrete("wall", |x, d| (x[0] - d[0]).abs() - 1.5);
    let spec = s.spec().without_avoid().with_avoid(wide, ClassKappa::Linear(1.0));
    let trapped = s.with_spec(spec);
    let r = synthesize_discrete(&trapped, &StateVector::from([0.0]), -10.0, &EnumerationConfig::default()).unwrap();
    assert!(r.in_gamma && r.early_exit);
    assert_eq!(r.d_star.as_slice(), &[0.0]);
    assert_eq!(r.difficulty, -10.0);
    assert_eq!(r.evaluations, 2);
}

#[test]
fn floor_violation_is_reported() {
    let s = line(5.0, vec![10.0]);
    let err = synthesize_discrete(&s, &StateVector::from([0.0]), 2.0, &EnumerationConfig::default()).unwrap_err();
    assert!(matches!(err, Error::FloorViolated { .. }));
}

#[test]
fn execution_modes_agree() {
    let s = build_gridworld([3, 6]).unwrap();
    let x = StateVector::from([8.0, 1.0]);
    let seq = EnumerationConfig { execution: Execution::Sequential, ..EnumerationConfig::default() };
    for n in 1..=2 {
        assert_eq!(
            synthesize_predictive(&s, &x, GRID_FLOOR, n, &seq).unwrap(),
            synthesize_predictive(&s, &x, GRID_FLOOR, n, &EnumerationConfig::default()).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn path_check_never_admits_more(x in -6i32..6, d in -6i32..6, n in 1usize..4) {
        let s = line(5.0, vec![d as f64]);
        let loose = feasible_sequences(s.spec(), s.dynamics(), &[x as f64], &[d as f64], n, false).unwrap();
        let strict = feasible_sequences(s.spec(), s.dynamics(), &[x as f64], &[d as f64], n, true).unwrap();
        prop_assert!(strict.iter().all(|q| loose.contains(q)));
    }

    #[test]
    fn discrete_result_is_exact_minimum(x in -6i32..6, tests in proptest::collection::vec(-6i32..6, 1..6), n in 1usize..3) {
        let s = line(3.0, tests.iter().map(|&t| t as f64).collect());
        let x = StateVector::from([x as f64]);
        let r = synthesize_predictive(&s, &x, -10.0, n, &EnumerationConfig::default()).unwrap();
        let values: Vec<f64> = tests
            .iter()
            .map(|&t| difficulty_predictive(&s, &x, &[t as f64], -10.0, n).unwrap().value)
            .collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(r.difficulty, min);
        let chosen = tests.iter().position(|&t| [t as f64] == r.d_star.as_slice()).unwrap();
        prop_assert_eq!(values[chosen], min);
        if r.early_exit {
            let first = values.iter().position(|v| *v == min).unwrap();
            prop_assert_eq!(chosen, first);
        }
    }
}
