//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use adversary_core::cbf::{feasible_input_polytope, filter, gamma_membership};
use adversary_core::continuous::{
    compute_m, difficulty, difficulty_with_margin, synthesize, synthesize_perturbed, FloorResolution, SearchConfig,
};
use adversary_core::discrete::{synthesize_discrete, synthesize_predictive, DiscreteScenario, EnumerationConfig};
use adversary_core::lp::{solve_lp, LpOutcome, LpProblem};
use adversary_core::scenarios::gridworld::{
    build_gridworld_with_cache, max_residual, solve_reward, successor_mean, RewardCache, GOAL_VALUE, GRID_FLOOR,
    GRID_SIZE, RESIDUAL_TOLERANCE,
};
use adversary_core::scenarios::quadgrid::{cell_corners, corner_tests};
use adversary_core::scenarios::{build_quadgrid, build_unicycle, greedy_safe_controller, simulate_adversarial, SimulationConfig};
use adversary_core::{BoxSet, ContinuousDynamics, Execution, StateVector, TestSpace};
use rand::Rng;

use common::{finite_difference, random_lp, relative_error, rng, vertex_enumeration_max};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

fn random_cell(rng: &mut impl Rng) -> [usize; 2] {
    [rng.random_range(0..GRID_SIZE), rng.random_range(0..GRID_SIZE)]
}

fn unicycle_floor() -> Outcome {
    let s = build_unicycle([0.5, 0.5], 1).map_err(|e| e.to_string())?;
    let mut rng = rng(1);
    let trials = 200;
    let mut hits = 0;
    for _ in 0..trials {
        let x = StateVector::from([
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(0.0..=2.0 * PI),
        ]);
        let r = synthesize(&s, &x, -5.0, &SearchConfig::default()).map_err(|e| e.to_string())?;
        if r.difficulty == -5.0 {
            hits += 1;
        }
    }
    ensure(hits == trials, || format!("{hits}/{trials} states reached -5"))?;
    Ok(format!("{hits}/{trials} states reached -5"))
}

fn gamma_membership_at_reference_states() -> Outcome {
    let s = build_unicycle([0.5, 0.5], 1).map_err(|e| e.to_string())?;
    for x in [[-0.5, 0.5, PI / 4.0], [0.5, -0.5, PI / 2.0]] {
        let r = synthesize(&s, &StateVector::from(x), -5.0, &SearchConfig::default()).map_err(|e| e.to_string())?;
        let p = feasible_input_polytope(s.spec(), s.dynamics(), &x, &r.d_star, s.input_space())
            .map_err(|e| e.to_string())?;
        let empty = gamma_membership(&p).map_err(|e| e.to_string())?;
        ensure(r.in_gamma && empty, || format!("x={x:?}: d*={:?} not in Gamma", r.d_star.as_slice()))?;
    }
    Ok("both states return d* in Gamma(x)".into())
}

fn grid_obstacle_on_goal() -> Outcome {
    let cache = Arc::new(RewardCache::new());
    let mut rng = rng(3);
    let trials = 1000;
    let mut hits = 0;
    for _ in 0..trials {
        let goal = random_cell(&mut rng);
        let mut x = goal;
        while x == goal {
            x = random_cell(&mut rng);
        }
        let s = build_gridworld_with_cache(goal, Arc::clone(&cache)).map_err(|e| e.to_string())?;
        let x = StateVector::from([x[0] as f64, x[1] as f64]);
        let r = synthesize_discrete(&s, &x, GRID_FLOOR, &EnumerationConfig::default()).map_err(|e| e.to_string())?;
        if r.d_star.as_slice() == [goal[0] as f64, goal[1] as f64] && r.difficulty == 0.0 {
            hits += 1;
        }
    }
    ensure(hits == trials, || format!("{hits}/{trials} trials put the obstacle on the goal"))?;
    Ok(format!("{hits}/{trials} trials, {} reward grids solved", cache.len()))
}

fn lp_oracle() -> Outcome {
    let mut rng = rng(4);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let (c, poly) = random_lp(&mut rng);
        let oracle = vertex_enumeration_max(&c, &poly);
        let outcome = solve_lp(&LpProblem::new(c, poly).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        match (outcome, oracle) {
            (LpOutcome::Optimal { value, .. }, Some(v)) => worst = worst.max((value - v).abs()),
            (LpOutcome::Infeasible, None) => {}
            (got, want) => return Err(format!("problem {k}: solver {got:?}, oracle {want:?}")),
        }
    }
    ensure(worst <= 1e-6, || format!("max deviation {worst:e}"))?;
    Ok(format!("100 problems, max deviation {worst:.1e}"))
}

fn reward_fidelity() -> Outcome {
    let mut rng = rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let goal = random_cell(&mut rng);
        let mut obstacle = goal;
        while obstacle == goal {
            obstacle = random_cell(&mut rng);
        }
        let r = solve_reward(goal, obstacle).map_err(|e| e.to_string())?;
        let v = r.base().ok_or("missing base grid")?;
        worst = worst.max(max_residual(v, goal, obstacle));
        ensure(v[goal[0]][goal[1]] == GOAL_VALUE && v[obstacle[0]][obstacle[1]] == -GOAL_VALUE, || {
            "fixed values not exact".into()
        })?;
        for i in 0..GRID_SIZE {
            for j in 0..GRID_SIZE {
                let c = [i, j];
                if c != goal && c != obstacle {
                    ensure(v[i][j].abs() < GOAL_VALUE, || format!("cell {c:?} = {}", v[i][j]))?;
                    worst = worst.max((v[i][j] - successor_mean(v, c)).abs());
                }
            }
        }
    }
    ensure(worst <= RESIDUAL_TOLERANCE, || format!("residual {worst:e}"))?;
    Ok(format!("20 grids, max residual {worst:.1e}"))
}

/// Independent brute force over (d, u0, u1) for the two-step predictive value.
fn two_step_brute(s: &DiscreteScenario, x: &[f64], m: f64) -> f64 {
    let TestSpace::Finite(tests) = s.test_space() else { unreachable!() };
    let dyns = s.dynamics();
    let h = s.spec().reach();
    let mut outer = f64::INFINITY;
    for d in tests {
        let mut inner = f64::NEG_INFINITY;
        for u0 in dyns.alphabet() {
            for u1 in dyns.alphabet() {
                let x2 = dyns.step(&dyns.step(x, u0), u1);
                if s.spec().min_avoid(&x2, d) >= 0.0 {
                    inner = inner.max(h.value(&x2, d) - h.value(x, d));
                }
            }
        }
        outer = outer.min(if inner == f64::NEG_INFINITY { m } else { inner });
    }
    outer
}

fn predictive_collapse() -> Outcome {
    let cache = Arc::new(RewardCache::new());
    let mut rng = rng(6);
    let cfg = EnumerationConfig::default();
    for k in 0..50 {
        let goal = random_cell(&mut rng);
        let x = random_cell(&mut rng);
        let s = build_gridworld_with_cache(goal, Arc::clone(&cache)).map_err(|e| e.to_string())?;
        let x = StateVector::from([x[0] as f64, x[1] as f64]);
        let one = synthesize_discrete(&s, &x, GRID_FLOOR, &cfg).map_err(|e| e.to_string())?;
        let n1 = synthesize_predictive(&s, &x, GRID_FLOOR, 1, &cfg).map_err(|e| e.to_string())?;
        ensure(one.difficulty == n1.difficulty && one.d_star == n1.d_star, || {
            format!("instance {k}: N=1 differs from one-step")
        })?;
        let n2 = synthesize_predictive(&s, &x, GRID_FLOOR, 2, &cfg).map_err(|e| e.to_string())?;
        let brute = two_step_brute(&s, &x, GRID_FLOOR);
        ensure(n2.difficulty == brute, || format!("instance {k}: N=2 {} vs brute {brute}", n2.difficulty))?;
    }
    Ok("50 instances: N=1 equals one-step, N=2 equals brute force".into())
}

fn constrained_membership() -> Outcome {
    let corners = cell_corners(&[0.3, 1.7]);
    ensure(corners == vec![[0.0, 1.0], [0.0, 2.0], [1.0, 1.0], [1.0, 2.0]], || {
        format!("corners at [0.3, 1.7]: {corners:?}")
    })?;
    let s = build_quadgrid().map_err(|e| e.to_string())?;
    let cfg = SimulationConfig { floor: -100.0, ..SimulationConfig::default() };
    let log = simulate_adversarial(&s, &StateVector::from([0.3, 1.7]), greedy_safe_controller, &cfg)
        .map_err(|e| e.to_string())?;
    for c in &log.commands {
        ensure(corner_tests(&c.state).contains(&c.test), || {
            format!("t={}: {:?} outside D(x)", c.time, c.test.as_slice())
        })?;
    }
    Ok(format!("{} commands over {} samples, all in D(x)", log.commands.len(), log.samples.len()))
}

fn property_summary() -> Outcome {
    let mut rng = rng(8);
    let unicycle = build_unicycle([0.5, 0.5], 1).map_err(|e| e.to_string())?;

    // Gradients against central differences.
    for _ in 0..100 {
        let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0 * PI)];
        let d = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        for h in std::iter::once(unicycle.spec().reach()).chain(unicycle.spec().avoid()) {
            let fd = finite_difference(|y| h.value(y, &d), &x, 1e-6);
            let g = h.gradient(&x, &d).ok_or("missing gradient")?;
            ensure(relative_error(&g, &fd) <= 1e-5, || format!("{} gradient mismatch", h.name()))?;
        }
    }

    // Filter returns one of its two branches.
    for _ in 0..100 {
        let (v, m) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let out = filter(v, &[0.0][..], &adversary_core::Polytope::unconstrained(1), m);
        ensure(out == v, || "filter dropped a feasible value".into())?;
    }

    // Floor estimate lower-bounds every difficulty on its own grid.
    let res = FloorResolution { state_points: vec![5, 5, 4], test_points: 3 };
    let floor = compute_m(&unicycle, &res, Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(floor.m <= 0.0, || format!("floor {} above zero", floor.m))?;

    // Margin shift leaves the argmin alone.
    let restricted = unicycle
        .clone()
        .with_test_space(TestSpace::Box(BoxSet::new(vec![0.3, -1.0], vec![1.0, -0.3]).map_err(|e| e.to_string())?))
        .map_err(|e| e.to_string())?;
    let x = StateVector::from([-0.4, 0.3, 1.0]);
    let base = synthesize(&restricted, &x, -5.0, &SearchConfig::default()).map_err(|e| e.to_string())?;
    let shifted = synthesize(&restricted, &x, -5.0, &SearchConfig { progress_margin: 0.3, ..SearchConfig::default() })
        .map_err(|e| e.to_string())?;
    ensure(base.d_star == shifted.d_star, || "margin moved the argmin".into())?;
    let a = difficulty(&restricted, &x, &base.d_star, -5.0).map_err(|e| e.to_string())?;
    let b = difficulty_with_margin(&restricted, &x, &base.d_star, -5.0, 0.3).map_err(|e| e.to_string())?;
    ensure(a.value - 0.3 == b.value, || "margin shift is not exact".into())?;

    // Zero perturbation reduces to the nominal synthesizer.
    let perturbed = unicycle
        .clone()
        .with_dynamics(
            ContinuousDynamics::nominal(3, 2, 2, |_| vec![0.0; 3], |x| {
                let (s, c) = x[2].sin_cos();
                vec![vec![c, 0.0], vec![s, 0.0], vec![0.0, 1.0]]
            })
            .with_perturbation(vec![vec![0.0; 2]; 3])
            .map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
    let x = StateVector::from([0.2, -0.6, 2.5]);
    ensure(
        synthesize(&unicycle, &x, -5.0, &SearchConfig::default()).map_err(|e| e.to_string())?
            == synthesize_perturbed(&perturbed, &x, -5.0, &SearchConfig::default()).map_err(|e| e.to_string())?,
        || "C = 0 reduction differs".into(),
    )?;
    Ok("gradients, filter, floor, margin shift and C = 0 reduction hold".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("unicycle floor attainment", unicycle_floor),
        ("Gamma membership", gamma_membership_at_reference_states),
        ("grid obstacle on goal", grid_obstacle_on_goal),
        ("LP oracle equivalence", lp_oracle),
        ("reward-grid fidelity", reward_fidelity),
        ("predictive collapse", predictive_collapse),
        ("constrained membership", constrained_membership),
        ("property suites", property_summary),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}; {secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({detail}; {secs:.2}s)", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
