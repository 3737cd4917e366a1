//! Discrete-time adversary over finite input alphabets and finite test sets.
//!
//! Everything here is exact enumeration. One-step synthesis maximizes the
//! barrier increment over feasible inputs; predictive synthesis does the same
//! over all input sequences of a fixed horizon, checking avoid barriers at the
//! terminal state (or along the whole path when `path_constrained` is set).
//! Exact ties in the outer minimum go to the test that is hardest one step
//! further ahead, then to the lowest index.

use crate::cbf::{BarrierFunction, ReachAvoidSpec};
use crate::dynamics::DiscreteDynamics;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::synthesis::{check_floor, SynthesisResult};
use crate::types::{StateVector, TestSpace, TestVector};

/// Default cap on `|U|^N * |D|` for predictive enumeration.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone)]
pub struct DiscreteScenario {
    name: String,
    dynamics: DiscreteDynamics,
    spec: ReachAvoidSpec,
    test_space: TestSpace,
    horizon: usize,
    floor: Option<f64>,
    path_constrained: bool,
}

impl DiscreteScenario {
    pub fn new(
        name: impl Into<String>,
        dynamics: DiscreteDynamics,
        spec: ReachAvoidSpec,
        test_space: TestSpace,
    ) -> Result<Self> {
        match &test_space {
            TestSpace::Box(_) => {
                return Err(Error::InvalidTestSpace(
                    "discrete scenarios need a finite or mapped test space".into(),
                ))
            }
            TestSpace::Finite(_) => test_space.validate()?,
            TestSpace::Mapped(_) => {}
        }
        Ok(Self {
            name: name.into(),
            dynamics,
            spec,
            test_space,
            horizon: 1,
            floor: None,
            path_constrained: false,
        })
    }

    pub fn with_horizon(mut self, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidInput("horizon must be at least 1".into()));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn with_floor(mut self, m: f64) -> Self {
        self.floor = Some(m);
        self
    }

    /// Opt into checking avoid barriers at every intermediate predicted state.
    pub fn with_path_constraints(mut self, on: bool) -> Self {
        self.path_constrained = on;
        self
    }

    pub fn with_test_space(self, test_space: TestSpace) -> Result<Self> {
        let Self {
            name,
            dynamics,
            spec,
            horizon,
            floor,
            path_constrained,
            ..
        } = self;
        let mut out = Self::new(name, dynamics, spec, test_space)?;
        out.horizon = horizon;
        out.floor = floor;
        out.path_constrained = path_constrained;
        Ok(out)
    }

    pub fn with_spec(mut self, spec: ReachAvoidSpec) -> Self {
        self.spec = spec;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dynamics(&self) -> &DiscreteDynamics {
        &self.dynamics
    }

    pub fn spec(&self) -> &ReachAvoidSpec {
        &self.spec
    }

    pub fn test_space(&self) -> &TestSpace {
        &self.test_space
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn floor(&self) -> Option<f64> {
        self.floor
    }

    pub fn path_constrained(&self) -> bool {
        self.path_constrained
    }
}

/// Enumeration settings for the discrete synthesizers.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationConfig {
    pub execution: Execution,
    pub chunk_size: usize,
    pub budget: u128,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self {
            execution: Execution::default(),
            chunk_size: 16,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Input sequence as indices into the dynamics' alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InputSequence(Vec<usize>);

impl InputSequence {
    pub fn new(indices: Vec<usize>, dynamics: &DiscreteDynamics) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= dynamics.alphabet().len()) {
            return Err(Error::InvalidInput(format!(
                "input index {bad} is outside the alphabet"
            )));
        }
        Ok(Self(indices))
    }

    pub fn from_labels(labels: &[&str], dynamics: &DiscreteDynamics) -> Result<Self> {
        labels
            .iter()
            .map(|l| {
                dynamics
                    .index_of(l)
                    .ok_or_else(|| Error::InvalidInput(format!("unknown input `{l}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels<'a>(&self, dynamics: &'a DiscreteDynamics) -> Vec<&'a str> {
        self.0.iter().map(|&i| dynamics.label(i)).collect()
    }
}

/// `h(f(x, u), d) - h(x, d)`.
pub fn delta_h(h: &BarrierFunction, dynamics: &DiscreteDynamics, x: &[f64], u: &[f64], d: &[f64]) -> f64 {
    h.value(&dynamics.step(x, u), d) - h.value(x, d)
}

/// Alphabet indices whose successor keeps every avoid barrier nonnegative.
pub fn feasible_inputs(spec: &ReachAvoidSpec, dynamics: &DiscreteDynamics, x: &[f64], d: &[f64]) -> Vec<usize> {
    (0..dynamics.alphabet().len())
        .filter(|&i| spec.min_avoid(&dynamics.step_index(x, i), d) >= 0.0)
        .collect()
}

/// Terminal state after applying `sequence` from `x`.
pub fn rollout(dynamics: &DiscreteDynamics, x: &[f64], sequence: &InputSequence) -> StateVector {
    sequence
        .indices()
        .iter()
        .fold(StateVector::from(x), |s, &i| dynamics.step_index(&s, i))
}

/// One-step difficulty with its maximizing alphabet index.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDifficulty {
    pub value: f64,
    /// Lowest-index maximizer (or the maximizing sequence's first input).
    pub maximizer: Option<usize>,
    pub sequence: Option<InputSequence>,
}

impl DiscreteDifficulty {
    pub fn in_gamma(&self) -> bool {
        self.maximizer.is_none()
    }
}

/// `M-bar(x, d)`: best one-step reach-barrier increment over feasible inputs,
/// or `m` when every input leads into an avoid set.
pub fn difficulty_mbar(scn: &DiscreteScenario, x: &[f64], d: &[f64], m: f64) -> DiscreteDifficulty {
    let h = scn.spec.reach();
    let here = h.value(x, d);
    let mut best: Option<(usize, f64)> = None;
    for i in feasible_inputs(&scn.spec, &scn.dynamics, x, d) {
        let inc = h.value(&scn.dynamics.step_index(x, i), d) - here;
        if best.is_none_or(|(_, v)| inc > v) {
            best = Some((i, inc));
        }
    }
    match best {
        Some((i, value)) => DiscreteDifficulty {
            value,
            maximizer: Some(i),
            sequence: None,
        },
        None => DiscreteDifficulty {
            value: m,
            maximizer: None,
            sequence: None,
        },
    }
}

/// Visits every index sequence of length `n` over `k` symbols in
/// lexicographic order.
fn for_each_sequence(k: usize, n: usize, mut visit: impl FnMut(&[usize])) {
    let mut digits = vec![0usize; n];
    loop {
        visit(&digits);
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Sequences of length `n` whose predicted terminal state (or every predicted
/// state, when `path_constrained`) keeps all avoid barriers nonnegative.
pub fn feasible_sequences(
    spec: &ReachAvoidSpec,
    dynamics: &DiscreteDynamics,
    x: &[f64],
    d: &[f64],
    n: usize,
    path_constrained: bool,
) -> Result<Vec<InputSequence>> {
    if n == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1".into()));
    }
    let mut out = Vec::new();
    for_each_sequence(dynamics.alphabet().len(), n, |seq| {
        if predict(spec, dynamics, x, d, seq, path_constrained).is_some() {
            out.push(InputSequence(seq.to_vec()));
        }
    });
    Ok(out)
}

/// Terminal state if the sequence passes the avoid check.
fn predict(
    spec: &ReachAvoidSpec,
    dynamics: &DiscreteDynamics,
    x: &[f64],
    d: &[f64],
    seq: &[usize],
    path_constrained: bool,
) -> Option<StateVector> {
    let mut state = StateVector::from(x);
    for &i in seq {
        state = dynamics.step_index(&state, i);
        if path_constrained && spec.min_avoid(&state, d) < 0.0 {
            return None;
        }
    }
    (spec.min_avoid(&state, d) >= 0.0).then_some(state)
}

/// `M-tilde^N(x, d)`: best `N`-step reach-barrier increment over feasible
/// sequences, or `m` when none exists. Ties keep the lexicographically first
/// sequence.
pub fn difficulty_predictive(
    scn: &DiscreteScenario,
    x: &[f64],
    d: &[f64],
    m: f64,
    n: usize,
) -> Result<DiscreteDifficulty> {
    if n == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1".into()));
    }
    let h = scn.spec.reach();
    let here = h.value(x, d);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_sequence(scn.dynamics.alphabet().len(), n, |seq| {
        if let Some(terminal) = predict(&scn.spec, &scn.dynamics, x, d, seq, scn.path_constrained) {
            let inc = h.value(&terminal, d) - here;
            if best.as_ref().is_none_or(|(_, v)| inc > *v) {
                best = Some((seq.to_vec(), inc));
            }
        }
    });
    Ok(match best {
        Some((seq, value)) => DiscreteDifficulty {
            value,
            maximizer: Some(seq[0]),
            sequence: Some(InputSequence(seq)),
        },
        None => DiscreteDifficulty {
            value: m,
            maximizer: None,
            sequence: None,
        },
    })
}

fn finite_tests(space: &TestSpace) -> Result<&[TestVector]> {
    match space {
        TestSpace::Finite(items) => Ok(items),
        _ => Err(Error::InvalidTestSpace(
            "discrete synthesis needs a finite test set".into(),
        )),
    }
}

fn unmapped(scn: &DiscreteScenario) -> Result<&TestSpace> {
    if scn.test_space.is_mapped() {
        return Err(Error::InvalidTestSpace(
            "state-dependent test maps need synthesize_discrete_constrained".into(),
        ));
    }
    Ok(&scn.test_space)
}

/// Exact one-step minimax over the finite test set.
pub fn synthesize_discrete(
    scn: &DiscreteScenario,
    x: &StateVector,
    m: f64,
    config: &EnumerationConfig,
) -> Result<SynthesisResult> {
    let tests = finite_tests(unmapped(scn)?)?;
    let scan = par::scan_until(
        tests.len(),
        config.chunk_size,
        config.execution,
        |i| difficulty_mbar(scn, x, &tests[i], m),
        DiscreteDifficulty::in_gamma,
    );
    finish(scn, tests, x, scan, m, 1, config)
}

/// Exact `N`-step predictive minimax over the finite test set.
pub fn synthesize_predictive(
    scn: &DiscreteScenario,
    x: &StateVector,
    m: f64,
    n: usize,
    config: &EnumerationConfig,
) -> Result<SynthesisResult> {
    let tests = finite_tests(unmapped(scn)?)?;
    predictive_over(scn, tests, x, m, n, config)
}

/// Predictive synthesis over the test set evaluated at `(x, t)`.
pub fn synthesize_discrete_constrained(
    scn: &DiscreteScenario,
    x: &StateVector,
    t: f64,
    m: f64,
    n: usize,
    config: &EnumerationConfig,
) -> Result<SynthesisResult> {
    let space = scn.test_space.resolve(x, t)?;
    let tests = finite_tests(&space)?;
    predictive_over(scn, tests, x, m, n, config)
}

/// Number of terminal-state evaluations `|U|^N * |D|`.
pub fn enumeration_size(alphabet: usize, n: usize, tests: usize) -> u128 {
    (alphabet as u128)
        .checked_pow(n as u32)
        .and_then(|s| s.checked_mul(tests as u128))
        .unwrap_or(u128::MAX)
}

fn predictive_over(
    scn: &DiscreteScenario,
    tests: &[TestVector],
    x: &StateVector,
    m: f64,
    n: usize,
    config: &EnumerationConfig,
) -> Result<SynthesisResult> {
    if n == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1".into()));
    }
    let required = enumeration_size(scn.dynamics.alphabet().len(), n, tests.len());
    if required > config.budget {
        return Err(Error::BudgetExceeded {
            required,
            budget: config.budget,
        });
    }
    let scan = par::scan_until(
        tests.len(),
        config.chunk_size,
        config.execution,
        |i| difficulty_predictive(scn, x, &tests[i], m, n),
        |r| r.as_ref().map_or(true, DiscreteDifficulty::in_gamma),
    );
    let mut results = Vec::with_capacity(scan.results.len());
    for r in scan.results {
        results.push(r?);
    }
    finish(
        scn,
        tests,
        x,
        par::Scan {
            results,
            first_stop: scan.first_stop,
        },
        m,
        n,
        config,
    )
}

fn finish(
    scn: &DiscreteScenario,
    tests: &[TestVector],
    x: &StateVector,
    scan: par::Scan<DiscreteDifficulty>,
    m: f64,
    n: usize,
    config: &EnumerationConfig,
) -> Result<SynthesisResult> {
    let evaluated = scan.results;
    check_floor(m, evaluated.iter().filter(|d| !d.in_gamma()).map(|d| &d.value))?;
    let mut warnings = Vec::new();
    let best = match scan.first_stop {
        Some(i) => {
            warnings.push("stopped at the first test with no feasible input".to_owned());
            i
        }
        None => {
            let min = evaluated.iter().map(|d| d.value).fold(f64::INFINITY, f64::min);
            let tied: Vec<usize> = (0..evaluated.len()).filter(|&i| evaluated[i].value == min).collect();
            match break_tie(scn, tests, x, m, n + 1, &tied, config)? {
                Some(i) => {
                    warnings.push(format!(
                        "{} tests tie at the minimum; chose the hardest at horizon {}",
                        tied.len(),
                        n + 1
                    ));
                    i
                }
                None => tied[0],
            }
        }
    };
    let chosen = &evaluated[best];
    let alphabet = scn.dynamics.alphabet();
    Ok(SynthesisResult {
        d_star: tests[best].clone(),
        difficulty: chosen.value,
        in_gamma: chosen.in_gamma(),
        inner_maximizer: chosen.maximizer.map(|i| alphabet[i].clone()),
        input_sequence: chosen
            .sequence
            .as_ref()
            .map(|s| s.indices().iter().map(|&i| alphabet[i].clone()).collect()),
        evaluations: evaluated.len(),
        early_exit: scan.first_stop.is_some(),
        candidates: tests.len(),
        warnings,
    })
}

/// Among exactly tied tests, the one with the lowest difficulty one step
/// further ahead (lowest index on a second tie). `None` when there is no tie
/// or the longer horizon would exceed the budget.
fn break_tie(
    scn: &DiscreteScenario,
    tests: &[TestVector],
    x: &StateVector,
    m: f64,
    n: usize,
    tied: &[usize],
    config: &EnumerationConfig,
) -> Result<Option<usize>> {
    if tied.len() < 2 || enumeration_size(scn.dynamics.alphabet().len(), n, tied.len()) > config.budget {
        return Ok(None);
    }
    let scores = par::map_indexed(tied.len(), config.execution, |k| {
        difficulty_predictive(scn, x, &tests[tied[k]], m, n).map(|d| d.value)
    });
    let mut best = (tied[0], f64::INFINITY);
    for (k, score) in scores.into_iter().enumerate() {
        let score = score?;
        if score < best.1 {
            best = (tied[k], score);
        }
    }
    Ok(Some(best.0))
}
