use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use adversary_core::par::map_indexed;
use adversary_core::scenarios::gridworld::RewardCache;
use adversary_core::scenarios::{greedy_safe_controller, simulate_adversarial, SimulationConfig};
use adversary_core::{StateVector, SynthesisResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ScenarioKind, Settings};
use crate::error::CliError;
use crate::output::{self, float, floats};
use crate::scenario::{self, Built, FloorReport};

pub struct Context {
    pub settings: Settings,
    pub state: Option<Vec<f64>>,
    pub out: Option<std::path::PathBuf>,
}

impl Context {
    fn state(&self, built: &Built, default: Option<Vec<f64>>) -> Result<StateVector, CliError> {
        let x = self
            .state
            .clone()
            .or_else(|| self.settings.state.clone())
            .or(default)
            .ok_or_else(|| CliError::Config("no state given: pass --state or set `state`".into()))?;
        if x.len() != built.state_dim() {
            return Err(CliError::Config(format!(
                "state has {} entries, the scenario needs {}",
                x.len(),
                built.state_dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config("state entries must be finite".into()));
        }
        Ok(StateVector::new(x))
    }

    fn out_dir(&self) -> &Path {
        self.out.as_deref().unwrap_or(Path::new("."))
    }
}

#[derive(Serialize)]
struct ResultJson {
    d_star: Vec<f64>,
    difficulty: f64,
    in_gamma: bool,
    evaluations: usize,
    candidates: usize,
    early_exit: bool,
    inner_maximizer: Option<Vec<f64>>,
    input_sequence: Option<Vec<Vec<f64>>>,
    warnings: Vec<String>,
}

impl From<&SynthesisResult> for ResultJson {
    fn from(r: &SynthesisResult) -> Self {
        Self {
            d_star: r.d_star.to_vec(),
            difficulty: r.difficulty,
            in_gamma: r.in_gamma,
            evaluations: r.evaluations,
            candidates: r.candidates,
            early_exit: r.early_exit,
            inner_maximizer: r.inner_maximizer.as_ref().map(|u| u.to_vec()),
            input_sequence: r.input_sequence.as_ref().map(|s| s.iter().map(|u| u.to_vec()).collect()),
            warnings: r.warnings.clone(),
        }
    }
}

#[derive(Serialize)]
struct SynthJson<'a> {
    command: &'static str,
    seed: u64,
    state: Vec<f64>,
    floor: FloorReport,
    #[serde(flatten)]
    result: ResultJson,
    config: &'a Settings,
}

pub fn synth(ctx: &Context) -> Result<String, CliError> {
    let cache = Arc::new(RewardCache::new());
    let built = scenario::build(&ctx.settings, &cache)?;
    let x = ctx.state(&built, None)?;
    let floor = built.floor(&ctx.settings)?;
    let r = built.synthesize(&x, 0.0, floor.m, &ctx.settings)?;
    let text = output::json(&SynthJson {
        command: "synth",
        seed: ctx.settings.seed,
        state: x.to_vec(),
        floor: FloorReport::from(&floor),
        result: ResultJson::from(&r),
        config: &ctx.settings,
    })?;
    if let Some(dir) = &ctx.out {
        output::write(dir, "synth.json", &text)?;
    }
    Ok(text)
}

/// One swept test component: `index:lo:hi:n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("axis `{spec}`: expected index:lo:hi:n, e.g. 0:-1:1:50"));
        let parts: Vec<&str> = spec.split(':').collect();
        let [i, lo, hi, n] = parts.as_slice() else { return Err(bad()) };
        let axis = Self {
            index: i.trim().parse().map_err(|_| bad())?,
            lo: lo.trim().parse().map_err(|_| bad())?,
            hi: hi.trim().parse().map_err(|_| bad())?,
            n: n.trim().parse().map_err(|_| bad())?,
        };
        if axis.n == 0 || !axis.lo.is_finite() || !axis.hi.is_finite() || axis.hi < axis.lo {
            return Err(bad());
        }
        if axis.n == 1 && axis.lo != axis.hi {
            return Err(CliError::Config(format!("axis `{spec}`: a single point needs lo = hi")));
        }
        Ok(axis)
    }

    pub fn value(&self, k: usize) -> f64 {
        if self.n == 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64
        }
    }

    fn values(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.value(k)).collect()
    }
}

#[derive(Serialize)]
struct Cell {
    row: usize,
    col: usize,
    d: Vec<f64>,
    value: f64,
}

#[derive(Serialize)]
struct SweepJson<'a> {
    command: &'static str,
    seed: u64,
    state: Vec<f64>,
    axes: &'a [Axis],
    base_test: Vec<f64>,
    floor: FloorReport,
    rows: usize,
    cols: usize,
    cells_below_floor: usize,
    minimum: Cell,
    synthesized: ResultJson,
    /// `synthesized.difficulty - minimum.value`; negative when the search
    /// found a test between sweep grid points.
    overlay_gap: f64,
    note: &'static str,
    config: &'a Settings,
}

pub fn sweep(ctx: &Context, axes: &[Axis]) -> Result<String, CliError> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(CliError::Config(format!(
            "sweeps take one or two axes, got {}; fix the remaining components with `sweep_base`",
            axes.len()
        )));
    }
    let cache = Arc::new(RewardCache::new());
    let built = scenario::build(&ctx.settings, &cache)?;
    let x = ctx.state(&built, None)?;
    let base = match &ctx.settings.sweep_base {
        Some(b) => b.clone(),
        None => built.base_test(&x)?.to_vec(),
    };
    for a in axes {
        if a.index >= base.len() {
            return Err(CliError::Config(format!(
                "axis index {} out of range for {}-dimensional tests",
                a.index,
                base.len()
            )));
        }
    }
    let floor = built.floor(&ctx.settings)?;
    let (row_axis, col_axis) = (&axes[0], axes.get(1));
    let cols = col_axis.map_or(1, |a| a.n);
    let rows = row_axis.n;
    let test_at = |i: usize| {
        let mut d = base.clone();
        d[row_axis.index] = row_axis.value(i / cols);
        if let Some(a) = col_axis {
            d[a.index] = a.value(i % cols);
        }
        d
    };
    let values = map_indexed(rows * cols, ctx.settings.execution.into(), |i| {
        built.difficulty(&x, &test_at(i), floor.m, &ctx.settings)
    })
    .into_iter()
    .collect::<Result<Vec<f64>, _>>()?;

    let mut header = vec![match col_axis {
        Some(c) => format!("d{}\\d{}", row_axis.index, c.index),
        None => format!("d{}", row_axis.index),
    }];
    match col_axis {
        Some(c) => header.extend(floats(&c.values())),
        None => header.push("value".into()),
    }
    let body: Vec<Vec<String>> = (0..rows)
        .map(|r| {
            std::iter::once(float(row_axis.value(r)))
                .chain(floats(&values[r * cols..(r + 1) * cols]))
                .collect()
        })
        .collect();

    let argmin = (1..values.len()).fold(0, |best, i| if values[i] < values[best] { i } else { best });
    let synthesized = built.synthesize(&x, 0.0, floor.m, &ctx.settings)?;
    let json = output::json(&SweepJson {
        command: "sweep",
        seed: ctx.settings.seed,
        state: x.to_vec(),
        axes,
        base_test: base.clone(),
        floor: FloorReport::from(&floor),
        rows,
        cols,
        cells_below_floor: values.iter().filter(|v| **v < floor.m).count(),
        minimum: Cell {
            row: argmin / cols,
            col: argmin % cols,
            d: test_at(argmin),
            value: values[argmin],
        },
        overlay_gap: synthesized.difficulty - values[argmin],
        synthesized: ResultJson::from(&synthesized),
        note: "the synthesizer searches the full test space at its own resolution; \
               its d* matches the sweep minimum only up to the sweep grid spacing",
        config: &ctx.settings,
    })?;
    let dir = ctx.out_dir();
    output::write(dir, "sweep.csv", &output::csv(&header, &body))?;
    output::write(dir, "sweep.json", &json)?;
    Ok(json)
}

#[derive(Debug, Clone, Serialize)]
struct TrialRow {
    trial: usize,
    goal: Option<Vec<f64>>,
    state: Vec<f64>,
    d_star: Vec<f64>,
    difficulty: f64,
    in_gamma: bool,
    evaluations: usize,
    attained: bool,
}

#[derive(Serialize)]
struct Stats {
    min: f64,
    mean: f64,
    max: f64,
}

impl Stats {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let n = values.clone().count() as f64;
        Self {
            min: values.clone().fold(f64::INFINITY, f64::min),
            mean: values.clone().sum::<f64>() / n,
            max: values.fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Serialize)]
struct TrialsJson<'a> {
    command: &'static str,
    seed: u64,
    count: usize,
    criterion: &'static str,
    attained: usize,
    fraction: f64,
    difficulty: Stats,
    evaluations: Stats,
    config: &'a Settings,
}

fn random_cell(rng: &mut ChaCha8Rng) -> [usize; 2] {
    [rng.random_range(0..10), rng.random_range(0..10)]
}

pub fn trials(ctx: &Context, count: usize, timing: bool) -> Result<String, CliError> {
    if count == 0 {
        return Err(CliError::Config("--count must be at least 1".into()));
    }
    let settings = &ctx.settings;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let cache = Arc::new(RewardCache::new());
    let built = scenario::build(settings, &cache)?;
    let floor = built.floor(settings)?;
    let grid = settings.scenario == ScenarioKind::Gridworld;

    // Draw every instance up front so results do not depend on scheduling.
    let instances: Vec<(Option<[usize; 2]>, Vec<f64>)> = (0..count)
        .map(|_| {
            if grid {
                let goal = random_cell(&mut rng);
                let mut x = goal;
                while x == goal {
                    x = random_cell(&mut rng);
                }
                (Some(goal), vec![x[0] as f64, x[1] as f64])
            } else {
                let b = built.state_bounds();
                let x = b.lower().iter().zip(b.upper()).map(|(l, u)| rng.random_range(*l..=*u)).collect();
                (None, x)
            }
        })
        .collect();

    let outcomes = map_indexed(count, settings.execution.into(), |i| -> Result<(TrialRow, f64), CliError> {
        let start = Instant::now();
        let (goal, x) = &instances[i];
        let x = StateVector::new(x.clone());
        let (r, attained) = match goal {
            Some(g) => {
                let scn = Built::Discrete(scenario::grid_for_goal(settings, *g, &cache)?);
                let r = scn.synthesize(&x, 0.0, floor.m, settings)?;
                let hit = r.d_star.as_slice() == [g[0] as f64, g[1] as f64] && r.difficulty == 0.0;
                (r, hit)
            }
            None => {
                let r = built.synthesize(&x, 0.0, floor.m, settings)?;
                let hit = r.difficulty == floor.m;
                (r, hit)
            }
        };
        let row = TrialRow {
            trial: i,
            goal: goal.map(|g| vec![g[0] as f64, g[1] as f64]),
            state: x.to_vec(),
            d_star: r.d_star.to_vec(),
            difficulty: r.difficulty,
            in_gamma: r.in_gamma,
            evaluations: r.evaluations,
            attained,
        };
        Ok((row, start.elapsed().as_secs_f64()))
    });
    let (rows, seconds): (Vec<TrialRow>, Vec<f64>) = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().unzip();

    let attained = rows.iter().filter(|r| r.attained).count();
    let summary = output::json(&TrialsJson {
        command: "trials",
        seed: settings.seed,
        count,
        criterion: if grid { "d_star = goal and difficulty = 0" } else { "difficulty = floor" },
        attained,
        fraction: attained as f64 / count as f64,
        difficulty: Stats::of(rows.iter().map(|r| r.difficulty)),
        evaluations: Stats::of(rows.iter().map(|r| r.evaluations as f64)),
        config: settings,
    })?;

    let first = &rows[0];
    let mut header = vec!["trial".to_string()];
    if grid {
        header.extend(["goal0".into(), "goal1".into()]);
    }
    header.extend((0..first.state.len()).map(|i| format!("x{i}")));
    header.extend((0..first.d_star.len()).map(|i| format!("d{i}")));
    header.extend(["difficulty", "in_gamma", "evaluations", "attained"].map(String::from));
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.trial.to_string()];
            if let Some(g) = &r.goal {
                cells.extend(floats(g));
            }
            cells.extend(floats(&r.state));
            cells.extend(floats(&r.d_star));
            cells.push(float(r.difficulty));
            cells.push(r.in_gamma.to_string());
            cells.push(r.evaluations.to_string());
            cells.push(r.attained.to_string());
            cells
        })
        .collect();
    let dir = ctx.out_dir();
    output::write(dir, "trials.csv", &output::csv(&header, &body))?;
    output::write(dir, "summary.json", &summary)?;
    if timing {
        #[derive(Serialize)]
        struct Timing {
            seconds: Stats,
            total: f64,
            per_trial: Vec<f64>,
        }
        let t = Timing {
            seconds: Stats::of(seconds.iter().copied()),
            total: seconds.iter().sum(),
            per_trial: seconds,
        };
        output::write(dir, "timing.json", &output::json(&t)?)?;
    }
    Ok(summary)
}

#[derive(Serialize)]
struct MonitorJson<'a> {
    command: &'static str,
    seed: u64,
    initial_state: Vec<f64>,
    floor: FloorReport,
    satisfied: bool,
    reach_time: Option<f64>,
    /// `null` when the scenario has no avoid barriers.
    min_avoid_value: Option<f64>,
    progress_steps: usize,
    samples: usize,
    commands: usize,
    aborted: Option<AbortJson>,
    config: &'a Settings,
}

#[derive(Serialize)]
struct AbortJson {
    time: f64,
    reason: String,
}

pub fn simulate(ctx: &Context, horizon: Option<f64>) -> Result<String, CliError> {
    let mut settings = ctx.settings.clone();
    if let Some(h) = horizon {
        if !(h >= 0.0 && h.is_finite()) {
            return Err(CliError::Config("--horizon must be finite and nonnegative".into()));
        }
        settings.sim_horizon = h;
    }
    let cache = Arc::new(RewardCache::new());
    let built = scenario::build(&settings, &cache)?;
    let default_state = match settings.scenario {
        ScenarioKind::Unicycle => vec![-0.5, 0.5, PI / 4.0],
        ScenarioKind::Quadgrid => vec![0.3, 1.7],
        ScenarioKind::Gridworld => {
            return Err(CliError::Config(
                "simulate needs a continuous scenario (unicycle or quadgrid)".into(),
            ))
        }
    };
    let Built::Continuous(scn) = &built else { unreachable!() };
    let x0 = ctx.state(&built, Some(default_state))?;
    let floor = built.floor(&settings)?;
    let cfg = SimulationConfig {
        dt: settings.dt,
        synth_period: settings.synth_period,
        horizon: settings.sim_horizon,
        obstacle_speed: settings.obstacle_speed,
        obstacle_block: 2,
        floor: floor.m,
        search: scenario::search_config(&settings),
        initial_test: None,
    };
    let log = simulate_adversarial(scn, &x0, greedy_safe_controller, &cfg)?;

    let first = &log.samples[0];
    let mut header = vec!["time".to_string()];
    header.extend((0..first.state.len()).map(|i| format!("x{i}")));
    header.extend((0..first.input.len()).map(|i| format!("u{i}")));
    header.extend((0..first.commanded.len()).map(|i| format!("commanded{i}")));
    header.extend((0..first.actual.len()).map(|i| format!("actual{i}")));
    header.push("min_barrier".into());
    let trajectory: Vec<Vec<String>> = log
        .samples
        .iter()
        .map(|s| {
            std::iter::once(float(s.time))
                .chain(floats(&s.state))
                .chain(floats(&s.input))
                .chain(floats(&s.commanded))
                .chain(floats(&s.actual))
                .chain(std::iter::once(float(s.min_barrier)))
                .collect()
        })
        .collect();
    let barrier: Vec<Vec<String>> = log
        .min_barrier_series()
        .into_iter()
        .map(|(t, v)| vec![float(t), float(v)])
        .collect();
    let monitor = output::json(&MonitorJson {
        command: "simulate",
        seed: settings.seed,
        initial_state: x0.to_vec(),
        floor: FloorReport::from(&floor),
        satisfied: log.monitor.satisfied,
        reach_time: log.monitor.reach_time,
        min_avoid_value: Some(log.monitor.min_avoid_value).filter(|v| v.is_finite()),
        progress_steps: log.monitor.progress_steps,
        samples: log.samples.len(),
        commands: log.commands.len(),
        aborted: log.abort.as_ref().map(|a| AbortJson {
            time: a.time,
            reason: a.reason.clone(),
        }),
        config: &settings,
    })?;
    let dir = ctx.out_dir();
    output::write(dir, "trajectory.csv", &output::csv(&header, &trajectory))?;
    output::write(dir, "min_barrier.csv", &output::csv(&["time".into(), "min_barrier".into()], &barrier))?;
    output::write(dir, "monitor.json", &monitor)?;
    if let Some(a) = &log.abort {
        return Err(CliError::Runtime(format!(
            "simulation aborted at t = {}: {} (partial logs written)",
            a.time, a.reason
        )));
    }
    Ok(monitor)
}
