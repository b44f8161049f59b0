//! Outer iterations: the plain projected subgradient step, the incremental
//! method, the parallel method, and the driver that runs them under a step
//! schedule while recording a trace.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::linesearch::{LineSearch, SearchContext, SearchOutcome, SearchStatus, StepRange};
use crate::problem::{Component, Problem};
use crate::schedule::{require_admissible, StepSchedule};

/// Window length of the optional early-stop rule.
pub const EARLY_STOP_WINDOW: usize = 100;
/// Minimum objective decrease over [`EARLY_STOP_WINDOW`] iterations.
pub const EARLY_STOP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// `x ← P_C(x − s·g)` with `g` a subgradient of the whole sum.
    Baseline,
    /// Components visited in order, each step starting where the last ended.
    Incremental,
    /// Every component steps from the same point; the results are averaged.
    Parallel,
}

/// Which descent inequality [`lemma_gap`] checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaMode {
    /// Weight 1 on the decrease term.
    Incremental,
    /// Weight `1/K` on the decrease term.
    Parallel,
}

impl From<Method> for LemmaMode {
    fn from(m: Method) -> Self {
        match m {
            Method::Baseline | Method::Incremental => LemmaMode::Incremental,
            Method::Parallel => LemmaMode::Parallel,
        }
    }
}

/// Steps chosen during one outer iteration, in component order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepDiagnostics {
    pub steps: Vec<f64>,
    pub fallbacks: usize,
}

impl StepDiagnostics {
    fn push(&mut self, outcome: SearchOutcome) {
        self.steps.push(outcome.step);
        if outcome.status == SearchStatus::Fallback {
            self.fallbacks += 1;
        }
    }
}

/// One step of the plain projected subgradient method with step `s`.
pub fn baseline_step<C: Component>(problem: &Problem<C>, x: &Vector, s: f64) -> Vector {
    let g = problem.subgradient(x);
    problem.project(&x.moved(s, &g))
}

/// One outer iteration of the incremental method.
///
/// Visits the components in stored order; component `i` takes its subgradient
/// and its line search at `y_{i−1}` and produces `y_i = P_C(y_{i−1} − λ_i g_i)`.
pub fn ism_iteration<C: Component>(
    problem: &Problem<C>,
    x: &Vector,
    range: StepRange,
    search: &LineSearch,
) -> Result<(Vector, StepDiagnostics)> {
    let constraint = problem.constraint();
    let mut y = x.clone();
    let mut diag = StepDiagnostics {
        steps: Vec::with_capacity(problem.len()),
        fallbacks: 0,
    };
    for component in problem.components() {
        let g = component.subgradient(&y);
        let ctx = SearchContext::new(&y, &g, component, constraint);
        let outcome = search.search(&ctx, range)?;
        let next = constraint.project(&y.moved(outcome.step, &g));
        diag.push(outcome);
        y = next;
    }
    Ok((y, diag))
}

/// One outer iteration of the parallel method.
///
/// Each component independently steps from `x`; the next iterate is the mean
/// of the `K` results, summed in component order. With `parallel` the map runs
/// on the current rayon pool, and the result is bit-identical either way.
pub fn psm_iteration<C: Component>(
    problem: &Problem<C>,
    x: &Vector,
    range: StepRange,
    search: &LineSearch,
    parallel: bool,
) -> Result<(Vector, StepDiagnostics)> {
    let constraint = problem.constraint();
    let step_one = |component: &C| -> Result<(Vector, SearchOutcome)> {
        let g = component.subgradient(x);
        let ctx = SearchContext::new(x, &g, component, constraint);
        let outcome = search.search(&ctx, range)?;
        Ok((constraint.project(&x.moved(outcome.step, &g)), outcome))
    };
    let results: Vec<(Vector, SearchOutcome)> = if parallel {
        problem.components().par_iter().map(step_one).collect::<Result<_>>()?
    } else {
        problem.components().iter().map(step_one).collect::<Result<_>>()?
    };
    let mut diag = StepDiagnostics {
        steps: Vec::with_capacity(results.len()),
        fallbacks: 0,
    };
    let mut points = Vec::with_capacity(results.len());
    for (y, outcome) in results {
        diag.push(outcome);
        points.push(y);
    }
    Ok((Vector::mean(&points), diag))
}

/// Right-hand side minus left-hand side of the per-iteration descent
/// inequality
///
/// ```text
/// ‖x_next − y‖² ≤ ‖x − y‖² − 2w Σ_i λ_i (f_i(x) − f_i(y)) + hi² M²
/// ```
///
/// with `w = 1` for [`LemmaMode::Incremental`] and `w = 1/K` for
/// [`LemmaMode::Parallel`]. A nonnegative gap means the iteration obeyed it.
pub fn lemma_gap<C: Component>(
    problem: &Problem<C>,
    x: &Vector,
    x_next: &Vector,
    y: &Vector,
    steps: &[f64],
    range: StepRange,
    mode: LemmaMode,
) -> f64 {
    assert_eq!(steps.len(), problem.len(), "one step per component");
    let weight = match mode {
        LemmaMode::Incremental => 1.0,
        LemmaMode::Parallel => 1.0 / problem.len() as f64,
    };
    let decrease: f64 = problem
        .components()
        .iter()
        .zip(steps)
        .map(|(c, &lambda)| lambda * (c.value(x) - c.value(y)))
        .sum();
    let m = problem.total_bound();
    let rhs = x.distance_squared(y) - 2.0 * weight * decrease + range.hi() * range.hi() * m * m;
    rhs - x_next.distance_squared(y)
}

/// Everything [`run`] needs besides the problem and start point.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: Method,
    pub schedule: StepSchedule,
    pub search: LineSearch,
    pub max_iterations: usize,
    /// Record the descent-inequality gap each iteration.
    pub monitor_lemmas: bool,
    /// Witness points for the gap; when empty, the best iterate so far is used.
    pub reference_points: Vec<Vector>,
    /// Worker threads for the parallel method; 1 runs its map sequentially.
    pub threads: usize,
    /// Refuse schedules that fail the admissibility check.
    pub strict: bool,
    pub early_stop: bool,
}

impl SolverConfig {
    pub fn new(method: Method, schedule: StepSchedule, search: LineSearch) -> Self {
        SolverConfig {
            method,
            schedule,
            search,
            max_iterations: 1000,
            monitor_lemmas: false,
            reference_points: Vec::new(),
            threads: 1,
            strict: true,
            early_stop: false,
        }
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_lemma_monitor(mut self, reference_points: Vec<Vector>) -> Self {
        self.monitor_lemmas = true;
        self.reference_points = reference_points;
        self
    }

    /// Checks everything that can be checked before iterating.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::InvalidParameter("threads must be >= 1".into()));
        }
        self.search.validate()?;
        let known_family = !matches!(self.schedule, StepSchedule::Custom(_));
        if self.search == LineSearch::Fixed && known_family && !self.schedule.is_fixed() {
            return Err(Error::InvalidParameter(
                "the fixed search needs a schedule with lo = hi".into(),
            ));
        }
        if self.method == Method::Baseline && self.search != LineSearch::Fixed {
            return Err(Error::InvalidParameter(
                "the baseline method only supports the fixed search".into(),
            ));
        }
        for y in &self.reference_points {
            y.check_dim(dim)?;
        }
        if self.strict {
            require_admissible(&self.schedule)?;
        }
        Ok(())
    }
}

/// Per-outer-iteration trace entry.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub n: usize,
    /// Objective at the iterate produced by iteration `n`.
    pub f_value: f64,
    /// Time since the run started, excluding lemma monitoring.
    pub elapsed_seconds: f64,
    /// Step used by each component (the baseline repeats its single step).
    pub steps: Vec<f64>,
    pub fallbacks: usize,
    /// Smallest gap over the witness points, when monitoring.
    pub lemma_gap: Option<f64>,
}

impl IterationRecord {
    pub fn min_step(&self) -> f64 {
        self.steps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_step(&self) -> f64 {
        self.steps.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_point: Vector,
    pub trace: Vec<IterationRecord>,
    pub wall_time: f64,
}

impl RunResult {
    pub fn final_value(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.f_value)
    }
}

/// Runs `config.method` from `start` for `config.max_iterations` outer
/// iterations (fewer if early stopping is on and fires).
///
/// `start` is projected onto the constraint set first. The trajectory depends
/// only on the inputs, including under a multi-threaded pool.
pub fn run<C: Component>(
    problem: &Problem<C>,
    start: &Vector,
    config: &SolverConfig,
) -> Result<RunResult> {
    start.check_dim(problem.dim())?;
    config.validate(problem.dim())?;
    if config.method == Method::Parallel && config.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| run_loop(problem, start, config, true))
    } else {
        run_loop(problem, start, config, false)
    }
}

fn run_loop<C: Component>(
    problem: &Problem<C>,
    start: &Vector,
    config: &SolverConfig,
    parallel: bool,
) -> Result<RunResult> {
    let mut x = problem.project(start);
    let mut best = (problem.objective(&x), x.clone());
    let mut trace = Vec::with_capacity(config.max_iterations);
    let mode = LemmaMode::from(config.method);
    let started = Instant::now();
    let mut monitor_time = Duration::ZERO;

    for n in 1..=config.max_iterations {
        let range = config.schedule.range(n)?;
        let (next, diag) = match config.method {
            Method::Baseline => {
                let s = crate::linesearch::fixed_step(range)?.step;
                let next = baseline_step(problem, &x, s);
                let diag = StepDiagnostics {
                    steps: vec![s; problem.len()],
                    fallbacks: 0,
                };
                (next, diag)
            }
            Method::Incremental => ism_iteration(problem, &x, range, &config.search)?,
            Method::Parallel => psm_iteration(problem, &x, range, &config.search, parallel)?,
        };
        let f_value = problem.objective(&next);
        let elapsed = started.elapsed().saturating_sub(monitor_time);

        let lemma_gap = if config.monitor_lemmas {
            let t = Instant::now();
            let gap_at = |y: &Vector| lemma_gap(problem, &x, &next, y, &diag.steps, range, mode);
            let gap = if config.reference_points.is_empty() {
                gap_at(&best.1)
            } else {
                config
                    .reference_points
                    .iter()
                    .map(gap_at)
                    .fold(f64::INFINITY, f64::min)
            };
            monitor_time += t.elapsed();
            Some(gap)
        } else {
            None
        };

        trace.push(IterationRecord {
            n,
            f_value,
            elapsed_seconds: elapsed.as_secs_f64(),
            steps: diag.steps,
            fallbacks: diag.fallbacks,
            lemma_gap,
        });
        if f_value < best.0 {
            best = (f_value, next.clone());
        }
        x = next;

        if config.early_stop && n > EARLY_STOP_WINDOW {
            let earlier = trace[n - 1 - EARLY_STOP_WINDOW].f_value;
            if earlier - f_value < EARLY_STOP_TOL {
                break;
            }
        }
    }

    let wall_time = started.elapsed().saturating_sub(monitor_time).as_secs_f64();
    Ok(RunResult {
        final_point: x,
        trace,
        wall_time,
    })
}
