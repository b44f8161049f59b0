//! Step-size selection inside a step range `[lo, hi]`.
//!
//! Each strategy looks at a single component `f_i` from a base point `x_p`
//! along its subgradient `g`, and only ever evaluates `f_i` at projected
//! trial points `P_C(x_p − λ g)`. Whatever happens, the returned step lies in
//! `[lo, hi]`, which is all the convergence theory asks of a strategy.

use crate::error::{Error, Result};
use crate::linalg::{dot, ConstraintSet, Vector};
use crate::problem::Component;

/// Sufficient-decrease constant used when none is configured.
pub const DEFAULT_C1: f64 = 1e-4;

/// Candidate ratios used by [`LineSearch::argmin`].
pub const DEFAULT_RATIOS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// The interval `[lo, hi]` a step must be drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRange {
    lo: f64,
    hi: f64,
}

impl StepRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidStepRange { lo, hi });
        }
        Ok(StepRange { lo, hi })
    }

    /// The degenerate range `[step, step]`.
    pub fn fixed(step: f64) -> Result<Self> {
        StepRange::new(step, step)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, step: f64) -> bool {
        step >= self.lo && step <= self.hi
    }

    fn clamp(&self, step: f64) -> f64 {
        step.clamp(self.lo, self.hi)
    }

    /// `ratio · hi + (1 − ratio) · lo`, kept inside the range.
    fn interpolate(&self, ratio: f64) -> f64 {
        self.clamp(ratio * self.hi + (1.0 - ratio) * self.lo)
    }
}

/// Everything a strategy may look at for one inner step.
#[derive(Debug, Clone, Copy)]
pub struct SearchContext<'a, C: ?Sized> {
    pub base: &'a Vector,
    pub subgradient: &'a Vector,
    pub component: &'a C,
    pub constraint: &'a ConstraintSet,
}

impl<'a, C: Component + ?Sized> SearchContext<'a, C> {
    pub fn new(
        base: &'a Vector,
        subgradient: &'a Vector,
        component: &'a C,
        constraint: &'a ConstraintSet,
    ) -> Self {
        SearchContext {
            base,
            subgradient,
            component,
            constraint,
        }
    }

    /// `P_C(x_p − step · g)`.
    pub fn trial_point(&self, step: f64) -> Vector {
        self.constraint
            .project(&self.base.moved(step, self.subgradient))
    }

    /// `f_i(P_C(x_p − step · g))`.
    pub fn trial_value(&self, step: f64) -> f64 {
        self.component.value(&self.trial_point(step))
    }

    /// Slack of the sufficient-decrease test at `step`:
    /// `f_i(x_p) − c1·⟨x_p − P_C(x_p − step·g), g⟩ − f_i(P_C(x_p − step·g))`.
    /// The step is accepted when this is nonnegative.
    pub fn armijo_slack(&self, step: f64, c1: f64, base_value: f64) -> f64 {
        let trial = self.trial_point(step);
        let displacement = self.base.sub(&trial);
        base_value - c1 * dot(&displacement, self.subgradient) - self.component.value(&trial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Success,
    /// No candidate passed the test; the step is the range minimum.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOutcome {
    pub step: f64,
    pub status: SearchStatus,
}

impl SearchOutcome {
    fn success(step: f64) -> Self {
        SearchOutcome {
            step,
            status: SearchStatus::Success,
        }
    }
}

/// A step-selection strategy with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum LineSearch {
    /// Use the single value of a degenerate range.
    Fixed,
    /// Best of `ratio · hi + (1 − ratio) · lo` over the listed ratios.
    DiscreteArgmin { ratios: Vec<f64> },
    /// Armijo test on a uniform grid walked from `hi` down to `lo`.
    ArmijoUniform { spacing: f64, c1: f64 },
    /// Armijo test at `lo + (hi − lo)/base^j` for `j = 0..=depth`.
    ArmijoLog { base: u32, depth: u32, c1: f64 },
}

impl LineSearch {
    pub fn argmin() -> Self {
        LineSearch::DiscreteArgmin {
            ratios: DEFAULT_RATIOS.to_vec(),
        }
    }

    pub fn armijo_uniform(spacing: f64) -> Self {
        LineSearch::ArmijoUniform {
            spacing,
            c1: DEFAULT_C1,
        }
    }

    pub fn armijo_log(base: u32, depth: u32) -> Self {
        LineSearch::ArmijoLog {
            base,
            depth,
            c1: DEFAULT_C1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_c1 = |c1: f64| {
            if c1 > 0.0 && c1 < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("c1 must lie in (0, 1), got {c1}")))
            }
        };
        match self {
            LineSearch::Fixed => Ok(()),
            LineSearch::DiscreteArgmin { ratios } => {
                if ratios.is_empty() {
                    return Err(Error::InvalidParameter("argmin needs at least one ratio".into()));
                }
                if let Some(r) = ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
                    return Err(Error::InvalidParameter(format!(
                        "argmin ratio {r} outside [0, 1]"
                    )));
                }
                Ok(())
            }
            LineSearch::ArmijoUniform { spacing, c1 } => {
                if !(*spacing > 0.0 && *spacing <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "grid spacing must lie in (0, 1], got {spacing}"
                    )));
                }
                check_c1(*c1)
            }
            LineSearch::ArmijoLog { base, depth, c1 } => {
                if *base < 2 {
                    return Err(Error::InvalidParameter(format!(
                        "logarithmic grid base must be >= 2, got {base}"
                    )));
                }
                if *depth < 1 {
                    return Err(Error::InvalidParameter("logarithmic grid depth must be >= 1".into()));
                }
                check_c1(*c1)
            }
        }
    }

    /// Picks a step in `range` for the given context.
    pub fn search<C: Component + ?Sized>(
        &self,
        ctx: &SearchContext<'_, C>,
        range: StepRange,
    ) -> Result<SearchOutcome> {
        match self {
            LineSearch::Fixed => fixed_step(range),
            LineSearch::DiscreteArgmin { ratios } => Ok(discrete_argmin(ctx, range, ratios)),
            LineSearch::ArmijoUniform { spacing, c1 } => {
                Ok(armijo_uniform(ctx, range, *spacing, *c1))
            }
            LineSearch::ArmijoLog { base, depth, c1 } => {
                Ok(armijo_log(ctx, range, *base, *depth, *c1))
            }
        }
    }
}

/// Returns the step of a degenerate range.
pub fn fixed_step(range: StepRange) -> Result<SearchOutcome> {
    if !range.is_degenerate() {
        return Err(Error::NotFixedRange {
            lo: range.lo,
            hi: range.hi,
        });
    }
    Ok(SearchOutcome::success(range.lo))
}

/// Evaluates every candidate and keeps the smallest `f_i`; ties go to the
/// earliest ratio.
pub fn discrete_argmin<C: Component + ?Sized>(
    ctx: &SearchContext<'_, C>,
    range: StepRange,
    ratios: &[f64],
) -> SearchOutcome {
    assert!(!ratios.is_empty(), "argmin needs at least one ratio");
    let mut best = range.interpolate(ratios[0]);
    let mut best_value = ctx.trial_value(best);
    for &ratio in &ratios[1..] {
        let step = range.interpolate(ratio);
        let value = ctx.trial_value(step);
        if value < best_value {
            best = step;
            best_value = value;
        }
    }
    SearchOutcome::success(best)
}

/// Grid positions `0, d, 2d, …, 1` used by [`armijo_uniform`]. The last
/// entry is exactly 1 even when `1/d` is not an integer.
pub fn uniform_grid(spacing: f64) -> Vec<f64> {
    assert!(spacing > 0.0 && spacing <= 1.0, "grid spacing must lie in (0, 1]");
    let mut grid = Vec::new();
    let mut j = 0u64;
    loop {
        let t = j as f64 * spacing;
        // Absorb rounding so that e.g. d = 0.1 does not emit 0.9999999 and 1.
        if t >= 1.0 - 1e-12 {
            grid.push(1.0);
            return grid;
        }
        grid.push(t);
        j += 1;
    }
}

/// Multipliers `1, 1/a, …, 1/a^k` used by [`armijo_log`].
pub fn log_grid(base: u32, depth: u32) -> Vec<f64> {
    assert!(base >= 2, "logarithmic grid base must be >= 2");
    let a = f64::from(base);
    (0..=depth as i32).map(|j| a.powi(-j)).collect()
}

/// Armijo search walking from `hi` (grid value 0) down to `lo` (grid value
/// 1) in steps of `spacing`.
pub fn armijo_uniform<C: Component + ?Sized>(
    ctx: &SearchContext<'_, C>,
    range: StepRange,
    spacing: f64,
    c1: f64,
) -> SearchOutcome {
    let steps = uniform_grid(spacing)
        .into_iter()
        .map(|t| range.clamp((1.0 - t) * range.hi + t * range.lo));
    first_sufficient_decrease(ctx, range, steps, c1)
}

/// Armijo search at `I·hi + (1 − I)·lo` for `I = 1, 1/a, …, 1/a^k`.
pub fn armijo_log<C: Component + ?Sized>(
    ctx: &SearchContext<'_, C>,
    range: StepRange,
    base: u32,
    depth: u32,
    c1: f64,
) -> SearchOutcome {
    let steps = log_grid(base, depth)
        .into_iter()
        .map(|t| range.interpolate(t));
    first_sufficient_decrease(ctx, range, steps, c1)
}

fn first_sufficient_decrease<C, I>(
    ctx: &SearchContext<'_, C>,
    range: StepRange,
    steps: I,
    c1: f64,
) -> SearchOutcome
where
    C: Component + ?Sized,
    I: IntoIterator<Item = f64>,
{
    let base_value = ctx.component.value(ctx.base);
    for step in steps {
        if ctx.armijo_slack(step, c1, base_value) >= 0.0 {
            return SearchOutcome::success(step);
        }
    }
    SearchOutcome {
        step: range.lo,
        status: SearchStatus::Fallback,
    }
}
