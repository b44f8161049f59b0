//! Step-range schedules `n ↦ [lo(n), hi(n)]` and their admissibility.
//!
//! The convergence guarantee of both solvers needs four properties of the
//! schedule:
//!
//! 1. `Σ hi(n) = ∞`
//! 2. `Σ hi(n)² < ∞`
//! 3. `lo(n) / hi(n) → 1`
//! 4. `Σ (hi(n) − lo(n)) < ∞`
//!
//! These are statements about infinite series, so [`StepSchedule::validate`]
//! decides them in closed form for each known family. Custom schedules can
//! only declare admissibility; they get finite sanity probes, never a proof.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linesearch::StepRange;

/// Number of leading indices probed for custom schedules.
pub const PROBE_INDICES: usize = 1_000_000;

/// A step-range schedule indexed from `n = 1`.
#[derive(Clone)]
pub enum StepSchedule {
    /// `lo = c/(n + lo_offset)`, `hi = c/(n + hi_offset)`.
    HarmonicRange {
        scale: f64,
        lo_offset: f64,
        hi_offset: f64,
    },
    /// `lo = hi = c/n`, the classic diminishing step.
    Harmonic { scale: f64 },
    /// `lo = hi = c/n^p`.
    PowerLaw { scale: f64, exponent: f64 },
    Custom(CustomSchedule),
}

/// A user-supplied schedule with declared admissibility.
#[derive(Clone)]
pub struct CustomSchedule {
    pub name: String,
    pub range: Arc<dyn Fn(usize) -> StepRange + Send + Sync>,
    pub declared_admissible: bool,
}

impl fmt::Debug for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSchedule::HarmonicRange {
                scale,
                lo_offset,
                hi_offset,
            } => f
                .debug_struct("HarmonicRange")
                .field("scale", scale)
                .field("lo_offset", lo_offset)
                .field("hi_offset", hi_offset)
                .finish(),
            StepSchedule::Harmonic { scale } => {
                f.debug_struct("Harmonic").field("scale", scale).finish()
            }
            StepSchedule::PowerLaw { scale, exponent } => f
                .debug_struct("PowerLaw")
                .field("scale", scale)
                .field("exponent", exponent)
                .finish(),
            StepSchedule::Custom(c) => f
                .debug_struct("Custom")
                .field("name", &c.name)
                .field("declared_admissible", &c.declared_admissible)
                .finish(),
        }
    }
}

impl StepSchedule {
    /// `[c/(n + 1001), c/(n + 1)]`.
    pub fn harmonic_range(scale: f64) -> Self {
        StepSchedule::HarmonicRange {
            scale,
            lo_offset: 1001.0,
            hi_offset: 1.0,
        }
    }

    pub fn harmonic(scale: f64) -> Self {
        StepSchedule::Harmonic { scale }
    }

    pub fn power_law(scale: f64, exponent: f64) -> Self {
        StepSchedule::PowerLaw { scale, exponent }
    }

    pub fn custom<F>(name: impl Into<String>, declared_admissible: bool, range: F) -> Self
    where
        F: Fn(usize) -> StepRange + Send + Sync + 'static,
    {
        StepSchedule::Custom(CustomSchedule {
            name: name.into(),
            range: Arc::new(range),
            declared_admissible,
        })
    }

    /// Whether every range is degenerate (`lo = hi`).
    pub fn is_fixed(&self) -> bool {
        match self {
            StepSchedule::HarmonicRange {
                lo_offset,
                hi_offset,
                ..
            } => lo_offset == hi_offset,
            StepSchedule::Harmonic { .. } | StepSchedule::PowerLaw { .. } => true,
            StepSchedule::Custom(_) => false,
        }
    }

    /// The range for outer iteration `n ≥ 1`.
    pub fn range(&self, n: usize) -> Result<StepRange> {
        if n == 0 {
            return Err(Error::InvalidParameter("schedules are indexed from n = 1".into()));
        }
        let nf = n as f64;
        match self {
            StepSchedule::HarmonicRange {
                scale,
                lo_offset,
                hi_offset,
            } => StepRange::new(scale / (nf + lo_offset), scale / (nf + hi_offset)),
            StepSchedule::Harmonic { scale } => StepRange::fixed(scale / nf),
            StepSchedule::PowerLaw { scale, exponent } => {
                StepRange::fixed(scale / nf.powf(*exponent))
            }
            StepSchedule::Custom(c) => Ok((c.range)(n)),
        }
    }

    /// Decides admissibility in closed form for the known families.
    pub fn validate(&self) -> Admissibility {
        match self {
            StepSchedule::HarmonicRange {
                scale,
                lo_offset,
                hi_offset,
            } => {
                let mut violations = Vec::new();
                // n + hi_offset > 0 for every n >= 1.
                if !(scale.is_finite() && *scale > 0.0 && *hi_offset > -1.0) || !lo_offset.is_finite() {
                    violations.push(Violation::NonPositive);
                } else if lo_offset < hi_offset {
                    violations.push(Violation::Inverted);
                }
                // Otherwise hi ~ c/n (divergent sum, summable square),
                // lo/hi = (n + hi_offset)/(n + lo_offset) → 1 and
                // hi − lo = c(lo_offset − hi_offset)/((n + hi_offset)(n + lo_offset)) = O(1/n²).
                Admissibility::from_violations(violations)
            }
            StepSchedule::Harmonic { scale } => {
                if scale.is_finite() && *scale > 0.0 {
                    Admissibility::Admissible
                } else {
                    Admissibility::Inadmissible(vec![Violation::NonPositive])
                }
            }
            StepSchedule::PowerLaw { scale, exponent } => {
                if !(scale.is_finite() && *scale > 0.0 && exponent.is_finite()) {
                    return Admissibility::Inadmissible(vec![Violation::NonPositive]);
                }
                // Σ n^{-p} diverges iff p <= 1; Σ n^{-2p} converges iff p > 1/2.
                let mut violations = Vec::new();
                if *exponent > 1.0 {
                    violations.push(Violation::SumConverges);
                }
                if *exponent <= 0.5 {
                    violations.push(Violation::SquareSumDiverges);
                }
                Admissibility::from_violations(violations)
            }
            StepSchedule::Custom(c) => Admissibility::Declared {
                trusted: c.declared_admissible,
                probe: probe(|n| (c.range)(n), PROBE_INDICES),
            },
        }
    }
}

/// Outcome of [`StepSchedule::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Admissibility {
    Admissible,
    Inadmissible(Vec<Violation>),
    /// A custom schedule: admissibility is whatever the caller declared.
    Declared { trusted: bool, probe: ProbeSummary },
}

impl Admissibility {
    fn from_violations(v: Vec<Violation>) -> Self {
        if v.is_empty() {
            Admissibility::Admissible
        } else {
            Admissibility::Inadmissible(v)
        }
    }

    /// Whether a strict run may proceed.
    pub fn permits_run(&self) -> bool {
        match self {
            Admissibility::Admissible => true,
            Admissibility::Inadmissible(_) => false,
            Admissibility::Declared { trusted, .. } => *trusted,
        }
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            Admissibility::Inadmissible(v) => v,
            _ => &[],
        }
    }
}

/// A condition a schedule fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    NonPositive,
    Inverted,
    SumConverges,
    SquareSumDiverges,
    RatioNotToOne,
    GapNotSummable,
    /// A custom schedule was not declared admissible.
    Undeclared,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            Violation::NonPositive => "step ranges must be positive and finite",
            Violation::Inverted => "lo(n) exceeds hi(n)",
            Violation::SumConverges => "Σ hi converges",
            Violation::SquareSumDiverges => "Σ hi² diverges",
            Violation::RatioNotToOne => "lo/hi does not tend to 1",
            Violation::GapNotSummable => "Σ (hi − lo) diverges",
            Violation::Undeclared => "custom schedule not declared admissible",
        };
        f.write_str(msg)
    }
}

/// Finite evidence gathered for a custom schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSummary {
    pub indices: usize,
    /// `lo/hi` never decreased over the probed prefix.
    pub ratio_monotone: bool,
    pub first_ratio: f64,
    pub last_ratio: f64,
}

impl ProbeSummary {
    /// Monotone ratio that ends closer to 1 than it started (or already at 1).
    pub fn looks_admissible(&self) -> bool {
        self.ratio_monotone && (self.last_ratio > self.first_ratio || self.last_ratio == 1.0)
    }
}

fn probe(range: impl Fn(usize) -> StepRange, indices: usize) -> ProbeSummary {
    let ratio = |n| {
        let r: StepRange = range(n);
        r.lo() / r.hi()
    };
    let first_ratio = ratio(1);
    let mut prev = first_ratio;
    let mut ratio_monotone = true;
    for n in 2..=indices {
        let r = ratio(n);
        // Allow a few ulps of wobble from the schedule's own rounding.
        if r < prev - 4.0 * f64::EPSILON {
            ratio_monotone = false;
        }
        prev = r;
    }
    ProbeSummary {
        indices,
        ratio_monotone,
        first_ratio,
        last_ratio: prev,
    }
}

/// Rejects a schedule that may not be run in strict mode.
pub fn require_admissible(schedule: &StepSchedule) -> Result<()> {
    match schedule.validate() {
        Admissibility::Admissible => Ok(()),
        Admissibility::Inadmissible(v) => Err(Error::InadmissibleSchedule(v)),
        Admissibility::Declared { trusted: true, .. } => Ok(()),
        Admissibility::Declared { trusted: false, .. } => {
            Err(Error::InadmissibleSchedule(vec![Violation::Undeclared]))
        }
    }
}
