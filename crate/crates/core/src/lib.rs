//! Incremental and parallel projected subgradient methods whose step-sizes
//! are picked at run time from a diminishing step range.
//!
//! The problem solved is
//!
//! ```text
//! minimize   f(x) = f_1(x) + … + f_K(x)
//! subject to x ∈ C
//! ```
//!
//! where each `f_i` is convex, nonnegative and possibly nonsmooth, and `C` is
//! a closed convex set with a cheap projection. Instead of a fixed step
//! `λ_n`, every outer iteration `n` hands the solver a range
//! `[lo(n), hi(n)]`, and a [`LineSearch`] picks a step inside it separately
//! for each component.
//!
//! ```
//! use subgrad::{generate_initial_point, generate_instance, run};
//! use subgrad::{LineSearch, Method, SolverConfig, StepSchedule};
//!
//! let problem = generate_instance(7, 20, 4).unwrap();
//! let start = generate_initial_point(7, 20);
//! let config = SolverConfig::new(
//!     Method::Parallel,
//!     StepSchedule::harmonic_range(1.0),
//!     LineSearch::armijo_log(8, 5),
//! )
//! .with_max_iterations(200);
//!
//! let result = run(&problem, &start, &config).unwrap();
//! assert_eq!(result.trace.len(), 200);
//! assert!(result.final_point.norm() <= 1.0 + 1e-12);
//! ```
//!
//! The guide in `book/` walks through each piece; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod error;
pub mod io;
pub mod linalg;
pub mod linesearch;
pub mod problem;
pub mod schedule;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{inner, norm, project, ConstraintSet, Vector};
pub use linesearch::{
    armijo_log, armijo_uniform, discrete_argmin, fixed_step, LineSearch, SearchContext,
    SearchOutcome, SearchStatus, StepRange,
};
pub use problem::{generate_initial_point, generate_instance, Component, L1Component, Problem};
pub use schedule::{Admissibility, StepSchedule, Violation};
pub use solvers::{
    baseline_step, ism_iteration, lemma_gap, psm_iteration, run, IterationRecord, LemmaMode,
    Method, RunResult, SolverConfig, StepDiagnostics,
};

// Each chapter of the guide becomes a module so a failing listing points at
// its chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/projections.md")]
    mod projections {}
    #[doc = include_str!("../../../book/src/objectives.md")]
    mod objectives {}
    #[doc = include_str!("../../../book/src/line-search.md")]
    mod line_search {}
    #[doc = include_str!("../../../book/src/schedules.md")]
    mod schedules {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/descent-monitors.md")]
    mod descent_monitors {}
    #[doc = include_str!("../../../book/src/benchmarking.md")]
    mod benchmarking {}
}
