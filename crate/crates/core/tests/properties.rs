mod common;

use common::{all_kinds, ball_project, dist, sample_in, vector, RawL1};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subgrad::io::{read_instance, write_instance, Instance};
use subgrad::linesearch::{log_grid, uniform_grid};
use subgrad::{
    generate_initial_point, generate_instance, inner, norm, psm_iteration, run, Component,
    ConstraintSet, L1Component, LineSearch, Method, Problem, SearchContext, SearchStatus,
    SolverConfig, StepRange, StepSchedule, Vector,
};

fn coords(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, dim)
}

fn small_instance() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..12, 1usize..6)
}

fn searches() -> Vec<LineSearch> {
    vec![
        LineSearch::argmin(),
        LineSearch::armijo_uniform(0.25),
        LineSearch::armijo_uniform(0.1),
        LineSearch::armijo_log(8, 5),
        LineSearch::armijo_log(2, 3),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn inner_with_self_is_squared_norm(x in coords(9)) {
        let v = vector(x);
        let n = norm(&v);
        let ip = inner(&v, &v).unwrap();
        prop_assert!((ip - n * n).abs() <= 1e-12 * ip.max(1.0));
    }

    #[test]
    fn projection_is_feasible_idempotent_and_nonexpansive(
        seed in any::<u64>(), dim in 1usize..8, x in coords(8), y in coords(8)
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = vector(x[..dim].to_vec());
        let y = vector(y[..dim].to_vec());
        for set in all_kinds(&mut rng, dim) {
            let px = set.project(&x);
            let py = set.project(&y);
            prop_assert!(set.contains(&px, 1e-12), "{set:?}");
            let ppx = set.project(&px);
            prop_assert!(dist(&ppx, &px) <= 1e-12);
            prop_assert!(dist(&px, &py) <= dist(&x, &y) + 1e-12);
            // variational inequality against a feasible z
            let z = sample_in(&mut rng, &set, dim);
            let lhs: f64 = (0..dim).map(|j| (x[j] - px[j]) * (z[j] - px[j])).sum();
            prop_assert!(lhs <= 1e-9 * (1.0 + norm(&x)), "{set:?}: {lhs}");
        }
    }

    #[test]
    fn subgradient_inequality_holds(
        (seed, dim, k) in small_instance(), x in coords(12), y in coords(12)
    ) {
        let problem = generate_instance(seed, dim, k).unwrap();
        let raw = RawL1::from_problem(&problem);
        let x = vector(x[..dim].to_vec());
        let y = vector(y[..dim].to_vec());
        for (i, c) in problem.components().iter().enumerate() {
            let g = c.subgradient(&x);
            prop_assert_eq!(g.as_slice(), &raw.component_subgrad(i, &x)[..]);
            let lin: f64 = (0..dim).map(|j| g[j] * (y[j] - x[j])).sum();
            prop_assert!(c.value(&y) >= c.value(&x) + lin - 1e-10);
            prop_assert!(norm(&g) <= c.bound() + 1e-12);
        }
    }

    #[test]
    fn objective_matches_reference(
        (seed, dim, k) in small_instance(), x in coords(12)
    ) {
        let problem = generate_instance(seed, dim, k).unwrap();
        let raw = RawL1::from_problem(&problem);
        let x = vector(x[..dim].to_vec());
        let f = problem.objective(&x);
        prop_assert!((f - raw.value(&x)).abs() <= 1e-10 * f.max(1.0));
        prop_assert!(f >= 0.0);
    }

    #[test]
    fn generated_data_lies_in_the_documented_ranges((seed, dim, k) in small_instance()) {
        let problem = generate_instance(seed, dim, k).unwrap();
        prop_assert_eq!(problem.len(), k);
        for c in problem.components() {
            prop_assert!(c.weights().iter().all(|&a| a > 0.0 && a < 1.0));
            prop_assert!(c.targets().iter().all(|&b| b > -1.0 && b < 0.0));
        }
        let x1 = generate_initial_point(seed, dim);
        prop_assert!(x1.iter().all(|&v| v > -2.0 && v < 2.0));
        prop_assert_eq!(x1, generate_initial_point(seed, dim));
    }

    #[test]
    fn instance_text_round_trip((seed, dim, k) in small_instance()) {
        let inst = Instance::generate(seed, dim, k).unwrap();
        let mut buf = Vec::new();
        write_instance(&mut buf, &inst).unwrap();
        let back = read_instance(buf.as_slice()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn line_searches_stay_in_range_and_meet_their_contracts(
        (seed, dim, k) in small_instance(),
        x in coords(12),
        lo in 0.0..2.0f64,
        width in 0.0..2.0f64,
    ) {
        let problem = generate_instance(seed, dim, k).unwrap();
        let x = problem.project(&vector(x[..dim].to_vec()));
        let range = StepRange::new(lo, lo + width).unwrap();
        for c in problem.components() {
            let g = c.subgradient(&x);
            let ctx = SearchContext::new(&x, &g, c, problem.constraint());
            for search in searches() {
                let a = search.search(&ctx, range).unwrap();
                let b = search.search(&ctx, range).unwrap();
                prop_assert_eq!(a, b);
                prop_assert!(a.step >= range.lo() && a.step <= range.hi(), "{search:?} {a:?}");
                match &search {
                    LineSearch::DiscreteArgmin { ratios } => {
                        prop_assert_eq!(a.status, SearchStatus::Success);
                        let chosen = ctx.trial_value(a.step);
                        for r in ratios {
                            let s = r * range.hi() + (1.0 - r) * range.lo();
                            prop_assert!(chosen <= ctx.trial_value(s));
                        }
                    }
                    LineSearch::ArmijoUniform { c1, .. } | LineSearch::ArmijoLog { c1, .. } => {
                        // independent re-check of the acceptance test
                        let trial: Vec<f64> = (0..dim).map(|j| x[j] - a.step * g[j]).collect();
                        let mut p = trial.clone();
                        ball_project(&mut p);
                        let disp: f64 = (0..dim).map(|j| (x[j] - p[j]) * g[j]).sum();
                        let rhs = c.value(&x) - c1 * disp;
                        let lhs = c.value(&vector(p));
                        match a.status {
                            SearchStatus::Success => prop_assert!(lhs <= rhs + 1e-12),
                            SearchStatus::Fallback => prop_assert_eq!(a.step, range.lo()),
                        }
                    }
                    LineSearch::Fixed => unreachable!(),
                }
            }
        }
    }

    #[test]
    fn parallel_map_matches_sequential_map((seed, dim, k) in small_instance()) {
        let problem = generate_instance(seed, dim, k).unwrap();
        let x = problem.project(&generate_initial_point(seed, dim));
        let range = StepRange::new(0.1, 0.5).unwrap();
        for search in searches() {
            let (a, da) = psm_iteration(&problem, &x, range, &search, false).unwrap();
            let (b, db) = psm_iteration(&problem, &x, range, &search, true).unwrap();
            prop_assert_eq!(da, db);
            for (u, v) in a.iter().zip(b.iter()) {
                prop_assert_eq!(u.to_bits(), v.to_bits());
            }
        }
    }
}

#[test]
fn grids_have_the_documented_shape() {
    assert_eq!(uniform_grid(0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    let g = uniform_grid(0.3);
    assert_eq!(*g.last().unwrap(), 1.0);
    assert!(g.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(log_grid(8, 2), vec![1.0, 0.125, 0.015625]);
}

fn all_configs() -> Vec<SolverConfig> {
    let mut out = vec![
        SolverConfig::new(Method::Baseline, StepSchedule::harmonic(1.0), LineSearch::Fixed),
        SolverConfig::new(Method::Incremental, StepSchedule::harmonic(1.0), LineSearch::Fixed),
        SolverConfig::new(Method::Parallel, StepSchedule::harmonic(1.0), LineSearch::Fixed),
    ];
    for method in [Method::Incremental, Method::Parallel] {
        for search in searches() {
            out.push(SolverConfig::new(method, StepSchedule::harmonic_range(1.0), search));
        }
    }
    out
}

#[test]
fn iterates_stay_feasible_and_steps_in_range() {
    for seed in 0..4 {
        let problem = generate_instance(seed, 15, 5).unwrap();
        let start = generate_initial_point(seed, 15);
        for config in all_configs() {
            let config = config.with_max_iterations(60);
            let result = run(&problem, &start, &config).unwrap();
            assert!(norm(&result.final_point) <= 1.0 + 1e-12);
            for rec in &result.trace {
                let range = config.schedule.range(rec.n).unwrap();
                assert_eq!(rec.steps.len(), 5);
                assert!(rec.steps.iter().all(|&s| range.contains(s)), "{config:?}");
                assert!(rec.fallbacks <= 5);
            }
        }
    }
}

#[test]
fn runs_are_deterministic_and_thread_count_does_not_matter() {
    let problem = generate_instance(11, 30, 6).unwrap();
    let start = generate_initial_point(11, 30);
    for search in searches() {
        let base = SolverConfig::new(Method::Parallel, StepSchedule::harmonic_range(1.0), search)
            .with_max_iterations(50);
        let a = run(&problem, &start, &base).unwrap();
        let b = run(&problem, &start, &base).unwrap();
        let c = run(&problem, &start, &base.clone().with_threads(3)).unwrap();
        for other in [&b, &c] {
            assert_eq!(a.final_point, other.final_point);
            for (r, s) in a.trace.iter().zip(&other.trace) {
                assert_eq!(r.f_value.to_bits(), s.f_value.to_bits());
                assert_eq!(r.steps, s.steps);
            }
        }
    }
}

// Every component shares the same target b inside the ball, so y* = b and
// f(y*) = 0; the iterates must end close to f = 0 and stay bounded.
#[test]
fn known_optimum_instance_is_approached() {
    let b = vector(vec![0.3, -0.2, 0.1]);
    let components = (1..=4)
        .map(|i| L1Component::new(vector(vec![0.2 * i as f64, 0.5, 0.9]), b.clone()).unwrap())
        .collect();
    let problem = Problem::new(3, components, ConstraintSet::unit_ball()).unwrap();
    let start = vector(vec![1.5, 1.5, -1.5]);
    for config in all_configs() {
        let config = config.with_max_iterations(3000);
        let result = run(&problem, &start, &config).unwrap();
        for rec in &result.trace {
            assert!(rec.f_value.is_finite());
        }
        assert!(result.final_value() < 1e-2, "{config:?}: {}", result.final_value());
        assert!(result.final_point.distance(&b) < 1e-1);
    }
}

#[test]
fn monitored_runs_satisfy_the_descent_inequality() {
    let problem = generate_instance(5, 10, 4).unwrap();
    let start = generate_initial_point(5, 10);
    let witnesses = vec![Vector::zeros(10), problem.project(&vector(vec![-0.3; 10]))];
    for config in all_configs() {
        let config = config.with_max_iterations(200).with_lemma_monitor(witnesses.clone());
        let result = run(&problem, &start, &config).unwrap();
        for rec in &result.trace {
            let gap = rec.lemma_gap.unwrap();
            assert!(gap >= -1e-9, "{config:?} n={}: {gap}", rec.n);
        }
    }
}

#[test]
fn trace_matches_independent_objective_evaluation() {
    let problem = generate_instance(3, 8, 3).unwrap();
    let raw = RawL1::from_problem(&problem);
    let start = generate_initial_point(3, 8);
    let config = SolverConfig::new(
        Method::Incremental,
        StepSchedule::harmonic_range(1.0),
        LineSearch::armijo_log(8, 5),
    )
    .with_max_iterations(25);
    let result = run(&problem, &start, &config).unwrap();
    let last = result.trace.last().unwrap();
    assert!((last.f_value - raw.value(&result.final_point)).abs() <= 1e-10);
}
