//! The work behind each subcommand. Everything here writes to a caller
//! supplied `Write`, so the CLI decides between files and stdout.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use subgrad::io::{fmt_f64, read_instance, write_instance, write_trace, Instance};
use subgrad::{generate_initial_point, run, Error as CoreError, RunResult};

use crate::spec::{hardware_threads, ExperimentSpec, MethodSpec, ScheduleSpec, SearchSpec, Threads};

/// Failure of a subcommand, with the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Inadmissible(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Mismatch(String),
}

impl BenchError {
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Inadmissible(_) => 3,
            BenchError::Io { .. } => 4,
            BenchError::Mismatch(_) => 1,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn context(self, what: &str) -> Self {
        match self {
            BenchError::Config(m) => BenchError::Config(format!("{what}: {m}")),
            BenchError::Inadmissible(m) => BenchError::Inadmissible(format!("{what}: {m}")),
            BenchError::Mismatch(m) => BenchError::Mismatch(format!("{what}: {m}")),
            io => io,
        }
    }
}

impl From<crate::spec::SpecError> for BenchError {
    fn from(e: crate::spec::SpecError) -> Self {
        BenchError::Config(e.0)
    }
}

impl From<CoreError> for BenchError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InadmissibleSchedule(_) => BenchError::Inadmissible(e.to_string()),
            CoreError::Io(source) => BenchError::Io {
                path: PathBuf::from("<stream>"),
                source,
            },
            other => BenchError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;

/// Output destination: a file, or stdout when no path is given.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| BenchError::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(std::io::stdout().lock()))),
    }
}

fn finish(mut w: Box<dyn Write>, path: Option<&Path>) -> Result<()> {
    w.flush()
        .map_err(|e| BenchError::io(path.unwrap_or(Path::new("<stdout>")), e))
}

fn with_path(path: Option<&Path>, e: BenchError) -> BenchError {
    match (e, path) {
        (BenchError::Io { source, .. }, Some(p)) => BenchError::io(p, source),
        (e, _) => e,
    }
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let f = File::open(path).map_err(|e| BenchError::io(path, e))?;
    read_instance(BufReader::new(f)).map_err(|e| match e {
        CoreError::Io(source) => BenchError::io(path, source),
        other => BenchError::Config(format!("{}: {other}", path.display())),
    })
}

pub fn generate(seed: u64, dim: usize, components: usize, out: Option<&Path>) -> Result<()> {
    let inst = Instance::generate(seed, dim, components)?;
    let mut w = open_output(out)?;
    write_instance(&mut w, &inst).map_err(|e| with_path(out, e.into()))?;
    finish(w, out)
}

/// Options of a single run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub method: MethodSpec,
    pub max_iter: usize,
    pub threads: Threads,
    pub monitor_lemmas: bool,
    pub strict: bool,
}

pub fn solve(instance: &Instance, start_seed: u64, opts: &RunOptions) -> Result<RunResult> {
    opts.method.check()?;
    let problem = &instance.problem;
    let mut config = opts
        .method
        .solver_config(opts.max_iter)
        .with_threads(opts.threads.resolve(problem.len()));
    config.monitor_lemmas = opts.monitor_lemmas;
    config.strict = opts.strict;
    let start = generate_initial_point(start_seed, problem.dim());
    Ok(run(problem, &start, &config)?)
}

fn zero_timing(result: &mut RunResult) {
    result.wall_time = 0.0;
    for r in &mut result.trace {
        r.elapsed_seconds = 0.0;
    }
}

pub fn run_trace(
    instance: &Instance,
    start_seed: u64,
    opts: &RunOptions,
    omit_timing: bool,
    out: Option<&Path>,
) -> Result<RunResult> {
    let mut result = solve(instance, start_seed, opts)?;
    if omit_timing {
        zero_timing(&mut result);
    }
    let mut w = open_output(out)?;
    write_trace(&mut w, &result.trace).map_err(|e| with_path(out, e.into()))?;
    finish(w, out)?;
    Ok(result)
}

pub const SPEEDUP_HEADER: &str = "method,mode,time,final_f,acceleration_ratio";

/// The method rows of the speedup table.
pub fn speedup_methods() -> Vec<MethodSpec> {
    let psm = |schedule, search| MethodSpec {
        method: crate::spec::MethodKind::Psm,
        schedule,
        search,
        c1: None,
    };
    vec![
        psm(ScheduleSpec::Fixed(1.0), SearchSpec::Fixed),
        psm(ScheduleSpec::Fixed(1e-3), SearchSpec::Fixed),
        psm(ScheduleSpec::Paper(1.0), SearchSpec::ArmijoLog(8, 5)),
    ]
}

/// Paired multi-core / sequential runs of the parallel method.
///
/// The multi-core run uses `threads` workers (at least 2). Final objective
/// values of a pair must agree to 1e-9, otherwise the command fails.
pub fn bench_speedup(
    instance: &Instance,
    start_seed: u64,
    max_iter: usize,
    threads: Threads,
    omit_timing: bool,
    out: Option<&Path>,
) -> Result<()> {
    let k = instance.problem.len();
    let multi = threads.resolve(k).max(2);
    if hardware_threads() < 2 {
        eprintln!(
            "note: {} hardware thread(s) available; the multi-core timings measure overhead only",
            hardware_threads()
        );
    }
    let mut w = open_output(out)?;
    let write = |w: &mut Box<dyn Write>, line: String| {
        writeln!(w, "{line}").map_err(|e| BenchError::io(out.unwrap_or(Path::new("<stdout>")), e))
    };
    write(&mut w, SPEEDUP_HEADER.to_string())?;
    for method in speedup_methods() {
        let opts = |t: usize| RunOptions {
            method: method.clone(),
            max_iter,
            threads: Threads::Count(t.try_into().expect("thread count is positive")),
            monitor_lemmas: false,
            strict: true,
        };
        let seq = solve(instance, start_seed, &opts(1))?;
        let par = solve(instance, start_seed, &opts(multi))?;
        let (fs, fp) = (seq.final_value(), par.final_value());
        if (fs - fp).abs() > 1e-9 {
            return Err(BenchError::Mismatch(format!(
                "{}: final f differs between modes ({fp} vs {fs})",
                method.label()
            )));
        }
        let (ts, tp) = if omit_timing {
            (0.0, 0.0)
        } else {
            (seq.wall_time, par.wall_time)
        };
        let ratio = if ts > 0.0 { tp / ts } else { 0.0 };
        let label = csv_field(&method.label());
        write(
            &mut w,
            format!("{label},MultiCore,{},{},{}", fmt_f64(tp), fmt_f64(fp), fmt_f64(ratio)),
        )?;
        write(
            &mut w,
            format!("{label},Sequential,{},{},{}", fmt_f64(ts), fmt_f64(fs), fmt_f64(1.0)),
        )?;
    }
    finish(w, out)
}

/// Quotes a CSV field when it contains a separator or quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const AGGREGATE_HEADER: &str = "method,n,mean_f,mean_elapsed";
pub const TIME_GRID_HEADER: &str = "method,t,mean_f";
/// Points of the common time grid used for time-indexed averages.
pub const TIME_GRID_POINTS: usize = 100;

/// Per-method averages over the seeds of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub label: String,
    /// `mean_f[n-1]`, `mean_elapsed[n-1]` for iteration `n`.
    pub mean_f: Vec<f64>,
    pub mean_elapsed: Vec<f64>,
    /// `(t, mean f)` on the common time grid.
    pub time_grid: Vec<(f64, f64)>,
}

/// Piecewise-linear `f(t)` through `(times, values)`, constant past the ends.
pub fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let i = times.partition_point(|&s| s <= t);
    if i == 0 {
        return values[0];
    }
    if i == times.len() {
        return values[times.len() - 1];
    }
    let (t0, t1) = (times[i - 1], times[i]);
    let (v0, v1) = (values[i - 1], values[i]);
    if t1 == t0 {
        return v1;
    }
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

fn time_curve(result: &RunResult, f_start: f64) -> (Vec<f64>, Vec<f64>) {
    let mut times = vec![0.0];
    let mut values = vec![f_start];
    for r in &result.trace {
        times.push(r.elapsed_seconds);
        values.push(r.f_value);
    }
    (times, values)
}

/// Runs every method on every seed. A failing run aborts with its seed named.
pub fn compare(spec: &ExperimentSpec, omit_timing: bool) -> Result<Vec<Aggregate>> {
    spec.check()?;
    let mut out = Vec::with_capacity(spec.methods.len());
    for method in &spec.methods {
        let opts = RunOptions {
            method: method.clone(),
            max_iter: spec.max_iter,
            threads: spec.threads,
            monitor_lemmas: spec.monitor_lemmas,
            strict: spec.strict,
        };
        let mut sum_f = vec![0.0; spec.max_iter];
        let mut sum_t = vec![0.0; spec.max_iter];
        let mut curves = Vec::with_capacity(spec.seeds.len());
        let mut counts = vec![0usize; spec.max_iter];
        for &seed in &spec.seeds {
            let what = format!("{} (seed {seed})", method.label());
            let instance = Instance::generate(spec.instance_seed_for(seed), spec.dim, spec.components)
                .map_err(|e| BenchError::from(e).context(&what))?;
            let mut result =
                solve(&instance, seed, &opts).map_err(|e| e.context(&what))?;
            if omit_timing {
                zero_timing(&mut result);
            }
            for (i, r) in result.trace.iter().enumerate() {
                sum_f[i] += r.f_value;
                sum_t[i] += r.elapsed_seconds;
                counts[i] += 1;
            }
            let start = instance
                .problem
                .project(&generate_initial_point(seed, spec.dim));
            curves.push(time_curve(&result, instance.problem.objective(&start)));
        }
        let len = counts.iter().take_while(|&&c| c > 0).count();
        let mean_f: Vec<f64> = (0..len).map(|i| sum_f[i] / counts[i] as f64).collect();
        let mean_elapsed: Vec<f64> = (0..len).map(|i| sum_t[i] / counts[i] as f64).collect();

        let horizon = curves
            .iter()
            .map(|(t, _)| *t.last().unwrap())
            .fold(f64::INFINITY, f64::min);
        let time_grid = (0..TIME_GRID_POINTS)
            .map(|j| {
                let t = horizon * j as f64 / (TIME_GRID_POINTS - 1) as f64;
                let f = curves.iter().map(|(ts, vs)| interpolate(ts, vs, t)).sum::<f64>()
                    / curves.len() as f64;
                (t, f)
            })
            .collect();
        out.push(Aggregate {
            label: method.label(),
            mean_f,
            mean_elapsed,
            time_grid,
        });
    }
    Ok(out)
}

pub fn write_aggregates<W: Write>(w: &mut W, aggs: &[Aggregate]) -> std::io::Result<()> {
    writeln!(w, "{AGGREGATE_HEADER}")?;
    for a in aggs {
        let label = csv_field(&a.label);
        for (i, (f, t)) in a.mean_f.iter().zip(&a.mean_elapsed).enumerate() {
            writeln!(w, "{label},{},{},{}", i + 1, fmt_f64(*f), fmt_f64(*t))?;
        }
    }
    Ok(())
}

pub fn write_time_grid<W: Write>(w: &mut W, aggs: &[Aggregate]) -> std::io::Result<()> {
    writeln!(w, "{TIME_GRID_HEADER}")?;
    for a in aggs {
        let label = csv_field(&a.label);
        for (t, f) in &a.time_grid {
            writeln!(w, "{label},{},{}", fmt_f64(*t), fmt_f64(*f))?;
        }
    }
    Ok(())
}

pub fn compare_to_files(
    spec: &ExperimentSpec,
    omit_timing: bool,
    out: Option<&Path>,
    time_out: Option<&Path>,
) -> Result<()> {
    let aggs = compare(spec, omit_timing)?;
    let mut w = open_output(out)?;
    write_aggregates(&mut w, &aggs)
        .map_err(|e| BenchError::io(out.unwrap_or(Path::new("<stdout>")), e))?;
    finish(w, out)?;
    if let Some(p) = time_out {
        let mut w = open_output(Some(p))?;
        write_time_grid(&mut w, &aggs).map_err(|e| BenchError::io(p, e))?;
        finish(w, Some(p))?;
    }
    Ok(())
}
