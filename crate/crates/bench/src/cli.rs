//! Command-line interface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use subgrad::io::Instance;

use crate::commands::{self, BenchError, Result, RunOptions};
use crate::spec::{ExperimentSpec, MethodKind, MethodSpec, Randomize, ScheduleSpec, SearchSpec, Threads};

#[derive(Debug, Parser)]
#[command(name = "subgrad-bench", version, about = "Run and compare projected subgradient solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random weighted-L1 instance.
    Generate(GenerateArgs),
    /// Run one solver and write its per-iteration trace as CSV.
    Run(RunArgs),
    /// Time the parallel method with and without worker threads.
    BenchSpeedup(SpeedupArgs),
    /// Average several methods over many seeds, as described by a TOML file.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Seed of the generated instance and of the initial point.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dimension N.
    #[arg(short = 'N', long = "dim", default_value_t = 1000)]
    pub dim: usize,
    /// Number of components K.
    #[arg(short = 'K', long = "components", default_value_t = 16)]
    pub components: usize,
    /// Read the instance from a file instead of generating it.
    #[arg(long, conflicts_with_all = ["dim", "components"])]
    pub instance: Option<PathBuf>,
}

impl InstanceArgs {
    /// The instance and the seed of the initial point.
    pub fn load(&self) -> Result<(Instance, u64)> {
        match &self.instance {
            Some(path) => {
                let inst = commands::load_instance(path)?;
                let seed = self.seed.unwrap_or(inst.seed);
                Ok((inst, seed))
            }
            None => {
                let seed = self.seed.unwrap_or(0);
                Ok((Instance::generate(seed, self.dim, self.components)?, seed))
            }
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short = 'N', long = "dim", default_value_t = 1000)]
    pub dim: usize,
    #[arg(short = 'K', long = "components", default_value_t = 16)]
    pub components: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, default_value = "psm")]
    pub method: MethodKind,
    /// paper:c, fixed:c or power:c,p
    #[arg(long, default_value = "paper:1")]
    pub schedule: ScheduleSpec,
    /// fixed, argmin[:r,..], armijo-uniform:d or armijo-log:a,k
    /// [default: fixed for lo = hi schedules, else armijo-log:8,5]
    #[arg(long)]
    pub search: Option<SearchSpec>,
    /// Sufficient-decrease constant of the Armijo searches [default: 1e-4].
    #[arg(long)]
    pub c1: Option<f64>,
}

impl MethodArgs {
    pub fn spec(&self) -> Result<MethodSpec> {
        let spec = MethodSpec {
            method: self.method,
            schedule: self.schedule,
            search: self
                .search
                .clone()
                .unwrap_or_else(|| MethodSpec::default_search(&self.schedule)),
            c1: self.c1,
        };
        spec.check()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long = "max-iter", default_value_t = 1000)]
    pub max_iter: usize,
    /// Worker threads for psm: a count or "auto".
    #[arg(long, default_value = "auto")]
    pub threads: Threads,
    /// Fill the lemma_gap column.
    #[arg(long)]
    pub monitor_lemmas: bool,
    /// Run even if the schedule fails the admissibility check.
    #[arg(long)]
    pub allow_inadmissible: bool,
    /// Write 0 in timing columns so output is byte-for-byte reproducible.
    #[arg(long)]
    pub omit_timing: bool,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the equivalent experiment file for `compare` and exit.
    #[arg(long)]
    pub print_spec: bool,
}

impl RunArgs {
    pub fn options(&self) -> Result<RunOptions> {
        Ok(RunOptions {
            method: self.method.spec()?,
            max_iter: self.max_iter,
            threads: self.threads,
            monitor_lemmas: self.monitor_lemmas,
            strict: !self.allow_inadmissible,
        })
    }

    /// The single-seed experiment this run corresponds to.
    pub fn to_spec(&self) -> Result<ExperimentSpec> {
        if self.instance.instance.is_some() {
            return Err(BenchError::Config(
                "--print-spec needs a generated instance, not --instance".into(),
            ));
        }
        let opts = self.options()?;
        let spec = ExperimentSpec {
            dim: self.instance.dim,
            components: self.instance.components,
            seeds: vec![self.instance.seed.unwrap_or(0)],
            max_iter: self.max_iter,
            threads: self.threads,
            randomize: Randomize::Both,
            instance_seed: None,
            monitor_lemmas: self.monitor_lemmas,
            strict: opts.strict,
            methods: vec![opts.method],
        };
        spec.check()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpeedupArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long = "max-iter", default_value_t = 1000)]
    pub max_iter: usize,
    /// Workers of the multi-core run: a count or "auto" (at least 2 are used).
    #[arg(long, default_value = "auto")]
    pub threads: Threads,
    #[arg(long)]
    pub omit_timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Experiment file (TOML).
    pub spec: PathBuf,
    /// Iteration-indexed averages (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write time-indexed averages on a 100-point grid.
    #[arg(long)]
    pub time_out: Option<PathBuf>,
    #[arg(long)]
    pub omit_timing: bool,
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => commands::generate(a.seed, a.dim, a.components, a.out.as_deref()),
        Command::Run(a) => {
            if a.print_spec {
                print!("{}", a.to_spec()?.to_toml());
                return Ok(());
            }
            let opts = a.options()?;
            let (inst, seed) = a.instance.load()?;
            commands::run_trace(&inst, seed, &opts, a.omit_timing, a.out.as_deref()).map(|_| ())
        }
        Command::BenchSpeedup(a) => {
            if a.max_iter == 0 {
                return Err(BenchError::Config("max-iter must be >= 1".into()));
            }
            let (inst, seed) = a.instance.load()?;
            commands::bench_speedup(&inst, seed, a.max_iter, a.threads, a.omit_timing, a.out.as_deref())
        }
        Command::Compare(a) => {
            let text = std::fs::read_to_string(&a.spec).map_err(|e| BenchError::Io {
                path: a.spec.clone(),
                source: e,
            })?;
            let spec = ExperimentSpec::from_toml(&text)
                .map_err(|e| BenchError::Config(format!("{}: {e}", a.spec.display())))?;
            commands::compare_to_files(&spec, a.omit_timing, a.out.as_deref(), a.time_out.as_deref())
        }
    }
}
