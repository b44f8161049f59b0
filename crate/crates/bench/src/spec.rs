//! Textual method specifications shared by the command-line flags and the
//! experiment files.
//!
//! | text                    | meaning                                        |
//! |-------------------------|------------------------------------------------|
//! | `baseline`, `ism`, `psm`| solver                                         |
//! | `paper:c`               | step range `[c/(n+1001), c/(n+1)]`             |
//! | `fixed:c`               | `lo = hi = c/n`                                |
//! | `power:c,p`             | `lo = hi = c/n^p`                              |
//! | `fixed`                 | use the single value of the range              |
//! | `argmin[:r1,r2,…]`      | best of `r·hi + (1−r)·lo` (default ratios 0, ¼, ½, ¾, 1) |
//! | `armijo-uniform:d`      | Armijo on a uniform grid of spacing `d`        |
//! | `armijo-log:a,k`        | Armijo at `lo + (hi−lo)/a^j`, `j = 0..=k`      |
//!
//! Every value prints back to text that parses to the same value.

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use subgrad::linesearch::{DEFAULT_C1, DEFAULT_RATIOS};
use subgrad::{LineSearch, Method, SolverConfig, StepSchedule};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct SpecError(pub String);

fn bad(msg: impl Into<String>) -> SpecError {
    SpecError(msg.into())
}

fn parse_f64(s: &str, what: &str) -> Result<f64, SpecError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| bad(format!("{what}: '{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(bad(format!("{what}: '{s}' is not finite")));
    }
    Ok(v)
}

fn parse_positive(s: &str, what: &str) -> Result<f64, SpecError> {
    let v = parse_f64(s, what)?;
    if v <= 0.0 {
        return Err(bad(format!("{what} must be > 0, got {v}")));
    }
    Ok(v)
}

fn split_pair<'a>(s: &'a str, what: &str) -> Result<(&'a str, &'a str), SpecError> {
    s.split_once(',')
        .ok_or_else(|| bad(format!("{what}: expected two comma-separated values, got '{s}'")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Baseline,
    Ism,
    Psm,
}

impl From<MethodKind> for Method {
    fn from(m: MethodKind) -> Self {
        match m {
            MethodKind::Baseline => Method::Baseline,
            MethodKind::Ism => Method::Incremental,
            MethodKind::Psm => Method::Parallel,
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodKind::Baseline => "baseline",
            MethodKind::Ism => "ism",
            MethodKind::Psm => "psm",
        })
    }
}

impl FromStr for MethodKind {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        match s {
            "baseline" => Ok(MethodKind::Baseline),
            "ism" => Ok(MethodKind::Ism),
            "psm" => Ok(MethodKind::Psm),
            _ => Err(bad(format!("unknown method '{s}' (baseline, ism, psm)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ScheduleSpec {
    Paper(f64),
    Fixed(f64),
    Power(f64, f64),
}

impl ScheduleSpec {
    pub fn build(&self) -> StepSchedule {
        match *self {
            ScheduleSpec::Paper(c) => StepSchedule::harmonic_range(c),
            ScheduleSpec::Fixed(c) => StepSchedule::harmonic(c),
            ScheduleSpec::Power(c, p) => StepSchedule::power_law(c, p),
        }
    }

    pub fn is_fixed(&self) -> bool {
        !matches!(self, ScheduleSpec::Paper(_))
    }
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleSpec::Paper(c) => write!(f, "paper:{c}"),
            ScheduleSpec::Fixed(c) => write!(f, "fixed:{c}"),
            ScheduleSpec::Power(c, p) => write!(f, "power:{c},{p}"),
        }
    }
}

impl FromStr for ScheduleSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| bad(format!("schedule '{s}': expected paper:c, fixed:c or power:c,p")))?;
        match kind {
            "paper" => Ok(ScheduleSpec::Paper(parse_positive(arg, "schedule scale")?)),
            "fixed" => Ok(ScheduleSpec::Fixed(parse_positive(arg, "schedule scale")?)),
            "power" => {
                let (c, p) = split_pair(arg, "power schedule")?;
                Ok(ScheduleSpec::Power(
                    parse_positive(c, "schedule scale")?,
                    parse_positive(p, "schedule exponent")?,
                ))
            }
            _ => Err(bad(format!("unknown schedule '{kind}' (paper, fixed, power)"))),
        }
    }
}

impl TryFrom<String> for ScheduleSpec {
    type Error = SpecError;

    fn try_from(s: String) -> Result<Self, SpecError> {
        s.parse()
    }
}

impl From<ScheduleSpec> for String {
    fn from(s: ScheduleSpec) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SearchSpec {
    Fixed,
    /// `None` means the default ratios.
    Argmin(Option<Vec<f64>>),
    ArmijoUniform(f64),
    ArmijoLog(u32, u32),
}

impl SearchSpec {
    pub fn is_armijo(&self) -> bool {
        matches!(self, SearchSpec::ArmijoUniform(_) | SearchSpec::ArmijoLog(..))
    }

    pub fn build(&self, c1: Option<f64>) -> LineSearch {
        let c1 = c1.unwrap_or(DEFAULT_C1);
        match self {
            SearchSpec::Fixed => LineSearch::Fixed,
            SearchSpec::Argmin(ratios) => LineSearch::DiscreteArgmin {
                ratios: ratios.clone().unwrap_or_else(|| DEFAULT_RATIOS.to_vec()),
            },
            SearchSpec::ArmijoUniform(d) => LineSearch::ArmijoUniform { spacing: *d, c1 },
            SearchSpec::ArmijoLog(a, k) => LineSearch::ArmijoLog {
                base: *a,
                depth: *k,
                c1,
            },
        }
    }
}

impl fmt::Display for SearchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchSpec::Fixed => f.write_str("fixed"),
            SearchSpec::Argmin(None) => f.write_str("argmin"),
            SearchSpec::Argmin(Some(r)) => {
                let r: Vec<String> = r.iter().map(|v| v.to_string()).collect();
                write!(f, "argmin:{}", r.join(","))
            }
            SearchSpec::ArmijoUniform(d) => write!(f, "armijo-uniform:{d}"),
            SearchSpec::ArmijoLog(a, k) => write!(f, "armijo-log:{a},{k}"),
        }
    }
}

impl FromStr for SearchSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let spec = match (kind, arg) {
            ("fixed", None) => SearchSpec::Fixed,
            ("argmin", None) => SearchSpec::Argmin(None),
            ("argmin", Some(a)) => SearchSpec::Argmin(Some(
                a.split(',')
                    .map(|r| parse_f64(r, "argmin ratio"))
                    .collect::<Result<_, _>>()?,
            )),
            ("armijo-uniform", Some(a)) => SearchSpec::ArmijoUniform(parse_f64(a, "grid spacing")?),
            ("armijo-log", Some(a)) => {
                let (base, depth) = split_pair(a, "armijo-log")?;
                let int = |t: &str, what: &str| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|_| bad(format!("{what}: '{t}' is not a nonnegative integer")))
                };
                SearchSpec::ArmijoLog(int(base, "grid base")?, int(depth, "grid depth")?)
            }
            _ => {
                return Err(bad(format!(
                    "search '{s}': expected fixed, argmin[:r,..], armijo-uniform:d or armijo-log:a,k"
                )))
            }
        };
        spec.build(None)
            .validate()
            .map_err(|e| bad(format!("search '{s}': {e}")))?;
        Ok(spec)
    }
}

impl TryFrom<String> for SearchSpec {
    type Error = SpecError;

    fn try_from(s: String) -> Result<Self, SpecError> {
        s.parse()
    }
}

impl From<SearchSpec> for String {
    fn from(s: SearchSpec) -> String {
        s.to_string()
    }
}

/// Worker threads: a count, or `auto` (hardware parallelism capped at `K`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "ThreadsRepr", into = "ThreadsRepr")]
pub enum Threads {
    #[default]
    Auto,
    Count(NonZeroUsize),
}

impl Threads {
    pub fn resolve(self, components: usize) -> usize {
        match self {
            Threads::Count(n) => n.get(),
            Threads::Auto => hardware_threads().min(components).max(1),
        }
    }
}

pub fn hardware_threads() -> usize {
    std::thread::available_parallelism().map_or(1, NonZeroUsize::get)
}

impl fmt::Display for Threads {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threads::Auto => f.write_str("auto"),
            Threads::Count(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Threads {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        s.parse::<NonZeroUsize>()
            .map(Threads::Count)
            .map_err(|_| bad(format!("threads: expected 'auto' or a positive integer, got '{s}'")))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ThreadsRepr {
    Count(usize),
    Text(String),
}

impl TryFrom<ThreadsRepr> for Threads {
    type Error = SpecError;

    fn try_from(r: ThreadsRepr) -> Result<Self, SpecError> {
        match r {
            ThreadsRepr::Count(n) => n.to_string().parse(),
            ThreadsRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Threads> for ThreadsRepr {
    fn from(t: Threads) -> Self {
        match t {
            Threads::Auto => ThreadsRepr::Text("auto".into()),
            Threads::Count(n) => ThreadsRepr::Count(n.get()),
        }
    }
}

/// One solver configuration in an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub method: MethodKind,
    pub schedule: ScheduleSpec,
    pub search: SearchSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
}

impl MethodSpec {
    /// The search used when none is given: `fixed` for schedules with
    /// `lo = hi`, otherwise `armijo-log:8,5`.
    pub fn default_search(schedule: &ScheduleSpec) -> SearchSpec {
        if schedule.is_fixed() {
            SearchSpec::Fixed
        } else {
            SearchSpec::ArmijoLog(8, 5)
        }
    }

    pub fn check(&self) -> Result<(), SpecError> {
        if let Some(c1) = self.c1 {
            if !self.search.is_armijo() {
                return Err(bad(format!("c1 only applies to Armijo searches, not '{}'", self.search)));
            }
            if !(c1 > 0.0 && c1 < 1.0) {
                return Err(bad(format!("c1 must lie in (0, 1), got {c1}")));
            }
        }
        Ok(())
    }

    pub fn solver_config(&self, max_iterations: usize) -> SolverConfig {
        SolverConfig::new(
            self.method.into(),
            self.schedule.build(),
            self.search.build(self.c1),
        )
        .with_max_iterations(max_iterations)
    }

    /// Label used in CSV output, e.g. `psm paper:1 armijo-log:8,5`.
    pub fn label(&self) -> String {
        match self.c1 {
            Some(c1) => format!("{} {} {} c1={c1}", self.method, self.schedule, self.search),
            None => format!("{} {} {}", self.method, self.schedule, self.search),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Randomize {
    /// Each seed draws both the instance and the initial point.
    #[default]
    Both,
    /// The instance comes from `instance_seed`; only the initial point varies.
    InitialPoint,
}

fn default_dim() -> usize {
    1000
}

fn default_components() -> usize {
    16
}

fn default_max_iter() -> usize {
    1000
}

/// A sweep of methods over seeds, as read by `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_components")]
    pub components: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub threads: Threads,
    #[serde(default)]
    pub randomize: Randomize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_seed: Option<u64>,
    #[serde(default)]
    pub monitor_lemmas: bool,
    #[serde(default = "default_strict")]
    pub strict: bool,
    pub methods: Vec<MethodSpec>,
}

fn default_strict() -> bool {
    true
}

impl ExperimentSpec {
    pub fn check(&self) -> Result<(), SpecError> {
        if self.seeds.is_empty() {
            return Err(bad("experiment needs at least one seed"));
        }
        if self.methods.is_empty() {
            return Err(bad("experiment needs at least one method"));
        }
        if self.dim == 0 || self.components == 0 {
            return Err(bad("dim and components must be >= 1"));
        }
        if self.max_iter == 0 {
            return Err(bad("max_iter must be >= 1"));
        }
        if self.randomize == Randomize::InitialPoint && self.instance_seed.is_none() {
            return Err(bad("randomize = \"initial-point\" needs instance_seed"));
        }
        for m in &self.methods {
            m.check()?;
        }
        Ok(())
    }

    /// Seed of the instance used for sample `seed`.
    pub fn instance_seed_for(&self, seed: u64) -> u64 {
        match self.randomize {
            Randomize::Both => seed,
            Randomize::InitialPoint => self.instance_seed.unwrap_or(seed),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, SpecError> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        spec.check()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment spec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_forms_round_trip() {
        for s in ["paper:1", "fixed:0.001", "power:1,0.5", "fixed:1e-3"] {
            let spec: ScheduleSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<ScheduleSpec>().unwrap(), spec);
        }
        for s in ["fixed", "argmin", "argmin:0,0.5,1", "armijo-uniform:0.25", "armijo-log:8,5"] {
            let spec: SearchSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
    }

    #[test]
    fn rejects_malformed_text() {
        for s in ["paper", "paper:0", "paper:-1", "fixed:abc", "power:1", "cosine:1", "paper:inf"] {
            assert!(s.parse::<ScheduleSpec>().is_err(), "{s}");
        }
        for s in ["armijo-log:1,5", "armijo-log:8", "armijo-uniform:0", "argmin:2", "fixed:1", "wolfe"] {
            assert!(s.parse::<SearchSpec>().is_err(), "{s}");
        }
        assert!("0".parse::<Threads>().is_err());
        assert_eq!("auto".parse::<Threads>().unwrap(), Threads::Auto);
    }

    #[test]
    fn experiment_toml_defaults() {
        let spec = ExperimentSpec::from_toml(
            r#"
            seeds = [1, 2]
            [[methods]]
            method = "psm"
            schedule = "paper:1"
            search = "armijo-log:8,5"
            "#,
        )
        .unwrap();
        assert_eq!((spec.dim, spec.components, spec.max_iter), (1000, 16, 1000));
        assert_eq!(spec.threads, Threads::Auto);
        assert_eq!(spec.randomize, Randomize::Both);
        assert!(spec.strict);
        assert_eq!(ExperimentSpec::from_toml(&spec.to_toml()).unwrap(), spec);
    }

    #[test]
    fn experiment_check_catches_bad_specs() {
        let base = "[[methods]]\nmethod = \"ism\"\nschedule = \"fixed:1\"\nsearch = \"fixed\"\n";
        assert!(ExperimentSpec::from_toml(&format!("seeds = []\n{base}")).is_err());
        assert!(ExperimentSpec::from_toml("seeds = [1]\nmethods = []\n").is_err());
        assert!(
            ExperimentSpec::from_toml(&format!("seeds = [1]\nrandomize = \"initial-point\"\n{base}"))
                .is_err()
        );
        assert!(ExperimentSpec::from_toml(&format!("seeds = [1]\n{base}c1 = 0.5\n")).is_err());
        assert!(ExperimentSpec::from_toml(&format!("seeds = [1]\nthreads = 0\n{base}")).is_err());
    }
}
