//! Text formats: weighted-L1 instances and iteration traces.
//!
//! Instance files hold a header line `N K seed`, then the `K` weight vectors
//! one per line, then the `K` target vectors one per line. Values are written
//! with 17 significant digits, so reading a file back reproduces every `f64`
//! exactly.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::{ConstraintSet, Vector};
use crate::problem::{L1Component, Problem};
use crate::solvers::IterationRecord;

pub const TRACE_HEADER: &str = "n,f,elapsed_seconds,fallbacks,min_step,max_step,lemma_gap";

/// Formats `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A weighted-L1 problem together with the seed that produced it.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub problem: Problem<L1Component>,
}

impl Instance {
    pub fn generate(seed: u64, dim: usize, components: usize) -> Result<Self> {
        Ok(Instance {
            seed,
            problem: crate::problem::generate_instance(seed, dim, components)?,
        })
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.problem.dim() == other.problem.dim()
            && self.problem.components() == other.problem.components()
            && self.problem.constraint() == other.problem.constraint()
    }
}

fn write_row<W: Write>(w: &mut W, v: &Vector) -> std::io::Result<()> {
    let row: Vec<String> = v.iter().map(|&x| fmt_f64(x)).collect();
    writeln!(w, "{}", row.join(" "))
}

pub fn write_instance<W: Write>(w: &mut W, instance: &Instance) -> Result<()> {
    let p = &instance.problem;
    writeln!(w, "{} {} {}", p.dim(), p.len(), instance.seed)?;
    for c in p.components() {
        write_row(w, c.weights())?;
    }
    for c in p.components() {
        write_row(w, c.targets())?;
    }
    Ok(())
}

/// Reads an instance written by [`write_instance`]. The constraint set is
/// the unit ball.
pub fn read_instance<R: BufRead>(r: R) -> Result<Instance> {
    let mut lines = r
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let parse_err = |line: usize, message: String| Error::Parse {
        line: line + 1,
        message,
    };

    let (lno, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "missing header".into()))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(lno, format!("expected 'N K seed', got '{header}'")));
    }
    let dim: usize = fields[0]
        .parse()
        .map_err(|e| parse_err(lno, format!("bad N: {e}")))?;
    let count: usize = fields[1]
        .parse()
        .map_err(|e| parse_err(lno, format!("bad K: {e}")))?;
    let seed: u64 = fields[2]
        .parse()
        .map_err(|e| parse_err(lno, format!("bad seed: {e}")))?;

    let mut rows = Vec::with_capacity(2 * count);
    for _ in 0..2 * count {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| parse_err(lno, format!("expected {} vector rows", 2 * count)))?;
        let line = line?;
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(lno, format!("bad number: {e}")))?;
        if values.len() != dim {
            return Err(parse_err(
                lno,
                format!("expected {dim} values, found {}", values.len()),
            ));
        }
        rows.push(Vector::from_vec(values)?);
    }
    if let Some((lno, _)) = lines.next() {
        return Err(parse_err(lno, "trailing data after instance".into()));
    }

    let targets = rows.split_off(count);
    let components = rows
        .into_iter()
        .zip(targets)
        .map(|(a, b)| L1Component::new(a, b))
        .collect::<Result<Vec<_>>>()?;
    let problem = Problem::new(dim, components, ConstraintSet::unit_ball())?;
    Ok(Instance { seed, problem })
}

/// Writes the trace CSV. The `lemma_gap` cell is empty when not monitored.
pub fn write_trace<W: Write>(w: &mut W, trace: &[IterationRecord]) -> Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in trace {
        let gap = r.lemma_gap.map(fmt_f64).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.n,
            fmt_f64(r.f_value),
            fmt_f64(r.elapsed_seconds),
            r.fallbacks,
            fmt_f64(r.min_step()),
            fmt_f64(r.max_step()),
            gap
        )?;
    }
    Ok(())
}
