//! Reference implementations used as test oracles.
//!
//! Nothing here calls into the solver code paths it checks: problems are read
//! out as raw `a`/`b` arrays and every method is re-coded on `Vec<f64>`.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rand_distr::StandardNormal;
use subgrad::{ConstraintSet, L1Component, Problem, Vector};

/// Raw weighted-L1 data: `a[i][j]`, `b[i][j]`.
pub struct RawL1 {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl RawL1 {
    pub fn from_problem(p: &Problem<L1Component>) -> Self {
        RawL1 {
            a: p.components().iter().map(|c| c.weights().to_vec()).collect(),
            b: p.components().iter().map(|c| c.targets().to_vec()).collect(),
        }
    }

    pub fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for j in 0..x.len() {
            s += self.a[i][j] * (x[j] - self.b[i][j]).abs();
        }
        s
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.a.len() {
            s += self.component_value(i, x);
        }
        s
    }

    pub fn component_subgrad(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for j in 0..x.len() {
            let d = x[j] - self.b[i][j];
            g[j] = if d > 0.0 {
                self.a[i][j]
            } else if d < 0.0 {
                -self.a[i][j]
            } else {
                0.0
            };
        }
        g
    }

    pub fn bound(&self) -> f64 {
        self.a
            .iter()
            .map(|a| a.iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum()
    }
}

/// Projection onto the unit ball.
pub fn ball_project(x: &mut [f64]) {
    let mut s = 0.0;
    for v in x.iter() {
        s += v * v;
    }
    let n = s.sqrt();
    if n > 1.0 {
        let scale = 1.0 / n;
        for v in x.iter_mut() {
            *v *= scale;
        }
    }
}

/// Classic incremental subgradient method with step `c/n`, unit ball.
/// Returns the objective after every outer iteration and the final point.
pub fn classic_ism(raw: &RawL1, x1: &[f64], c: f64, iters: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = x1.to_vec();
    ball_project(&mut x);
    let mut values = Vec::with_capacity(iters);
    for n in 1..=iters {
        let step = c / n as f64;
        for i in 0..raw.a.len() {
            let g = raw.component_subgrad(i, &x);
            for j in 0..x.len() {
                x[j] -= step * g[j];
            }
            ball_project(&mut x);
        }
        values.push(raw.value(&x));
    }
    (values, x)
}

/// Classic parallel subgradient method with step `c/n`, unit ball.
pub fn classic_psm(raw: &RawL1, x1: &[f64], c: f64, iters: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = x1.to_vec();
    ball_project(&mut x);
    let k = raw.a.len();
    let mut values = Vec::with_capacity(iters);
    for n in 1..=iters {
        let step = c / n as f64;
        let mut acc = vec![0.0; x.len()];
        for i in 0..k {
            let g = raw.component_subgrad(i, &x);
            let mut y: Vec<f64> = (0..x.len()).map(|j| x[j] - step * g[j]).collect();
            ball_project(&mut y);
            for j in 0..x.len() {
                acc[j] += y[j];
            }
        }
        for v in acc.iter_mut() {
            *v /= k as f64;
        }
        x = acc;
        values.push(raw.value(&x));
    }
    (values, x)
}

/// Minimum of `f` over the grid `h·Z² ∩ unit disk`.
pub fn disk_grid_minimum(raw: &RawL1, h: f64) -> (f64, [f64; 2]) {
    let steps = (1.0 / h).round() as i64;
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for ix in -steps..=steps {
        let x = ix as f64 * h;
        for iy in -steps..=steps {
            let y = iy as f64 * h;
            if x * x + y * y > 1.0 {
                continue;
            }
            let v = raw.value(&[x, y]);
            if v < best.0 {
                best = (v, [x, y]);
            }
        }
    }
    best
}

pub fn gaussian<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform sample from the ball of the given radius.
pub fn sample_ball<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    let mut d = gaussian(rng, dim);
    let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
    for v in d.iter_mut() {
        *v *= r / n;
    }
    d
}

/// A random point that satisfies the set's defining inequality.
pub fn sample_in<R: Rng>(rng: &mut R, set: &ConstraintSet, dim: usize) -> Vec<f64> {
    match set {
        ConstraintSet::Ball { radius } => sample_ball(rng, dim, *radius),
        ConstraintSet::Box { lower, upper } => (0..dim)
            .map(|j| lower[j] + rng.gen::<f64>() * (upper[j] - lower[j]))
            .collect(),
        ConstraintSet::Halfspace { normal, offset } => {
            let mut y: Vec<f64> = gaussian(rng, dim).iter().map(|v| 3.0 * v).collect();
            let nn: f64 = normal.iter().map(|a| a * a).sum();
            let excess: f64 = y.iter().zip(normal.iter()).map(|(a, b)| a * b).sum::<f64>() - offset;
            if excess > 0.0 {
                // reflect through the boundary hyperplane
                let t = 2.0 * excess / nn;
                for (v, a) in y.iter_mut().zip(normal.iter()) {
                    *v -= t * a;
                }
            }
            y
        }
        ConstraintSet::WholeSpace => gaussian(rng, dim).iter().map(|v| 5.0 * v).collect(),
    }
}

pub fn vector(c: Vec<f64>) -> Vector {
    Vector::from_vec(c).unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// One random constraint set of each supported kind in dimension `dim`.
pub fn all_kinds<R: Rng>(rng: &mut R, dim: usize) -> Vec<ConstraintSet> {
    let lower: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..0.5)).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + rng.gen_range(0.0..2.0)).collect();
    let normal = loop {
        let n = gaussian(rng, dim);
        if n.iter().any(|&v| v != 0.0) {
            break n;
        }
    };
    vec![
        ConstraintSet::ball(rng.gen_range(0.1..3.0)).unwrap(),
        ConstraintSet::boxed(vector(lower), vector(upper)).unwrap(),
        ConstraintSet::halfspace(vector(normal), rng.gen_range(-1.0..1.0)).unwrap(),
        ConstraintSet::WholeSpace,
    ]
}
