//! The composite objective `f = Σ f_i` over a constraint set, the weighted-L1
//! test family, and the seeded instance generator.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{ConstraintSet, Vector};

/// One nonnegative convex summand `f_i` with a subgradient oracle.
///
/// Implementors promise `value(x) ≥ 0` and `‖subgradient(x)‖ ≤ bound()` for
/// every `x` in the constraint set. Oracles are called concurrently by the
/// parallel solver, hence the `Sync` bound.
pub trait Component: Send + Sync {
    fn value(&self, x: &Vector) -> f64;

    /// Some element of the subdifferential at `x`. Must be deterministic.
    fn subgradient(&self, x: &Vector) -> Vector;

    /// The subgradient bound `M_i > 0`.
    fn bound(&self) -> f64;

    /// Dimension the component is defined on, when it is tied to one.
    fn dim(&self) -> Option<usize> {
        None
    }
}

impl<T: Component + ?Sized> Component for Box<T> {
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        (**self).subgradient(x)
    }

    fn bound(&self) -> f64 {
        (**self).bound()
    }

    fn dim(&self) -> Option<usize> {
        (**self).dim()
    }
}

/// `f_i(x) = Σ_j a_j |x_j − b_j|` with all weights `a_j > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Component {
    weights: Vector,
    targets: Vector,
    bound: f64,
}

impl L1Component {
    pub fn new(weights: Vector, targets: Vector) -> Result<Self> {
        weights.check_dim(targets.dim())?;
        if let Some(j) = weights.iter().position(|&a| a <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "L1 weight {j} must be positive, got {}",
                weights[j]
            )));
        }
        let bound = weights.norm();
        Ok(L1Component {
            weights,
            targets,
            bound,
        })
    }

    pub fn weights(&self) -> &Vector {
        &self.weights
    }

    pub fn targets(&self) -> &Vector {
        &self.targets
    }
}

impl Component for L1Component {
    fn value(&self, x: &Vector) -> f64 {
        debug_assert_eq!(x.dim(), self.weights.dim());
        x.iter()
            .zip(self.weights.iter().zip(self.targets.iter()))
            .map(|(&x, (&a, &b))| a * (x - b).abs())
            .sum()
    }

    /// `a_j · sign(x_j − b_j)` with `sign(0) = 0`, the minimal-norm choice.
    fn subgradient(&self, x: &Vector) -> Vector {
        debug_assert_eq!(x.dim(), self.weights.dim());
        let g = x
            .iter()
            .zip(self.weights.iter().zip(self.targets.iter()))
            .map(|(&x, (&a, &b))| {
                let d = x - b;
                if d > 0.0 {
                    a
                } else if d < 0.0 {
                    -a
                } else {
                    0.0
                }
            })
            .collect();
        Vector::from_raw(g)
    }

    fn bound(&self) -> f64 {
        self.bound
    }

    fn dim(&self) -> Option<usize> {
        Some(self.weights.dim())
    }
}

/// Minimize `Σ_i f_i(x)` subject to `x ∈ C`.
///
/// A minimizer is assumed to exist; nothing here checks it.
#[derive(Debug, Clone)]
pub struct Problem<C = L1Component> {
    dim: usize,
    components: Vec<C>,
    constraint: ConstraintSet,
    total_bound: f64,
}

impl<C: Component> Problem<C> {
    pub fn new(dim: usize, components: Vec<C>, constraint: ConstraintSet) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        if components.is_empty() {
            return Err(Error::NoComponents);
        }
        constraint.validate()?;
        if let Some(d) = constraint.dim() {
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
        }
        for c in &components {
            if let Some(d) = c.dim() {
                if d != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: d,
                    });
                }
            }
            let m = c.bound();
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "subgradient bound must be positive and finite, got {m}"
                )));
            }
        }
        let total_bound = components.iter().map(Component::bound).sum();
        Ok(Problem {
            dim,
            components,
            constraint,
            total_bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[C] {
        &self.components
    }

    /// `K`, the number of summands.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn constraint(&self) -> &ConstraintSet {
        &self.constraint
    }

    /// `M = Σ_i M_i`.
    pub fn total_bound(&self) -> f64 {
        self.total_bound
    }

    /// `f(x) = Σ_i f_i(x)`, summed in component order.
    pub fn objective(&self, x: &Vector) -> f64 {
        self.components.iter().map(|c| c.value(x)).sum()
    }

    /// A subgradient of the full sum: `Σ_i g_i(x)`.
    pub fn subgradient(&self, x: &Vector) -> Vector {
        let mut acc = vec![0.0; self.dim];
        for c in &self.components {
            let g = c.subgradient(x);
            for (a, gj) in acc.iter_mut().zip(g.iter()) {
                *a += gj;
            }
        }
        Vector::from_raw(acc)
    }

    pub fn project(&self, x: &Vector) -> Vector {
        self.constraint.project(x)
    }
}

// Streams of the ChaCha generator, so that instance data and initial points
// drawn from the same seed are independent.
const INSTANCE_STREAM: u64 = 0;
const INITIAL_POINT_STREAM: u64 = 1;

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random weighted-L1 instance over the unit ball.
///
/// Draws `a_{i,j}` uniformly from `(0, 1)` and `b_{i,j}` from `(−1, 0)` with
/// ChaCha8 seeded by `seed`. Component `i` draws all of `a_i`, then all of
/// `b_i`, before component `i + 1`.
pub fn generate_instance(seed: u64, dim: usize, components: usize) -> Result<Problem<L1Component>> {
    if dim == 0 || components == 0 {
        return Err(Error::InvalidParameter(
            "instance needs N >= 1 and K >= 1".into(),
        ));
    }
    let mut rng = seeded(seed, INSTANCE_STREAM);
    let mut comps = Vec::with_capacity(components);
    for _ in 0..components {
        let a: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Open01)).collect();
        let b: Vec<f64> = (0..dim).map(|_| -rng.sample::<f64, _>(Open01)).collect();
        comps.push(L1Component::new(Vector::from_vec(a)?, Vector::from_vec(b)?)?);
    }
    Problem::new(dim, comps, ConstraintSet::unit_ball())
}

/// Starting point with coordinates uniform on `(−2, 2)`. Not projected; the
/// solver does that.
pub fn generate_initial_point(seed: u64, dim: usize) -> Vector {
    assert!(dim >= 1, "initial point needs N >= 1");
    let mut rng = seeded(seed, INITIAL_POINT_STREAM);
    let coords = (0..dim)
        .map(|_| 4.0 * rng.sample::<f64, _>(Open01) - 2.0)
        .collect();
    Vector::from_raw(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_vec(c.to_vec()).unwrap()
    }

    fn l1(a: &[f64], b: &[f64]) -> L1Component {
        L1Component::new(v(a), v(b)).unwrap()
    }

    #[test]
    fn l1_value_examples() {
        assert_eq!(l1(&[1.0], &[0.0]).value(&v(&[0.5])), 0.5);
        assert_eq!(l1(&[2.0, 3.0], &[1.0, -1.0]).value(&v(&[1.0, -1.0])), 0.0);
    }

    #[test]
    fn l1_subgradient_examples() {
        assert_eq!(l1(&[1.0], &[0.0]).subgradient(&v(&[2.0])), v(&[1.0]));
        assert_eq!(l1(&[5.0], &[0.0]).subgradient(&v(&[0.0])), v(&[0.0]));
        assert_eq!(
            l1(&[2.0, 3.0], &[0.0, 0.0]).subgradient(&v(&[-1.0, 4.0])),
            v(&[-2.0, 3.0])
        );
    }

    #[test]
    fn l1_rejects_nonpositive_weights() {
        assert!(L1Component::new(v(&[1.0, 0.0]), v(&[0.0, 0.0])).is_err());
        assert!(L1Component::new(v(&[1.0]), v(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn problem_sums_bounds() {
        let p = Problem::new(
            2,
            vec![l1(&[3.0, 4.0], &[0.0, 0.0]), l1(&[1.0, 0.5], &[0.0, 0.0])],
            ConstraintSet::unit_ball(),
        )
        .unwrap();
        assert_eq!(p.total_bound(), 5.0 + (1.25f64).sqrt());
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn problem_rejects_bad_shapes() {
        assert!(matches!(
            Problem::<L1Component>::new(2, vec![], ConstraintSet::WholeSpace),
            Err(Error::NoComponents)
        ));
        assert!(Problem::new(3, vec![l1(&[1.0], &[0.0])], ConstraintSet::WholeSpace).is_err());
    }

    #[test]
    fn generator_is_deterministic_and_in_range() {
        let p = generate_instance(7, 30, 4).unwrap();
        let q = generate_instance(7, 30, 4).unwrap();
        assert_eq!(p.components(), q.components());
        for c in p.components() {
            assert!(c.weights().iter().all(|&a| a > 0.0 && a < 1.0));
            assert!(c.targets().iter().all(|&b| b > -1.0 && b < 0.0));
        }
        let r = generate_instance(8, 30, 4).unwrap();
        assert_ne!(p.components(), r.components());
    }

    #[test]
    fn generator_paper_size() {
        let p = generate_instance(1, 1000, 16).unwrap();
        assert_eq!(p.len(), 16);
        assert_eq!(p.dim(), 1000);
        assert!(p.components().iter().all(|c| c.weights().dim() == 1000));
        let m: f64 = p.components().iter().map(|c| c.weights().norm()).sum();
        assert_eq!(p.total_bound(), m);
    }

    #[test]
    fn initial_point_box() {
        let x = generate_initial_point(3, 500);
        assert_eq!(x, generate_initial_point(3, 500));
        assert!(x.iter().all(|&c| c > -2.0 && c < 2.0));
        let p = ConstraintSet::unit_ball().project(&x);
        assert!(p.norm() <= 1.0 + 1e-12);
    }
}
