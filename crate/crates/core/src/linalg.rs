//! Dense vectors and metric projections onto closed convex sets.
//!
//! Every [`ConstraintSet`] here has a closed-form projection, so
//! [`ConstraintSet::project`] is exact up to floating-point rounding and
//! costs a single pass over the coordinates.

use std::ops::Deref;

use crate::error::{Error, Result};

/// A dense real vector with at least one coordinate, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Wraps `coords`, rejecting empty input and non-finite values.
    pub fn from_vec(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Vector(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Inner product `Σ_j x_j y_j`.
    pub fn inner(&self, other: &Vector) -> Result<f64> {
        self.check_dim(other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    /// `‖self − other‖²`.
    pub fn distance_squared(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        self.distance_squared(other).sqrt()
    }

    /// Returns `self − step · direction`.
    pub fn moved(&self, step: f64, direction: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), direction.dim());
        Vector(
            self.0
                .iter()
                .zip(&direction.0)
                .map(|(x, g)| x - step * g)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Arithmetic mean of `points`, summed in slice order.
    ///
    /// Panics if `points` is empty or the dimensions disagree.
    pub fn mean(points: &[Vector]) -> Vector {
        assert!(!points.is_empty(), "mean of an empty point set");
        let dim = points[0].dim();
        let mut acc = vec![0.0; dim];
        for p in points {
            assert_eq!(p.dim(), dim, "mean over vectors of different dimension");
            for (a, x) in acc.iter_mut().zip(&p.0) {
                *a += x;
            }
        }
        let count = points.len() as f64;
        for a in &mut acc {
            *a /= count;
        }
        Vector(acc)
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Vector {
        debug_assert!(!coords.is_empty());
        Vector(coords)
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Vector::from_vec(coords)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inner product of two vectors of equal dimension.
pub fn inner(x: &Vector, y: &Vector) -> Result<f64> {
    x.inner(y)
}

/// Euclidean norm.
pub fn norm(x: &Vector) -> f64 {
    x.norm()
}

/// Metric projection of `x` onto `set`.
pub fn project(set: &ConstraintSet, x: &Vector) -> Vector {
    set.project(x)
}

/// A nonempty closed convex subset of `R^N` with a closed-form projection.
///
/// Build values through the checked constructors; [`ConstraintSet::validate`]
/// re-checks a set assembled by hand.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    /// `{x : ‖x‖ ≤ radius}`.
    Ball { radius: f64 },
    /// `{x : lower ≤ x ≤ upper}` coordinatewise.
    Box { lower: Vector, upper: Vector },
    /// `{x : ⟨normal, x⟩ ≤ offset}`.
    Halfspace { normal: Vector, offset: f64 },
    WholeSpace,
}

impl ConstraintSet {
    pub fn unit_ball() -> Self {
        ConstraintSet::Ball { radius: 1.0 }
    }

    pub fn ball(radius: f64) -> Result<Self> {
        let set = ConstraintSet::Ball { radius };
        set.validate()?;
        Ok(set)
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        let set = ConstraintSet::Box { lower, upper };
        set.validate()?;
        Ok(set)
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        let set = ConstraintSet::Halfspace { normal, offset };
        set.validate()?;
        Ok(set)
    }

    /// Checks that the set is nonempty, closed and convex as parameterized.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConstraintSet::Ball { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidConstraint(format!(
                        "ball radius must be positive and finite, got {radius}"
                    )));
                }
            }
            ConstraintSet::Box { lower, upper } => {
                lower.check_dim(upper.dim())?;
                if let Some(j) = (0..lower.dim()).find(|&j| lower[j] > upper[j]) {
                    return Err(Error::InvalidConstraint(format!(
                        "box lower bound exceeds upper bound at coordinate {j}"
                    )));
                }
            }
            ConstraintSet::Halfspace { normal, offset } => {
                if normal.iter().all(|&a| a == 0.0) {
                    return Err(Error::InvalidConstraint(
                        "halfspace normal must be nonzero".into(),
                    ));
                }
                if !offset.is_finite() {
                    return Err(Error::InvalidConstraint(
                        "halfspace offset must be finite".into(),
                    ));
                }
            }
            ConstraintSet::WholeSpace => {}
        }
        Ok(())
    }

    /// The dimension this set is tied to, if any. Balls and the whole space
    /// live in every dimension.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ConstraintSet::Box { lower, .. } => Some(lower.dim()),
            ConstraintSet::Halfspace { normal, .. } => Some(normal.dim()),
            ConstraintSet::Ball { .. } | ConstraintSet::WholeSpace => None,
        }
    }

    /// Nearest point of the set to `x`.
    ///
    /// Panics if `x` has a different dimension than a box or halfspace.
    pub fn project(&self, x: &Vector) -> Vector {
        if let Some(d) = self.dim() {
            assert_eq!(x.dim(), d, "projection onto a set of different dimension");
        }
        match self {
            ConstraintSet::Ball { radius } => {
                let n = x.norm();
                // Closed ball: boundary points stay put.
                if n <= *radius {
                    x.clone()
                } else {
                    let scale = radius / n;
                    Vector(x.iter().map(|c| c * scale).collect())
                }
            }
            ConstraintSet::Box { lower, upper } => Vector(
                x.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(&c, (&lo, &hi))| c.clamp(lo, hi))
                    .collect(),
            ),
            ConstraintSet::Halfspace { normal, offset } => {
                let excess = dot(x, normal) - offset;
                if excess <= 0.0 {
                    x.clone()
                } else {
                    let t = excess / dot(normal, normal);
                    x.moved(t, normal)
                }
            }
            ConstraintSet::WholeSpace => x.clone(),
        }
    }

    /// Whether `x` satisfies the defining inequality up to `tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self {
            ConstraintSet::Ball { radius } => x.norm() <= radius + tol,
            ConstraintSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(&c, (&lo, &hi))| c >= lo - tol && c <= hi + tol),
            ConstraintSet::Halfspace { normal, offset } => dot(x, normal) <= offset + tol,
            ConstraintSet::WholeSpace => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_vec(c.to_vec()).unwrap()
    }

    #[test]
    fn inner_examples() {
        assert_eq!(inner(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(inner(&v(&[1.0, 2.0]), &v(&[3.0, 4.0])).unwrap(), 11.0);
    }

    #[test]
    fn inner_rejects_mismatch() {
        let err = inner(&v(&[1.0, 2.0]), &v(&[1.0])).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 1,
                found: 2
            }
        ));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm(&v(&[0.0, 0.0, 0.0])), 0.0);
        assert_eq!(norm(&v(&[3.0, 4.0])), 5.0);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(Vector::from_vec(vec![]), Err(Error::EmptyVector)));
        assert!(matches!(
            Vector::from_vec(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(ConstraintSet::ball(0.0).is_err());
        assert!(ConstraintSet::boxed(v(&[1.0]), v(&[0.0])).is_err());
        assert!(ConstraintSet::halfspace(v(&[0.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn ball_projection_examples() {
        let c = ConstraintSet::unit_ball();
        assert_eq!(c.project(&v(&[0.5, 0.0])), v(&[0.5, 0.0]));
        let p = c.project(&v(&[3.0, 4.0]));
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        // boundary point returned unchanged
        let b = v(&[0.6, 0.8]);
        let on = c.project(&v(&[1.0, 0.0]));
        assert_eq!(on, v(&[1.0, 0.0]));
        assert!(c.contains(&c.project(&b), 1e-12));
    }

    #[test]
    fn box_projection_clamps() {
        let c = ConstraintSet::boxed(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        assert_eq!(c.project(&v(&[-1.0, 2.0])), v(&[0.0, 1.0]));
    }

    #[test]
    fn halfspace_projection() {
        let c = ConstraintSet::halfspace(v(&[1.0, 1.0]), 1.0).unwrap();
        let p = c.project(&v(&[2.0, 2.0]));
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        assert_eq!(c.project(&v(&[0.0, 0.0])), v(&[0.0, 0.0]));
    }

    #[test]
    fn mean_sums_in_order() {
        let m = Vector::mean(&[v(&[1.0, -1.0]), v(&[0.0, 3.0])]);
        assert_eq!(m, v(&[0.5, 1.0]));
    }
}
