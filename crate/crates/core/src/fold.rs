//! Halfspace fold map and the folded center-of-mass problem.

use rayon::prelude::*;

use crate::linalg;
use crate::solver::{self, SolveConfig, SolveReport};
use crate::{Error, Measure, RadialWeight, Real, Result};

/// Closed halfspace `H(p, t) = { y : y·p ≤ t }` with unit normal `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace<T> {
    normal: Vec<T>,
    offset: T,
}

impl<T: Real> Halfspace<T> {
    /// `normal` must already have unit length (within `1e-12`).
    pub fn new(normal: Vec<T>, offset: T) -> Result<Self> {
        if normal.is_empty() || !offset.is_finite() || normal.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig(
                "halfspace must be finite and non-empty".into(),
            ));
        }
        let n = linalg::norm(&normal);
        if (n - T::one()).abs() > T::lit(1e-12) {
            return Err(Error::InvalidConfig(format!(
                "halfspace normal must be a unit vector, |p| = {n}"
            )));
        }
        Ok(Self { normal, offset })
    }

    /// Normalizes `direction` first; the offset is kept as given.
    pub fn from_direction(direction: &[T], offset: T) -> Result<Self> {
        let n = linalg::norm(direction);
        if !(n > T::zero()) {
            return Err(Error::InvalidConfig(
                "halfspace normal must be non-zero".into(),
            ));
        }
        Self::new(linalg::scale(direction, T::one() / n), offset)
    }

    pub fn normal(&self) -> &[T] {
        &self.normal
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn contains(&self, y: &[T]) -> bool {
        linalg::dot(y, &self.normal) <= self.offset
    }

    /// Identity on `H`, reflection across `∂H` elsewhere.
    pub fn fold_point(&self, y: &[T]) -> Vec<T> {
        let excess = linalg::dot(y, &self.normal) - self.offset;
        if excess <= T::zero() {
            y.to_vec()
        } else {
            linalg::axpy(y, -(excess + excess), &self.normal)
        }
    }

    /// Push `m` forward through the fold; weights are unchanged.
    pub fn fold_pushforward(&self, m: &Measure<T>) -> Result<Measure<T>> {
        if m.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                got: self.dim(),
            });
        }
        Ok(m.map_points(|y| self.fold_point(y)))
    }

    /// `s ∈ [0, 1]`: spherical interpolation of the normals, linear of the
    /// offsets.
    pub fn interpolate(&self, other: &Self, s: T) -> Result<Self> {
        let cos = linalg::dot(&self.normal, &other.normal)
            .max(-T::one())
            .min(T::one());
        let angle = cos.acos();
        let normal = if angle.abs() < T::lit(1e-12) {
            linalg::axpy(&linalg::scale(&self.normal, T::one() - s), s, &other.normal)
        } else {
            let sin = angle.sin();
            let a = ((T::one() - s) * angle).sin() / sin;
            let b = (s * angle).sin() / sin;
            linalg::axpy(&linalg::scale(&self.normal, a), b, &other.normal)
        };
        let offset = self.offset + s * (other.offset - self.offset);
        Self::from_direction(&normal, offset)
    }
}

/// Solve the center-of-mass problem for the folded measure `F#μ`.
pub fn solve_folded<T: Real>(
    w: &RadialWeight<T>,
    m: &Measure<T>,
    h: &Halfspace<T>,
    cfg: &SolveConfig<T>,
) -> Result<SolveReport<T>> {
    let folded = h.fold_pushforward(m)?;
    solver::solve(w, &folded, cfg)
}

/// `x(Hₖ)` for each halfspace of a sequence; solves run concurrently.
pub fn fold_continuity_probe<T: Real>(
    w: &RadialWeight<T>,
    m: &Measure<T>,
    halfspaces: &[Halfspace<T>],
    cfg: &SolveConfig<T>,
) -> Result<Vec<Vec<T>>> {
    halfspaces
        .par_iter()
        .map(|h| solve_folded(w, m, h, cfg).map(|r| r.x_c))
        .collect()
}

/// `steps + 1` halfspaces from `from` to `to` inclusive.
pub fn interpolated_sequence<T: Real>(
    from: &Halfspace<T>,
    to: &Halfspace<T>,
    steps: usize,
) -> Result<Vec<Halfspace<T>>> {
    let steps = steps.max(1);
    (0..=steps)
        .map(|k| {
            from.interpolate(
                to,
                T::from_usize(k).unwrap() / T::from_usize(steps).unwrap(),
            )
        })
        .collect()
}
