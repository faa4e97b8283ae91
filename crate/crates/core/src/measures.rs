//! Finite signed measures on ℝⁿ as weighted atom lists.
//!
//! Densities sampled on a rectangular grid are discretized at ingestion: each
//! cell becomes an atom at its center carrying `density × cell volume`.

use crate::linalg::{self, SymMatrix};
use crate::{Error, Real, Result};

/// Default relative tolerance for line-support detection.
pub const LINE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom<T> {
    pub point: Vec<T>,
    pub weight: T,
}

impl<T> Atom<T> {
    pub fn new(point: Vec<T>, weight: T) -> Self {
        Self { point, weight }
    }
}

/// Axis-aligned grid of cells covering `[origin, origin + extent]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid<T> {
    pub origin: Vec<T>,
    pub extent: Vec<T>,
    pub shape: Vec<usize>,
}

impl<T: Real> DensityGrid<T> {
    pub fn new(origin: Vec<T>, extent: Vec<T>, shape: Vec<usize>) -> Result<Self> {
        let dim = origin.len();
        if dim == 0 || extent.len() != dim || shape.len() != dim {
            return Err(Error::InvalidMeasure(
                "grid origin, extent and shape must share a positive dimension".into(),
            ));
        }
        if shape.contains(&0) {
            return Err(Error::InvalidMeasure(
                "grid needs at least one cell per axis".into(),
            ));
        }
        if extent.iter().any(|&e| !(e > T::zero() && e.is_finite()))
            || origin.iter().any(|o| !o.is_finite())
        {
            return Err(Error::InvalidMeasure(
                "grid extent must be positive and finite".into(),
            ));
        }
        Ok(Self {
            origin,
            extent,
            shape,
        })
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn cell_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn cell_volume(&self) -> T {
        self.extent
            .iter()
            .zip(&self.shape)
            .fold(T::one(), |v, (&e, &s)| v * e / T::from_usize(s).unwrap())
    }

    /// Cell centers in row-major order (last axis fastest).
    pub fn cell_centers(&self) -> Vec<Vec<T>> {
        let dim = self.dim();
        let half = T::lit(0.5);
        let mut index = vec![0usize; dim];
        let mut out = Vec::with_capacity(self.cell_count());
        for _ in 0..self.cell_count() {
            out.push(
                (0..dim)
                    .map(|a| {
                        let h = self.extent[a] / T::from_usize(self.shape[a]).unwrap();
                        self.origin[a] + (T::from_usize(index[a]).unwrap() + half) * h
                    })
                    .collect(),
            );
            for a in (0..dim).rev() {
                index[a] += 1;
                if index[a] < self.shape[a] {
                    break;
                }
                index[a] = 0;
            }
        }
        out
    }

    /// Same box with every axis split `factor` times finer.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            origin: self.origin.clone(),
            extent: self.extent.clone(),
            shape: self.shape.iter().map(|s| s * factor).collect(),
        }
    }
}

/// Finite signed measure with `0 < μ(ℝⁿ) ≤ |μ|(ℝⁿ) < ∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure<T> {
    dim: usize,
    atoms: Vec<Atom<T>>,
    total_mass: T,
    total_variation: T,
}

/// Positive and negative parts; negative weights stored as magnitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanParts<T> {
    pub positive: Vec<Atom<T>>,
    pub negative: Vec<Atom<T>>,
}

impl<T: Real> JordanParts<T> {
    pub fn positive_mass(&self) -> T {
        self.positive.iter().fold(T::zero(), |s, a| s + a.weight)
    }

    pub fn negative_mass(&self) -> T {
        self.negative.iter().fold(T::zero(), |s, a| s + a.weight)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportGeometry<T> {
    pub bounding_radius: T,
    pub line_supported: bool,
    /// Point on the principal line and its unit direction.
    pub line: Option<(Vec<T>, Vec<T>)>,
}

impl<T: Real> Measure<T> {
    pub fn from_atoms(dim: usize, atoms: Vec<Atom<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("dimension must be positive".into()));
        }
        let mut kept = Vec::with_capacity(atoms.len());
        for a in atoms {
            if a.point.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.point.len(),
                });
            }
            if !a.weight.is_finite() || a.point.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMeasure("atoms must be finite".into()));
            }
            if a.weight != T::zero() {
                kept.push(a);
            }
        }
        let total_mass = kept.iter().fold(T::zero(), |s, a| s + a.weight);
        let total_variation = kept.iter().fold(T::zero(), |s, a| s + a.weight.abs());
        if !(total_mass > T::zero()) {
            return Err(Error::NonPositiveMass);
        }
        if !total_variation.is_finite() {
            return Err(Error::InvalidMeasure("total variation overflows".into()));
        }
        Ok(Self {
            dim,
            atoms: kept,
            total_mass,
            total_variation,
        })
    }

    /// Convenience for `(point, weight)` pairs.
    pub fn from_pairs(dim: usize, pairs: &[(&[T], T)]) -> Result<Self> {
        Self::from_atoms(
            dim,
            pairs
                .iter()
                .map(|&(p, w)| Atom::new(p.to_vec(), w))
                .collect(),
        )
    }

    /// One atom per grid cell at the cell center, weight `f · cell volume`.
    /// `values` is row-major over `grid.shape`.
    pub fn from_density(grid: &DensityGrid<T>, values: &[T]) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::InvalidMeasure(format!(
                "density has {} values for {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        let vol = grid.cell_volume();
        let atoms = grid
            .cell_centers()
            .into_iter()
            .zip(values)
            .map(|(c, &f)| Atom::new(c, f * vol))
            .collect();
        Self::from_atoms(grid.dim(), atoms)
    }

    /// Sample `f` at cell centers and discretize.
    pub fn from_density_fn(grid: &DensityGrid<T>, f: impl Fn(&[T]) -> T) -> Result<Self> {
        let values: Vec<T> = grid.cell_centers().iter().map(|c| f(c)).collect();
        Self::from_density(grid, &values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    /// `μ(ℝⁿ)`.
    pub fn total_mass(&self) -> T {
        self.total_mass
    }

    /// `|μ|(ℝⁿ)`.
    pub fn total_variation(&self) -> T {
        self.total_variation
    }

    pub fn is_signed(&self) -> bool {
        self.atoms.iter().any(|a| a.weight < T::zero())
    }

    /// `Σ wᵢ yᵢ / Σ wᵢ`.
    pub fn centroid(&self) -> Vec<T> {
        let mut c = vec![T::zero(); self.dim];
        for a in &self.atoms {
            for (ci, &p) in c.iter_mut().zip(&a.point) {
                *ci += a.weight * p;
            }
        }
        c.iter().map(|&x| x / self.total_mass).collect()
    }

    pub fn jordan(&self) -> JordanParts<T> {
        let (pos, neg): (Vec<_>, Vec<_>) = self
            .atoms
            .iter()
            .cloned()
            .partition(|a| a.weight > T::zero());
        JordanParts {
            positive: pos,
            negative: neg
                .into_iter()
                .map(|a| Atom::new(a.point, -a.weight))
                .collect(),
        }
    }

    pub fn bounding_radius(&self) -> T {
        self.atoms
            .iter()
            .map(|a| linalg::norm(&a.point))
            .fold(T::zero(), T::max)
    }

    /// Line-support detection: fit the principal axis of the `|w|`-weighted
    /// covariance through the weighted mean, then require every atom to lie
    /// within `tol · (1 + R)` of it, `R` the bounding radius.
    pub fn support_geometry(&self, tol: T) -> SupportGeometry<T> {
        let bounding_radius = self.bounding_radius();
        let n = self.dim;
        let tv = self.total_variation;
        let mut mean = vec![T::zero(); n];
        for a in &self.atoms {
            for (m, &p) in mean.iter_mut().zip(&a.point) {
                *m += a.weight.abs() * p;
            }
        }
        for m in mean.iter_mut() {
            *m /= tv;
        }
        if n == 1 {
            return SupportGeometry {
                bounding_radius,
                line_supported: true,
                line: Some((mean, vec![T::one()])),
            };
        }
        let mut cov = SymMatrix::zeros(n);
        for a in &self.atoms {
            let d = linalg::sub(&a.point, &mean);
            cov.add_outer(a.weight.abs() / tv, &d);
        }
        let axis = cov.eigen().vectors[n - 1].clone();
        let threshold = tol * (T::one() + bounding_radius);
        let line_supported = self.atoms.iter().all(|a| {
            let d = linalg::sub(&a.point, &mean);
            let off = linalg::axpy(&d, -linalg::dot(&d, &axis), &axis);
            linalg::norm(&off) <= threshold
        });
        let line = if line_supported {
            let mut dir = axis;
            if let Some(first) = dir.iter().find(|c| c.abs() > T::epsilon()) {
                if *first < T::zero() {
                    dir.iter_mut().for_each(|c| *c = -*c);
                }
            }
            Some((mean, dir))
        } else {
            None
        };
        SupportGeometry {
            bounding_radius,
            line_supported,
            line,
        }
    }

    /// Apply `f` to every atom position; weights are kept.
    pub fn map_points(&self, f: impl Fn(&[T]) -> Vec<T>) -> Self {
        Self {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(f(&a.point), a.weight))
                .collect(),
            total_mass: self.total_mass,
            total_variation: self.total_variation,
        }
    }

    /// Multiply every weight by `c > 0`.
    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::from_atoms(
            self.dim,
            self.atoms
                .iter()
                .map(|a| Atom::new(a.point.clone(), a.weight * c))
                .collect(),
        )
    }

    pub fn translated(&self, z: &[T]) -> Self {
        self.map_points(|p| linalg::add(p, z))
    }
}
