//! Generalized center of mass of finite signed measures on ℝⁿ.
//!
//! Given a radial weight `g` with `g(0) = 0` and a finite measure `μ`, the
//! crate finds a point `x_c` where
//!
//! ```text
//! V(x) = Σ wᵢ g(|x + yᵢ|) (x + yᵢ)/|x + yᵢ| = 0
//! ```
//!
//! by minimizing the energy `E(x) = Σ wᵢ G(|x + yᵢ|)` (or its renormalized
//! form `Σ wᵢ (G(|x + yᵢ|) − G(|yᵢ|))`), where `G' = g`. The point `−x_c` is
//! the `g`-center of mass; `g(r) = r` recovers the classical centroid.
//!
//! Alongside the solver the crate ships executable well-posedness checks:
//! hypothesis classification for existence and uniqueness, kernel bounds,
//! the halfspace fold map, and reproducible counterexample fixtures.
//!
//! All numerical code is generic over [`Real`]; `f64` aliases are exported
//! at the crate root for the common case.

// `!(a > b)` style comparisons are used on purpose so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod fold;
pub mod io;
pub mod linalg;
pub mod measures;
mod reduce;
pub mod solver;
pub mod weights;

use std::fmt::{Debug, Display};

pub use error::{Error, Result};

/// Floating point scalar the crate computes in: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::FloatConst
    + num_traits::NumAssignOps
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub use energy::{BoundCheck, EnergyField, LemmaReport};
pub use experiments::{Scheme, Verdict};
pub use fold::Halfspace;
pub use measures::{Atom, DensityGrid, JordanParts, Measure, SupportGeometry};
pub use solver::{Certificate, Regime, SolveConfig, SolveReport, UniquenessCondition};
pub use weights::{RadialWeight, Tail, WeightClass, WeightKind};

pub type RadialWeightF64 = RadialWeight<f64>;
pub type MeasureF64 = Measure<f64>;
pub type EnergyFieldF64<'a> = EnergyField<'a, f64>;
pub type HalfspaceF64 = Halfspace<f64>;
pub type SolveConfigF64 = SolveConfig<f64>;
pub type SolveReportF64 = SolveReport<f64>;

pub type RadialWeightF32 = RadialWeight<f32>;
pub type MeasureF32 = Measure<f32>;
