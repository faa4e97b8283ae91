//! Zero-finding for `V` by energy minimization.
//!
//! Iterates Newton steps while the Hessian is positive definite and falls back
//! to steepest descent otherwise, with Armijo backtracking on the energy in
//! both cases. Energy decreases are measured with
//! [`EnergyField::energy_difference`], so the sufficient-decrease test stays
//! meaningful down to gradients far below the energy's own rounding level.

use rayon::prelude::*;

use crate::energy::EnergyField;
use crate::linalg;
use crate::measures::LINE_TOLERANCE;
use crate::weights::WeightClass;
use crate::{Error, Measure, RadialWeight, Real, Result};

const NEWTON_PD_RATIO: f64 = 1e-12;
const MAX_BACKTRACKS: usize = 80;
const PROBE_POINTS: usize = 11;
const ORACLE_MAX_POINTS: u128 = 100_000_000;

/// Existence regime of a `(weight, measure)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Positive atoms and `∫g = ∞`.
    CompactPositive,
    /// Positive measure with `0 < g(∞) < ∞`; renormalized energy.
    UnboundedPositive,
    /// Signed measure with `0 < g(∞) < ∞`; existence only.
    Signed,
    Unsupported,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UniquenessCondition {
    None,
    /// `g` strictly increasing.
    StrictlyIncreasing,
    /// `g` increasing and positive, measure not supported in a line.
    IncreasingNotLineSupported,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub regime: Regime,
    pub uniqueness_condition: UniquenessCondition,
    pub weight_class: WeightClass,
    pub line_supported: bool,
}

impl Certificate {
    pub fn existence(&self) -> bool {
        self.regime != Regime::Unsupported
    }

    pub fn uniqueness(&self) -> bool {
        self.uniqueness_condition != UniquenessCondition::None
    }
}

pub fn certify<T: Real>(w: &RadialWeight<T>, m: &Measure<T>) -> Certificate {
    let class = w.classify();
    let line_supported = m.support_geometry(T::lit(LINE_TOLERANCE)).line_supported;
    let regime = if m.is_signed() {
        if class.positive_finite_limit {
            Regime::Signed
        } else {
            Regime::Unsupported
        }
    } else if class.positive_finite_limit {
        Regime::UnboundedPositive
    } else if class.integral_diverges {
        Regime::CompactPositive
    } else {
        Regime::Unsupported
    };
    let uniqueness_condition = match regime {
        Regime::Signed | Regime::Unsupported => UniquenessCondition::None,
        _ if class.strictly_increasing => UniquenessCondition::StrictlyIncreasing,
        _ if class.increasing_positive && !line_supported => {
            UniquenessCondition::IncreasingNotLineSupported
        }
        _ => UniquenessCondition::None,
    };
    Certificate {
        regime,
        uniqueness_condition,
        weight_class: class,
        line_supported,
    }
}

#[derive(Clone, Debug)]
pub struct SolveConfig<T> {
    /// Stop once `‖V‖` is at most this. `None` means `1e-10` scaled by
    /// `|μ|(ℝⁿ)·sup|g|` (or by `|μ|(ℝⁿ)` alone when `g` is unbounded).
    pub grad_tol: Option<T>,
    pub max_iters: usize,
    pub step_shrink: T,
    pub armijo_c: T,
    /// `None` means `10⁶ (1 + bounding radius)`.
    pub divergence_radius: Option<T>,
    /// `None` picks the renormalized energy whenever `g` is bounded.
    pub renormalized: Option<bool>,
    /// `None` starts from the negated centroid.
    pub initial: Option<Vec<T>>,
}

impl<T: Real> Default for SolveConfig<T> {
    fn default() -> Self {
        Self {
            grad_tol: None,
            max_iters: 10_000,
            step_shrink: T::lit(0.5),
            armijo_c: T::lit(1e-4),
            divergence_radius: None,
            renormalized: None,
            initial: None,
        }
    }
}

impl<T: Real> SolveConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: T| v > T::zero() && v < T::one();
        if let Some(t) = self.grad_tol {
            if !(t > T::zero()) {
                return Err(Error::InvalidConfig("grad_tol must be positive".into()));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        if !unit(self.step_shrink) || !unit(self.armijo_c) {
            return Err(Error::InvalidConfig(
                "step_shrink and armijo_c must lie in (0, 1)".into(),
            ));
        }
        if let Some(r) = self.divergence_radius {
            if !(r > T::zero()) {
                return Err(Error::InvalidConfig(
                    "divergence_radius must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn resolved_tol(&self, w: &RadialWeight<T>, m: &Measure<T>) -> T {
        self.grad_tol.unwrap_or_else(|| {
            let scale = m.total_variation() * w.sup_abs_g().unwrap_or(T::one());
            T::lit(1e-10) * scale
        })
    }

    pub fn resolved_radius(&self, m: &Measure<T>) -> T {
        self.divergence_radius
            .unwrap_or_else(|| T::lit(1e6) * (T::one() + m.bounding_radius()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Start,
    Newton,
    SteepestDescent,
}

#[derive(Clone, Debug)]
pub struct TraceEntry<T> {
    pub x: Vec<T>,
    pub energy: T,
    pub grad_norm: T,
    pub step: StepKind,
    /// Energy change of the step that produced this entry, zero at start.
    pub energy_change: T,
}

#[derive(Clone, Debug)]
pub struct ProbePoint<T> {
    pub point: Vec<T>,
    pub grad_norm: T,
}

#[derive(Clone, Debug)]
pub struct SolveReport<T> {
    pub x_c: Vec<T>,
    pub residual_norm: T,
    pub grad_tol: T,
    pub existence_certified: bool,
    pub uniqueness_certified: bool,
    pub certificate: Certificate,
    pub renormalized: bool,
    pub iterations: usize,
    pub trace: Vec<TraceEntry<T>>,
    /// `V` along a short segment through `x_c` in the flattest direction,
    /// present when uniqueness is not certified.
    pub flatness_probe: Option<Vec<ProbePoint<T>>>,
}

impl<T: Real> SolveReport<T> {
    /// The `g`-center of mass, `−x_c`.
    pub fn center(&self) -> Vec<T> {
        self.x_c.iter().map(|&c| -c).collect()
    }
}

/// Find `x_c` with `V(x_c) = 0`.
///
/// Runs even when [`certify`] finds no regime with guaranteed existence; in
/// that case escaping the divergence ball is reported as
/// [`Error::DivergenceDetected`].
pub fn solve<T: Real>(
    w: &RadialWeight<T>,
    m: &Measure<T>,
    cfg: &SolveConfig<T>,
) -> Result<SolveReport<T>> {
    cfg.validate()?;
    let certificate = certify(w, m);
    let ef = match cfg.renormalized {
        Some(r) => EnergyField::new(w, m, r)?,
        None => EnergyField::with_default_mode(w, m),
    };
    let tol = cfg.resolved_tol(w, m);
    let radius = cfg.resolved_radius(m);

    let mut x = match &cfg.initial {
        Some(x0) => {
            if x0.len() != m.dim() {
                return Err(Error::DimensionMismatch {
                    expected: m.dim(),
                    got: x0.len(),
                });
            }
            x0.clone()
        }
        None => m.centroid().iter().map(|&c| -c).collect(),
    };
    let mut v = ef.big_v(&x);
    let mut v_norm = linalg::norm(&v);
    let mut trace = vec![TraceEntry {
        x: x.clone(),
        energy: ef.energy(&x),
        grad_norm: v_norm,
        step: StepKind::Start,
        energy_change: T::zero(),
    }];
    let mut sd_step = T::one() / m.total_variation();
    let mut iterations = 0;

    while !(v_norm <= tol) {
        if iterations >= cfg.max_iters || !v_norm.is_finite() {
            return Err(Error::NoConvergence {
                iterations,
                residual: v_norm.to_f64_lossy(),
            });
        }
        iterations += 1;

        let mut accepted = None;
        let hessian = ef.hessian(&x);
        if hessian.is_finite() {
            let eig = hessian.eigen();
            let pd = eig.max() > T::zero() && eig.min() > T::lit(NEWTON_PD_RATIO) * eig.max();
            if pd {
                let dir: Vec<T> = eig.solve(&v).iter().map(|&c| -c).collect();
                accepted = line_search(&ef, &x, &v, &dir, T::one(), cfg)
                    .map(|(a, de)| (linalg::axpy(&x, a, &dir), de, StepKind::Newton));
            }
        }
        if accepted.is_none() {
            let dir: Vec<T> = v.iter().map(|&c| -c).collect();
            accepted = line_search(&ef, &x, &v, &dir, sd_step + sd_step, cfg).map(|(a, de)| {
                sd_step = a;
                (linalg::axpy(&x, a, &dir), de, StepKind::SteepestDescent)
            });
        }
        let Some((next, change, step)) = accepted else {
            return Err(Error::NoConvergence {
                iterations,
                residual: v_norm.to_f64_lossy(),
            });
        };

        x = next;
        v = ef.big_v(&x);
        v_norm = linalg::norm(&v);
        trace.push(TraceEntry {
            x: x.clone(),
            energy: ef.energy(&x),
            grad_norm: v_norm,
            step,
            energy_change: change,
        });
        let x_norm = linalg::norm(&x);
        if !(x_norm <= radius) {
            return Err(Error::DivergenceDetected {
                iterations,
                norm: x_norm.to_f64_lossy(),
                radius: radius.to_f64_lossy(),
            });
        }
    }

    let flatness_probe = if certificate.uniqueness() {
        None
    } else {
        Some(flatness_probe(&ef, &x, tol))
    };
    Ok(SolveReport {
        x_c: x,
        residual_norm: v_norm,
        grad_tol: tol,
        existence_certified: certificate.existence(),
        uniqueness_certified: certificate.uniqueness(),
        certificate,
        renormalized: ef.is_renormalized(),
        iterations,
        trace,
        flatness_probe,
    })
}

/// Armijo backtracking from `alpha`; returns the step and the energy change.
fn line_search<T: Real>(
    ef: &EnergyField<'_, T>,
    x: &[T],
    v: &[T],
    dir: &[T],
    mut alpha: T,
    cfg: &SolveConfig<T>,
) -> Option<(T, T)> {
    let slope = linalg::dot(v, dir);
    if !(slope < T::zero()) {
        return None;
    }
    for _ in 0..MAX_BACKTRACKS {
        let trial = linalg::axpy(x, alpha, dir);
        let change = ef.energy_difference(x, &trial);
        if change < T::zero() && change <= cfg.armijo_c * alpha * slope {
            return Some((alpha, change));
        }
        alpha *= cfg.step_shrink;
    }
    None
}

fn flatness_probe<T: Real>(ef: &EnergyField<'_, T>, x: &[T], tol: T) -> Vec<ProbePoint<T>> {
    let eig = ef.hessian(x).eigen();
    let dir = &eig.vectors[0];
    let half = tol.sqrt();
    let last = T::from_usize(PROBE_POINTS - 1).unwrap();
    (0..PROBE_POINTS)
        .map(|i| {
            let s = -half + (half + half) * T::from_usize(i).unwrap() / last;
            let point = linalg::axpy(x, s, dir);
            let grad_norm = linalg::norm(&ef.big_v(&point));
            ProbePoint { point, grad_norm }
        })
        .collect()
}

fn lattice_counts<T: Real>(lo: &[T], hi: &[T], step: T) -> Result<Vec<usize>> {
    if lo.len() != hi.len() || lo.is_empty() {
        return Err(Error::InvalidConfig(
            "box corners must share a positive dimension".into(),
        ));
    }
    if lo.len() > 3 {
        return Err(Error::InvalidConfig(
            "lattice search is limited to dimension 3".into(),
        ));
    }
    if !(step > T::zero() && step.is_finite()) {
        return Err(Error::InvalidConfig("lattice step must be positive".into()));
    }
    let mut counts = Vec::with_capacity(lo.len());
    let mut total: u128 = 1;
    for (&a, &b) in lo.iter().zip(hi) {
        if !(b >= a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidConfig(
                "box must satisfy lo ≤ hi per axis".into(),
            ));
        }
        let span = ((b - a) / step + T::lit(1e-9)).floor();
        let n = span.to_f64_lossy() + 1.0;
        if n > ORACLE_MAX_POINTS as f64 {
            return Err(Error::OracleTooLarge(n as u128));
        }
        let n = n as usize;
        total = total.saturating_mul(n as u128);
        counts.push(n);
    }
    if total > ORACLE_MAX_POINTS {
        return Err(Error::OracleTooLarge(total));
    }
    Ok(counts)
}

/// Points `lo + k·step` of the box, row-major (last axis fastest).
pub struct Lattice<T> {
    lo: Vec<T>,
    step: T,
    counts: Vec<usize>,
}

impl<T: Real> Lattice<T> {
    pub fn new(lo: &[T], hi: &[T], step: T) -> Result<Self> {
        Ok(Self {
            counts: lattice_counts(lo, hi, step)?,
            lo: lo.to_vec(),
            step,
        })
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, mut index: usize) -> Vec<T> {
        let mut p = vec![T::zero(); self.counts.len()];
        for a in (0..self.counts.len()).rev() {
            let k = index % self.counts[a];
            index /= self.counts[a];
            p[a] = self.lo[a] + T::from_usize(k).unwrap() * self.step;
        }
        p
    }
}

/// Exhaustive minimization of the energy over a lattice; ties go to the
/// lexicographically first point.
pub fn oracle_grid_search<T: Real>(
    w: &RadialWeight<T>,
    m: &Measure<T>,
    lo: &[T],
    hi: &[T],
    step: T,
) -> Result<Vec<T>> {
    if lo.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: lo.len(),
        });
    }
    let lattice = Lattice::new(lo, hi, step)?;
    let ef = EnergyField::with_default_mode(w, m);
    let key = |i: usize| {
        let e = ef.energy(&lattice.point(i));
        (if e.is_nan() { T::infinity() } else { e }, i)
    };
    let better = |a: (T, usize), b: (T, usize)| {
        if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let (_, best) = (0..lattice.len())
        .into_par_iter()
        .map(key)
        .reduce(|| (T::infinity(), usize::MAX), better);
    Ok(lattice.point(if best == usize::MAX { 0 } else { best }))
}

/// Coarse lattice search over the box, then a fine search on a window of
/// two coarse steps around the coarse winner.
pub fn oracle_refined<T: Real>(
    w: &RadialWeight<T>,
    m: &Measure<T>,
    lo: &[T],
    hi: &[T],
    coarse: T,
    fine: T,
) -> Result<Vec<T>> {
    let c = oracle_grid_search(w, m, lo, hi, coarse)?;
    let pad = coarse + coarse;
    let flo: Vec<T> = c.iter().map(|&v| v - pad).collect();
    let fhi: Vec<T> = c.iter().map(|&v| v + pad).collect();
    oracle_grid_search(w, m, &flo, &fhi, fine)
}
