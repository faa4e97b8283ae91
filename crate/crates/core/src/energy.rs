//! Kernel `Γ(x) = G(|x|)`, the radial field `v = ∇Γ`, its measure integral
//! `V`, and the plain and renormalized energies whose gradient is `V`.
//!
//! Also houses the kernel bounds that make the renormalized energy coercive:
//! the global bound `|Γ(x+y) − Γ(y)| ≤ sup|g|·|x|`, the one-sided bound
//! `Γ(x+y) − Γ(y) > ½ g(∞)|x|` and the two-sided band
//! `(1 ∓ 2ε) g(∞)|x|`, both for `y ∈ B(R)` and `|x|` past a threshold.

use crate::linalg::{self, SymMatrix};
use crate::reduce;
use crate::{Error, Measure, RadialWeight, Real, Result};

/// Arguments shorter than this are treated as the origin by `v`.
const ORIGIN_CUTOFF: f64 = 1e-300;
/// Analytic Hessians are trusted this far from any kink of `g`.
const KINK_GUARD: f64 = 1e-8;
const HESSIAN_FD_STEP: f64 = 1e-5;

/// `Γ(x) = G(|x|)`.
pub fn gamma<T: Real>(w: &RadialWeight<T>, x: &[T]) -> T {
    w.big_g(linalg::norm(x))
}

/// `v(y) = g(|y|) y/|y|`, with `v(0) = 0`.
pub fn v_field<T: Real>(w: &RadialWeight<T>, y: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); y.len()];
    add_v(w, y, T::one(), &mut out);
    out
}

fn add_v<T: Real>(w: &RadialWeight<T>, y: &[T], weight: T, out: &mut [T]) {
    let r = linalg::norm(y);
    if r < T::lit(ORIGIN_CUTOFF) {
        return;
    }
    let s = weight * w.g(r) / r;
    for (o, &c) in out.iter_mut().zip(y) {
        *o += s * c;
    }
}

fn sum_norm<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter()
        .zip(y)
        .fold(T::zero(), |s, (&a, &b)| s + (a + b) * (a + b))
        .sqrt()
}

/// `weight · v(x + y)` accumulated into `out`, without allocating.
fn add_v_shifted<T: Real>(w: &RadialWeight<T>, x: &[T], y: &[T], weight: T, out: &mut [T]) {
    let r = sum_norm(x, y);
    if r < T::lit(ORIGIN_CUTOFF) {
        return;
    }
    let s = weight * w.g(r) / r;
    for ((o, &a), &b) in out.iter_mut().zip(x).zip(y) {
        *o += s * (a + b);
    }
}

/// `Γ(to + y) − Γ(from + y)` without allocating.
fn shifted_increment<T: Real>(w: &RadialWeight<T>, to: &[T], from: &[T], y: &[T]) -> T {
    let ra = sum_norm(to, y);
    let rb = sum_norm(from, y);
    let denom = ra + rb;
    if denom == T::zero() {
        return T::zero();
    }
    let num = to
        .iter()
        .zip(from)
        .zip(y)
        .fold(T::zero(), |s, ((&t, &f), &c)| s + (t - f) * (t + f + c + c));
    w.big_g_increment(rb, ra, num / denom)
}

/// `Γ(a) − Γ(b)` evaluated without catastrophic cancellation.
pub fn kernel_increment<T: Real>(w: &RadialWeight<T>, a: &[T], b: &[T]) -> T {
    let ra = linalg::norm(a);
    let rb = linalg::norm(b);
    let denom = ra + rb;
    if denom == T::zero() {
        return T::zero();
    }
    // |a| − |b| = (a − b)·(a + b) / (|a| + |b|)
    let num = a
        .iter()
        .zip(b)
        .fold(T::zero(), |s, (&p, &q)| s + (p - q) * (p + q));
    w.big_g_increment(rb, ra, num / denom)
}

/// `g(∞) x·ŷ`, the limit of `Γ(x + rŷ) − Γ(rŷ)` as `r → ∞`.
pub fn kernel_at_infinity<T: Real>(w: &RadialWeight<T>, x: &[T], y_hat: &[T]) -> Result<T> {
    let limit = w.limit_at_infinity().ok_or_else(|| {
        Error::UnsupportedRenormalization("g has no finite limit at infinity".into())
    })?;
    Ok(limit * linalg::dot(x, y_hat))
}

/// A weight paired with a measure, evaluated either with the plain kernel
/// `Γ(x + y)` or the renormalized kernel `Γ(x + y) − Γ(y)`.
#[derive(Clone, Copy, Debug)]
pub struct EnergyField<'a, T> {
    weight: &'a RadialWeight<T>,
    measure: &'a Measure<T>,
    renormalized: bool,
}

impl<'a, T: Real> EnergyField<'a, T> {
    pub fn new(
        weight: &'a RadialWeight<T>,
        measure: &'a Measure<T>,
        renormalized: bool,
    ) -> Result<Self> {
        if renormalized && !weight.classify().bounded {
            return Err(Error::UnsupportedRenormalization(
                "the renormalized energy needs a bounded weight".into(),
            ));
        }
        Ok(Self {
            weight,
            measure,
            renormalized,
        })
    }

    /// Renormalized whenever the weight is bounded.
    pub fn with_default_mode(weight: &'a RadialWeight<T>, measure: &'a Measure<T>) -> Self {
        Self {
            weight,
            measure,
            renormalized: weight.classify().bounded,
        }
    }

    pub fn weight(&self) -> &'a RadialWeight<T> {
        self.weight
    }

    pub fn measure(&self) -> &'a Measure<T> {
        self.measure
    }

    pub fn is_renormalized(&self) -> bool {
        self.renormalized
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    fn check_dim(&self, x: &[T]) {
        assert_eq!(
            x.len(),
            self.dim(),
            "point dimension does not match the measure"
        );
    }

    /// `E(x)` or `𝓔(x)` depending on the mode.
    pub fn energy(&self, x: &[T]) -> T {
        self.check_dim(x);
        let w = self.weight;
        if self.renormalized {
            let origin = vec![T::zero(); x.len()];
            reduce::sum_scalar(self.measure.atoms(), |a| {
                a.weight * shifted_increment(w, x, &origin, &a.point)
            })
        } else {
            reduce::sum_scalar(self.measure.atoms(), |a| {
                a.weight * w.big_g(sum_norm(x, &a.point))
            })
        }
    }

    /// `E(to) − E(from)`, identical in both modes and accurate even when
    /// the two energies agree to many digits.
    pub fn energy_difference(&self, from: &[T], to: &[T]) -> T {
        self.check_dim(from);
        self.check_dim(to);
        let w = self.weight;
        reduce::sum_scalar(self.measure.atoms(), |a| {
            a.weight * shifted_increment(w, to, from, &a.point)
        })
    }

    /// `V(x) = Σ wᵢ v(x + yᵢ)`, the gradient of either energy.
    pub fn big_v(&self, x: &[T]) -> Vec<T> {
        self.check_dim(x);
        let w = self.weight;
        reduce::sum_vector(self.measure.atoms(), x.len(), |acc, a| {
            add_v_shifted(w, x, &a.point, a.weight, acc);
        })
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        self.big_v(x)
    }

    /// Hessian of the energy. Analytic away from kinks of `g`; central
    /// differences of `V` when some `|x + yᵢ|` sits on a kink or the origin.
    pub fn hessian(&self, x: &[T]) -> SymMatrix<T> {
        self.check_dim(x);
        let guard = T::lit(KINK_GUARD);
        let near_kink = self.measure.atoms().iter().any(|a| {
            let r = linalg::norm(&linalg::add(x, &a.point));
            self.weight.kink_distance(r) <= guard
        });
        if near_kink {
            self.hessian_fd(x)
        } else {
            self.hessian_analytic(x)
        }
    }

    fn hessian_analytic(&self, x: &[T]) -> SymMatrix<T> {
        let n = x.len();
        let w = self.weight;
        reduce::reduce(
            self.measure.atoms(),
            || SymMatrix::zeros(n),
            |h, a| {
                let z = linalg::add(x, &a.point);
                let r = linalg::norm(&z);
                let unit = linalg::scale(&z, T::one() / r);
                let radial = w.slope(r);
                let tangential = w.g(r) / r;
                // g'(r) ẑẑᵀ + g(r)/r (I − ẑẑᵀ)
                h.add_diagonal(a.weight * tangential);
                h.add_outer(a.weight * (radial - tangential), &unit);
            },
            |mut a, b| {
                a.add_scaled(T::one(), &b);
                a
            },
        )
    }

    pub(crate) fn hessian_fd(&self, x: &[T]) -> SymMatrix<T> {
        let n = x.len();
        let h = T::lit(HESSIAN_FD_STEP);
        let mut m = SymMatrix::zeros(n);
        for j in 0..n {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[j] += h;
            minus[j] -= h;
            let vp = self.big_v(&plus);
            let vm = self.big_v(&minus);
            for i in 0..n {
                m.set(i, j, (vp[i] - vm[i]) / (h + h));
            }
        }
        m.symmetrize();
        m
    }

    pub fn lemma_bounds(&self, x: &[T], y: &[T], epsilon: T, radius: T) -> Result<LemmaReport<T>> {
        lemma_bounds(self.weight, x, y, epsilon, radius)
    }
}

/// Outcome of one kernel inequality at one `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundCheck {
    Held,
    Violated,
    Inapplicable(String),
}

impl BoundCheck {
    fn from_bool(ok: bool) -> Self {
        if ok {
            BoundCheck::Held
        } else {
            BoundCheck::Violated
        }
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, BoundCheck::Violated)
    }

    pub fn is_applicable(&self) -> bool {
        !matches!(self, BoundCheck::Inapplicable(_))
    }
}

#[derive(Clone, Debug)]
pub struct LemmaReport<T> {
    /// `Γ(x + y) − Γ(y)`.
    pub kernel: T,
    /// `|Γ(x+y) − Γ(y)| ≤ sup|g|·|x|`.
    pub global: BoundCheck,
    /// `Γ(x+y) − Γ(y) > ½ g(∞)|x|`.
    pub half_limit: BoundCheck,
    /// `(1−2ε) g(∞)|x| < Γ(x+y) − Γ(y) < (1+2ε) g(∞)|x|`.
    pub two_sided: BoundCheck,
    pub half_limit_threshold: Option<T>,
    pub two_sided_threshold: Option<T>,
}

/// Sufficient `|x|` past which `Γ(x+y) − Γ(y) > ½ g(∞)|x|` for all
/// `y ∈ B(radius)`. `None` unless `0 < g(∞) < ∞`.
pub fn half_limit_threshold<T: Real>(w: &RadialWeight<T>, radius: T) -> Option<T> {
    let limit = w.limit_at_infinity().filter(|&l| l > T::zero())?;
    let sup = w.sup_abs_g()?;
    // g ≥ (2/3) g(∞) on (R*, ∞)
    let entry = w.band_entry_radius(T::lit(2.0 / 3.0) * limit, T::infinity())?;
    let r_star = entry.max(radius);
    // (2/3)g∞(|x| − R − R*) − sup·R* > ½ g∞|x|
    let needed = T::lit(4.0) * (radius + r_star) + T::lit(6.0) * sup * r_star / limit;
    Some(needed.max(radius + r_star))
}

/// Sufficient `|x|` for the two-sided band at `ε ∈ (0, ½)`.
pub fn two_sided_threshold<T: Real>(w: &RadialWeight<T>, epsilon: T, radius: T) -> Option<T> {
    let limit = w.limit_at_infinity().filter(|&l| l > T::zero())?;
    let sup = w.sup_abs_g()?;
    let one = T::one();
    let entry = w.band_entry_radius((one - epsilon) * limit, (one + epsilon) * limit)?;
    let r_star = entry.max(radius);
    let lower = ((one - epsilon) * limit * (radius + r_star) + sup * r_star) / (epsilon * limit);
    let upper = ((one + epsilon) * limit * (radius - r_star) + sup * r_star) / (epsilon * limit);
    Some(lower.max(upper).max(radius + r_star))
}

/// Evaluate the renormalized kernel at `(x, y)` and check each bound whose
/// hypotheses hold there. Errors only when `g` is unbounded.
pub fn lemma_bounds<T: Real>(
    w: &RadialWeight<T>,
    x: &[T],
    y: &[T],
    epsilon: T,
    radius: T,
) -> Result<LemmaReport<T>> {
    let sup = w
        .sup_abs_g()
        .ok_or_else(|| Error::InapplicableBound("g is unbounded".into()))?;
    let kernel = kernel_increment(w, &linalg::add(x, y), y);
    let x_norm = linalg::norm(x);
    let y_norm = linalg::norm(y);
    let slack = |a: T, b: T| T::lit(16.0) * T::epsilon() * (a.abs() + b.abs());

    let bound = sup * x_norm;
    let global = BoundCheck::from_bool(kernel.abs() <= bound + slack(kernel, bound));

    let limit = w.limit_at_infinity().filter(|&l| l > T::zero());
    let half = T::lit(0.5);
    let in_ball = radius > T::zero() && y_norm <= radius;

    let half_limit_threshold = half_limit_threshold(w, radius);
    let half_limit = match (limit, half_limit_threshold) {
        (None, _) | (_, None) => BoundCheck::Inapplicable("needs 0 < g(∞) < ∞".into()),
        _ if !in_ball => BoundCheck::Inapplicable("y outside B(R)".into()),
        (Some(_), Some(t)) if x_norm <= t => {
            BoundCheck::Inapplicable(format!("|x| = {x_norm} within threshold {t}"))
        }
        (Some(l), Some(_)) => BoundCheck::from_bool(kernel > half * l * x_norm),
    };

    let eps_ok = epsilon > T::zero() && epsilon < half;
    let two_sided_threshold = if eps_ok {
        two_sided_threshold(w, epsilon, radius)
    } else {
        None
    };
    let two_sided = match (limit, two_sided_threshold) {
        _ if !eps_ok => BoundCheck::Inapplicable("needs 0 < ε < 1/2".into()),
        (None, _) | (_, None) => BoundCheck::Inapplicable("needs 0 < g(∞) < ∞".into()),
        _ if !in_ball => BoundCheck::Inapplicable("y outside B(R)".into()),
        (Some(_), Some(t)) if x_norm <= t => {
            BoundCheck::Inapplicable(format!("|x| = {x_norm} within threshold {t}"))
        }
        (Some(l), Some(_)) => {
            let two = T::lit(2.0);
            let lo = (T::one() - two * epsilon) * l * x_norm;
            let hi = (T::one() + two * epsilon) * l * x_norm;
            BoundCheck::from_bool(lo < kernel && kernel < hi)
        }
    };

    Ok(LemmaReport {
        kernel,
        global,
        half_limit,
        two_sided,
        half_limit_threshold,
        two_sided_threshold,
    })
}
