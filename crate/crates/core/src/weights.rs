//! Radial weight profiles `g` and their antiderivatives `G`.
//!
//! Every supported kind is piecewise linear, so each weight is stored as a
//! canonical list of knots `(rₖ, gₖ)` starting at `(0, 0)` plus a linear tail
//! beyond the last knot. `G` is then an exact piecewise quadratic.

use crate::{Error, Real, Result};

/// What happens beyond the last knot of a piecewise profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Tail {
    /// `g` keeps its last value.
    #[default]
    Constant,
    /// `g` continues along the slope of its last segment.
    Linear,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind<T> {
    /// `g(r) = r`, the classical center of mass.
    Linear,
    /// `g(r) = min(r, R)`.
    Clamped {
        threshold: T,
    },
    PiecewiseLinear {
        knots: Vec<(T, T)>,
        tail: Tail,
    },
    /// Samples joined by linear interpolation, constant past the last sample.
    Tabulated {
        samples: Vec<(T, T)>,
    },
}

/// Properties of `g` that existence and uniqueness depend on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightClass {
    /// `∫₀^∞ g(r) dr = +∞`.
    pub integral_diverges: bool,
    pub strictly_increasing: bool,
    /// `g` nondecreasing and `g(r) > 0` for every `r > 0`.
    pub increasing_positive: bool,
    pub bounded: bool,
    /// `0 < g(∞) < ∞`.
    pub positive_finite_limit: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialWeight<T> {
    kind: WeightKind<T>,
    knots: Vec<(T, T)>,
    /// `G(rₖ)` at each knot.
    cumulative: Vec<T>,
    tail_slope: T,
    /// Radii where `g` is not differentiable, the origin included.
    kinks: Vec<T>,
}

impl<T: Real> RadialWeight<T> {
    pub fn linear() -> Self {
        Self::build(
            WeightKind::Linear,
            vec![(T::zero(), T::zero()), (T::one(), T::one())],
            T::one(),
        )
    }

    pub fn clamped(threshold: T) -> Result<Self> {
        if !(threshold > T::zero() && threshold.is_finite()) {
            return Err(Error::InvalidWeight(format!(
                "clamp threshold must be positive and finite, got {threshold}"
            )));
        }
        Ok(Self::build(
            WeightKind::Clamped { threshold },
            vec![(T::zero(), T::zero()), (threshold, threshold)],
            T::zero(),
        ))
    }

    /// Knots must have strictly increasing finite radii. A missing `(0, 0)`
    /// knot is prepended; a knot at `r = 0` must have value `0`.
    pub fn piecewise(knots: Vec<(T, T)>, tail: Tail) -> Result<Self> {
        let canonical = canonical_knots(&knots)?;
        let slope = match tail {
            Tail::Constant => T::zero(),
            Tail::Linear => {
                let n = canonical.len();
                if n < 2 {
                    T::zero()
                } else {
                    let (r0, g0) = canonical[n - 2];
                    let (r1, g1) = canonical[n - 1];
                    (g1 - g0) / (r1 - r0)
                }
            }
        };
        Ok(Self::build(
            WeightKind::PiecewiseLinear { knots, tail },
            canonical,
            slope,
        ))
    }

    pub fn tabulated(samples: Vec<(T, T)>) -> Result<Self> {
        let canonical = canonical_knots(&samples)?;
        Ok(Self::build(
            WeightKind::Tabulated { samples },
            canonical,
            T::zero(),
        ))
    }

    fn build(kind: WeightKind<T>, knots: Vec<(T, T)>, tail_slope: T) -> Self {
        let mut cumulative = Vec::with_capacity(knots.len());
        cumulative.push(T::zero());
        for w in knots.windows(2) {
            let (r0, g0) = w[0];
            let (r1, g1) = w[1];
            let prev = *cumulative.last().unwrap();
            cumulative.push(prev + (r1 - r0) * (g0 + g1) * T::lit(0.5));
        }
        let slopes: Vec<T> = knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .chain(std::iter::once(tail_slope))
            .collect();
        let mut kinks = vec![T::zero()];
        for k in 1..knots.len() {
            if slopes[k] != slopes[k - 1] {
                kinks.push(knots[k].0);
            }
        }
        Self {
            kind,
            knots,
            cumulative,
            tail_slope,
            kinks,
        }
    }

    pub fn kind(&self) -> &WeightKind<T> {
        &self.kind
    }

    /// Canonical knots, first one is `(0, 0)`.
    pub fn knots(&self) -> &[(T, T)] {
        &self.knots
    }

    pub fn tail_slope(&self) -> T {
        self.tail_slope
    }

    /// Index of the segment containing `r`: `k` means `[rₖ, rₖ₊₁)`, the last
    /// index is the tail.
    fn segment(&self, r: T) -> usize {
        self.knots.partition_point(|&(rk, _)| rk <= r).max(1) - 1
    }

    fn g_in(&self, seg: usize, r: T) -> T {
        let (r0, g0) = self.knots[seg];
        if seg + 1 == self.knots.len() {
            g0 + self.tail_slope * (r - r0)
        } else {
            let (r1, g1) = self.knots[seg + 1];
            g0 + (g1 - g0) * ((r - r0) / (r1 - r0))
        }
    }

    fn big_g_in(&self, seg: usize, r: T) -> T {
        let (r0, g0) = self.knots[seg];
        self.cumulative[seg] + (r - r0) * (g0 + self.g_in(seg, r)) * T::lit(0.5)
    }

    fn check_radius(r: T) -> Result<()> {
        if r >= T::zero() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "radius must be nonnegative, got {r}"
            )))
        }
    }

    /// `g(r)`.
    pub fn eval_g(&self, r: T) -> Result<T> {
        Self::check_radius(r)?;
        Ok(self.g(r))
    }

    /// `G(r) = ∫₀^r g`.
    pub fn eval_big_g(&self, r: T) -> Result<T> {
        Self::check_radius(r)?;
        Ok(self.big_g(r))
    }

    /// Unchecked `g(r)` for `r ≥ 0`.
    pub(crate) fn g(&self, r: T) -> T {
        self.g_in(self.segment(r), r)
    }

    pub(crate) fn big_g(&self, r: T) -> T {
        self.big_g_in(self.segment(r), r)
    }

    /// Right derivative `g'(r⁺)`.
    pub(crate) fn slope(&self, r: T) -> T {
        let seg = self.segment(r);
        if seg + 1 == self.knots.len() {
            self.tail_slope
        } else {
            let (r0, g0) = self.knots[seg];
            let (r1, g1) = self.knots[seg + 1];
            (g1 - g0) / (r1 - r0)
        }
    }

    /// `G(to) − G(from)` where the caller supplies `to − from` computed
    /// without cancellation. Inside one linear piece the increment is the
    /// exact trapezoid, which stays accurate when both radii are huge.
    pub(crate) fn big_g_increment(&self, from: T, to: T, delta: T) -> T {
        let a = self.segment(from);
        let b = self.segment(to);
        if a == b {
            delta * (self.g_in(a, from) + self.g_in(b, to)) * T::lit(0.5)
        } else {
            self.big_g_in(b, to) - self.big_g_in(a, from)
        }
    }

    /// Distance from `r` to the nearest kink of `g` or to the origin.
    pub(crate) fn kink_distance(&self, r: T) -> T {
        self.kinks
            .iter()
            .map(|&rk| (r - rk).abs())
            .fold(T::infinity(), T::min)
    }

    /// `sup_{r≥0} |g(r)|`, `None` when unbounded.
    pub fn sup_abs_g(&self) -> Option<T> {
        if self.tail_slope != T::zero() {
            return None;
        }
        Some(
            self.knots
                .iter()
                .fold(T::zero(), |m, &(_, gk)| m.max(gk.abs())),
        )
    }

    /// `g(∞)` when the limit exists and is finite.
    pub fn limit_at_infinity(&self) -> Option<T> {
        if self.tail_slope == T::zero() {
            Some(self.knots.last().unwrap().1)
        } else {
            None
        }
    }

    pub fn classify(&self) -> WeightClass {
        let last = self.knots.last().unwrap().1;
        let zero = T::zero();
        let slope = self.tail_slope;
        let strictly = self.knots.windows(2).all(|w| w[1].1 > w[0].1) && slope > zero;
        let nondecreasing = self.knots.windows(2).all(|w| w[1].1 >= w[0].1) && slope >= zero;
        let positive_after_origin = match self.knots.get(1) {
            Some(&(_, g1)) => g1 > zero,
            None => slope > zero,
        };
        WeightClass {
            integral_diverges: slope > zero || (slope == zero && last > zero),
            strictly_increasing: strictly,
            increasing_positive: nondecreasing && positive_after_origin,
            bounded: slope == zero,
            positive_finite_limit: slope == zero && last > zero,
        }
    }

    /// Smallest `r*` with `lo ≤ g(r) ≤ hi` for every `r ≥ r*`, if any.
    pub fn band_entry_radius(&self, lo: T, hi: T) -> Option<T> {
        let inside = |v: T| v >= lo && v <= hi;
        let n = self.knots.len();
        let (r_last, g_last) = self.knots[n - 1];
        if self.tail_slope != T::zero() || !inside(g_last) {
            return None;
        }
        let mut entry = r_last;
        for k in (0..n - 1).rev() {
            let (r0, g0) = self.knots[k];
            let (r1, g1) = self.knots[k + 1];
            if inside(g0) {
                entry = r0;
                continue;
            }
            // g0 is outside, g1 inside: find where the segment enters the band
            let target = if g0 < lo { lo } else { hi };
            let t = (target - g0) / (g1 - g0);
            entry = r0 + t * (r1 - r0);
            break;
        }
        Some(entry)
    }
}

fn canonical_knots<T: Real>(knots: &[(T, T)]) -> Result<Vec<(T, T)>> {
    if knots.is_empty() {
        return Err(Error::InvalidWeight("no knots given".into()));
    }
    for &(r, g) in knots {
        if !r.is_finite() || !g.is_finite() {
            return Err(Error::InvalidWeight("knots must be finite".into()));
        }
        if r < T::zero() {
            return Err(Error::InvalidWeight(format!("negative knot radius {r}")));
        }
    }
    if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidWeight(
            "knot radii must be strictly increasing".into(),
        ));
    }
    let mut out = Vec::with_capacity(knots.len() + 1);
    if knots[0].0 == T::zero() {
        if knots[0].1 != T::zero() {
            return Err(Error::InvalidWeight(format!(
                "g(0) must be 0, got {}",
                knots[0].1
            )));
        }
    } else {
        out.push((T::zero(), T::zero()));
    }
    out.extend_from_slice(knots);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn signed_example() -> RadialWeight<f64> {
        RadialWeight::piecewise(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)], Tail::Constant).unwrap()
    }

    #[test]
    fn eval_g_examples() {
        let c = RadialWeight::clamped(1.0).unwrap();
        assert_eq!(c.eval_g(0.5).unwrap(), 0.5);
        assert_eq!(RadialWeight::<f64>::linear().eval_g(0.0).unwrap(), 0.0);
        assert_eq!(signed_example().eval_g(1.5).unwrap(), 2.0);
        assert_eq!(signed_example().eval_g(7.0).unwrap(), 3.0);
        assert_eq!(RadialWeight::<f64>::linear().eval_g(7.5).unwrap(), 7.5);
    }

    #[test]
    fn negative_radius_is_a_domain_error() {
        let w = RadialWeight::<f64>::linear();
        assert!(matches!(w.eval_g(-1.0), Err(Error::Domain(_))));
        assert!(matches!(w.eval_big_g(-1e-300), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_big_g_examples() {
        assert_eq!(RadialWeight::<f64>::linear().eval_big_g(2.0).unwrap(), 2.0);
        assert_eq!(
            RadialWeight::clamped(1.0).unwrap().eval_big_g(3.0).unwrap(),
            2.5
        );
        // signed example: ∫₀² g = 1/2 + 2, then slope 3
        assert_eq!(signed_example().eval_big_g(2.0).unwrap(), 2.5);
        assert_eq!(signed_example().eval_big_g(4.0).unwrap(), 8.5);
    }

    #[test]
    fn tabulated_clamp_matches_closed_form() {
        // oracle: closed-form antiderivative of min(r, 1)
        let oracle = |r: f64| if r <= 1.0 { 0.5 * r * r } else { r - 0.5 };
        let samples: Vec<(f64, f64)> = (0..=5000)
            .map(|i| {
                let r = i as f64 * 1e-3;
                (r, r.min(1.0))
            })
            .collect();
        let w = RadialWeight::tabulated(samples).unwrap();
        assert!((w.eval_big_g(3.0).unwrap() - 2.5).abs() <= 1e-6);
        for r in [0.2345, 0.999, 1.0, 1.5, 4.2, 10.0] {
            assert!(
                (w.eval_big_g(r).unwrap() - oracle(r)).abs() <= 1e-6,
                "r = {r}"
            );
        }
    }

    #[test]
    fn classify_examples() {
        let lin = RadialWeight::<f64>::linear().classify();
        assert!(lin.integral_diverges && lin.strictly_increasing && !lin.bounded);
        assert!(!lin.positive_finite_limit);

        let c = RadialWeight::clamped(1.0).unwrap().classify();
        assert!(c.integral_diverges && !c.strictly_increasing && c.increasing_positive);
        assert!(c.bounded && c.positive_finite_limit);
        assert_eq!(
            RadialWeight::clamped(1.0).unwrap().limit_at_infinity(),
            Some(1.0)
        );

        let s = signed_example();
        assert!(s.classify().positive_finite_limit);
        assert_eq!(s.limit_at_infinity(), Some(3.0));
        assert_eq!(s.sup_abs_g(), Some(3.0));
    }

    #[test]
    fn classify_non_monotone_and_decaying() {
        let bump = RadialWeight::piecewise(vec![(1.0, 1.0), (2.0, 0.0)], Tail::Constant).unwrap();
        let c = bump.classify();
        assert!(!c.integral_diverges && !c.increasing_positive && c.bounded);
        assert!(!c.positive_finite_limit);

        let negative_tail =
            RadialWeight::piecewise(vec![(1.0, 1.0), (2.0, -1.0)], Tail::Constant).unwrap();
        assert!(!negative_tail.classify().integral_diverges);

        let ramp = RadialWeight::piecewise(vec![(1.0, 1.0), (2.0, 3.0)], Tail::Linear).unwrap();
        let c = ramp.classify();
        assert!(c.strictly_increasing && c.increasing_positive && c.integral_diverges);
        assert!(!c.bounded && ramp.sup_abs_g().is_none());
        assert_eq!(ramp.eval_g(3.0).unwrap(), 5.0);
    }

    #[test]
    fn tabulated_ties_are_not_strict() {
        let w =
            RadialWeight::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 2.0)]).unwrap();
        let c = w.classify();
        assert!(c.increasing_positive && !c.strictly_increasing);
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(RadialWeight::piecewise(vec![(0.0, 1.0)], Tail::Constant).is_err());
        assert!(RadialWeight::piecewise(vec![(1.0, 1.0), (1.0, 2.0)], Tail::Constant).is_err());
        assert!(RadialWeight::tabulated(vec![(f64::INFINITY, 1.0)]).is_err());
        assert!(RadialWeight::<f64>::tabulated(vec![]).is_err());
        assert!(RadialWeight::clamped(0.0).is_err());
    }

    #[test]
    fn band_entry_radius_on_ramp() {
        // g rises as 2r − 1 on [1, 2]; it stays above 2.7 from r = 1.85
        let r = signed_example().band_entry_radius(2.7, 3.3).unwrap();
        assert_relative_eq!(r, 1.85, epsilon = 1e-12);
        let c = RadialWeight::clamped(1.0).unwrap();
        assert_relative_eq!(c.band_entry_radius(2.0 / 3.0, 10.0).unwrap(), 2.0 / 3.0);
        assert!(RadialWeight::<f64>::linear()
            .band_entry_radius(0.0, 1.0)
            .is_none());
    }

    #[test]
    fn increment_is_stable_far_out() {
        let c = RadialWeight::clamped(1.0).unwrap();
        let from = 1.0e12;
        let delta = 1.5e-6;
        assert_eq!(c.big_g_increment(from, from + delta, delta), delta);
        assert_relative_eq!(c.big_g_increment(0.5, 2.0, 1.5), 1.5 - 0.125);
    }

    #[test]
    fn f32_weights_work() {
        let c = RadialWeight::<f32>::clamped(1.0).unwrap();
        assert_eq!(c.eval_big_g(3.0).unwrap(), 2.5f32);
    }
}
