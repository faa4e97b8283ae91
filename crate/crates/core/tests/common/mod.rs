//! Independent reference implementations used by the integration tests.
//! The reference numerics never call into the library; the converters at
//! the bottom only build library inputs.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Piecewise-linear profile through `knots` (first knot at the origin),
/// continued with `tail_slope` past the last knot.
#[derive(Clone, Debug)]
pub struct Profile {
    pub knots: Vec<(f64, f64)>,
    pub tail_slope: f64,
}

impl Profile {
    pub fn linear() -> Self {
        Self {
            knots: vec![(0.0, 0.0), (1.0, 1.0)],
            tail_slope: 1.0,
        }
    }

    pub fn clamped(r: f64) -> Self {
        Self {
            knots: vec![(0.0, 0.0), (r, r)],
            tail_slope: 0.0,
        }
    }

    pub fn g(&self, r: f64) -> f64 {
        for w in self.knots.windows(2) {
            let ((r0, g0), (r1, g1)) = (w[0], w[1]);
            if r <= r1 {
                return g0 + (g1 - g0) * (r - r0) / (r1 - r0);
            }
        }
        let (rl, gl) = *self.knots.last().unwrap();
        gl + self.tail_slope * (r - rl)
    }

    /// `∫₀ʳ g` by the trapezoid rule on each linear piece.
    pub fn big_g(&self, r: f64) -> f64 {
        let mut total = 0.0;
        for w in self.knots.windows(2) {
            let ((r0, _), (r1, _)) = (w[0], w[1]);
            let hi = r.min(r1);
            if hi <= r0 {
                return total;
            }
            total += 0.5 * (self.g(r0) + self.g(hi)) * (hi - r0);
        }
        let (rl, gl) = *self.knots.last().unwrap();
        if r > rl {
            total += 0.5 * (gl + self.g(r)) * (r - rl);
        }
        total
    }

    pub fn sup(&self) -> f64 {
        self.knots.iter().map(|k| k.1.abs()).fold(0.0, f64::max)
    }

    /// Radii where the slope changes.
    pub fn kinks(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        let mut slopes: Vec<f64> = self
            .knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        slopes.push(self.tail_slope);
        for (i, s) in slopes.windows(2).enumerate() {
            if s[0] != s[1] {
                out.push(self.knots[i + 1].0);
            }
        }
        out
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// `v(z) = g(|z|) z/|z|`.
pub fn v(p: &Profile, z: &[f64]) -> Vec<f64> {
    let r = norm(z);
    if r == 0.0 {
        return vec![0.0; z.len()];
    }
    let s = p.g(r) / r;
    z.iter().map(|c| c * s).collect()
}

/// `Σ wᵢ v(x + yᵢ)`.
pub fn big_v(p: &Profile, atoms: &[(Vec<f64>, f64)], x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for (y, w) in atoms {
        let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        for (o, c) in out.iter_mut().zip(v(p, &z)) {
            *o += w * c;
        }
    }
    out
}

/// `−Σ wᵢ yᵢ / Σ wᵢ`.
pub fn negated_centroid(atoms: &[(Vec<f64>, f64)]) -> Vec<f64> {
    let dim = atoms[0].0.len();
    let mass: f64 = atoms.iter().map(|a| a.1).sum();
    (0..dim)
        .map(|d| -atoms.iter().map(|(y, w)| w * y[d]).sum::<f64>() / mass)
        .collect()
}

pub fn random_atoms(
    rng: &mut ChaCha8Rng,
    dim: usize,
    count: usize,
    spread: f64,
    positive: bool,
) -> Vec<(Vec<f64>, f64)> {
    (0..count)
        .map(|_| {
            let y = (0..dim).map(|_| rng.gen_range(-spread..spread)).collect();
            let w = if positive {
                rng.gen_range(0.1..2.0)
            } else {
                rng.gen_range(-1.0..2.0)
            };
            (y, w)
        })
        .collect()
}

pub fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&u);
        if n > 1e-2 && n <= 1.0 {
            return u.iter().map(|c| c / n).collect();
        }
    }
}

/// Rotation by `angle` in the `(0, 1)` coordinate plane.
pub fn rotate(x: &[f64], angle: f64) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    let mut out = x.to_vec();
    out[0] = c * x[0] - s * x[1];
    out[1] = s * x[0] + c * x[1];
    out
}

/// Profile that is strictly increasing with a linear tail.
pub fn random_increasing(rng: &mut ChaCha8Rng) -> Profile {
    let mut knots = vec![(0.0, 0.0)];
    let (mut r, mut g) = (0.0, 0.0);
    for _ in 0..rng.gen_range(1..4) {
        r += rng.gen_range(0.3..1.5);
        g += rng.gen_range(0.2..2.0);
        knots.push((r, g));
    }
    Profile {
        knots,
        tail_slope: rng.gen_range(0.1..1.0),
    }
}

/// Profile with arbitrary signs and a constant tail.
pub fn random_bounded(rng: &mut ChaCha8Rng) -> Profile {
    let mut knots = vec![(0.0, 0.0)];
    let mut r = 0.0;
    for _ in 0..rng.gen_range(1..4) {
        r += rng.gen_range(0.3..1.5);
        knots.push((r, rng.gen_range(-1.0..3.0)));
    }
    Profile {
        knots,
        tail_slope: 0.0,
    }
}

/// Library weight with the same profile.
pub fn to_weight(p: &Profile) -> gcenter::RadialWeightF64 {
    use gcenter::{RadialWeight, Tail};
    if p.tail_slope == 0.0 {
        return RadialWeight::piecewise(p.knots.clone(), Tail::Constant).unwrap();
    }
    let (rl, gl) = *p.knots.last().unwrap();
    let mut knots = p.knots.clone();
    knots.push((rl + 1.0, gl + p.tail_slope));
    RadialWeight::piecewise(knots, Tail::Linear).unwrap()
}

pub fn to_measure(dim: usize, atoms: &[(Vec<f64>, f64)]) -> gcenter::MeasureF64 {
    let atoms = atoms
        .iter()
        .map(|(y, w)| gcenter::Atom::new(y.clone(), *w))
        .collect();
    gcenter::Measure::from_atoms(dim, atoms).unwrap()
}
