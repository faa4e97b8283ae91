//! Reproducible fixtures for the counterexamples and the continuous
//! dependence experiments.
//!
//! Every fixture is self-contained and seeded; reruns are bit-identical.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::EnergyField;
use crate::linalg;
use crate::solver::{self, certify, SolveConfig};
use crate::weights::Tail;
use crate::{Atom, DensityGrid, Error, Measure, RadialWeight, Real, Result};

/// Tolerance for "V vanishes" on the flat-region fixtures.
pub const FLAT_TOL: f64 = 1e-14;
pub const FLAT_GRID_POINTS: usize = 101;
/// Continuity-failure fixture checks `x_c(μₖ) = −√k` to this accuracy.
pub const CLOSED_FORM_TOL: f64 = 1e-8;
/// Final weak-convergence distance must be at most this times `1 + R`.
pub const WEAK_CONVERGENCE_TOL: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub weight: RadialWeight<f64>,
    pub measures: Vec<Measure<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub k: f64,
    pub value: f64,
    pub reference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub details: String,
    pub table: Option<Vec<TableRow>>,
}

/// `g(r) = min(r, 1)`.
pub fn clamp_weight() -> RadialWeight<f64> {
    RadialWeight::clamped(1.0).expect("valid threshold")
}

/// `r` on `[0, 1]`, `2r − 1` on `[1, 2]`, `3` beyond.
pub fn signed_example_weight() -> RadialWeight<f64> {
    RadialWeight::piecewise(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)], Tail::Constant)
        .expect("valid knots")
}

/// `δ₋₂ + δ₂` on the line.
pub fn nonuniqueness_fixture() -> Fixture {
    Fixture {
        name: "nonuniqueness-interval",
        weight: clamp_weight(),
        measures: vec![Measure::from_pairs(1, &[(&[-2.0], 1.0), (&[2.0], 1.0)]).unwrap()],
    }
}

/// `−δ₋₁ + 3δ₀ − δ₁` with the piecewise weight above.
pub fn signed_fixture() -> Fixture {
    Fixture {
        name: "signed-nonuniqueness",
        weight: signed_example_weight(),
        measures: vec![
            Measure::from_pairs(1, &[(&[-1.0], -1.0), (&[0.0], 3.0), (&[1.0], -1.0)]).unwrap(),
        ],
    }
}

pub const CONTINUITY_KS: [u32; 5] = [4, 16, 64, 256, 1024];

/// `μₖ = (1 − 1/√k) δ₀ + (1/√k) δₖ`.
pub fn escaping_measure(k: u32) -> Measure<f64> {
    let s = 1.0 / (k as f64).sqrt();
    Measure::from_pairs(1, &[(&[0.0], 1.0 - s), (&[k as f64], s)]).unwrap()
}

pub fn continuity_failure_fixture() -> Fixture {
    Fixture {
        name: "continuity-failure",
        weight: RadialWeight::linear(),
        measures: CONTINUITY_KS.iter().map(|&k| escaping_measure(k)).collect(),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// `V` on 101 points of `[−0.5, 0.5]` for `δ₋₂ + δ₂` under `weight`.
pub fn run_flat_interval(weight: &RadialWeight<f64>) -> Verdict {
    let fixture = nonuniqueness_fixture();
    let m = &fixture.measures[0];
    let ef = EnergyField::with_default_mode(weight, m);
    let worst = linspace(-0.5, 0.5, FLAT_GRID_POINTS)
        .map(|x| ef.big_v(&[x])[0].abs())
        .fold(0.0, f64::max);
    let pass = worst <= FLAT_TOL;
    Verdict {
        name: fixture.name.into(),
        pass,
        details: if pass {
            format!("max |V| = {worst:e} over {FLAT_GRID_POINTS} points of [-0.5, 0.5]")
        } else {
            format!("flat region absent: max |V| = {worst:e}")
        },
        table: None,
    }
}

pub fn run_nonuniqueness_interval() -> Verdict {
    let fixture = nonuniqueness_fixture();
    let mut verdict = run_flat_interval(&fixture.weight);
    let report = solver::solve(
        &fixture.weight,
        &fixture.measures[0],
        &SolveConfig::default(),
    );
    match report {
        Ok(r) => {
            verdict.pass &= !r.uniqueness_certified;
            verdict.details += &format!(
                "; solver x_c = {:?}, uniqueness_certified = {}",
                r.x_c, r.uniqueness_certified
            );
        }
        Err(e) => {
            verdict.pass = false;
            verdict.details += &format!("; solver failed: {e}");
        }
    }
    verdict
}

pub fn run_continuity_failure() -> Verdict {
    let fixture = continuity_failure_fixture();
    let cfg = SolveConfig::default();
    let mut pass = true;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut previous = 0.0;
    for (&k, m) in CONTINUITY_KS.iter().zip(&fixture.measures) {
        let expected = -(k as f64).sqrt();
        let closed_form = -m.centroid()[0];
        if closed_form != expected {
            pass = false;
            notes.push(format!("k = {k}: closed form {closed_form} ≠ {expected}"));
        }
        match solver::solve(&fixture.weight, m, &cfg) {
            Ok(r) => {
                let x = r.x_c[0];
                if (x - expected).abs() > CLOSED_FORM_TOL {
                    pass = false;
                    notes.push(format!("k = {k}: solver gave {x}"));
                }
                if !(x.abs() > previous) {
                    pass = false;
                    notes.push(format!("k = {k}: |x_c| did not grow"));
                }
                previous = x.abs();
                rows.push(TableRow {
                    k: k as f64,
                    value: x,
                    reference: Some(expected),
                });
            }
            Err(e) => {
                pass = false;
                notes.push(format!("k = {k}: {e}"));
            }
        }
    }
    let limit = Measure::from_pairs(1, &[(&[0.0], 1.0)]).unwrap();
    match solver::solve(&fixture.weight, &limit, &cfg) {
        Ok(r) if r.x_c[0] == 0.0 => {}
        Ok(r) => {
            pass = false;
            notes.push(format!("weak limit gave {:?}", r.x_c));
        }
        Err(e) => {
            pass = false;
            notes.push(format!("weak limit: {e}"));
        }
    }
    Verdict {
        name: fixture.name.into(),
        pass,
        details: if notes.is_empty() {
            "x_c(μ_k) = -sqrt(k) escapes while the weak limit δ_0 has x_c = 0".into()
        } else {
            notes.join("; ")
        },
        table: Some(rows),
    }
}

pub fn run_signed_nonuniqueness() -> Verdict {
    let fixture = signed_fixture();
    let m = &fixture.measures[0];
    let ef = EnergyField::with_default_mode(&fixture.weight, m);
    let exact = ef.big_v(&[0.0])[0] == 0.0 && ef.big_v(&[1.0])[0] == 0.0;
    let worst = (0..=200)
        .map(|i| -1.0 + 0.01 * i as f64)
        .map(|x| ef.big_v(&[x])[0].abs())
        .fold(0.0, f64::max);
    let pass = exact && worst <= FLAT_TOL;
    Verdict {
        name: fixture.name.into(),
        pass,
        details: format!(
            "V(0) = V(1) = 0 exactly: {exact}; max |V| on [-1, 1] step 0.01 = {worst:e}"
        ),
        table: None,
    }
}

type DensityFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// The measure a weak-convergence experiment perturbs.
#[derive(Clone)]
pub enum BaseMeasure<T> {
    Atoms(Measure<T>),
    /// A density on a grid; `reference_level` is the refinement level whose
    /// discretization stands in for the continuum limit.
    Density {
        grid: DensityGrid<T>,
        density: DensityFn<T>,
        reference_level: u32,
    },
}

impl<T: Real> BaseMeasure<T> {
    pub fn density(
        grid: DensityGrid<T>,
        f: impl Fn(&[T]) -> T + Send + Sync + 'static,
        reference_level: u32,
    ) -> Self {
        BaseMeasure::Density {
            grid,
            density: Arc::new(f),
            reference_level,
        }
    }

    /// The unperturbed measure.
    pub fn limit(&self) -> Result<Measure<T>> {
        match self {
            BaseMeasure::Atoms(m) => Ok(m.clone()),
            BaseMeasure::Density {
                grid,
                density,
                reference_level,
            } => Measure::from_density_fn(&grid.refined(1 << reference_level), |y| density(y)),
        }
    }

    fn coarse(&self) -> Result<Measure<T>> {
        match self {
            BaseMeasure::Atoms(m) => Ok(m.clone()),
            BaseMeasure::Density { grid, density, .. } => {
                Measure::from_density_fn(grid, |y| density(y))
            }
        }
    }
}

/// How `μₖ` approaches `μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scheme {
    /// `μₖ = μ`.
    Constant,
    /// Move each atom by `dᵢ/k` with fixed random `dᵢ ∈ [−1, 1]ⁿ`.
    Jitter { seed: u64 },
    /// Multiply each weight by `1 + uᵢ/k` with fixed random `uᵢ ∈ [−½, ½]`.
    Reweight { seed: u64 },
    /// Discretize the density on a grid refined `2ᵏ` times per axis.
    Refine,
    /// `(1 − 1/√k) μ + (1/√k) δ` at distance `k(1 + R)` along the first axis.
    FarAtom,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Constant => "constant",
            Scheme::Jitter { .. } => "jitter",
            Scheme::Reweight { .. } => "reweight",
            Scheme::Refine => "refine",
            Scheme::FarAtom => "far-atom",
        }
    }

    /// Perturbation indices used when the caller does not pick any.
    pub fn default_ks(&self) -> Vec<u64> {
        match self {
            Scheme::Constant | Scheme::Refine => (1..=6).collect(),
            Scheme::Jitter { .. } | Scheme::Reweight { .. } => {
                (1..=6).map(|j| 10u64.pow(j)).collect()
            }
            Scheme::FarAtom => (1..=13).map(|j| 4u64.pow(j)).collect(),
        }
    }
}

fn perturbed<T: Real>(base: &BaseMeasure<T>, scheme: Scheme, k: u64) -> Result<Measure<T>> {
    let kf = T::from_u64(k).unwrap();
    match scheme {
        Scheme::Constant => base.coarse(),
        Scheme::Jitter { seed } => {
            let m = base.coarse()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let atoms = m
                .atoms()
                .iter()
                .map(|a| {
                    let point = a
                        .point
                        .iter()
                        .map(|&c| c + T::lit(rng.gen_range(-1.0..=1.0)) / kf)
                        .collect();
                    Atom::new(point, a.weight)
                })
                .collect();
            Measure::from_atoms(m.dim(), atoms)
        }
        Scheme::Reweight { seed } => {
            let m = base.coarse()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let atoms = m
                .atoms()
                .iter()
                .map(|a| {
                    let u = T::lit(rng.gen_range(-0.5..=0.5));
                    Atom::new(a.point.clone(), a.weight * (T::one() + u / kf))
                })
                .collect();
            Measure::from_atoms(m.dim(), atoms)
        }
        Scheme::Refine => match base {
            BaseMeasure::Density { grid, density, .. } => {
                let factor = 1usize
                    .checked_shl(k as u32)
                    .filter(|_| k < 16)
                    .ok_or_else(|| {
                        Error::InapplicableExperiment("refinement level too deep".into())
                    })?;
                Measure::from_density_fn(&grid.refined(factor), |y| density(y))
            }
            BaseMeasure::Atoms(_) => Err(Error::InapplicableExperiment(
                "refinement needs a density".into(),
            )),
        },
        Scheme::FarAtom => {
            let m = base.coarse()?;
            let s = T::one() / kf.sqrt();
            let mut far = vec![T::zero(); m.dim()];
            far[0] = kf * (T::one() + m.bounding_radius());
            let mut atoms: Vec<Atom<T>> = m
                .atoms()
                .iter()
                .map(|a| Atom::new(a.point.clone(), a.weight * (T::one() - s)))
                .collect();
            atoms.push(Atom::new(far, s * m.total_mass()));
            Measure::from_atoms(m.dim(), atoms)
        }
    }
}

/// The last half of the column never increases by more than `slack`.
pub fn eventually_decreasing<T: Real>(distances: &[T], slack: T) -> bool {
    let start = distances.len() / 2;
    distances[start..].windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Solve for `μ` and each `μₖ` and tabulate `‖x_c(μₖ) − x_c(μ)‖`.
pub fn run_weak_convergence<T: Real>(
    weight: &RadialWeight<T>,
    base: &BaseMeasure<T>,
    scheme: Scheme,
    ks: &[u64],
    cfg: &SolveConfig<T>,
) -> Result<Verdict> {
    if ks.is_empty() {
        return Err(Error::InvalidConfig("no perturbation indices".into()));
    }
    let limit = base.limit()?;
    if !certify(weight, &limit).uniqueness() {
        return Err(Error::InapplicableExperiment(
            "uniqueness is not certified for the limit measure".into(),
        ));
    }
    let target = solver::solve(weight, &limit, cfg)?;
    let mut rows = Vec::with_capacity(ks.len());
    let mut distances = Vec::with_capacity(ks.len());
    let mut tol = target.grad_tol;
    for &k in ks {
        let mk = perturbed(base, scheme, k)?;
        if !certify(weight, &mk).uniqueness() {
            return Err(Error::InapplicableExperiment(format!(
                "uniqueness is not certified for k = {k}"
            )));
        }
        let r = solver::solve(weight, &mk, cfg)?;
        tol = tol.max(r.grad_tol);
        let d = linalg::distance(&r.x_c, &target.x_c);
        distances.push(d);
        rows.push(TableRow {
            k: k as f64,
            value: d.to_f64_lossy(),
            reference: None,
        });
    }
    let slack = T::lit(10.0) * tol;
    let radius = limit.bounding_radius();
    let bound = T::lit(WEAK_CONVERGENCE_TOL) * (T::one() + radius);
    let last = *distances.last().unwrap();
    let decreasing = eventually_decreasing(&distances, slack);
    let pass = decreasing && last <= bound;
    Ok(Verdict {
        name: format!("weak-convergence-{}", scheme.name()),
        pass,
        details: format!(
            "final distance {:e} (bound {:e}), eventually decreasing: {decreasing}",
            last.to_f64_lossy(),
            bound.to_f64_lossy()
        ),
        table: Some(rows),
    })
}

/// Triangle `δ(0,0) + δ(2,0) + δ(0,2)`.
pub fn triangle_measure() -> Measure<f64> {
    Measure::from_pairs(
        2,
        &[(&[0.0, 0.0], 1.0), (&[2.0, 0.0], 1.0), (&[0.0, 2.0], 1.0)],
    )
    .unwrap()
}

/// Density `1 + y₁ + y₂²/2` on the unit square, starting from a 2×2 grid.
pub fn skewed_square_density() -> BaseMeasure<f64> {
    let grid = DensityGrid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![2, 2]).unwrap();
    BaseMeasure::density(grid, |y| 1.0 + y[0] + 0.5 * y[1] * y[1], 8)
}

/// Names accepted by [`run_named`].
pub const FIXTURE_NAMES: [&str; 8] = [
    "nonuniqueness-interval",
    "continuity-failure",
    "signed-nonuniqueness",
    "weak-convergence-constant",
    "weak-convergence-jitter",
    "weak-convergence-reweight",
    "weak-convergence-refine",
    "weak-convergence-far-atom",
];

/// Run a fixture by name; `None` for unknown names.
pub fn run_named(name: &str) -> Option<Result<Verdict>> {
    let cfg = SolveConfig::default();
    let w = clamp_weight();
    let triangle = BaseMeasure::Atoms(triangle_measure());
    let run = |base: &BaseMeasure<f64>, scheme: Scheme| {
        run_weak_convergence(&w, base, scheme, &scheme.default_ks(), &cfg)
    };
    Some(match name {
        "nonuniqueness-interval" => Ok(run_nonuniqueness_interval()),
        "continuity-failure" => Ok(run_continuity_failure()),
        "signed-nonuniqueness" => Ok(run_signed_nonuniqueness()),
        "weak-convergence-constant" => run(&triangle, Scheme::Constant),
        "weak-convergence-jitter" => run(&triangle, Scheme::Jitter { seed: 7 }),
        "weak-convergence-reweight" => run(&triangle, Scheme::Reweight { seed: 7 }),
        "weak-convergence-refine" => run(&skewed_square_density(), Scheme::Refine),
        "weak-convergence-far-atom" => run(&triangle, Scheme::FarAtom),
        _ => return None,
    })
}
