mod common;

use common::*;
use gcenter::energy::{self, EnergyField};
use gcenter::fold::Halfspace;
use gcenter::solver::{self, certify, SolveConfig};
use gcenter::{Measure, RadialWeight};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn point(dim: usize, spread: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-spread..spread, dim)
}

fn atoms(dim: usize, positive: bool) -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
    let w = if positive { 0.1..2.0 } else { -1.0..2.0 };
    prop::collection::vec((point(dim, 3.0), w), 1..7).prop_filter("positive mass", |a| {
        a.iter().map(|t| t.1).sum::<f64>() > 0.1
    })
}

fn profile() -> impl Strategy<Value = Profile> {
    prop_oneof![
        Just(Profile::linear()),
        (0.5..2.0f64).prop_map(Profile::clamped),
        any::<u64>().prop_map(|s| random_increasing(&mut ChaCha8Rng::seed_from_u64(s))),
        any::<u64>().prop_map(|s| random_bounded(&mut ChaCha8Rng::seed_from_u64(s))),
    ]
}

fn increasing_profile() -> impl Strategy<Value = Profile> {
    prop_oneof![
        Just(Profile::linear()),
        (0.5..2.0f64).prop_map(Profile::clamped),
        any::<u64>().prop_map(|s| random_increasing(&mut ChaCha8Rng::seed_from_u64(s))),
    ]
}

fn shift(atoms: &[(Vec<f64>, f64)], z: &[f64]) -> Vec<(Vec<f64>, f64)> {
    atoms
        .iter()
        .map(|(y, w)| (y.iter().zip(z).map(|(a, b)| a + b).collect(), *w))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn antiderivative_matches_reference_and_differentiates_to_g(p in profile(), r in 0.0..6.0f64) {
        let w = to_weight(&p);
        let big_g = w.eval_big_g(r).unwrap();
        prop_assert!((big_g - p.big_g(r)).abs() <= 1e-12 * (1.0 + big_g.abs()));
        prop_assert!((w.eval_g(r).unwrap() - p.g(r)).abs() <= 1e-12 * (1.0 + p.g(r).abs()));
        let h = 1e-6;
        prop_assume!(p.kinks().iter().all(|k| (r - k).abs() > 2.0 * h));
        let fd = (w.eval_big_g(r + h).unwrap() - w.eval_big_g(r - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - p.g(r)).abs() <= 1e-7 * (1.0 + p.g(r).abs()));
    }

    #[test]
    fn jordan_parts_recombine(a in atoms(2, false)) {
        let m = to_measure(2, &a);
        let j = m.jordan();
        prop_assert!((j.positive_mass() - j.negative_mass() - m.total_mass()).abs() <= 1e-12);
        prop_assert!((j.positive_mass() + j.negative_mass() - m.total_variation()).abs() <= 1e-12);
        prop_assert!(j.positive.iter().chain(&j.negative).all(|a| a.weight > 0.0));
        let mut rebuilt: Vec<_> = j.positive.iter().map(|a| (a.point.clone(), a.weight))
            .chain(j.negative.iter().map(|a| (a.point.clone(), -a.weight)))
            .collect();
        let mut orig: Vec<_> = m.atoms().iter().map(|a| (a.point.clone(), a.weight)).collect();
        let key = |t: &(Vec<f64>, f64)| (t.0.clone(), t.1);
        rebuilt.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        orig.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        prop_assert_eq!(rebuilt, orig);
    }

    #[test]
    fn line_support_survives_rigid_motions(
        a in atoms(2, true),
        collinear in any::<bool>(),
        angle in 0.0..std::f64::consts::TAU,
        z in point(2, 5.0),
    ) {
        let a: Vec<_> = if collinear {
            a.iter().map(|(y, w)| (vec![y[0], 0.5 * y[0] - 1.0], *w)).collect()
        } else {
            a
        };
        let m = to_measure(2, &a);
        let moved: Vec<_> = shift(&a.iter().map(|(y, w)| (rotate(y, angle), *w)).collect::<Vec<_>>(), &z);
        let n = to_measure(2, &moved);
        let tol = 1e-9;
        let before = m.support_geometry(tol);
        let after = n.support_geometry(tol);
        if collinear {
            prop_assert!(before.line_supported && after.line_supported);
        }
        // Borderline configurations may flip; only clear cases must agree.
        let spread = spread_off_best_line(&a);
        if spread > 1e-6 {
            prop_assert!(!before.line_supported && !after.line_supported);
        }
    }

    #[test]
    fn field_is_rotation_and_translation_equivariant(
        p in profile(),
        a in atoms(2, false),
        x in point(2, 3.0),
        angle in 0.0..std::f64::consts::TAU,
        z in point(2, 5.0),
    ) {
        let w = to_weight(&p);
        let m = to_measure(2, &a);
        let v = EnergyField::with_default_mode(&w, &m).big_v(&x);
        let turned = to_measure(2, &a.iter().map(|(y, c)| (rotate(y, angle), *c)).collect::<Vec<_>>());
        let vr = EnergyField::with_default_mode(&w, &turned).big_v(&rotate(&x, angle));
        let scale = 1e-12 * (1.0 + a.iter().map(|t| t.1.abs()).sum::<f64>() * p.sup().max(10.0));
        prop_assert!(dist(&vr, &rotate(&v, angle)) <= scale);
        let moved = to_measure(2, &shift(&a, &z));
        let xs: Vec<f64> = x.iter().zip(&z).map(|(p, q)| p - q).collect();
        let vt = EnergyField::with_default_mode(&w, &moved).big_v(&xs);
        prop_assert!(dist(&vt, &v) <= 1e2 * scale);
    }

    #[test]
    fn fold_is_idempotent_and_nonexpansive(
        dir in point(3, 1.0),
        t in -2.0..2.0f64,
        a in point(3, 4.0),
        b in point(3, 4.0),
    ) {
        prop_assume!(norm(&dir) > 1e-3);
        let h = Halfspace::from_direction(&dir, t).unwrap();
        let fa = h.fold_point(&a);
        let excess = h.normal().iter().zip(&fa).map(|(p, q)| p * q).sum::<f64>() - t;
        prop_assert!(excess <= 1e-12 * (1.0 + norm(&a)));
        prop_assert!(dist(&h.fold_point(&fa), &fa) <= 1e-12);
        prop_assert!(dist(&fa, &h.fold_point(&b)) <= dist(&a, &b) + 1e-12);
    }

    #[test]
    fn energy_is_convex_along_lines(
        p in increasing_profile(),
        a in atoms(2, true),
        x0 in point(2, 4.0),
        x1 in point(2, 4.0),
        s in 0.0..1.0f64,
    ) {
        let w = to_weight(&p);
        let m = to_measure(2, &a);
        let ef = EnergyField::with_default_mode(&w, &m);
        let xs: Vec<f64> = x0.iter().zip(&x1).map(|(p, q)| (1.0 - s) * p + s * q).collect();
        let lhs = ef.energy(&xs);
        let rhs = (1.0 - s) * ef.energy(&x0) + s * ef.energy(&x1);
        prop_assert!(lhs <= rhs + 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn kernel_is_bounded_by_sup_times_shift(
        p in profile(),
        x in point(3, 5.0),
        y in point(3, 50.0),
    ) {
        prop_assume!(p.tail_slope == 0.0);
        let w = to_weight(&p);
        let k = energy::kernel_increment(&w, &x.iter().zip(&y).map(|(a, b)| a + b).collect::<Vec<_>>(), &y);
        let reference = p.big_g(norm(&x.iter().zip(&y).map(|(a, b)| a + b).collect::<Vec<_>>())) - p.big_g(norm(&y));
        prop_assert!((k - reference).abs() <= 1e-9 * (1.0 + reference.abs()));
        prop_assert!(k.abs() <= p.sup() * norm(&x) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn kernel_extension_error_shrinks_with_distance(
        threshold in 0.5..2.0f64,
        x in point(2, 2.0),
        yh in point(2, 1.0),
    ) {
        prop_assume!(norm(&yh) > 1e-2);
        let y_hat: Vec<f64> = yh.iter().map(|c| c / norm(&yh)).collect();
        let w = RadialWeight::clamped(threshold).unwrap();
        let limit = energy::kernel_at_infinity(&w, &x, &y_hat).unwrap();
        let mut previous = f64::INFINITY;
        for r in [1e2, 1e3, 1e4, 1e5, 1e6] {
            let far: Vec<f64> = y_hat.iter().map(|c| c * r).collect();
            let near: Vec<f64> = x.iter().zip(&far).map(|(a, b)| a + b).collect();
            let err = (energy::kernel_increment(&w, &near, &far) - limit).abs();
            prop_assert!(err <= previous + 1e-12);
            previous = err;
        }
        prop_assert!(previous <= 1e-5);
    }

    #[test]
    fn solver_commutes_with_translation_and_mass_scaling(
        p in increasing_profile(),
        a in atoms(2, true),
        z in point(2, 5.0),
        c in 0.1..10.0f64,
    ) {
        let w = to_weight(&p);
        let m = to_measure(2, &a);
        prop_assume!(certify(&w, &m).uniqueness());
        let cfg = SolveConfig::default();
        let base = solver::solve(&w, &m, &cfg).unwrap();
        let moved = solver::solve(&w, &to_measure(2, &shift(&a, &z)), &cfg).unwrap();
        let expect: Vec<f64> = base.x_c.iter().zip(&z).map(|(p, q)| p - q).collect();
        prop_assert!(dist(&moved.x_c, &expect) <= 1e-6);
        let scaled = solver::solve(&w, &m.scaled(c).unwrap(), &cfg).unwrap();
        prop_assert!(dist(&scaled.x_c, &base.x_c) <= 1e-6);
    }
}

/// Largest distance of an atom from the best-fit line through the points,
/// by brute force over pairs.
fn spread_off_best_line(a: &[(Vec<f64>, f64)]) -> f64 {
    if a.len() < 3 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        for j in 0..a.len() {
            let d: Vec<f64> = a[j].0.iter().zip(&a[i].0).map(|(p, q)| p - q).collect();
            let n = norm(&d);
            if n < 1e-9 {
                continue;
            }
            let worst = a
                .iter()
                .map(|(y, _)| {
                    let e: Vec<f64> = y.iter().zip(&a[i].0).map(|(p, q)| p - q).collect();
                    (e[0] * d[1] - e[1] * d[0]).abs() / n
                })
                .fold(0.0, f64::max);
            best = best.min(worst);
        }
    }
    if best.is_infinite() {
        0.0
    } else {
        best
    }
}

#[test]
fn uniqueness_stress_from_twenty_starts() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..10 {
        let p = if case % 2 == 0 {
            Profile::clamped(1.0)
        } else {
            random_increasing(&mut rng)
        };
        let w = to_weight(&p);
        let count = rng.gen_range(3..8);
        let a = random_atoms(&mut rng, 2, count, 3.0, true);
        let m = to_measure(2, &a);
        if !certify(&w, &m).uniqueness() {
            continue;
        }
        let reference = solver::solve(&w, &m, &SolveConfig::default()).unwrap().x_c;
        for _ in 0..20 {
            let start: Vec<f64> = (0..2).map(|_| rng.gen_range(-20.0..20.0)).collect();
            let cfg = SolveConfig {
                initial: Some(start),
                ..SolveConfig::default()
            };
            let r = solver::solve(&w, &m, &cfg).unwrap();
            assert!(
                dist(&r.x_c, &reference) <= 1e-6,
                "case {case}: {:?} vs {reference:?}",
                r.x_c
            );
            assert!(norm(&big_v(&p, &a, &r.x_c)) <= 10.0 * r.grad_tol);
        }
    }
}

#[test]
fn trace_energies_never_increase() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let p = random_increasing(&mut rng);
        let w = to_weight(&p);
        let count = rng.gen_range(2..6);
        let a = random_atoms(&mut rng, 2, count, 3.0, true);
        let m = Measure::from_atoms(
            2,
            a.iter()
                .map(|(y, c)| gcenter::Atom::new(y.clone(), *c))
                .collect(),
        )
        .unwrap();
        let cfg = SolveConfig {
            initial: Some(vec![rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0)]),
            ..SolveConfig::default()
        };
        let r = solver::solve(&w, &m, &cfg).unwrap();
        for step in &r.trace[1..] {
            assert!(step.energy_change < 0.0);
        }
        for pair in r.trace.windows(2) {
            assert!(pair[1].energy <= pair[0].energy + 1e-12 * (1.0 + pair[0].energy.abs()));
        }
    }
}
