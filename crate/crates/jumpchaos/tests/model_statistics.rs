//! Statistical and structural checks on the model pairings at a coarse lattice.

use std::sync::OnceLock;

use jumpchaos::experiment::moment_estimate;
use jumpchaos::model::{
    lattice_weights, pi_ipsi3psi2, pi_psi, pi_psi2, pi_xi, xi_variance, Engine, LatticeTest, ModelGrid, ModelParams,
    ModelSymbol, TestFunction,
};
use jumpchaos::rng::derive_seed;
use jumpchaos::{sample_paths, MartingalePathSet};
use proptest::prelude::*;

const EPS: f64 = 0.25;

fn grid() -> &'static ModelGrid {
    static GRID: OnceLock<ModelGrid> = OnceLock::new();
    GRID.get_or_init(|| ModelGrid::new(ModelParams::new(EPS, EPS)).unwrap())
}

fn path(seed: u64) -> MartingalePathSet {
    let g = grid();
    sample_paths(g.lattice(), g.spec(), seed).unwrap()
}

/// Sample mean and variance with the standard error of the variance, `sqrt((m₄ − s⁴)/N)`.
fn variance_with_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let s2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (s2, ((m4 - s2 * s2) / n).sqrt())
}

fn mean_with_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn psi_variance_is_translation_invariant() {
    let g = grid();
    let f = *g.frame();
    let (lo, hi) = f.psi_valid;
    // Five base points spread over the valid window and the torus.
    let points: Vec<(usize, usize)> =
        (0..5).map(|i| (lo + (hi - lo) * i / 4, (i * 37 + 5) % g.lattice().sites())).collect();
    let n = 2000;
    let mut samples = vec![Vec::with_capacity(n); points.len()];
    for r in 0..n {
        let psi = g.psi_field(&path(derive_seed(41, r as u64))).unwrap();
        for (k, &(gi, x)) in points.iter().enumerate() {
            samples[k].push(psi.value(gi, x));
        }
    }
    let exact = {
        let (gi, x) = points[0];
        g.psi_pairing_variance(&LatticeTest { center: (gi, x), entries: vec![(gi, x, 1.0)] })
    };
    let stats: Vec<(f64, f64)> = samples.iter().map(|s| variance_with_se(s)).collect();
    for (k, &(v, se)) in stats.iter().enumerate() {
        assert!((v - exact).abs() <= 4.0 * se, "point {k}: var {v} exact {exact} se {se}");
        for &(w, se2) in &stats[..k] {
            assert!((v - w).abs() <= 4.0 * (se * se + se2 * se2).sqrt(), "{v} vs {w}");
        }
    }
}

#[test]
fn psi_second_moment_matches_bracket_formula() {
    let g = grid();
    let test = g.discretize(&g.test_function(0.5).unwrap()).unwrap();
    let exact = g.psi_pairing_variance(&test);
    let squares: Vec<f64> =
        (0..2000).map(|r| pi_psi(&g.psi_field(&path(derive_seed(42, r))).unwrap(), &test).powi(2)).collect();
    let (m2, se) = mean_with_se(&squares);
    assert!((m2 - exact).abs() <= 4.0 * se, "E₂² = {m2}, exact {exact}, se {se}");
}

#[test]
fn xi_variance_matches_bracket_formula() {
    let g = grid();
    let w = g.xi_weight(&g.test_function(0.5).unwrap());
    let exact = xi_variance(&w, g.lattice(), g.spec());
    let xs: Vec<f64> = (0..2000).map(|r| pi_xi(&path(derive_seed(43, r)), &w).unwrap()).collect();
    let (v, se) = variance_with_se(&xs);
    assert!((v - exact).abs() <= 4.0 * se, "var {v} exact {exact} se {se}");
}

#[test]
fn psi2_is_centred() {
    let g = grid();
    let test = g.discretize(&g.test_function(0.5).unwrap()).unwrap();
    let c1 = g.c1().value;
    let xs: Vec<f64> =
        (0..2000).map(|r| pi_psi2(&g.psi_field(&path(derive_seed(44, r))).unwrap(), &test, c1)).collect();
    let (mean, se) = mean_with_se(&xs);
    assert!(mean.abs() <= 4.0 * se, "mean {mean} se {se}");
}

#[test]
fn fixed_seeds_reproduce_every_pairing() {
    let g = grid();
    let engine = Engine::new(g, &ModelSymbol::ALL, &[0.5, 0.25]).unwrap();
    let a = engine.run(7, 0, 5).unwrap();
    let b = engine.run(7, 0, 5).unwrap();
    let bits = |rows: &[Vec<f64>]| rows.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(bits(&a[3..]), bits(&engine.run(7, 3, 2).unwrap()));
    assert_ne!(bits(&a), bits(&engine.run(8, 0, 5).unwrap()));
}

#[test]
fn standard_error_follows_the_monte_carlo_rate() {
    let g = grid();
    let engine = Engine::new(g, &[ModelSymbol::Psi], &[0.5]).unwrap();
    let rows = engine.run(45, 0, 2000).unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let se = |n: usize| moment_estimate(&xs[..n], 2.0).1.unwrap();
    let (s500, s1000, s2000) = (se(500), se(1000), se(2000));
    // Doubling N divides the error by √2; quadrupling halves it.
    let r2 = s500 / s1000;
    let r4 = s500 / s2000;
    assert!((r2 / std::f64::consts::SQRT_2 - 1.0).abs() <= 0.3, "se ratio for 2N: {r2}");
    assert!((r4 / 2.0 - 1.0).abs() <= 0.3, "se ratio for 4N: {r4}");
}

struct Fields {
    psi: jumpchaos::model::PsiField,
    y: jumpchaos::model::CubicField,
    path: MartingalePathSet,
}

fn fields() -> &'static Fields {
    static F: OnceLock<Fields> = OnceLock::new();
    F.get_or_init(|| {
        let p = path(46);
        let psi = grid().psi_field(&p).unwrap();
        let y = grid().cubic_field(&psi).unwrap();
        Fields { psi, y, path: p }
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()))
}

/// `∫ φ` by midpoint rules in time and radius: independent of the product Gauss rule used by `mass`.
fn midpoint_mass(phi: &TestFunction) -> f64 {
    let (lo, hi) = phi.time_support();
    let n = 2000;
    let ht = (hi - lo) / n as f64;
    let time: f64 = (0..n).map(|i| phi.time_profile(lo + (i as f64 + 0.5) * ht)).sum::<f64>() * ht;
    let hr = phi.radius() / n as f64;
    let space: f64 = (0..n)
        .map(|i| {
            let r = (i as f64 + 0.5) * hr;
            4.0 * std::f64::consts::PI * r * r * phi.space_profile(r)
        })
        .sum::<f64>()
        * hr;
    time * space
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn pairings_are_linear_in_the_test_function(a in -3.0..3.0f64, b in -3.0..3.0f64, l2 in prop_oneof![Just(0.25), Just(0.125)]) {
        let g = grid();
        let f = fields();
        let p1 = g.test_function(0.5).unwrap();
        let p2 = g.test_function(l2).unwrap();
        let (t1, t2) = (g.discretize(&p1).unwrap(), g.discretize(&p2).unwrap());
        let t = t1.combine(a, &t2, b).unwrap();
        let c1 = g.c1().value;
        let c2 = g.c2().unwrap().value;
        prop_assert!(close(pi_psi(&f.psi, &t), a * pi_psi(&f.psi, &t1) + b * pi_psi(&f.psi, &t2)));
        prop_assert!(close(pi_psi2(&f.psi, &t, c1), a * pi_psi2(&f.psi, &t1, c1) + b * pi_psi2(&f.psi, &t2, c1)));
        prop_assert!(close(
            pi_ipsi3psi2(&f.psi, &f.y, &t, c2),
            a * pi_ipsi3psi2(&f.psi, &f.y, &t1, c2) + b * pi_ipsi3psi2(&f.psi, &f.y, &t2, c2)
        ));
        let (w1, w2) = (g.xi_weight(&p1), g.xi_weight(&p2));
        let w = w1.combine(a, &w2, b);
        let lhs = pi_xi(&f.path, &w).unwrap();
        let rhs = a * pi_xi(&f.path, &w1).unwrap() + b * pi_xi(&f.path, &w2).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn test_function_mass_is_invariant(lambda in 0.01..1.0f64, t in 0.0..2.0f64, x in prop::array::uniform3(0.0..1.0f64)) {
        let phi = TestFunction::new(lambda, t, x).unwrap();
        prop_assert!((phi.mass() - 1.0).abs() < 1e-10, "{}", phi.mass());
        prop_assert!((midpoint_mass(&phi) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn discrete_weights_keep_unit_mass(lambda in 0.05..0.5f64, site in 0usize..64, shift in 0.0..0.2f64) {
        let g = grid();
        let f = *g.frame();
        let x = g.lattice().coords(site).iter().map(|&c| c as f64 * EPS).collect::<Vec<_>>();
        let (tc, _) = g.center();
        let phi = TestFunction::new(lambda, tc + shift, [x[0], x[1], x[2]]).unwrap();
        let w = lattice_weights(g.lattice(), &f, &phi).unwrap();
        prop_assert!((w.mass() - 1.0).abs() < 1e-12, "{}", w.mass());
    }
}
