use jumpchaos::noise::{LatticeMollifier, MartingalePathSet};
use jumpchaos::{predictable_bracket, sample_paths, LatticeSpec, MartingaleSpec};
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = (LatticeSpec, MartingaleSpec, bool)> {
    (prop_oneof![Just(1usize), Just(3)], prop_oneof![Just(0.5), Just(0.25)], 0.05..1.0f64, 0.3..1.5f64, any::<bool>())
        .prop_map(|(d, eps, u, c, one_sided)| {
            // Admissible exponents are k > -d/2; sample up to k = 1/2.
            let k = -(d as f64) / 2.0 + u * (d as f64 / 2.0 + 0.5);
            let lattice = LatticeSpec::new(d, eps, 1.0).unwrap();
            let spec = if one_sided {
                MartingaleSpec::one_sided(k, c, 1.0, d, eps)
            } else {
                MartingaleSpec::symmetric(k, c, 1.0, d, eps)
            };
            (lattice, spec, one_sided)
        })
}

fn all_events_sorted(p: &MartingalePathSet) -> Vec<f64> {
    let mut times: Vec<f64> = p.iter_events().map(|e| e.time).collect();
    times.sort_by(f64::total_cmp);
    times
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn identical_seeds_give_identical_paths((lattice, spec, _) in spec_strategy(), seed in any::<u64>()) {
        let a = sample_paths(&lattice, &spec, seed).unwrap();
        let b = sample_paths(&lattice, &spec, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn increments_are_rigid((lattice, spec, _) in spec_strategy(), seed in any::<u64>()) {
        let p = sample_paths(&lattice, &spec, seed).unwrap();
        let a = spec.jump_size(lattice.eps());
        for x in 0..lattice.sites() {
            for j in p.site_events(x) {
                let before = p.evaluate(j.time - 1e-12, x).unwrap_or(0.0);
                let at = p.evaluate(j.time, x).unwrap();
                let inc = at - before;
                prop_assert!((inc - f64::from(j.sign) * a).abs() < 1e-9 * a.max(1.0), "{inc} vs ±{a}");
            }
        }
    }

    #[test]
    fn no_two_sites_jump_together((lattice, spec, _) in spec_strategy(), seed in any::<u64>()) {
        let p = sample_paths(&lattice, &spec, seed).unwrap();
        let times = all_events_sorted(&p);
        prop_assert!(times.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(times.iter().all(|&t| t > 0.0 && t <= 1.0));
    }

    #[test]
    fn bracket_identity_holds_pathwise((lattice, spec, _) in spec_strategy(), seed in any::<u64>(), t in 0.0..1.0f64) {
        let p = sample_paths(&lattice, &spec, seed).unwrap();
        let bar = p.renormalized();
        let ek = lattice.eps().powf(spec.k);
        for x in [0, lattice.sites() / 2, lattice.sites() - 1] {
            let lhs = p.realized_bracket(t, x).unwrap() - predictable_bracket(&spec, &lattice, t).unwrap();
            let rhs = ek * bar.evaluate(t, x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
        }
    }
}

/// `E_p[sup_t |M(t, x)|] ≤ 10 (E_p[⟨M⟩_T^{1/2}] + c ε^k)` over 500 replicas.
fn bdg_sides(lattice: &LatticeSpec, spec: &MartingaleSpec, p: f64, replicas: u64) -> (f64, f64) {
    let t = lattice.horizon();
    let mut sup_p = 0.0;
    for seed in 0..replicas {
        let path = sample_paths(lattice, spec, 7000 + seed).unwrap();
        sup_p += path.running_sup(t, 0).unwrap().powf(p);
    }
    let lhs = (sup_p / replicas as f64).powf(1.0 / p);
    // The predictable bracket is deterministic for constant densities.
    let bracket = predictable_bracket(spec, lattice, t).unwrap();
    let rhs = 10.0 * (bracket.sqrt() + spec.jump_size(lattice.eps()));
    (lhs, rhs)
}

#[test]
fn empirical_bdg_bound() {
    let lattice = LatticeSpec::new(3, 0.25, 1.0).unwrap();
    for spec in [MartingaleSpec::phi43(0.25), MartingaleSpec::one_sided(-0.5, 0.7, 1.0, 3, 0.25)] {
        for p in [2.0, 4.0] {
            let (lhs, rhs) = bdg_sides(&lattice, &spec, p, 500);
            assert!(lhs > 0.0 && lhs <= rhs, "p={p} {:?}: {lhs} > {rhs}", spec.jump_model);
        }
    }
}

#[test]
fn mollifier_riemann_mass_for_wide_supports() {
    for (eps, e) in [(0.125, 0.5), (0.0625, 0.25), (0.0625, 0.5), (1.0 / 32.0, 0.125)] {
        let lattice = LatticeSpec::new(3, eps, 1.0).unwrap();
        let m = LatticeMollifier::new(&lattice, e).unwrap();
        // Independent Riemann sum of the continuous profile over the whole cube.
        let reach = (e / eps).ceil() as i64;
        let mut direct = 0.0;
        for i in -reach..=reach {
            for j in -reach..=reach {
                for k in -reach..=reach {
                    let r = eps * ((i * i + j * j + k * k) as f64).sqrt();
                    direct += m.profile().at(r);
                }
            }
        }
        direct *= lattice.cell_volume();
        assert!((direct - 1.0).abs() < 0.02, "eps={eps} e={e}: {direct}");
        assert!((m.riemann_mass() - direct).abs() < 1e-12);
    }
}
