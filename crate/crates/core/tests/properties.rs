use fracper_core::energy::{coarea_check, g_energy, perimeter, split_parts};
use fracper_core::lattice::{ball_region, ring_region};
use fracper_core::levelset::{assemble_function, build_level_family, verify_function_minimality};
use fracper_core::optimise::{minimise, DEFAULT_SCALE};
use fracper_core::random::{random_func, random_instance, random_level_datum, random_set, rng_from_seed};
use fracper_core::{FuncConfig, Lattice, LatticeSpec, LevelOracle, Region, SetConfig, WeightTable};
use proptest::prelude::*;

const S: [f64; 3] = [0.2, 0.5, 0.8];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn masks(n: usize) -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
    (prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn de_morgan((a, b) in masks(30)) {
        let (a, b) = (Region::from_mask(a), Region::from_mask(b));
        prop_assert_eq!(a.union(&b).complement(), a.complement().intersection(&b.complement()));
        prop_assert_eq!(a.intersection(&b).complement(), a.complement().union(&b.complement()));
        prop_assert_eq!(a.difference(&b), a.intersection(&b.complement()));
    }

    #[test]
    fn rings_and_balls_grow(w1 in 0.1f64..3.0, dw in 0.0f64..2.0, cx in -1.0f64..1.0) {
        let lat = Lattice::new(LatticeSpec::square(4.0, 0.5, 0.5)).unwrap();
        let omega = ball_region(&lat, &[cx, 0.0], 1.0).unwrap();
        let r1 = ring_region(&lat, &omega, w1).unwrap();
        let r2 = ring_region(&lat, &omega, w1 + dw).unwrap();
        prop_assert!(r1.is_subset(&r2));
        prop_assert!(r1.is_disjoint(&omega));
        let b1 = ball_region(&lat, &[cx, 0.0], w1).unwrap();
        let b2 = ball_region(&lat, &[cx, 0.0], w1 + dw).unwrap();
        prop_assert!(b1.is_subset(&b2));
    }

    #[test]
    fn layer_cake(vals in prop::collection::vec(-20i32..20, 2..12), i in 0usize..64, j in 0usize..64) {
        let mut grid: Vec<f64> = vals.iter().map(|&v| f64::from(v) * 0.25).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let a = grid[i % grid.len()];
        let b = grid[j % grid.len()];
        let chi = |x: f64, t: f64| f64::from(u8::from(x >= t));
        let sum: f64 = (1..grid.len()).map(|k| (grid[k] - grid[k - 1]) * (chi(a, grid[k]) - chi(b, grid[k])).abs()).sum();
        prop_assert_eq!(sum, (a - b).abs());
    }

    #[test]
    fn indicator_matches_perimeter(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let inst = random_instance(&mut rng, 10, &S).unwrap();
        let t = WeightTable::boxed(&inst.lattice);
        let e = random_set(&mut rng, &inst.lattice, 0.5);
        let p = perimeter(&t, &e, &inst.omega).unwrap();
        let g = g_energy(&t, &e.indicator(), &inst.omega).unwrap();
        prop_assert_eq!(p, g);
    }

    #[test]
    fn homogeneity_and_translation(seed in any::<u64>(), c in -3.0f64..3.0) {
        let mut rng = rng_from_seed(seed);
        let inst = random_instance(&mut rng, 10, &S).unwrap();
        let t = WeightTable::boxed(&inst.lattice);
        let u = random_func(&mut rng, &inst.lattice);
        let g = g_energy(&t, &u, &inst.omega).unwrap();
        let gc = g_energy(&t, &u.map(|v| c * v), &inst.omega).unwrap();
        prop_assert!(rel(gc.local, c.abs() * g.local) <= 1e-12);
        prop_assert!(rel(gc.nonlocal, c.abs() * g.nonlocal) <= 1e-12);
        prop_assert!(rel(gc.total, c.abs() * g.total) <= 1e-12);

        let mut v = random_func(&mut rng, &inst.lattice);
        for i in 0..v.values.len() {
            if !inst.omega.contains(i) {
                v.values[i] = u.values[i];
            }
        }
        let d0 = g.total - g_energy(&t, &v, &inst.omega).unwrap().total;
        let d1 = g_energy(&t, &u.map(|x| x + c), &inst.omega).unwrap().total
            - g_energy(&t, &v.map(|x| x + c), &inst.omega).unwrap().total;
        prop_assert!((d0 - d1).abs() <= 1e-10 * g.total.max(1.0));
    }

    #[test]
    fn submodular_and_coarea(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let inst = random_instance(&mut rng, 10, &S).unwrap();
        let t = WeightTable::boxed(&inst.lattice);
        let (e, f) = (random_set(&mut rng, &inst.lattice, 0.5), random_set(&mut rng, &inst.lattice, 0.5));
        let p = |x: &SetConfig| perimeter(&t, x, &inst.omega).unwrap().total;
        let rhs = p(&e) + p(&f);
        prop_assert!(p(&e.union(&f)) + p(&e.intersection(&f)) <= rhs + 1e-10 * rhs.max(1.0));
        let u = random_func(&mut rng, &inst.lattice);
        let c = coarea_check(&t, &u, &inst.omega).unwrap();
        prop_assert!((c.lhs - c.rhs).abs() <= 1e-10 * c.lhs.max(1.0));
    }

    #[test]
    fn complement_duality(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let inst = random_instance(&mut rng, 12, &S).unwrap();
        let t = WeightTable::boxed(&inst.lattice);
        let d = random_set(&mut rng, &inst.lattice, 0.5);
        let a = minimise(&t, &d, &inst.omega, DEFAULT_SCALE).unwrap();
        let b = minimise(&t, &d.complement(), &inst.omega, DEFAULT_SCALE).unwrap();
        prop_assert_eq!(&a.minimal_set.complement(), &b.maximal_set);
        prop_assert_eq!(&a.maximal_set.complement(), &b.minimal_set);
        prop_assert!(rel(a.optimal_value, b.optimal_value) <= 1e-9);
    }

    #[test]
    fn monotone_data_nest(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let inst = random_instance(&mut rng, 12, &S).unwrap();
        let t = WeightTable::boxed(&inst.lattice);
        let d1 = random_set(&mut rng, &inst.lattice, 0.4);
        let d2 = d1.union(&random_set(&mut rng, &inst.lattice, 0.3));
        let m1 = minimise(&t, &d1, &inst.omega, DEFAULT_SCALE).unwrap();
        let m2 = minimise(&t, &d2, &inst.omega, DEFAULT_SCALE).unwrap();
        prop_assert!(m1.maximal_set.region().is_subset(&m2.maximal_set.region()));
        prop_assert!(m1.minimal_set.region().is_subset(&m2.minimal_set.region()));
    }

    #[test]
    fn assembled_functions(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let inst = random_instance(&mut rng, 8, &S).unwrap();
        let (lat, omega) = (&inst.lattice, &inst.omega);
        let t = WeightTable::boxed(lat);
        let phi = random_level_datum(&mut rng, lat, 4).map(|v| v - 1.0);
        let u = assemble_function(&build_level_family(&t, &phi, omega, DEFAULT_SCALE).unwrap(), &phi, omega);
        let oracle = LevelOracle::BruteForce { limit: 8 };
        prop_assert!(verify_function_minimality(&t, &u, omega, oracle).unwrap().minimal);

        let ring: Vec<f64> = (0..lat.len()).filter(|&i| !omega.contains(i)).map(|i| phi.values[i]).collect();
        let lo = ring.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ring.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(omega.iter().all(|i| (lo..=hi).contains(&u.values[i])));

        let again = assemble_function(&build_level_family(&t, &u, omega, DEFAULT_SCALE).unwrap(), &u, omega);
        prop_assert_eq!(&again, &u);

        let (p, q) = split_parts(&u);
        prop_assert!(verify_function_minimality(&t, &p, omega, oracle).unwrap().minimal);
        prop_assert!(verify_function_minimality(&t, &q, omega, oracle).unwrap().minimal);
    }
}

#[test]
fn constant_function_has_zero_energy() {
    let lat = Lattice::new(LatticeSpec::square(1.0, 0.5, 0.5)).unwrap();
    let omega = ball_region(&lat, &[0.0, 0.0], 1.0).unwrap();
    let t = WeightTable::boxed(&lat);
    assert_eq!(g_energy(&t, &FuncConfig::constant(&lat, 2.5), &omega).unwrap().total, 0.0);
}
