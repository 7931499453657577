use approx::relative_eq;
use proptest::prelude::*;

use plap::experiments::{decay_rate_fit, downward_closed, ScanEntry};
use plap::functional::{energy_grad, lp_norm_p, p_energy, rayleigh, weak_residual};
use plap::limits::{extrapolate, second_divided_differences};
use plap::{build_grid, principal_eig, DomainSpec, Field, Grid, SolverConfig};

fn domain() -> impl Strategy<Value = DomainSpec> {
    prop_oneof![
        (0.2f64..3.0).prop_map(|l| DomainSpec::Interval { a: -0.5, b: l }),
        (1usize..=3, 0.5f64..4.0).prop_map(|(dim, radius)| DomainSpec::RadialBall { dim, radius }),
        (0.5f64..2.0, 0.5f64..2.0).prop_map(|(bx, by)| DomainSpec::Box2 { ax: 0.0, bx, ay: 0.0, by }),
    ]
}

/// A grid with a positive interior field `u` and a potential `v`.
fn instance() -> impl Strategy<Value = (Grid, Field, Field)> {
    (domain(), 8usize..20).prop_flat_map(|(d, n)| {
        let g = build_grid(d, n).unwrap();
        let len = g.len();
        (Just(g), prop::collection::vec(0.05f64..1.0, len), prop::collection::vec(-2.0f64..2.0, len)).prop_map(
            |(g, u, v)| {
                let u: Vec<f64> = u.iter().enumerate().map(|(j, &x)| if g.is_boundary(j) { 0.0 } else { x }).collect();
                let u = Field::new(&g, u).unwrap();
                let v = Field::new(&g, v).unwrap();
                (g, u, v)
            },
        )
    })
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.5), Just(2.0), Just(3.0), Just(4.0), 1.2f64..5.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rayleigh_is_scale_invariant((_, u, v) in instance(), p in exponent(), c in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0]) {
        let a = rayleigh(&u, &v, p).unwrap();
        let b = rayleigh(&u.scaled(c), &v, p).unwrap();
        prop_assert!(relative_eq!(a, b, epsilon = 1e-12, max_relative = 1e-12));
    }

    #[test]
    fn rayleigh_shift((_, u, v) in instance(), p in exponent(), c in -5.0f64..5.0) {
        let a = rayleigh(&u, &v, p).unwrap() + c;
        let b = rayleigh(&u, &v.shifted(c), p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(c.abs()).max(1.0));
    }

    #[test]
    fn rayleigh_is_at_least_min_v((_, u, v) in instance(), p in exponent()) {
        let r = rayleigh(&u, &v, p).unwrap();
        prop_assert!(r >= v.min() - 1e-12);
    }

    #[test]
    fn lp_norm_is_p_homogeneous((_, u, _v) in instance(), p in exponent(), c in -4.0f64..4.0) {
        let a = lp_norm_p(&u.scaled(c), p).unwrap();
        let b = c.abs().powf(p) * lp_norm_p(&u, p).unwrap();
        prop_assert!(relative_eq!(a, b, epsilon = 1e-300, max_relative = 1e-12));
    }

    #[test]
    fn energy_is_affine_in_constant_potentials((g, u, _v) in instance(), p in exponent(), c in -3.0f64..3.0) {
        let e0 = p_energy(&u, &Field::zeros(&g), p).unwrap();
        let ec = p_energy(&u, &Field::constant(&g, c), p).unwrap();
        let m = lp_norm_p(&u, p).unwrap();
        prop_assert!((ec - e0 - c * m).abs() <= 1e-12 * (e0.abs() + (c * m).abs()));
    }

    #[test]
    fn euler_identity((_, u, v) in instance(), p in exponent()) {
        let r = rayleigh(&u, &v, p).unwrap();
        let w = weak_residual(&u, r, &v, p, &u).unwrap();
        let scale = p_energy(&u, &v.map(f64::abs), p).unwrap();
        prop_assert!(w.abs() <= 1e-12 * scale, "{w} vs {scale}");
    }

    #[test]
    fn residual_is_affine_in_lambda((g, u, v) in instance(), p in exponent(), lambda in -3.0f64..3.0, delta in 0.01f64..2.0) {
        let phi = u.map(|x| x * x);
        let a = weak_residual(&u, lambda, &v, p, &phi).unwrap();
        let b = weak_residual(&u, lambda - delta, &v, p, &phi).unwrap();
        let m = g.node_weights();
        let expected: f64 = (0..g.len()).map(|j| m[j] * u.values()[j].powf(p - 1.0) * phi.values()[j]).sum::<f64>() * delta;
        prop_assert!((b - a - expected).abs() <= 1e-10 * (a.abs() + b.abs() + expected.abs()));
        prop_assert!(b > a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_matches_central_differences((g, u, v) in instance(), p in prop_oneof![Just(1.5), Just(2.0), Just(3.0), Just(4.0)]) {
        let grad = energy_grad(&u, &v, p).unwrap();
        let norm = grad.values().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let h = 1e-5;
        for &j in g.interior() {
            let mut up = u.clone();
            up.values_mut()[j] += h;
            let mut dn = u.clone();
            dn.values_mut()[j] -= h;
            let fd = (p_energy(&up, &v, p).unwrap() - p_energy(&dn, &v, p).unwrap()) / (2.0 * h);
            prop_assert!((fd - grad.values()[j]).abs() <= 1e-6 * norm);
        }
        for &j in g.boundary() {
            prop_assert_eq!(grad.values()[j], 0.0);
        }
    }

    #[test]
    fn eigenvalue_bounds((g, _u, v) in instance(), p in prop_oneof![Just(2.0), Just(3.0)]) {
        let ep = principal_eig(&g, &v, &SolverConfig::with_p(p)).unwrap();
        prop_assert!(ep.lambda >= v.min() - 1e-9);
        // the eigenvalue is the minimum of the quotient, so any trial field is above it
        let trial = Field::from_fn(&g, |_, r| 1.0 + r).unwrap().clamped();
        if lp_norm_p(&trial, p).unwrap() > 0.0 {
            prop_assert!(rayleigh(&trial, &v, p).unwrap() >= ep.lambda - 1e-8 * ep.lambda.abs().max(1.0));
        }
        prop_assert!(g.interior().iter().all(|&j| ep.phi.values()[j] > 0.0));
    }
}

proptest! {
    #[test]
    fn extrapolation_stays_in_range(ls in prop::collection::vec(-2.0f64..2.0, 1..6), floor in -3.0f64..0.0) {
        let mut ls = ls;
        ls.sort_by(|a, b| b.total_cmp(a));
        let last = *ls.last().unwrap();
        let e = extrapolate(&ls, floor);
        prop_assert!(e <= last && e >= floor.min(last));
    }

    #[test]
    fn linear_data_has_no_curvature(a in -5.0f64..5.0, b in -5.0f64..5.0, xs in prop::collection::btree_set(-1000i32..1000, 3..10)) {
        let xs: Vec<f64> = xs.into_iter().map(|x| x as f64 / 100.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        for d in second_divided_differences(&xs, &ys) {
            prop_assert!(d.abs() <= 1e-9);
        }
    }

    #[test]
    fn decay_fit_is_exact(rate in 0.0f64..3.0, c in 0.1f64..10.0) {
        let g = build_grid(DomainSpec::RadialBall { dim: 2, radius: 8.0 }, 128).unwrap();
        let phi = Field::from_radial(&g, |r| c * (-rate * r).exp()).unwrap();
        prop_assert!((decay_rate_fit(&phi, (1.0, 6.0)).unwrap() - rate).abs() <= 1e-10);
    }

    #[test]
    fn threshold_pass_sets_are_downward_closed(lambdas in prop::collection::btree_set(-100i32..100, 1..10), cut in -100i32..100) {
        let entries: Vec<ScanEntry> = lambdas
            .iter()
            .map(|&l| ScanEntry {
                lambda: l as f64,
                stabilizes: l <= cut,
                coercivity_violated: l > cut,
                max_ratio: 1.0,
                expected_in_set: l <= cut,
            })
            .collect();
        prop_assert!(downward_closed(&entries));
    }
}
