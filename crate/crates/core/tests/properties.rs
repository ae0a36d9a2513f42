use pinlab_core::evolution::{monotone_dt_bound, EvolutionConfig, Stepper};
use pinlab_core::flat_percolation::{build_lambda, build_lambda_with, sample_lattice, GrowthFunction, LambdaStatus, Schedule};
use pinlab_core::frac_operators::{PeriodicKernel, SpectralOperator};
use pinlab_core::periodic_cell::{build_v_profile, default_n_modes, linf_bound, make_cell_params, ExactTilde, Which};
use pinlab_core::quadrature::QuadOptions;
use pinlab_core::random_media::{eval_obstacle_force, sample_obstacles, BumpProfile, Window};
use pinlab_core::supersolution::{
    build_u_flat, choose_params, compose_and_verify, f_star_at, sample_certificate_field, CertificateOptions,
    PinnedSelection, ScalingInputs, Selected,
};
use pinlab_core::{FractionalOrder, GridFunction, ObstacleField, PeriodicGrid, StrengthLaw};
use proptest::prelude::*;
use std::f64::consts::PI;

fn grid_fn(values: Vec<f64>, period: f64) -> GridFunction {
    GridFunction::new(PeriodicGrid::new(period, values.len()).unwrap(), values).unwrap()
}

fn small_field(seed: u64, intensity: f64) -> ObstacleField {
    let w = Window::new(0.0, 30.0, 1.5, 12.0).unwrap();
    let law = StrengthLaw::Uniform { lo: 0.5, hi: 2.0 };
    sample_obstacles(intensity, w, law, BumpProfile::new(1.0, 1.5).unwrap(), seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_is_self_adjoint(
        f in prop::collection::vec(-1.0f64..1.0, 64),
        g in prop::collection::vec(-1.0f64..1.0, 64),
        s in 0.5f64..1.0,
    ) {
        let op = SpectralOperator::new(PeriodicGrid::new(7.0, 64).unwrap(), FractionalOrder::new(s).unwrap());
        let (f, g) = (grid_fn(f, 7.0), grid_fn(g, 7.0));
        let lhs = op.apply(&f).unwrap().dot(&g);
        let rhs = f.dot(&op.apply(&g).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn orders_compose_to_laplacian(f in prop::collection::vec(-1.0f64..1.0, 32), s in 0.5f64..1.0) {
        let grid = PeriodicGrid::new(2.0 * PI, 32).unwrap();
        let f = GridFunction::new(grid, f).unwrap();
        let order = FractionalOrder::new(s).unwrap();
        let two_step = SpectralOperator::new(grid, order.complement())
            .apply(&SpectralOperator::new(grid, order).apply(&f).unwrap())
            .unwrap();
        let lap = SpectralOperator::new(grid, FractionalOrder::general(1.0).unwrap()).apply(&f).unwrap();
        let scale = lap.sup_norm().max(1.0);
        for (a, b) in two_step.values.iter().zip(&lap.values) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn spectral_commutes_with_reflection(half in prop::collection::vec(-1.0f64..1.0, 33), s in 0.5f64..1.0) {
        // even data on a 64-point grid with origin 0: f[j] = f[64 − j]
        let mut vals = vec![0.0; 64];
        for j in 0..=32 {
            vals[j] = half[j];
            vals[(64 - j) % 64] = half[j];
        }
        let op = SpectralOperator::new(PeriodicGrid::new(5.0, 64).unwrap(), FractionalOrder::new(s).unwrap());
        let out = op.apply(&grid_fn(vals, 5.0)).unwrap();
        for j in 1..32 {
            prop_assert!((out.values[j] - out.values[64 - j]).abs() < 1e-12);
        }
        prop_assert!(out.mean().abs() < 1e-12);
    }

    #[test]
    fn force_nonnegative_and_reproducible(seed in 0u64..1000, x in 0.0f64..30.0, y in 0.0f64..14.0) {
        let a = small_field(seed, 0.5);
        let b = small_field(seed, 0.5);
        prop_assert_eq!(a.obstacles(), b.obstacles());
        let f = eval_obstacle_force(&a, x, y);
        prop_assert!(f >= 0.0);
        prop_assert_eq!(f.to_bits(), eval_obstacle_force(&b, x, y).to_bits());
    }

    #[test]
    fn force_is_local(seed in 0u64..1000, x in 8.0f64..22.0, y in 4.5f64..8.0) {
        // points at least r1 inside the sub-window see the same obstacles
        let full = small_field(seed, 0.8);
        let sub = full.restrict(Window::new(5.0, 25.0, 1.5, 11.0).unwrap()).unwrap();
        prop_assert_eq!(eval_obstacle_force(&full, x, y), eval_obstacle_force(&sub, x, y));
    }

    #[test]
    fn bump_derivative_continuous_at_radii(theta in 0.0f64..(2.0 * PI)) {
        let bump = BumpProfile::new(1.0, 1.5).unwrap();
        let h = 1e-4;
        for r in [1.0, 1.5] {
            let at = |rr: f64| bump.eval(rr * theta.cos(), rr * theta.sin());
            let inner = (at(r) - at(r - h)) / h;
            let outer = (at(r + h) - at(r)) / h;
            prop_assert!((inner - outer).abs() < 1e-6, "r = {}: {} vs {}", r, inner, outer);
        }
    }

    #[test]
    fn cell_profile_even_periodic_mean_zero(
        b in 0.1f64..1.0,
        ratio in 4.2f64..12.0,
        dfrac in 0.05f64..0.95,
        s in 0.5f64..0.95,
        x in -10.0f64..10.0,
    ) {
        let p = make_cell_params(b * ratio, b, b.min(1.0) * dfrac, 0.7, FractionalOrder::new(s).unwrap()).unwrap();
        let prof = build_v_profile(&p, 64).unwrap();
        for which in [Which::Tilde, Which::Smoothed] {
            let v = prof.eval(which, x);
            prop_assert!((v - prof.eval(which, -x)).abs() < 1e-12);
            prop_assert!((v - prof.eval(which, x + p.period())).abs() < 1e-10);
            let grid = PeriodicGrid::new(p.period(), 256).unwrap();
            prop_assert!(prof.sample(which, &grid).unwrap().mean().abs() < 1e-12);
        }
        let grid = PeriodicGrid::with_origin(p.period(), 2048, -p.a).unwrap();
        prop_assert!(prof.sample(Which::Tilde, &grid).unwrap().sup_norm() <= linf_bound(&p));
    }

    #[test]
    fn schedules_reach_same_fixed_point(seed in 0u64..10_000, p in 0.85f64..0.99) {
        let lat = sample_lattice(1, 60, 24, p, seed).unwrap();
        let h = GrowthFunction::new(0.5).unwrap();
        let a = build_lambda_with(&lat, &h, Schedule::Sweep);
        let b = build_lambda_with(&lat, &h, Schedule::Worklist);
        prop_assert_eq!(a.status, b.status);
        if a.status == LambdaStatus::Constructed {
            prop_assert_eq!(a.lambda, b.lambda);
        }
    }

    #[test]
    fn construction_monotone_in_p(seed in 0u64..10_000) {
        let h = GrowthFunction::new(0.5).unwrap();
        let mut prev: Option<(bool, Vec<usize>)> = None;
        for p in [0.90, 0.95, 0.99] {
            let field = build_lambda(&sample_lattice(1, 80, 32, p, seed).unwrap(), &h);
            let built = field.status == LambdaStatus::Constructed;
            if let Some((was_built, lam)) = &prev {
                prop_assert!(!was_built || built);
                if *was_built {
                    prop_assert!(field.lambda.iter().zip(lam).all(|(a, b)| a <= b));
                }
            }
            prev = Some((built, field.lambda));
        }
    }
}

/// ṽ'' > 0 on E⁺ = (−ρ, ρ) + 2aZ and < 0 on the rest, away from ±ρ.
#[test]
fn second_differences_change_sign_at_rho() {
    for &(a, b, s) in &[(4.0, 0.5, 0.75), (6.0, 0.8, 0.5), (3.0, 0.3, 0.9)] {
        let p = make_cell_params(a, b, 0.5 * b, 1.0, FractionalOrder::new(s).unwrap()).unwrap();
        let exact = ExactTilde::new(&p);
        let h = 1e-3;
        for j in 1..400 {
            let x = -a + 2.0 * a * j as f64 / 400.0;
            if ((x.abs() - p.rho).abs()) < 0.05 * a {
                continue;
            }
            let d2 = (exact.eval(x + h) - 2.0 * exact.eval(x) + exact.eval(x - h)) / (h * h);
            let expect_positive = x.abs() < p.rho;
            assert!(if expect_positive { d2 > 0.0 } else { d2 < 0.0 }, "a={a} s={s} x={x}: {d2}");
        }
    }
}

#[test]
fn f_star_nonincreasing_in_l() {
    for (s, inputs) in [
        (0.75, ScalingInputs::default()),
        (0.6, ScalingInputs::default()),
        (0.5, ScalingInputs { v: 2e-5, ..ScalingInputs::default() }),
    ] {
        let order = FractionalOrder::new(s).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..60 {
            let l = 4.0 * 10f64.powf(k as f64 / 12.0);
            let f = f_star_at(order, &inputs, l);
            assert!(f <= prev && f > 0.0, "s = {s}, l = {l}");
            prev = f;
        }
        let chosen = choose_params(order, &inputs).unwrap();
        assert_eq!(chosen.f_star, f_star_at(order, &inputs, chosen.l));
    }
}

/// At a smooth point ξ the singular integral of u_flat sits below that of the profile v_{i0}
/// that attains the minimum there: (−Δ)^s u_flat(ξ) ≥ (−Δ)^s v_{i0}(ξ).
#[test]
fn nonlocal_comparison_at_smooth_points() {
    use rand::{Rng, SeedableRng};
    let params = choose_params(FractionalOrder::new(0.75).unwrap(), &ScalingInputs::default()).unwrap();
    let opts = CertificateOptions { n_boxes: 6, ..CertificateOptions::default() };
    let layout = opts.layout(&params).unwrap();
    let period = opts.period(&params);
    let cp = params.cell_params().unwrap();
    let cell = build_v_profile(&cp, default_n_modes(&cp)).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let quad = QuadOptions { abs_tol: 1e-9, rel_tol: 1e-9, max_panels: 200_000 };
    let torus = PeriodicKernel::new(params.s, period);
    let cell_kernel = PeriodicKernel::new(params.s, cp.period());
    for _ in 0..2 {
        let entries = (0..opts.n_boxes)
            .map(|k| {
                let (lo, hi) = layout.q_tilde(k as i64);
                Selected { k, id: k, x: rng.random_range(lo..=hi), y: 2.0, strength: 1.0, lambda: 1 }
            })
            .collect();
        let sel = PinnedSelection { entries, period: Some(period) };
        let u = build_u_flat(&sel, &cell, &layout).unwrap();
        let mut checked = 0;
        while checked < 50 {
            let xi = rng.random_range(0.0..period);
            let i0 = u.argmin(xi);
            if u.argmin(xi - 0.05) != i0 || u.argmin(xi + 0.05) != i0 {
                continue;
            }
            let xc = sel.entries[i0].x;
            let c0 = xi - ((xi - xc + 0.5 * period).rem_euclid(period) - 0.5 * period);
            let v0 = |y: f64| cell.eval(Which::Smoothed, y - c0);
            let lu = torus.apply(|y| u.eval(y), xi, 1e-4, quad).unwrap();
            let lv = cell_kernel.apply(v0, xi, 1e-4, quad).unwrap();
            let slack = 1e-6 * lv.value.abs() + lu.error_bound + lv.error_bound + 1e-9;
            assert!(lu.value >= lv.value - slack, "xi = {xi}: {} < {}", lu.value, lv.value);
            checked += 1;
        }
    }
}

#[test]
fn certificate_terms_chain() {
    for (s, inputs) in [(0.75, ScalingInputs::default()), (0.5, ScalingInputs { v: 2e-5, ..ScalingInputs::default() })] {
        let params = choose_params(FractionalOrder::new(s).unwrap(), &inputs).unwrap();
        let opts = CertificateOptions { log2_grid: 12, ..CertificateOptions::default() };
        for seed in 0..3 {
            let field = sample_certificate_field(&params, &opts, StrengthLaw::Point(1.0), seed).unwrap();
            let v = compose_and_verify(&params, &field, &opts).unwrap().verification;
            assert!(v.max_flat_residual <= v.tolerance, "{v:?}");
            assert!(v.max_force_deficit <= 0.0, "{v:?}");
            assert!(v.max_step_operator <= v.step_operator_bound, "{v:?}");
            assert!(params.step_operator_bound() + v.f_star < params.flat_margin());
            let chain = v.max_flat_residual + v.max_force_deficit + v.max_step_operator + v.f_star - params.flat_margin();
            assert!(v.max_residual <= chain + 1e-12, "{} > {chain}", v.max_residual);
        }
    }
}

fn evolution_setup(dt_factor: f64) -> (ObstacleField, EvolutionConfig) {
    let field = small_field(4, 0.6).with_wrap_x(true);
    let grid = PeriodicGrid::new(30.0, 256).unwrap();
    let base = EvolutionConfig::new(grid, FractionalOrder::new(0.75).unwrap(), 0.3, &field);
    let dt = dt_factor * monotone_dt_bound(&field);
    (field, EvolutionConfig { dt, ..base })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn discrete_comparison_principle(
        lower in prop::collection::vec(0.0f64..6.0, 256),
        gap in prop::collection::vec(0.0f64..1.0, 256),
    ) {
        let (field, cfg) = evolution_setup(1.0);
        let stepper = Stepper::new(&cfg);
        let mut u = GridFunction::new(cfg.grid, lower.clone()).unwrap();
        let mut w = GridFunction::new(cfg.grid, lower.iter().zip(&gap).map(|(a, b)| a + b).collect()).unwrap();
        for _ in 0..20 {
            u = stepper.step(&u, &field).unwrap();
            w = stepper.step(&w, &field).unwrap();
            prop_assert!(u.values.iter().zip(&w.values).all(|(a, b)| a <= &(b + 1e-12)));
        }
    }
}

#[test]
fn zero_data_stays_nonnegative_and_mean_follows_force() {
    let (field, cfg) = evolution_setup(1.0);
    let cfg = EvolutionConfig { dt: 0.05, ..cfg };
    let stepper = Stepper::new(&cfg);
    let mut u = GridFunction::zeros(cfg.grid);
    for _ in 0..400 {
        let next = stepper.step(&u, &field).unwrap();
        let mean_force: f64 =
            cfg.grid.points().zip(&u.values).map(|(x, v)| field.force(x, *v)).sum::<f64>() / cfg.grid.n_points() as f64;
        let expect = u.mean() + cfg.dt * (cfg.force - mean_force);
        assert!((next.mean() - expect).abs() < 1e-12);
        assert!(next.min() >= -1e-12);
        u = next;
    }
}
