//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use pinlab_core::evolution::{self, EvolutionConfig, Outcome};
use pinlab_core::flat_percolation::{build_lambda, count_admissible_paths, counting_bound, expected_path_bound, sample_lattice, verify_lambda, GrowthFunction, LambdaStatus};
use pinlab_core::frac_operators::operator_self_test;
use pinlab_core::periodic_cell::{
    build_v_profile, check_monotone, default_n_modes, integral_residual_check, linf_bound, make_cell_params, spectral_residual_check,
    Which,
};
use pinlab_core::random_media::{BumpProfile, Window};
use pinlab_core::supersolution::{
    build_u_flat, choose_params, compose_and_verify, intersection_gaps, sample_certificate_field, CertificateOptions,
    PinnedSelection, ScalingInputs, ScalingParams, Selected,
};
use pinlab_core::{FractionalOrder, GridFunction, ObstacleField, PeriodicGrid, StrengthLaw};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

// tolerances and budgets
const OPERATOR_REL_TOL: f64 = 1e-6;
const RESIDUAL_TAIL_FACTOR: f64 = 10.0;
const RESIDUAL_POINTS: usize = 64;
const GAP_TOL: f64 = 1e-8;
const CERT_TOL_FACTOR: f64 = 1e-3;
const NOISE_SIGMAS: f64 = 3.0;
const FREE_TRANSLATION_TOL: f64 = 1e-12;

struct Report {
    passed: bool,
    detail: String,
}

fn check(n: usize, name: &str, budget: Duration, run: impl FnOnce() -> Report) -> bool {
    let start = Instant::now();
    let out = run();
    let elapsed = start.elapsed();
    let ok = out.passed && elapsed <= budget;
    println!(
        "criterion {n} {name}: {} ({}; {:.2} s of {} s)",
        if ok { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    ok
}

fn operators() -> Report {
    let r = operator_self_test(11, 20, 64, &[0.5, 0.6, 0.75, 0.9], OPERATOR_REL_TOL).unwrap();
    let worst = r.max_rel_err.iter().cloned().fold(0.0, f64::max);
    Report { passed: r.passed, detail: format!("worst relative error {worst:.2e}") }
}

fn cell_solutions() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut failures = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut spectral_ok = 0;
    for i in 0..50 {
        let b: f64 = rng.random_range(0.1..1.0);
        let a = b * rng.random_range(4.2..16.0);
        let delta = b.min(1.0) * rng.random_range(0.05..0.95);
        let f2 = rng.random_range(0.1..2.0);
        let s = FractionalOrder::new(rng.random_range(0.5..0.95)).unwrap();
        let p = make_cell_params(a, b, delta, f2, s).unwrap();
        let prof = build_v_profile(&p, default_n_modes(&p)).unwrap();

        let res = integral_residual_check(&prof, RESIDUAL_POINTS).unwrap();
        worst_ratio = worst_ratio.max(res.max_error / res.tail_bound);
        spectral_ok += spectral_residual_check(&prof).unwrap().passed as usize;
        let grid = PeriodicGrid::with_origin(p.period(), 4096, -a).unwrap();
        let sup_ok = prof.sample(Which::Tilde, &grid).unwrap().sup_norm() <= linf_bound(&p);
        let mono = check_monotone(&prof, 2048).unwrap();
        let residual_ok = res.max_error <= RESIDUAL_TAIL_FACTOR * res.tail_bound;
        if !(residual_ok && sup_ok && mono.passed) {
            failures.push(format!(
                "#{i} (a={a:.3}, b={b:.3}, s={:.3}: residual {residual_ok}, sup {sup_ok}, monotone {})",
                s.s(),
                mono.passed
            ));
        }
    }
    Report {
        passed: failures.is_empty(),
        detail: format!(
            "{}/50 ok, worst residual/tail {worst_ratio:.2e}, truncated-series spectral residual within bound {spectral_ok}/50{}",
            50 - failures.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }
        ),
    }
}

fn percolation() -> Report {
    let growth = GrowthFunction::new(0.5).unwrap();
    let (mut built, mut verified) = (0, 0);
    for seed in 0..100 {
        let lat = sample_lattice(1, 200, 64, 0.97, seed).unwrap();
        let field = build_lambda(&lat, &growth);
        if field.status == LambdaStatus::Constructed {
            built += 1;
            if verify_lambda(&field).passed {
                verified += 1;
            }
        }
    }
    Report {
        passed: built >= 99 && verified == built,
        detail: format!("{built}/100 constructed, {verified} verified"),
    }
}

fn counting() -> Report {
    let growth = GrowthFunction::new(0.5).unwrap();
    let bound = counting_bound(&growth, 1).unwrap();
    let q = 0.9 * bound.q_max;
    let (width, height, seeds) = (12usize, 5usize, 10_000u64);
    // sums and sums of squares per (h, N)
    let mut acc = vec![[0.0f64; 2]; 3 * width];
    for seed in 0..seeds {
        let lat = sample_lattice(1, width, height, 1.0 - q, 1_000_000 + seed).unwrap();
        for h in 1..=3 {
            for n in 0..width {
                let c = count_admissible_paths(&lat, &growth, n, 0, h) as f64;
                let slot = &mut acc[(h - 1) * width + n];
                slot[0] += c;
                slot[1] += c * c;
            }
        }
    }
    let mut worst_excess = f64::NEG_INFINITY;
    let mut ok = true;
    for h in 1..=3u32 {
        for n in 0..width {
            let [s1, s2] = acc[(h as usize - 1) * width + n];
            let mean = s1 / seeds as f64;
            let sd = ((s2 / seeds as f64 - mean * mean).max(0.0) / seeds as f64).sqrt();
            let b = expected_path_bound(q, bound.beta, h, growth.eval(n as u64));
            let excess = mean - b - NOISE_SIGMAS * sd;
            worst_excess = worst_excess.max(excess);
            ok &= excess <= 0.0;
        }
    }
    Report { passed: ok, detail: format!("q = {q:.3e}, worst mean - bound - 3 sigma = {worst_excess:.2e}") }
}

fn params(s: f64) -> ScalingParams {
    let inputs = if s == 0.5 { ScalingInputs { v: 2e-5, ..ScalingInputs::default() } } else { ScalingInputs::default() };
    choose_params(FractionalOrder::new(s).unwrap(), &inputs).unwrap()
}

fn gap_law() -> Report {
    let p = params(0.75);
    let opts = CertificateOptions::default();
    let layout = opts.layout(&p).unwrap();
    let cp = p.cell_params().unwrap();
    let cell = build_v_profile(&cp, default_n_modes(&cp)).unwrap();
    let period = opts.period(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let (mut n_gaps, mut bad) = (0usize, 0usize);
    let (mut min_len, mut max_sep) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..100 {
        let entries = (0..opts.n_boxes)
            .map(|k| {
                let (lo, hi) = layout.q_tilde(k as i64);
                Selected { k, id: k, x: rng.random_range(lo..=hi), y: 2.0, strength: 1.0, lambda: 1 }
            })
            .collect();
        let sel = PinnedSelection { entries, period: Some(period) };
        let u = build_u_flat(&sel, &cell, &layout).unwrap();
        let xi = rng.random_range(0.0..period);
        let gaps = intersection_gaps(&u, xi);
        for g in &gaps {
            min_len = min_len.min(g.1 - g.0);
            bad += (g.1 - g.0 < cp.a - GAP_TOL) as usize;
        }
        for w in gaps.windows(2) {
            max_sep = max_sep.max(w[1].0 - w[0].1);
            bad += (w[1].0 - w[0].1 > cp.a + GAP_TOL) as usize;
        }
        n_gaps += gaps.len();
    }
    Report {
        passed: bad == 0 && n_gaps > 0,
        detail: format!("{n_gaps} gaps, a = {:.4}, min b-a = {min_len:.4}, max a'-b = {max_sep:.4}", cp.a),
    }
}

fn certificate() -> Report {
    let opts = CertificateOptions { tol_factor: CERT_TOL_FACTOR, ..CertificateOptions::default() };
    let mut passed = 0;
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut worst_flat: f64 = f64::NEG_INFINITY;
    for s in [0.75, 0.5] {
        let p = params(s);
        for seed in 0..20 {
            let field = sample_certificate_field(&p, &opts, StrengthLaw::Point(1.0), seed).unwrap();
            match compose_and_verify(&p, &field, &opts) {
                Ok(b) => {
                    let v = b.verification;
                    worst = worst.max(v.max_residual / v.f_star);
                    worst_flat = worst_flat.max(v.max_flat_residual / v.f_star);
                    passed += v.passed as usize;
                }
                Err(e) => println!("  s = {s}, seed {seed}: {e}"),
            }
        }
    }
    Report {
        passed: passed == 40,
        detail: format!("{passed}/40 certified, worst residual/F* {worst:.3e}, worst flat residual/F* {worst_flat:.3e}"),
    }
}

fn trapping() -> Report {
    let p = params(0.75);
    let opts = CertificateOptions::default();
    let (mut pinned, mut escaped, mut fields) = (0, 0, 0);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut seed = 100;
    while fields < 10 && seed < 200 {
        let field = sample_certificate_field(&p, &opts, StrengthLaw::Point(1.0), seed).unwrap();
        seed += 1;
        let Ok(bundle) = compose_and_verify(&p, &field, &opts) else { continue };
        if !bundle.verification.passed {
            continue;
        }
        fields += 1;
        let grid = PeriodicGrid::new(opts.period(&p), 1 << 10).unwrap();
        let cfg = EvolutionConfig { dt: 0.1, t_max: 2000.0, ..EvolutionConfig::new(grid, p.s, p.f_star, &field) };
        let mut excess = f64::NEG_INFINITY;
        let verdict = evolution::run_observed(&cfg, &field, 10, |_, u: &GridFunction| {
            for (x, v) in grid.points().zip(&u.values) {
                excess = excess.max(v - bundle.u_total.interpolate(x));
            }
        })
        .unwrap();
        worst_excess = worst_excess.max(excess);
        pinned += (verdict.outcome == Outcome::Pinned && excess <= 0.0) as usize;

        let strong = EvolutionConfig { force: 10.0 * field.force_upper_bound(), ..cfg };
        escaped += (evolution::run(&strong, &field).unwrap().outcome == Outcome::Escaped) as usize;
    }
    Report {
        passed: fields == 10 && pinned == 10 && escaped == 10,
        detail: format!("{pinned}/{fields} pinned below u_total, {escaped}/{fields} escaped, max u - u_total {worst_excess:.3e}"),
    }
}

fn degenerate() -> Report {
    let window = Window::new(0.0, 10.0, 1.5, 3.0).unwrap();
    let empty = ObstacleField::from_obstacles(vec![], BumpProfile::new(1.0, 1.5).unwrap(), window, StrengthLaw::Point(1.0))
        .unwrap()
        .with_wrap_x(true);
    let grid = PeriodicGrid::new(10.0, 128).unwrap();
    let s = FractionalOrder::new(0.75).unwrap();
    let force = 0.37;
    let cfg = EvolutionConfig { dt: 0.05, ..EvolutionConfig::new(grid, s, force, &empty) };
    let stepper = evolution::Stepper::new(&cfg);
    let mut u = GridFunction::zeros(grid);
    let mut worst: f64 = 0.0;
    for n in 1..=400 {
        u = stepper.step(&u, &empty).unwrap();
        let exact = force * cfg.dt * n as f64;
        worst = worst.max((u.mean() - exact).abs() / exact);
    }

    let rest = EvolutionConfig { force: 0.0, t_max: 10.0, ..cfg };
    let bump_field = sample_certificate_field(&params(0.75), &CertificateOptions::default(), StrengthLaw::Point(1.0), 3).unwrap();
    let rest_grid = PeriodicGrid::new(bump_field.window().width(), 256).unwrap();
    let zero = evolution::run(&EvolutionConfig::new(rest_grid, s, 0.0, &bump_field), &bump_field).unwrap();
    let flat_zero = evolution::run(&rest, &empty).unwrap();
    let stays = zero.final_profile.sup_norm() == 0.0 && flat_zero.final_profile.sup_norm() == 0.0;
    Report {
        passed: worst <= FREE_TRANSLATION_TOL && stays,
        detail: format!("zero-mode relative error {worst:.1e}, F = 0 stays zero: {stays}"),
    }
}

fn main() {
    // `cargo test` passes harness flags; a name filter that does not mention us skips the suite
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let secs = Duration::from_secs;
    let results = [
        check(1, "operator cross-validation", secs(10), operators),
        check(2, "cell solution", secs(60), cell_solutions),
        check(3, "percolation construction", secs(60), percolation),
        check(4, "counting bound", secs(300), counting),
        check(5, "intersection gaps", secs(30), gap_law),
        check(6, "supersolution certificate", secs(600), certificate),
        check(7, "dynamic trapping", secs(300), trapping),
        check(8, "degenerate dynamics", secs(1), degenerate),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
