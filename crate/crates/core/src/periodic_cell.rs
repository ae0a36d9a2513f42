//! Periodic cell problem A ṽ = g̃ on [−a, a) and its mollified counterpart v = η_{δ/2} ∗ ṽ.

use crate::error::{config, Result};
use crate::frac_operators::{FftPair, FractionalOrder, GridFunction, Mollifier, PeriodicGrid, SpectralOperator};
use crate::frac_operators::PeriodicKernel;
use crate::quadrature::QuadOptions;
use crate::special::{zeta, ClausenSeries};
use rustfft::num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellParams {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub f2: f64,
    pub f1: f64,
    pub rho: f64,
    pub s: FractionalOrder,
}

pub fn make_cell_params(a: f64, b: f64, delta: f64, f2: f64, s: FractionalOrder) -> Result<CellParams> {
    if !(b > 0.0 && a > 4.0 * b) {
        return config(format!("need a > 4b > 0, got a = {a}, b = {b}"));
    }
    if !(delta > 0.0 && delta < b.min(1.0)) {
        return config(format!("need 0 < delta < min(1, b), got delta = {delta}, b = {b}"));
    }
    if !(f2 > 0.0 && f2.is_finite()) {
        return config(format!("need F2 > 0, got {f2}"));
    }
    let rho = b + 0.5 * delta;
    let f1 = rho * f2 / (a - rho);
    Ok(CellParams { a, b, delta, f2, f1, rho, s })
}

impl CellParams {
    pub fn period(&self) -> f64 {
        2.0 * self.a
    }

    pub fn mollifier(&self) -> Mollifier {
        Mollifier::new(0.5 * self.delta).expect("delta > 0")
    }

    /// x reduced to [−a, a).
    pub fn reduce(&self, x: f64) -> f64 {
        (x + self.a).rem_euclid(2.0 * self.a) - self.a
    }

    /// |2a^{2s}(F1+F2)/π^{1+2s}|, the envelope of the cosine coefficients.
    fn envelope(&self) -> f64 {
        let s = self.s.s();
        2.0 * self.a.powf(2.0 * s) * (self.f1 + self.f2) / PI.powf(1.0 + 2.0 * s)
    }
}

/// g̃: F2 on [−ρ, ρ], −F1 on the rest of the period.
pub fn eval_g_tilde(p: &CellParams, x: f64) -> f64 {
    if p.reduce(x).abs() <= p.rho { p.f2 } else { -p.f1 }
}

/// g = η_{δ/2} ∗ g̃, exact up to the tabulated mollifier CDF.
pub fn eval_g(p: &CellParams, x: f64) -> f64 {
    let m = p.mollifier();
    let y = p.reduce(x);
    // ρ + δ/2 < a, so only the images at 0 and ±2a can reach y
    let mass: f64 = [-2.0 * p.a, 0.0, 2.0 * p.a]
        .iter()
        .map(|&c| m.cdf(y - c + p.rho) - m.cdf(y - c - p.rho))
        .sum();
    -p.f1 + (p.f1 + p.f2) * mass
}

/// Truncated cosine series ṽ(x) = Σ_{k≤n} c_k cos(kπx/a) and the mollified series for v.
#[derive(Debug, Clone, Serialize)]
pub struct FourierProfile {
    pub params: CellParams,
    pub n_modes: usize,
    /// c_k for k = 1..=n_modes
    pub coefficients: Vec<f64>,
    /// c_k · η̂_{δ/2}(kπ/a)
    pub smoothed: Vec<f64>,
    /// Σ_{k>n} envelope · k^{−1−2s} ≤ envelope · n^{−2s}/(2s)
    pub tail_bound: f64,
}

/// Smallest power of two n ≥ 16 with tail bound below 1e-3·F2·ρ.
pub fn default_n_modes(p: &CellParams) -> usize {
    let s = p.s.s();
    let target = 1e-3 * p.f2 * p.rho;
    let mut n = 16usize;
    while p.envelope() * (n as f64).powf(-2.0 * s) / (2.0 * s) >= target && n < (1 << 24) {
        n *= 2;
    }
    n
}

pub fn build_v_profile(p: &CellParams, n_modes: usize) -> Result<FourierProfile> {
    if n_modes < 16 {
        return config(format!("n_modes must be at least 16, got {n_modes}"));
    }
    let s = p.s.s();
    let env = p.envelope();
    let coefficients: Vec<f64> = (1..=n_modes)
        .map(|k| {
            let kf = k as f64;
            -env * (kf * PI * p.rho / p.a).sin() / kf.powf(1.0 + 2.0 * s)
        })
        .collect();
    let sym = p.mollifier().symbols_periodic(p.period(), n_modes);
    let smoothed = coefficients.iter().zip(&sym).map(|(c, m)| c * m).collect();
    let tail_bound = env * (n_modes as f64).powf(-2.0 * s) / (2.0 * s);
    Ok(FourierProfile { params: *p, n_modes, coefficients, smoothed, tail_bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// ṽ
    Tilde,
    /// v = η_{δ/2} ∗ ṽ
    Smoothed,
}

impl FourierProfile {
    fn coeffs(&self, which: Which) -> &[f64] {
        match which {
            Which::Tilde => &self.coefficients,
            Which::Smoothed => &self.smoothed,
        }
    }

    pub fn eval(&self, which: Which, x: f64) -> f64 {
        let w = PI * x / self.params.a;
        self.coeffs(which).iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * w).cos()).sum()
    }

    pub fn derivative(&self, which: Which, x: f64) -> f64 {
        let w = PI / self.params.a;
        self.coeffs(which)
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let kw = (k + 1) as f64 * w;
                -c * kw * (kw * x).sin()
            })
            .sum()
    }

    /// Samples the series on a grid of period 2a; modes above Nyquist are folded, so the
    /// values are exact for the truncated series.
    pub fn sample(&self, which: Which, grid: &PeriodicGrid) -> Result<GridFunction> {
        self.sample_with(which, grid, 0)
    }

    /// Samples the `deriv`-th derivative (0 or 1).
    pub fn sample_with(&self, which: Which, grid: &PeriodicGrid, deriv: u32) -> Result<GridFunction> {
        let period = self.params.period();
        if (grid.period() - period).abs() > 1e-12 * period {
            return config(format!("grid period {} differs from cell period {period}", grid.period()));
        }
        let n = grid.n_points();
        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        let x0 = grid.origin();
        for (i, c) in self.coeffs(which).iter().enumerate() {
            let k = i + 1;
            let kw = k as f64 * PI / self.params.a;
            // c cos(kw x) = c/2 (e^{ikwx} + e^{−ikwx}); derivative multiplies by ±i kw
            let phase = Complex64::from_polar(0.5 * c, kw * x0);
            let amp = if deriv == 1 { phase * Complex64::new(0.0, kw) } else { phase };
            spec[k % n] += amp;
            spec[(n - k % n) % n] += amp.conj();
        }
        let fft = FftPair::new(n);
        let values = fft.inverse_real(spec).into_iter().map(|v| v * n as f64).collect();
        GridFunction::new(*grid, values)
    }

    /// Profile CSV: `x,v,g` over one period.
    pub fn write_csv<W: Write>(&self, grid_n: usize, mut w: W) -> Result<()> {
        let p = &self.params;
        let grid = PeriodicGrid::with_origin(p.period(), grid_n, -p.a)?;
        let v = self.sample(Which::Smoothed, &grid)?;
        writeln!(w, "# pinlab cell-profile v1")?;
        writeln!(w, "x,v,g")?;
        for (x, vx) in grid.points().zip(&v.values) {
            writeln!(w, "{x:.16e},{vx:.16e},{:.16e}", eval_g(p, x))?;
        }
        Ok(())
    }
}

/// Sup-norm bound on ṽ (and hence on v): the ζ(2s) form for s > 1/2, the logarithmic form at s = 1/2.
pub fn linf_bound(p: &CellParams) -> f64 {
    let s = p.s.s();
    let j = p.f1 + p.f2;
    if p.s.is_half() {
        2.0 * j * p.rho * (2.0 + p.a.ln() - (PI * p.rho).ln()) / PI
    } else {
        2.0 * j / PI.powf(2.0 * s) * zeta(2.0 * s) * p.a.powf(2.0 * s - 1.0) * p.rho
    }
}

/// The untruncated ṽ, summed in closed form:
/// ṽ(x) = −(E/2)[S_{1+2s}(α+θ) + S_{1+2s}(α−θ)] and ṽ'(x) = (Eπ/2a)[C_{2s}(θ−α) − C_{2s}(θ+α)]
/// with θ = πx/a, α = πρ/a and E the coefficient envelope.
#[derive(Debug, Clone)]
pub struct ExactTilde {
    params: CellParams,
    value_series: ClausenSeries,
    slope_series: ClausenSeries,
}

impl ExactTilde {
    pub fn new(params: &CellParams) -> Self {
        let s = params.s.s();
        ExactTilde {
            params: *params,
            value_series: ClausenSeries::new(1.0 + 2.0 * s),
            slope_series: ClausenSeries::new(2.0 * s),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = &self.params;
        let (theta, alpha) = (PI * x / p.a, PI * p.rho / p.a);
        -0.5 * p.envelope() * (self.value_series.eval(alpha + theta).1 + self.value_series.eval(alpha - theta).1)
    }

    /// Infinite at ±ρ when s = 1/2.
    pub fn derivative(&self, x: f64) -> f64 {
        let p = &self.params;
        let (theta, alpha) = (PI * x / p.a, PI * p.rho / p.a);
        0.5 * p.envelope() * PI / p.a * (self.slope_series.eval(theta - alpha).0 - self.slope_series.eval(theta + alpha).0)
    }
}

/// v and v' tabulated on a fine grid of [0, 2a), evaluated by cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct TabulatedProfile {
    a: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    pub sup_abs: f64,
}

impl TabulatedProfile {
    /// Tabulates the smoothed series on 2^log2_n points.
    pub fn new(profile: &FourierProfile, log2_n: u32) -> Result<Self> {
        let a = profile.params.a;
        let grid = PeriodicGrid::new(2.0 * a, 1usize << log2_n)?;
        let v = profile.sample_with(Which::Smoothed, &grid, 0)?;
        let d = profile.sample_with(Which::Smoothed, &grid, 1)?;
        let sup_abs = v.sup_norm();
        Ok(TabulatedProfile { a, step: grid.spacing(), values: v.values, slopes: d.values, sup_abs })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    fn locate(&self, x: f64) -> (usize, usize, f64) {
        let n = self.values.len();
        let t = x.rem_euclid(2.0 * self.a) / self.step;
        let i = (t.floor() as usize).min(n - 1);
        (i, (i + 1) % n, t - i as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, j, w) = self.locate(x);
        let h = self.step;
        let w2 = w * w;
        let w3 = w2 * w;
        (2.0 * w3 - 3.0 * w2 + 1.0) * self.values[i]
            + (w3 - 2.0 * w2 + w) * h * self.slopes[i]
            + (-2.0 * w3 + 3.0 * w2) * self.values[j]
            + (w3 - w2) * h * self.slopes[j]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (i, j, w) = self.locate(x);
        let h = self.step;
        let w2 = w * w;
        ((6.0 * w2 - 6.0 * w) * (self.values[i] - self.values[j])) / h
            + (3.0 * w2 - 4.0 * w + 1.0) * self.slopes[i]
            + (3.0 * w2 - 2.0 * w) * self.slopes[j]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneReport {
    pub passed: bool,
    pub min_slope_tilde: f64,
    pub min_slope_smoothed: f64,
    /// worst finite difference on the reflected half [−a, 0] (should be negative)
    pub max_reflected_slope: f64,
    pub derivative_at_0: f64,
    pub derivative_at_a: f64,
    pub first_violation: Option<f64>,
}

/// Checks that ṽ and v increase on [0, a]. ṽ' is evaluated exactly and must be positive at
/// every interior grid point; the truncated series for v is checked by finite differences
/// (> −1e−12, strictly positive in the interior).
pub fn check_monotone(profile: &FourierProfile, grid_n: usize) -> Result<MonotoneReport> {
    if grid_n < 256 {
        return config(format!("grid_n must be at least 256, got {grid_n}"));
    }
    let a = profile.params.a;
    let grid = PeriodicGrid::with_origin(2.0 * a, (2 * grid_n).next_power_of_two(), -a)?;
    let n = grid.n_points();
    let half = n / 2;
    let dx = grid.spacing();
    let mut first_violation = None;
    let mut max_reflected = f64::NEG_INFINITY;

    let exact = ExactTilde::new(&profile.params);
    let mut min_tilde = f64::INFINITY;
    for i in 1..half {
        let x = i as f64 * dx;
        let d = exact.derivative(x);
        min_tilde = min_tilde.min(d);
        if !(d > 0.0) {
            first_violation.get_or_insert(x);
        }
        max_reflected = max_reflected.max(exact.derivative(-x));
    }

    let f = profile.sample(Which::Smoothed, &grid)?;
    let mut min_smoothed = f64::INFINITY;
    // indices half..n cover [0, a]
    for i in half..n {
        let next = if i + 1 == n { f.values[0] } else { f.values[i + 1] };
        let d = next - f.values[i];
        min_smoothed = min_smoothed.min(d / dx);
        if d <= -1e-12 || (d <= 0.0 && i > half && i + 1 < n) {
            first_violation.get_or_insert(grid.x(i));
        }
    }
    for i in 0..half {
        max_reflected = max_reflected.max((f.values[i + 1] - f.values[i]) / dx);
    }
    Ok(MonotoneReport {
        passed: first_violation.is_none() && max_reflected < 1e-12,
        min_slope_tilde: min_tilde,
        min_slope_smoothed: min_smoothed,
        max_reflected_slope: max_reflected,
        derivative_at_0: exact.derivative(0.0),
        derivative_at_a: exact.derivative(a),
        first_violation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CellResidualReport {
    pub max_error: f64,
    pub tail_bound: f64,
    pub excluded_spacings: f64,
    pub passed: bool,
}

/// max |Aṽ − g̃| on a 2·n_modes grid, excluding 3 spacings around ±ρ; passes when below 10·tail_bound.
pub fn spectral_residual_check(profile: &FourierProfile) -> Result<CellResidualReport> {
    let p = &profile.params;
    let n = (2 * profile.n_modes).next_power_of_two();
    let grid = PeriodicGrid::with_origin(p.period(), n, -p.a)?;
    let v = profile.sample(Which::Tilde, &grid)?;
    let av = SpectralOperator::new(grid, p.s).apply(&v)?;
    let excl = 3.0 * grid.spacing();
    let mut max_error: f64 = 0.0;
    for (j, x) in grid.points().enumerate() {
        let y = p.reduce(x);
        if (y.abs() - p.rho).abs() <= excl {
            continue;
        }
        max_error = max_error.max((-av.values[j] - eval_g_tilde(p, x)).abs());
    }
    Ok(CellResidualReport {
        max_error,
        tail_bound: profile.tail_bound,
        excluded_spacings: 3.0,
        passed: max_error < 10.0 * profile.tail_bound,
    })
}

/// max |Aṽ − g̃| for the untruncated ṽ, with A applied as a periodic singular integral at
/// `n_points` equispaced points, skipping those within 3 point spacings of ±ρ. Independent of
/// the spectral route, which on a truncated series only ever sees the partial Fourier sum of
/// g̃ and so keeps an O(F1+F2) Gibbs error next to the jumps. Passes below 10·tail_bound.
pub fn integral_residual_check(profile: &FourierProfile, n_points: usize) -> Result<CellResidualReport> {
    let p = &profile.params;
    if n_points < 8 {
        return config(format!("need at least 8 check points, got {n_points}"));
    }
    let exact = ExactTilde::new(p);
    let kernel = PeriodicKernel::new(p.s, p.period());
    // ṽ has kinks in its higher derivatives at ±ρ, so ask the quadrature for 1e−10 only
    let quad = QuadOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_panels: 200_000 };
    let spacing = p.period() / n_points as f64;
    let mut max_error: f64 = 0.0;
    for j in 0..n_points {
        let x = -p.a + (j as f64 + 0.5) * spacing;
        if (x.abs() - p.rho).abs() <= 3.0 * spacing {
            continue;
        }
        let near = 1e-3 * (x.abs() - p.rho).abs().min(p.a);
        let lap = kernel.apply(|y| exact.eval(y), x, near, quad)?;
        max_error = max_error.max((-lap.value - eval_g_tilde(p, x)).abs() + lap.error_bound);
    }
    Ok(CellResidualReport {
        max_error,
        tail_bound: profile.tail_bound,
        excluded_spacings: 3.0,
        passed: max_error < 10.0 * profile.tail_bound,
    })
}
