use super::grid::{GridFunction, PeriodicGrid};
use super::spectral::FftPair;
use crate::error::{config, Result};
use crate::quadrature::{golden_max, integrate, QuadOptions};
use std::sync::OnceLock;

const CDF_INTERVALS: usize = 4096;

/// Unnormalized unit bump exp(−1/(1−t²)) on (−1, 1).
fn bump(t: f64) -> f64 {
    let u = 1.0 - t * t;
    if u <= 0.0 { 0.0 } else { (-1.0 / u).exp() }
}

fn bump_derivative(t: f64) -> f64 {
    let u = 1.0 - t * t;
    if u <= 0.0 { 0.0 } else { -2.0 * t / (u * u) * (-1.0 / u).exp() }
}

struct UnitKernel {
    norm: f64,
    cdf: Vec<f64>,
    max_slope: f64,
}

fn unit_kernel() -> &'static UnitKernel {
    static UNIT: OnceLock<UnitKernel> = OnceLock::new();
    UNIT.get_or_init(|| {
        let opts = QuadOptions { abs_tol: 1e-18, rel_tol: 1e-15, max_panels: 200 };
        let step = 2.0 / CDF_INTERVALS as f64;
        let mut cdf = Vec::with_capacity(CDF_INTERVALS + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 0..CDF_INTERVALS {
            let a = -1.0 + i as f64 * step;
            acc += integrate(bump, a, a + step, opts).expect("bump quadrature").value;
            cdf.push(acc);
        }
        let norm = acc;
        for c in cdf.iter_mut() {
            *c /= norm;
        }
        // |η'| is even with a single hump on (0, 1)
        let (_, m) = golden_max(|t| bump_derivative(t).abs(), 0.0, 1.0, 1e-12);
        UnitKernel { norm, cdf, max_slope: m / norm }
    })
}

/// Symmetric unit-mass C∞ kernel η_r(x) = η(x/r)/r supported on [−r, r].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    radius: f64,
}

impl Mollifier {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return config(format!("mollifier radius must be positive, got {radius}"));
        }
        Ok(Mollifier { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Normalization ∫ exp(−1/(1−t²)) dt over (−1, 1).
    pub fn unit_norm() -> f64 {
        unit_kernel().norm
    }

    pub fn density(&self, x: f64) -> f64 {
        bump(x / self.radius) / (unit_kernel().norm * self.radius)
    }

    pub fn density_derivative(&self, x: f64) -> f64 {
        bump_derivative(x / self.radius) / (unit_kernel().norm * self.radius * self.radius)
    }

    /// sup |η_r'| = sup|η₁'|/r².
    pub fn max_abs_derivative(&self) -> f64 {
        unit_kernel().max_slope / (self.radius * self.radius)
    }

    /// Φ_r(x) = ∫_{−∞}^x η_r, by cubic Hermite interpolation of a tabulated unit CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        let t = x / self.radius;
        if t <= -1.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let uk = unit_kernel();
        let h = 2.0 / CDF_INTERVALS as f64;
        let pos = (t + 1.0) / h;
        let i = (pos.floor() as usize).min(CDF_INTERVALS - 1);
        let w = pos - i as f64;
        let t0 = -1.0 + i as f64 * h;
        let (y0, y1) = (uk.cdf[i], uk.cdf[i + 1]);
        let d0 = bump(t0) / uk.norm * h;
        let d1 = bump(t0 + h) / uk.norm * h;
        let w2 = w * w;
        let w3 = w2 * w;
        (2.0 * w3 - 3.0 * w2 + 1.0) * y0 + (w3 - 2.0 * w2 + w) * d0 + (-2.0 * w3 + 3.0 * w2) * y1 + (w3 - w2) * d1
    }

    /// Fourier symbol ∫ η_r(t) cos(ξt) dt by adaptive quadrature.
    pub fn symbol(&self, xi: f64) -> f64 {
        let uk = unit_kernel();
        let w = xi * self.radius;
        let panels = 8 + (w.abs() / 2.0).ceil() as usize;
        let breaks: Vec<f64> = (0..=panels).map(|i| i as f64 / panels as f64).collect();
        let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_panels: 20 * panels };
        let e = crate::quadrature::integrate_breaks(|t| bump(t) * (w * t).cos(), &breaks, opts)
            .expect("mollifier symbol quadrature");
        2.0 * e.value / uk.norm
    }

    /// Symbols at ξ_k = 2πk/period for k = 1..=n_modes, from the FFT of the finely sampled kernel.
    pub fn symbols_periodic(&self, period: f64, n_modes: usize) -> Vec<f64> {
        let per_radius = 256.0;
        let by_resolution = (per_radius * period / self.radius).ceil() as usize;
        let n = (2 * n_modes + 2).max(by_resolution).max(64).next_power_of_two();
        let dx = period / n as f64;
        let mut samples = vec![0.0; n];
        let reach = ((self.radius / dx).ceil() as usize).min(n / 2);
        samples[0] = self.density(0.0) * dx;
        for j in 1..=reach {
            let w = self.density(j as f64 * dx) * dx;
            samples[j] += w;
            samples[n - j] += w;
        }
        let spec = FftPair::new(n).forward(&samples);
        spec[1..=n_modes].iter().map(|c| c.re).collect()
    }

    /// Discrete kernel on a grid's FFT bins, renormalized to unit sum.
    pub fn grid_weights(&self, grid: &PeriodicGrid) -> Vec<f64> {
        let n = grid.n_points();
        let dx = grid.spacing();
        let mut w = vec![0.0; n];
        for (j, wj) in w.iter_mut().enumerate() {
            let d = grid.mode(j).unsigned_abs() as f64 * dx;
            *wj = bump(d / self.radius);
        }
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            w[0] = 1.0;
        } else {
            w.iter_mut().for_each(|v| *v /= total);
        }
        w
    }

    /// Multiplier per FFT bin for periodic convolution on `grid`.
    pub fn grid_symbol(&self, grid: &PeriodicGrid) -> Vec<f64> {
        let spec = FftPair::new(grid.n_points()).forward(&self.grid_weights(grid));
        spec.iter().map(|c| c.re).collect()
    }
}

/// Periodic convolution with the mollifier.
pub fn mollify(f: &GridFunction, m: &Mollifier) -> Result<GridFunction> {
    if m.radius() >= 0.5 * f.grid.period() {
        return config(format!(
            "mollifier radius {} must be below half the period {}",
            m.radius(),
            0.5 * f.grid.period()
        ));
    }
    crate::error::check_finite(&f.values)?;
    let symbol = m.grid_symbol(&f.grid);
    let values = FftPair::new(f.grid.n_points()).apply_multiplier(&f.values, &symbol);
    Ok(GridFunction { grid: f.grid, values })
}
