//! Singular-integral form (−Δ)^s f(x) = C_{1,s} ∫_0^∞ (2f(x) − f(x+y) − f(x−y)) y^{−1−2s} dy.

use super::grid::FractionalOrder;
use crate::error::Result;
use crate::quadrature::{integrate_breaks, second_derivative, QuadOptions};
use crate::special::{frac_constant, hurwitz_zeta};

/// What is known about f beyond `far_cut`, used to close the integral analytically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// |f| ≤ sup_abs; the f(x) part of the tail is exact, the rest is bounded.
    Bounded { sup_abs: f64 },
    /// f(x−y) = left and f(x+y) = right for y ≥ far_cut; the tail is exact.
    Constant { left: f64, right: f64 },
    /// |f(z)| ≤ c(1 + |z|^alpha) with alpha < 2s; bound only.
    Growth { c: f64, alpha: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct IntegralOptions {
    pub near_radius: f64,
    pub far_cut: f64,
    /// Longest initial panel beyond the log-spaced near region.
    pub panel_len: f64,
    pub tail: TailModel,
    pub quad: QuadOptions,
}

impl IntegralOptions {
    pub fn new(scale: f64, far_cut: f64, tail: TailModel) -> Self {
        IntegralOptions {
            near_radius: 1e-3 * scale,
            far_cut,
            panel_len: scale,
            tail,
            quad: QuadOptions { abs_tol: 1e-11, rel_tol: 1e-11, max_panels: 400_000 },
        }
    }
}

/// Value of (−Δ)^s f(x) and an error bound covering quadrature, near-field and tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralValue {
    pub value: f64,
    pub error_bound: f64,
}

fn log_then_uniform(r: f64, end: f64, panel: f64) -> Vec<f64> {
    let mut b = vec![r];
    let mut y = r;
    while y < end {
        let step = y.min(panel);
        y = (y + step).min(end);
        b.push(y);
    }
    b
}

/// Near-field closure. With J(ρ) the numerical integral from ρ outward, the Taylor
/// approximation −f''(x)ρ^{2−2s}/(2−2s) + J(ρ) has error O(ρ^{4−2s}); evaluating at r and r/2
/// and extrapolating removes that term. Returns (value of the near part on [0, r] after
/// extrapolation, its error estimate).
fn near_field<F: Fn(f64) -> f64, K: Fn(f64) -> f64>(
    f: &F,
    x: f64,
    fx: f64,
    s: f64,
    r: f64,
    kernel: K,
    quad: QuadOptions,
) -> Result<(f64, f64)> {
    let (d2, err) = second_derivative(f, x, r);
    let p = 2.0 - 2.0 * s;
    let t_full = -d2 * r.powf(p) / p;
    let t_half = -d2 * (0.5 * r).powf(p) / p;
    let inner = integrate_breaks(|y| (2.0 * fx - f(x + y) - f(x - y)) * kernel(y), &[0.5 * r, r], quad)?;
    let fine = t_half + inner.value;
    let w = 2f64.powf(4.0 - 2.0 * s);
    let value = (w * fine - t_full) / (w - 1.0);
    Ok((value, err * r.powf(p) / p + (value - fine).abs() * 1e-3 + inner.error))
}

/// Pointwise (−Δ)^s f(x) on the real line.
pub fn apply_pointwise_integral<F: Fn(f64) -> f64>(
    f: F,
    x: f64,
    order: FractionalOrder,
    opts: &IntegralOptions,
) -> Result<IntegralValue> {
    let s = order.s();
    let r = opts.near_radius;
    let fx = f(x);
    let sig = 1.0 + 2.0 * s;
    let (near, near_err) = near_field(&f, x, fx, s, r, |y: f64| y.powf(-sig), opts.quad)?;
    let breaks = log_then_uniform(r, opts.far_cut, opts.panel_len);
    let mid = integrate_breaks(|y| (2.0 * fx - f(x + y) - f(x - y)) * y.powf(-sig), &breaks, opts.quad)?;
    let t = opts.far_cut;
    let tw = t.powf(-2.0 * s) / (2.0 * s);
    let (tail, tail_err) = match opts.tail {
        TailModel::Bounded { sup_abs } => (2.0 * fx * tw, 2.0 * sup_abs * tw),
        TailModel::Constant { left, right } => ((2.0 * fx - left - right) * tw, 0.0),
        TailModel::Growth { c, alpha } => {
            assert!(alpha < 2.0 * s, "growth exponent must be below 2s");
            // |f(x±y)| ≤ c(1 + (|x|+y)^α) ≤ c(1 + (1+|x|/t)^α y^α) for y ≥ t
            let g = (1.0 + x.abs() / t).powf(alpha);
            let bound = 2.0 * c * (tw + g * t.powf(alpha - 2.0 * s) / (2.0 * s - alpha));
            (2.0 * fx * tw, bound)
        }
    };
    let c = frac_constant(s);
    Ok(IntegralValue {
        value: c * (near + mid.value + tail),
        error_bound: c * (near_err + mid.error + tail_err),
    })
}

/// Periodized kernel Σ_m |y + mP|^{−1−2s} on [0, P/2]: the singular term plus a
/// Chebyshev fit of the smooth Hurwitz-zeta remainder.
#[derive(Debug, Clone)]
pub struct PeriodicKernel {
    s: f64,
    period: f64,
    cheb: Vec<f64>,
}

const CHEB_DEGREE: usize = 40;

impl PeriodicKernel {
    pub fn new(order: FractionalOrder, period: f64) -> Self {
        let s = order.s();
        let sig = 1.0 + 2.0 * s;
        let pw = period.powf(-sig);
        let rem = |y: f64| pw * (hurwitz_zeta(sig, 1.0 + y / period) + hurwitz_zeta(sig, 1.0 - y / period));
        let n = CHEB_DEGREE + 1;
        let half = 0.5 * period;
        let nodes: Vec<f64> = (0..n)
            .map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos())
            .collect();
        let vals: Vec<f64> = nodes.iter().map(|&t| rem(0.5 * half * (t + 1.0))).collect();
        let cheb = (0..n)
            .map(|j| {
                let sum: f64 = (0..n)
                    .map(|k| vals[k] * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                    .sum();
                2.0 * sum / n as f64
            })
            .collect();
        PeriodicKernel { s, period, cheb }
    }

    pub fn eval(&self, y: f64) -> f64 {
        let t = 4.0 * y / self.period - 1.0;
        // Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.cheb.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        let smooth = t * b1 - b2 + 0.5 * self.cheb[0];
        y.powf(-1.0 - 2.0 * self.s) + smooth
    }

    /// (−Δ)^s f(x) for P-periodic f; no tail, the integral closes on [0, P/2].
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F, x: f64, near_radius: f64, quad: QuadOptions) -> Result<IntegralValue> {
        let s = self.s;
        let fx = f(x);
        let (near, near_err) = near_field(&f, x, fx, s, near_radius, |y| self.eval(y), quad)?;
        let half = 0.5 * self.period;
        let breaks = log_then_uniform(near_radius, half, half / 8.0);
        let mid = integrate_breaks(|y| (2.0 * fx - f(x + y) - f(x - y)) * self.eval(y), &breaks, quad)?;
        let c = frac_constant(s);
        Ok(IntegralValue { value: c * (near + mid.value), error_bound: c * (near_err + mid.error) })
    }
}

/// Pointwise (−Δ)^s f(x) for a `period`-periodic f.
pub fn apply_periodic_integral<F: Fn(f64) -> f64>(
    f: F,
    x: f64,
    order: FractionalOrder,
    period: f64,
    near_radius: f64,
) -> Result<IntegralValue> {
    let quad = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-12, max_panels: 100_000 };
    PeriodicKernel::new(order, period).apply(f, x, near_radius, quad)
}
