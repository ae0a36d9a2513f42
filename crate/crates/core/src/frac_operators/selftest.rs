use super::grid::{FractionalOrder, GridFunction, PeriodicGrid};
use super::integral::PeriodicKernel;
use super::spectral::SpectralOperator;
use crate::error::Result;
use crate::quadrature::QuadOptions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// Σ_k a_k cos(2πkx/P) + b_k sin(2πkx/P), k = 1..=n.
#[derive(Debug, Clone)]
pub struct TrigPolynomial {
    pub period: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        let w = 2.0 * PI * x / self.period;
        self.cos
            .iter()
            .zip(&self.sin)
            .enumerate()
            .map(|(k, (a, b))| {
                let t = (k + 1) as f64 * w;
                a * t.cos() + b * t.sin()
            })
            .sum()
    }
}

pub fn random_trig_polynomial<R: Rng>(rng: &mut R, period: f64, max_modes: usize) -> TrigPolynomial {
    let n = rng.random_range(1..=max_modes);
    let cos = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sin = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    TrigPolynomial { period, cos, sin }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfTestReport {
    pub orders: Vec<f64>,
    /// Worst relative error per order, relative to the sup norm of the spectral result.
    pub max_rel_err: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Cross-checks spectral against singular-integral evaluation on random trig polynomials.
pub fn operator_self_test(seed: u64, n_polys: usize, n_points: usize, orders: &[f64], tol: f64) -> Result<SelfTestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = 2.0 * PI;
    let grid = PeriodicGrid::new(period, n_points)?;
    let quad = QuadOptions { abs_tol: 1e-9, rel_tol: 1e-10, max_panels: 100_000 };
    let mut max_rel_err = Vec::with_capacity(orders.len());
    for &s in orders {
        let order = FractionalOrder::new(s)?;
        let op = SpectralOperator::new(grid, order);
        let kernel = PeriodicKernel::new(order, period);
        let mut worst: f64 = 0.0;
        for _ in 0..n_polys {
            let p = random_trig_polynomial(&mut rng, period, 16.min(n_points / 2 - 1));
            let f = GridFunction::from_fn(grid, |x| p.eval(x));
            let spec = op.apply(&f)?;
            let scale = spec.sup_norm().max(f64::MIN_POSITIVE);
            for (j, x) in grid.points().enumerate() {
                let v = kernel.apply(|y| p.eval(y), x, 1e-3, quad)?;
                worst = worst.max((v.value - spec.values[j]).abs() / scale);
            }
        }
        max_rel_err.push(worst);
    }
    let passed = max_rel_err.iter().all(|e| *e < tol);
    Ok(SelfTestReport { orders: orders.to_vec(), max_rel_err, tolerance: tol, passed })
}
