use super::grid::{FractionalOrder, GridFunction, PeriodicGrid};
use crate::error::{check_finite, Result};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Forward/inverse complex FFT pair for real periodic data.
#[derive(Clone)]
pub struct FftPair {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("n", &self.n).finish()
    }
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse transform, normalized, real part.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut spec);
        let scale = 1.0 / self.n as f64;
        spec.iter().map(|c| c.re * scale).collect()
    }

    /// Applies a real, even Fourier multiplier given per FFT bin.
    pub fn apply_multiplier(&self, values: &[f64], symbol: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(values);
        for (c, m) in spec.iter_mut().zip(symbol) {
            *c *= *m;
        }
        self.inverse_real(spec)
    }
}

/// (−Δ)^s on a fixed periodic grid, with plans and multipliers cached for repeated use.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    grid: PeriodicGrid,
    order: FractionalOrder,
    symbol: Vec<f64>,
    fft: FftPair,
}

impl SpectralOperator {
    pub fn new(grid: PeriodicGrid, order: FractionalOrder) -> Self {
        let two_s = 2.0 * order.s();
        let symbol = (0..grid.n_points()).map(|j| grid.wavenumber(j).abs().powf(two_s)).collect();
        SpectralOperator { grid, order, symbol, fft: FftPair::new(grid.n_points()) }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    /// Multiplier |2πk/P|^{2s} per FFT bin.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn fft(&self) -> &FftPair {
        &self.fft
    }

    pub fn apply_values(&self, values: &[f64]) -> Vec<f64> {
        self.fft.apply_multiplier(values, &self.symbol)
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        assert_eq!(f.grid, self.grid, "grid mismatch");
        check_finite(&f.values)?;
        Ok(GridFunction { grid: self.grid, values: self.apply_values(&f.values) })
    }
}

/// Returns (−Δ)^s f; negate for A = −(−Δ)^s.
pub fn apply_spectral(f: &GridFunction, order: FractionalOrder) -> Result<GridFunction> {
    SpectralOperator::new(f.grid, order).apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_annihilated() {
        let g = PeriodicGrid::new(5.0, 64).unwrap();
        let f = GridFunction::from_fn(g, |_| 2.5);
        let out = apply_spectral(&f, FractionalOrder::new(0.75).unwrap()).unwrap();
        assert!(out.sup_norm() < 1e-14);
    }

    #[test]
    fn single_mode() {
        let p = 3.0;
        let g = PeriodicGrid::new(p, 64).unwrap();
        let f = GridFunction::from_fn(g, |x| (2.0 * PI * x / p).cos());
        let out = apply_spectral(&f, FractionalOrder::new(0.5).unwrap()).unwrap();
        for (x, v) in g.points().zip(&out.values) {
            assert!((v - 2.0 * PI / p * (2.0 * PI * x / p).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let g = PeriodicGrid::new(1.0, 8).unwrap();
        let f = GridFunction { grid: g, values: vec![0.0, 1.0, f64::INFINITY, 0.0, 0.0, 0.0, 0.0, 0.0] };
        assert!(apply_spectral(&f, FractionalOrder::new(0.5).unwrap()).is_err());
    }
}
