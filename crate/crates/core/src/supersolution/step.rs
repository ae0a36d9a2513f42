use super::{BoxLayout, PinnedSelection};
use crate::error::{config, Result};
use crate::flat_percolation::LambdaField;
use crate::frac_operators::{GridFunction, Mollifier, PeriodicGrid};

/// Piecewise-constant heights Λ(k) on the cells [c_k − (l+d)/2, c_k + (l+d)/2), mollified at
/// radius d/2. Each jump sits at a gap midpoint, so u_step = Λ(k) exactly on Q_k.
#[derive(Debug, Clone)]
pub struct StepFunction {
    layout: BoxLayout,
    values: Vec<f64>,
    /// Boxes 0..n tile a torus of length n(l+d).
    wrap: bool,
    alpha: f64,
}

/// Heights λ(k)·h from a constructed surface.
pub fn build_u_step(lambda: &LambdaField, layout: &BoxLayout) -> Result<StepFunction> {
    lambda.constructed()?;
    let values = lambda.lambda.iter().map(|&j| j as f64 * layout.h).collect();
    StepFunction::new(values, *layout, lambda.lattice.wrap, lambda.growth.alpha())
}

impl StepFunction {
    /// Checks |Λ(k1) − Λ(k2)| ≤ 2h|k1 − k2|^α over all pairs (cyclic distance when wrapped).
    pub fn new(values: Vec<f64>, layout: BoxLayout, wrap: bool, alpha: f64) -> Result<Self> {
        if values.is_empty() {
            return config("step function needs at least one box");
        }
        let n = values.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut dist = j - i;
                if wrap {
                    dist = dist.min(n - dist);
                }
                let allowed = 2.0 * layout.h * (dist as f64).powf(alpha) * (1.0 + 1e-12);
                if (values[i] - values[j]).abs() > allowed {
                    return config(format!(
                        "growth bound violated between boxes {i} and {j}: |{} - {}| > {allowed}",
                        values[i], values[j]
                    ));
                }
            }
        }
        Ok(StepFunction { layout, values, wrap, alpha })
    }

    /// Anchored at the selected obstacle heights, Λ(k) = y_{I(k)}.
    pub fn anchored(selection: &PinnedSelection, layout: &BoxLayout, alpha: f64) -> Result<Self> {
        let values = selection.entries.iter().map(|e| e.y).collect();
        StepFunction::new(values, *layout, selection.period.is_some(), alpha)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn mollifier(&self) -> Mollifier {
        Mollifier::new(0.5 * self.layout.d).expect("d > 0")
    }

    fn value(&self, k: i64) -> f64 {
        let n = self.values.len() as i64;
        let k = if self.wrap { k.rem_euclid(n) } else { k.clamp(0, n - 1) };
        self.values[k as usize]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pitch = self.layout.pitch();
        let t = (x - self.layout.origin) / pitch;
        let k = t.round() as i64;
        let base = self.value(k);
        // nearest gap midpoint and the box on its other side
        let (m, other) = if t >= k as f64 { (k as f64 + 0.5, k + 1) } else { (k as f64 - 0.5, k - 1) };
        let off = x - (self.layout.origin + m * pitch);
        let half = 0.5 * self.layout.d;
        if off.abs() >= half {
            return base;
        }
        let (left, right) = if other > k { (base, self.value(other)) } else { (self.value(other), base) };
        left + (right - left) * self.mollifier().cdf(off)
    }

    pub fn sample(&self, grid: &PeriodicGrid) -> GridFunction {
        GridFunction::from_fn(*grid, |x| self.eval(x))
    }

    /// sup |u_step''| = max jump · sup|η_{d/2}'|.
    pub fn second_derivative_sup(&self) -> f64 {
        let n = self.values.len();
        let pairs = if self.wrap { n } else { n - 1 };
        let jump = (0..pairs)
            .map(|k| (self.values[(k + 1) % n] - self.values[k]).abs())
            .fold(0.0, f64::max);
        jump * self.mollifier().max_abs_derivative()
    }

    /// C1 (d/2+l/2)^{2−2s} h/d² + C2 h/(d/2+l/2)^{2s}.
    pub fn fractional_bound(&self, s: f64, c1: f64, c2: f64) -> f64 {
        let BoxLayout { l, d, h, .. } = self.layout;
        let w = 0.5 * (d + l);
        c1 * w.powf(2.0 - 2.0 * s) * h / (d * d) + c2 * h / w.powf(2.0 * s)
    }
}
