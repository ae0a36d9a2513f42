use crate::error::{check_finite, config, Error, Result};
use serde::Serialize;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

/// Uniform periodic grid `x_j = origin + j·period/n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicGrid {
    period: f64,
    n_points: usize,
    origin: f64,
}

impl PeriodicGrid {
    pub fn new(period: f64, n_points: usize) -> Result<Self> {
        Self::with_origin(period, n_points, 0.0)
    }

    pub fn with_origin(period: f64, n_points: usize, origin: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return config(format!("grid period must be positive and finite, got {period}"));
        }
        if n_points < 8 || !n_points.is_power_of_two() {
            return config(format!("grid size must be a power of two >= 8, got {n_points}"));
        }
        if !origin.is_finite() {
            return config("grid origin must be finite");
        }
        Ok(PeriodicGrid { period, n_points, origin })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    /// Signed integer mode index of FFT bin `j`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n_points as i64;
        let j = j as i64;
        if j <= n / 2 { j } else { j - n }
    }

    /// Angular wavenumber 2πk/period of FFT bin `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * self.mode(j) as f64 / self.period
    }

    /// Signed offset of `x` from `c` reduced to [−period/2, period/2).
    pub fn wrap_offset(&self, x: f64, c: f64) -> f64 {
        let p = self.period;
        (x - c + 0.5 * p).rem_euclid(p) - 0.5 * p
    }
}

/// Samples of a real function on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: PeriodicGrid,
    pub values: Vec<f64>,
}

const CSV_HEADER: &str = "# pinlab grid-function v1";

impl GridFunction {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return config(format!("expected {} values, got {}", grid.n_points(), values.len()));
        }
        check_finite(&values)?;
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().map(f).collect();
        GridFunction { grid, values }
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        GridFunction { grid, values: vec![0.0; grid.n_points()] }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid inner product ⟨f, g⟩ = Σ f_j g_j · spacing.
    pub fn dot(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.spacing()
    }

    /// Periodic linear interpolation.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.grid.n_points();
        let t = ((x - self.grid.origin()) / self.grid.spacing()).rem_euclid(n as f64);
        let i = (t.floor() as usize).min(n - 1);
        let w = t - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[(i + 1) % n]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        writeln!(w, "x,value")?;
        for (x, v) in self.grid.points().zip(&self.values) {
            writeln!(w, "{x:.16e},{v:.16e}")?;
        }
        Ok(())
    }

    /// Reads the output of `write_csv`; the grid is recovered from the first two abscissae.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "x,value" {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("bad row `{line}`") })
            };
            xs.push(parse(it.next())?);
            vs.push(parse(it.next())?);
        }
        if xs.len() < 2 {
            return Err(Error::Parse { line: 0, msg: "need at least two rows".into() });
        }
        let dx = xs[1] - xs[0];
        let grid = PeriodicGrid::with_origin(dx * xs.len() as f64, xs.len(), xs[0])?;
        GridFunction::new(grid, vs)
    }
}

/// Fractional exponent s. Operator orders used by the model live in [1/2, 1);
/// `general` admits (0, 1] for auxiliary orders such as 1−s and the Laplacian itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(s: f64) -> Result<Self> {
        if !(0.5..1.0).contains(&s) {
            return config(format!("fractional order s = {s} outside [1/2, 1)"));
        }
        Ok(FractionalOrder(s))
    }

    pub fn general(s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return config(format!("fractional order {s} outside (0, 1]"));
        }
        Ok(FractionalOrder(s))
    }

    pub fn s(&self) -> f64 {
        self.0
    }

    pub fn is_half(&self) -> bool {
        self.0 == 0.5
    }

    /// The complementary order 1−s.
    pub fn complement(&self) -> FractionalOrder {
        FractionalOrder(1.0 - self.0)
    }
}
