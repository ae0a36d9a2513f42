//! Forward integration of u_t = A u − f(x, u) + F from u = 0 on a periodic grid.

use crate::error::{config, Error, Result};
use crate::frac_operators::{FractionalOrder, GridFunction, PeriodicGrid, SpectralOperator};
use crate::random_media::ObstacleField;
use rustfft::num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionConfig {
    pub grid: PeriodicGrid,
    pub s: FractionalOrder,
    pub force: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Pinned once sup|u_t| stays below this for `pin_window` consecutive steps.
    pub pin_tol: f64,
    pub pin_window: usize,
    pub escape_height: f64,
}

impl EvolutionConfig {
    /// Defaults: dt = 0.1·spacing^{2s}, pin_tol = 1e−8·F (1e−12 when F = 0), a 100-step
    /// trailing window and an escape height r1 above the highest obstacle.
    pub fn new(grid: PeriodicGrid, s: FractionalOrder, force: f64, field: &ObstacleField) -> Self {
        let dt = 0.1 * grid.spacing().powf(2.0 * s.s());
        let escape_height = field.max_y().unwrap_or(0.0) + field.bump().r1();
        let pin_tol = if force > 0.0 { 1e-8 * force } else { 1e-12 };
        EvolutionConfig { grid, s, force, dt, t_max: 1e3, pin_tol, pin_window: 100, escape_height }
    }

    pub fn validate(&self, field: &ObstacleField) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return config(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.pin_tol > 0.0) || self.pin_window == 0 {
            return config("pin_tol and pin_window must be positive");
        }
        if !(self.t_max > 0.0) || !self.force.is_finite() {
            return config("t_max must be positive and F finite");
        }
        if let Some(top) = field.max_y() {
            if !(self.escape_height > top) {
                return config(format!("escape height {} not above highest obstacle {top}", self.escape_height));
            }
        }
        Ok(())
    }
}

/// dt below which u ↦ u + dt(F − f(x, u)) is nondecreasing: 1 / (sup ∂_u f bound).
pub fn monotone_dt_bound(field: &ObstacleField) -> f64 {
    let lip = field.bump().max_slope() * field.force_upper_bound();
    if lip > 0.0 { 1.0 / lip } else { f64::INFINITY }
}

/// Semi-implicit stepper with the implicit multiplier 1/(1 + dt|k|^{2s}) cached.
#[derive(Debug, Clone)]
pub struct Stepper {
    op: SpectralOperator,
    damping: Vec<f64>,
    dt: f64,
    force: f64,
}

impl Stepper {
    pub fn new(cfg: &EvolutionConfig) -> Self {
        let op = SpectralOperator::new(cfg.grid, cfg.s);
        let damping = op.symbol().iter().map(|m| 1.0 / (1.0 + cfg.dt * m)).collect();
        Stepper { op, damping, dt: cfg.dt, force: cfg.force }
    }

    /// û ← (û + dt·(F − f(·, u))^)/(1 + dt|k|^{2s}).
    pub fn step(&self, u: &GridFunction, field: &ObstacleField) -> Result<GridFunction> {
        let grid = self.op.grid();
        let explicit: Vec<f64> = u
            .values
            .iter()
            .enumerate()
            .map(|(j, &v)| v + self.dt * (self.force - field.force(grid.x(j), v)))
            .collect();
        let fft = self.op.fft();
        let mut spec: Vec<Complex64> = fft.forward(&explicit);
        for (c, d) in spec.iter_mut().zip(&self.damping) {
            *c *= *d;
        }
        let values = fft.inverse_real(spec);
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { step: 0 });
        }
        Ok(GridFunction { grid: *grid, values })
    }
}

/// One semi-implicit step; builds the stepper on every call (use [`Stepper`] in loops).
pub fn step(u: &GridFunction, cfg: &EvolutionConfig, field: &ObstacleField) -> Result<GridFunction> {
    Stepper::new(cfg).step(u, field)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Pinned,
    Escaped,
    Undecided,
}

#[derive(Debug, Clone)]
pub struct PinningVerdict {
    pub outcome: Outcome,
    pub final_profile: GridFunction,
    pub t_final: f64,
    pub max_velocity_at_end: f64,
    pub steps: usize,
}

impl PinningVerdict {
    pub fn write_summary<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# pinlab verdict v1")?;
        writeln!(w, "outcome = {:?}", self.outcome)?;
        writeln!(w, "t_final = {:.16e}", self.t_final)?;
        writeln!(w, "steps = {}", self.steps)?;
        writeln!(w, "max_velocity_at_end = {:.16e}", self.max_velocity_at_end)?;
        writeln!(w, "min_height = {:.16e}", self.final_profile.min())?;
        writeln!(w, "max_height = {:.16e}", self.final_profile.max())?;
        Ok(())
    }
}

pub fn run(cfg: &EvolutionConfig, field: &ObstacleField) -> Result<PinningVerdict> {
    run_observed(cfg, field, 0, |_, _| {})
}

/// Like [`run`], calling `observe(t, u)` at t = 0, every `every` steps (if nonzero) and at the end.
pub fn run_observed(
    cfg: &EvolutionConfig,
    field: &ObstacleField,
    every: usize,
    mut observe: impl FnMut(f64, &GridFunction),
) -> Result<PinningVerdict> {
    cfg.validate(field)?;
    let stepper = Stepper::new(cfg);
    let mut u = GridFunction::zeros(cfg.grid);
    let mut t = 0.0;
    let mut calm = 0usize;
    let mut velocity = 0.0;
    let mut n = 0usize;
    observe(t, &u);
    let outcome = loop {
        if u.min() > cfg.escape_height {
            break Outcome::Escaped;
        }
        if calm >= cfg.pin_window {
            break Outcome::Pinned;
        }
        if t >= cfg.t_max {
            break Outcome::Undecided;
        }
        let next = stepper.step(&u, field).map_err(|_| Error::BlowUp { step: n + 1 })?;
        velocity = next.values.iter().zip(&u.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / cfg.dt;
        calm = if velocity < cfg.pin_tol { calm + 1 } else { 0 };
        u = next;
        n += 1;
        t = n as f64 * cfg.dt;
        if every > 0 && n % every == 0 {
            observe(t, &u);
        }
    };
    if every == 0 || n % every != 0 {
        observe(t, &u);
    }
    Ok(PinningVerdict { outcome, final_profile: u, t_final: t, max_velocity_at_end: velocity, steps: n })
}

/// Writes `t, x, u` rows for a list of snapshots.
pub fn write_snapshots<W: Write>(snapshots: &[(f64, GridFunction)], mut w: W) -> Result<()> {
    writeln!(w, "# pinlab trajectory v1")?;
    writeln!(w, "t,x,u")?;
    for (t, u) in snapshots {
        for (x, v) in u.grid.points().zip(&u.values) {
            writeln!(w, "{t:.16e},{x:.16e},{v:.16e}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRecord {
    pub force: f64,
    pub outcome: Outcome,
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdScan {
    /// The last force seen pinned and the first force not pinned.
    pub interval: (f64, f64),
    pub records: Vec<ScanRecord>,
}

/// Bisection on F over a fixed field and grid. Undecided runs count as not pinned, so the
/// lower end is always a force observed to pin.
pub fn threshold_scan(
    field: &ObstacleField,
    base: &EvolutionConfig,
    f_lo: f64,
    f_hi: f64,
    n_bisect: usize,
) -> Result<ThresholdScan> {
    if !(f_lo < f_hi) {
        return Err(Error::Bracket(format!("need F_lo < F_hi, got [{f_lo}, {f_hi}]")));
    }
    let mut records = Vec::new();
    let mut probe = |f: f64| -> Result<Outcome> {
        let cfg = EvolutionConfig { force: f, pin_tol: pin_tol_for(base, f), ..*base };
        let v = run(&cfg, field)?;
        records.push(ScanRecord { force: f, outcome: v.outcome, t_final: v.t_final });
        Ok(v.outcome)
    };
    let lo_out = probe(f_lo)?;
    let hi_out = probe(f_hi)?;
    if lo_out != Outcome::Pinned || hi_out != Outcome::Escaped {
        return Err(Error::Bracket(format!(
            "F_lo = {f_lo} gave {lo_out:?} and F_hi = {f_hi} gave {hi_out:?}; need Pinned and Escaped"
        )));
    }
    let (mut lo, mut hi) = (f_lo, f_hi);
    for _ in 0..n_bisect {
        let mid = 0.5 * (lo + hi);
        if probe(mid)? == Outcome::Pinned {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdScan { interval: (lo, hi), records })
}

/// The base tolerance scaled to the probed force when the base was set relative to its own F.
fn pin_tol_for(base: &EvolutionConfig, f: f64) -> f64 {
    if base.force > 0.0 && f > 0.0 {
        base.pin_tol * f / base.force
    } else {
        base.pin_tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_media::{BumpProfile, Obstacle, StrengthLaw, Window};

    fn empty_field(period: f64) -> ObstacleField {
        let w = Window::new(0.0, period, 1.5, 3.0).unwrap();
        ObstacleField::from_obstacles(vec![], BumpProfile::new(1.0, 1.5).unwrap(), w, StrengthLaw::Point(1.0))
            .unwrap()
            .with_wrap_x(true)
    }

    fn one_obstacle(period: f64) -> ObstacleField {
        let w = Window::new(0.0, period, 1.5, 3.0).unwrap();
        let o = vec![Obstacle { x: 5.0, y: 2.0, strength: 1.0, id: 0 }];
        ObstacleField::from_obstacles(o, BumpProfile::new(1.0, 1.5).unwrap(), w, StrengthLaw::Point(1.0))
            .unwrap()
            .with_wrap_x(true)
    }

    fn cfg(field: &ObstacleField, force: f64) -> EvolutionConfig {
        let g = PeriodicGrid::new(field.window().width(), 64).unwrap();
        EvolutionConfig { dt: 0.05, t_max: 50.0, ..EvolutionConfig::new(g, FractionalOrder::new(0.75).unwrap(), force, field) }
    }

    #[test]
    fn free_translation() {
        let f = empty_field(10.0);
        let c = cfg(&f, 0.3);
        let st = Stepper::new(&c);
        let mut u = GridFunction::zeros(c.grid);
        for n in 1..=200 {
            u = st.step(&u, &f).unwrap();
            let exact = 0.3 * c.dt * n as f64;
            assert!(u.values.iter().all(|v| (v - exact).abs() <= 1e-13 * exact.max(1.0)));
        }
    }

    #[test]
    fn zero_force_stays_zero_and_pins() {
        let f = one_obstacle(10.0);
        let v = run(&cfg(&f, 0.0), &f).unwrap();
        assert_eq!(v.outcome, Outcome::Pinned);
        assert!(v.final_profile.sup_norm() == 0.0);
    }

    #[test]
    fn large_force_escapes() {
        let f = one_obstacle(10.0);
        let v = run(&cfg(&f, 10.0 * f.force_upper_bound()), &f).unwrap();
        assert_eq!(v.outcome, Outcome::Escaped);
    }

    #[test]
    fn scan_on_empty_field_collapses_to_zero() {
        let f = empty_field(10.0);
        let base = EvolutionConfig { t_max: 5.0, ..cfg(&f, 1.0) };
        let scan = threshold_scan(&f, &base, 0.0, 1.0, 6).unwrap();
        assert_eq!(scan.interval.0, 0.0);
        assert!(scan.interval.1 <= 1.0 / 64.0 + 1e-15);
    }

    #[test]
    fn scan_requires_bracket() {
        let f = empty_field(10.0);
        let base = EvolutionConfig { t_max: 5.0, ..cfg(&f, 1.0) };
        assert!(matches!(threshold_scan(&f, &base, 0.5, 1.0, 3), Err(Error::Bracket(_))));
    }

    #[test]
    fn first_order_in_dt() {
        let f = one_obstacle(10.0);
        let at = |dt: f64| {
            let c = EvolutionConfig { dt, ..cfg(&f, 1.0) };
            let st = Stepper::new(&c);
            let mut u = GridFunction::zeros(c.grid);
            for _ in 0..((2.0 / dt).round() as usize) {
                u = st.step(&u, &f).unwrap();
            }
            u
        };
        let (u1, u2, u3) = (at(0.04), at(0.02), at(0.01));
        let diff = |a: &GridFunction, b: &GridFunction| {
            a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        };
        let ratio = diff(&u1, &u2) / diff(&u2, &u3);
        assert!((ratio - 2.0).abs() < 0.3, "ratio {ratio}");
    }
}
