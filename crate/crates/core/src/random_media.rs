//! Poisson obstacle fields and the obstacle force f(x, y) = Σ_k f_k φ(x − x_k, y − y_k).

use crate::error::{config, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

/// Degree-7 smoothstep t⁴(35 − 84t + 70t² − 20t³): 0 at 0, 1 at 1, three vanishing derivatives at each end.
pub fn smoothstep7(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let t2 = t * t;
        t2 * t2 * (35.0 - 84.0 * t + 70.0 * t2 - 20.0 * t2 * t)
    }
}

fn smoothstep7_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        140.0 * t * t * t * (1.0 - t).powi(3)
    }
}

/// Radial bump: 1 on the disk of radius √2·r0 (which contains the max-norm ball of radius r0),
/// 0 beyond Euclidean radius r1, smoothstep in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BumpProfile {
    r0: f64,
    r1: f64,
}

impl BumpProfile {
    pub fn new(r0: f64, r1: f64) -> Result<Self> {
        if !(r0 > 0.0 && r1 > std::f64::consts::SQRT_2 * r0 && r1.is_finite()) {
            return config(format!("bump radii need r1 > sqrt(2) r0 > 0, got r0 = {r0}, r1 = {r1}"));
        }
        Ok(BumpProfile { r0, r1 })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    fn inner(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.r0
    }

    pub fn eval(&self, dx: f64, dy: f64) -> f64 {
        if dx.abs() <= self.r0 && dy.abs() <= self.r0 {
            return 1.0;
        }
        let e = dx.hypot(dy);
        if e >= self.r1 {
            return 0.0;
        }
        smoothstep7((self.r1 - e) / (self.r1 - self.inner()))
    }

    /// Sup of |∂φ/∂y| (equivalently of the radial slope).
    pub fn max_slope(&self) -> f64 {
        smoothstep7_derivative(0.5) / (self.r1 - self.inner())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StrengthLaw {
    Point(f64),
    Uniform { lo: f64, hi: f64 },
}

impl StrengthLaw {
    fn validate(&self) -> Result<()> {
        match *self {
            StrengthLaw::Point(q) if q > 0.0 && q.is_finite() => Ok(()),
            StrengthLaw::Uniform { lo, hi } if lo > 0.0 && hi >= lo && hi.is_finite() => Ok(()),
            _ => config(format!("strength law {self:?} must be strictly positive")),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            StrengthLaw::Point(q) => q,
            StrengthLaw::Uniform { lo, hi } => {
                if hi > lo { rng.random_range(lo..hi) } else { lo }
            }
        }
    }

    /// P{f ≥ q}.
    pub fn tail_probability(&self, q: f64) -> f64 {
        match *self {
            StrengthLaw::Point(q0) => {
                if q0 >= q { 1.0 } else { 0.0 }
            }
            StrengthLaw::Uniform { lo, hi } => {
                if q <= lo {
                    1.0
                } else if q >= hi {
                    0.0
                } else {
                    (hi - q) / (hi - lo)
                }
            }
        }
    }

    pub fn max(&self) -> f64 {
        match *self {
            StrengthLaw::Point(q) => q,
            StrengthLaw::Uniform { hi, .. } => hi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Window {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        if !(x_hi > x_lo && y_hi > y_lo) || ![x_lo, x_hi, y_lo, y_hi].iter().all(|v| v.is_finite()) {
            return config(format!("degenerate window [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}]"));
        }
        Ok(Window { x_lo, x_hi, y_lo, y_hi })
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn area(&self) -> f64 {
        self.width() * (self.y_hi - self.y_lo)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_lo && x <= self.x_hi && y >= self.y_lo && y <= self.y_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Obstacle {
    pub x: f64,
    pub y: f64,
    pub strength: f64,
    pub id: usize,
}

/// One realization of the obstacle process restricted to a window.
/// With `wrap_x` the window is treated as one period of a horizontally periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleField {
    obstacles: Vec<Obstacle>,
    bump: BumpProfile,
    intensity: f64,
    window: Window,
    seed: u64,
    strength_law: StrengthLaw,
    wrap_x: bool,
    // indices into `obstacles` sorted by x, for range queries
    by_x: Vec<usize>,
}

pub fn sample_obstacles(
    intensity: f64,
    window: Window,
    strength_law: StrengthLaw,
    bump: BumpProfile,
    seed: u64,
) -> Result<ObstacleField> {
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return config(format!("intensity must be nonnegative, got {intensity}"));
    }
    if window.y_lo < bump.r1() {
        return config(format!("window y_lo = {} below r1 = {}", window.y_lo, bump.r1()));
    }
    strength_law.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = intensity * window.area();
    let count = if mean > 0.0 {
        let d = Poisson::new(mean).map_err(|e| Error::Config(format!("poisson mean {mean}: {e}")))?;
        d.sample(&mut rng) as usize
    } else {
        0
    };
    let obstacles = (0..count)
        .map(|id| {
            let x = rng.random_range(window.x_lo..window.x_hi);
            let y = rng.random_range(window.y_lo..window.y_hi);
            let strength = strength_law.sample(&mut rng);
            Obstacle { x, y, strength, id }
        })
        .collect();
    Ok(ObstacleField::assemble(obstacles, bump, intensity, window, seed, strength_law, false))
}

impl ObstacleField {
    fn assemble(
        obstacles: Vec<Obstacle>,
        bump: BumpProfile,
        intensity: f64,
        window: Window,
        seed: u64,
        strength_law: StrengthLaw,
        wrap_x: bool,
    ) -> Self {
        let mut by_x: Vec<usize> = (0..obstacles.len()).collect();
        by_x.sort_by(|&a, &b| obstacles[a].x.total_cmp(&obstacles[b].x));
        ObstacleField { obstacles, bump, intensity, window, seed, strength_law, wrap_x, by_x }
    }

    /// Builds a field from explicit obstacles (ids are reassigned in order).
    pub fn from_obstacles(
        mut obstacles: Vec<Obstacle>,
        bump: BumpProfile,
        window: Window,
        strength_law: StrengthLaw,
    ) -> Result<Self> {
        strength_law.validate()?;
        if window.y_lo < bump.r1() {
            return config(format!("window y_lo = {} below r1 = {}", window.y_lo, bump.r1()));
        }
        for (i, o) in obstacles.iter_mut().enumerate() {
            if !window.contains(o.x, o.y) || o.strength <= 0.0 {
                return config(format!("obstacle {i} at ({}, {}) outside window or nonpositive", o.x, o.y));
            }
            o.id = i;
        }
        Ok(Self::assemble(obstacles, bump, 0.0, window, 0, strength_law, false))
    }

    pub fn with_wrap_x(mut self, wrap: bool) -> Self {
        self.wrap_x = wrap;
        self
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn bump(&self) -> &BumpProfile {
        &self.bump
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn strength_law(&self) -> &StrengthLaw {
        &self.strength_law
    }

    pub fn wrap_x(&self) -> bool {
        self.wrap_x
    }

    fn x_offset(&self, x: f64, xc: f64) -> f64 {
        if self.wrap_x {
            let p = self.window.width();
            (x - xc + 0.5 * p).rem_euclid(p) - 0.5 * p
        } else {
            x - xc
        }
    }

    /// Calls `visit` for every obstacle whose center lies within horizontal distance `reach` of x.
    pub fn for_each_near(&self, x: f64, reach: f64, mut visit: impl FnMut(&Obstacle, f64)) {
        let mut scan = |lo: f64, hi: f64| {
            let start = self.by_x.partition_point(|&i| self.obstacles[i].x < lo);
            for &i in &self.by_x[start..] {
                let o = &self.obstacles[i];
                if o.x > hi {
                    break;
                }
                visit(o, self.x_offset(x, o.x));
            }
        };
        if self.wrap_x {
            let p = self.window.width();
            let xr = self.window.x_lo + (x - self.window.x_lo).rem_euclid(p);
            let (lo, hi) = (xr - reach, xr + reach);
            if 2.0 * reach >= p {
                scan(self.window.x_lo, self.window.x_hi);
                return;
            }
            scan(lo.max(self.window.x_lo), hi.min(self.window.x_hi));
            if lo < self.window.x_lo {
                scan(lo + p, self.window.x_hi);
            }
            if hi > self.window.x_hi {
                scan(self.window.x_lo, hi - p);
            }
        } else {
            scan(x - reach, x + reach);
        }
    }

    pub fn force(&self, x: f64, y: f64) -> f64 {
        let mut total = 0.0;
        self.for_each_near(x, self.bump.r1(), |o, dx| total += o.strength * self.bump.eval(dx, y - o.y));
        total
    }

    /// Upper bound on sup f: any maximizer lies within r1 of some center, so all contributing
    /// centers lie within 2r1 of that center.
    pub fn force_upper_bound(&self) -> f64 {
        let r = 2.0 * self.bump.r1();
        let mut best: f64 = 0.0;
        for o in &self.obstacles {
            let mut sum = 0.0;
            self.for_each_near(o.x, r, |p, dx| {
                if dx.hypot(p.y - o.y) < r {
                    sum += p.strength;
                }
            });
            best = best.max(sum);
        }
        best
    }

    pub fn max_y(&self) -> Option<f64> {
        self.obstacles.iter().map(|o| o.y).reduce(f64::max)
    }

    /// Obstacles whose centers lie in `sub`, as a field over `sub`.
    pub fn restrict(&self, sub: Window) -> Result<ObstacleField> {
        if sub.y_lo < self.bump.r1() {
            return config("sub-window y_lo below r1");
        }
        let obstacles = self
            .obstacles
            .iter()
            .filter(|o| sub.contains(o.x, o.y))
            .enumerate()
            .map(|(i, o)| Obstacle { id: i, ..*o })
            .collect();
        Ok(Self::assemble(obstacles, self.bump, self.intensity, sub, self.seed, self.strength_law, false))
    }

    const HEADER: &'static str = "# pinlab obstacle-field v1";

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::new();
        let wd = &self.window;
        writeln!(s, "{}", Self::HEADER).ok();
        writeln!(s, "intensity {:.16e}", self.intensity).ok();
        writeln!(s, "window {:.16e} {:.16e} {:.16e} {:.16e}", wd.x_lo, wd.x_hi, wd.y_lo, wd.y_hi).ok();
        writeln!(s, "seed {}", self.seed).ok();
        writeln!(s, "bump {:.16e} {:.16e}", self.bump.r0, self.bump.r1).ok();
        match self.strength_law {
            StrengthLaw::Point(q) => writeln!(s, "strength point {q:.16e}").ok(),
            StrengthLaw::Uniform { lo, hi } => writeln!(s, "strength uniform {lo:.16e} {hi:.16e}").ok(),
        };
        writeln!(s, "wrap_x {}", self.wrap_x).ok();
        writeln!(s, "count {}", self.obstacles.len()).ok();
        w.write_all(s.as_bytes())?;
        for o in &self.obstacles {
            writeln!(w, "{:.16e} {:.16e} {:.16e}", o.x, o.y, o.strength)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<ObstacleField> {
        let mut lines = r.lines().enumerate();
        let perr = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };
        let mut next = |key: &str| -> Result<(usize, Vec<String>)> {
            let (i, line) = lines.next().ok_or_else(|| perr(0, &format!("missing `{key}`")))?;
            let line = line?;
            let mut parts = line.split_whitespace().map(str::to_string);
            if key == "#" {
                return if line == Self::HEADER { Ok((i, vec![])) } else { Err(perr(i, "bad header")) };
            }
            if parts.next().as_deref() != Some(key) {
                return Err(perr(i, &format!("expected `{key}`")));
            }
            Ok((i, parts.collect()))
        };
        let num = |(i, v): &(usize, Vec<String>), k: usize| -> Result<f64> {
            v.get(k).and_then(|t| t.parse().ok()).ok_or_else(|| perr(*i, "bad number"))
        };
        next("#")?;
        let inten = next("intensity")?;
        let win = next("window")?;
        let seed = next("seed")?;
        let bump = next("bump")?;
        let law = next("strength")?;
        let wrap = next("wrap_x")?;
        let count = next("count")?;
        let window = Window::new(num(&win, 0)?, num(&win, 1)?, num(&win, 2)?, num(&win, 3)?)?;
        let bump = BumpProfile::new(num(&bump, 0)?, num(&bump, 1)?)?;
        let strength_law = match law.1.first().map(String::as_str) {
            Some("point") => StrengthLaw::Point(num(&law, 1)?),
            Some("uniform") => StrengthLaw::Uniform { lo: num(&law, 1)?, hi: num(&law, 2)? },
            _ => return Err(perr(law.0, "unknown strength law")),
        };
        let seed: u64 = seed.1.first().and_then(|t| t.parse().ok()).ok_or_else(|| perr(seed.0, "bad seed"))?;
        let wrap_x = match wrap.1.first().map(String::as_str) {
            Some("true") => true,
            Some("false") => false,
            _ => return Err(perr(wrap.0, "bad wrap_x")),
        };
        let n: usize = count.1.first().and_then(|t| t.parse().ok()).ok_or_else(|| perr(count.0, "bad count"))?;
        let mut obstacles = Vec::with_capacity(n);
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line.split_whitespace().map(|t| t.parse()).collect::<std::result::Result<_, _>>()
                .map_err(|_| perr(i, "bad obstacle row"))?;
            if v.len() != 3 {
                return Err(perr(i, "obstacle row needs x y strength"));
            }
            obstacles.push(Obstacle { x: v[0], y: v[1], strength: v[2], id: obstacles.len() });
        }
        if obstacles.len() != n {
            return Err(perr(0, &format!("count {n} but {} rows", obstacles.len())));
        }
        Ok(Self::assemble(obstacles, bump, num(&inten, 0)?, window, seed, strength_law, wrap_x))
    }
}

pub fn eval_obstacle_force(field: &ObstacleField, x: f64, y: f64) -> f64 {
    field.force(x, y)
}

/// Obstacles with strength ≥ q, in original order.
pub fn strong_obstacles(field: &ObstacleField, q: f64) -> Vec<Obstacle> {
    field.obstacles.iter().filter(|o| o.strength >= q).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> BumpProfile {
        BumpProfile::new(1.0, 1.5).unwrap()
    }

    #[test]
    fn bump_validation() {
        assert!(BumpProfile::new(1.0, 1.4).is_err());
        assert!(BumpProfile::new(0.0, 1.0).is_err());
    }

    #[test]
    fn bump_values() {
        let b = bump();
        assert_eq!(b.eval(0.99, -0.99), 1.0);
        assert_eq!(b.eval(1.5, 0.0), 0.0);
        assert_eq!(b.eval(1.1, 1.1), 0.0);
        let v = b.eval(1.45, 0.0);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn smoothstep_derivatives_vanish_at_ends() {
        let h = 1e-4;
        for &t in &[0.0, 1.0] {
            let d1 = (smoothstep7(t + h) - smoothstep7(t - h)) / (2.0 * h);
            let d2 = (smoothstep7(t + h) - 2.0 * smoothstep7(t) + smoothstep7(t - h)) / (h * h);
            assert!(d1.abs() < 1e-10 && d2.abs() < 1e-6, "{t}: {d1} {d2}");
        }
    }

    #[test]
    fn empty_at_zero_intensity() {
        let w = Window::new(-5.0, 5.0, 1.5, 3.0).unwrap();
        let f = sample_obstacles(0.0, w, StrengthLaw::Point(1.0), bump(), 3).unwrap();
        assert!(f.obstacles().is_empty());
        assert_eq!(f.force(0.0, 2.0), 0.0);
    }

    #[test]
    fn rejects_low_window() {
        let w = Window::new(-5.0, 5.0, 1.0, 3.0).unwrap();
        assert!(sample_obstacles(1.0, w, StrengthLaw::Point(1.0), bump(), 3).is_err());
    }

    #[test]
    fn coincident_obstacles_add() {
        let w = Window::new(-5.0, 5.0, 1.5, 5.0).unwrap();
        let obs = vec![
            Obstacle { x: 0.0, y: 3.0, strength: 1.0, id: 0 },
            Obstacle { x: 0.0, y: 3.0, strength: 2.0, id: 1 },
        ];
        let f = ObstacleField::from_obstacles(obs, bump(), w, StrengthLaw::Uniform { lo: 1.0, hi: 2.0 }).unwrap();
        assert_eq!(f.force(0.0, 3.0), 3.0);
        assert_eq!(f.force(0.3, 3.9), 3.0);
        assert!(f.force_upper_bound() >= 3.0);
    }

    #[test]
    fn wrap_sees_across_edge() {
        let w = Window::new(0.0, 10.0, 1.5, 5.0).unwrap();
        let obs = vec![Obstacle { x: 9.8, y: 3.0, strength: 1.0, id: 0 }];
        let f = ObstacleField::from_obstacles(obs, bump(), w, StrengthLaw::Point(1.0)).unwrap();
        assert_eq!(f.force(0.2, 3.0), 0.0);
        let f = f.with_wrap_x(true);
        assert_eq!(f.force(0.2, 3.0), 1.0);
        assert_eq!(f.force(-9.9, 3.0), 1.0);
    }

    #[test]
    fn text_round_trip() {
        let w = Window::new(-3.0, 7.0, 1.5, 4.0).unwrap();
        let f = sample_obstacles(2.3, w, StrengthLaw::Uniform { lo: 0.5, hi: 2.0 }, bump(), 99).unwrap();
        let mut buf = Vec::new();
        f.write_text(&mut buf).unwrap();
        let g = ObstacleField::read_text(&buf[..]).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn strong_filter() {
        let w = Window::new(-3.0, 7.0, 1.5, 4.0).unwrap();
        let f = sample_obstacles(2.0, w, StrengthLaw::Point(0.8), bump(), 5).unwrap();
        assert_eq!(strong_obstacles(&f, 0.8).len(), f.obstacles().len());
        assert_eq!(strong_obstacles(&f, 1e-300).len(), f.obstacles().len());
        assert!(strong_obstacles(&f, 0.81).is_empty());
    }
}
