//! Site percolation on Z^n × N and the sub-logarithmically growing open surface Λ.

mod counting;
mod embed;
mod paths;

pub use counting::{counting_bound, expected_path_bound, CountingBound};
pub use embed::{embed_obstacle_lattice, EmbeddedLattice};
pub use paths::count_admissible_paths;

use crate::error::{config, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::VecDeque;
use std::io::Write;

/// H(k) = ⌊k^α⌋, 0 < α < 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFunction {
    alpha: f64,
}

/// Range over which the structural properties of H are checked at construction.
pub const GROWTH_CHECK_MAX: u64 = 1_000_000;
const SUBADDITIVE_CHECK_MAX: u64 = 500;

impl GrowthFunction {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return config(format!("growth exponent must lie in (0, 1), got {alpha}"));
        }
        let h = GrowthFunction { alpha };
        if h.eval(0) != 0 || h.eval(1) < 1 {
            return config("growth function needs H(0) = 0 and H(1) >= 1");
        }
        let mut prev = 0;
        for k in 1..=GROWTH_CHECK_MAX {
            let v = h.eval(k);
            if v < prev || v > prev + 1 {
                return config(format!("H(k+1) <= H(k)+1 fails at k = {}", k - 1));
            }
            prev = v;
        }
        for x in 1..=SUBADDITIVE_CHECK_MAX {
            for y in x..=SUBADDITIVE_CHECK_MAX {
                if h.eval(x + y) > h.eval(x) + h.eval(y) {
                    return config(format!("H not subadditive at ({x}, {y})"));
                }
            }
        }
        Ok(h)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eval(&self, k: u64) -> u64 {
        if k == 0 {
            return 0;
        }
        // nudge so exact powers are not lost to rounding just below an integer
        let v = (k as f64).powf(self.alpha);
        (v * (1.0 + 4.0 * f64::EPSILON)).floor() as u64
    }

    /// R(j) = sup{k : H(k) = j} = ⌈(j+1)^{1/α}⌉ − 1, confirmed against H.
    pub fn r(&self, j: u64) -> u64 {
        let mut k = (((j + 1) as f64).powf(1.0 / self.alpha)).ceil() as u64;
        k = k.saturating_sub(1);
        while self.eval(k + 1) <= j {
            k += 1;
        }
        while k > 0 && self.eval(k) > j {
            k -= 1;
        }
        k
    }
}

/// Sites of {0..width}^n × {0..height}; `open[base * height + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteLattice {
    pub n: usize,
    pub width: usize,
    pub height: usize,
    pub open: Vec<bool>,
    pub p: f64,
    pub seed: u64,
    /// Cyclic horizontal distance when set.
    pub wrap: bool,
}

pub fn sample_lattice(n: usize, width: usize, height: usize, p: f64, seed: u64) -> Result<SiteLattice> {
    if !(0.0..=1.0).contains(&p) {
        return config(format!("open probability must lie in [0, 1], got {p}"));
    }
    if n == 0 || width == 0 || height == 0 {
        return config("lattice extents must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites = width.pow(n as u32) * height;
    // one uniform per site: lattices at different p with the same seed are coupled
    let open = (0..sites).map(|_| rng.random::<f64>() < p).collect();
    Ok(SiteLattice { n, width, height, open, p, seed, wrap: false })
}

impl SiteLattice {
    pub fn from_open(n: usize, width: usize, height: usize, open: Vec<bool>) -> Result<Self> {
        if n == 0 || width == 0 || height == 0 || open.len() != width.pow(n as u32) * height {
            return config("lattice shape does not match the state vector");
        }
        let frac = open.iter().filter(|o| **o).count() as f64 / open.len() as f64;
        Ok(SiteLattice { n, width, height, open, p: frac, seed: 0, wrap: false })
    }

    pub fn with_wrap(mut self, wrap: bool) -> Self {
        self.wrap = wrap;
        self
    }

    pub fn base_sites(&self) -> usize {
        self.width.pow(self.n as u32)
    }

    pub fn is_open(&self, base: usize, j: usize) -> bool {
        self.open[base * self.height + j]
    }

    pub fn coords(&self, mut base: usize) -> Vec<usize> {
        (0..self.n)
            .map(|_| {
                let c = base % self.width;
                base /= self.width;
                c
            })
            .collect()
    }

    /// ℓ1 distance between base sites (cyclic per axis if `wrap`).
    pub fn distance(&self, a: usize, b: usize) -> u64 {
        let (mut a, mut b) = (a, b);
        let mut d = 0;
        for _ in 0..self.n {
            let (ca, cb) = (a % self.width, b % self.width);
            a /= self.width;
            b /= self.width;
            let diff = ca.abs_diff(cb);
            d += if self.wrap { diff.min(self.width - diff) } else { diff } as u64;
        }
        d
    }

    pub fn open_fraction(&self) -> f64 {
        self.open.iter().filter(|o| **o).count() as f64 / self.open.len() as f64
    }

    /// CSV rows `k,j,open` (n = 1 uses the base index as k).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# pinlab site-lattice v1 n={} width={} height={}", self.n, self.width, self.height)?;
        writeln!(w, "k,j,open")?;
        for base in 0..self.base_sites() {
            for j in 0..self.height {
                writeln!(w, "{base},{j},{}", u8::from(self.is_open(base, j)))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LambdaStatus {
    Constructed,
    Overflow,
}

/// Order in which the fixed-point iteration visits columns; both reach the same fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Repeated in-place sweeps over all columns.
    Sweep,
    /// Queue of columns whose inputs changed.
    Worklist,
}

#[derive(Debug, Clone)]
pub struct LambdaField {
    pub lattice: SiteLattice,
    /// λ(z) = 1 + highest admissible-path height over column z
    pub lambda: Vec<usize>,
    pub growth: GrowthFunction,
    pub status: LambdaStatus,
}

impl LambdaField {
    pub fn constructed(&self) -> Result<&Self> {
        match self.status {
            LambdaStatus::Constructed => Ok(self),
            LambdaStatus::Overflow => Err(Error::Overflow { height: self.lattice.height }),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# pinlab lambda v1 status={:?}", self.status)?;
        writeln!(w, "k,lambda")?;
        for (k, l) in self.lambda.iter().enumerate() {
            writeln!(w, "{k},{l}")?;
        }
        Ok(())
    }
}

/// Top of the run of closed sites directly above `from` in column `base` (returns `from` if the
/// site above is open). Reaching height − 1 means the run leaves the window.
fn climb(lat: &SiteLattice, base: usize, from: usize) -> usize {
    let mut h = from;
    while h + 1 < lat.height && !lat.is_open(base, h + 1) {
        h += 1;
    }
    h
}

pub fn build_lambda(lattice: &SiteLattice, growth: &GrowthFunction) -> LambdaField {
    build_lambda_with(lattice, growth, Schedule::Sweep)
}

/// Highest reachable height per column. Reachable heights in a column form runs above landing
/// points, and the run top is monotone in the landing height, so tracking the column maximum is exact.
pub fn build_lambda_with(lattice: &SiteLattice, growth: &GrowthFunction, schedule: Schedule) -> LambdaField {
    let nb = lattice.base_sites();
    let max_d = lattice.n * lattice.width;
    let h_of: Vec<usize> = (0..=max_d as u64).map(|d| growth.eval(d) as usize).collect();
    let mut top: Vec<usize> = (0..nb).map(|z| climb(lattice, z, 0)).collect();
    let relax = |top: &[usize], z: usize| -> usize {
        let mut best = top[z];
        for (zp, &m) in top.iter().enumerate() {
            if zp == z {
                continue;
            }
            let drop = h_of[lattice.distance(z, zp) as usize];
            if m >= drop {
                let landing = m - drop;
                if landing >= best {
                    best = best.max(climb(lattice, z, landing));
                }
            }
        }
        best
    };
    let overflow_at = lattice.height - 1;
    match schedule {
        Schedule::Sweep => loop {
            let mut changed = false;
            for z in 0..nb {
                let v = relax(&top, z);
                if v > top[z] {
                    top[z] = v;
                    changed = true;
                }
            }
            if !changed || top.iter().any(|&m| m >= overflow_at) {
                break;
            }
        },
        Schedule::Worklist => {
            let mut queue: VecDeque<usize> = (0..nb).collect();
            let mut queued = vec![true; nb];
            while let Some(z) = queue.pop_front() {
                queued[z] = false;
                let v = relax(&top, z);
                if v > top[z] {
                    top[z] = v;
                    if v >= overflow_at {
                        break;
                    }
                    for (zp, q) in queued.iter_mut().enumerate() {
                        if zp != z && !*q {
                            *q = true;
                            queue.push_back(zp);
                        }
                    }
                }
            }
        }
    }
    let status = if top.iter().any(|&m| m >= overflow_at) { LambdaStatus::Overflow } else { LambdaStatus::Constructed };
    LambdaField { lattice: lattice.clone(), lambda: top.iter().map(|m| m + 1).collect(), growth: *growth, status }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LambdaViolation {
    Growth { x: usize, y: usize, diff: u64, bound: u64 },
    NotOpen { x: usize, lambda: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaReport {
    pub passed: bool,
    pub pairs_checked: u64,
    pub first_violation: Option<LambdaViolation>,
}

/// Exhaustive check of |λ(x) − λ(y)| ≤ H(‖x − y‖₁) over all pairs and openness of (x, λ(x)).
pub fn verify_lambda(field: &LambdaField) -> LambdaReport {
    let lat = &field.lattice;
    let nb = lat.base_sites();
    let mut pairs = 0;
    for x in 0..nb {
        let l = field.lambda[x];
        if l >= lat.height || !lat.is_open(x, l) {
            return LambdaReport {
                passed: false,
                pairs_checked: pairs,
                first_violation: Some(LambdaViolation::NotOpen { x, lambda: l }),
            };
        }
    }
    for x in 0..nb {
        for y in x + 1..nb {
            pairs += 1;
            let diff = field.lambda[x].abs_diff(field.lambda[y]) as u64;
            let bound = field.growth.eval(lat.distance(x, y));
            if diff > bound {
                return LambdaReport {
                    passed: false,
                    pairs_checked: pairs,
                    first_violation: Some(LambdaViolation::Growth { x, y, diff, bound }),
                };
            }
        }
    }
    LambdaReport { passed: true, pairs_checked: pairs, first_violation: None }
}
