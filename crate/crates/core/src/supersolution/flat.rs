use super::BoxLayout;
use crate::error::{config, Error, Result};
use crate::flat_percolation::{EmbeddedLattice, LambdaField};
use crate::frac_operators::{GridFunction, PeriodicGrid};
use crate::periodic_cell::{FourierProfile, TabulatedProfile};
use crate::random_media::ObstacleField;
use serde::Serialize;

/// The obstacle I(k) chosen in box k, sitting in cell Q̃_{k,λ(k)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Selected {
    pub k: usize,
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub strength: f64,
    pub lambda: usize,
}

/// One selected obstacle per box, ordered by k. `period` is set when the boxes tile a torus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinnedSelection {
    pub entries: Vec<Selected>,
    pub period: Option<f64>,
}

impl PinnedSelection {
    /// Reads I(k) off the embedded lattice at height λ(k).
    pub fn from_lambda(emb: &EmbeddedLattice, lambda: &LambdaField, field: &ObstacleField) -> Result<Self> {
        lambda.constructed()?;
        let height = emb.lattice.height;
        let mut entries = Vec::with_capacity(lambda.lambda.len());
        for (k, &j) in lambda.lambda.iter().enumerate() {
            let i = emb.obstacle[k * height + j].ok_or_else(|| {
                Error::Inconsistent(format!("site ({k}, {j}) on the surface holds no obstacle"))
            })?;
            let o = field.obstacles()[i];
            entries.push(Selected { k, id: o.id, x: o.x, y: o.y, strength: o.strength, lambda: j });
        }
        let period = field.wrap_x().then(|| field.window().width());
        Ok(PinnedSelection { entries, period })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks x_i ∈ Q̃_k and strength ≥ q for every entry.
    pub fn validate(&self, layout: &BoxLayout, q: f64) -> Result<()> {
        for e in &self.entries {
            let (lo, hi) = layout.q_tilde(e.k as i64);
            if !(e.x >= lo && e.x <= hi) || e.strength < q {
                return Err(Error::Inconsistent(format!(
                    "selection in box {} at x = {} (strength {}) violates Q~_k = [{lo}, {hi}] or q = {q}",
                    e.k, e.x, e.strength
                )));
            }
        }
        Ok(())
    }

    fn offset(&self, x: f64, c: f64) -> f64 {
        match self.period {
            Some(p) => (x - c + 0.5 * p).rem_euclid(p) - 0.5 * p,
            None => x - c,
        }
    }
}

/// u_flat(x) = min over selected i with |x − x_i| ≤ l + d/2 of v(x − x_i). Where no window
/// covers x the nearest profile is used, so a lone obstacle gives u_flat = v(· − x_i).
#[derive(Debug, Clone)]
pub struct UFlat {
    selection: PinnedSelection,
    profile: TabulatedProfile,
    half_width: f64,
}

pub fn build_u_flat(selection: &PinnedSelection, cell: &FourierProfile, layout: &BoxLayout) -> Result<UFlat> {
    if selection.is_empty() {
        return config("u_flat needs at least one selected obstacle");
    }
    let a = cell.params.a;
    if 2.0 * a < (layout.d + 2.0 * layout.l) * (1.0 - 1e-12) {
        return config(format!("need 2a >= d + 2l, got a = {a}, d = {}, l = {}", layout.d, layout.l));
    }
    // resolve the mollified jump of v'' (width δ/2) by ~64 table points
    let want = 2.0 * a / (cell.params.delta / 64.0);
    let log2_n = (want.log2().ceil() as u32).clamp(12, 22);
    let profile = TabulatedProfile::new(cell, log2_n)?;
    Ok(UFlat { selection: selection.clone(), profile, half_width: layout.l + 0.5 * layout.d })
}

/// A kink of u_flat where the minimizing profile switches from `left` to `right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kink {
    pub x: f64,
    pub left: usize,
    pub right: usize,
    /// u_flat'(x+) − u_flat'(x−); negative at every transversal crossing.
    pub jump: f64,
}

impl UFlat {
    pub fn selection(&self) -> &PinnedSelection {
        &self.selection
    }

    pub fn profile(&self) -> &TabulatedProfile {
        &self.profile
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// v_i(x) = v(x − x_i) with x − x_i taken to the nearest torus image.
    pub fn v_i(&self, i: usize, x: f64) -> f64 {
        self.profile.eval(self.selection.offset(x, self.selection.entries[i].x))
    }

    pub fn dv_i(&self, i: usize, x: f64) -> f64 {
        self.profile.derivative(self.selection.offset(x, self.selection.entries[i].x))
    }

    /// Index of the minimizing profile at x; ties go to the larger index.
    pub fn argmin(&self, x: f64) -> usize {
        let mut best: Option<(usize, f64)> = None;
        let mut nearest = (0, f64::INFINITY);
        for (i, e) in self.selection.entries.iter().enumerate() {
            let off = self.selection.offset(x, e.x);
            if off.abs() < nearest.1 {
                nearest = (i, off.abs());
            }
            if off.abs() <= self.half_width {
                let v = self.profile.eval(off);
                if best.is_none_or(|(_, b)| v <= b) {
                    best = Some((i, v));
                }
            }
        }
        best.map_or(nearest.0, |(i, _)| i)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.v_i(self.argmin(x), x)
    }

    pub fn sample(&self, grid: &PeriodicGrid) -> GridFunction {
        GridFunction::from_fn(*grid, |x| self.eval(x))
    }

    /// Kinks on [lo, hi), located by sampling `n` points and bisecting each switch of the minimizer.
    pub fn kinks(&self, lo: f64, hi: f64, n: usize) -> Vec<Kink> {
        let step = (hi - lo) / n as f64;
        let mut out = Vec::new();
        let mut prev = self.argmin(lo);
        for j in 1..=n {
            let x1 = lo + j as f64 * step;
            let cur = self.argmin(x1);
            if cur != prev {
                let (mut a, mut b) = (x1 - step, x1);
                while b - a > 1e-12 * (1.0 + b.abs()) {
                    let m = 0.5 * (a + b);
                    if self.argmin(m) == prev {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let x = 0.5 * (a + b);
                let right = self.argmin(b);
                out.push(Kink { x, left: prev, right, jump: self.dv_i(right, x) - self.dv_i(prev, x) });
            }
            prev = cur;
        }
        out
    }
}

/// Gap pairs (a_k, b_k), measured as distances to the left of ξ, between the periodic profile
/// v_{i₀} of the minimizer at ξ and u_flat: u_flat = v_{i₀} just left of a_1, v_{i₀} > u_flat on
/// (a_k, b_k) and v_{i₀} < u_flat on (b_k, a_{k+1}). An unfinished final gap is dropped.
pub fn intersection_gaps(u: &UFlat, xi: f64) -> Vec<(f64, f64)> {
    let i0 = u.argmin(xi);
    let a = u.profile.a();
    // on a torus, the image of x_{i₀} nearest ξ; v_{i₀} itself is 2a-periodic, not L-periodic
    let c0 = xi - u.selection.offset(xi, u.selection.entries[i0].x);
    let tol = 1e-12 * u.profile.sup_abs.max(f64::MIN_POSITIVE);
    let above = |y: f64| {
        let x = xi - y;
        u.profile.eval(x - c0) - u.eval(x) > tol
    };
    let reach = match u.selection.period {
        Some(p) => p + 2.0 * a,
        None => {
            let leftmost = u.selection.entries.iter().map(|e| e.x).fold(f64::INFINITY, f64::min);
            (xi - leftmost + u.half_width).max(0.0) + 4.0 * a
        }
    };
    let step = a / 400.0;
    let n = (reach / step).ceil() as usize;
    let refine = |mut lo: f64, mut hi: f64, state_lo: bool| {
        while hi - lo > 1e-10 * a {
            let m = 0.5 * (lo + hi);
            if above(m) == state_lo {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    };
    let mut events = Vec::new();
    let mut prev = above(0.0);
    for j in 1..=n {
        let y = j as f64 * step;
        let cur = above(y);
        if cur != prev {
            events.push((refine(y - step, y, prev), cur));
        }
        prev = cur;
    }
    let mut gaps = Vec::new();
    let mut open: Option<f64> = None;
    for (y, entering_above) in events {
        match (entering_above, open) {
            (true, None) => open = Some(y),
            (false, Some(ak)) => {
                gaps.push((ak, y));
                open = None;
            }
            _ => {}
        }
    }
    gaps
}

/// g_flat = q on ∪[x_i − r0 + 3ε/2, x_i + r0 − 3ε/2], 0 elsewhere.
pub fn eval_g_flat(selection: &PinnedSelection, r0: f64, q: f64, epsilon: f64, x: f64) -> f64 {
    let w = r0 - 1.5 * epsilon;
    if selection.entries.iter().any(|e| selection.offset(x, e.x).abs() <= w) {
        q
    } else {
        0.0
    }
}

pub fn build_g_flat(selection: &PinnedSelection, r0: f64, q: f64, epsilon: f64, grid: &PeriodicGrid) -> Result<GridFunction> {
    if !(epsilon > 0.0 && epsilon < 0.25 * r0) {
        return config(format!("need 0 < epsilon < r0/4, got {epsilon}"));
    }
    Ok(GridFunction::from_fn(*grid, |x| eval_g_flat(selection, r0, q, epsilon, x)))
}

/// (η_ε ∗ u_flat, η_ε ∗ g_flat) on the grid.
pub fn build_smooth(u_flat: &GridFunction, g_flat: &GridFunction, epsilon: f64) -> Result<(GridFunction, GridFunction)> {
    let m = crate::frac_operators::Mollifier::new(epsilon)?;
    Ok((crate::frac_operators::mollify(u_flat, &m)?, crate::frac_operators::mollify(g_flat, &m)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac_operators::FractionalOrder;
    use crate::periodic_cell::{build_v_profile, default_n_modes, linf_bound, make_cell_params};

    fn setup(xs: &[f64], l: f64, period: Option<f64>) -> (UFlat, BoxLayout) {
        let layout = BoxLayout::new(l, l, 1e-3, 1.5, 0.0).unwrap();
        let a = 1.5 * l;
        let p = make_cell_params(a, 0.2, 0.05, 0.5, FractionalOrder::new(0.75).unwrap()).unwrap();
        let prof = build_v_profile(&p, default_n_modes(&p)).unwrap();
        let entries = xs
            .iter()
            .enumerate()
            .map(|(k, &x)| Selected { k, id: k, x, y: 2.0, strength: 1.0, lambda: 1 })
            .collect();
        let sel = PinnedSelection { entries, period };
        (build_u_flat(&sel, &prof, &layout).unwrap(), layout)
    }

    #[test]
    fn single_obstacle_is_global_profile() {
        let (u, _) = setup(&[0.3], 8.0, None);
        for x in [-40.0, -3.0, 0.3, 5.0, 31.0] {
            assert_eq!(u.eval(x), u.v_i(0, x));
        }
        assert!(intersection_gaps(&u, 1.0).is_empty());
    }

    #[test]
    fn equals_own_profile_on_own_box() {
        let l = 8.0;
        let xs = [0.5, 16.0 - 2.0, 32.0 + 2.4, 48.0 - 0.3];
        let (u, layout) = setup(&xs, l, None);
        for (k, &xi) in xs.iter().enumerate() {
            let (lo, hi) = layout.q_box(k as i64);
            for j in 0..=50 {
                let x = lo + (hi - lo) * j as f64 / 50.0;
                assert_eq!(u.eval(x), u.v_i(k, x), "box {k} at {x}");
                let _ = xi;
            }
        }
        let bound = linf_bound(&make_cell_params(12.0, 0.2, 0.05, 0.5, FractionalOrder::new(0.75).unwrap()).unwrap());
        for j in 0..400 {
            assert!(u.eval(-20.0 + j as f64 * 0.25).abs() <= bound);
        }
    }

    #[test]
    fn kinks_have_negative_jumps() {
        let (u, _) = setup(&[0.5, 14.0, 33.0, 47.5], 8.0, Some(64.0));
        let ks = u.kinks(0.0, 64.0, 20_000);
        assert!(!ks.is_empty());
        for k in ks {
            assert!(k.jump < 0.0, "{k:?}");
        }
    }

    #[test]
    fn gap_law_holds() {
        let (u, _) = setup(&[0.5, 14.0, 33.0, 47.5], 8.0, Some(64.0));
        let a = 12.0;
        for xi in [1.0, 10.0, 20.3, 40.0] {
            let gaps = intersection_gaps(&u, xi);
            assert!(!gaps.is_empty());
            for w in gaps.windows(2) {
                assert!(w[1].0 - w[0].1 <= a + 1e-8);
            }
            for g in gaps {
                assert!(g.1 - g.0 >= a - 1e-8, "{g:?}");
            }
        }
    }
}
