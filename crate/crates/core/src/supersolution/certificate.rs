use super::{build_g_flat, build_smooth, build_u_flat, BoxLayout, PinnedSelection, ScalingParams, StepFunction};
use crate::error::{config, Error, Result};
use crate::flat_percolation::{build_lambda, embed_obstacle_lattice, GrowthFunction, LambdaField};
use crate::frac_operators::{GridFunction, PeriodicGrid, SpectralOperator};
use crate::periodic_cell::{build_v_profile, default_n_modes, FourierProfile};
use crate::random_media::{sample_obstacles, BumpProfile, ObstacleField, StrengthLaw, Window};
use serde::Serialize;
use std::io::Write;

/// Geometry and tolerances of a certificate run. The boxes tile a horizontal torus of
/// length n_boxes·(l + d); rows 1..height−1 of thickness h sit above y = r1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateOptions {
    pub n_boxes: usize,
    pub height: usize,
    /// Probability that a cell holds an obstacle of strength ≥ q.
    pub p_open: f64,
    pub log2_grid: u32,
    /// Residual tolerance in units of F*.
    pub tol_factor: f64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions { n_boxes: 16, height: 64, p_open: 0.97, log2_grid: 14, tol_factor: 1e-3 }
    }
}

impl CertificateOptions {
    pub fn layout(&self, params: &ScalingParams) -> Result<BoxLayout> {
        let pitch = params.l + params.d;
        BoxLayout::new(params.l, params.d, params.h, params.inputs.r1, 0.5 * pitch)
    }

    pub fn period(&self, params: &ScalingParams) -> f64 {
        self.n_boxes as f64 * (params.l + params.d)
    }

    pub fn window(&self, params: &ScalingParams) -> Result<Window> {
        let r1 = params.inputs.r1;
        Window::new(0.0, self.period(params), r1, r1 + (self.height - 1) as f64 * params.h)
    }
}

/// Samples the wrapped obstacle field used by [`compose_and_verify`]: Poisson centers whose
/// strong-obstacle intensity makes each cell Q̃_{kj} open with probability `p_open`.
pub fn sample_certificate_field(
    params: &ScalingParams,
    opts: &CertificateOptions,
    law: StrengthLaw,
    seed: u64,
) -> Result<ObstacleField> {
    let tail = law.tail_probability(params.inputs.q);
    if !(tail > 0.0) {
        return config(format!("strength law never reaches q = {}", params.inputs.q));
    }
    let strong = super::strong_intensity_for(opts.p_open, params.inputs.v)?;
    let bump = BumpProfile::new(params.inputs.r0, params.inputs.r1)?;
    Ok(sample_obstacles(strong / tail, opts.window(params)?, law, bump, seed)?.with_wrap_x(true))
}

/// Everything produced by one certificate run; immutable once built.
#[derive(Debug, Clone)]
pub struct SupersolutionBundle {
    pub params: ScalingParams,
    pub options: CertificateOptions,
    pub layout: BoxLayout,
    pub field_seed: u64,
    pub lambda: LambdaField,
    pub selection: PinnedSelection,
    pub cell: FourierProfile,
    pub u_flat: GridFunction,
    pub u_smooth: GridFunction,
    pub g_smooth: GridFunction,
    pub u_step: GridFunction,
    pub u_total: GridFunction,
    /// A u − f(x, u) + F* on the grid.
    pub residual: GridFunction,
    pub verification: Verification,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    pub f_star: f64,
    pub tolerance: f64,
    pub max_residual: f64,
    pub worst_x: f64,
    /// max of A u_smooth − g_smooth + min{q − F2, F1}
    pub max_flat_residual: f64,
    pub max_step_operator: f64,
    pub step_operator_bound: f64,
    /// max of g_smooth − f(x, u); the obstacles must cover the flat forcing
    pub max_force_deficit: f64,
    pub min_u_total: f64,
    pub passed: bool,
}

/// Builds u = u_smooth + u_step on the torus of `field` and evaluates A u − f(x, u) + F*.
/// A percolation overflow is returned as `Error::Overflow` (enlarge `height` or raise `p_open`).
pub fn compose_and_verify(params: &ScalingParams, field: &ObstacleField, opts: &CertificateOptions) -> Result<SupersolutionBundle> {
    if !field.wrap_x() {
        return config("certificate needs a horizontally wrapped obstacle field");
    }
    let period = opts.period(params);
    if (field.window().width() - period).abs() > 1e-9 * period || field.window().x_lo != 0.0 {
        return config(format!("field window must be [0, {period}) to match {} boxes", opts.n_boxes));
    }
    let ScalingParams { inputs, .. } = *params;
    let layout = opts.layout(params)?;
    let growth = GrowthFunction::new(inputs.alpha)?;
    let emb = embed_obstacle_lattice(field, &layout, inputs.q, opts.n_boxes, opts.height)?;
    let lambda = build_lambda(&emb.lattice, &growth);
    lambda.constructed()?;
    let selection = PinnedSelection::from_lambda(&emb, &lambda, field)?;
    selection.validate(&layout, inputs.q)?;

    let cell_params = params.cell_params()?;
    let cell = build_v_profile(&cell_params, default_n_modes(&cell_params))?;
    let flat = build_u_flat(&selection, &cell, &layout)?;
    let grid = PeriodicGrid::new(period, 1usize << opts.log2_grid)?;
    let u_flat = flat.sample(&grid);
    let g_flat = build_g_flat(&selection, inputs.r0, inputs.q, params.epsilon, &grid)?;
    let (u_smooth, g_smooth) = build_smooth(&u_flat, &g_flat, params.epsilon)?;
    let step = StepFunction::anchored(&selection, &layout, inputs.alpha)?;
    let u_step = step.sample(&grid);
    let u_total = GridFunction::new(grid, u_smooth.values.iter().zip(&u_step.values).map(|(a, b)| a + b).collect())?;

    let op = SpectralOperator::new(grid, params.s);
    // A = −(−Δ)^s
    let a_smooth = negate(op.apply(&u_smooth)?);
    let a_step = negate(op.apply(&u_step)?);
    let margin = params.flat_margin();
    let f_star = params.f_star;
    let mut residual = Vec::with_capacity(grid.n_points());
    let mut max_flat: f64 = f64::NEG_INFINITY;
    let mut deficit: f64 = f64::NEG_INFINITY;
    for j in 0..grid.n_points() {
        let x = grid.x(j);
        let f = field.force(x, u_total.values[j]);
        residual.push(a_smooth.values[j] + a_step.values[j] - f + f_star);
        max_flat = max_flat.max(a_smooth.values[j] - g_smooth.values[j] + margin);
        deficit = deficit.max(g_smooth.values[j] - f);
    }
    let residual = GridFunction::new(grid, residual)?;
    let (worst_j, max_residual) = residual
        .values
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (j, r)| if r > best.1 { (j, r) } else { best });
    let tolerance = opts.tol_factor * f_star;
    let min_u_total = u_total.min();
    let verification = Verification {
        f_star,
        tolerance,
        max_residual,
        worst_x: grid.x(worst_j),
        max_flat_residual: max_flat,
        max_step_operator: a_step.sup_norm(),
        step_operator_bound: step.fractional_bound(params.s.s(), params.c1, params.c2),
        max_force_deficit: deficit,
        min_u_total,
        passed: max_residual <= tolerance && min_u_total >= 0.0,
    };
    Ok(SupersolutionBundle {
        params: params.clone(),
        options: *opts,
        layout,
        field_seed: field.seed(),
        lambda,
        selection,
        cell,
        u_flat,
        u_smooth,
        g_smooth,
        u_step,
        u_total,
        residual,
        verification,
    })
}

fn negate(mut g: GridFunction) -> GridFunction {
    g.values.iter_mut().for_each(|v| *v = -*v);
    g
}

impl SupersolutionBundle {
    /// Error describing the worst point when the certificate failed.
    pub fn require_passed(&self) -> Result<&Self> {
        let v = &self.verification;
        if v.passed {
            Ok(self)
        } else {
            Err(Error::Inconsistent(format!(
                "certificate failed: max residual {:e} > tolerance {:e} at x = {} (min u = {:e})",
                v.max_residual, v.tolerance, v.worst_x, v.min_u_total
            )))
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# pinlab supersolution v1")?;
        writeln!(w, "x,u_flat,u_smooth,u_step,u_total,residual")?;
        let g = self.u_total.grid;
        for j in 0..g.n_points() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                g.x(j),
                self.u_flat.values[j],
                self.u_smooth.values[j],
                self.u_step.values[j],
                self.u_total.values[j],
                self.residual.values[j]
            )?;
        }
        Ok(())
    }

    /// Flat `key = value` summary.
    pub fn write_summary<W: Write>(&self, mut w: W) -> Result<()> {
        let p = &self.params;
        let v = &self.verification;
        writeln!(w, "# pinlab supersolution-summary v1")?;
        let rows: [(&str, f64); 20] = [
            ("s", p.s.s()),
            ("l", p.l),
            ("d", p.d),
            ("a", p.a),
            ("b", p.b),
            ("delta", p.delta),
            ("h", p.h),
            ("epsilon", p.epsilon),
            ("F1", p.f1),
            ("F2", p.inputs.f2),
            ("V", p.inputs.v),
            ("F_star", v.f_star),
            ("tolerance", v.tolerance),
            ("max_residual", v.max_residual),
            ("worst_x", v.worst_x),
            ("max_flat_residual", v.max_flat_residual),
            ("max_step_operator", v.max_step_operator),
            ("step_operator_bound", v.step_operator_bound),
            ("max_force_deficit", v.max_force_deficit),
            ("min_u_total", v.min_u_total),
        ];
        for (k, x) in rows {
            writeln!(w, "{k} = {x:.16e}")?;
        }
        writeln!(w, "field_seed = {}", self.field_seed)?;
        writeln!(w, "n_boxes = {}", self.options.n_boxes)?;
        writeln!(w, "grid_points = {}", self.u_total.grid.n_points())?;
        writeln!(w, "passed = {}", v.passed)?;
        Ok(())
    }
}
