use crate::error::{config, Error, Result};
use crate::frac_operators::{FractionalOrder, Mollifier};
use crate::periodic_cell::{linf_bound, make_cell_params, CellParams};
use crate::special::zeta;
use serde::Serialize;
use std::f64::consts::{E, PI};

/// Free inputs of the scaling; everything else in [`ScalingParams`] is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingInputs {
    pub r0: f64,
    pub r1: f64,
    pub q: f64,
    /// Cell area V = (l − 2r1)h.
    pub v: f64,
    pub f2: f64,
    pub c_a: f64,
    pub c_delta: f64,
    /// Hölder exponent of the percolation surface.
    pub alpha: f64,
    /// a / l; must lie in [3/2, C_a].
    pub a_ratio: f64,
}

impl Default for ScalingInputs {
    fn default() -> Self {
        ScalingInputs { r0: 1.0, r1: 1.5, q: 1.0, v: 1e-4, f2: 0.5, c_a: 6.0, c_delta: 0.5, alpha: 0.5, a_ratio: 1.5 }
    }
}

/// One numerically evaluated inequality `lhs < rhs`.
#[derive(Debug, Clone, Serialize)]
pub struct Conclusion {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Conclusion {
    fn lt(label: &str, lhs: f64, rhs: f64) -> Self {
        Conclusion { label: label.to_string(), lhs, rhs, holds: lhs < rhs }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingParams {
    pub s: FractionalOrder,
    pub inputs: ScalingInputs,
    /// 2ζ(2s)/π^{2s}; undefined at s = 1/2.
    pub c_infinity: Option<f64>,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Only meaningful at s = 1/2.
    pub c_rho: f64,
    pub l: f64,
    pub d: f64,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub h: f64,
    pub epsilon: f64,
    pub f1: f64,
    pub rho: f64,
    pub f_star: f64,
    /// Candidate lower bounds on l, in the order they are stated.
    pub l_bounds: Vec<f64>,
    pub conclusions: Vec<Conclusion>,
}

/// C0 bounds ‖u_step''‖∞ d²/h: a jump of at most 2h mollified at radius d/2 has
/// second derivative at most 2h·sup|η₁'|·4/d².
pub fn step_c0() -> f64 {
    8.0 * Mollifier::new(1.0).expect("unit radius").max_abs_derivative()
}

pub fn step_c1(s: f64, c0: f64) -> f64 {
    3f64.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s) * c0
}

pub fn step_c2(s: f64, alpha: f64) -> f64 {
    12.0 / (2.0 * s - alpha) * 3f64.powf(2.0 * s - alpha) / 2f64.powf(alpha)
}

pub fn c_infinity(s: f64) -> f64 {
    2.0 * zeta(2.0 * s) / PI.powf(2.0 * s)
}

/// Slack factor making the strict lower bounds on l strict.
const L_SLACK: f64 = 1.0 + 1e-6;

impl ScalingParams {
    pub fn cell_params(&self) -> Result<CellParams> {
        make_cell_params(self.a, self.b, self.delta, self.inputs.f2, self.s)
    }

    /// Sup of |A u_step| permitted by the step estimate: (C1+C2)h/l^{2s} with d = l.
    pub fn step_operator_bound(&self) -> f64 {
        (self.c1 + self.c2) * self.h / self.l.powf(2.0 * self.s.s())
    }

    /// min{q − F2, F1}: the margin the flat supersolution provides.
    pub fn flat_margin(&self) -> f64 {
        (self.inputs.q - self.inputs.f2).min(self.f1)
    }
}

/// Chooses l, d, a, b, δ, h, ε and F* for the given order and inputs, then checks every
/// conclusion the construction relies on. Any failed inequality is an `Inconsistent` error.
pub fn choose_params(s: FractionalOrder, inp: &ScalingInputs) -> Result<ScalingParams> {
    let ScalingInputs { r0, r1, q, v, f2, c_a, c_delta, alpha, a_ratio } = *inp;
    if !(f2 > 0.0 && f2 < q) {
        return config(format!("need 0 < F2 < q, got F2 = {f2}, q = {q}"));
    }
    if !(r0 > 0.0 && r1 > 2f64.sqrt() * r0) {
        return config(format!("need r1 > sqrt(2) r0, got r0 = {r0}, r1 = {r1}"));
    }
    if !(c_a > 5.0) {
        return config(format!("need C_a > 5, got {c_a}"));
    }
    if !(c_delta > 0.0 && c_delta < 1.0) {
        return config(format!("need 0 < C_delta < 1, got {c_delta}"));
    }
    if !(v > 0.0 && v.is_finite()) {
        return config(format!("need V > 0, got {v}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return config(format!("need 0 < alpha < 1, got {alpha}"));
    }
    if !(a_ratio >= 1.5 && a_ratio <= c_a) {
        return config(format!("a/l = {a_ratio} outside [1.5, C_a = {c_a}]"));
    }
    let ss = s.s();
    let c_inf = if s.is_half() { f64::NAN } else { c_infinity(ss) };
    let c0 = step_c0();
    let c1 = step_c1(ss, c0);
    let c2 = step_c2(ss, alpha);
    let c12 = c1 + c2;
    let k_half = 36.0 * f2 / (17.0 * PI);
    let c_rho = 0.5 * (PI * r0.powi(3) / (48.0 * E * E * k_half.powi(3) * c_a.powi(3))).sqrt();

    let l_bounds = if s.is_half() {
        vec![
            c12 * v / (r1 * (q - f2)),
            (2.0 * v * c12 / (f2 * c_rho)).powi(2) + 4.0 * r1,
            12.0 * c12 * c_a * v / r0 + 2.0 * r1,
        ]
    } else {
        vec![
            4.0 * r1,
            (c12 * v / (r1 * (q - f2))).powf(0.5 / ss),
            (12.0 * c12 * v * r0).powf(0.5 / ss),
            (1.0 + 2.0 * f2 * r0 * r1 + 12.0 * f2 * c12 * v * c_inf * c_a.powf(2.0 * ss)) / (f2 * r0),
            (c_inf * (2.0f64 / 3.0).powf(2.0 * ss - 1.0) * f2).powf(-1.0 / (2.0 * ss - 1.0)),
        ]
    };
    let l = l_bounds.iter().cloned().fold(0.0, f64::max) * L_SLACK;
    let d = l;
    let a = a_ratio * l;
    let b = if s.is_half() {
        0.5 * ((PI * r0.powi(3) / (48.0 * E * E * k_half.powi(3))).sqrt() / a.sqrt()).min(r0 / 3.0)
    } else {
        a * r0 / (6.0 * (c_inf * f2 * a.powf(2.0 * ss) + r0))
    };
    let delta = 0.5 * c_delta * b;
    let h = v / (l - 2.0 * r1);
    let epsilon = (1.0 - 1e-3) * (0.25 * r0).min(0.5 * (r0 - b - delta));
    let rho = b + 0.5 * delta;
    let f1 = rho * f2 / (a - rho);

    // (C1+C2)V / (l^{2s}(l − 2r1)), the step-operator term in both branches
    let x_step = c12 * v / (l.powf(2.0 * ss) * (l - 2.0 * r1));
    let mut conclusions = Vec::new();
    let f_star = f_star_at(s, inp, l);
    if s.is_half() {
        let m = (c_rho * l.powf(-1.5)).min(r0 / (6.0 * c_a * l));
        conclusions.push(Conclusion::lt("(i) 4 r1 < l", 4.0 * r1, l));
        conclusions.push(Conclusion::lt("(ii) rho < b + delta", rho, b + delta));
        conclusions.push(Conclusion::lt("(ii) b + delta < r0/3", b + delta, r0 / 3.0));
        conclusions.push(Conclusion::lt("(ii) r0/3 < a/18", r0 / 3.0, a / 18.0));
        conclusions.push(Conclusion::lt("(iii) step term < (q - F2)/2", x_step, 0.5 * (q - f2)));
        conclusions.push(Conclusion::lt("(iv) step term < F2 m(l)/2", x_step, 0.5 * f2 * m));
        let cell = make_cell_params(a, b, delta, f2, s)?;
        conclusions.push(Conclusion::lt("(v) sup|v| bound < r0/2", linf_bound(&cell), 0.5 * r0));
        conclusions.push(Conclusion::lt("(vi) F2 m(l) < F1", f2 * m, f1 * (1.0 + 1e-12)));
    } else {
        let y = r0 * f2 / (c_inf * c_a.powf(2.0 * ss) * f2 * l.powf(2.0 * ss) + r0);
        conclusions.push(Conclusion::lt("(i) rho < r0/3", rho, r0 / 3.0));
        conclusions.push(Conclusion::lt("(i) r0/3 < a/18", r0 / 3.0, a / 18.0));
        conclusions.push(Conclusion::lt("(ii) step term < (q - F2)/2", x_step, 0.5 * (q - f2)));
        conclusions.push(Conclusion::lt("(iii) step term < Y/12", x_step, y / 12.0));
        let sup_v = c_inf * (f1 + f2) * a.powf(2.0 * ss - 1.0) * rho;
        conclusions.push(Conclusion::lt("(iv) C_inf (F1+F2) a^{2s-1} rho < r0/2", sup_v, 0.5 * r0));
        conclusions.push(Conclusion::lt("(v) Y/6 < F1", y / 6.0, f1 * (1.0 + 1e-12)));
    }
    conclusions.push(Conclusion::lt("epsilon < r0/4", epsilon, 0.25 * r0));
    conclusions.push(Conclusion::lt("b + delta < r0 - 2 epsilon", b + delta, r0 - 2.0 * epsilon));
    conclusions.push(Conclusion::lt("2a >= d + 2l", d + 2.0 * l, 2.0 * a * (1.0 + 1e-12)));
    conclusions.push(Conclusion::lt("0 < F*", 0.0, f_star));
    conclusions.push(Conclusion::lt("step term + F* < min{q - F2, F1}", x_step + f_star, (q - f2).min(f1)));

    if let Some(c) = conclusions.iter().find(|c| !c.holds) {
        return Err(Error::Inconsistent(format!("{} fails: {:e} >= {:e}", c.label, c.lhs, c.rhs)));
    }
    Ok(ScalingParams {
        s,
        inputs: *inp,
        c_infinity: (!s.is_half()).then_some(c_inf),
        c0,
        c1,
        c2,
        c_rho,
        l,
        d,
        a,
        b,
        delta,
        h,
        epsilon,
        f1,
        rho,
        f_star,
        l_bounds,
        conclusions,
    })
}

/// F* as a function of the box width: ½ min{q − F2, F2 m(l)} at s = 1/2 and
/// ½ min{q − F2, Y(l)/6} above, with Y(l) = r0 F2 / (C_∞ C_a^{2s} F2 l^{2s} + r0).
pub fn f_star_at(s: FractionalOrder, inp: &ScalingInputs, l: f64) -> f64 {
    let ScalingInputs { r0, q, f2, c_a, .. } = *inp;
    if s.is_half() {
        let k_half = 36.0 * f2 / (17.0 * PI);
        let c_rho = 0.5 * (PI * r0.powi(3) / (48.0 * E * E * k_half.powi(3) * c_a.powi(3))).sqrt();
        let m = (c_rho * l.powf(-1.5)).min(r0 / (6.0 * c_a * l));
        0.5 * (q - f2).min(f2 * m)
    } else {
        let ss = s.s();
        let y = r0 * f2 / (c_infinity(ss) * c_a.powf(2.0 * ss) * f2 * l.powf(2.0 * ss) + r0);
        0.5 * (q - f2).min(y / 6.0)
    }
}

/// Intensity of strong obstacles (strength ≥ q) needed so that a cell of area V is open
/// with probability p: 1 − exp(−λ_q V) = p.
pub fn strong_intensity_for(p: f64, v: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0 && v > 0.0) {
        return config(format!("need 0 < p < 1 and V > 0, got p = {p}, V = {v}"));
    }
    Ok(-(1.0 - p).ln() / v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(s: f64) -> FractionalOrder {
        FractionalOrder::new(s).unwrap()
    }

    #[test]
    fn three_quarters_defaults() {
        let p = choose_params(order(0.75), &ScalingInputs::default()).unwrap();
        assert!(p.conclusions.iter().all(|c| c.holds));
        assert!(p.rho < p.inputs.r0 / 3.0 && p.inputs.r0 / 3.0 < p.a / 18.0);
        assert!(p.f_star > 0.0);
        assert_eq!(p.d, p.l);
        assert!((p.a - 1.5 * p.l).abs() < 1e-12);
        assert!(p.step_operator_bound() + p.f_star < p.flat_margin());
    }

    #[test]
    fn half_defaults() {
        let inp = ScalingInputs { v: 2e-5, ..Default::default() };
        let p = choose_params(order(0.5), &inp).unwrap();
        assert!(p.conclusions.iter().all(|c| c.holds));
        assert!(p.l > 4.0 * inp.r1 && p.f_star > 0.0);
    }

    #[test]
    fn constants() {
        assert!((c_infinity(0.75) - 2.0 * 2.612375348685488 / PI.powf(1.5)).abs() < 1e-12);
        let c0 = step_c0();
        assert!((c0 - 14.386).abs() < 1e-2);
        assert!((step_c1(0.75, c0) - 3f64.sqrt() / 0.5 * c0).abs() < 1e-12);
        assert!((step_c2(0.75, 0.5) - 12.0 * 3.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn a_override_and_bad_inputs() {
        let inp = ScalingInputs { a_ratio: 3.0, ..Default::default() };
        let p = choose_params(order(0.75), &inp).unwrap();
        assert!((p.a - 3.0 * p.l).abs() < 1e-12);
        let bad = ScalingInputs { a_ratio: 7.0, ..Default::default() };
        assert!(choose_params(order(0.75), &bad).is_err());
        let bad = ScalingInputs { f2: 1.5, ..Default::default() };
        assert!(choose_params(order(0.75), &bad).is_err());
    }

    #[test]
    fn intensity_inverts_open_probability() {
        let lam = strong_intensity_for(0.97, 1e-4).unwrap();
        assert!((1.0 - (-lam * 1e-4).exp() - 0.97).abs() < 1e-12);
    }
}
