use super::GrowthFunction;
use crate::error::{config, Result};
use serde::Serialize;

/// Constants of the expected admissible-path count.
#[derive(Debug, Clone, Serialize)]
pub struct CountingBound {
    pub n: usize,
    pub gamma: f64,
    /// R(j) ≤ C e^{γj} for 1 ≤ j ≤ j_max
    pub c: f64,
    /// #{‖x‖₁ ≤ k} ≤ K k^n
    pub k_ball: f64,
    /// #{‖x‖₁ = k} ≤ K̃ k^{n−1}
    pub k_sphere: f64,
    pub beta: f64,
    /// Largest closed probability found with qβ < 1, 2q < 1 and qβe^{γn} < 1.
    pub q_max: f64,
    pub j_max: u64,
    /// Σ_j (K̃ R(j)^{n−1} ∨ 1)·R(j)·(q_max β)^j majorant for the sum over N, grouped by H(N) = j.
    pub series_majorant: f64,
}

const K_SCAN: u64 = 10_000;

fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// #{x ∈ Z^n : ‖x‖₁ ≤ k} = Σ_i 2^i C(n,i) C(k,i).
pub fn ball_count(n: usize, k: u64) -> f64 {
    (0..=n as u64).map(|i| 2f64.powi(i as i32) * binomial(n as u64, i) * binomial(k, i)).sum()
}

fn sphere_count(n: usize, k: u64) -> f64 {
    if k == 0 { 1.0 } else { ball_count(n, k) - ball_count(n, k - 1) }
}

pub fn counting_bound(h: &GrowthFunction, n: usize) -> Result<CountingBound> {
    counting_bound_with(h, n, 60)
}

pub fn counting_bound_with(h: &GrowthFunction, n: usize, j_max: u64) -> Result<CountingBound> {
    if n == 0 {
        return config("base dimension must be at least 1");
    }
    let nf = n as f64;
    let r: Vec<f64> = (1..=j_max).map(|j| h.r(j) as f64).collect();
    let k_ball = (1..=K_SCAN).map(|k| ball_count(n, k) / (k as f64).powi(n as i32)).fold(0.0, f64::max);
    let k_sphere = (1..=K_SCAN).map(|k| sphere_count(n, k) / (k as f64).powi(n as i32 - 1)).fold(0.0, f64::max);
    // (j+1)^{1/α} e^{−γj} peaks near j = 1/(αγ); keep γ large enough for the peak to sit inside j_max
    let gamma_min = 2.0 / (h.alpha() * j_max as f64);
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..4000 {
        let gamma = gamma_min + i as f64 * 0.0025;
        let c = r.iter().enumerate().map(|(j, rj)| rj * (-gamma * (j + 1) as f64).exp()).fold(0.0, f64::max);
        let beta = 16.0 * (gamma * nf).exp() * (2.0 * k_ball * c.powi(n as i32)).max(1.0);
        if best.is_none_or(|b| beta < b.2) {
            best = Some((gamma, c, beta));
        }
    }
    let Some((gamma, c, beta)) = best else {
        return config("no admissible (C, gamma) pair");
    };
    let ok = |q: f64| q * beta < 1.0 && 2.0 * q < 1.0 && q * beta * (gamma * nf).exp() < 1.0;
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) { lo = mid } else { hi = mid }
    }
    let q_max = lo;
    if !(q_max > 0.0) {
        return config("no positive closed probability satisfies the counting conditions");
    }
    let ratio = q_max * beta;
    let mut series_majorant = 1.0; // N = 0
    for j in 1..=j_max {
        let rj = h.r(j) as f64;
        series_majorant += (k_sphere * rj.powi(n as i32 - 1)).max(1.0) * rj * ratio.powi(j as i32);
    }
    // beyond j_max: geometric with ratio q β e^{γn} < 1
    let g = ratio * (gamma * nf).exp();
    series_majorant += k_sphere.max(1.0) * c.powi(n as i32) * g.powi(j_max as i32 + 1) / (1.0 - g);
    Ok(CountingBound { n, gamma, c, k_ball, k_sphere, beta, q_max, j_max, series_majorant })
}

/// (2q)^h (qβ)^{H(N)} / (1 − qβ).
pub fn expected_path_bound(q: f64, beta: f64, h: u32, h_of_n: u64) -> f64 {
    (2.0 * q).powi(h as i32) * (q * beta).powi(h_of_n as i32) / (1.0 - q * beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_constants() {
        let h = GrowthFunction::new(0.5).unwrap();
        let b = counting_bound(&h, 1).unwrap();
        assert_eq!(b.k_ball, 3.0);
        assert_eq!(b.k_sphere, 2.0);
        let expect = 16.0 * b.gamma.exp() * (6.0 * b.c).max(1.0);
        assert!((b.beta - expect).abs() < 1e-12 * expect);
        for j in 1..=60u64 {
            assert!(h.r(j) as f64 <= b.c * (b.gamma * j as f64).exp() * (1.0 + 1e-12));
        }
        assert!(b.q_max > 0.0 && b.q_max * b.beta < 1.0);
        assert!(b.series_majorant.is_finite());
    }

    #[test]
    fn positive_for_several_exponents() {
        for &a in &[0.3, 0.5, 0.7] {
            let b = counting_bound(&GrowthFunction::new(a).unwrap(), 1).unwrap();
            assert!(b.q_max > 0.0, "alpha {a}");
        }
        let b = counting_bound(&GrowthFunction::new(0.5).unwrap(), 2).unwrap();
        assert_eq!(b.k_sphere, 4.0);
    }

    #[test]
    fn ball_counts() {
        assert_eq!(ball_count(1, 3), 7.0);
        assert_eq!(ball_count(2, 1), 5.0);
        assert_eq!(ball_count(2, 2), 13.0);
    }
}
