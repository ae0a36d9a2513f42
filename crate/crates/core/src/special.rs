//! Zeta functions and the fractional Laplacian normalization constant.

use statrs::function::gamma::gamma;
use std::f64::consts::PI;

// B_{2j} / (2j)! for j = 1..=12
const BERNOULLI_OVER_FACTORIAL: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
    77683.0 / 14101100039391805440000.0,
    -236364091.0 / 1693824136731743669452800000.0,
];

/// Hurwitz zeta ζ(σ, q) = Σ_{k≥0} (q+k)^{-σ} for σ > 1, q > 0, by Euler–Maclaurin.
pub fn hurwitz_zeta(sigma: f64, q: f64) -> f64 {
    assert!(sigma > 1.0 && q > 0.0, "hurwitz_zeta needs sigma > 1, q > 0");
    euler_maclaurin(sigma, q)
}

// valid for every real σ ≠ 1 that is not too negative (the Bernoulli tail needs σ > −20)
fn euler_maclaurin(sigma: f64, q: f64) -> f64 {
    const N: usize = 16;
    let mut sum = 0.0;
    for k in 0..N {
        sum += (q + k as f64).powf(-sigma);
    }
    let x = q + N as f64;
    let xs = x.powf(-sigma);
    sum += x * xs / (sigma - 1.0) + 0.5 * xs;
    // σ(σ+1)…(σ+2j-2) x^{-σ-2j+1}
    let mut poch = sigma;
    let mut pow = xs / x;
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = c * poch * pow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let m = 2.0 * j as f64;
        poch *= (sigma + m + 1.0) * (sigma + m + 2.0);
        pow /= x * x;
    }
    sum
}

/// Riemann zeta for σ > 1.
pub fn zeta(sigma: f64) -> f64 {
    hurwitz_zeta(sigma, 1.0)
}

/// Riemann zeta for any real σ ≠ 1; negative arguments go through the functional equation.
pub fn zeta_continued(sigma: f64) -> f64 {
    assert!(sigma != 1.0, "zeta has a pole at 1");
    if sigma >= 0.0 {
        euler_maclaurin(sigma, 1.0)
    } else {
        let t = 1.0 - sigma;
        2f64.powf(sigma) * PI.powf(sigma - 1.0) * (0.5 * PI * sigma).sin() * gamma(t) * euler_maclaurin(t, 1.0)
    }
}

/// Clausen-type series C_σ(φ) = Σ_{k≥1} cos(kφ)/k^σ and S_σ(φ) = Σ_{k≥1} sin(kφ)/k^σ, summed in
/// closed form from Li_σ(e^{iφ}) = Γ(1−σ)(−iφ)^{σ−1} + Σ_m ζ(σ−m)(iφ)^m/m! on 0 < φ ≤ π.
#[derive(Debug, Clone)]
pub struct ClausenSeries {
    sigma: f64,
    // weighted cores; one core away from integer σ
    parts: Vec<(f64, ClausenCore)>,
}

#[derive(Debug, Clone)]
struct ClausenCore {
    sigma: f64,
    gamma_cos: f64,
    gamma_sin: f64,
    // ζ(σ−m)/m!
    taylor: Vec<f64>,
}

const CLAUSEN_TERMS: usize = 72;
// within this distance of an integer, Γ(1−σ) and ζ(σ−m) cancel badly and a
// Richardson-extrapolated symmetric stencil of step CLAUSEN_STEP is used instead
const CLAUSEN_NEAR_POLE: f64 = 1e-3;
const CLAUSEN_STEP: f64 = 3e-3;

impl ClausenCore {
    fn new(sigma: f64) -> Self {
        let g = gamma(1.0 - sigma);
        let mut fact = 1.0;
        let taylor = (0..CLAUSEN_TERMS)
            .map(|m| {
                if m > 0 {
                    fact *= m as f64;
                }
                zeta_continued(sigma - m as f64) / fact
            })
            .collect();
        ClausenCore {
            sigma,
            gamma_cos: g * (0.5 * PI * sigma).sin(),
            gamma_sin: g * (0.5 * PI * sigma).cos(),
            taylor,
        }
    }

    // φ in (0, π]
    fn eval(&self, phi: f64) -> (f64, f64) {
        let lead = phi.powf(self.sigma - 1.0);
        let (mut c, mut s) = (self.gamma_cos * lead, self.gamma_sin * lead);
        let mut pw = 1.0;
        for (m, t) in self.taylor.iter().enumerate() {
            let term = t * pw;
            match m % 4 {
                0 => c += term,
                1 => s += term,
                2 => c -= term,
                _ => s -= term,
            }
            if m > 8 && term.abs() < 1e-18 {
                break;
            }
            pw *= phi;
        }
        (c, s)
    }
}

impl ClausenSeries {
    /// σ > 0; C_σ is singular at φ = 0 when σ ≤ 1.
    pub fn new(sigma: f64) -> Self {
        assert!(sigma > 0.0, "Clausen series need sigma > 0");
        let nearest = sigma.round();
        let parts = if nearest >= 1.0 && (sigma - nearest).abs() < CLAUSEN_NEAR_POLE {
            let h = CLAUSEN_STEP;
            [(h, 2.0 / 3.0), (-h, 2.0 / 3.0), (2.0 * h, -1.0 / 6.0), (-2.0 * h, -1.0 / 6.0)]
                .iter()
                .map(|&(d, w)| (w, ClausenCore::new(sigma + d)))
                .collect()
        } else {
            vec![(1.0, ClausenCore::new(sigma))]
        };
        ClausenSeries { sigma, parts }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// (C_σ(φ), S_σ(φ)).
    pub fn eval(&self, phi: f64) -> (f64, f64) {
        let r = phi.rem_euclid(2.0 * PI);
        let (r, sign) = if r > PI { (2.0 * PI - r, -1.0) } else { (r, 1.0) };
        if r == 0.0 {
            let c = if self.sigma > 1.0 { zeta(self.sigma) } else { f64::INFINITY };
            return (c, 0.0);
        }
        let (c, s) = self.parts.iter().fold((0.0, 0.0), |acc, (w, p)| {
            let (c, s) = p.eval(r);
            (acc.0 + w * c, acc.1 + w * s)
        });
        (c, sign * s)
    }
}

/// C_{1,s} = 4^s Γ(1/2+s) / (√π |Γ(−s)|), so that the singular integral matches |ξ|^{2s}.
pub fn frac_constant(s: f64) -> f64 {
    assert!(s > 0.0 && s < 1.0);
    // |Γ(−s)| = Γ(1−s)/s on (0,1)
    let abs_gamma_neg = gamma(1.0 - s) / s;
    4f64.powf(s) * gamma(0.5 + s) / (PI.sqrt() * abs_gamma_neg)
}
