use crate::error::{config, Result};
use serde::Serialize;

/// Boxes Q_k = [c_k − l/2, c_k + l/2] with c_k = origin + k(l + d); shrunken boxes Q̃_k are inset
/// by r1, and Q̃_{kj} = Q̃_k × [origin_y + (j−1)h, origin_y + jh] for rows j ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxLayout {
    pub l: f64,
    pub d: f64,
    pub h: f64,
    pub r1: f64,
    pub origin: f64,
    pub origin_y: f64,
}

impl BoxLayout {
    pub fn new(l: f64, d: f64, h: f64, r1: f64, origin: f64) -> Result<Self> {
        if !(l > 2.0 * r1 && r1 > 0.0) {
            return config(format!("box width l = {l} must exceed 2 r1 = {}", 2.0 * r1));
        }
        if !(d > 0.0 && h > 0.0) {
            return config(format!("box gap d = {d} and height h = {h} must be positive"));
        }
        Ok(BoxLayout { l, d, h, r1, origin, origin_y: r1 })
    }

    pub fn pitch(&self) -> f64 {
        self.l + self.d
    }

    pub fn center(&self, k: i64) -> f64 {
        self.origin + k as f64 * self.pitch()
    }

    pub fn q_box(&self, k: i64) -> (f64, f64) {
        let c = self.center(k);
        (c - 0.5 * self.l, c + 0.5 * self.l)
    }

    pub fn q_tilde(&self, k: i64) -> (f64, f64) {
        let (lo, hi) = self.q_box(k);
        (lo + self.r1, hi - self.r1)
    }

    /// Vertical extent of row j ≥ 1.
    pub fn row(&self, j: usize) -> (f64, f64) {
        assert!(j >= 1, "row 0 is the start row and has no cell");
        let lo = self.origin_y + (j - 1) as f64 * self.h;
        (lo, lo + self.h)
    }

    /// Area V = (l − 2r1)h of each cell Q̃_{kj}.
    pub fn cell_area(&self) -> f64 {
        (self.l - 2.0 * self.r1) * self.h
    }
}
