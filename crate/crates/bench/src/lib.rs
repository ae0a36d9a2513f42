//! Shared fixtures for the criterion benchmarks.

use pinlab_core::random_media::{sample_obstacles, BumpProfile, Window};
use pinlab_core::{GridFunction, ObstacleField, PeriodicGrid, StrengthLaw};

/// Smooth periodic test data on `n` points of a period-`period` grid.
pub fn wave(period: f64, n: usize) -> GridFunction {
    let grid = PeriodicGrid::new(period, n).expect("valid grid");
    let w = std::f64::consts::TAU / period;
    let values = grid.points().map(|x| (w * x).sin() + 0.3 * (3.0 * w * x).cos()).collect();
    GridFunction::new(grid, values).expect("matching length")
}

/// A wrapped obstacle field of width `width` with unit bumps.
pub fn field(width: f64, intensity: f64, seed: u64) -> ObstacleField {
    let window = Window::new(0.0, width, 1.5, 20.0).expect("valid window");
    let bump = BumpProfile::new(1.0, 1.5).expect("valid radii");
    sample_obstacles(intensity, window, StrengthLaw::Uniform { lo: 0.5, hi: 2.0 }, bump, seed)
        .expect("sampling succeeds")
        .with_wrap_x(true)
}
