use super::SiteLattice;
use crate::error::{config, Result};
use crate::random_media::ObstacleField;
use crate::supersolution::BoxLayout;

/// Lattice induced by the obstacle field: site (k, j) is open iff the cell Q̃_{kj} holds an
/// obstacle of strength ≥ q; `obstacle[k * height + j]` is the chosen one (smallest x, then smallest y).
#[derive(Debug, Clone)]
pub struct EmbeddedLattice {
    pub lattice: SiteLattice,
    pub obstacle: Vec<Option<usize>>,
}

/// Embeds boxes k = 0..n_boxes and rows j = 1..height (row 0 is the start row, left closed).
/// Cells are half-open, [lo, hi) in both directions, so no obstacle is shared between cells.
/// With a horizontally wrapped field the lattice wraps too.
pub fn embed_obstacle_lattice(
    field: &ObstacleField,
    layout: &BoxLayout,
    q: f64,
    n_boxes: usize,
    height: usize,
) -> Result<EmbeddedLattice> {
    let win = field.window();
    let (x_first, _) = layout.q_box(0);
    let (_, x_last) = layout.q_box(n_boxes as i64 - 1);
    let y_top = layout.origin_y + (height.saturating_sub(1)) as f64 * layout.h;
    if n_boxes == 0 || height < 2 {
        return config("need at least one box and two rows");
    }
    if x_first < win.x_lo || x_last > win.x_hi || layout.origin_y < win.y_lo || y_top > win.y_hi {
        return config(format!(
            "box layout [{x_first}, {x_last}] x [{}, {y_top}] outside field window",
            layout.origin_y
        ));
    }
    let mut obstacle: Vec<Option<usize>> = vec![None; n_boxes * height];
    let mut best: Vec<(f64, f64)> = vec![(f64::INFINITY, f64::INFINITY); n_boxes * height];
    let pitch = layout.pitch();
    for (i, o) in field.obstacles().iter().enumerate() {
        if o.strength < q {
            continue;
        }
        let kf = ((o.x - layout.origin) / pitch).round();
        if kf < 0.0 || kf >= n_boxes as f64 {
            continue;
        }
        let k = kf as usize;
        let (lo, hi) = layout.q_tilde(k as i64);
        if !(o.x >= lo && o.x < hi) {
            continue;
        }
        let jf = ((o.y - layout.origin_y) / layout.h).floor();
        if jf < 0.0 {
            continue;
        }
        let j = jf as usize + 1;
        if j >= height {
            continue;
        }
        let slot = k * height + j;
        if (o.x, o.y) < best[slot] {
            best[slot] = (o.x, o.y);
            obstacle[slot] = Some(i);
        }
    }
    let open = obstacle.iter().map(Option::is_some).collect();
    let lattice = SiteLattice::from_open(1, n_boxes, height, open)?.with_wrap(field.wrap_x());
    Ok(EmbeddedLattice { lattice, obstacle })
}
