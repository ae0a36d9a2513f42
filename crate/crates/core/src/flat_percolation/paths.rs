use super::{GrowthFunction, SiteLattice};

/// Number of admissible paths (distinct sites; up-steps land on closed sites; down-jumps
/// (z', −H(|z'|)) free) from (source, 0) to (target, h) inside a one-dimensional window.
/// Exhaustive depth-first enumeration; meant for small windows.
pub fn count_admissible_paths(lat: &SiteLattice, growth: &GrowthFunction, source: usize, target: usize, h: usize) -> u64 {
    assert_eq!(lat.n, 1, "path enumeration is implemented for n = 1");
    assert!(source < lat.width && target < lat.width && h < lat.height);
    let mut visited = vec![false; lat.width * lat.height];
    let idx = |z: usize, j: usize| z * lat.height + j;
    let h_of: Vec<usize> = (0..=lat.width as u64).map(|d| growth.eval(d) as usize).collect();

    fn dfs(
        lat: &SiteLattice,
        h_of: &[usize],
        visited: &mut [bool],
        z: usize,
        j: usize,
        target: (usize, usize),
        idx: &dyn Fn(usize, usize) -> usize,
    ) -> u64 {
        if (z, j) == target {
            return 1;
        }
        let mut count = 0;
        if j + 1 < lat.height && !lat.is_open(z, j + 1) && !visited[idx(z, j + 1)] {
            visited[idx(z, j + 1)] = true;
            count += dfs(lat, h_of, visited, z, j + 1, target, idx);
            visited[idx(z, j + 1)] = false;
        }
        for zp in 0..lat.width {
            if zp == z {
                continue;
            }
            let drop = h_of[lat.distance(z, zp) as usize];
            if drop > j || visited[idx(zp, j - drop)] {
                continue;
            }
            visited[idx(zp, j - drop)] = true;
            count += dfs(lat, h_of, visited, zp, j - drop, target, idx);
            visited[idx(zp, j - drop)] = false;
        }
        count
    }

    visited[idx(source, 0)] = true;
    dfs(lat, &h_of, &mut visited, source, 0, (target, h), &idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_column_paths() {
        // everything closed in a 2 x 3 window
        let lat = SiteLattice::from_open(1, 2, 3, vec![false; 6]).unwrap();
        let g = GrowthFunction::new(0.5).unwrap();
        // only the straight climb: every detour must re-enter (0, 1)
        assert_eq!(count_admissible_paths(&lat, &g, 0, 0, 2), 1);
        // up, jump right, up: (0,0) (0,1) (1,0) (1,1)
        assert_eq!(count_admissible_paths(&lat, &g, 0, 1, 1), 2);
        let open = SiteLattice::from_open(1, 2, 3, vec![true; 6]).unwrap();
        assert_eq!(count_admissible_paths(&open, &g, 0, 0, 1), 0);
        assert_eq!(count_admissible_paths(&open, &g, 0, 0, 0), 1);
    }
}
