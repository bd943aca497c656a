//! Spatial bookkeeping for the agents: the square-lattice occupancy index
//! behind division space checks and crowding counts, plus the pairwise
//! overlap relaxation that untangles cells after division.

use rand::Rng;

use super::CellId;
use crate::fields::GridGeometry;

/// Fold a coordinate back into `[0, 1]` by mirror reflection at the walls.
pub(crate) fn reflect_into_unit(mut x: f64) -> f64 {
    while !(0.0..=1.0).contains(&x) {
        x = if x < 0.0 { -x } else { 2.0 - x };
    }
    x
}

/// Which agents sit on which grid square. Tumour cells are tracked with
/// their exact positions; vessels are per-square flags. A square is free
/// when it has neither.
#[derive(Debug, Clone)]
pub struct OccupancyIndex {
    geometry: GridGeometry,
    residents: Vec<Vec<(CellId, (f64, f64))>>,
    vessel: Vec<bool>,
    n_cells: usize,
    n_vessels: usize,
}

impl OccupancyIndex {
    pub fn new(geometry: GridGeometry) -> Self {
        let squares = geometry.n_x * geometry.n_y;
        Self {
            geometry,
            residents: vec![Vec::new(); squares],
            vessel: vec![false; squares],
            n_cells: 0,
            n_vessels: 0,
        }
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    fn slot(&self, square: (usize, usize)) -> usize {
        debug_assert!(square.0 < self.geometry.n_x && square.1 < self.geometry.n_y);
        square.0 * self.geometry.n_y + square.1
    }

    pub fn insert_cell(&mut self, id: CellId, position: (f64, f64)) {
        let sq = self.geometry.square_of(position.0, position.1);
        let slot = self.slot(sq);
        debug_assert!(
            !self.residents[slot].iter().any(|(r, _)| *r == id),
            "cell {id} inserted twice"
        );
        self.residents[slot].push((id, position));
        self.n_cells += 1;
    }

    /// Remove a cell, looked up by the position it was registered under.
    pub fn remove_cell(&mut self, id: &CellId, position: (f64, f64)) {
        let sq = self.geometry.square_of(position.0, position.1);
        let slot = self.slot(sq);
        let at = self.residents[slot]
            .iter()
            .position(|(r, _)| r == id)
            .unwrap_or_else(|| panic!("cell {id} not registered on square {sq:?}"));
        self.residents[slot].swap_remove(at);
        self.n_cells -= 1;
    }

    /// Update a cell's registered position.
    pub fn move_cell(&mut self, id: &CellId, from: (f64, f64), to: (f64, f64)) {
        let old = self.geometry.square_of(from.0, from.1);
        let new = self.geometry.square_of(to.0, to.1);
        if old == new {
            let slot = self.slot(old);
            let entry = self.residents[slot]
                .iter_mut()
                .find(|(r, _)| r == id)
                .unwrap_or_else(|| panic!("cell {id} not registered on square {old:?}"));
            entry.1 = to;
        } else {
            self.remove_cell(id, from);
            self.insert_cell(id.clone(), to);
        }
    }

    /// Flag a square as vascularised. Vessels never go away.
    pub fn set_vessel(&mut self, square: (usize, usize)) {
        let slot = self.slot(square);
        if !self.vessel[slot] {
            self.vessel[slot] = true;
            self.n_vessels += 1;
        }
    }

    pub fn is_vessel(&self, square: (usize, usize)) -> bool {
        self.vessel[self.slot(square)]
    }

    /// Free means no resident tumour cell and no vessel flag.
    pub fn is_free(&self, square: (usize, usize)) -> bool {
        let slot = self.slot(square);
        self.residents[slot].is_empty() && !self.vessel[slot]
    }

    /// The free squares among the up-to-eight neighbours of `square`, in
    /// row-major order.
    pub fn free_neighbour_squares(&self, square: (usize, usize)) -> Vec<(usize, usize)> {
        let mut free = Vec::with_capacity(8);
        let (i, j) = (square.0 as isize, square.1 as isize);
        for di in -1..=1 {
            for dj in -1..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ni, nj) = (i + di, j + dj);
                if ni < 0
                    || nj < 0
                    || ni >= self.geometry.n_x as isize
                    || nj >= self.geometry.n_y as isize
                {
                    continue;
                }
                let candidate = (ni as usize, nj as usize);
                if self.is_free(candidate) {
                    free.push(candidate);
                }
            }
        }
        free
    }

    /// Crowding count: tumour-cell centres plus vessel-square centres
    /// within `radius` of `point` (inclusive, so a cell counts itself).
    pub fn density(&self, point: (f64, f64), radius: f64) -> usize {
        assert!(radius > 0.0);
        let (x, y) = point;
        let r2 = radius * radius;
        let (lo_i, lo_j) = self.geometry.square_of(x - radius, y - radius);
        let (hi_i, hi_j) = self.geometry.square_of(x + radius, y + radius);
        let mut count = 0;
        for i in lo_i..=hi_i {
            for j in lo_j..=hi_j {
                let slot = self.slot((i, j));
                for &(_, (cx, cy)) in &self.residents[slot] {
                    if (cx - x).powi(2) + (cy - y).powi(2) <= r2 {
                        count += 1;
                    }
                }
                if self.vessel[slot] {
                    let (vx, vy) = self.geometry.center(i, j);
                    if (vx - x).powi(2) + (vy - y).powi(2) <= r2 {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    pub fn cell_count(&self) -> usize {
        self.n_cells
    }

    pub fn vessel_count(&self) -> usize {
        self.n_vessels
    }
}

/// Push apart any two cells closer than `2·r_c` until every pairwise
/// overlap is at most `tol·r_c`, or `max_iters` passes run out. Cell pairs
/// split the correction evenly; cells overlapping an (immobile) vessel
/// centre take the whole correction. Coincident pairs separate along a
/// random direction. Returns whether a full pass found nothing to move.
pub fn relax_overlaps<R: Rng>(
    positions: &mut [(f64, f64)],
    vessel_centers: &[(f64, f64)],
    r_c: f64,
    tol: f64,
    max_iters: usize,
    rng: &mut R,
) -> bool {
    assert!(r_c > 0.0 && (0.0..1.0).contains(&tol));
    let d_min = 2.0 * r_c;
    let trigger = d_min - tol * r_c;
    let side = d_min;
    let nb = (1.0 / side).ceil() as usize;
    let bin_of = |p: (f64, f64)| {
        let bx = ((p.0 / side) as usize).min(nb - 1);
        let by = ((p.1 / side) as usize).min(nb - 1);
        bx * nb + by
    };

    let mut vessel_bins = vec![Vec::new(); nb * nb];
    for (v, &p) in vessel_centers.iter().enumerate() {
        vessel_bins[bin_of(p)].push(v);
    }
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); nb * nb];

    let random_dir = |rng: &mut R| {
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        (angle.cos(), angle.sin())
    };

    for _ in 0..max_iters {
        for b in &mut bins {
            b.clear();
        }
        for (k, &p) in positions.iter().enumerate() {
            bins[bin_of(p)].push(k);
        }
        let mut moved = false;
        for i in 0..positions.len() {
            let (bx, by) = (bin_of(positions[i]) / nb, bin_of(positions[i]) % nb);
            for nx in bx.saturating_sub(1)..(bx + 2).min(nb) {
                for ny in by.saturating_sub(1)..(by + 2).min(nb) {
                    let bin = nx * nb + ny;
                    for &j in &bins[bin] {
                        if j <= i {
                            continue;
                        }
                        let (dx, dy) =
                            (positions[j].0 - positions[i].0, positions[j].1 - positions[i].1);
                        let d = (dx * dx + dy * dy).sqrt();
                        if d >= trigger {
                            continue;
                        }
                        moved = true;
                        let dir = if d < 1e-12 { random_dir(rng) } else { (dx / d, dy / d) };
                        let push = (d_min - d) / 2.0;
                        positions[i].0 = reflect_into_unit(positions[i].0 - dir.0 * push);
                        positions[i].1 = reflect_into_unit(positions[i].1 - dir.1 * push);
                        positions[j].0 = reflect_into_unit(positions[j].0 + dir.0 * push);
                        positions[j].1 = reflect_into_unit(positions[j].1 + dir.1 * push);
                    }
                    for &v in &vessel_bins[bin] {
                        let (vx, vy) = vessel_centers[v];
                        let (dx, dy) = (positions[i].0 - vx, positions[i].1 - vy);
                        let d = (dx * dx + dy * dy).sqrt();
                        if d >= trigger {
                            continue;
                        }
                        moved = true;
                        let dir = if d < 1e-12 { random_dir(rng) } else { (dx / d, dy / d) };
                        positions[i].0 = reflect_into_unit(vx + dir.0 * d_min);
                        positions[i].1 = reflect_into_unit(vy + dir.1 * d_min);
                    }
                }
            }
        }
        if !moved {
            return true;
        }
    }
    false
}
