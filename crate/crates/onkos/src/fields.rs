//! Continuous fields on a uniform cell-centred grid over the unit square.
//!
//! The grid tiles `[0,1]²` with `n_x × n_y` square cells of side `dx`;
//! field values live at cell centres `((i+1/2)·dx, (j+1/2)·dx)`. One grid
//! cell is exactly one vessel square: the cell side equals one tumour-cell
//! diameter, so the PDE grid and the agent lattice coincide.
//!
//! Zero-flux boundaries are imposed with mirror ghost values across the
//! domain faces (`U[-1] = U[0]` for the cell-centred layout). That closure
//! makes the discrete Laplacian's column sums vanish, so diffusion
//! conserves the plain grid sum exactly; it is also spectrally second-order
//! for the cell-centred grid because the ghost cell mirrors the first
//! interior value across the physical face.

mod adi;
mod motion;

pub use adi::adi_step;
pub use motion::{apply_corrections, move_coefficients, MoveCoefficients, WalkParams};

use ndarray::Array2;

use crate::error::SimError;

/// Uniform cell-centred grid over the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    /// Cell count along x.
    pub n_x: usize,
    /// Cell count along y.
    pub n_y: usize,
    /// Cell side length (one tumour-cell diameter).
    pub dx: f64,
}

impl GridGeometry {
    /// Geometry with `n_x × n_y` cells of side `dx`. The cells must tile
    /// the unit square exactly and the ghost-cell scheme needs at least
    /// three cells per axis.
    pub fn new(n_x: usize, n_y: usize, dx: f64) -> Self {
        assert!(n_x >= 3 && n_y >= 3, "grid needs at least 3 cells per axis");
        assert!(
            (dx * n_x as f64 - 1.0).abs() <= 1e-9 && (dx * n_y as f64 - 1.0).abs() <= 1e-9,
            "cells must tile the unit square: dx*n == 1"
        );
        Self { n_x, n_y, dx }
    }

    /// Square `n × n` grid on the unit square.
    pub fn unit(n: usize) -> Self {
        Self::new(n, n, 1.0 / n as f64)
    }

    /// x-coordinate of the node (cell centre) with index `i`.
    pub fn node_x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    /// y-coordinate of the node (cell centre) with index `j`.
    pub fn node_y(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx
    }

    /// Centre of grid square `(i, j)`.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (self.node_x(i), self.node_y(j))
    }

    /// Index of the grid square containing `(x, y)`, clamped to the grid.
    pub fn square_of(&self, x: f64, y: f64) -> (usize, usize) {
        let i = ((x / self.dx).floor() as isize).clamp(0, self.n_x as isize - 1);
        let j = ((y / self.dx).floor() as isize).clamp(0, self.n_y as isize - 1);
        (i as usize, j as usize)
    }

    /// Whether `(x, y)` lies in the closed unit square.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)
    }
}

/// What a [`ScalarField`] holds; drives clamping and snapshot labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Taf,
    Drug,
    Oxygen,
    Indicator,
}

/// A scalar field sampled at the cell centres of a [`GridGeometry`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub geometry: GridGeometry,
    pub kind: FieldKind,
    /// Node values, indexed `[i, j]` = (x index, y index).
    pub values: Array2<f64>,
}

impl ScalarField {
    /// Zero field of the given kind.
    pub fn zeros(kind: FieldKind, geometry: GridGeometry) -> Self {
        Self {
            geometry,
            kind,
            values: Array2::zeros((geometry.n_x, geometry.n_y)),
        }
    }

    /// Constant field of the given kind.
    pub fn constant(kind: FieldKind, geometry: GridGeometry, value: f64) -> Self {
        Self {
            geometry,
            kind,
            values: Array2::from_elem((geometry.n_x, geometry.n_y), value),
        }
    }

    /// Bilinear interpolation at `(x, y)`; constant extrapolation within
    /// the half-cell boundary margin, matching the mirror ghost closure.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let g = &self.geometry;
        let u = (x / g.dx - 0.5).clamp(0.0, (g.n_x - 1) as f64);
        let v = (y / g.dx - 0.5).clamp(0.0, (g.n_y - 1) as f64);
        let i0 = (u.floor() as usize).min(g.n_x - 2);
        let j0 = (v.floor() as usize).min(g.n_y - 2);
        let fx = u - i0 as f64;
        let fy = v - j0 as f64;
        let w = &self.values;
        (1.0 - fx) * (1.0 - fy) * w[[i0, j0]]
            + fx * (1.0 - fy) * w[[i0 + 1, j0]]
            + (1.0 - fx) * fy * w[[i0, j0 + 1]]
            + fx * fy * w[[i0 + 1, j0 + 1]]
    }

    /// Plain sum over all nodes (the conserved quantity under zero-flux
    /// diffusion).
    pub fn grid_sum(&self) -> f64 {
        self.values.sum()
    }

    /// Largest node value, 0 for an empty grid.
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Error out on the first non-finite node value.
    pub fn ensure_finite(&self, what: &'static str) -> Result<(), SimError> {
        for ((i, j), &v) in self.values.indexed_iter() {
            if !v.is_finite() {
                return Err(SimError::NonFinite { what, i, j, value: v });
            }
        }
        Ok(())
    }

    fn clamp_min(&mut self, lo: f64) {
        self.values.mapv_inplace(|v| v.max(lo));
    }

    fn clamp_range(&mut self, lo: f64, hi: f64) {
        self.values.mapv_inplace(|v| v.clamp(lo, hi));
    }
}

/// The linear angiogenic-factor profile `c(x, y) = k·y`.
///
/// This is the exact solution of the quasi-steady problem with `c = 0` at
/// the bottom edge, `c = k` at the top edge and zero flux on the sides, and
/// is used as the initial condition for every run.
pub fn init_linear_taf(k: f64, geometry: GridGeometry) -> ScalarField {
    assert!(k >= 0.0, "TAF boundary value must be non-negative");
    let mut field = ScalarField::zeros(FieldKind::Taf, geometry);
    for j in 0..geometry.n_y {
        let c = k * geometry.node_y(j);
        field.values.column_mut(j).fill(c);
    }
    field
}

/// Occupancy indicator: 1 at every node within one cell radius (`dx/2`) of
/// any listed position, 0 elsewhere. Rejects positions outside the domain.
pub fn deposit_indicator(
    positions: &[(f64, f64)],
    geometry: GridGeometry,
) -> Result<ScalarField, SimError> {
    let mut field = ScalarField::zeros(FieldKind::Indicator, geometry);
    stamp(positions.iter().map(|&p| (p, 1.0)), geometry, |node, w| {
        field.values[node] = w;
    })?;
    Ok(field)
}

/// Per-node sink map for rate-weighted sites: each site adds its rate to
/// every node within one cell radius of it (rates of overlapping sites
/// accumulate).
pub(crate) fn deposit_weighted(
    sites: &[((f64, f64), f64)],
    geometry: GridGeometry,
) -> Result<Array2<f64>, SimError> {
    let mut map = Array2::zeros((geometry.n_x, geometry.n_y));
    stamp(sites.iter().copied(), geometry, |node, w| {
        map[node] += w;
    })?;
    Ok(map)
}

/// Visit every node within `dx/2` of each site. With node spacing `dx`
/// that is at most one node per site, found among the four cells around
/// the site.
fn stamp(
    sites: impl Iterator<Item = ((f64, f64), f64)>,
    geometry: GridGeometry,
    mut visit: impl FnMut((usize, usize), f64),
) -> Result<(), SimError> {
    let radius = geometry.dx / 2.0;
    let r2 = radius * radius;
    for ((x, y), w) in sites {
        if !geometry.contains(x, y) {
            return Err(SimError::OutOfDomain { x, y });
        }
        let (ci, cj) = geometry.square_of(x, y);
        for i in ci.saturating_sub(1)..(ci + 2).min(geometry.n_x) {
            for j in cj.saturating_sub(1)..(cj + 2).min(geometry.n_y) {
                let (nx, ny) = geometry.center(i, j);
                let d2 = (nx - x) * (nx - x) + (ny - y) * (ny - y);
                if d2 <= r2 {
                    visit((i, j), w);
                }
            }
        }
    }
    Ok(())
}

/// Reaction parameters of the angiogenic-factor equation.
#[derive(Debug, Clone, Copy)]
pub struct TafParams {
    pub diffusion: f64,
    pub decay: f64,
    /// Production rate at nodes covered by hypoxic cells.
    pub secretion: f64,
    /// Uptake rate at nodes covered by vessels.
    pub vessel_uptake: f64,
}

/// Reaction parameters of the drug equation (the supply rate is passed per
/// step because it follows the treatment schedule).
#[derive(Debug, Clone, Copy)]
pub struct DrugParams {
    pub diffusion: f64,
    pub decay: f64,
    /// Concentration-proportional uptake rate at tumour-covered nodes.
    pub uptake: f64,
}

/// Reaction parameters of the oxygen equation.
#[derive(Debug, Clone, Copy)]
pub struct OxygenParams {
    pub diffusion: f64,
    pub decay: f64,
    /// Vessel supply rate; enters as `supply·(1 - o)` so oxygen relaxes
    /// towards the maximum concentration 1 at vessel nodes.
    pub supply: f64,
}

/// One time step of the angiogenic-factor equation:
/// diffusion - decay + secretion at hypoxic-cell nodes - uptake at vessel
/// nodes. The result is clamped at zero.
pub fn step_taf(
    c: &ScalarField,
    hypoxic_positions: &[(f64, f64)],
    vessel_positions: &[(f64, f64)],
    params: &TafParams,
    dt: f64,
) -> Result<ScalarField, SimError> {
    let chi_h = deposit_indicator(hypoxic_positions, c.geometry)?;
    let chi_v = deposit_indicator(vessel_positions, c.geometry)?;
    let mut out = adi_step(
        c,
        params.diffusion,
        |u, i, j| {
            -params.decay * u + params.secretion * chi_h.values[[i, j]]
                - params.vessel_uptake * u * chi_v.values[[i, j]]
        },
        dt,
    )?;
    out.clamp_min(0.0);
    Ok(out)
}

/// One time step of the drug equation: diffusion - decay - uptake at
/// tumour-covered nodes + supply at vessel nodes. The result is clamped at
/// zero.
pub fn step_drug(
    d: &ScalarField,
    tumour_positions: &[(f64, f64)],
    vessel_positions: &[(f64, f64)],
    supply_rate: f64,
    params: &DrugParams,
    dt: f64,
) -> Result<ScalarField, SimError> {
    assert!(supply_rate >= 0.0, "drug supply rate must be non-negative");
    let chi_t = deposit_indicator(tumour_positions, d.geometry)?;
    let chi_v = deposit_indicator(vessel_positions, d.geometry)?;
    let mut out = adi_step(
        d,
        params.diffusion,
        |u, i, j| {
            -params.decay * u - params.uptake * u * chi_t.values[[i, j]]
                + supply_rate * chi_v.values[[i, j]]
        },
        dt,
    )?;
    out.clamp_min(0.0);
    Ok(out)
}

/// One time step of the oxygen equation: diffusion - decay - per-cell
/// uptake at covered nodes + saturating vessel supply. Uptake sites carry
/// their own rates (phenotype-dependent, discounted for hypoxic cells by
/// the caller). The result is clamped to `[0, 1]`.
pub fn step_oxygen(
    o: &ScalarField,
    uptake_sites: &[((f64, f64), f64)],
    vessel_positions: &[(f64, f64)],
    params: &OxygenParams,
    dt: f64,
) -> Result<ScalarField, SimError> {
    let sink = deposit_weighted(uptake_sites, o.geometry)?;
    let chi_v = deposit_indicator(vessel_positions, o.geometry)?;
    let mut out = adi_step(
        o,
        params.diffusion,
        |u, i, j| {
            -params.decay * u - sink[[i, j]] + params.supply * (1.0 - u) * chi_v.values[[i, j]]
        },
        dt,
    )?;
    out.clamp_range(0.0, 1.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_taf_matches_closed_form() {
        let geom = GridGeometry::unit(100);
        let field = init_linear_taf(5.0, geom);
        for j in 0..geom.n_y {
            for i in 0..geom.n_x {
                assert_abs_diff_eq!(
                    field.values[[i, j]],
                    5.0 * geom.node_y(j),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn linear_taf_hits_midline_value() {
        // An odd grid has a node row exactly at y = 0.5.
        let geom = GridGeometry::unit(5);
        let field = init_linear_taf(5.0, geom);
        assert_abs_diff_eq!(geom.node_y(2), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(field.values[[3, 2]], 2.5, epsilon = 1e-12);
    }

    #[test]
    fn linear_taf_zero_k_is_zero() {
        let geom = GridGeometry::unit(10);
        let field = init_linear_taf(0.0, geom);
        assert_eq!(field.grid_sum(), 0.0);
    }

    #[test]
    fn linear_taf_has_zero_laplacian_residual() {
        let geom = GridGeometry::unit(100);
        let field = init_linear_taf(5.0, geom);
        let v = &field.values;
        for i in 1..geom.n_x - 1 {
            for j in 1..geom.n_y - 1 {
                let lap = v[[i + 1, j]] + v[[i - 1, j]] + v[[i, j + 1]] + v[[i, j - 1]]
                    - 4.0 * v[[i, j]];
                assert!(lap.abs() <= 1e-12, "residual {lap} at ({i}, {j})");
            }
        }
    }

    #[test]
    fn indicator_empty_is_zero() {
        let geom = GridGeometry::unit(10);
        let f = deposit_indicator(&[], geom).unwrap();
        assert_eq!(f.grid_sum(), 0.0);
    }

    #[test]
    fn indicator_stamps_only_the_node_under_a_point() {
        let geom = GridGeometry::unit(10);
        let p = geom.center(4, 7);
        let f = deposit_indicator(&[p], geom).unwrap();
        assert_eq!(f.values[[4, 7]], 1.0);
        assert_eq!(f.grid_sum(), 1.0);
    }

    #[test]
    fn indicator_union_of_disjoint_stamps() {
        let geom = GridGeometry::unit(100);
        let a = geom.center(10, 10);
        // 3 cell radii apart: stamps cannot overlap.
        let b = (a.0 + 3.0 * geom.dx / 2.0, a.1);
        let fa = deposit_indicator(&[a], geom).unwrap();
        let fb = deposit_indicator(&[b], geom).unwrap();
        let fab = deposit_indicator(&[a, b], geom).unwrap();
        // Brute-force check against the definition, node by node.
        let r2 = (geom.dx / 2.0) * (geom.dx / 2.0);
        for ((i, j), &v) in fab.values.indexed_iter() {
            let (nx, ny) = geom.center(i, j);
            let near_a = (nx - a.0).powi(2) + (ny - a.1).powi(2) <= r2;
            let near_b = (nx - b.0).powi(2) + (ny - b.1).powi(2) <= r2;
            assert_eq!(v, if near_a || near_b { 1.0 } else { 0.0 });
        }
        assert_eq!(fab.grid_sum(), fa.grid_sum() + fb.grid_sum());
    }

    #[test]
    fn indicator_rejects_outside_positions() {
        let geom = GridGeometry::unit(10);
        assert!(matches!(
            deposit_indicator(&[(1.5, 0.5)], geom),
            Err(SimError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn sample_is_exact_on_nodes_and_midpoints() {
        let geom = GridGeometry::unit(10);
        let mut f = ScalarField::zeros(FieldKind::Oxygen, geom);
        f.values[[3, 4]] = 1.0;
        f.values[[4, 4]] = 1.0;
        let (x, y) = geom.center(3, 4);
        assert_abs_diff_eq!(f.sample(x, y), 1.0, epsilon = 1e-15);
        // Centre of the square between four nodes with values {0,0,1,1}.
        let mut g = ScalarField::zeros(FieldKind::Oxygen, geom);
        g.values[[3, 5]] = 1.0;
        g.values[[4, 5]] = 1.0;
        let mx = (geom.node_x(3) + geom.node_x(4)) / 2.0;
        let my = (geom.node_y(4) + geom.node_y(5)) / 2.0;
        assert_abs_diff_eq!(g.sample(mx, my), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn taf_step_signs_at_source_and_sink_nodes() {
        let geom = GridGeometry::unit(10);
        let params = TafParams {
            diffusion: 0.0,
            decay: 0.0,
            secretion: 1000.0,
            vessel_uptake: 0.1,
        };
        let c0 = ScalarField::constant(FieldKind::Taf, geom, 1.0);
        let hyp = geom.center(2, 2);
        let ves = geom.center(7, 7);
        let c1 = step_taf(&c0, &[hyp], &[ves], &params, 0.1).unwrap();
        assert!(c1.values[[2, 2]] > c0.values[[2, 2]]);
        assert!(c1.values[[7, 7]] < c0.values[[7, 7]]);
        // Pointwise forward-Euler oracle for the uncoupled nodes.
        assert_abs_diff_eq!(c1.values[[2, 2]], 1.0 + 0.1 * 1000.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c1.values[[7, 7]], 1.0 - 0.1 * 0.1 * 1.0, epsilon = 1e-12);
    }

    #[test]
    fn drug_step_vessel_source_grows_by_supply_dt() {
        let geom = GridGeometry::unit(10);
        let params = DrugParams {
            diffusion: 0.0,
            decay: 0.0,
            uptake: 0.5,
        };
        let d0 = ScalarField::zeros(FieldKind::Drug, geom);
        let ves = geom.center(5, 5);
        let d1 = step_drug(&d0, &[], &[ves], 2.0, &params, 0.1).unwrap();
        assert_abs_diff_eq!(d1.values[[5, 5]], 2.0 * 0.1, epsilon = 1e-14);
        // No supply, no drug: stays identically zero.
        let d2 = step_drug(&d0, &[], &[ves], 0.0, &params, 0.1).unwrap();
        assert_eq!(d2.grid_sum(), 0.0);
    }

    #[test]
    fn drug_step_tumour_node_decays_at_combined_rate() {
        let geom = GridGeometry::unit(10);
        let params = DrugParams {
            diffusion: 0.0,
            decay: 0.01,
            uptake: 0.5,
        };
        let d0 = ScalarField::constant(FieldKind::Drug, geom, 1.0);
        let cell = geom.center(4, 4);
        let dt = 0.1;
        let d1 = step_drug(&d0, &[cell], &[], 0.0, &params, dt).unwrap();
        // Pointwise ODE d' = -(decay + uptake)·d, one forward-Euler step.
        assert_abs_diff_eq!(d1.values[[4, 4]], 1.0 - 0.51 * dt, epsilon = 1e-14);
    }

    #[test]
    fn oxygen_step_fixed_point_and_supply() {
        let geom = GridGeometry::unit(10);
        let params = OxygenParams {
            diffusion: 0.0,
            decay: 0.0,
            supply: 3.5,
        };
        // Saturated everywhere with vessels everywhere: supply factor
        // (1 - o) vanishes, so o stays 1.
        let o1 = ScalarField::constant(FieldKind::Oxygen, geom, 1.0);
        let vessels: Vec<_> = (0..geom.n_x)
            .flat_map(|i| (0..geom.n_y).map(move |j| (i, j)))
            .map(|(i, j)| geom.center(i, j))
            .collect();
        let next = step_oxygen(&o1, &[], &vessels, &params, 0.1).unwrap();
        for &v in next.values.iter() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
        // A single vessel node at o = 0 rises by supply·dt.
        let o0 = ScalarField::zeros(FieldKind::Oxygen, geom);
        let one = step_oxygen(&o0, &[], &[geom.center(3, 3)], &params, 0.1).unwrap();
        assert_abs_diff_eq!(one.values[[3, 3]], 0.35, epsilon = 1e-14);
    }

    #[test]
    fn oxygen_decay_only_node_ode() {
        let geom = GridGeometry::unit(10);
        let params = OxygenParams {
            diffusion: 0.0,
            decay: 0.025,
            supply: 3.5,
        };
        let o0 = ScalarField::constant(FieldKind::Oxygen, geom, 0.8);
        let o1 = step_oxygen(&o0, &[], &[], &params, 0.1).unwrap();
        for &v in o1.values.iter() {
            assert_abs_diff_eq!(v, 0.8 * (1.0 - 0.025 * 0.1), epsilon = 1e-14);
        }
    }

    #[test]
    fn oxygen_never_leaves_unit_interval() {
        let geom = GridGeometry::unit(10);
        let params = OxygenParams {
            diffusion: 0.0,
            decay: 0.0,
            supply: 100.0,
        };
        // Massive uptake drives the bare update negative; clamping holds.
        let o0 = ScalarField::constant(FieldKind::Oxygen, geom, 0.5);
        let sites = vec![((0.55, 0.55), 50.0)];
        let o1 = step_oxygen(&o0, &sites, &[geom.center(8, 8)], &params, 0.5).unwrap();
        for &v in o1.values.iter() {
            assert!((0.0..=1.0).contains(&v));
        }
    }
}
