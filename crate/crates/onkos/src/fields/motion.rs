//! Movement weights for agents performing a chemotactically biased random
//! walk on the grid.
//!
//! Discretising `∂n/∂t = D·Δn - ∇·(χ(c)·n·∇c)` with central differences
//! yields, for the node occupied by an agent, five weights: stay, and move
//! one square left, right, down, or up. With `D' = D·Δt/Δx²`,
//! `b = χ(c)·Δt/(4Δx²)` and `χ(c) = χ₀/(1 + α·c)`:
//!
//! ```text
//! P_stay  = 1 - 4D' - (χ(c)·Δt/Δx²)·(c_E + c_W + c_N + c_S - 4c)
//! P_left  = D' - b·(c_E - c_W)      P_right = D' + b·(c_E - c_W)
//! P_down  = D' - b·(c_N - c_S)      P_up    = D' + b·(c_N - c_S)
//! ```
//!
//! Steep attractant gradients can drive a directional weight negative; the
//! correction rules below restore non-negativity while preserving the net
//! drift of each axis pair. A negative stay weight has no such fix and is
//! reported as a step-size error.

use super::ScalarField;
use crate::error::SimError;

/// Walk parameters: diffusivity and the saturating chemotactic response.
#[derive(Debug, Clone, Copy)]
pub struct WalkParams {
    pub diffusion: f64,
    pub chi_0: f64,
    pub alpha: f64,
}

impl WalkParams {
    /// Chemotactic sensitivity at local attractant level `c`.
    pub fn chi(&self, c: f64) -> f64 {
        self.chi_0 / (1.0 + self.alpha * c)
    }
}

/// Normalised movement weights in the order stay, left, right, down, up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveCoefficients {
    pub p: [f64; 5],
    pub normalized: bool,
}

impl MoveCoefficients {
    pub const STAY: usize = 0;
    pub const LEFT: usize = 1;
    pub const RIGHT: usize = 2;
    pub const DOWN: usize = 3;
    pub const UP: usize = 4;

    /// Offset in grid squares for each weight index.
    pub const OFFSETS: [(isize, isize); 5] = [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)];
}

/// Restores non-negativity of the four directional weights. Within each
/// axis pair: if both are negative they swap with flipped signs, if one is
/// negative its magnitude moves onto the opposite direction. The stay
/// weight is passed through untouched.
pub fn apply_corrections(raw: [f64; 5]) -> [f64; 5] {
    let [p0, l, r, d, u] = raw;
    let (l, r) = fix_pair(l, r);
    let (d, u) = fix_pair(d, u);
    [p0, l, r, d, u]
}

fn fix_pair(a: f64, b: f64) -> (f64, f64) {
    if a < 0.0 && b < 0.0 {
        (-b, -a)
    } else if a < 0.0 {
        (0.0, b - a)
    } else if b < 0.0 {
        (a - b, 0.0)
    } else {
        (a, b)
    }
}

/// Movement weights for an agent on square `(i, j)` of the attractant
/// field `c`, already corrected and normalised to sum to one. Neighbour
/// reads beyond the boundary mirror the boundary node, matching the
/// zero-flux closure of the field solver.
pub fn move_coefficients(
    c: &ScalarField,
    i: usize,
    j: usize,
    dt: f64,
    params: &WalkParams,
) -> Result<MoveCoefficients, SimError> {
    let g = c.geometry;
    assert!(i < g.n_x && j < g.n_y, "node ({i}, {j}) out of range");

    let at = |ii: usize, jj: usize| c.values[[ii.min(g.n_x - 1), jj.min(g.n_y - 1)]];
    let cc = at(i, j);
    let ce = at(i + 1, j);
    let cw = at(i.saturating_sub(1), j);
    let cn = at(i, j + 1);
    let cs = at(i, j.saturating_sub(1));

    let chi = params.chi(cc);
    let inv_dx2 = 1.0 / (g.dx * g.dx);
    let dprime = params.diffusion * dt * inv_dx2;
    let b = chi * dt * inv_dx2 / 4.0;

    let p0 = 1.0 - 4.0 * dprime - chi * dt * inv_dx2 * (ce + cw + cn + cs - 4.0 * cc);
    if p0 < 0.0 {
        return Err(SimError::StepSize { p0, i, j });
    }
    let gx = ce - cw;
    let gy = cn - cs;
    let raw = [
        p0,
        dprime - b * gx,
        dprime + b * gx,
        dprime - b * gy,
        dprime + b * gy,
    ];

    let mut p = apply_corrections(raw);
    let total: f64 = p.iter().sum();
    assert!(total > 0.0, "degenerate movement weights at ({i}, {j})");
    for w in &mut p {
        *w /= total;
    }
    Ok(MoveCoefficients {
        p,
        normalized: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FieldKind, GridGeometry};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const PARAMS: WalkParams = WalkParams {
        diffusion: 4.608e-4,
        chi_0: 0.38,
        alpha: 0.6,
    };

    #[test]
    fn uniform_attractant_gives_pure_diffusion_weights() {
        let geom = GridGeometry::unit(100);
        let c = ScalarField::constant(FieldKind::Taf, geom, 2.0);
        let mc = move_coefficients(&c, 50, 50, 0.05, &PARAMS).unwrap();
        // D' = 4.608e-4 · 0.05 / 1e-4 = 0.2304; stay = 1 - 4·0.2304.
        assert_abs_diff_eq!(mc.p[MoveCoefficients::STAY], 0.0784, epsilon = 1e-12);
        for dir in 1..5 {
            assert_abs_diff_eq!(mc.p[dir], 0.2304, epsilon = 1e-12);
        }
        assert!(mc.normalized);
    }

    #[test]
    fn gradient_biases_walk_uphill() {
        let geom = GridGeometry::unit(100);
        let c = crate::fields::init_linear_taf(5.0, geom);
        let mc = move_coefficients(&c, 50, 50, 0.05, &PARAMS).unwrap();
        assert!(mc.p[MoveCoefficients::UP] > mc.p[MoveCoefficients::DOWN]);
        assert_abs_diff_eq!(
            mc.p[MoveCoefficients::LEFT],
            mc.p[MoveCoefficients::RIGHT],
            epsilon = 1e-15
        );
    }

    #[test]
    fn stronger_local_attractant_saturates_the_bias() {
        let geom = GridGeometry::unit(100);
        let weak = crate::fields::init_linear_taf(1.0, geom);
        let mut strong = weak.clone();
        // Same gradient, higher offset: χ(c) shrinks, so the up/down gap
        // must shrink with it.
        strong.values.mapv_inplace(|v| v + 8.0);
        let w = move_coefficients(&weak, 30, 40, 0.05, &PARAMS).unwrap();
        let s = move_coefficients(&strong, 30, 40, 0.05, &PARAMS).unwrap();
        let gap = |m: &MoveCoefficients| m.p[MoveCoefficients::UP] - m.p[MoveCoefficients::DOWN];
        assert!(gap(&w) > gap(&s) && gap(&s) > 0.0);
    }

    #[test]
    fn boundary_reads_mirror_the_edge_node() {
        let geom = GridGeometry::unit(100);
        // Gentle slope: at the edge row the mirrored neighbour makes the
        // discrete Laplacian positive, which eats into the stay weight; a
        // steep field would trip the step-size guard here.
        let c = crate::fields::init_linear_taf(0.02, geom);
        let mc = move_coefficients(&c, 50, 0, 0.05, &PARAMS).unwrap();
        assert!(mc.p[MoveCoefficients::UP] > mc.p[MoveCoefficients::DOWN]);
        assert!(mc.p[MoveCoefficients::DOWN] > 0.0);
    }

    #[test]
    fn negative_stay_weight_is_a_step_size_error() {
        let geom = GridGeometry::unit(100);
        let mut c = ScalarField::zeros(FieldKind::Taf, geom);
        // A sharp spike makes the discrete Laplacian at a neighbour large
        // and positive, driving the stay weight negative at this Δt.
        c.values[[50, 50]] = 50.0;
        let res = move_coefficients(&c, 49, 50, 0.05, &PARAMS);
        assert!(matches!(res, Err(SimError::StepSize { i: 49, j: 50, .. })));
    }

    #[test]
    fn corrections_leave_valid_weights_alone() {
        let raw = [0.1, 0.2, 0.3, 0.25, 0.15];
        assert_eq!(apply_corrections(raw), raw);
    }

    #[test]
    fn single_negative_weight_moves_onto_the_opposite_direction() {
        let fixed = apply_corrections([0.5, -0.1, 0.3, 0.2, 0.1]);
        assert_eq!(fixed, [0.5, 0.0, 0.4, 0.2, 0.1]);
        let fixed = apply_corrections([0.5, 0.3, -0.1, 0.2, 0.1]);
        assert_eq!(fixed, [0.5, 0.4, 0.0, 0.2, 0.1]);
        let fixed = apply_corrections([0.5, 0.1, 0.2, -0.25, 0.3]);
        assert_eq!(fixed, [0.5, 0.1, 0.2, 0.0, 0.55]);
        let fixed = apply_corrections([0.5, 0.1, 0.2, 0.3, -0.25]);
        assert_eq!(fixed, [0.5, 0.1, 0.2, 0.55, 0.0]);
    }

    #[test]
    fn doubly_negative_pair_swaps_with_flipped_signs() {
        let fixed = apply_corrections([0.5, -0.2, -0.3, 0.1, 0.1]);
        assert_eq!(fixed, [0.5, 0.3, 0.2, 0.1, 0.1]);
        let fixed = apply_corrections([0.5, 0.1, 0.1, -0.4, -0.1]);
        assert_eq!(fixed, [0.5, 0.1, 0.1, 0.1, 0.4]);
    }

    #[test]
    fn corrections_preserve_each_axis_net_drift() {
        for raw in [
            [0.2, -0.1, 0.3, -0.2, -0.4],
            [0.0, -0.5, -0.1, 0.3, 0.2],
            [0.9, 0.1, -0.7, -0.3, 0.6],
        ] {
            let fixed = apply_corrections(raw);
            assert_abs_diff_eq!(fixed[2] - fixed[1], raw[2] - raw[1], epsilon = 1e-15);
            assert_abs_diff_eq!(fixed[4] - fixed[3], raw[4] - raw[3], epsilon = 1e-15);
            assert!(fixed[1..].iter().all(|&w| w >= 0.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn weights_form_a_probability_simplex(
            seed in 0u64..1_000_000,
            i in 0usize..20,
            j in 0usize..20,
            dt in 1e-4f64..0.05,
        ) {
            use rand::{Rng, SeedableRng};
            let geom = GridGeometry {
                n_x: 20,
                n_y: 20,
                dx: 0.05,
            };
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let mut c = ScalarField::zeros(FieldKind::Taf, geom);
            c.values.mapv_inplace(|_| rng.gen_range(0.0..5.0));
            if let Ok(mc) = move_coefficients(&c, i, j, dt, &PARAMS) {
                let total: f64 = mc.p.iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
                prop_assert!(mc.p.iter().all(|&w| w >= 0.0));
            }
        }

        #[test]
        fn corrections_never_produce_negative_directions(
            p0 in -1.0f64..1.0,
            l in -1.0f64..1.0,
            r in -1.0f64..1.0,
            d in -1.0f64..1.0,
            u in -1.0f64..1.0,
        ) {
            let fixed = apply_corrections([p0, l, r, d, u]);
            prop_assert!(fixed[1..].iter().all(|&w| w >= 0.0));
            prop_assert_eq!(fixed[0], p0);
            // Axis drift is invariant.
            prop_assert!((fixed[2] - fixed[1] - (r - l)).abs() < 1e-12);
            prop_assert!((fixed[4] - fixed[3] - (u - d)).abs() < 1e-12);
        }
    }
}
