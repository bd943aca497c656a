//! Resistance mechanisms: a pre-existing resistant subpopulation, random
//! trait mutation at division (at a constant rate or proportional to the
//! local drug level), and the slow threshold creep of cells under
//! prolonged drug exposure.
//!
//! Mutation is a per-division Bernoulli event with probability
//! `1 - exp(-μ_eff)`. When it fires, three independent factors drawn from
//! `U[0.7, 1.7]` multiply the death threshold, the oxygen uptake rate and
//! the proliferation rate, and every trait is clamped to `[0.5, 4]` times
//! its base value, so phenotypes drift but stay bounded.

use rand::Rng;

use crate::tumour::{PhenotypeTraits, TumourCell};

/// How daughters acquire trait changes at division.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationMode {
    /// Traits are inherited unchanged.
    None,
    /// Constant per-division intensity μ.
    Spontaneous,
    /// Intensity μ·(local drug / d_ref), vanishing without drug.
    DrugInduced,
}

/// Mutation model parameters.
#[derive(Debug, Clone, Copy)]
pub struct MutationConfig {
    pub mode: MutationMode,
    /// Per-division mutation intensity μ.
    pub mu: f64,
    /// Uniform range of the multiplicative trait factors.
    pub factor_range: (f64, f64),
    /// Allowed trait window as multiples of the base trait.
    pub clamp_range: (f64, f64),
    /// Mutations only occur from this time on.
    pub enabled_from: f64,
    /// Reference drug level at which the induced intensity equals μ.
    pub d_ref: f64,
}

impl MutationConfig {
    /// The given mode with the standard factor and clamp ranges.
    pub fn new(mode: MutationMode, mu: f64, enabled_from: f64) -> Self {
        assert!(mu >= 0.0);
        Self {
            mode,
            mu,
            factor_range: (0.7, 1.7),
            clamp_range: (0.5, 4.0),
            enabled_from,
            d_ref: 2.0,
        }
    }

    pub fn disabled() -> Self {
        Self::new(MutationMode::None, 0.0, 0.0)
    }
}

/// Parameters of the non-mutational resistance pathways.
#[derive(Debug, Clone, Copy)]
pub struct ResistanceConfig {
    /// Fraction of the initial population born resistant.
    pub preexisting_fraction: f64,
    /// Resistant death threshold as a multiple of the sensitive one.
    pub th_multi: u32,
    /// Exposure time that triggers one threshold increment.
    pub exposure_threshold: f64,
    /// Multiplier applied to the death threshold per trigger.
    pub threshold_increment_factor: f64,
}

impl ResistanceConfig {
    pub fn new(
        preexisting_fraction: f64,
        th_multi: u32,
        exposure_threshold: f64,
        threshold_increment_factor: f64,
    ) -> Self {
        assert!(
            (0.0..=1.0).contains(&preexisting_fraction),
            "fraction must lie in [0, 1]"
        );
        assert!(th_multi >= 1, "threshold multiple must be at least 1");
        assert!(exposure_threshold > 0.0 && threshold_increment_factor >= 1.0);
        Self {
            preexisting_fraction,
            th_multi,
            exposure_threshold,
            threshold_increment_factor,
        }
    }
}

/// Mark `round(fraction·N)` uniformly chosen cells as resistant: their
/// death threshold becomes `th_multi·th_death`; everyone else gets the
/// plain `th_death`.
pub fn init_preexisting<R: Rng>(
    cells: &mut [TumourCell],
    fraction: f64,
    th_multi: u32,
    th_death: f64,
    rng: &mut R,
) {
    assert!((0.0..=1.0).contains(&fraction));
    for cell in cells.iter_mut() {
        cell.traits.death_threshold = th_death;
    }
    let n_resistant = (fraction * cells.len() as f64).round() as usize;
    for k in rand::seq::index::sample(rng, cells.len(), n_resistant) {
        cells[k].traits.death_threshold = th_multi as f64 * th_death;
    }
}

/// Trait inheritance at division, with a chance of mutation. Consumes one
/// uniform draw whenever the mode is active at time `t`, plus three factor
/// draws if the mutation fires; inactive calls consume nothing.
pub fn maybe_mutate<R: Rng>(
    traits: &PhenotypeTraits,
    base: &PhenotypeTraits,
    cfg: &MutationConfig,
    local_drug: f64,
    t: f64,
    rng: &mut R,
) -> PhenotypeTraits {
    let mu_eff = match cfg.mode {
        MutationMode::None => return *traits,
        MutationMode::Spontaneous => cfg.mu,
        MutationMode::DrugInduced => cfg.mu * (local_drug / cfg.d_ref),
    };
    if t < cfg.enabled_from {
        return *traits;
    }
    let fires = rng.gen::<f64>() < 1.0 - (-mu_eff).exp();
    if !fires {
        return *traits;
    }
    let (lo, hi) = cfg.factor_range;
    let mut factor = || rng.gen_range(lo..=hi);
    let mutated = PhenotypeTraits {
        death_threshold: traits.death_threshold * factor(),
        oxygen_uptake: traits.oxygen_uptake * factor(),
        proliferation_rate: traits.proliferation_rate * factor(),
    };
    mutated.clamped(base, cfg.clamp_range.0, cfg.clamp_range.1)
}

/// Threshold creep under prolonged exposure: once the exposure clock passes
/// the trigger, the death threshold grows by the increment factor (capped
/// at the fully resistant level) and the clock resets.
pub fn exposure_resistance_update(cell: &mut TumourCell, cfg: &ResistanceConfig, th_death: f64) {
    if cell.exposure_time > cfg.exposure_threshold {
        let cap = cfg.th_multi as f64 * th_death;
        cell.traits.death_threshold =
            (cell.traits.death_threshold * cfg.threshold_increment_factor).min(cap);
        cell.exposure_time = 0.0;
    }
}

/// Histogram of a trait over the clamp window `[lo, hi]`:
/// `bins` equal-width bins as `(bin_lo, bin_hi, count)`, top edge
/// inclusive.
pub fn trait_histogram(
    values: impl Iterator<Item = f64>,
    lo: f64,
    hi: f64,
    bins: usize,
) -> Vec<(f64, f64, usize)> {
    assert!(bins > 0 && hi > lo);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in values {
        let k = (((v - lo) / width).floor() as isize).clamp(0, bins as isize - 1) as usize;
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (lo + k as f64 * width, lo + (k + 1) as f64 * width, c))
        .collect()
}
