//! Tumour-cell agents and their lifecycle mechanics.
//!
//! Cells are point agents of radius `R_c` living in the unit square. Each
//! carries a lineage id, a phenotype (oxygen uptake, proliferation rate,
//! death threshold), and running tallies of absorbed drug, DNA damage, age
//! and drug-exposure time. Cells sense the fields by bilinear
//! interpolation at their position, age only while normoxic, divide into a
//! free neighbouring grid square once mature, and die either of hypoxia or
//! of damage beyond their threshold. Crowding and free-square queries go
//! through [`OccupancyIndex`]; post-division overlaps are resolved by
//! [`relax_overlaps`].

mod spatial;

pub use spatial::{relax_overlaps, OccupancyIndex};

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::fields::ScalarField;

/// Lineage identifier: founder index plus the binary path of division
/// branches taken to reach this cell. Ordering is lexicographic in
/// (root, path), which places daughters immediately after their mother.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    root: u32,
    path: Vec<u8>,
}

impl CellId {
    /// Id of generation-0 cell number `root` (1-based).
    pub fn founder(root: u32) -> Self {
        assert!(root >= 1, "founder numbering starts at 1");
        Self { root, path: Vec::new() }
    }

    /// Id of this cell's daughter on branch 1 or 2.
    pub fn daughter(&self, branch: u8) -> Self {
        assert!(branch == 1 || branch == 2, "branches are numbered 1 and 2");
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(branch);
        Self { root: self.root, path }
    }

    /// Number of divisions separating this cell from its founder.
    pub fn generation(&self) -> usize {
        self.path.len()
    }

    /// The mother's id; `None` for founders.
    pub fn parent(&self) -> Option<Self> {
        let mut path = self.path.clone();
        path.pop().map(|_| Self { root: self.root, path })
    }

    /// Whether `self` is a strict ancestor of `other`.
    pub fn is_ancestor_of(&self, other: &Self) -> bool {
        self.root == other.root
            && self.path.len() < other.path.len()
            && other.path[..self.path.len()] == self.path[..]
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)?;
        if !self.path.is_empty() {
            write!(f, ".")?;
            for d in &self.path {
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }
}

/// Oxygen state of a living cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OxygenState {
    Normoxic,
    Hypoxic,
}

impl fmt::Display for OxygenState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OxygenState::Normoxic => "normoxic",
            OxygenState::Hypoxic => "hypoxic",
        })
    }
}

/// Outcome of the oxygen-threshold classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Normoxic,
    Hypoxic,
    Apoptosis,
}

/// The two oxygen thresholds splitting apoptotic, hypoxic and normoxic
/// ranges.
#[derive(Debug, Clone, Copy)]
pub struct OxygenThresholds {
    pub o_apop: f64,
    pub o_hyp: f64,
}

impl OxygenThresholds {
    pub fn new(o_apop: f64, o_hyp: f64) -> Self {
        assert!(
            0.0 < o_apop && o_apop < o_hyp && o_hyp < 1.0,
            "thresholds must satisfy 0 < o_apop < o_hyp < 1"
        );
        Self { o_apop, o_hyp }
    }

    /// Classify an oxygen level: at or below `o_apop` the cell dies, at or
    /// below `o_hyp` it is hypoxic, above it is normoxic.
    pub fn classify(&self, oxygen: f64) -> Classification {
        if oxygen <= self.o_apop {
            Classification::Apoptosis
        } else if oxygen <= self.o_hyp {
            Classification::Hypoxic
        } else {
            Classification::Normoxic
        }
    }
}

/// Heritable per-cell properties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhenotypeTraits {
    pub oxygen_uptake: f64,
    pub proliferation_rate: f64,
    pub death_threshold: f64,
}

impl PhenotypeTraits {
    /// Maturation age implied by the proliferation rate.
    pub fn maturation(&self) -> f64 {
        std::f64::consts::LN_2 / self.proliferation_rate
    }

    /// Clamp every trait to `[lo·base, hi·base]` of the given base traits.
    pub fn clamped(mut self, base: &PhenotypeTraits, lo: f64, hi: f64) -> Self {
        self.oxygen_uptake = self
            .oxygen_uptake
            .clamp(lo * base.oxygen_uptake, hi * base.oxygen_uptake);
        self.proliferation_rate = self
            .proliferation_rate
            .clamp(lo * base.proliferation_rate, hi * base.proliferation_rate);
        self.death_threshold = self
            .death_threshold
            .clamp(lo * base.death_threshold, hi * base.death_threshold);
        self
    }
}

/// One tumour cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TumourCell {
    pub id: CellId,
    pub position: (f64, f64),
    pub oxygen: f64,
    pub drug: f64,
    pub damage: f64,
    pub age: f64,
    /// Age at which the cell may divide; kept equal to
    /// `ln 2 / traits.proliferation_rate`.
    pub maturation: f64,
    pub traits: PhenotypeTraits,
    pub state: OxygenState,
    /// Cumulative time spent with local drug above the exposure floor.
    pub exposure_time: f64,
}

impl TumourCell {
    /// A fresh cell with zero drug, damage, age and exposure.
    pub fn new(id: CellId, position: (f64, f64), traits: PhenotypeTraits, oxygen: f64) -> Self {
        Self {
            id,
            position,
            oxygen,
            drug: 0.0,
            damage: 0.0,
            age: 0.0,
            maturation: traits.maturation(),
            traits,
            state: OxygenState::Normoxic,
            exposure_time: 0.0,
        }
    }

    /// Read the fields at the cell position: oxygen is replaced by the
    /// local value, absorbed drug grows by `d·dt`, and the exposure clock
    /// advances while the local drug exceeds `d_floor`. Returns the local
    /// drug concentration for the damage update.
    pub fn sense(
        &mut self,
        oxygen: &ScalarField,
        drug: &ScalarField,
        d_floor: f64,
        dt: f64,
    ) -> f64 {
        let (x, y) = self.position;
        self.oxygen = oxygen.sample(x, y);
        let local_drug = drug.sample(x, y);
        self.drug += local_drug * dt;
        if local_drug > d_floor {
            self.exposure_time += dt;
        }
        local_drug
    }

    /// Classification of the currently sensed oxygen level.
    pub fn classify(&self, thresholds: &OxygenThresholds) -> Classification {
        thresholds.classify(self.oxygen)
    }

    /// DNA damage gain from the local drug minus first-order repair,
    /// floored at zero.
    pub fn update_damage(&mut self, local_drug: f64, repair_rate: f64, dt: f64) {
        assert!((0.0..=1.0).contains(&repair_rate), "repair rate is a fraction");
        assert!(dt > 0.0);
        self.damage = (self.damage + local_drug * dt - repair_rate * self.damage * dt).max(0.0);
    }

    /// Whether accumulated damage has passed the tolerated threshold.
    pub fn exceeds_death_threshold(&self) -> bool {
        self.damage > self.traits.death_threshold
    }

    /// Age advances only in the normoxic state.
    pub fn advance_age(&mut self, dt: f64) {
        if self.state == OxygenState::Normoxic {
            self.age += dt;
        }
    }

    /// Whether the cell has reached its maturation age.
    pub fn is_mature(&self) -> bool {
        self.age >= self.maturation
    }

    /// One Euler-Maruyama step of the random cell motion, reflected at the
    /// domain walls. Always consumes exactly two normal draws.
    pub fn brownian_step<R: Rng>(&mut self, epsilon: f64, dt: f64, rng: &mut R) {
        assert!(dt > 0.0);
        let scale = epsilon * dt.sqrt();
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        self.position.0 = spatial::reflect_into_unit(self.position.0 + scale * zx);
        self.position.1 = spatial::reflect_into_unit(self.position.1 + scale * zy);
    }
}

/// Everything a division attempt reads besides the mother cell itself.
pub struct DivisionContext<'a> {
    pub occupancy: &'a OccupancyIndex,
    pub oxygen: &'a ScalarField,
    pub thresholds: &'a OxygenThresholds,
    /// Crowding count around the mother, from `OccupancyIndex::density`.
    pub density: usize,
    pub f_max: usize,
}

/// Attempt a division. Fires only if the mother is mature, the
/// neighbourhood is not crowded (`density < f_max`), and at least one of
/// the eight squares around the mother's square is free. On firing, the
/// first daughter takes the mother's position and the second the centre
/// of a uniformly drawn free square; damage and absorbed drug split in
/// half, ages reset, the exposure clock carries over (it records lineage
/// history, not cell age), and each daughter's traits come from the
/// `inherit` hook (the mutation point). Draw order: square choice, then
/// daughter 1 traits, then daughter 2 traits.
pub fn try_divide<R: Rng>(
    cell: &TumourCell,
    ctx: &DivisionContext,
    rng: &mut R,
    mut inherit: impl FnMut(&PhenotypeTraits, &mut R) -> PhenotypeTraits,
) -> Option<(TumourCell, TumourCell)> {
    if !cell.is_mature() || ctx.density >= ctx.f_max {
        return None;
    }
    let geometry = ctx.occupancy.geometry();
    let home = geometry.square_of(cell.position.0, cell.position.1);
    let free = ctx.occupancy.free_neighbour_squares(home);
    if free.is_empty() {
        return None;
    }
    let target = free[rng.gen_range(0..free.len())];

    let half_damage = cell.damage / 2.0;
    let half_drug = cell.drug / 2.0;
    let mut daughter = |branch: u8, position: (f64, f64), rng: &mut R| {
        let traits = inherit(&cell.traits, rng);
        let oxygen = ctx.oxygen.sample(position.0, position.1);
        let mut d = TumourCell::new(cell.id.daughter(branch), position, traits, oxygen);
        d.damage = half_damage;
        d.drug = half_drug;
        d.exposure_time = cell.exposure_time;
        d.state = match ctx.thresholds.classify(oxygen) {
            Classification::Normoxic => OxygenState::Normoxic,
            _ => OxygenState::Hypoxic,
        };
        d
    };
    let first = daughter(1, cell.position, rng);
    let second = daughter(2, geometry.center(target.0, target.1), rng);
    Some((first, second))
}
