//! The macro-step loop tying fields, tumour cells, and vasculature
//! together, plus milestone detection over the recorded statistics.
//!
//! One step advances the state by `dt` through a fixed phase order:
//! cell mechanics, vessel-square bookkeeping, the attractant field step,
//! tip walk moves, anastomosis resolution, tip ageing, branching, forced
//! sprout extension, cellular sensing, the drug and oxygen field steps,
//! the per-cell lifecycle (classification, ageing, division, damage,
//! resistance, death), and finally a statistics row.
//!
//! Reproducibility rests on a single generator and a fixed draw order:
//! within each phase agents are visited in ascending id order, and every
//! agent consumes a fixed number of draws per visited operation (two
//! normals per mechanics step, one uniform per walk move, one per
//! eligible branch attempt plus one on firing, one per fusion coin, one
//! per division-capable attempt with a free square, and the mutation
//! draws documented in the evolution module). Identical config and seed
//! therefore replay bitwise-identically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::config::{Scenario, SimConfig};
use crate::error::SimError;
use crate::evolution::{self, MutationConfig, ResistanceConfig};
use crate::fields::{
    init_linear_taf, step_drug, step_oxygen, step_taf, FieldKind, GridGeometry, ScalarField,
};
use crate::treatment::TreatmentSchedule;
use crate::tumour::{
    relax_overlaps, try_divide, CellId, Classification, DivisionContext, OccupancyIndex,
    OxygenState, OxygenThresholds, PhenotypeTraits, TumourCell,
};
use crate::vasculature::{
    check_anastomosis, initial_tips, tip_move, try_branch, AnastomosisOutcome, AngiogenicNetwork,
    ProliferationClock, TargetRegion, TipCell, TipId, TipMove,
};

/// One line of the per-step statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub t: f64,
    pub n: usize,
    pub nn: usize,
    pub nh: usize,
    pub mean_dam: f64,
    pub std_dam: f64,
    pub vessels: usize,
    /// Active tips.
    pub tips: usize,
    pub branches: u64,
    pub anastomoses: u64,
    pub self_loops: u64,
}

/// Tip-level events worth a log line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Branch,
    Anastomosis,
    SelfLoop,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EventKind::Branch => "branch",
            EventKind::Anastomosis => "anastomosis",
            EventKind::SelfLoop => "self_loop",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub t: f64,
    pub kind: EventKind,
    pub tip: TipId,
}

/// Verdict of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// The tumour went extinct.
    Eliminated,
    /// The tumour outlived the full treated horizon.
    Persistent,
    /// No verdict: still going, never treated, or no tumour at all.
    Running,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Eliminated => "eliminated",
            Outcome::Persistent => "persistent",
            Outcome::Running => "running",
        })
    }
}

/// The milestone summary of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Milestones {
    pub declining_point: Option<f64>,
    pub shifting_point: Option<f64>,
    pub extinction_time: Option<f64>,
    pub vascularization_time: Option<f64>,
    pub outcome: Outcome,
}

/// First time after `t_init` at which the population drops below the
/// previous row's.
pub fn detect_declining_point(stats: &[StatsRow], t_init: f64) -> Option<f64> {
    stats
        .windows(2)
        .find(|w| w[1].t > t_init && w[1].n < w[0].n)
        .map(|w| w[1].t)
}

/// First time the population hits zero after having been positive.
pub fn detect_extinction(stats: &[StatsRow]) -> Option<f64> {
    let mut populated = false;
    for row in stats {
        if row.n > 0 {
            populated = true;
        } else if populated {
            return Some(row.t);
        }
    }
    None
}

/// Full state of one simulation run.
pub struct Simulation {
    config: SimConfig,
    geometry: GridGeometry,
    t: f64,
    taf: ScalarField,
    drug: ScalarField,
    oxygen: ScalarField,
    cells: Vec<TumourCell>,
    occupancy: OccupancyIndex,
    tips: Vec<TipCell>,
    network: AngiogenicNetwork,
    schedule: TreatmentSchedule,
    prolif_clock: ProliferationClock,
    thresholds: OxygenThresholds,
    base_traits: PhenotypeTraits,
    mutation: MutationConfig,
    resistance: ResistanceConfig,
    exposure_creep: bool,
    target: TargetRegion,
    rng: ChaCha12Rng,
    stats: Vec<StatsRow>,
    events: Vec<EventRecord>,
    branches: u64,
    anastomoses: u64,
    self_loops: u64,
    shifting_point: Option<f64>,
    vascularization_time: Option<f64>,
}

impl Simulation {
    /// Build the initial state: linear attractant profile, zero drug,
    /// uniform oxygen, launch tips on the bottom edge, and (outside the
    /// vessel-growth scenario) the founder population in a disc. Founder
    /// draws, in id order: two position uniforms, the maturation age, the
    /// starting age; then, for the pre-existing scenario, the resistant
    /// sample.
    pub fn new(config: &SimConfig, seed: u64) -> Result<Self, SimError> {
        let geometry = config.geometry();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);

        let taf = init_linear_taf(config.taf_init_slope, geometry);
        let drug = ScalarField::zeros(FieldKind::Drug, geometry);
        let oxygen = ScalarField::constant(FieldKind::Oxygen, geometry, config.o_init);

        let mut network = AngiogenicNetwork::new(geometry);
        let mut occupancy = OccupancyIndex::new(geometry);
        let tips = initial_tips(config.n_tips, &geometry);
        for tip in &tips {
            network.record(tip.square, &tip.id);
            occupancy.set_vessel(tip.square);
        }

        let mut cells = Vec::new();
        if config.scenario != Scenario::AngioOnly {
            let center = (config.tumour_center_x, config.tumour_center_y);
            for k in 1..=config.n_0 {
                let r = config.tumour_radius * rng.gen::<f64>().sqrt();
                let angle = rng.gen::<f64>() * std::f64::consts::TAU;
                let position = (center.0 + r * angle.cos(), center.1 + r * angle.sin());
                assert!(
                    geometry.contains(position.0, position.1),
                    "founder disc must lie inside the domain"
                );
                let a_mat = rng.gen_range(0.5625..0.6875);
                let traits = PhenotypeTraits {
                    oxygen_uptake: config.rho_o,
                    proliferation_rate: std::f64::consts::LN_2 / a_mat,
                    death_threshold: config.th_death,
                };
                let mut cell =
                    TumourCell::new(CellId::founder(k as u32), position, traits, config.o_init);
                cell.age = rng.gen_range(0.0..a_mat);
                cells.push(cell);
            }
            if config.scenario == Scenario::PreExisting {
                evolution::init_preexisting(
                    &mut cells,
                    config.preexisting_fraction,
                    config.th_multi,
                    config.th_death,
                    &mut rng,
                );
            }
            for cell in &cells {
                occupancy.insert_cell(cell.id.clone(), cell.position);
            }
        }

        let mut sim = Self {
            geometry,
            t: 0.0,
            taf,
            drug,
            oxygen,
            cells,
            occupancy,
            tips,
            network,
            schedule: config.schedule(),
            prolif_clock: ProliferationClock::new(config.prolif_interval),
            thresholds: config.oxygen_thresholds(),
            base_traits: config.base_traits(),
            mutation: config.mutation_config(),
            resistance: config.resistance_config(),
            exposure_creep: config.scenario == Scenario::DrugInduced,
            target: config.target_region(),
            rng,
            stats: Vec::new(),
            events: Vec::new(),
            branches: 0,
            anastomoses: 0,
            self_loops: 0,
            shifting_point: None,
            vascularization_time: None,
            config: config.clone(),
        };
        sim.record_stats();
        Ok(sim)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn cells(&self) -> &[TumourCell] {
        &self.cells
    }

    pub fn tips(&self) -> &[TipCell] {
        &self.tips
    }

    pub fn network(&self) -> &AngiogenicNetwork {
        &self.network
    }

    pub fn taf(&self) -> &ScalarField {
        &self.taf
    }

    pub fn drug(&self) -> &ScalarField {
        &self.drug
    }

    pub fn oxygen(&self) -> &ScalarField {
        &self.oxygen
    }

    pub fn stats(&self) -> &[StatsRow] {
        &self.stats
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// One macro-step in the standard phase order.
    pub fn macro_step(&mut self) -> Result<(), SimError> {
        self.step_ordered(false)
    }

    /// Advance to `t_end`.
    pub fn run(&mut self) -> Result<(), SimError> {
        while self.t + 1e-9 < self.config.t_end {
            self.macro_step()?;
        }
        Ok(())
    }

    /// Milestones of the run so far.
    pub fn milestones(&self) -> Milestones {
        Milestones {
            declining_point: detect_declining_point(&self.stats, self.schedule.t_init),
            shifting_point: self.shifting_point,
            extinction_time: detect_extinction(&self.stats),
            vascularization_time: self.vascularization_time,
            outcome: self.outcome(),
        }
    }

    fn outcome(&self) -> Outcome {
        if detect_extinction(&self.stats).is_some() {
            return Outcome::Eliminated;
        }
        let finished = self.t + 1e-9 >= self.config.t_end;
        let treated = self.schedule.dose_per_period() > 0.0
            && self.config.t_end > self.schedule.t_init;
        if finished && treated && !self.cells.is_empty() {
            Outcome::Persistent
        } else {
            Outcome::Running
        }
    }

    /// The phase sequence; `swap_taf_and_drug` runs the attractant step in
    /// the drug/oxygen slot and vice versa, to demonstrate that the phase
    /// order is observable.
    pub(crate) fn step_ordered(&mut self, swap_taf_and_drug: bool) -> Result<(), SimError> {
        let dt = self.config.dt;

        self.phase_mechanics(dt);
        self.phase_record_tips();
        if swap_taf_and_drug {
            self.phase_drug_oxygen(dt)?;
        } else {
            self.phase_taf(dt)?;
        }
        self.phase_tip_moves(dt)?;
        self.phase_tip_ageing(dt);
        self.phase_branching(dt);
        self.phase_forced_extension(dt)?;
        let sensed = self.phase_sense(dt);
        if swap_taf_and_drug {
            self.phase_taf(dt)?;
        } else {
            self.phase_drug_oxygen(dt)?;
        }
        self.phase_cell_lifecycle(sensed, dt);
        self.t += dt;
        self.record_stats();
        Ok(())
    }

    /// Phase 1: random cell motion, then overlap relaxation against both
    /// cells and vessel squares.
    fn phase_mechanics(&mut self, dt: f64) {
        if self.cells.is_empty() {
            return;
        }
        for cell in &mut self.cells {
            let old = cell.position;
            cell.brownian_step(self.config.epsilon_1, dt, &mut self.rng);
            self.occupancy.move_cell(&cell.id, old, cell.position);
        }
        let mut positions: Vec<(f64, f64)> = self.cells.iter().map(|c| c.position).collect();
        let vessel_centers = self.network.centers();
        relax_overlaps(
            &mut positions,
            &vessel_centers,
            self.config.r_c,
            self.config.relax_tol,
            self.config.relax_max_iters,
            &mut self.rng,
        );
        for (cell, &new_pos) in self.cells.iter_mut().zip(&positions) {
            if new_pos != cell.position {
                self.occupancy.move_cell(&cell.id, cell.position, new_pos);
                cell.position = new_pos;
            }
        }
    }

    /// Phase 2: make sure every active tip's current square is a vessel
    /// square (idempotent after moves have recorded themselves).
    fn phase_record_tips(&mut self) {
        for tip in &self.tips {
            if tip.active {
                self.network.record(tip.square, &tip.id);
                self.occupancy.set_vessel(tip.square);
            }
        }
    }

    /// Phase 3: attractant step, skipped in the vessel-growth benchmark
    /// where the profile stays frozen.
    fn phase_taf(&mut self, dt: f64) -> Result<(), SimError> {
        if self.config.scenario == Scenario::AngioOnly {
            return Ok(());
        }
        let hypoxic: Vec<(f64, f64)> = self
            .cells
            .iter()
            .filter(|c| c.state == OxygenState::Hypoxic)
            .map(|c| c.position)
            .collect();
        let vessels = self.network.centers();
        self.taf = step_taf(&self.taf, &hypoxic, &vessels, &self.config.taf_params(), dt)?;
        Ok(())
    }

    /// Phases 4 and 5: walk moves for every active tip (in id order, per
    /// substep), then anastomosis resolution of those moves in the same
    /// order.
    fn phase_tip_moves(&mut self, _dt: f64) -> Result<(), SimError> {
        let walk = self.config.walk_params();
        let mut moves: Vec<(usize, TipMove)> = Vec::new();
        for _ in 0..self.config.tip_substeps {
            for idx in 0..self.tips.len() {
                if !self.tips[idx].active {
                    continue;
                }
                if let Some(mv) = tip_move(
                    &mut self.tips[idx],
                    &mut self.network,
                    &self.taf,
                    self.config.tip_dt,
                    &walk,
                    &mut self.rng,
                )? {
                    self.occupancy.set_vessel(mv.to);
                    moves.push((idx, mv));
                }
            }
        }
        for (idx, mv) in moves {
            self.resolve_encounter(idx, mv);
        }
        Ok(())
    }

    /// A move's anastomosis check and its consequences. Movers already
    /// deactivated this step are skipped.
    fn resolve_encounter(&mut self, idx: usize, mv: TipMove) {
        if !self.tips[idx].active {
            return;
        }
        match check_anastomosis(&self.tips[idx], &mv, &self.network, &mut self.rng) {
            AnastomosisOutcome::NoEvent => {}
            AnastomosisOutcome::SelfLoop => {
                self.tips[idx].active = false;
                self.self_loops += 1;
                self.push_event(EventKind::SelfLoop, self.tips[idx].id.clone());
            }
            AnastomosisOutcome::FuseKeepOther { .. } => {
                self.tips[idx].active = false;
                self.anastomoses += 1;
                self.push_event(EventKind::Anastomosis, self.tips[idx].id.clone());
            }
            AnastomosisOutcome::FuseKeepSelf { other } => {
                self.anastomoses += 1;
                self.push_event(EventKind::Anastomosis, self.tips[idx].id.clone());
                if let Ok(other_idx) = self.tips.binary_search_by(|t| t.id.cmp(&other)) {
                    self.tips[other_idx].active = false;
                }
            }
        }
    }

    fn push_event(&mut self, kind: EventKind, tip: TipId) {
        self.events.push(EventRecord { t: self.t, kind, tip });
    }

    /// Phase 6.
    fn phase_tip_ageing(&mut self, dt: f64) {
        for tip in &mut self.tips {
            if tip.active {
                tip.age += dt;
            }
        }
    }

    /// Phase 7: branch attempts in id order. A firing tip is replaced in
    /// place by its stay-child, with the move-child inserted right after,
    /// which keeps the list id-sorted; age-zero children are ineligible,
    /// so they draw nothing when the scan passes over them.
    fn phase_branching(&mut self, dt: f64) {
        let mut idx = 0;
        while idx < self.tips.len() {
            if self.tips[idx].active {
                if let Some((stay, moved)) = try_branch(
                    &self.tips[idx],
                    &mut self.network,
                    &self.taf,
                    self.config.psi,
                    self.config.c_br,
                    dt,
                    &mut self.rng,
                ) {
                    self.branches += 1;
                    self.push_event(EventKind::Branch, self.tips[idx].id.clone());
                    self.occupancy.set_vessel(moved.square);
                    self.tips[idx] = stay;
                    self.tips.insert(idx + 1, moved);
                }
            }
            idx += 1;
        }
    }

    /// Phase 8: one forced walk move per active tip for every elapsed
    /// proliferation interval, encounters resolved immediately.
    fn phase_forced_extension(&mut self, dt: f64) -> Result<(), SimError> {
        let epochs = self.prolif_clock.due_epochs(self.t + dt);
        let walk = self.config.walk_params();
        for _ in 0..epochs {
            for idx in 0..self.tips.len() {
                if !self.tips[idx].active {
                    continue;
                }
                if let Some(mv) = tip_move(
                    &mut self.tips[idx],
                    &mut self.network,
                    &self.taf,
                    self.config.tip_dt,
                    &walk,
                    &mut self.rng,
                )? {
                    self.occupancy.set_vessel(mv.to);
                    self.resolve_encounter(idx, mv);
                }
            }
        }
        Ok(())
    }

    /// Phase 9: every cell reads the local oxygen and drug (pre-step
    /// fields). Returns the sensed drug levels, aligned with the cell
    /// list, for the damage update.
    fn phase_sense(&mut self, dt: f64) -> Vec<f64> {
        let mut sensed = Vec::with_capacity(self.cells.len());
        for cell in &mut self.cells {
            sensed.push(cell.sense(&self.oxygen, &self.drug, self.config.d_floor, dt));
        }
        sensed
    }

    /// Phase 10: drug and oxygen field steps with the current agents as
    /// sources and sinks.
    fn phase_drug_oxygen(&mut self, dt: f64) -> Result<(), SimError> {
        let tumour_positions: Vec<(f64, f64)> = self.cells.iter().map(|c| c.position).collect();
        let vessels = self.network.centers();
        self.drug = step_drug(
            &self.drug,
            &tumour_positions,
            &vessels,
            self.schedule.supply_rate(self.t),
            &self.config.drug_params(),
            dt,
        )?;
        let uptake_sites: Vec<((f64, f64), f64)> = self
            .cells
            .iter()
            .map(|c| {
                let discount = match c.state {
                    OxygenState::Hypoxic => self.config.q_h,
                    OxygenState::Normoxic => 1.0,
                };
                (c.position, c.traits.oxygen_uptake * discount)
            })
            .collect();
        self.oxygen = step_oxygen(
            &self.oxygen,
            &uptake_sites,
            &vessels,
            &self.config.oxygen_params(),
            dt,
        )?;
        Ok(())
    }

    /// Phase 11, per cell in id order: classify on the sensed oxygen;
    /// apoptotic cells are removed on the spot; survivors age (normoxic
    /// only) and may divide, in which case both daughters replace the
    /// mother and sit out the rest of this step; non-dividing cells take
    /// the damage update, the exposure-driven threshold creep (only when
    /// induced resistance is the active mechanism), and the
    /// damage-tolerance check, with those deaths applied at phase end.
    fn phase_cell_lifecycle(&mut self, mut sensed: Vec<f64>, dt: f64) {
        let mut dead: Vec<CellId> = Vec::new();
        let mut idx = 0;
        while idx < self.cells.len() {
            match self.cells[idx].classify(&self.thresholds) {
                Classification::Apoptosis => {
                    let cell = self.cells.remove(idx);
                    sensed.remove(idx);
                    self.occupancy.remove_cell(&cell.id, cell.position);
                    continue;
                }
                Classification::Hypoxic => self.cells[idx].state = OxygenState::Hypoxic,
                Classification::Normoxic => self.cells[idx].state = OxygenState::Normoxic,
            }
            self.cells[idx].advance_age(dt);

            let local_drug = sensed[idx];
            let division = {
                let cell = &self.cells[idx];
                let ctx = DivisionContext {
                    occupancy: &self.occupancy,
                    oxygen: &self.oxygen,
                    thresholds: &self.thresholds,
                    density: self.occupancy.density(cell.position, self.config.r_f),
                    f_max: self.config.f_max,
                };
                let base = &self.base_traits;
                let mutation = &self.mutation;
                let t = self.t;
                try_divide(cell, &ctx, &mut self.rng, |traits, rng| {
                    evolution::maybe_mutate(traits, base, mutation, local_drug, t, rng)
                })
            };
            if let Some((first, second)) = division {
                let mother = self.cells[idx].clone();
                self.occupancy.remove_cell(&mother.id, mother.position);
                self.occupancy.insert_cell(first.id.clone(), first.position);
                self.occupancy.insert_cell(second.id.clone(), second.position);
                self.cells[idx] = first;
                self.cells.insert(idx + 1, second);
                sensed.insert(idx + 1, 0.0);
                idx += 2;
                continue;
            }

            let cell = &mut self.cells[idx];
            cell.update_damage(local_drug, self.config.p_r, dt);
            if self.exposure_creep {
                evolution::exposure_resistance_update(cell, &self.resistance, self.config.th_death);
            }
            if cell.exceeds_death_threshold() {
                dead.push(cell.id.clone());
            }
            idx += 1;
        }
        for id in dead {
            let i = self
                .cells
                .binary_search_by(|c| c.id.cmp(&id))
                .expect("marked cell still present");
            let cell = self.cells.remove(i);
            self.occupancy.remove_cell(&cell.id, cell.position);
        }
    }

    /// Phase 12: statistics row and online milestones.
    fn record_stats(&mut self) {
        let n = self.cells.len();
        let nn = self
            .cells
            .iter()
            .filter(|c| c.state == OxygenState::Normoxic)
            .count();
        let (mean_dam, std_dam) = if n == 0 {
            (0.0, 0.0)
        } else {
            let mean = self.cells.iter().map(|c| c.damage).sum::<f64>() / n as f64;
            let var = self
                .cells
                .iter()
                .map(|c| (c.damage - mean).powi(2))
                .sum::<f64>()
                / n as f64;
            (mean, var.sqrt())
        };
        self.stats.push(StatsRow {
            t: self.t,
            n,
            nn,
            nh: n - nn,
            mean_dam,
            std_dam,
            vessels: self.network.vessel_count(),
            tips: self.tips.iter().filter(|t| t.active).count(),
            branches: self.branches,
            anastomoses: self.anastomoses,
            self_loops: self.self_loops,
        });

        if self.shifting_point.is_none() && n > 0 {
            let thresholds: Vec<f64> = self
                .cells
                .iter()
                .map(|c| c.traits.death_threshold)
                .collect();
            let all_resistant = thresholds.iter().all(|&th| th > self.config.th_death);
            if all_resistant {
                let mean = thresholds.iter().sum::<f64>() / n as f64;
                let var =
                    thresholds.iter().map(|&th| (th - mean).powi(2)).sum::<f64>() / n as f64;
                if var.sqrt() <= 1e-12 {
                    self.shifting_point = Some(self.t);
                }
            }
        }
        if self.vascularization_time.is_none() && self.network.reaches(&self.target) {
            self.vascularization_time = Some(self.t);
        }
    }
}
