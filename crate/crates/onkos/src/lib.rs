//! Hybrid discrete-continuum simulation of vascular tumour growth and
//! treatment response.
//!
//! Three continuous fields (angiogenic factor, drug, oxygen) evolve on a
//! uniform cell-centred grid over the unit square, while tumour cells and
//! vessel tip cells are discrete agents coupled to the fields through
//! indicator sources and sinks. Tip cells perform a chemotaxis-biased
//! random walk on the grid-square lattice and sweep out a vascular
//! network; tumour cells cycle, divide, accumulate drug damage, and can
//! acquire resistance through pre-existing clones or mutation at division.
//!
//! The crate is organised along the moving parts of the model:
//!
//! * [`fields`] — grid geometry, ADI reaction-diffusion stepping, and the
//!   biased-walk movement coefficients;
//! * [`tumour`] — tumour-cell agents and their lifecycle;
//! * [`evolution`] — resistance mechanisms (pre-existing, spontaneous and
//!   drug-induced mutation, exposure-driven tolerance);
//! * [`vasculature`] — tip cells, branching, anastomosis, and the swept
//!   vessel network;
//! * [`treatment`] — drug supply schedules and the strategy presets;
//! * [`engine`] — the macro-step orchestrator, statistics, milestones;
//! * [`config`] / [`output`] / [`batch`] — key=value configuration,
//!   artifact writers, and seeded batch execution.
//!
//! All simulations are deterministic per `(config, seed)`: a single
//! counter-based RNG is consumed in a documented agent order, so re-running
//! a configuration reproduces every artifact byte for byte.

pub mod batch;
pub mod config;
pub mod engine;
pub mod error;
pub mod evolution;
pub mod fields;
pub mod output;
pub mod treatment;
pub mod tumour;
pub mod vasculature;

pub use config::{emit_config, parse_config, Scenario, SimConfig};
pub use batch::{run_batch, BatchReport};
pub use engine::{detect_declining_point, detect_extinction, Milestones, Outcome, Simulation, StatsRow};
pub use error::SimError;
pub use output::{write_run, RunSummary};
pub use fields::{FieldKind, GridGeometry, MoveCoefficients, ScalarField};
pub use treatment::TreatmentSchedule;
pub use tumour::{CellId, PhenotypeTraits, TumourCell};
pub use vasculature::{AngiogenicNetwork, TipCell};
