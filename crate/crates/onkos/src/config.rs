//! Run configuration: parameter table, scenario presets, and the plain
//! `key=value` config-file dialect.
//!
//! Every knob of the simulation lives in [`SimConfig`] with a sensible
//! default, so an empty config file is a valid one. Parsing is strict
//! (unknown keys are errors) and reports every problem in one pass, each
//! tagged with its line number. [`emit_config`] writes a file that parses
//! back to an equal config.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::evolution::{MutationConfig, MutationMode, ResistanceConfig};
use crate::fields::{DrugParams, GridGeometry, OxygenParams, TafParams, WalkParams};
use crate::treatment::TreatmentSchedule;
use crate::tumour::{OxygenThresholds, PhenotypeTraits};
use crate::vasculature::TargetRegion;

/// What the run simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Vessel growth towards a static attractant field; no tumour cells.
    AngioOnly,
    /// Fully drug-sensitive tumour, no heritable changes.
    NoResistance,
    /// A resistant subclone is present from the start.
    PreExisting,
    /// Heritable trait changes at a constant per-division rate.
    Spontaneous,
    /// Heritable trait changes at a rate scaled by the local drug level.
    DrugInduced,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::AngioOnly,
        Scenario::NoResistance,
        Scenario::PreExisting,
        Scenario::Spontaneous,
        Scenario::DrugInduced,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::AngioOnly => "angio_only",
            Scenario::NoResistance => "no_resistance",
            Scenario::PreExisting => "pre_existing",
            Scenario::Spontaneous => "spontaneous",
            Scenario::DrugInduced => "drug_induced",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                format!(
                    "expected one of {}",
                    Scenario::ALL.map(|sc| sc.name()).join(", ")
                )
            })
    }
}

/// Which drug schedule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreatmentChoice {
    None,
    /// One of the seven preset strategies, 1 through 7.
    Strategy(u8),
}

impl TreatmentChoice {
    pub fn name(&self) -> String {
        match self {
            TreatmentChoice::None => "none".into(),
            TreatmentChoice::Strategy(n) => format!("strategy{n}"),
        }
    }
}

impl FromStr for TreatmentChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "none" {
            return Ok(TreatmentChoice::None);
        }
        if TreatmentSchedule::from_preset_name(s).is_some() {
            let n = s.trim_start_matches("strategy").parse::<u8>().unwrap();
            return Ok(TreatmentChoice::Strategy(n));
        }
        Err("expected none or strategy1..strategy7".into())
    }
}

/// The full parameter set of a run. All values are non-dimensional.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    // Run control.
    pub scenario: Scenario,
    pub seed: Option<u64>,
    pub t_end: f64,
    pub snapshot_every: f64,

    // Time stepping and grid.
    pub dt: f64,
    /// Step size of the tip-cell walk coefficients; tips draw one walk
    /// move per macro-step at this step size.
    pub tip_dt: f64,
    pub tip_substeps: u32,
    pub grid_n: usize,

    // Endothelial walk.
    pub d_n: f64,
    pub chi_0: f64,
    pub alpha: f64,

    // Angiogenic factor field.
    pub d_c: f64,
    pub xi_c: f64,
    pub eta: f64,
    pub lambda: f64,
    /// Slope of the initial linear attractant profile `c = k·y`.
    pub taf_init_slope: f64,

    // Drug field.
    pub d_d: f64,
    pub xi_d: f64,
    pub rho_d: f64,
    /// Damage repair rate; 1 means full repair within a unit time.
    pub p_r: f64,
    /// Local drug level above which a cell counts as exposed.
    pub d_floor: f64,

    // Oxygen field.
    pub d_o: f64,
    pub xi_o: f64,
    pub rho_o: f64,
    pub s_o: f64,
    /// Starting oxygen level; kept just above `o_hyp` so the hypoxic core
    /// forms within the first couple of time units.
    pub o_init: f64,
    /// Oxygen-uptake discount for hypoxic cells.
    pub q_h: f64,

    // Oxygen-state and damage thresholds.
    pub o_hyp: f64,
    pub o_apop: f64,
    pub th_death: f64,
    pub th_multi: u32,

    // Division and mechanics.
    pub f_max: usize,
    pub r_c: f64,
    /// Radius of the crowding neighbourhood.
    pub r_f: f64,
    /// Random-motion intensity of tumour cells.
    pub epsilon_1: f64,
    /// Residual overlap tolerated by relaxation, as a fraction of `r_c`.
    pub relax_tol: f64,
    pub relax_max_iters: usize,

    // Initial tumour.
    pub n_0: usize,
    pub tumour_center_x: f64,
    pub tumour_center_y: f64,
    pub tumour_radius: f64,

    // Vasculature.
    pub psi: f64,
    pub c_br: f64,
    pub n_tips: usize,
    pub prolif_interval: f64,

    // Evolution and resistance.
    pub mu: f64,
    /// Time from which division-time mutations are possible.
    pub mutation_from: f64,
    pub preexisting_fraction: f64,
    pub exposure_threshold: f64,
    pub exposure_increment: f64,

    // Treatment.
    pub treatment: TreatmentChoice,
    pub t_init: f64,
    pub period: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::NoResistance,
            seed: None,
            t_end: 50.0,
            snapshot_every: 1.0,

            dt: 0.1,
            tip_dt: 0.0075,
            tip_substeps: 1,
            grid_n: 100,

            d_n: 4.608e-4,
            chi_0: 0.38,
            alpha: 0.6,

            d_c: 0.12,
            xi_c: 0.002,
            eta: 1e3,
            lambda: 0.1,
            taf_init_slope: 5.0,

            d_d: 0.5,
            xi_d: 0.01,
            rho_d: 0.5,
            p_r: 0.2,
            d_floor: 1e-3,

            d_o: 0.35,
            xi_o: 0.025,
            rho_o: 0.57,
            s_o: 3.5,
            o_init: 0.26,
            q_h: 0.5,

            o_hyp: 0.25,
            o_apop: 0.05,
            th_death: 0.5,
            th_multi: 3,

            f_max: 10,
            r_c: 0.005,
            r_f: 0.02,
            epsilon_1: 0.001,
            relax_tol: 0.05,
            relax_max_iters: 40,

            n_0: 50,
            tumour_center_x: 0.5,
            tumour_center_y: 0.75,
            tumour_radius: 0.05,

            psi: 0.5,
            c_br: 1.0,
            n_tips: 12,
            prolif_interval: 1.125,

            mu: 1e-3,
            mutation_from: 0.0,
            preexisting_fraction: 0.01,
            exposure_threshold: 5.0,
            exposure_increment: 1.1,

            treatment: TreatmentChoice::None,
            t_init: 14.0,
            period: 50.0,
        }
    }
}

impl SimConfig {
    pub fn geometry(&self) -> GridGeometry {
        GridGeometry::unit(self.grid_n)
    }

    pub fn walk_params(&self) -> WalkParams {
        WalkParams { diffusion: self.d_n, chi_0: self.chi_0, alpha: self.alpha }
    }

    pub fn taf_params(&self) -> TafParams {
        TafParams {
            diffusion: self.d_c,
            decay: self.xi_c,
            secretion: self.eta,
            vessel_uptake: self.lambda,
        }
    }

    pub fn drug_params(&self) -> DrugParams {
        DrugParams { diffusion: self.d_d, decay: self.xi_d, uptake: self.rho_d }
    }

    pub fn oxygen_params(&self) -> OxygenParams {
        OxygenParams { diffusion: self.d_o, decay: self.xi_o, supply: self.s_o }
    }

    pub fn oxygen_thresholds(&self) -> OxygenThresholds {
        OxygenThresholds::new(self.o_apop, self.o_hyp)
    }

    /// Reference phenotype: the mutation clamp anchors here. The base
    /// proliferation rate corresponds to the midpoint maturation age of
    /// the initial population.
    pub fn base_traits(&self) -> PhenotypeTraits {
        PhenotypeTraits {
            oxygen_uptake: self.rho_o,
            proliferation_rate: std::f64::consts::LN_2 / 0.625,
            death_threshold: self.th_death,
        }
    }

    pub fn mutation_config(&self) -> MutationConfig {
        let mode = match self.scenario {
            Scenario::Spontaneous => MutationMode::Spontaneous,
            Scenario::DrugInduced => MutationMode::DrugInduced,
            _ => MutationMode::None,
        };
        MutationConfig::new(mode, self.mu, self.mutation_from)
    }

    pub fn resistance_config(&self) -> ResistanceConfig {
        let fraction = match self.scenario {
            Scenario::PreExisting => self.preexisting_fraction,
            _ => 0.0,
        };
        ResistanceConfig::new(
            fraction,
            self.th_multi,
            self.exposure_threshold,
            self.exposure_increment,
        )
    }

    pub fn schedule(&self) -> TreatmentSchedule {
        match self.treatment {
            TreatmentChoice::None => TreatmentSchedule::none(),
            TreatmentChoice::Strategy(n) => {
                let mut s = TreatmentSchedule::from_preset_name(&format!("strategy{n}"))
                    .expect("validated preset");
                s.t_init = self.t_init;
                s.period_length = self.period;
                s
            }
        }
    }

    /// Where vascularization is declared complete: the far domain edge in
    /// the vessel-growth benchmark, the tumour's bounding disc otherwise.
    pub fn target_region(&self) -> TargetRegion {
        match self.scenario {
            Scenario::AngioOnly => TargetRegion::TopStrip { min_y: 1.0 - 2.0 * self.r_c },
            _ => TargetRegion::Disc {
                center: (self.tumour_center_x, self.tumour_center_y),
                radius: self.tumour_radius,
            },
        }
    }

    fn validate(&self, lines: &HashMap<&'static str, usize>) -> Vec<String> {
        let at = |key: &str| match lines.get(key) {
            Some(n) => format!("line {n}: "),
            None => String::new(),
        };
        let mut problems = Vec::new();
        let mut nonneg = |key: &'static str, v: f64| {
            if !(v >= 0.0) {
                problems.push(format!("{}{} must be non-negative, got {}", at(key), key, v));
            }
        };
        nonneg("d_n", self.d_n);
        nonneg("chi_0", self.chi_0);
        nonneg("alpha", self.alpha);
        nonneg("d_c", self.d_c);
        nonneg("xi_c", self.xi_c);
        nonneg("eta", self.eta);
        nonneg("lambda", self.lambda);
        nonneg("taf_init_slope", self.taf_init_slope);
        nonneg("d_d", self.d_d);
        nonneg("xi_d", self.xi_d);
        nonneg("rho_d", self.rho_d);
        nonneg("d_floor", self.d_floor);
        nonneg("d_o", self.d_o);
        nonneg("xi_o", self.xi_o);
        nonneg("rho_o", self.rho_o);
        nonneg("s_o", self.s_o);
        nonneg("psi", self.psi);
        nonneg("c_br", self.c_br);
        nonneg("mu", self.mu);
        nonneg("mutation_from", self.mutation_from);
        nonneg("epsilon_1", self.epsilon_1);
        nonneg("t_end", self.t_end);
        nonneg("t_init", self.t_init);

        let mut check = |key: &'static str, ok: bool, msg: String| {
            if !ok {
                problems.push(format!("{}{}", at(key), msg));
            }
        };
        check("dt", self.dt > 0.0, format!("dt must be positive, got {}", self.dt));
        check(
            "tip_dt",
            self.tip_dt > 0.0,
            format!("tip_dt must be positive, got {}", self.tip_dt),
        );
        check(
            "tip_substeps",
            self.tip_substeps >= 1,
            "tip_substeps must be at least 1".into(),
        );
        check(
            "grid_n",
            self.grid_n >= 4,
            format!("grid_n must be at least 4, got {}", self.grid_n),
        );
        check(
            "snapshot_every",
            self.snapshot_every > 0.0,
            format!("snapshot_every must be positive, got {}", self.snapshot_every),
        );
        check(
            "p_r",
            (0.0..=1.0).contains(&self.p_r),
            format!("p_r must lie in [0, 1], got {}", self.p_r),
        );
        check(
            "q_h",
            (0.0..=1.0).contains(&self.q_h),
            format!("q_h must lie in [0, 1], got {}", self.q_h),
        );
        check(
            "o_init",
            (0.0..=1.0).contains(&self.o_init),
            format!("o_init must lie in [0, 1], got {}", self.o_init),
        );
        check(
            "o_hyp",
            self.o_hyp < 1.0,
            format!("o_hyp must be smaller than 1, got {}", self.o_hyp),
        );
        check(
            "th_death",
            self.th_death > 0.0,
            format!("th_death must be positive, got {}", self.th_death),
        );
        check(
            "th_multi",
            self.th_multi >= 1,
            "th_multi must be at least 1".into(),
        );
        check("f_max", self.f_max >= 1, "f_max must be at least 1".into());
        check("r_c", self.r_c > 0.0, format!("r_c must be positive, got {}", self.r_c));
        check("r_f", self.r_f > 0.0, format!("r_f must be positive, got {}", self.r_f));
        check(
            "relax_tol",
            self.relax_tol > 0.0 && self.relax_tol < 1.0,
            format!("relax_tol must lie in (0, 1), got {}", self.relax_tol),
        );
        check(
            "relax_max_iters",
            self.relax_max_iters >= 1,
            "relax_max_iters must be at least 1".into(),
        );
        check(
            "tumour_center_x",
            (0.0..=1.0).contains(&self.tumour_center_x),
            format!("tumour_center_x must lie in [0, 1], got {}", self.tumour_center_x),
        );
        check(
            "tumour_center_y",
            (0.0..=1.0).contains(&self.tumour_center_y),
            format!("tumour_center_y must lie in [0, 1], got {}", self.tumour_center_y),
        );
        check(
            "tumour_radius",
            self.tumour_radius > 0.0,
            format!("tumour_radius must be positive, got {}", self.tumour_radius),
        );
        check("n_tips", self.n_tips >= 1, "n_tips must be at least 1".into());
        check(
            "prolif_interval",
            self.prolif_interval > 0.0,
            format!("prolif_interval must be positive, got {}", self.prolif_interval),
        );
        check(
            "preexisting_fraction",
            (0.0..=1.0).contains(&self.preexisting_fraction),
            format!(
                "preexisting_fraction must lie in [0, 1], got {}",
                self.preexisting_fraction
            ),
        );
        check(
            "exposure_threshold",
            self.exposure_threshold > 0.0,
            format!("exposure_threshold must be positive, got {}", self.exposure_threshold),
        );
        check(
            "exposure_increment",
            self.exposure_increment >= 1.0,
            format!("exposure_increment must be at least 1, got {}", self.exposure_increment),
        );
        check(
            "period",
            self.period > 0.0,
            format!("period must be positive, got {}", self.period),
        );
        if !(self.o_apop > 0.0 && self.o_apop < self.o_hyp) {
            let prefix = lines
                .get("o_apop")
                .or_else(|| lines.get("o_hyp"))
                .map(|n| format!("line {n}: "))
                .unwrap_or_default();
            problems.push(format!(
                "{}o_apop ({}) must be positive and smaller than o_hyp ({})",
                prefix, self.o_apop, self.o_hyp
            ));
        }
        problems
    }
}

/// Parse failure: every problem found, one per entry.
#[derive(Debug, thiserror::Error)]
#[error("{}", problems.join("\n"))]
pub struct ConfigError {
    pub problems: Vec<String>,
}

/// Parse the `key=value` dialect: one pair per line, `#` starts a comment,
/// blank lines ignored. Unknown keys, unparsable values, and invariant
/// violations are all collected and reported together.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let mut cfg = SimConfig::default();
    let mut problems = Vec::new();
    let mut lines_of: HashMap<&'static str, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            problems.push(format!("line {line_no}: expected key=value, got \"{line}\""));
            continue;
        };
        apply_key(
            &mut cfg,
            key.trim(),
            value.trim(),
            line_no,
            &mut problems,
            &mut lines_of,
        );
    }

    problems.extend(cfg.validate(&lines_of));
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { problems })
    }
}

fn apply_key(
    cfg: &mut SimConfig,
    key: &str,
    value: &str,
    line_no: usize,
    problems: &mut Vec<String>,
    lines_of: &mut HashMap<&'static str, usize>,
) {
    macro_rules! set {
        ($field:ident) => {{
            match value.parse() {
                Ok(v) => {
                    cfg.$field = v;
                    lines_of.insert(stringify!($field), line_no);
                }
                Err(e) => problems.push(format!(
                    "line {line_no}: {} = \"{value}\": {e}",
                    stringify!($field)
                )),
            }
        }};
    }
    match key {
        "scenario" => set!(scenario),
        "seed" => match value.parse() {
            Ok(v) => {
                cfg.seed = Some(v);
                lines_of.insert("seed", line_no);
            }
            Err(e) => problems.push(format!("line {line_no}: seed = \"{value}\": {e}")),
        },
        "t_end" => set!(t_end),
        "snapshot_every" => set!(snapshot_every),
        "dt" => set!(dt),
        "tip_dt" => set!(tip_dt),
        "tip_substeps" => set!(tip_substeps),
        "grid_n" => set!(grid_n),
        "d_n" => set!(d_n),
        "chi_0" => set!(chi_0),
        "alpha" => set!(alpha),
        "d_c" => set!(d_c),
        "xi_c" => set!(xi_c),
        "eta" => set!(eta),
        "lambda" => set!(lambda),
        "taf_init_slope" => set!(taf_init_slope),
        "d_d" => set!(d_d),
        "xi_d" => set!(xi_d),
        "rho_d" => set!(rho_d),
        "p_r" => set!(p_r),
        "d_floor" => set!(d_floor),
        "d_o" => set!(d_o),
        "xi_o" => set!(xi_o),
        "rho_o" => set!(rho_o),
        "s_o" => set!(s_o),
        "o_init" => set!(o_init),
        "q_h" => set!(q_h),
        "o_hyp" => set!(o_hyp),
        "o_apop" => set!(o_apop),
        "th_death" => set!(th_death),
        "th_multi" => set!(th_multi),
        "f_max" => set!(f_max),
        "r_c" => set!(r_c),
        "r_f" => set!(r_f),
        "epsilon_1" => set!(epsilon_1),
        "relax_tol" => set!(relax_tol),
        "relax_max_iters" => set!(relax_max_iters),
        "n_0" => set!(n_0),
        "tumour_center_x" => set!(tumour_center_x),
        "tumour_center_y" => set!(tumour_center_y),
        "tumour_radius" => set!(tumour_radius),
        "psi" => set!(psi),
        "c_br" => set!(c_br),
        "n_tips" => set!(n_tips),
        "prolif_interval" => set!(prolif_interval),
        "mu" => set!(mu),
        "mutation_from" => set!(mutation_from),
        "preexisting_fraction" => set!(preexisting_fraction),
        "exposure_threshold" => set!(exposure_threshold),
        "exposure_increment" => set!(exposure_increment),
        "treatment" => set!(treatment),
        "t_init" => set!(t_init),
        "period" => set!(period),
        _ => problems.push(format!("line {line_no}: unknown key \"{key}\"")),
    }
}

/// Write a config as `key=value` text that [`parse_config`] accepts and
/// that round-trips to an equal config.
pub fn emit_config(cfg: &SimConfig) -> String {
    let mut out = String::new();
    let mut kv = |key: &str, value: String| {
        out.push_str(key);
        out.push('=');
        out.push_str(&value);
        out.push('\n');
    };
    kv("scenario", cfg.scenario.to_string());
    if let Some(seed) = cfg.seed {
        kv("seed", seed.to_string());
    }
    kv("t_end", cfg.t_end.to_string());
    kv("snapshot_every", cfg.snapshot_every.to_string());
    kv("dt", cfg.dt.to_string());
    kv("tip_dt", cfg.tip_dt.to_string());
    kv("tip_substeps", cfg.tip_substeps.to_string());
    kv("grid_n", cfg.grid_n.to_string());
    kv("d_n", cfg.d_n.to_string());
    kv("chi_0", cfg.chi_0.to_string());
    kv("alpha", cfg.alpha.to_string());
    kv("d_c", cfg.d_c.to_string());
    kv("xi_c", cfg.xi_c.to_string());
    kv("eta", cfg.eta.to_string());
    kv("lambda", cfg.lambda.to_string());
    kv("taf_init_slope", cfg.taf_init_slope.to_string());
    kv("d_d", cfg.d_d.to_string());
    kv("xi_d", cfg.xi_d.to_string());
    kv("rho_d", cfg.rho_d.to_string());
    kv("p_r", cfg.p_r.to_string());
    kv("d_floor", cfg.d_floor.to_string());
    kv("d_o", cfg.d_o.to_string());
    kv("xi_o", cfg.xi_o.to_string());
    kv("rho_o", cfg.rho_o.to_string());
    kv("s_o", cfg.s_o.to_string());
    kv("o_init", cfg.o_init.to_string());
    kv("q_h", cfg.q_h.to_string());
    kv("o_hyp", cfg.o_hyp.to_string());
    kv("o_apop", cfg.o_apop.to_string());
    kv("th_death", cfg.th_death.to_string());
    kv("th_multi", cfg.th_multi.to_string());
    kv("f_max", cfg.f_max.to_string());
    kv("r_c", cfg.r_c.to_string());
    kv("r_f", cfg.r_f.to_string());
    kv("epsilon_1", cfg.epsilon_1.to_string());
    kv("relax_tol", cfg.relax_tol.to_string());
    kv("relax_max_iters", cfg.relax_max_iters.to_string());
    kv("n_0", cfg.n_0.to_string());
    kv("tumour_center_x", cfg.tumour_center_x.to_string());
    kv("tumour_center_y", cfg.tumour_center_y.to_string());
    kv("tumour_radius", cfg.tumour_radius.to_string());
    kv("psi", cfg.psi.to_string());
    kv("c_br", cfg.c_br.to_string());
    kv("n_tips", cfg.n_tips.to_string());
    kv("prolif_interval", cfg.prolif_interval.to_string());
    kv("mu", cfg.mu.to_string());
    kv("mutation_from", cfg.mutation_from.to_string());
    kv("preexisting_fraction", cfg.preexisting_fraction.to_string());
    kv("exposure_threshold", cfg.exposure_threshold.to_string());
    kv("exposure_increment", cfg.exposure_increment.to_string());
    kv("treatment", cfg.treatment.name());
    kv("t_init", cfg.t_init.to_string());
    kv("period", cfg.period.to_string());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treatment::ScheduleKind;

    #[test]
    fn empty_text_yields_the_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, SimConfig::default());
        assert_eq!(cfg.scenario, Scenario::NoResistance);
        assert_eq!(cfg.treatment, TreatmentChoice::None);
        assert!(cfg.seed.is_none());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse_config("# a comment\n\n  t_end = 10  # trailing\n").unwrap();
        assert_eq!(cfg.t_end, 10.0);
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_numbers() {
        let err = parse_config("t_end=10\nd_q=3\n").unwrap_err();
        assert_eq!(err.problems.len(), 1);
        assert!(err.problems[0].contains("line 2"));
        assert!(err.problems[0].contains("d_q"));
    }

    #[test]
    fn all_problems_are_reported_at_once() {
        let err = parse_config("bogus_key=1\ndt=fast\no_hyp=0.02\n").unwrap_err();
        assert_eq!(err.problems.len(), 3, "{err}");
        assert!(err.problems[0].contains("line 1"));
        assert!(err.problems[1].contains("line 2"));
        assert!(err.problems[2].contains("line 3"), "{}", err.problems[2]);
    }

    #[test]
    fn threshold_ordering_is_validated_against_defaults() {
        // o_hyp below the default o_apop breaks the ordering invariant.
        let err = parse_config("o_hyp=0.02\n").unwrap_err();
        assert!(err.problems.iter().any(|p| p.contains("o_apop")), "{err}");
    }

    #[test]
    fn strategy_preset_resolves_to_the_pulsed_schedule() {
        let cfg = parse_config("treatment=strategy3\n").unwrap();
        let schedule = cfg.schedule();
        assert_eq!(schedule.t_init, 14.0);
        match schedule.kind {
            ScheduleKind::Pulsed { d_p, t_on, t_off } => {
                assert!((d_p - 10.0 / 3.0).abs() < 1e-12);
                assert_eq!(t_on, 30.0);
                assert_eq!(t_off, 20.0);
            }
            other => panic!("expected pulsed, got {other:?}"),
        }
    }

    #[test]
    fn treatment_start_override_carries_into_the_schedule() {
        let cfg = parse_config("treatment=strategy5\nt_init=20\n").unwrap();
        assert_eq!(cfg.schedule().t_init, 20.0);
        assert_eq!(cfg.schedule().supply_rate(19.9), 0.0);
        assert_eq!(cfg.schedule().supply_rate(20.0), 2.0);
    }

    #[test]
    fn scenario_names_round_trip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
        assert!("tumor".parse::<Scenario>().is_err());
    }

    #[test]
    fn emit_parse_round_trip_preserves_equality() {
        let mut cfg = SimConfig::default();
        cfg.scenario = Scenario::PreExisting;
        cfg.seed = Some(42);
        cfg.treatment = TreatmentChoice::Strategy(5);
        cfg.mu = 1e-4;
        cfg.tip_dt = 0.0123456789;
        cfg.t_end = 37.5;
        let reparsed = parse_config(&emit_config(&cfg)).unwrap();
        assert_eq!(reparsed, cfg);
    }

    #[test]
    fn negative_rates_are_invariant_violations() {
        let err = parse_config("xi_c=-0.1\n").unwrap_err();
        assert!(err.problems[0].contains("line 1"));
        assert!(err.problems[0].contains("non-negative"));
    }

    #[test]
    fn scenario_selects_the_mutation_mode() {
        let mut cfg = SimConfig::default();
        use crate::evolution::MutationMode as M;
        cfg.scenario = Scenario::NoResistance;
        assert_eq!(cfg.mutation_config().mode, M::None);
        cfg.scenario = Scenario::Spontaneous;
        assert_eq!(cfg.mutation_config().mode, M::Spontaneous);
        cfg.scenario = Scenario::DrugInduced;
        assert_eq!(cfg.mutation_config().mode, M::DrugInduced);
    }

    #[test]
    fn preexisting_fraction_applies_only_in_its_scenario() {
        let mut cfg = SimConfig::default();
        cfg.preexisting_fraction = 0.25;
        cfg.scenario = Scenario::NoResistance;
        assert_eq!(cfg.resistance_config().preexisting_fraction, 0.0);
        cfg.scenario = Scenario::PreExisting;
        assert_eq!(cfg.resistance_config().preexisting_fraction, 0.25);
    }

    #[test]
    fn target_region_follows_the_scenario() {
        let mut cfg = SimConfig::default();
        cfg.scenario = Scenario::AngioOnly;
        assert_eq!(cfg.target_region(), TargetRegion::TopStrip { min_y: 0.99 });
        cfg.scenario = Scenario::NoResistance;
        assert_eq!(
            cfg.target_region(),
            TargetRegion::Disc { center: (0.5, 0.75), radius: 0.05 }
        );
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let err = parse_config("just some words\n").unwrap_err();
        assert!(err.problems[0].contains("line 1"));
        assert!(err.problems[0].contains("key=value"));
    }
}
