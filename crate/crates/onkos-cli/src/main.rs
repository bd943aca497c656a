//! Command-line front end: seeded runs, batches, config validation, and
//! the preset listing.
//!
//! Exit codes: 0 on success, 2 on configuration problems, 3 on numerical
//! failure inside a run, 1 on other I/O errors. `ONKOS_VERBOSE` (any
//! non-empty value except `0`) enables progress lines on stderr; all
//! science parameters come from the config file.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use onkos::batch::run_batch;
use onkos::config::{parse_config, Scenario, SimConfig};
use onkos::error::SimError;
use onkos::output::write_run;
use onkos::treatment::{ScheduleKind, TreatmentSchedule};

#[derive(Parser)]
#[command(
    name = "onkos",
    version,
    about = "Hybrid simulator of tumour growth, angiogenesis and drug resistance"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one seeded run and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute seeds 0..N, each into its own directory, plus an aggregate.
    Batch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seeds: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a config file and report every problem at once.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List scenarios and treatment strategy presets.
    Presets,
}

enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

fn verbose() -> bool {
    std::env::var("ONKOS_VERBOSE").map_or(false, |v| !v.is_empty() && v != "0")
}

fn load_config(path: &Path) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Config(e.to_string()))
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::Io(io) => CliError::Io(io.to_string()),
        other => CliError::Numerical(other.to_string()),
    }
}

fn cmd_run(config: &Path, seed: u64, out: &Path) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let summary = write_run(&cfg, seed, out).map_err(sim_error)?;
    if verbose() {
        eprintln!(
            "seed {seed}: outcome={} N={} t={:.1}",
            summary.milestones.outcome, summary.final_population, summary.final_t
        );
    }
    println!("{}", summary.milestones.outcome);
    Ok(())
}

fn cmd_batch(config: &Path, seeds: u64, out: &Path) -> Result<(), CliError> {
    if seeds == 0 {
        return Err(CliError::Config("--seeds must be at least 1".into()));
    }
    let cfg = load_config(config)?;
    let seed_list: Vec<u64> = (0..seeds).collect();
    let report = run_batch(&cfg, &seed_list, out).map_err(|e| CliError::Io(e.to_string()))?;
    for s in &report.per_seed {
        match &s.result {
            Ok(summary) if verbose() => eprintln!(
                "seed {}: outcome={} N={}",
                s.seed, summary.milestones.outcome, summary.final_population
            ),
            Ok(_) => {}
            Err(e) => eprintln!("seed {} failed: {e}", s.seed),
        }
    }
    println!(
        "{} runs, {} failures; aggregate in {}",
        report.per_seed.len(),
        report.failures(),
        out.join("aggregate.txt").display()
    );
    Ok(())
}

fn cmd_validate(config: &Path) -> Result<(), CliError> {
    load_config(config)?;
    println!("config ok");
    Ok(())
}

fn cmd_presets() {
    println!("scenarios:");
    let blurb = |s: Scenario| match s {
        Scenario::AngioOnly => "vessel growth towards a static attractant; no tumour cells",
        Scenario::NoResistance => "fully drug-sensitive tumour",
        Scenario::PreExisting => "resistant subclone present from the start",
        Scenario::Spontaneous => "heritable trait changes at a constant rate",
        Scenario::DrugInduced => "heritable trait changes scaled by the local drug level",
    };
    for s in Scenario::ALL {
        println!("  {:<14} {}", s.name(), blurb(s));
    }
    println!("treatment strategies (period 50, start t=14):");
    for name in TreatmentSchedule::preset_names() {
        let s = TreatmentSchedule::from_preset_name(name).unwrap();
        match s.kind {
            ScheduleKind::Pulsed { d_p, t_on, t_off } => println!(
                "  {name}  pulsed      rate {d_p:<8.4} on {t_on:<4} off {t_off:<4} dose/period {}",
                s.dose_per_period()
            ),
            ScheduleKind::Continuous { d_c } => println!(
                "  {name}  continuous  rate {d_c:<8.4} {:<12} dose/period {}",
                "",
                s.dose_per_period()
            ),
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, seed, out } => cmd_run(&config, seed, &out),
        Command::Batch { config, seeds, out } => cmd_batch(&config, seeds, &out),
        Command::Validate { config } => cmd_validate(&config),
        Command::Presets => {
            cmd_presets();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.code())
        }
    }
}
