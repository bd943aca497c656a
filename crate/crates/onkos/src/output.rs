//! Run artifacts: statistics, event log, snapshots, milestone summary,
//! resolved config, and the manifest declaring every written file.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::{emit_config, SimConfig};
use crate::engine::{Milestones, Simulation};
use crate::error::SimError;
use crate::evolution::trait_histogram;
use crate::fields::ScalarField;

/// What a finished run reports back to callers.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub seed: u64,
    pub milestones: Milestones,
    pub final_population: usize,
    pub final_t: f64,
}

/// Number of bins in the death-threshold histogram snapshots.
const HISTOGRAM_BINS: usize = 40;

/// Execute one run and write all artifacts into `dir` (created if
/// needed): `stats.csv`, `events.csv`, `milestones.txt`, `config.txt`,
/// field/agent snapshots at every snapshot time plus the final state, and
/// `manifest.txt` listing every artifact written.
pub fn write_run(config: &SimConfig, seed: u64, dir: &Path) -> Result<RunSummary, SimError> {
    fs::create_dir_all(dir)?;
    let mut manifest: Vec<String> = Vec::new();

    let mut sim = Simulation::new(config, seed)?;
    write_snapshot(&sim, dir, &mut manifest)?;
    let every = config.snapshot_every;
    let mut last_tag = snapshot_tag(sim.t());
    while sim.t() + 1e-9 < config.t_end {
        let before = sim.t();
        sim.macro_step()?;
        let crossed = ((sim.t() + 1e-9) / every).floor() > ((before + 1e-9) / every).floor();
        if crossed {
            write_snapshot(&sim, dir, &mut manifest)?;
            last_tag = snapshot_tag(sim.t());
        }
    }
    if snapshot_tag(sim.t()) != last_tag {
        write_snapshot(&sim, dir, &mut manifest)?;
    }

    write_stats(&sim, dir, &mut manifest)?;
    write_events(&sim, dir, &mut manifest)?;
    let milestones = sim.milestones();
    write_milestones(&milestones, dir, &mut manifest)?;

    let mut resolved = config.clone();
    resolved.seed = Some(seed);
    write_text(dir, "config.txt", &emit_config(&resolved), &mut manifest)?;

    manifest.sort();
    let listing: String = manifest.iter().map(|p| format!("{p}\n")).collect();
    fs::write(dir.join("manifest.txt"), listing)?;

    Ok(RunSummary {
        seed,
        milestones,
        final_population: sim.cells().len(),
        final_t: sim.t(),
    })
}

fn snapshot_tag(t: f64) -> String {
    format!("t{t:07.2}")
}

fn fmt_value(v: f64) -> String {
    format!("{v:.8e}")
}

fn fmt_time(t: f64) -> String {
    format!("{t:.4}")
}

fn create(dir: &Path, name: &str, manifest: &mut Vec<String>) -> std::io::Result<BufWriter<File>> {
    manifest.push(name.to_string());
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_text(
    dir: &Path,
    name: &str,
    content: &str,
    manifest: &mut Vec<String>,
) -> std::io::Result<()> {
    manifest.push(name.to_string());
    fs::write(dir.join(name), content)
}

fn write_field(
    field: &ScalarField,
    dir: &Path,
    name: &str,
    manifest: &mut Vec<String>,
) -> std::io::Result<()> {
    let mut w = create(dir, name, manifest)?;
    writeln!(w, "x,y,value")?;
    let g = field.geometry;
    for j in 0..g.n_y {
        for i in 0..g.n_x {
            writeln!(
                w,
                "{},{},{}",
                g.node_x(i),
                g.node_y(j),
                fmt_value(field.values[[i, j]])
            )?;
        }
    }
    w.flush()
}

/// One full state snapshot: the three fields, the cell roster, the vessel
/// network, the tip list, and the death-threshold histogram.
fn write_snapshot(sim: &Simulation, dir: &Path, manifest: &mut Vec<String>) -> std::io::Result<()> {
    let tag = snapshot_tag(sim.t());
    write_field(sim.taf(), dir, &format!("taf_{tag}.csv"), manifest)?;
    write_field(sim.drug(), dir, &format!("drug_{tag}.csv"), manifest)?;
    write_field(sim.oxygen(), dir, &format!("oxygen_{tag}.csv"), manifest)?;

    let mut w = create(dir, &format!("cells_{tag}.csv"), manifest)?;
    writeln!(
        w,
        "id,x,y,oxygen,drug,damage,threshold,age,state,uptake_rate,prolif_rate"
    )?;
    for c in sim.cells() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.id,
            fmt_value(c.position.0),
            fmt_value(c.position.1),
            fmt_value(c.oxygen),
            fmt_value(c.drug),
            fmt_value(c.damage),
            fmt_value(c.traits.death_threshold),
            fmt_value(c.age),
            c.state,
            fmt_value(c.traits.oxygen_uptake),
            fmt_value(c.traits.proliferation_rate),
        )?;
    }
    w.flush()?;

    let mut w = create(dir, &format!("network_{tag}.csv"), manifest)?;
    writeln!(w, "square_i,square_j,owner_tip_id")?;
    for ((i, j), owner) in sim.network().sorted_entries() {
        writeln!(w, "{i},{j},{owner}")?;
    }
    w.flush()?;

    let mut w = create(dir, &format!("tips_{tag}.csv"), manifest)?;
    writeln!(w, "id,x,y,age,active")?;
    for tip in sim.tips() {
        let (x, y) = tip.position(&sim.geometry());
        writeln!(
            w,
            "{},{},{},{},{}",
            tip.id,
            fmt_value(x),
            fmt_value(y),
            fmt_value(tip.age),
            tip.active
        )?;
    }
    w.flush()?;

    let thresholds = sim.cells().iter().map(|c| c.traits.death_threshold);
    let base = sim.config().base_traits().death_threshold;
    let (lo, hi) = sim.config().mutation_config().clamp_range;
    let mut w = create(dir, &format!("thresholds_{tag}.csv"), manifest)?;
    writeln!(w, "lo,hi,count")?;
    for (bin_lo, bin_hi, count) in trait_histogram(thresholds, base * lo, base * hi, HISTOGRAM_BINS)
    {
        writeln!(w, "{},{},{}", fmt_value(bin_lo), fmt_value(bin_hi), count)?;
    }
    w.flush()
}

fn write_stats(sim: &Simulation, dir: &Path, manifest: &mut Vec<String>) -> std::io::Result<()> {
    let mut w = create(dir, "stats.csv", manifest)?;
    writeln!(
        w,
        "t,N,Nn,Nh,mean_dam,std_dam,vessels,tips,branches,anastomoses,self_loops"
    )?;
    for r in sim.stats() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_time(r.t),
            r.n,
            r.nn,
            r.nh,
            fmt_value(r.mean_dam),
            fmt_value(r.std_dam),
            r.vessels,
            r.tips,
            r.branches,
            r.anastomoses,
            r.self_loops
        )?;
    }
    w.flush()
}

fn write_events(sim: &Simulation, dir: &Path, manifest: &mut Vec<String>) -> std::io::Result<()> {
    let mut w = create(dir, "events.csv", manifest)?;
    writeln!(w, "t,event,tip_id")?;
    for e in sim.events() {
        writeln!(w, "{},{},{}", fmt_time(e.t), e.kind, e.tip)?;
    }
    w.flush()
}

fn write_milestones(
    ms: &Milestones,
    dir: &Path,
    manifest: &mut Vec<String>,
) -> std::io::Result<()> {
    let mut w = create(dir, "milestones.txt", manifest)?;
    let line = |v: Option<f64>| v.map(fmt_time).unwrap_or_else(|| "none".into());
    writeln!(w, "declining_point={}", line(ms.declining_point))?;
    writeln!(w, "shifting_point={}", line(ms.shifting_point))?;
    writeln!(w, "extinction_time={}", line(ms.extinction_time))?;
    writeln!(w, "vascularization_time={}", line(ms.vascularization_time))?;
    writeln!(w, "outcome={}", ms.outcome)?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scenario;
    use std::collections::HashSet;

    fn small_config() -> SimConfig {
        let mut cfg = SimConfig::default();
        cfg.t_end = 0.5;
        cfg.snapshot_every = 0.5;
        cfg.n_0 = 5;
        cfg
    }

    #[test]
    fn manifest_matches_the_directory_exactly() {
        let dir = tempfile::tempdir().unwrap();
        write_run(&small_config(), 1, dir.path()).unwrap();
        let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        let declared: HashSet<String> = manifest.lines().map(String::from).collect();
        let mut on_disk: HashSet<String> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert!(on_disk.remove("manifest.txt"));
        assert_eq!(declared, on_disk);
        assert!(declared.contains("stats.csv"));
        assert!(declared.contains("config.txt"));
        assert!(declared.contains("milestones.txt"));
    }

    #[test]
    fn identical_seeds_write_identical_bytes() {
        let cfg = small_config();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        write_run(&cfg, 42, dir_a.path()).unwrap();
        write_run(&cfg, 42, dir_b.path()).unwrap();
        for name in ["stats.csv", "events.csv", "milestones.txt", "config.txt"] {
            let a = fs::read(dir_a.path().join(name)).unwrap();
            let b = fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
        // Snapshots too: compare the whole manifests and every listed file.
        let manifest = fs::read_to_string(dir_a.path().join("manifest.txt")).unwrap();
        assert_eq!(
            manifest,
            fs::read_to_string(dir_b.path().join("manifest.txt")).unwrap()
        );
        for name in manifest.lines() {
            let a = fs::read(dir_a.path().join(name)).unwrap();
            let b = fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn stats_rows_cover_every_step_plus_the_initial_state() {
        let dir = tempfile::tempdir().unwrap();
        write_run(&small_config(), 3, dir.path()).unwrap();
        let stats = fs::read_to_string(dir.path().join("stats.csv")).unwrap();
        // 0.5 / 0.1 macro-steps plus header plus the t=0 row.
        assert_eq!(stats.lines().count(), 1 + 1 + 5);
        assert!(stats.starts_with("t,N,Nn,Nh,"));
    }

    #[test]
    fn snapshots_appear_at_the_configured_cadence() {
        let mut cfg = small_config();
        cfg.t_end = 1.0;
        cfg.snapshot_every = 0.5;
        let dir = tempfile::tempdir().unwrap();
        write_run(&cfg, 5, dir.path()).unwrap();
        for tag in ["t0000.00", "t0000.50", "t0001.00"] {
            assert!(
                dir.path().join(format!("taf_{tag}.csv")).exists(),
                "missing snapshot {tag}"
            );
        }
    }

    #[test]
    fn field_snapshots_hold_the_whole_grid() {
        let mut cfg = small_config();
        cfg.scenario = Scenario::AngioOnly;
        cfg.t_end = 0.0;
        let dir = tempfile::tempdir().unwrap();
        write_run(&cfg, 7, dir.path()).unwrap();
        let taf = fs::read_to_string(dir.path().join("taf_t0000.00.csv")).unwrap();
        assert_eq!(taf.lines().count(), 1 + 100 * 100);
        let first_data = taf.lines().nth(1).unwrap();
        assert!(first_data.starts_with("0.005,0.005,"));
    }

    #[test]
    fn milestones_file_is_key_value_with_none_markers() {
        let dir = tempfile::tempdir().unwrap();
        write_run(&small_config(), 9, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("milestones.txt")).unwrap();
        assert!(text.contains("declining_point=none"));
        assert!(text.contains("outcome=running"));
    }

    #[test]
    fn resolved_config_reparses_with_the_seed_pinned() {
        let dir = tempfile::tempdir().unwrap();
        write_run(&small_config(), 11, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("config.txt")).unwrap();
        let cfg = crate::config::parse_config(&text).unwrap();
        assert_eq!(cfg.seed, Some(11));
        assert_eq!(cfg.t_end, 0.5);
    }
}
