//! Multi-seed batch execution: isolated per-seed runs, failures recorded
//! without aborting the batch, and an aggregate summary of outcomes and
//! milestone statistics.

use std::fs;
use std::path::Path;

use crate::config::SimConfig;
use crate::engine::Outcome;
use crate::output::{write_run, RunSummary};

/// One seed's result: a summary, or the failure text.
#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub result: Result<RunSummary, String>,
}

#[derive(Debug, Clone)]
pub struct BatchReport {
    pub per_seed: Vec<SeedResult>,
}

impl BatchReport {
    pub fn failures(&self) -> usize {
        self.per_seed.iter().filter(|s| s.result.is_err()).count()
    }

    fn outcome_count(&self, outcome: Outcome) -> usize {
        self.per_seed
            .iter()
            .filter_map(|s| s.result.as_ref().ok())
            .filter(|r| r.milestones.outcome == outcome)
            .count()
    }

    fn milestone_values(&self, pick: impl Fn(&RunSummary) -> Option<f64>) -> Vec<f64> {
        let mut values: Vec<f64> = self
            .per_seed
            .iter()
            .filter_map(|s| s.result.as_ref().ok())
            .filter_map(pick)
            .collect();
        values.sort_by(|a, b| a.total_cmp(b));
        values
    }
}

/// Run every seed into `out/seed_<n>/` and write `out/aggregate.txt`.
/// A failing seed is recorded in the report and the batch moves on.
pub fn run_batch(
    config: &SimConfig,
    seeds: &[u64],
    out: &Path,
) -> std::io::Result<BatchReport> {
    assert!(!seeds.is_empty(), "a batch needs at least one seed");
    fs::create_dir_all(out)?;
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let dir = out.join(format!("seed_{seed}"));
        let result = write_run(config, seed, &dir).map_err(|e| e.to_string());
        per_seed.push(SeedResult { seed, result });
    }
    let report = BatchReport { per_seed };
    fs::write(out.join("aggregate.txt"), render_aggregate(&report))?;
    Ok(report)
}

/// Quantile by linear interpolation on the sorted sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty() && (0.0..=1.0).contains(&q));
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn render_aggregate(report: &BatchReport) -> String {
    let mut out = String::new();
    let mut kv = |key: &str, value: String| {
        out.push_str(key);
        out.push('=');
        out.push_str(&value);
        out.push('\n');
    };
    kv("runs", report.per_seed.len().to_string());
    kv("failures", report.failures().to_string());
    let failed: Vec<String> = report
        .per_seed
        .iter()
        .filter(|s| s.result.is_err())
        .map(|s| s.seed.to_string())
        .collect();
    if !failed.is_empty() {
        kv("failed_seeds", failed.join(","));
    }
    for outcome in [Outcome::Eliminated, Outcome::Persistent, Outcome::Running] {
        kv(
            &format!("outcome_{outcome}"),
            report.outcome_count(outcome).to_string(),
        );
    }

    let milestones: [(&str, fn(&RunSummary) -> Option<f64>); 4] = [
        ("declining_point", |r| r.milestones.declining_point),
        ("shifting_point", |r| r.milestones.shifting_point),
        ("extinction_time", |r| r.milestones.extinction_time),
        ("vascularization_time", |r| r.milestones.vascularization_time),
    ];
    for (name, pick) in milestones {
        let values = report.milestone_values(pick);
        kv(&format!("{name}_count"), values.len().to_string());
        if values.is_empty() {
            continue;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        kv(&format!("{name}_mean"), format!("{mean:.4}"));
        kv(&format!("{name}_min"), format!("{:.4}", values[0]));
        kv(&format!("{name}_q25"), format!("{:.4}", quantile(&values, 0.25)));
        kv(&format!("{name}_median"), format!("{:.4}", quantile(&values, 0.5)));
        kv(&format!("{name}_q75"), format!("{:.4}", quantile(&values, 0.75)));
        kv(
            &format!("{name}_max"),
            format!("{:.4}", values[values.len() - 1]),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SimConfig {
        let mut cfg = SimConfig::default();
        cfg.t_end = 0.3;
        cfg.snapshot_every = 1.0;
        cfg.n_0 = 5;
        cfg
    }

    #[test]
    fn single_seed_aggregate_mirrors_that_run() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_batch(&small_config(), &[7], dir.path()).unwrap();
        assert_eq!(report.per_seed.len(), 1);
        assert_eq!(report.failures(), 0);
        let text = fs::read_to_string(dir.path().join("aggregate.txt")).unwrap();
        assert!(text.contains("runs=1"));
        assert!(text.contains("outcome_running=1"));
        assert!(dir.path().join("seed_7").join("stats.csv").exists());
    }

    #[test]
    fn repeated_seeds_produce_identical_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        run_batch(&small_config(), &[4, 4], dir.path()).unwrap();
        // Both runs write the same seed directory name, so compare a
        // second batch against the first instead.
        let dir2 = tempfile::tempdir().unwrap();
        run_batch(&small_config(), &[4], dir2.path()).unwrap();
        let a = fs::read(dir.path().join("seed_4/stats.csv")).unwrap();
        let b = fs::read(dir2.path().join("seed_4/stats.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn failing_seeds_are_recorded_and_the_batch_continues() {
        let mut cfg = small_config();
        // A walk step long enough to force a negative stay weight on the
        // initial attractant slope, so every run fails numerically.
        cfg.tip_dt = 10.0;
        let dir = tempfile::tempdir().unwrap();
        let report = run_batch(&cfg, &[1, 2, 3], dir.path()).unwrap();
        assert_eq!(report.failures(), 3);
        let text = fs::read_to_string(dir.path().join("aggregate.txt")).unwrap();
        assert!(text.contains("failures=3"));
        assert!(text.contains("failed_seeds=1,2,3"));
    }

    #[test]
    fn quantiles_interpolate_on_the_sorted_sample() {
        let values = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&values, 0.0), 1.0);
        assert_eq!(quantile(&values, 1.0), 4.0);
        assert_eq!(quantile(&values, 0.5), 2.5);
        assert_eq!(quantile(&values, 0.25), 1.75);
        assert_eq!(quantile(&[5.0], 0.5), 5.0);
    }
}
