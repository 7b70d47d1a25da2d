//! Batch benchmarking: many episodes, parameter sweeps, tabular output.
//!
//! Episodes run sequentially (results are seed-deterministic either way, and
//! per-episode timing stays honest on one core). Output comes in two forms:
//! per-episode CSV rows and a JSON report with aggregates. A stable mode
//! redacts wall-clock fields so two runs of the same configuration emit
//! byte-identical bytes, which is what golden tests want.

use serde::{Deserialize, Serialize};

use crate::planner::{run_episode, EpisodeConfig, EpisodeError, EpisodeResult, Representation};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub episode: EpisodeConfig,
    pub representation: Representation,
    /// Number of episodes; seeds count up from `first_seed` unless `seeds`
    /// lists them explicitly.
    pub episodes: usize,
    pub first_seed: u64,
    pub seeds: Option<Vec<u64>>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            episode: EpisodeConfig::default(),
            representation: Representation::Dynamic,
            episodes: 10,
            first_seed: 0,
            seeds: None,
        }
    }
}

impl BenchmarkConfig {
    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Some(list) => list.clone(),
            None => (0..self.episodes as u64)
                .map(|i| self.first_seed + i)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub episodes: Vec<EpisodeResult>,
}

/// Rates aggregated from raw totals, so episodes with few samples do not get
/// the same weight as episodes with many.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Aggregate {
    pub episodes: usize,
    pub solve_rate: f64,
    pub mean_cost: f64,
    pub mean_cost_solved: f64,
    pub mean_update_time_s: f64,
    pub queries_per_second: f64,
    pub mean_factor_count: f64,
    pub mean_factor_entries: f64,
    pub mean_steps: f64,
}

impl BenchmarkReport {
    pub fn aggregate(&self) -> Aggregate {
        let n = self.episodes.len();
        let solved: Vec<&EpisodeResult> = self.episodes.iter().filter(|e| e.solved).collect();
        let total_updates: usize = self.episodes.iter().map(|e| e.update_count).sum();
        let total_update_time: f64 = self.episodes.iter().map(|e| e.update_time_s).sum();
        let total_samples: usize = self.episodes.iter().map(|e| e.sample_count).sum();
        let total_sample_time: f64 = self.episodes.iter().map(|e| e.sample_time_s).sum();
        let mean = |f: &dyn Fn(&EpisodeResult) -> f64| -> f64 {
            if n == 0 {
                0.0
            } else {
                self.episodes.iter().map(|e| f(e)).sum::<f64>() / n as f64
            }
        };
        Aggregate {
            episodes: n,
            solve_rate: if n == 0 {
                0.0
            } else {
                solved.len() as f64 / n as f64
            },
            mean_cost: mean(&|e| e.total_cost as f64),
            mean_cost_solved: if solved.is_empty() {
                0.0
            } else {
                solved.iter().map(|e| e.total_cost as f64).sum::<f64>() / solved.len() as f64
            },
            mean_update_time_s: if total_updates == 0 {
                0.0
            } else {
                total_update_time / total_updates as f64
            },
            queries_per_second: if total_sample_time <= 0.0 {
                0.0
            } else {
                total_samples as f64 / total_sample_time
            },
            mean_factor_count: mean(&|e| e.factor_count_mean),
            mean_factor_entries: mean(&|e| e.factor_entries_mean),
            mean_steps: mean(&|e| e.steps as f64),
        }
    }
}

/// Runs every seed in order with the configured representation.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkReport, EpisodeError> {
    let mut episodes = Vec::new();
    for seed in config.seed_list() {
        let mut ep = config.episode.clone();
        ep.seed = seed;
        episodes.push(run_episode(&ep, config.representation)?);
    }
    Ok(BenchmarkReport {
        config: config.clone(),
        episodes,
    })
}

/// One cell of a sweep: the values that distinguish it from the base config.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepPoint {
    pub representation: Representation,
    pub assertion_confidence: f64,
    pub epsilon: f64,
    pub rows: usize,
    pub cols: usize,
    pub ingredients: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub base: BenchmarkConfig,
    /// Swept axes; an empty axis keeps the base configuration's value.
    pub representations: Vec<Representation>,
    pub confidences: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// Grid shapes as [rows, cols].
    pub grids: Vec<[usize; 2]>,
    pub ingredient_counts: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            base: BenchmarkConfig::default(),
            representations: Vec::new(),
            confidences: Vec::new(),
            epsilons: Vec::new(),
            grids: Vec::new(),
            ingredient_counts: Vec::new(),
        }
    }
}

impl SweepConfig {
    pub fn points(&self) -> Vec<SweepPoint> {
        let base = &self.base;
        let reprs = if self.representations.is_empty() {
            vec![base.representation]
        } else {
            self.representations.clone()
        };
        let confs = if self.confidences.is_empty() {
            vec![base.episode.assertion_confidence]
        } else {
            self.confidences.clone()
        };
        let epsilons = if self.epsilons.is_empty() {
            vec![base.episode.belief.epsilon]
        } else {
            self.epsilons.clone()
        };
        let grids = if self.grids.is_empty() {
            vec![[base.episode.world.rows, base.episode.world.cols]]
        } else {
            self.grids.clone()
        };
        let counts = if self.ingredient_counts.is_empty() {
            vec![base.episode.world.ingredients()]
        } else {
            self.ingredient_counts.clone()
        };
        let mut out = Vec::new();
        for &repr in &reprs {
            for &conf in &confs {
                for &eps in &epsilons {
                    for &[rows, cols] in &grids {
                        for &n in &counts {
                            out.push(SweepPoint {
                                representation: repr,
                                assertion_confidence: conf,
                                epsilon: eps,
                                rows,
                                cols,
                                ingredients: n,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    fn config_at(&self, point: SweepPoint) -> BenchmarkConfig {
        let mut config = self.base.clone();
        config.representation = point.representation;
        config.episode.assertion_confidence = point.assertion_confidence;
        config.episode.belief.epsilon = point.epsilon;
        config.episode.world = crate::cooking::WorldConfig::with_ingredients(
            point.rows,
            point.cols,
            point.ingredients,
        );
        config
    }
}

/// Runs the full cartesian sweep in declaration order.
pub fn run_sweep(
    sweep: &SweepConfig,
) -> Result<Vec<(SweepPoint, BenchmarkReport)>, EpisodeError> {
    let mut out = Vec::new();
    for point in sweep.points() {
        let config = sweep.config_at(point);
        out.push((point, run_benchmark(&config)?));
    }
    Ok(out)
}

/// Copy with wall-clock fields blanked, for byte-stable output.
fn redacted(e: &EpisodeResult) -> EpisodeResult {
    EpisodeResult {
        wall_time_s: 0.0,
        update_time_s: 0.0,
        sample_time_s: 0.0,
        ..e.clone()
    }
}

const EPISODE_COLUMNS: &str = "representation,seed,solved,steps,total_cost,wall_time_s,\
update_count,update_time_s,sample_count,sample_time_s,factor_count_mean,\
factor_entries_mean,replans,determinize_failures,deferred_fluents";

fn episode_row(repr: Representation, e: &EpisodeResult) -> String {
    format!(
        "{},{},{},{},{},{:.6},{},{:.6},{},{:.6},{:.4},{:.4},{},{},{}",
        repr.label(),
        e.seed,
        e.solved,
        e.steps,
        e.total_cost,
        e.wall_time_s,
        e.update_count,
        e.update_time_s,
        e.sample_count,
        e.sample_time_s,
        e.factor_count_mean,
        e.factor_entries_mean,
        e.replans,
        e.determinize_failures,
        e.deferred_fluents
    )
}

/// Per-episode CSV for one benchmark run.
pub fn episodes_csv(report: &BenchmarkReport, stable: bool) -> String {
    let mut out = String::from(EPISODE_COLUMNS);
    out.push('\n');
    for e in &report.episodes {
        let row = if stable { redacted(e) } else { e.clone() };
        out.push_str(&episode_row(report.config.representation, &row));
        out.push('\n');
    }
    out
}

/// Per-episode CSV for a sweep, with the sweep point prepended to each row.
pub fn sweep_csv(results: &[(SweepPoint, BenchmarkReport)], stable: bool) -> String {
    let mut out = format!("confidence,epsilon,rows,cols,ingredients,{EPISODE_COLUMNS}\n");
    for (point, report) in results {
        for e in &report.episodes {
            let row = if stable { redacted(e) } else { e.clone() };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                point.assertion_confidence,
                point.epsilon,
                point.rows,
                point.cols,
                point.ingredients,
                episode_row(point.representation, &row)
            ));
        }
    }
    out
}

/// One aggregate row per sweep point.
pub fn sweep_summary_csv(results: &[(SweepPoint, BenchmarkReport)], stable: bool) -> String {
    let mut out = String::from(
        "representation,confidence,epsilon,rows,cols,ingredients,episodes,solve_rate,\
mean_cost,mean_cost_solved,mean_update_time_s,queries_per_second,mean_factor_count,\
mean_factor_entries,mean_steps\n",
    );
    for (point, report) in results {
        let mut agg = report.aggregate();
        if stable {
            agg.mean_update_time_s = 0.0;
            agg.queries_per_second = 0.0;
        }
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.4},{:.2},{:.2},{:.6},{:.2},{:.4},{:.4},{:.2}\n",
            point.representation.label(),
            point.assertion_confidence,
            point.epsilon,
            point.rows,
            point.cols,
            point.ingredients,
            agg.episodes,
            agg.solve_rate,
            agg.mean_cost,
            agg.mean_cost_solved,
            agg.mean_update_time_s,
            agg.queries_per_second,
            agg.mean_factor_count,
            agg.mean_factor_entries,
            agg.mean_steps
        ));
    }
    out
}

/// Full report as pretty JSON: config, aggregate, then every episode.
pub fn report_json(report: &BenchmarkReport, stable: bool) -> String {
    let episodes: Vec<EpisodeResult> = if stable {
        report.episodes.iter().map(redacted).collect()
    } else {
        report.episodes.clone()
    };
    let mut agg = report.aggregate();
    if stable {
        agg.mean_update_time_s = 0.0;
        agg.queries_per_second = 0.0;
    }
    let doc = serde_json::json!({
        "config": report.config,
        "aggregate": agg,
        "episodes": episodes,
    });
    serde_json::to_string_pretty(&doc).expect("report serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooking::WorldConfig;

    fn tiny_benchmark() -> BenchmarkConfig {
        BenchmarkConfig {
            episode: EpisodeConfig {
                world: WorldConfig::with_ingredients(2, 2, 1),
                ..EpisodeConfig::default()
            },
            representation: Representation::Dynamic,
            episodes: 3,
            first_seed: 100,
            seeds: None,
        }
    }

    #[test]
    fn benchmark_runs_consecutive_seeds() {
        let report = run_benchmark(&tiny_benchmark()).unwrap();
        let seeds: Vec<u64> = report.episodes.iter().map(|e| e.seed).collect();
        assert_eq!(seeds, vec![100, 101, 102]);
        assert!(report.episodes.iter().all(|e| e.solved));
    }

    #[test]
    fn explicit_seed_lists_win() {
        let config = BenchmarkConfig {
            seeds: Some(vec![9, 4]),
            ..tiny_benchmark()
        };
        let report = run_benchmark(&config).unwrap();
        let seeds: Vec<u64> = report.episodes.iter().map(|e| e.seed).collect();
        assert_eq!(seeds, vec![9, 4]);
    }

    #[test]
    fn stable_output_is_byte_identical_across_runs() {
        let config = tiny_benchmark();
        let a = run_benchmark(&config).unwrap();
        let b = run_benchmark(&config).unwrap();
        assert_eq!(episodes_csv(&a, true), episodes_csv(&b, true));
        assert_eq!(report_json(&a, true), report_json(&b, true));
        // Unredacted output has real timing fields, which differ.
        assert_ne!(episodes_csv(&a, false), episodes_csv(&a, true));
    }

    #[test]
    fn csv_has_one_row_per_episode_plus_header() {
        let report = run_benchmark(&tiny_benchmark()).unwrap();
        let csv = episodes_csv(&report, true);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("representation,seed,solved"));
        assert!(csv.contains("dynamic,100,true"));
    }

    #[test]
    fn sweep_points_are_a_cartesian_product() {
        let sweep = SweepConfig {
            base: tiny_benchmark(),
            representations: vec![Representation::Dynamic, Representation::Static],
            confidences: vec![1.0, 0.9],
            epsilons: vec![0.0, 1e-9, 0.05],
            ..SweepConfig::default()
        };
        let points = sweep.points();
        assert_eq!(points.len(), 2 * 2 * 3);
        // Defaults fill the unswept axes.
        assert!(points.iter().all(|p| (p.rows, p.cols) == (2, 2)));
    }

    #[test]
    fn sweep_outputs_cover_every_point() {
        let mut base = tiny_benchmark();
        base.episodes = 2;
        let sweep = SweepConfig {
            base,
            representations: vec![Representation::Dynamic, Representation::Static],
            ..SweepConfig::default()
        };
        let results = run_sweep(&sweep).unwrap();
        assert_eq!(results.len(), 2);
        let csv = sweep_csv(&results, true);
        assert_eq!(csv.lines().count(), 1 + 4);
        let summary = sweep_summary_csv(&results, true);
        assert_eq!(summary.lines().count(), 1 + 2);
        assert!(summary.contains("\ndynamic,"));
        assert!(summary.contains("\nstatic,"));
    }

    #[test]
    fn report_json_is_valid_json_with_aggregates() {
        let report = run_benchmark(&tiny_benchmark()).unwrap();
        let text = report_json(&report, false);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["aggregate"]["episodes"], 3);
        assert!(value["aggregate"]["solve_rate"].as_f64().unwrap() > 0.99);
        assert_eq!(value["episodes"].as_array().unwrap().len(), 3);
    }
}
