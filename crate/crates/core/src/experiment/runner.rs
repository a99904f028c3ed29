//! Monte Carlo driver: predict, per-sensor update, fusion, pruning, estimation
//! and scoring at every step of every run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::fusion::{estimate, fuse, prune, FusionMode};
use crate::lmb::{local_update, predict, UpdateConfig};
use crate::metrics::{mean_std, ospa};
use crate::motion::{BirthModel, MotionModel};
use crate::rfs::LmbDensity;
use crate::sensor::{scan, SensorModel};
use crate::truth::{propagate_truth, GroundTruthScript, TruthState};

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub k: u32,
    pub n_true: usize,
    pub n_est: usize,
    pub ospa: f64,
    pub ospa_loc: f64,
    pub ospa_card: f64,
    /// Wall-clock time of the step; 0 unless timing is enabled.
    pub ms: f64,
}

/// One row of `summary.csv`: statistics across runs at step `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub k: u32,
    pub n_true: usize,
    pub n_est_mean: f64,
    pub n_est_std: f64,
    pub ospa_mean: f64,
    pub ospa_std: f64,
    pub ospa_loc_mean: f64,
    pub ospa_card_mean: f64,
}

// Stream tags mixed into the master seed; the run index selects the stream.
const TRUTH_TAG: u64 = 0x7472_7574_6800_0000;
const FILTER_TAG: u64 = 0x6669_6c74_6572_0000;
const SENSOR_TAG: u64 = 0x7365_6e73_6f72_0000;

fn stream(seed: u64, tag: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag);
    rng.set_stream(run as u64);
    rng
}

/// Model objects built once from a config and shared by all runs.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub motion: MotionModel<f64>,
    pub birth: BirthModel<f64>,
    pub sensors: Vec<SensorModel<f64>>,
    pub truth: GroundTruthScript<f64>,
    pub update: UpdateConfig,
    pub fusion: FusionMode<f64>,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            motion: config.motion_model(),
            birth: config.birth_model(),
            sensors: config.sensor_models(),
            truth: config.truth_script(),
            update: config.update_config(),
            fusion: config.fusion_mode(),
            config,
        })
    }

    /// Runs the filter once; errors carry the failing run and step.
    pub fn run(&self, run: usize) -> Result<Vec<RunRecord>> {
        let cfg = &self.config;
        let seed = cfg.seed;
        let mut truth_rng = stream(seed, TRUTH_TAG, run);
        let mut filter_rng = stream(seed, FILTER_TAG, run);
        let mut sensor_rngs: Vec<ChaCha8Rng> =
            (0..self.sensors.len()).map(|i| stream(seed, SENSOR_TAG + i as u64, run)).collect();

        let mut truth = TruthState::new(&self.truth);
        let mut posterior = LmbDensity::new();
        let mut records = Vec::with_capacity(cfg.horizon as usize);
        for k in 0..cfg.horizon {
            let started = Instant::now();
            let alive = propagate_truth(&self.truth, &mut truth, k, &mut truth_rng);
            let states: Vec<_> = alive.iter().map(|(_, x)| *x).collect();
            let scans: Vec<_> = self
                .sensors
                .iter()
                .zip(&mut sensor_rngs)
                .map(|(s, rng)| scan(std::slice::from_ref(s), &states, rng).pop().unwrap_or_default())
                .collect();

            let step = |posterior: &LmbDensity<f64>, rng: &mut ChaCha8Rng| -> Result<LmbDensity<f64>> {
                let predicted = predict(posterior, &self.motion, &self.birth, k, cfg.filter.particles, rng)?;
                let locals = self
                    .sensors
                    .iter()
                    .zip(&scans)
                    .map(|(s, z)| local_update(&predicted, z, s, &self.update))
                    .collect::<Result<Vec<_>>>()?;
                let fused = fuse(&locals, &predicted, cfg.filter.hypervolume_unit, &self.fusion)?;
                Ok(prune(&fused, cfg.filter.prune_threshold))
            };
            posterior = step(&posterior, &mut filter_rng).map_err(|e| Error::RunFailed {
                run,
                step: k as usize,
                source: Box::new(e),
            })?;

            let est: Vec<[f64; 2]> = estimate(&posterior, cfg.filter.estimate_threshold)
                .iter()
                .map(|(_, x)| x.position())
                .collect();
            let truth_pos: Vec<[f64; 2]> = states.iter().map(|x| x.position()).collect();
            let o = ospa(&truth_pos, &est, cfg.metric.order, cfg.metric.cutoff);
            records.push(RunRecord {
                run,
                k,
                n_true: truth_pos.len(),
                n_est: est.len(),
                ospa: o.total,
                ospa_loc: o.localization,
                ospa_card: o.cardinality,
                ms: if cfg.output.timing {
                    started.elapsed().as_secs_f64() * 1e3
                } else {
                    0.0
                },
            });
        }
        Ok(records)
    }
}

/// Records of every run, ordered by run then step.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Runs every Monte Carlo run of `config` in parallel.
///
/// On failure the error of the lowest-indexed failing run is returned.
pub fn run_monte_carlo(config: &ScenarioConfig) -> Result<ExperimentResult> {
    let scenario = Scenario::new(config.clone())?;
    let runs: Vec<Result<Vec<RunRecord>>> = (0..config.runs).into_par_iter().map(|r| scenario.run(r)).collect();
    let mut records = Vec::with_capacity(config.runs * config.horizon as usize);
    for r in runs {
        records.extend(r?);
    }
    let summary = summarize(&records, config.horizon);
    Ok(ExperimentResult { records, summary })
}

/// Per-step means and sample standard deviations across runs.
pub fn summarize(records: &[RunRecord], horizon: u32) -> Vec<SummaryRow> {
    (0..horizon)
        .map(|k| {
            let at: Vec<&RunRecord> = records.iter().filter(|r| r.k == k).collect();
            let (n_est_mean, n_est_std) = mean_std(at.iter().map(|r| r.n_est as f64));
            let (ospa_mean, ospa_std) = mean_std(at.iter().map(|r| r.ospa));
            SummaryRow {
                k,
                n_true: at.first().map_or(0, |r| r.n_true),
                n_est_mean,
                n_est_std,
                ospa_mean,
                ospa_std,
                ospa_loc_mean: mean_std(at.iter().map(|r| r.ospa_loc)).0,
                ospa_card_mean: mean_std(at.iter().map(|r| r.ospa_card)).0,
            }
        })
        .collect()
}

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const CONFIG_ECHO_FILE: &str = "config.toml";

pub(crate) fn write_csv<S: Serialize>(path: &Path, rows: &[S]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs `config` and writes `records.csv`, `summary.csv` and `config.toml`
/// into `output_dir`, creating it if needed.
pub fn run_experiment(config: &ScenarioConfig, output_dir: &Path) -> Result<PathBuf> {
    let result = run_monte_carlo(config)?;
    std::fs::create_dir_all(output_dir).map_err(|e| Error::io(output_dir, e))?;
    write_csv(&output_dir.join(RECORDS_FILE), &result.records)?;
    write_csv(&output_dir.join(SUMMARY_FILE), &result.summary)?;
    let echo = output_dir.join(CONFIG_ECHO_FILE);
    std::fs::write(&echo, config.to_toml_string()).map_err(|e| Error::io(&echo, e))?;
    Ok(output_dir.to_path_buf())
}

pub fn read_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let path = dir.join(RECORDS_FILE);
    let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .collect::<std::result::Result<Vec<RunRecord>, _>>()
        .map_err(Error::from)
}
