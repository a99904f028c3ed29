//! Scenario configuration, loaded from TOML.
//!
//! Angles are given in degrees; every other quantity is in SI units. Unknown
//! keys are rejected and every field is range-checked on load, with errors
//! naming the offending key path (for example `sensors[2].clutter_rate`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::FusionMode;
use crate::lmb::{Enumeration, UpdateConfig};
use crate::motion::{BirthModel, MotionModel, ProcessNoise};
use crate::rfs::KinematicState;
use crate::sensor::SensorModel;
use crate::truth::{GroundTruthScript, ScriptedTarget};

const DEFAULT_SCENARIO: &str = include_str!("default_scenario.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub runs: usize,
    /// Number of time steps `K`; steps are `0..horizon`.
    pub horizon: u32,
    pub region: RegionConfig,
    pub motion: MotionConfig,
    pub birth: BirthConfig,
    pub filter: FilterConfig,
    pub fusion: FusionConfig,
    pub metric: MetricConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub sensors: Vec<SensorConfig>,
    pub targets: Vec<TargetConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl RegionConfig {
    pub fn diagonal(&self) -> f64 {
        (self.x[1] - self.x[0]).hypot(self.y[1] - self.y[0])
    }

    pub fn centre(&self) -> [f64; 2] {
        [0.5 * (self.x[0] + self.x[1]), 0.5 * (self.y[0] + self.y[1])]
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        (self.x[0]..=self.x[1]).contains(&p[0]) && (self.y[0]..=self.y[1]).contains(&p[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProcessNoiseKind {
    #[default]
    WhiteAcceleration,
    Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionConfig {
    pub sigma_w: f64,
    pub sampling_interval: f64,
    pub survival_probability: f64,
    #[serde(default)]
    pub process_noise: ProcessNoiseKind,
    /// Process noise of the simulated targets; zero gives straight lines.
    #[serde(default)]
    pub truth_sigma_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BirthConfig {
    pub existence: f64,
    /// Birth velocities are uniform in `[-max_speed, max_speed]` per axis.
    pub max_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub particles: usize,
    pub max_hypotheses: usize,
    pub prune_threshold: f64,
    pub estimate_threshold: f64,
    #[serde(default = "default_gate")]
    pub gate_threshold: f64,
    #[serde(default = "default_unit")]
    pub hypervolume_unit: f64,
}

fn default_gate() -> f64 {
    1e-6
}

fn default_unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionKind {
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionConfig {
    pub mode: FusionKind,
    /// Fixed-mode weights, one per sensor; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub order: f64,
    pub cutoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Record wall-clock time per step in the `ms` column; otherwise it is 0
    /// so that repeated runs give identical files.
    #[serde(default)]
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub position: [f64; 2],
    /// Bearing of the field-of-view centre, clockwise from +y; defaults to the
    /// direction of the region centre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boresight_deg: Option<f64>,
    #[serde(default = "default_fov")]
    pub fov_half_width_deg: f64,
    #[serde(default = "default_order")]
    pub filter_order: u32,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_gain")]
    pub gain: f64,
    #[serde(default = "default_bearing_variance")]
    pub bearing_variance: f64,
    #[serde(default = "default_range_variance")]
    pub range_variance: f64,
    pub clutter_rate: f64,
    /// Clutter range window; defaults to the region diagonal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_range: Option<f64>,
}

fn default_fov() -> f64 {
    30.0
}
fn default_order() -> u32 {
    40
}
fn default_threshold() -> f64 {
    4.6
}
fn default_gain() -> f64 {
    4.6e4
}
fn default_bearing_variance() -> f64 {
    2.0 * std::f64::consts::PI / 180.0
}
fn default_range_variance() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub birth: u32,
    pub death: u32,
    /// `[px, vx, py, vy]` at the birth step.
    pub initial: [f64; 4],
}

fn check(ok: bool, field: impl Into<String>, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, message))
    }
}

impl ScenarioConfig {
    /// The bundled ten-target scenario.
    pub fn default_scenario() -> Self {
        Self::from_toml_str(DEFAULT_SCENARIO).expect("bundled scenario is valid")
    }

    pub fn default_scenario_text() -> &'static str {
        DEFAULT_SCENARIO
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| key_at(text, s.start)).unwrap_or_default();
            Error::config(field, e.message())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    pub fn validate(&self) -> Result<()> {
        check(self.runs >= 1, "runs", "must be at least 1")?;
        check(self.horizon >= 1, "horizon", "must be at least 1")?;

        let r = &self.region;
        check(r.x.iter().chain(&r.y).all(|v| v.is_finite()), "region", "bounds must be finite")?;
        check(r.x[0] < r.x[1], "region.x", "lower bound must be below upper bound")?;
        check(r.y[0] < r.y[1], "region.y", "lower bound must be below upper bound")?;

        let m = &self.motion;
        check(m.sigma_w >= 0.0 && m.sigma_w.is_finite(), "motion.sigma_w", "must be non-negative")?;
        check(
            m.sampling_interval > 0.0 && m.sampling_interval.is_finite(),
            "motion.sampling_interval",
            "must be positive",
        )?;
        check(
            m.survival_probability > 0.0 && m.survival_probability <= 1.0,
            "motion.survival_probability",
            "must lie in (0, 1]",
        )?;
        check(
            m.truth_sigma_w >= 0.0 && m.truth_sigma_w.is_finite(),
            "motion.truth_sigma_w",
            "must be non-negative",
        )?;

        let b = &self.birth;
        check(b.existence > 0.0 && b.existence < 1.0, "birth.existence", "must lie in (0, 1)")?;
        check(b.max_speed >= 0.0 && b.max_speed.is_finite(), "birth.max_speed", "must be non-negative")?;

        let f = &self.filter;
        check(f.particles >= 1, "filter.particles", "must be at least 1")?;
        check(f.max_hypotheses >= 1, "filter.max_hypotheses", "must be at least 1")?;
        check(
            f.prune_threshold >= 0.0 && f.prune_threshold < 1.0,
            "filter.prune_threshold",
            "must lie in [0, 1)",
        )?;
        check(
            f.estimate_threshold >= 0.0 && f.estimate_threshold < 1.0,
            "filter.estimate_threshold",
            "must lie in [0, 1)",
        )?;
        check(
            f.gate_threshold >= 0.0 && f.gate_threshold < 1.0,
            "filter.gate_threshold",
            "must lie in [0, 1)",
        )?;
        check(
            f.hypervolume_unit > 0.0 && f.hypervolume_unit.is_finite(),
            "filter.hypervolume_unit",
            "must be positive",
        )?;

        if let Some(w) = &self.fusion.weights {
            check(self.fusion.mode == FusionKind::Fixed, "fusion.weights", "only allowed in fixed mode")?;
            check(w.len() == self.sensors.len(), "fusion.weights", "need one weight per sensor")?;
            check(
                w.iter().all(|x| *x >= 0.0 && x.is_finite()) && w.iter().sum::<f64>() > 0.0,
                "fusion.weights",
                "must be non-negative with a positive sum",
            )?;
        }

        let me = &self.metric;
        check(me.order >= 1.0 && me.order.is_finite(), "metric.order", "must be at least 1")?;
        check(me.cutoff > 0.0 && me.cutoff.is_finite(), "metric.cutoff", "must be positive")?;

        check(!self.sensors.is_empty(), "sensors", "at least one sensor is required")?;
        for (i, s) in self.sensors.iter().enumerate() {
            let p = |name: &str| format!("sensors[{i}].{name}");
            check(s.position.iter().all(|v| v.is_finite()), p("position"), "must be finite")?;
            if let Some(b) = s.boresight_deg {
                check(b.is_finite(), p("boresight_deg"), "must be finite")?;
            }
            check(
                s.fov_half_width_deg > 0.0 && s.fov_half_width_deg <= 90.0,
                p("fov_half_width_deg"),
                "must lie in (0, 90]",
            )?;
            check(s.filter_order >= 1, p("filter_order"), "must be at least 1")?;
            check(s.threshold > 0.0 && s.threshold.is_finite(), p("threshold"), "must be positive")?;
            check(s.gain > 0.0 && s.gain.is_finite(), p("gain"), "must be positive")?;
            check(
                s.bearing_variance > 0.0 && s.bearing_variance.is_finite(),
                p("bearing_variance"),
                "must be positive",
            )?;
            check(
                s.range_variance > 0.0 && s.range_variance.is_finite(),
                p("range_variance"),
                "must be positive",
            )?;
            check(
                s.clutter_rate >= 0.0 && s.clutter_rate.is_finite(),
                p("clutter_rate"),
                "must be non-negative",
            )?;
            if let Some(mr) = s.max_range {
                check(mr > 0.0 && mr.is_finite(), p("max_range"), "must be positive")?;
            }
        }

        for (i, t) in self.targets.iter().enumerate() {
            let p = |name: &str| format!("targets[{i}].{name}");
            check(t.birth < t.death, p("death"), "must be after birth")?;
            check(t.initial.iter().all(|v| v.is_finite()), p("initial"), "must be finite")?;
            check(
                r.contains([t.initial[0], t.initial[2]]),
                p("initial"),
                "initial position must lie inside the region",
            )?;
        }
        Ok(())
    }

    pub fn motion_model(&self) -> MotionModel<f64> {
        let m = &self.motion;
        MotionModel::ncv(m.sampling_interval, m.sigma_w, m.survival_probability, self.process_noise())
    }

    fn process_noise(&self) -> ProcessNoise {
        match self.motion.process_noise {
            ProcessNoiseKind::WhiteAcceleration => ProcessNoise::WhiteAcceleration,
            ProcessNoiseKind::Printed => ProcessNoise::Printed,
        }
    }

    pub fn birth_model(&self) -> BirthModel<f64> {
        BirthModel::uniform_region(self.birth.existence, self.region.x, self.region.y, self.birth.max_speed)
    }

    pub fn sensor_models(&self) -> Vec<SensorModel<f64>> {
        let centre = self.region.centre();
        self.sensors
            .iter()
            .map(|s| {
                let boresight = match s.boresight_deg {
                    Some(b) => b.to_radians(),
                    None => (centre[0] - s.position[0]).atan2(centre[1] - s.position[1]),
                };
                SensorModel {
                    position: s.position,
                    boresight,
                    fov_half_width: s.fov_half_width_deg.to_radians(),
                    filter_order: s.filter_order,
                    threshold: s.threshold,
                    gain: s.gain,
                    bearing_variance: s.bearing_variance,
                    range_variance: s.range_variance,
                    clutter_rate: s.clutter_rate,
                    max_range: s.max_range.unwrap_or_else(|| self.region.diagonal()),
                }
            })
            .collect()
    }

    pub fn truth_script(&self) -> GroundTruthScript<f64> {
        let m = &self.motion;
        GroundTruthScript {
            targets: self
                .targets
                .iter()
                .map(|t| ScriptedTarget {
                    birth: t.birth,
                    death: t.death,
                    initial: KinematicState::from_array(t.initial),
                })
                .collect(),
            motion: MotionModel::ncv(m.sampling_interval, m.truth_sigma_w, 1.0, self.process_noise()),
        }
    }

    pub fn update_config(&self) -> UpdateConfig {
        UpdateConfig {
            max_hypotheses: self.filter.max_hypotheses,
            gate_threshold: self.filter.gate_threshold,
            enumeration: Enumeration::Auto,
            ..UpdateConfig::default()
        }
    }

    pub fn fusion_mode(&self) -> FusionMode<f64> {
        match self.fusion.mode {
            FusionKind::Adaptive => FusionMode::Adaptive,
            FusionKind::Fixed => FusionMode::Fixed(self.fusion.weights.clone()),
        }
    }

    /// Switches the fusion mode; fixed weights are dropped when leaving fixed mode.
    pub fn set_fusion(&mut self, mode: FusionKind) {
        if mode != self.fusion.mode {
            self.fusion = FusionConfig { mode, weights: None };
        }
    }

    pub fn set_fov_half_width_deg(&mut self, deg: f64) {
        for s in &mut self.sensors {
            s.fov_half_width_deg = deg;
        }
    }

    pub fn set_clutter_rate(&mut self, rate: f64) {
        for s in &mut self.sensors {
            s.clutter_rate = rate;
        }
    }
}

/// Dotted path of the TOML key that encloses byte offset `pos`, best effort.
fn key_at(text: &str, pos: usize) -> String {
    let mut table = String::new();
    let mut counts: std::collections::HashMap<String, usize> = Default::default();
    let mut key = String::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if offset > pos {
            break;
        }
        let t = line.trim();
        if let Some(name) = t.strip_prefix("[[").and_then(|s| s.split("]]").next()) {
            let n = counts.entry(name.trim().to_string()).or_insert(0);
            table = format!("{}[{}]", name.trim(), n);
            *n += 1;
            key.clear();
        } else if let Some(name) = t.strip_prefix('[').and_then(|s| s.split(']').next()) {
            table = name.trim().to_string();
            key.clear();
        } else if let Some((k, _)) = t.split_once('=') {
            if !t.starts_with('#') {
                key = k.trim().to_string();
            }
        }
        offset += line.len();
    }
    match (table.is_empty(), key.is_empty()) {
        (true, _) => key,
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}
