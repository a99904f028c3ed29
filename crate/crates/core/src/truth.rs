//! Scripted ground truth: targets that appear, move under the NCV model and disappear.

use rand::Rng;

use crate::motion::MotionModel;
use crate::rfs::{KinematicState, TrackLabel};
use crate::scalar::Scalar;

/// One scripted target, alive for `birth <= k < death`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedTarget<T> {
    pub birth: u32,
    pub death: u32,
    /// State at step `birth`.
    pub initial: KinematicState<T>,
}

#[derive(Debug, Clone)]
pub struct GroundTruthScript<T> {
    pub targets: Vec<ScriptedTarget<T>>,
    pub motion: MotionModel<T>,
}

impl<T: Scalar> GroundTruthScript<T> {
    /// Label of target `index`: its birth step and position in the script.
    pub fn label(&self, index: usize) -> TrackLabel {
        TrackLabel::new(self.targets[index].birth, index as u32)
    }

    /// Number of targets alive at step `k`.
    pub fn cardinality(&self, k: u32) -> usize {
        self.targets.iter().filter(|t| t.birth <= k && k < t.death).count()
    }
}

/// Running truth for one Monte Carlo run.
#[derive(Debug, Clone)]
pub struct TruthState<T> {
    time: Option<u32>,
    alive: Vec<Option<KinematicState<T>>>,
}

impl<T: Scalar> TruthState<T> {
    pub fn new(script: &GroundTruthScript<T>) -> Self {
        Self {
            time: None,
            alive: vec![None; script.targets.len()],
        }
    }

    /// Step at which the state was last advanced.
    pub fn time(&self) -> Option<u32> {
        self.time
    }

    /// Targets currently alive, ordered by label.
    pub fn current(&self, script: &GroundTruthScript<T>) -> Vec<(TrackLabel, KinematicState<T>)> {
        let mut out: Vec<_> = self
            .alive
            .iter()
            .enumerate()
            .filter_map(|(i, x)| x.map(|x| (script.label(i), x)))
            .collect();
        out.sort_by_key(|(l, _)| *l);
        out
    }
}

/// Advances the truth to step `time`: living targets take one motion step,
/// targets whose death step is reached drop out, and targets born at `time`
/// enter at their scripted initial state.
pub fn propagate_truth<T: Scalar, R: Rng + ?Sized>(
    script: &GroundTruthScript<T>,
    state: &mut TruthState<T>,
    time: u32,
    rng: &mut R,
) -> Vec<(TrackLabel, KinematicState<T>)> {
    let first = state.time.is_none();
    if let Some(prev) = state.time {
        assert_eq!(time, prev + 1, "truth must advance one step at a time");
    }
    for (i, target) in script.targets.iter().enumerate() {
        let slot = &mut state.alive[i];
        *slot = if time < target.birth || time >= target.death {
            None
        } else if time == target.birth || (first && time > target.birth) {
            // a script that starts late begins from the scripted state
            Some(target.initial)
        } else {
            slot.map(|x| script.motion.sample(&x, rng))
        };
    }
    state.time = Some(time);
    state.current(script)
}

/// Truth at every step `0..horizon`.
pub fn simulate_truth<T: Scalar, R: Rng + ?Sized>(
    script: &GroundTruthScript<T>,
    horizon: u32,
    rng: &mut R,
) -> Vec<Vec<(TrackLabel, KinematicState<T>)>> {
    let mut state = TruthState::new(script);
    (0..horizon).map(|k| propagate_truth(script, &mut state, k, rng)).collect()
}
