//! Multi-sensor fusion of local LMB posteriors.
//!
//! Every sensor updates the same predicted density, so for a given label all
//! local posteriors and the prior share one particle set. Fusion then runs
//! label by label: a per-sensor Cauchy-Schwarz divergence from the prior sets
//! the sensor weights, and a weighted geometric mean (GCI) combines the
//! Bernoulli components.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rfs::{BernoulliComponent, KinematicState, LmbDensity, TrackLabel};
use crate::scalar::{log_sum_exp, Scalar};

/// Below this minimum divergence all sensors are treated as equally informative.
pub const DIVERGENCE_FLOOR: f64 = 1e-12;

/// `D_i^(ℓ)` for every (label, sensor) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceTable<T> {
    pub values: BTreeMap<(TrackLabel, usize), T>,
    /// Unit of hyper-volume `K`.
    pub hypervolume_unit: T,
}

impl<T: Scalar> DivergenceTable<T> {
    pub fn new(hypervolume_unit: T) -> Self {
        Self {
            values: BTreeMap::new(),
            hypervolume_unit,
        }
    }

    /// Divergences of `label` ordered by sensor index.
    pub fn for_label(&self, label: TrackLabel) -> Vec<T> {
        self.values
            .range((label, 0)..=(label, usize::MAX))
            .map(|(_, v)| *v)
            .collect()
    }
}

/// `ω_i^(ℓ)` for every (label, sensor) pair; each label's weights sum to one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FusionWeights<T> {
    pub values: BTreeMap<(TrackLabel, usize), T>,
}

impl<T: Scalar> FusionWeights<T> {
    pub fn for_label(&self, label: TrackLabel) -> Vec<T> {
        self.values
            .range((label, 0)..=(label, usize::MAX))
            .map(|(_, v)| *v)
            .collect()
    }
}

/// How sensor weights are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum FusionMode<T> {
    /// Per-label weights from the divergence of each local posterior.
    Adaptive,
    /// Constant weights for every label; `None` means uniform `1/n_s`.
    Fixed(Option<Vec<T>>),
}

fn check_support<T: Scalar>(a: &BernoulliComponent<T>, b: &BernoulliComponent<T>) -> Result<()> {
    if a.label != b.label {
        return Err(Error::ParticleMismatch {
            label: a.label,
            reason: format!("paired with label {}", b.label),
        });
    }
    if a.cloud.len() != b.cloud.len() {
        return Err(Error::ParticleMismatch {
            label: a.label,
            reason: format!("{} vs {} particles", a.cloud.len(), b.cloud.len()),
        });
    }
    if !a.cloud.same_support(&b.cloud) {
        return Err(Error::ParticleMismatch {
            label: a.label,
            reason: "particle locations differ".into(),
        });
    }
    Ok(())
}

/// First-moment Cauchy-Schwarz divergence between two Bernoulli components on a
/// shared particle set: `(K/2) Σ_j (r₂ w₂ⱼ − r₁ w₁ⱼ)²`.
pub fn bernoulli_csd<T: Scalar>(
    prior: &BernoulliComponent<T>,
    posterior: &BernoulliComponent<T>,
    hypervolume_unit: T,
) -> Result<T> {
    check_support(prior, posterior)?;
    let sum: T = prior
        .cloud
        .weights()
        .iter()
        .zip(posterior.cloud.weights())
        .map(|(&wp, &wq)| {
            let d = posterior.existence * wq - prior.existence * wp;
            d * d
        })
        .sum();
    Ok(hypervolume_unit * sum / T::of(2.0))
}

/// Normalized weights `ω_i ∝ exp(D_i / D_min)`.
///
/// Evaluated as a softmax with the largest exponent subtracted, so no ratio
/// can overflow. Falls back to uniform weights when `D_min` is below
/// [`DIVERGENCE_FLOOR`].
pub fn adaptive_weights<T: Scalar>(divergences: &[T]) -> Vec<T> {
    assert!(!divergences.is_empty(), "at least one sensor is required");
    let n = divergences.len();
    let d_min = divergences.iter().copied().fold(T::infinity(), T::min);
    if !(d_min >= T::of(DIVERGENCE_FLOOR)) {
        return vec![T::one() / T::of(n as f64); n];
    }
    let exponents: Vec<T> = divergences.iter().map(|&d| d / d_min).collect();
    let top = exponents.iter().copied().fold(T::neg_infinity(), T::max);
    let scaled: Vec<T> = exponents.iter().map(|&e| (e - top).exp()).collect();
    let total: T = scaled.iter().copied().sum();
    scaled.iter().map(|&s| s / total).collect()
}

/// GCI fusion of one label's local components with normalized weights.
///
/// Fused particle weights are `∝ Π_i w_ij^{ω_i}` and the fused existence is
/// `N / (Π_i (1 − r_i)^{ω_i} + N)` with `N = Σ_j Π_i (r_i w_ij)^{ω_i}`, all
/// evaluated in the log domain. Sensors with zero weight drop out.
pub fn gci_fuse_component<T: Scalar>(
    locals: &[&BernoulliComponent<T>],
    weights: &[T],
) -> Result<BernoulliComponent<T>> {
    assert!(!locals.is_empty(), "at least one local component is required");
    assert_eq!(locals.len(), weights.len(), "one weight per local component");
    for other in &locals[1..] {
        check_support(locals[0], other)?;
    }
    let active: Vec<(usize, T)> = weights
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, w)| *w > T::zero())
        .collect();
    if let [(only, _)] = active.as_slice() {
        return Ok(locals[*only].clone());
    }

    let label = locals[0].label;
    let j_count = locals[0].cloud.len();
    let mut log_w = vec![T::zero(); j_count];
    let mut log_r = T::zero();
    let mut log_not_r = T::zero();
    for &(i, omega) in &active {
        let comp = locals[i];
        for (acc, &w) in log_w.iter_mut().zip(comp.cloud.weights()) {
            *acc = *acc + omega * w.ln();
        }
        log_r = log_r + omega * comp.existence.ln();
        log_not_r = log_not_r + omega * (T::one() - comp.existence).ln();
    }
    let log_mass = log_sum_exp(&log_w);
    if !log_mass.is_finite() {
        return Err(Error::DegenerateFusion(label));
    }
    let fused_weights: Vec<T> = log_w.iter().map(|&lw| (lw - log_mass).exp()).collect();

    let log_num = log_r + log_mass;
    let existence = if log_num == T::neg_infinity() {
        T::zero()
    } else {
        // N / (D + N) = 1 / (1 + exp(ln D − ln N))
        T::one() / (T::one() + (log_not_r - log_num).exp())
    };
    Ok(BernoulliComponent {
        label,
        existence,
        cloud: locals[0].cloud.reweighted(fused_weights),
    })
}

/// Result of [`fuse_with_diagnostics`].
#[derive(Debug, Clone)]
pub struct FusionOutput<T> {
    pub density: LmbDensity<T>,
    /// Empty in fixed mode.
    pub divergences: DivergenceTable<T>,
    pub weights: FusionWeights<T>,
}

/// Fuses one local posterior per sensor into a single LMB density.
pub fn fuse<T: Scalar>(
    locals: &[LmbDensity<T>],
    prior: &LmbDensity<T>,
    hypervolume_unit: T,
    mode: &FusionMode<T>,
) -> Result<LmbDensity<T>> {
    fuse_with_diagnostics(locals, prior, hypervolume_unit, mode).map(|o| o.density)
}

/// [`fuse`] that also reports the divergences and weights it used.
pub fn fuse_with_diagnostics<T: Scalar>(
    locals: &[LmbDensity<T>],
    prior: &LmbDensity<T>,
    hypervolume_unit: T,
    mode: &FusionMode<T>,
) -> Result<FusionOutput<T>> {
    assert!(!locals.is_empty(), "at least one sensor is required");
    for (sensor, local) in locals.iter().enumerate() {
        if !local.same_labels(prior) {
            return Err(Error::LabelSetMismatch { sensor });
        }
    }
    let n_s = locals.len();
    let fixed = match mode {
        FusionMode::Adaptive => None,
        FusionMode::Fixed(None) => Some(vec![T::one() / T::of(n_s as f64); n_s]),
        FusionMode::Fixed(Some(w)) => {
            assert_eq!(w.len(), n_s, "one fixed weight per sensor");
            let total: T = w.iter().copied().sum();
            assert!(total > T::zero(), "fixed weights must have a positive sum");
            Some(w.iter().map(|&x| x / total).collect())
        }
    };

    let mut divergences = DivergenceTable::new(hypervolume_unit);
    let mut weights = FusionWeights::default();
    let mut fused = Vec::with_capacity(prior.len());
    for (idx, prior_comp) in prior.iter().enumerate() {
        let label = prior_comp.label;
        let comps: Vec<&BernoulliComponent<T>> = locals.iter().map(|l| &l.components()[idx]).collect();
        let omega = match &fixed {
            Some(w) => w.clone(),
            None => {
                let d = comps
                    .iter()
                    .map(|c| bernoulli_csd(prior_comp, c, hypervolume_unit))
                    .collect::<Result<Vec<T>>>()?;
                for (i, &di) in d.iter().enumerate() {
                    divergences.values.insert((label, i), di);
                }
                adaptive_weights(&d)
            }
        };
        for (i, &w) in omega.iter().enumerate() {
            weights.values.insert((label, i), w);
        }
        fused.push(gci_fuse_component(&comps, &omega)?);
    }
    Ok(FusionOutput {
        density: LmbDensity::from_sorted_unchecked(fused),
        divergences,
        weights,
    })
}

/// Drops components whose existence is below `threshold`.
pub fn prune<T: Scalar>(density: &LmbDensity<T>, threshold: T) -> LmbDensity<T> {
    LmbDensity::from_sorted_unchecked(
        density
            .clone()
            .into_components()
            .into_iter()
            .filter(|c| c.existence >= threshold)
            .collect(),
    )
}

/// Label and weighted-mean state of every component with existence above `threshold`.
pub fn estimate<T: Scalar>(density: &LmbDensity<T>, threshold: T) -> Vec<(TrackLabel, KinematicState<T>)> {
    density
        .iter()
        .filter(|c| c.existence > threshold)
        .map(|c| (c.label, c.cloud.mean()))
        .collect()
}
