//! Labeled random finite set primitives.
//!
//! A [`LmbDensity`] is a set of [`BernoulliComponent`]s with pairwise distinct
//! [`TrackLabel`]s. Each component carries an existence probability and a
//! weighted [`ParticleCloud`] approximating its spatial density.
//!
//! Particle locations live behind an `Arc` so that every local posterior
//! derived from one predicted density shares the exact same location buffer.
//! Only weights are ever rewritten between prediction and the next resampling.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Names a Bernoulli component by the step it was born at and its index among
/// the components born at that step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrackLabel {
    pub birth_time: u32,
    pub birth_index: u32,
}

impl TrackLabel {
    pub const fn new(birth_time: u32, birth_index: u32) -> Self {
        Self {
            birth_time,
            birth_index,
        }
    }
}

impl fmt::Display for TrackLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.birth_time, self.birth_index)
    }
}

/// Planar nearly-constant-velocity state `[px, vx, py, vy]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KinematicState<T> {
    pub px: T,
    pub vx: T,
    pub py: T,
    pub vy: T,
}

impl<T: Scalar> KinematicState<T> {
    pub fn new(px: T, vx: T, py: T, vy: T) -> Self {
        Self { px, vx, py, vy }
    }

    pub fn from_array(v: [T; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [T; 4] {
        [self.px, self.vx, self.py, self.vy]
    }

    pub fn position(&self) -> [T; 2] {
        [self.px, self.py]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Weighted particle approximation of a single-object density.
#[derive(Debug, Clone)]
pub struct ParticleCloud<T> {
    weights: Vec<T>,
    states: Arc<[KinematicState<T>]>,
}

impl<T: Scalar> ParticleCloud<T> {
    /// Builds a cloud from raw (unnormalized) weights.
    pub fn new(weights: Vec<T>, states: Vec<KinematicState<T>>) -> Result<Self> {
        Self::with_shared_states(weights, states.into())
    }

    /// Equal-weight cloud over `states`.
    pub fn uniform(states: Vec<KinematicState<T>>) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::InvalidCloud("cloud needs at least one particle".into()));
        }
        let w = T::one() / T::of(n as f64);
        Self::new(vec![w; n], states)
    }

    pub(crate) fn with_shared_states(
        weights: Vec<T>,
        states: Arc<[KinematicState<T>]>,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidCloud("cloud needs at least one particle".into()));
        }
        if weights.len() != states.len() {
            return Err(Error::InvalidCloud(format!(
                "{} weights for {} particles",
                weights.len(),
                states.len()
            )));
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w >= T::zero())) {
            return Err(Error::InvalidCloud(format!("weight {bad} is not a finite non-negative number")));
        }
        if states.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidCloud("non-finite particle state".into()));
        }
        Ok(Self { weights, states })
    }

    /// Same locations, new weights. Callers guarantee the length and sign invariants.
    pub(crate) fn reweighted(&self, weights: Vec<T>) -> Self {
        debug_assert_eq!(weights.len(), self.states.len());
        Self {
            weights,
            states: Arc::clone(&self.states),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// Always false: a cloud holds at least one particle.
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn states(&self) -> &[KinematicState<T>] {
        &self.states
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, &KinematicState<T>)> + '_ {
        self.weights.iter().copied().zip(self.states.iter())
    }

    /// True when both clouds hold bitwise identical particle locations.
    pub fn same_support(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.states, &other.states) {
            return true;
        }
        self.states.len() == other.states.len()
            && self.states.iter().zip(other.states.iter()).all(|(a, b)| {
                a.to_array()
                    .iter()
                    .zip(b.to_array().iter())
                    .all(|(x, y)| x.as_f64().to_bits() == y.as_f64().to_bits())
            })
    }

    /// Weighted mean state. Assumes normalized weights.
    pub fn mean(&self) -> KinematicState<T> {
        let mut acc = [T::zero(); 4];
        for (w, s) in self.iter() {
            for (a, v) in acc.iter_mut().zip(s.to_array()) {
                *a = *a + w * v;
            }
        }
        KinematicState::from_array(acc)
    }

    pub fn weight_sum(&self) -> T {
        neumaier_sum(&self.weights)
    }
}

/// Compensated summation; keeps normalization exact to ~1 ulp per element for large clouds.
pub(crate) fn neumaier_sum<T: Scalar>(values: &[T]) -> T {
    let mut sum = T::zero();
    let mut c = T::zero();
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c = c + ((sum - t) + v);
        } else {
            c = c + ((v - t) + sum);
        }
        sum = t;
    }
    sum + c
}

/// Divides every weight by the total, preserving particle order.
pub fn normalize_weights<T: Scalar>(cloud: &ParticleCloud<T>) -> Result<ParticleCloud<T>> {
    let total = cloud.weight_sum();
    if !(total > T::zero()) {
        return Err(Error::AllZeroWeights);
    }
    Ok(cloud.reweighted(cloud.weights.iter().map(|&w| w / total).collect()))
}

/// `1 / Σ w²` for a normalized cloud; lies in `[1, J]`.
pub fn effective_sample_size<T: Scalar>(cloud: &ParticleCloud<T>) -> T {
    let sq: Vec<T> = cloud.weights.iter().map(|&w| w * w).collect();
    T::one() / neumaier_sum(&sq)
}

/// Systematic resampling to `target_count` equally weighted particles.
///
/// One uniform offset `u ~ U[0, 1/N)` is drawn; particle `j` is copied once for
/// every grid point `u + i/N` falling in its slice of the cumulative weights.
pub fn resample<T: Scalar, R: Rng + ?Sized>(
    cloud: &ParticleCloud<T>,
    target_count: usize,
    rng: &mut R,
) -> Result<ParticleCloud<T>> {
    assert!(target_count >= 1, "resample target_count must be positive");
    let total = cloud.weight_sum();
    if !(total > T::zero()) {
        return Err(Error::AllZeroWeights);
    }
    let n = target_count as f64;
    let offset: f64 = rng.random::<f64>() / n;

    // Cumulative weights in f64 so f32 clouds resample with the same grid.
    let total = total.as_f64();
    let last_positive = cloud
        .weights
        .iter()
        .rposition(|w| *w > T::zero())
        .expect("positive total implies a positive weight");

    // particle j owns [c_{j-1}, c_j); zero-weight slices are empty and never selected
    let mut states = Vec::with_capacity(target_count);
    let mut j = 0usize;
    let mut upper = cloud.weights[0].as_f64() / total;
    for i in 0..target_count {
        let u = offset + i as f64 / n;
        while j < last_positive && (u >= upper || cloud.weights[j] == T::zero()) {
            j += 1;
            upper += cloud.weights[j].as_f64() / total;
        }
        states.push(cloud.states[j]);
    }
    ParticleCloud::uniform(states)
}

/// One possible object: existence probability plus conditional spatial density.
#[derive(Debug, Clone)]
pub struct BernoulliComponent<T> {
    pub label: TrackLabel,
    pub existence: T,
    pub cloud: ParticleCloud<T>,
}

impl<T: Scalar> BernoulliComponent<T> {
    pub fn new(label: TrackLabel, existence: T, cloud: ParticleCloud<T>) -> Result<Self> {
        if !(existence >= T::zero() && existence <= T::one()) {
            return Err(Error::InvalidCloud(format!(
                "existence {existence} of {label} outside [0, 1]"
            )));
        }
        Ok(Self {
            label,
            existence,
            cloud,
        })
    }
}

/// Labeled multi-Bernoulli density; components are kept sorted by label.
#[derive(Debug, Clone)]
pub struct LmbDensity<T> {
    components: Vec<BernoulliComponent<T>>,
}

impl<T> Default for LmbDensity<T> {
    fn default() -> Self {
        Self {
            components: Vec::new(),
        }
    }
}

impl<T: Scalar> LmbDensity<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_components(
        components: impl IntoIterator<Item = BernoulliComponent<T>>,
    ) -> Result<Self> {
        let mut density = Self::new();
        for c in components {
            density.insert(c)?;
        }
        Ok(density)
    }

    /// Inserts a component, rejecting a duplicate label.
    pub fn insert(&mut self, component: BernoulliComponent<T>) -> Result<()> {
        match self
            .components
            .binary_search_by(|c| c.label.cmp(&component.label))
        {
            Ok(_) => Err(Error::LabelCollision(component.label)),
            Err(pos) => {
                self.components.insert(pos, component);
                Ok(())
            }
        }
    }

    pub fn get(&self, label: &TrackLabel) -> Option<&BernoulliComponent<T>> {
        self.components
            .binary_search_by(|c| c.label.cmp(label))
            .ok()
            .map(|i| &self.components[i])
    }

    pub fn contains(&self, label: &TrackLabel) -> bool {
        self.get(label).is_some()
    }

    pub fn components(&self) -> &[BernoulliComponent<T>] {
        &self.components
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BernoulliComponent<T>> {
        self.components.iter()
    }

    pub fn labels(&self) -> impl Iterator<Item = TrackLabel> + '_ {
        self.components.iter().map(|c| c.label)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Mean cardinality `Σ r`.
    pub fn expected_cardinality(&self) -> T {
        self.components.iter().map(|c| c.existence).sum()
    }

    pub fn same_labels(&self, other: &Self) -> bool {
        self.len() == other.len() && self.labels().eq(other.labels())
    }

    pub(crate) fn from_sorted_unchecked(components: Vec<BernoulliComponent<T>>) -> Self {
        debug_assert!(components.windows(2).all(|w| w[0].label < w[1].label));
        Self { components }
    }

    pub(crate) fn into_components(self) -> Vec<BernoulliComponent<T>> {
        self.components
    }
}

impl<'a, T> IntoIterator for &'a LmbDensity<T> {
    type Item = &'a BernoulliComponent<T>;
    type IntoIter = std::slice::Iter<'a, BernoulliComponent<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.components.iter()
    }
}
