//! Per-sensor LMB measurement update in particle form.
//!
//! The joint posterior over `(I₊, θ)` is never materialized. Labels are split
//! into groups that share gated measurements, and within a group the update
//! ranks *association events*: which label takes which measurement, with every
//! other label undetected. An undetected label is either absent, weight
//! `1 − r`, or present and missed, weight `r η₀`. That binary split factors out
//! of every event, so marginals over the expanded pairs are recovered in closed
//! form.

use std::collections::BTreeMap;

use crate::assignment::{murty_k_best, CostMatrix};
use crate::error::Result;
use crate::rfs::{BernoulliComponent, LmbDensity, TrackLabel};
use crate::scalar::{log_sum_exp, Scalar};
use crate::sensor::{Measurement, SensorModel};

/// How the hypothesis space is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Enumeration {
    /// Exhaustive while the legal count stays within `exhaustive_limit`, ranked assignment beyond.
    #[default]
    Auto,
    Exhaustive,
    Ranked,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateConfig {
    /// `H_max`: hypotheses kept per group after ranking.
    pub max_hypotheses: usize,
    pub exhaustive_limit: usize,
    /// A measurement is considered for a label only if some particle's
    /// likelihood exceeds this fraction of the Gaussian peak. `0` disables gating.
    pub gate_threshold: f64,
    pub enumeration: Enumeration,
}

impl Default for UpdateConfig {
    fn default() -> Self {
        Self {
            max_hypotheses: 1000,
            exhaustive_limit: 10_000,
            gate_threshold: 1e-6,
            enumeration: Enumeration::Auto,
        }
    }
}

impl UpdateConfig {
    /// No gating, no truncation, exhaustive search.
    pub fn exact() -> Self {
        Self {
            max_hypotheses: usize::MAX,
            exhaustive_limit: usize::MAX,
            gate_threshold: 0.0,
            enumeration: Enumeration::Exhaustive,
        }
    }

    fn gate_distance_sq(&self) -> f64 {
        if self.gate_threshold > 0.0 {
            -2.0 * self.gate_threshold.ln()
        } else {
            f64::INFINITY
        }
    }
}

/// Per-particle factors `ψ_Z(x_j, ℓ; θ)` for one association and their weighted sum `η_Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLikelihood<T> {
    pub factors: Vec<T>,
    pub eta: T,
}

/// Particle-wise sensor quantities reused by every measurement.
struct Projection<T> {
    bearing: Vec<T>,
    range: Vec<T>,
    detection: Vec<T>,
}

impl<T: Scalar> Projection<T> {
    fn new(component: &BernoulliComponent<T>, sensor: &SensorModel<T>) -> Self {
        let n = component.cloud.len();
        let mut bearing = Vec::with_capacity(n);
        let mut range = Vec::with_capacity(n);
        let mut detection = Vec::with_capacity(n);
        for x in component.cloud.states() {
            let (b, r) = sensor.bearing_range(x);
            bearing.push(b);
            range.push(r);
            detection.push(sensor.detection_probability_at(b, r));
        }
        Self {
            bearing,
            range,
            detection,
        }
    }
}

fn miss_term<T: Scalar>(component: &BernoulliComponent<T>, proj: &Projection<T>) -> PseudoLikelihood<T> {
    let factors: Vec<T> = proj.detection.iter().map(|&pd| T::one() - pd).collect();
    let eta = weighted_sum(component.cloud.weights(), &factors);
    PseudoLikelihood { factors, eta }
}

/// Detection term for measurement `z`, or `None` when gated out.
fn detection_term<T: Scalar>(
    component: &BernoulliComponent<T>,
    proj: &Projection<T>,
    z: &Measurement<T>,
    sensor: &SensorModel<T>,
    gate_d2: f64,
) -> Option<PseudoLikelihood<T>> {
    let pi = T::PI();
    let two_pi = pi + pi;
    let half = T::of(0.5);
    let inv_vb = T::one() / sensor.bearing_variance;
    let inv_vr = T::one() / sensor.range_variance;
    let peak_over_kappa = (-(two_pi.ln()) - half * (sensor.bearing_variance * sensor.range_variance).ln()).exp()
        / sensor.clutter_intensity();
    // exp(-d²/2) underflows to zero well before this
    let cutoff = T::of(1500.0);

    let mut min_d2 = T::infinity();
    let mut factors = Vec::with_capacity(proj.bearing.len());
    for j in 0..proj.bearing.len() {
        let mut db = z.bearing - proj.bearing[j];
        if db > pi {
            db = db - two_pi;
        } else if db <= -pi {
            db = db + two_pi;
        }
        let dr = z.range - proj.range[j];
        let d2 = db * db * inv_vb + dr * dr * inv_vr;
        if d2 < min_d2 {
            min_d2 = d2;
        }
        factors.push(if d2 < cutoff {
            proj.detection[j] * peak_over_kappa * (-half * d2).exp()
        } else {
            T::zero()
        });
    }
    if min_d2.as_f64() > gate_d2 {
        return None;
    }
    let eta = weighted_sum(component.cloud.weights(), &factors);
    Some(PseudoLikelihood { factors, eta })
}

fn weighted_sum<T: Scalar>(weights: &[T], factors: &[T]) -> T {
    weights.iter().zip(factors).map(|(&w, &f)| w * f).sum()
}

/// `ψ` factors and `η` for one label under association index `index`
/// (`0` = missed, `m ≥ 1` = measurement `z_m`).
pub fn compute_pseudo_likelihood<T: Scalar>(
    component: &BernoulliComponent<T>,
    index: usize,
    z: &[Measurement<T>],
    sensor: &SensorModel<T>,
) -> PseudoLikelihood<T> {
    assert!(index <= z.len(), "association index {index} out of range for {} measurements", z.len());
    let proj = Projection::new(component, sensor);
    if index == 0 {
        miss_term(component, &proj)
    } else {
        detection_term(component, &proj, &z[index - 1], sensor, f64::INFINITY)
            .expect("ungated detection term always exists")
    }
}

/// Everything the association search needs to know about one label.
struct LabelTerms<T> {
    existence: T,
    miss: PseudoLikelihood<T>,
    /// Gated measurements (0-based index into `Z`) with a positive `η`.
    detections: Vec<(usize, PseudoLikelihood<T>)>,
}

impl<T: Scalar> LabelTerms<T> {
    fn build(component: &BernoulliComponent<T>, z: &[Measurement<T>], sensor: &SensorModel<T>, gate_d2: f64) -> Self {
        let proj = Projection::new(component, sensor);
        let miss = miss_term(component, &proj);
        let detections = z
            .iter()
            .enumerate()
            .filter_map(|(m, zm)| {
                detection_term(component, &proj, zm, sensor, gate_d2)
                    .filter(|t| t.eta > T::zero())
                    .map(|t| (m, t))
            })
            .collect();
        Self {
            existence: component.existence,
            miss,
            detections,
        }
    }

    fn log_absent(&self) -> T {
        (T::one() - self.existence).ln()
    }

    fn log_missed(&self) -> T {
        (self.existence * self.miss.eta).ln()
    }

    /// `ln(1 − r + r η₀)`: absent and missed merged.
    fn log_undetected(&self) -> T {
        (T::one() - self.existence + self.existence * self.miss.eta).ln()
    }

    fn log_detected(&self, k: usize) -> T {
        (self.existence * self.detections[k].1.eta).ln()
    }
}

/// Per-label choice in an association event: `None` = undetected, `Some(k)` =
/// the label's `k`-th gated detection.
type Event = Vec<Option<usize>>;

/// Depth-first enumeration of all legal events; `None` if more than `limit` exist.
fn enumerate_events<T: Scalar>(
    terms: &[&LabelTerms<T>],
    n_meas: usize,
    limit: usize,
) -> Option<Vec<(Event, T)>> {
    fn rec<T: Scalar>(
        terms: &[&LabelTerms<T>],
        depth: usize,
        used: &mut [bool],
        current: &mut Event,
        acc: T,
        out: &mut Vec<(Event, T)>,
        limit: usize,
    ) -> bool {
        if depth == terms.len() {
            if out.len() >= limit {
                return false;
            }
            out.push((current.clone(), acc));
            return true;
        }
        let t = terms[depth];
        let lu = t.log_undetected();
        if lu > T::neg_infinity() {
            current[depth] = None;
            if !rec(terms, depth + 1, used, current, acc + lu, out, limit) {
                return false;
            }
        }
        for (k, (m, _)) in t.detections.iter().enumerate() {
            if used[*m] {
                continue;
            }
            let ld = t.log_detected(k);
            if ld == T::neg_infinity() {
                continue;
            }
            used[*m] = true;
            current[depth] = Some(k);
            let ok = rec(terms, depth + 1, used, current, acc + ld, out, limit);
            used[*m] = false;
            if !ok {
                return false;
            }
        }
        current[depth] = None;
        true
    }

    let mut out = Vec::new();
    let mut used = vec![false; n_meas];
    let mut current = vec![None; terms.len()];
    rec(terms, 0, &mut used, &mut current, T::zero(), &mut out, limit).then_some(out)
}

/// Best `k` events by ranked assignment over `labels × (measurements ∪ private undetected columns)`.
fn rank_events<T: Scalar>(terms: &[&LabelTerms<T>], n_meas: usize, k: usize) -> Vec<(Event, T)> {
    let n = terms.len();
    let mut cost = CostMatrix::filled(n, n_meas + n, T::infinity());
    for (i, t) in terms.iter().enumerate() {
        cost.set(i, n_meas + i, -t.log_undetected());
        for (kk, (m, _)) in t.detections.iter().enumerate() {
            cost.set(i, *m, -t.log_detected(kk));
        }
    }
    murty_k_best(&cost, k)
        .into_iter()
        .map(|a| {
            let event: Event = a
                .columns
                .iter()
                .enumerate()
                .map(|(i, &col)| {
                    if col >= n_meas {
                        None
                    } else {
                        terms[i].detections.iter().position(|(m, _)| *m == col)
                    }
                })
                .collect();
            (event, -a.cost)
        })
        .collect()
}

/// Events for one group with normalized linear weights.
fn group_events<T: Scalar>(terms: &[&LabelTerms<T>], n_meas: usize, config: &UpdateConfig) -> Vec<(Event, T)> {
    let mut events = match config.enumeration {
        Enumeration::Exhaustive => enumerate_events(terms, n_meas, usize::MAX).expect("unbounded enumeration"),
        Enumeration::Ranked => rank_events(terms, n_meas, config.max_hypotheses),
        Enumeration::Auto => enumerate_events(terms, n_meas, config.exhaustive_limit)
            .unwrap_or_else(|| rank_events(terms, n_meas, config.max_hypotheses)),
    };
    if events.len() > config.max_hypotheses {
        // stable: equal weights keep enumeration order
        events.sort_by(|a, b| b.1.as_f64().total_cmp(&a.1.as_f64()));
        events.truncate(config.max_hypotheses);
    }
    let logs: Vec<T> = events.iter().map(|e| e.1).collect();
    let norm = log_sum_exp(&logs);
    for e in &mut events {
        e.1 = (e.1 - norm).exp();
    }
    events
}

/// Posterior existence and weights for one label from the group's event marginals.
fn posterior_component<T: Scalar>(
    predicted: &BernoulliComponent<T>,
    terms: &LabelTerms<T>,
    undetected: T,
    detected: &[T],
) -> BernoulliComponent<T> {
    let r = terms.existence;
    let denom = T::one() - r + r * terms.miss.eta;
    let missed_share = if denom > T::zero() { r * terms.miss.eta / denom } else { T::zero() };
    let missed_mass = undetected * missed_share;
    let detected_mass: T = detected.iter().copied().sum();
    let existence = (missed_mass + detected_mass).max(T::zero()).min(T::one());

    let w = predicted.cloud.weights();
    let mut weights = vec![T::zero(); w.len()];
    if missed_mass > T::zero() && terms.miss.eta > T::zero() {
        let c = missed_mass / terms.miss.eta;
        for (acc, f) in weights.iter_mut().zip(&terms.miss.factors) {
            *acc = *acc + c * *f;
        }
    }
    for (mass, (_, term)) in detected.iter().zip(&terms.detections) {
        if *mass > T::zero() {
            let c = *mass / term.eta;
            for (acc, f) in weights.iter_mut().zip(&term.factors) {
                *acc = *acc + c * *f;
            }
        }
    }
    for (acc, &wj) in weights.iter_mut().zip(w) {
        *acc = *acc * wj;
    }
    let total: T = weights.iter().copied().sum();
    let cloud = if total > T::zero() && total.is_finite() {
        predicted.cloud.reweighted(weights.into_iter().map(|x| x / total).collect())
    } else {
        predicted.cloud.clone()
    };
    BernoulliComponent {
        label: predicted.label,
        existence,
        cloud,
    }
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// LMB update of `predicted` with one sensor's scan.
///
/// Labels and particle locations are preserved; only existence probabilities
/// and particle weights change.
pub fn local_update<T: Scalar>(
    predicted: &LmbDensity<T>,
    z: &[Measurement<T>],
    sensor: &SensorModel<T>,
    config: &UpdateConfig,
) -> Result<LmbDensity<T>> {
    assert!(config.max_hypotheses >= 1, "hypothesis budget must be positive");
    let gate_d2 = config.gate_distance_sq();
    let comps = predicted.components();
    let terms: Vec<LabelTerms<T>> = comps
        .iter()
        .map(|c| LabelTerms::build(c, z, sensor, gate_d2))
        .collect();

    // Labels sharing a gated measurement must be associated jointly.
    let mut sets = DisjointSets::new(comps.len());
    let mut first_claim: Vec<Option<usize>> = vec![None; z.len()];
    for (i, t) in terms.iter().enumerate() {
        for (m, _) in &t.detections {
            match first_claim[*m] {
                Some(j) => sets.union(i, j),
                None => first_claim[*m] = Some(i),
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..comps.len() {
        groups.entry(sets.find(i)).or_default().push(i);
    }

    let mut out: Vec<Option<BernoulliComponent<T>>> = vec![None; comps.len()];
    for members in groups.values() {
        let group_terms: Vec<&LabelTerms<T>> = members.iter().map(|&i| &terms[i]).collect();
        let events = group_events(&group_terms, z.len(), config);

        let mut undetected = vec![T::zero(); members.len()];
        let mut detected: Vec<Vec<T>> = group_terms.iter().map(|t| vec![T::zero(); t.detections.len()]).collect();
        for (event, weight) in &events {
            for (slot, choice) in event.iter().enumerate() {
                match choice {
                    None => undetected[slot] = undetected[slot] + *weight,
                    Some(k) => detected[slot][*k] = detected[slot][*k] + *weight,
                }
            }
        }
        for (slot, &i) in members.iter().enumerate() {
            out[i] = Some(posterior_component(&comps[i], &terms[i], undetected[slot], &detected[slot]));
        }
    }
    Ok(LmbDensity::from_sorted_unchecked(
        out.into_iter().map(|c| c.expect("every label belongs to a group")).collect(),
    ))
}

/// Association map over a hypothesis' label set: `0` = missed, `m ≥ 1` = `z_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AssociationMap {
    pub assignment: BTreeMap<TrackLabel, usize>,
}

impl AssociationMap {
    /// Positive indices are pairwise distinct.
    pub fn is_one_to_one(&self) -> bool {
        let mut seen: Vec<usize> = self.assignment.values().copied().filter(|&m| m > 0).collect();
        let n = seen.len();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == n
    }
}

/// One `(I₊, θ)` pair with its normalized weight.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateHypothesis<T> {
    pub map: AssociationMap,
    pub weight: T,
}

impl<T> UpdateHypothesis<T> {
    /// `I₊`: the labels hypothesised to exist.
    pub fn label_set(&self) -> impl Iterator<Item = TrackLabel> + '_ {
        self.map.assignment.keys().copied()
    }
}

/// Per-label choice in an expanded hypothesis.
#[derive(Clone, Copy)]
enum Choice {
    Absent,
    Missed,
    Detected(usize),
}

/// Full `(I₊, θ)` hypotheses over the whole label set, sorted by descending weight.
///
/// Exhaustive while the legal count is within `exhaustive_limit`, otherwise the
/// best `max_hypotheses` by ranked assignment. Weights are renormalized over
/// the returned set.
pub fn enumerate_hypotheses<T: Scalar>(
    predicted: &LmbDensity<T>,
    z: &[Measurement<T>],
    sensor: &SensorModel<T>,
    config: &UpdateConfig,
) -> Vec<UpdateHypothesis<T>> {
    assert!(config.max_hypotheses >= 1, "hypothesis budget must be positive");
    let gate_d2 = config.gate_distance_sq();
    let comps = predicted.components();
    let terms: Vec<LabelTerms<T>> = comps
        .iter()
        .map(|c| LabelTerms::build(c, z, sensor, gate_d2))
        .collect();

    let exhaustive = match config.enumeration {
        Enumeration::Exhaustive => expand_all(&terms, z.len(), usize::MAX),
        Enumeration::Ranked => None,
        Enumeration::Auto => expand_all(&terms, z.len(), config.exhaustive_limit),
    };
    let mut hyps = match exhaustive {
        Some(mut all) => {
            all.sort_by(|a, b| b.1.as_f64().total_cmp(&a.1.as_f64()));
            all.truncate(config.max_hypotheses);
            all
        }
        None => rank_expanded(&terms, z.len(), config.max_hypotheses),
    };

    let logs: Vec<T> = hyps.iter().map(|h| h.1).collect();
    let norm = log_sum_exp(&logs);
    hyps.iter_mut().for_each(|h| h.1 = (h.1 - norm).exp());
    hyps.into_iter()
        .map(|(choices, weight)| {
            let assignment = choices
                .iter()
                .zip(comps)
                .filter_map(|(c, comp)| match c {
                    Choice::Absent => None,
                    Choice::Missed => Some((comp.label, 0)),
                    Choice::Detected(m) => Some((comp.label, m + 1)),
                })
                .collect();
            UpdateHypothesis {
                map: AssociationMap { assignment },
                weight,
            }
        })
        .collect()
}

fn expand_all<T: Scalar>(terms: &[LabelTerms<T>], n_meas: usize, limit: usize) -> Option<Vec<(Vec<Choice>, T)>> {
    fn rec<T: Scalar>(
        terms: &[LabelTerms<T>],
        depth: usize,
        used: &mut [bool],
        current: &mut Vec<Choice>,
        acc: T,
        out: &mut Vec<(Vec<Choice>, T)>,
        limit: usize,
    ) -> bool {
        if depth == terms.len() {
            if out.len() >= limit {
                return false;
            }
            out.push((current.clone(), acc));
            return true;
        }
        let t = &terms[depth];
        let mut options: Vec<(Choice, T)> = vec![(Choice::Absent, t.log_absent()), (Choice::Missed, t.log_missed())];
        options.extend(
            t.detections
                .iter()
                .enumerate()
                .filter(|(_, (m, _))| !used[*m])
                .map(|(k, (m, _))| (Choice::Detected(*m), t.log_detected(k))),
        );
        for (choice, lw) in options {
            if lw == T::neg_infinity() {
                continue;
            }
            if let Choice::Detected(m) = choice {
                used[m] = true;
            }
            current.push(choice);
            let ok = rec(terms, depth + 1, used, current, acc + lw, out, limit);
            current.pop();
            if let Choice::Detected(m) = choice {
                used[m] = false;
            }
            if !ok {
                return false;
            }
        }
        true
    }
    let mut out = Vec::new();
    let mut used = vec![false; n_meas];
    let mut current = Vec::with_capacity(terms.len());
    rec(terms, 0, &mut used, &mut current, T::zero(), &mut out, limit).then_some(out)
}

/// Ranked assignment over `labels × (measurements ∪ missed_i ∪ absent_i)`.
fn rank_expanded<T: Scalar>(terms: &[LabelTerms<T>], n_meas: usize, k: usize) -> Vec<(Vec<Choice>, T)> {
    let n = terms.len();
    let mut cost = CostMatrix::filled(n, n_meas + 2 * n, T::infinity());
    for (i, t) in terms.iter().enumerate() {
        cost.set(i, n_meas + i, -t.log_missed());
        cost.set(i, n_meas + n + i, -t.log_absent());
        for (kk, (m, _)) in t.detections.iter().enumerate() {
            cost.set(i, *m, -t.log_detected(kk));
        }
    }
    murty_k_best(&cost, k)
        .into_iter()
        .map(|a| {
            let choices = a
                .columns
                .iter()
                .map(|&col| {
                    if col < n_meas {
                        Choice::Detected(col)
                    } else if col < n_meas + n {
                        Choice::Missed
                    } else {
                        Choice::Absent
                    }
                })
                .collect();
            (choices, -a.cost)
        })
        .collect()
}
