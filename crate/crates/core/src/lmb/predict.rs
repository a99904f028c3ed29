use rand::Rng;

use crate::error::{Error, Result};
use crate::motion::{BirthModel, MotionModel};
use crate::rfs::{resample, BernoulliComponent, LmbDensity, ParticleCloud, TrackLabel};
use crate::scalar::Scalar;

/// LMB prediction to step `time`.
///
/// Every surviving component is first resampled to `particles` equal-weight
/// particles, then each particle is drawn from the transition density. Its
/// existence becomes `η_S · r` with `η_S = Σ_j w_j p_S`. Birth components are
/// appended with labels `(time, index)`.
pub fn predict<T: Scalar, R: Rng + ?Sized>(
    prior: &LmbDensity<T>,
    motion: &MotionModel<T>,
    birth: &BirthModel<T>,
    time: u32,
    particles: usize,
    rng: &mut R,
) -> Result<LmbDensity<T>> {
    assert!(particles >= 1, "particle count must be positive");
    let p_s = motion.survival_probability;

    let mut predicted = Vec::with_capacity(prior.len() + birth.components.len());
    for comp in prior {
        let resampled = resample(&comp.cloud, particles, rng)?;
        let eta_s: T = resampled.weights().iter().map(|&w| w * p_s).sum();
        let states = resampled.states().iter().map(|x| motion.sample(x, rng)).collect();
        predicted.push(BernoulliComponent {
            label: comp.label,
            existence: (eta_s * comp.existence).min(T::one()),
            cloud: ParticleCloud::uniform(states)?,
        });
    }

    let mut density = LmbDensity::from_components(predicted)?;
    for b in &birth.components {
        let label = TrackLabel::new(time, b.index);
        if density.contains(&label) {
            return Err(Error::LabelCollision(label));
        }
        let states = (0..particles).map(|_| b.sampler.sample(rng)).collect();
        density.insert(BernoulliComponent::new(label, b.existence, ParticleCloud::uniform(states)?)?)?;
    }
    Ok(density)
}
