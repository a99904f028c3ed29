//! Bearing-range sensors: detection profile, likelihood, clutter and scan synthesis.
//!
//! Bearings are measured from the +y axis towards +x, i.e. `atan2(Δx, Δy)`,
//! and wrapped into `(-π, π]`. A sensor's boresight uses the same convention.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::rfs::KinematicState;
use crate::scalar::{wrap_angle, Scalar};

/// One bearing-range return.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement<T> {
    pub bearing: T,
    pub range: T,
}

impl<T: Scalar> Measurement<T> {
    pub fn new(bearing: T, range: T) -> Self {
        Self { bearing, range }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel<T> {
    pub position: [T; 2],
    /// Centre of the field of view, rad.
    pub boresight: T,
    /// Half-width `W` of the field of view (3 dB point), rad.
    pub fov_half_width: T,
    /// Butterworth order `H` of the angular gain.
    pub filter_order: u32,
    /// Detection threshold `Γ_th`.
    pub threshold: T,
    /// Gain constant `c₀`.
    pub gain: T,
    pub bearing_variance: T,
    pub range_variance: T,
    /// Expected clutter returns per scan.
    pub clutter_rate: T,
    /// Upper end of the range window clutter is spread over.
    pub max_range: T,
}

impl<T: Scalar> SensorModel<T> {
    /// Sensor with the default profile constants: `H = 40`, `Γ_th = 4.6`,
    /// `c₀ = 4.6e4`, `W = 30°`, `σ_θ² = 2π/180`, `σ_r² = 10`.
    pub fn with_defaults(position: [T; 2], boresight: T, clutter_rate: T, max_range: T) -> Self {
        Self {
            position,
            boresight,
            fov_half_width: T::of(30f64.to_radians()),
            filter_order: 40,
            threshold: T::of(4.6),
            gain: T::of(4.6e4),
            bearing_variance: T::of(2.0 * std::f64::consts::PI / 180.0),
            range_variance: T::of(10.0),
            clutter_rate,
            max_range,
        }
    }

    /// Checks the parameter ranges of the profile.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.bearing_variance > T::zero() && self.range_variance > T::zero()) {
            return Err("noise variances must be positive".into());
        }
        if !(self.fov_half_width > T::zero() && self.fov_half_width <= T::FRAC_PI_2()) {
            return Err("fov half-width must lie in (0, π/2]".into());
        }
        if !(self.clutter_rate >= T::zero()) {
            return Err("clutter rate must be non-negative".into());
        }
        if self.filter_order == 0 {
            return Err("filter order must be positive".into());
        }
        if !(self.threshold > T::zero() && self.gain > T::zero() && self.max_range > T::zero()) {
            return Err("threshold, gain and max range must be positive".into());
        }
        Ok(())
    }

    /// Noise-free `(bearing, range)` of a state.
    #[inline]
    pub fn bearing_range(&self, state: &KinematicState<T>) -> (T, T) {
        let dx = state.px - self.position[0];
        let dy = state.py - self.position[1];
        (dx.atan2(dy), (dx * dx + dy * dy).sqrt())
    }

    /// Angular offset `ψ ∈ [0, π]` of a bearing from the boresight.
    #[inline]
    pub fn angular_offset(&self, bearing: T) -> T {
        wrap_angle(bearing - self.boresight).abs()
    }

    /// Butterworth angular gain `1 / (1 + (ψ/W)^{2H})`; exactly 0.5 at `ψ = W`.
    #[inline]
    pub fn angular_gain(&self, offset: T) -> T {
        let ratio = offset / self.fov_half_width;
        T::one() / (T::one() + ratio.powi(2 * self.filter_order as i32))
    }

    /// Rayleigh-fading detection probability at a given range and bearing.
    #[inline]
    pub fn detection_probability_at(&self, bearing: T, range: T) -> T {
        let f2 = self.angular_gain(self.angular_offset(bearing));
        // c₀ f₁(r) f₂(ψ) with f₁ = 1/r; written as a quotient so r → 0 with f₂ = 0 stays finite.
        let snr = self.gain * f2 / range.max(T::min_positive_value());
        (-self.threshold / (T::one() + snr)).exp()
    }

    /// Clutter intensity `κ(z)`: rate times the uniform density over the
    /// `(-π, π] × [0, max_range]` window. The rate is floored at 1e-9 so a
    /// clutter-free sensor keeps finite likelihood ratios.
    pub fn clutter_intensity(&self) -> T {
        let rate = self.clutter_rate.max(T::of(1e-9));
        rate / (T::of(2.0) * T::PI() * self.max_range)
    }

    /// `ln N(z; μ, R)` for a predicted `(bearing, range)`.
    #[inline]
    pub fn log_likelihood_at(&self, z: &Measurement<T>, bearing: T, range: T) -> T {
        let two_pi = T::of(2.0) * T::PI();
        let norm = -(two_pi.ln()) - T::of(0.5) * (self.bearing_variance * self.range_variance).ln();
        norm - T::of(0.5) * self.mahalanobis_sq(z, bearing, range)
    }

    #[inline]
    pub fn mahalanobis_sq(&self, z: &Measurement<T>, bearing: T, range: T) -> T {
        let db = wrap_angle(z.bearing - bearing);
        let dr = z.range - range;
        db * db / self.bearing_variance + dr * dr / self.range_variance
    }

    /// `g(z | x)`.
    pub fn likelihood(&self, z: &Measurement<T>, state: &KinematicState<T>) -> T {
        let (b, r) = self.bearing_range(state);
        self.log_likelihood_at(z, b, r).exp()
    }
}

/// `p_D(x)` for one sensor.
pub fn detection_probability<T: Scalar>(sensor: &SensorModel<T>, state: &KinematicState<T>) -> T {
    let (b, r) = sensor.bearing_range(state);
    sensor.detection_probability_at(b, r)
}

/// Noisy bearing-range measurement of `state`.
pub fn measure<T: Scalar, R: Rng + ?Sized>(
    sensor: &SensorModel<T>,
    state: &KinematicState<T>,
    rng: &mut R,
) -> Measurement<T> {
    let (b, r) = sensor.bearing_range(state);
    let nb: f64 = rng.sample(StandardNormal);
    let nr: f64 = rng.sample(StandardNormal);
    Measurement {
        bearing: wrap_angle(b + T::of(nb) * sensor.bearing_variance.sqrt()),
        // reflect at zero so range stays non-negative next to the sensor
        range: (r + T::of(nr) * sensor.range_variance.sqrt()).abs(),
    }
}

/// Uniform draw over the sensor's clutter window.
pub fn clutter_point<T: Scalar, R: Rng + ?Sized>(sensor: &SensorModel<T>, rng: &mut R) -> Measurement<T> {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    // (−π, π]: map u ∈ [0, 1) to π − 2πu
    let bearing = T::PI() - T::of(2.0 * u) * T::PI();
    Measurement {
        bearing,
        range: T::of(v) * sensor.max_range,
    }
}

/// Poisson draw, with a zero rate short-circuited.
pub(crate) fn poisson_count<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> usize {
    if rate <= 0.0 {
        return 0;
    }
    let d = Poisson::new(rate).expect("positive finite clutter rate");
    d.sample(rng) as usize
}

/// One scan of every sensor: thinned detections of `truth` plus Poisson clutter,
/// shuffled so the order carries no origin information.
pub fn scan<T: Scalar, R: Rng + ?Sized>(
    sensors: &[SensorModel<T>],
    truth: &[KinematicState<T>],
    rng: &mut R,
) -> Vec<Vec<Measurement<T>>> {
    sensors
        .iter()
        .map(|sensor| {
            let mut z = Vec::new();
            for x in truth {
                let pd = detection_probability(sensor, x);
                if rng.random::<f64>() < pd.as_f64() {
                    z.push(measure(sensor, x, rng));
                }
            }
            let n_clutter = poisson_count(sensor.clutter_rate.as_f64(), rng);
            z.extend((0..n_clutter).map(|_| clutter_point(sensor, rng)));
            z.shuffle(rng);
            z
        })
        .collect()
}
