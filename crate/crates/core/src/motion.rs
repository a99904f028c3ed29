//! Nearly-constant-velocity dynamics and birth sampling.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::rfs::KinematicState;
use crate::scalar::Scalar;

pub type Matrix4<T> = [[T; 4]; 4];

/// Which per-axis process-noise block the NCV model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProcessNoise {
    /// Discretized white-noise acceleration `[T³/3, T²/2; T²/2, T]`.
    #[default]
    WhiteAcceleration,
    /// The literal block `[0.1 0.001; 0.1 0.001]`, symmetrized and projected onto
    /// the PSD cone so it can parameterize a Gaussian.
    Printed,
}

/// Linear-Gaussian transition `x' ~ N(F x, Q)` with a constant survival probability.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel<T> {
    pub transition: Matrix4<T>,
    pub process_noise: Matrix4<T>,
    pub survival_probability: T,
    pub sampling_interval: T,
    /// Lower-triangular `L` with `L Lᵀ = Q`.
    noise_factor: Matrix4<T>,
}

impl<T: Scalar> MotionModel<T> {
    /// Panics if `process_noise` is not symmetric PSD or `survival_probability ∉ (0, 1]`.
    pub fn new(
        transition: Matrix4<T>,
        process_noise: Matrix4<T>,
        survival_probability: T,
        sampling_interval: T,
    ) -> Self {
        assert!(
            survival_probability > T::zero() && survival_probability <= T::one(),
            "survival probability must lie in (0, 1]"
        );
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (process_noise[i][j] - process_noise[j][i]).abs() <= T::of(1e-12),
                    "process noise must be symmetric"
                );
            }
        }
        let noise_factor = psd_factor(&process_noise).expect("process noise must be PSD");
        Self {
            transition,
            process_noise,
            survival_probability,
            sampling_interval,
            noise_factor,
        }
    }

    /// NCV model over `[px, vx, py, vy]` with noise scale `sigma_w` (m/s²).
    pub fn ncv(sampling_interval: T, sigma_w: T, survival_probability: T, noise: ProcessNoise) -> Self {
        let t = sampling_interval;
        let z = T::zero();
        let o = T::one();
        let f = [[o, t, z, z], [z, o, z, z], [z, z, o, t], [z, z, z, o]];
        let block = match noise {
            ProcessNoise::WhiteAcceleration => {
                let t2 = t * t / T::of(2.0);
                let t3 = t * t * t / T::of(3.0);
                [[t3, t2], [t2, t]]
            }
            ProcessNoise::Printed => printed_block(),
        };
        let s2 = sigma_w * sigma_w;
        let mut q = [[z; 4]; 4];
        for axis in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    q[2 * axis + i][2 * axis + j] = s2 * block[i][j];
                }
            }
        }
        Self::new(f, q, survival_probability, sampling_interval)
    }

    /// `F x`.
    pub fn propagate_mean(&self, state: &KinematicState<T>) -> KinematicState<T> {
        KinematicState::from_array(mat_vec(&self.transition, &state.to_array()))
    }

    /// Draws from `N(F x, Q)`.
    pub fn sample<R: Rng + ?Sized>(&self, state: &KinematicState<T>, rng: &mut R) -> KinematicState<T> {
        let mean = mat_vec(&self.transition, &state.to_array());
        let eps: [T; 4] = std::array::from_fn(|_| T::of(rng.sample::<f64, _>(StandardNormal)));
        let noise = mat_vec(&self.noise_factor, &eps);
        KinematicState::from_array(std::array::from_fn(|i| mean[i] + noise[i]))
    }
}

fn printed_block<T: Scalar>() -> [[T; 2]; 2] {
    let raw: [[f64; 2]; 2] = [[0.1, 0.001], [0.1, 0.001]];
    let a = raw[0][0];
    let d = raw[1][1];
    let b = 0.5 * (raw[0][1] + raw[1][0]);
    // Eigen-decompose the symmetric part and floor the eigenvalues.
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let floor = 1e-9_f64;
    let l1 = (mean + rad).max(floor);
    let l2 = (mean - rad).max(floor);
    let theta = 0.5 * (2.0 * b).atan2(a - d);
    let (c, s) = (theta.cos(), theta.sin());
    let m = [
        [l1 * c * c + l2 * s * s, (l1 - l2) * c * s],
        [(l1 - l2) * c * s, l1 * s * s + l2 * c * c],
    ];
    [[T::of(m[0][0]), T::of(m[0][1])], [T::of(m[1][0]), T::of(m[1][1])]]
}

pub(crate) fn mat_vec<T: Scalar>(m: &Matrix4<T>, v: &[T; 4]) -> [T; 4] {
    std::array::from_fn(|i| (0..4).fold(T::zero(), |acc, j| acc + m[i][j] * v[j]))
}

/// Cholesky factor tolerant of zero pivots (semi-definite input). `None` if not PSD.
fn psd_factor<T: Scalar>(q: &Matrix4<T>) -> Option<Matrix4<T>> {
    let mut l = [[T::zero(); 4]; 4];
    let scale = (0..4).map(|i| q[i][i].abs()).fold(T::zero(), T::max);
    let tol = T::of(1e-12) * scale.max(T::one());
    for j in 0..4 {
        let mut d = q[j][j];
        for k in 0..j {
            d = d - l[j][k] * l[j][k];
        }
        if d < -tol {
            return None;
        }
        if d <= tol {
            // zero pivot: the column must vanish too
            for i in j + 1..4 {
                let mut s = q[i][j];
                for k in 0..j {
                    s = s - l[i][k] * l[j][k];
                }
                if s.abs() > T::of(1e-9) * scale.max(T::one()) {
                    return None;
                }
            }
            continue;
        }
        let root = d.sqrt();
        l[j][j] = root;
        for i in j + 1..4 {
            let mut s = q[i][j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            l[i][j] = s / root;
        }
    }
    Some(l)
}

/// Axis-aligned box in state space; birth particles are drawn uniformly inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBox<T> {
    pub min: KinematicState<T>,
    pub max: KinematicState<T>,
}

impl<T: Scalar> UniformBox<T> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> KinematicState<T> {
        let lo = self.min.to_array();
        let hi = self.max.to_array();
        KinematicState::from_array(std::array::from_fn(|i| {
            lo[i] + (hi[i] - lo[i]) * T::of(rng.random::<f64>())
        }))
    }
}

/// One hypothesised newborn object per step and index.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthComponent<T> {
    pub index: u32,
    pub existence: T,
    pub sampler: UniformBox<T>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BirthModel<T> {
    pub components: Vec<BirthComponent<T>>,
}

impl<T: Scalar> BirthModel<T> {
    /// Single component with existence `existence`, positions uniform over the
    /// region and velocities uniform in `[-max_speed, max_speed]` per axis.
    pub fn uniform_region(existence: T, x: [T; 2], y: [T; 2], max_speed: T) -> Self {
        assert!(existence > T::zero() && existence < T::one(), "birth existence must lie in (0, 1)");
        Self {
            components: vec![BirthComponent {
                index: 0,
                existence,
                sampler: UniformBox {
                    min: KinematicState::new(x[0], -max_speed, y[0], -max_speed),
                    max: KinematicState::new(x[1], max_speed, y[1], max_speed),
                },
            }],
        }
    }
}
