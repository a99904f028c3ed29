//! Acceptance checks. Each test writes one `[n/10] ... PASS|FAIL` line to stderr.
//!
//! The update and fusion checks compare the library against brute-force
//! evaluations written here from the model definitions, sharing no code with
//! the implementation beyond the data types.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use lmb_fusion::assignment::{solve, CostMatrix};
use lmb_fusion::experiment::{
    run_experiment, run_monte_carlo, FusionKind, ScenarioConfig, SensorConfig, TargetConfig, RECORDS_FILE,
};
use lmb_fusion::fusion::{adaptive_weights, bernoulli_csd, fuse, gci_fuse_component, FusionMode};
use lmb_fusion::lmb::{local_update, UpdateConfig};
use lmb_fusion::metrics::ospa;
use lmb_fusion::rfs::{BernoulliComponent, KinematicState, LmbDensity, ParticleCloud, TrackLabel};
use lmb_fusion::sensor::{detection_probability, Measurement, SensorModel};
use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Writes to the stderr handle directly so the line survives output capture.
fn report(id: u32, name: &str, pass: bool, detail: impl std::fmt::Display) {
    use std::io::Write;
    let line = format!("[{id}/10] {name}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn wrap(a: f64) -> f64 {
    let mut a = (a + PI).rem_euclid(2.0 * PI) - PI;
    if a == -PI {
        a = PI;
    }
    a
}

// ---------------------------------------------------------------------------
// 1. Local update against brute-force hypothesis enumeration

struct UpdateInstance {
    sensor: SensorModel<f64>,
    prior: LmbDensity<f64>,
    z: Vec<Measurement<f64>>,
}

fn random_update_instance(rng: &mut ChaCha8Rng) -> UpdateInstance {
    let sensor = SensorModel {
        position: [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)],
        boresight: rng.random_range(-PI..PI),
        fov_half_width: rng.random_range(0.2..PI / 2.0),
        filter_order: rng.random_range(1..=6),
        threshold: rng.random_range(0.5..5.0),
        gain: rng.random_range(10.0..1e4),
        bearing_variance: rng.random_range(0.002..0.05),
        range_variance: rng.random_range(1.0..50.0),
        clutter_rate: rng.random_range(0.5..10.0),
        max_range: 600.0,
    };
    let n_labels = rng.random_range(1..=3);
    let mut centres = Vec::new();
    let mut comps = Vec::new();
    for i in 0..n_labels {
        let b: f64 = rng.random_range(-PI..PI);
        let r: f64 = rng.random_range(30.0..400.0);
        let c = [sensor.position[0] + r * b.sin(), sensor.position[1] + r * b.cos()];
        centres.push(c);
        let n_p = rng.random_range(1..=5);
        let states: Vec<_> = (0..n_p)
            .map(|_| {
                KinematicState::new(
                    c[0] + rng.random_range(-25.0..25.0),
                    rng.random_range(-5.0..5.0),
                    c[1] + rng.random_range(-25.0..25.0),
                    rng.random_range(-5.0..5.0),
                )
            })
            .collect();
        let raw: Vec<f64> = (0..n_p).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let cloud = ParticleCloud::new(raw.iter().map(|w| w / s).collect(), states).unwrap();
        comps.push(BernoulliComponent::new(TrackLabel::new(rng.random_range(0..3), i), rng.random_range(0.05..0.95), cloud).unwrap());
    }
    let n_z = rng.random_range(0..=3);
    let z = (0..n_z)
        .map(|_| {
            // either near a label centre or anywhere in the window
            let p = if rng.random_bool(0.7) {
                let c = centres[rng.random_range(0..centres.len())];
                [c[0] + rng.random_range(-30.0..30.0), c[1] + rng.random_range(-30.0..30.0)]
            } else {
                [rng.random_range(-400.0..400.0), rng.random_range(-400.0..400.0)]
            };
            let dx = p[0] - sensor.position[0];
            let dy = p[1] - sensor.position[1];
            Measurement::new(dx.atan2(dy), dx.hypot(dy))
        })
        .collect();
    let mut seen = HashSet::new();
    comps.retain(|c| seen.insert(c.label));
    UpdateInstance {
        sensor,
        prior: LmbDensity::from_components(comps).unwrap(),
        z,
    }
}

/// Posterior `(r, weights)` per label from explicit enumeration of every
/// (label subset, one-to-one association) pair.
fn brute_force_update(inst: &UpdateInstance) -> Vec<(f64, Vec<f64>)> {
    let s = &inst.sensor;
    let kappa = s.clutter_rate / (2.0 * PI * s.max_range);
    let comps = inst.prior.components();
    let m = inst.z.len();
    // psi[l][a][j]: a = 0 missed, a = 1..=m detection of z_{a-1}
    let psi: Vec<Vec<Vec<f64>>> = comps
        .iter()
        .map(|c| {
            let mut per_a = vec![Vec::new(); m + 1];
            for x in c.cloud.states() {
                let dx = x.px - s.position[0];
                let dy = x.py - s.position[1];
                let (b, r) = (dx.atan2(dy), dx.hypot(dy));
                let off = wrap(b - s.boresight).abs();
                let f2 = 1.0 / (1.0 + (off / s.fov_half_width).powi(2 * s.filter_order as i32));
                let pd = (-s.threshold / (1.0 + s.gain * f2 / r)).exp();
                per_a[0].push(1.0 - pd);
                for (k, zk) in inst.z.iter().enumerate() {
                    let db = wrap(zk.bearing - b);
                    let dr = zk.range - r;
                    let g = (-0.5 * (db * db / s.bearing_variance + dr * dr / s.range_variance)).exp()
                        / (2.0 * PI * (s.bearing_variance * s.range_variance).sqrt());
                    per_a[k + 1].push(pd * g / kappa);
                }
            }
            per_a
        })
        .collect();
    let eta: Vec<Vec<f64>> = comps
        .iter()
        .zip(&psi)
        .map(|(c, pa)| pa.iter().map(|f| c.cloud.weights().iter().zip(f).map(|(w, v)| w * v).sum()).collect())
        .collect();

    // choice per label: None = absent, Some(a) = present with association a
    let n = comps.len();
    let mut hyps: Vec<(Vec<Option<usize>>, f64)> = Vec::new();
    let options = m + 2;
    let total = options.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut choice = Vec::with_capacity(n);
        for _ in 0..n {
            let o = c % options;
            c /= options;
            choice.push(if o == 0 { None } else { Some(o - 1) });
        }
        let dets: Vec<usize> = choice.iter().flatten().copied().filter(|&a| a > 0).collect();
        if dets.iter().collect::<HashSet<_>>().len() != dets.len() {
            continue;
        }
        let w: f64 = choice
            .iter()
            .enumerate()
            .map(|(l, ch)| match ch {
                None => 1.0 - comps[l].existence,
                Some(a) => comps[l].existence * eta[l][*a],
            })
            .product();
        hyps.push((choice, w));
    }
    let norm: f64 = hyps.iter().map(|h| h.1).sum();
    (0..n)
        .map(|l| {
            let n_p = comps[l].cloud.len();
            let mut r = 0.0;
            let mut w = vec![0.0; n_p];
            for (choice, hw) in &hyps {
                if let Some(a) = choice[l] {
                    let p = hw / norm;
                    if p == 0.0 {
                        continue;
                    }
                    r += p;
                    for j in 0..n_p {
                        w[j] += p * comps[l].cloud.weights()[j] * psi[l][a][j] / eta[l][a];
                    }
                }
            }
            let s: f64 = w.iter().sum();
            (r, w.iter().map(|x| x / s).collect())
        })
        .collect()
}

#[test]
fn update_matches_brute_force() {
    let started = Instant::now();
    let mut max_r = 0.0f64;
    let mut max_w = 0.0f64;
    for i in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let inst = random_update_instance(&mut rng);
        let got = local_update(&inst.prior, &inst.z, &inst.sensor, &UpdateConfig::exact()).unwrap();
        let want = brute_force_update(&inst);
        for (c, (r, w)) in got.components().iter().zip(&want) {
            max_r = max_r.max((c.existence - r).abs());
            if *r > 1e-300 {
                for (a, b) in c.cloud.weights().iter().zip(w) {
                    max_w = max_w.max((a - b).abs());
                }
            }
        }
    }
    let elapsed = started.elapsed();
    let pass = max_r <= 1e-10 && max_w <= 1e-10 && elapsed < Duration::from_secs(10);
    report(1, "update vs brute force", pass, format!("max |Δr| = {max_r:.2e}, max |Δw| = {max_w:.2e}, {elapsed:.2?}"));
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 2. Fusion against direct evaluation

fn shared_states(rng: &mut ChaCha8Rng, n: usize) -> Vec<KinematicState<f64>> {
    (0..n)
        .map(|_| KinematicState::new(rng.random_range(0.0..100.0), 0.0, rng.random_range(0.0..100.0), 0.0))
        .collect()
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|w| w / s).collect()
}

/// Fused `(r, weights)` computed straight from the divergence, weight and GCI formulas.
fn direct_fusion(prior: (f64, &[f64]), locals: &[(f64, Vec<f64>)], k: f64) -> (f64, Vec<f64>) {
    let d: Vec<f64> = locals
        .iter()
        .map(|(r, w)| 0.5 * k * w.iter().zip(prior.1).map(|(wi, wp)| (r * wi - prior.0 * wp).powi(2)).sum::<f64>())
        .collect();
    let d_min = d.iter().copied().fold(f64::INFINITY, f64::min);
    let n_s = locals.len();
    let omega: Vec<f64> = if d_min < 1e-12 {
        vec![1.0 / n_s as f64; n_s]
    } else {
        // exp(D_i/D_min) / Σ_k exp(D_k/D_min), divided through by the numerator
        (0..n_s)
            .map(|i| 1.0 / d.iter().map(|dk| ((dk - d[i]) / d_min).exp()).sum::<f64>())
            .collect()
    };
    let j = prior.1.len();
    let prod_w: Vec<f64> = (0..j)
        .map(|jj| locals.iter().zip(&omega).map(|((_, w), o)| w[jj].powf(*o)).product())
        .collect();
    let num: f64 = (0..j)
        .map(|jj| locals.iter().zip(&omega).map(|((r, w), o)| (r * w[jj]).powf(*o)).product::<f64>())
        .sum();
    let den: f64 = locals.iter().zip(&omega).map(|((r, _), o)| (1.0 - r).powf(*o)).product::<f64>() + num;
    let s: f64 = prod_w.iter().sum();
    (num / den, prod_w.iter().map(|x| x / s).collect())
}

#[test]
fn fusion_matches_direct_evaluation() {
    let started = Instant::now();
    let mut max_err = 0.0f64;
    for i in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + i);
        let n_s = rng.random_range(2..=3);
        let k = rng.random_range(0.5..2.0);
        let mut prior_comps = Vec::new();
        let mut local_comps: Vec<Vec<BernoulliComponent<f64>>> = vec![Vec::new(); n_s];
        let mut expected = Vec::new();
        for l in 0..2u32 {
            let n_p = rng.random_range(1..=4);
            let states = shared_states(&mut rng, n_p);
            let pw = random_weights(&mut rng, n_p);
            let pr = rng.random_range(0.02..0.98);
            prior_comps.push(
                BernoulliComponent::new(TrackLabel::new(1, l), pr, ParticleCloud::new(pw.clone(), states.clone()).unwrap())
                    .unwrap(),
            );
            let locals: Vec<(f64, Vec<f64>)> =
                (0..n_s).map(|_| (rng.random_range(0.02..0.98), random_weights(&mut rng, n_p))).collect();
            for (s, (r, w)) in locals.iter().enumerate() {
                local_comps[s].push(
                    BernoulliComponent::new(TrackLabel::new(1, l), *r, ParticleCloud::new(w.clone(), states.clone()).unwrap())
                        .unwrap(),
                );
            }
            expected.push(direct_fusion((pr, &pw), &locals, k));
        }
        let prior = LmbDensity::from_components(prior_comps).unwrap();
        let locals: Vec<_> = local_comps.into_iter().map(|c| LmbDensity::from_components(c).unwrap()).collect();
        let fused = fuse(&locals, &prior, k, &FusionMode::Adaptive).unwrap();
        for (c, (r, w)) in fused.components().iter().zip(&expected) {
            max_err = max_err.max((c.existence - r).abs());
            for (a, b) in c.cloud.weights().iter().zip(w) {
                max_err = max_err.max((a - b).abs());
            }
        }
    }
    let elapsed = started.elapsed();
    let pass = max_err <= 1e-10 && elapsed < Duration::from_secs(5);
    report(2, "fusion vs direct evaluation", pass, format!("max error {max_err:.2e}, {elapsed:.2?}"));
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 3 and 4. Algebraic properties on random instances

fn component_strategy(n: usize) -> impl Strategy<Value = (f64, Vec<f64>)> {
    (0.001f64..1.0, prop::collection::vec(0.001f64..1.0, n)).prop_map(|(r, raw)| {
        let s: f64 = raw.iter().sum();
        (r, raw.iter().map(|w| w / s).collect())
    })
}

fn make(label: TrackLabel, r: f64, w: &[f64], states: &[KinematicState<f64>]) -> BernoulliComponent<f64> {
    BernoulliComponent::new(label, r, ParticleCloud::new(w.to_vec(), states.to_vec()).unwrap()).unwrap()
}

fn grid_states(n: usize) -> Vec<KinematicState<f64>> {
    (0..n).map(|i| KinematicState::new(i as f64, 0.0, 2.0 * i as f64, 0.0)).collect()
}

#[test]
fn divergence_properties() {
    let started = Instant::now();
    let label = TrackLabel::new(0, 0);
    let strategy = (1usize..=8).prop_flat_map(|n| {
        (
            component_strategy(n),
            component_strategy(n),
            prop::collection::vec(component_strategy(n), 2..=4),
            0.01f64..100.0,
        )
    });
    let mut runner = TestRunner::new(PtConfig {
        cases: 10_000,
        failure_persistence: None,
        ..PtConfig::default()
    });
    let result = runner.run(&strategy, |((ra, wa), (rb, wb), locals, k)| {
        let states = grid_states(wa.len());
        let a = make(label, ra, &wa, &states);
        let b = make(label, rb, &wb, &states);
        let dab = bernoulli_csd(&a, &b, 1.0).unwrap();
        let dba = bernoulli_csd(&b, &a, 1.0).unwrap();
        prop_assert_eq!(dab, dba);
        prop_assert!(dab >= 0.0);
        prop_assert_eq!(bernoulli_csd(&a, &a, 1.0).unwrap(), 0.0);
        let differs = wa.iter().zip(&wb).any(|(x, y)| ra * x != rb * y);
        prop_assert_eq!(dab > 0.0, differs);

        // the weights depend on divergence ratios only, so the volume unit cancels
        let d1: Vec<f64> = locals
            .iter()
            .map(|(r, w)| bernoulli_csd(&a, &make(label, *r, w, &states), 1.0).unwrap())
            .collect();
        let dk: Vec<f64> = locals
            .iter()
            .map(|(r, w)| bernoulli_csd(&a, &make(label, *r, w, &states), k).unwrap())
            .collect();
        let floor_crossed = d1.iter().chain(&dk).any(|d| *d < 1e-12);
        if !floor_crossed {
            for (x, y) in adaptive_weights(&d1).iter().zip(adaptive_weights(&dk)) {
                prop_assert!((x - y).abs() <= 1e-9, "weights {} vs {}", x, y);
            }
        }
        Ok(())
    });
    let elapsed = started.elapsed();
    let pass = result.is_ok() && elapsed < Duration::from_secs(10);
    report(
        3,
        "divergence properties",
        pass,
        match &result {
            Ok(()) => format!("10000 cases, {elapsed:.2?}"),
            Err(e) => format!("{e}"),
        },
    );
    assert!(pass);
}

#[test]
fn fusion_algebra() {
    let label = TrackLabel::new(0, 0);
    let strategy = (1usize..=8, 2usize..=4).prop_flat_map(|(n, n_s)| {
        (
            component_strategy(n),
            prop::collection::vec(component_strategy(n), n_s),
            prop::collection::vec(0.01f64..1.0, n_s),
            Just(n_s),
        )
    });
    let mut runner = TestRunner::new(PtConfig {
        cases: 10_000,
        failure_persistence: None,
        ..PtConfig::default()
    });
    let tol = 1e-12;
    let result = runner.run(&strategy, |((rp, wp), locals, raw_omega, n_s)| {
        let states = grid_states(wp.len());
        let s: f64 = raw_omega.iter().sum();
        let omega: Vec<f64> = raw_omega.iter().map(|o| o / s).collect();
        let comps: Vec<_> = locals.iter().map(|(r, w)| make(label, *r, w, &states)).collect();

        // idempotence: fusing copies of one posterior returns it
        let copies: Vec<&BernoulliComponent<f64>> = std::iter::repeat_n(&comps[0], n_s).collect();
        let f = gci_fuse_component(&copies, &omega).unwrap();
        prop_assert!((f.existence - comps[0].existence).abs() <= tol);
        for (x, y) in f.cloud.weights().iter().zip(comps[0].cloud.weights()) {
            prop_assert!((x - y).abs() <= tol);
        }

        // permutation invariance, explicit weights and adaptive mode
        let refs: Vec<&BernoulliComponent<f64>> = comps.iter().collect();
        let f1 = gci_fuse_component(&refs, &omega).unwrap();
        let rev: Vec<&BernoulliComponent<f64>> = refs.iter().rev().copied().collect();
        let rev_omega: Vec<f64> = omega.iter().rev().copied().collect();
        let f2 = gci_fuse_component(&rev, &rev_omega).unwrap();
        prop_assert!((f1.existence - f2.existence).abs() <= tol);
        for (x, y) in f1.cloud.weights().iter().zip(f2.cloud.weights()) {
            prop_assert!((x - y).abs() <= tol);
        }
        let prior = LmbDensity::from_components([make(label, rp, &wp, &states)]).unwrap();
        let dens: Vec<LmbDensity<f64>> =
            comps.iter().map(|c| LmbDensity::from_components([c.clone()]).unwrap()).collect();
        let dens_rev: Vec<LmbDensity<f64>> = dens.iter().rev().cloned().collect();
        let a1 = fuse(&dens, &prior, 1.0, &FusionMode::Adaptive).unwrap();
        let a2 = fuse(&dens_rev, &prior, 1.0, &FusionMode::Adaptive).unwrap();
        let (c1, c2) = (&a1.components()[0], &a2.components()[0]);
        prop_assert!((c1.existence - c2.existence).abs() <= tol);
        for (x, y) in c1.cloud.weights().iter().zip(c2.cloud.weights()) {
            prop_assert!((x - y).abs() <= tol);
        }

        // single-sensor identity
        let single = fuse(&dens[..1], &prior, 1.0, &FusionMode::Adaptive).unwrap();
        prop_assert!((single.components()[0].existence - comps[0].existence).abs() <= tol);
        for (x, y) in single.components()[0].cloud.weights().iter().zip(comps[0].cloud.weights()) {
            prop_assert!((x - y).abs() <= tol);
        }

        // normalization of sensor weights and fused particle weights
        let d: Vec<f64> = comps.iter().map(|c| bernoulli_csd(&prior.components()[0], c, 1.0).unwrap()).collect();
        prop_assert!((adaptive_weights(&d).iter().sum::<f64>() - 1.0).abs() <= tol);
        prop_assert!((c1.cloud.weights().iter().sum::<f64>() - 1.0).abs() <= tol);
        prop_assert!((f1.cloud.weights().iter().sum::<f64>() - 1.0).abs() <= tol);
        Ok(())
    });
    report(
        4,
        "fusion algebra",
        result.is_ok(),
        match &result {
            Ok(()) => "10000 cases".to_string(),
            Err(e) => format!("{e}"),
        },
    );
    assert!(result.is_ok());
}

// ---------------------------------------------------------------------------
// 5. Detection profile

#[test]
fn detection_profile_constants() {
    let s: SensorModel<f64> = SensorModel::with_defaults([0.0, 0.0], 0.0, 5.0, 2000.0);
    let on_axis = detection_probability(&s, &KinematicState::new(0.0, 0.0, 100.0, 0.0));
    let behind = detection_probability(&s, &KinematicState::new(0.0, 0.0, -100.0, 0.0));
    let edge_gain = s.angular_gain(s.fov_half_width);
    let pass = (on_axis - 0.99007).abs() <= 1e-5 && (behind - (-4.6f64).exp()).abs() <= 1e-6 && edge_gain == 0.5;
    report(5, "detection profile", pass, format!("p_D(100 m, 0) = {on_axis:.6}, exterior = {behind:.6}, f2(W) = {edge_gain}"));
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 6. Assignment and OSPA

fn brute_force_assignment(c: &CostMatrix<f64>) -> f64 {
    fn go(c: &CostMatrix<f64>, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == c.rows() {
            *best = best.min(acc);
            return;
        }
        for col in 0..c.cols() {
            if !used[col] {
                used[col] = true;
                go(c, row + 1, used, acc + c.get(row, col), best);
                used[col] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(c, 0, &mut vec![false; c.cols()], 0.0, &mut best);
    best
}

fn brute_force_ospa(x: &[[f64; 2]], y: &[[f64; 2]], p: f64, c: f64) -> f64 {
    let (s, l) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    if l.is_empty() {
        return 0.0;
    }
    let cost = CostMatrix::from_fn(s.len(), l.len(), |i, j| {
        ((s[i][0] - l[j][0]).hypot(s[i][1] - l[j][1])).min(c).powf(p)
    });
    let loc = if s.is_empty() { 0.0 } else { brute_force_assignment(&cost) };
    ((loc + c.powf(p) * (l.len() - s.len()) as f64) / l.len() as f64).powf(1.0 / p)
}

#[test]
fn ospa_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut max_err = 0.0f64;
    for _ in 0..1000 {
        let m = rng.random_range(0..=6);
        let n = rng.random_range(m.max(1)..=6);
        let cost = CostMatrix::from_fn(m, n, |_, _| rng.random_range(0.0..100.0));
        if m > 0 {
            let got = solve(&cost).unwrap().cost;
            max_err = max_err.max((got - brute_force_assignment(&cost)).abs());
        }
        let x: Vec<[f64; 2]> = (0..m).map(|_| [rng.random_range(0.0..300.0), rng.random_range(0.0..300.0)]).collect();
        let y: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(0.0..300.0), rng.random_range(0.0..300.0)]).collect();
        let got = ospa(&x, &y, 2.0, 100.0).total;
        max_err = max_err.max((got - brute_force_ospa(&x, &y, 2.0, 100.0)).abs());
    }
    let x = [[1.0, 2.0], [50.0, 60.0], [-3.0, 400.0]];
    let self_dist = ospa(&x, &x, 2.0, 100.0).total;
    let card = ospa(&x[..1], &[], 2.0, 100.0).total;
    let pass = max_err <= 1e-9 && self_dist == 0.0 && card == 100.0;
    report(6, "assignment and OSPA", pass, format!("max error {max_err:.2e}, OSPA(X,X) = {self_dist}, OSPA({{x}},∅) = {card}"));
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 7–9. Scenario checks
//
// Four targets observed by three sensors at the region corners and top edge.
// Target 0 is seen only by sensor 1, target 1 only by sensor 0, target 2 by
// sensors 0 and 1, target 3 by sensors 0 and 2, so each target lies outside
// at least one field of view. All targets live for the whole horizon; the
// steady-state window is k >= 10.

const HORIZON: u32 = 50;
const WINDOW_START: u32 = 10;
const RUNS: usize = 50;

fn scenario(fov_deg: f64, clutter: f64, mode: FusionKind) -> ScenarioConfig {
    let mut c = ScenarioConfig::default_scenario();
    c.seed = 7;
    c.runs = RUNS;
    c.horizon = HORIZON;
    c.filter.particles = 500;
    let sensor = |x: f64, y: f64| SensorConfig {
        position: [x, y],
        boresight_deg: None,
        fov_half_width_deg: fov_deg,
        filter_order: 40,
        threshold: 4.6,
        gain: 4.6e4,
        bearing_variance: 2.0 * PI / 180.0,
        range_variance: 10.0,
        clutter_rate: clutter,
        max_range: None,
    };
    c.sensors = vec![sensor(0.0, 0.0), sensor(1600.0, 0.0), sensor(800.0, 1200.0)];
    let target = |x: f64, vx: f64, y: f64, vy: f64| TargetConfig {
        birth: 0,
        death: HORIZON,
        initial: [x, vx, y, vy],
    };
    c.targets = vec![
        target(150.0, 0.0, 700.0, 3.0),
        target(1450.0, 0.0, 700.0, 3.0),
        target(500.0, 5.0, 1000.0, 0.0),
        target(600.0, -3.0, 100.0, 0.0),
    ];
    c.set_fusion(mode);
    c.validate().unwrap();
    c
}

#[derive(Debug, Clone, Copy)]
struct WindowStats {
    n_true: f64,
    n_est: f64,
    ospa: f64,
    elapsed: Duration,
}

fn window_stats(config: &ScenarioConfig) -> WindowStats {
    let started = Instant::now();
    let result = run_monte_carlo(config).unwrap();
    let elapsed = started.elapsed();
    let w: Vec<_> = result.records.iter().filter(|r| r.k >= WINDOW_START).collect();
    let n = w.len() as f64;
    WindowStats {
        n_true: w.iter().map(|r| r.n_true as f64).sum::<f64>() / n,
        n_est: w.iter().map(|r| r.n_est as f64).sum::<f64>() / n,
        ospa: w.iter().map(|r| r.ospa).sum::<f64>() / n,
        elapsed,
    }
}

fn cached(cell: &'static OnceLock<WindowStats>, fov: f64, clutter: f64, mode: FusionKind) -> WindowStats {
    *cell.get_or_init(|| window_stats(&scenario(fov, clutter, mode)))
}

static ADAPTIVE_30_5: OnceLock<WindowStats> = OnceLock::new();
static FIXED_30_5: OnceLock<WindowStats> = OnceLock::new();

#[test]
fn limited_fov_adaptive_tracks_all_targets() {
    let a = cached(&ADAPTIVE_30_5, 30.0, 5.0, FusionKind::Adaptive);
    let f = cached(&FIXED_30_5, 30.0, 5.0, FusionKind::Fixed);
    let card_ok = (a.n_est - a.n_true).abs() <= 0.5;
    let under_ok = f.n_true - f.n_est >= 1.0;
    let ospa_ok = a.ospa < f.ospa;
    let time_ok = a.elapsed + f.elapsed < Duration::from_secs(600);
    let pass = card_ok && under_ok && ospa_ok && time_ok;
    report(
        7,
        "limited field of view",
        pass,
        format!(
            "(a) adaptive mean |X̂| = {:.2} vs {:.2} [{}]; (b) fixed mean |X̂| = {:.2}, shortfall {:.2} [{}]; \
             (c) OSPA adaptive {:.1} vs fixed {:.1} [{}]; {:.0?}",
            a.n_est,
            a.n_true,
            if card_ok { "ok" } else { "miss" },
            f.n_est,
            f.n_true - f.n_est,
            if under_ok { "ok" } else { "miss" },
            a.ospa,
            f.ospa,
            if ospa_ok { "ok" } else { "miss" },
            a.elapsed + f.elapsed
        ),
    );
    assert!(pass);
}

#[test]
fn wide_fov_modes_agree() {
    let a = window_stats(&scenario(90.0, 5.0, FusionKind::Adaptive));
    let f = window_stats(&scenario(90.0, 5.0, FusionKind::Fixed));
    let rel = (a.ospa - f.ospa).abs() / f.ospa;
    let pass = rel < 0.15 && a.ospa <= 1.05 * f.ospa;
    report(
        8,
        "wide field of view",
        pass,
        format!("OSPA adaptive {:.1} vs fixed {:.1}, relative difference {:.1}%", a.ospa, f.ospa, 100.0 * rel),
    );
    assert!(pass);
}

#[test]
fn clutter_robustness() {
    let low = cached(&ADAPTIVE_30_5, 30.0, 5.0, FusionKind::Adaptive);
    let mid = window_stats(&scenario(30.0, 15.0, FusionKind::Adaptive));
    let high = window_stats(&scenario(30.0, 30.0, FusionKind::Adaptive));
    let growth = high.ospa / low.ospa - 1.0;
    let pass = growth < 0.5;
    report(
        9,
        "clutter robustness",
        pass,
        format!(
            "adaptive OSPA at λ = 5, 15, 30: {:.1}, {:.1}, {:.1}; increase {:.1}%",
            low.ospa,
            mid.ospa,
            high.ospa,
            100.0 * growth
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 10. Reproducibility

#[test]
fn identical_seeds_give_identical_records() {
    let mut c = scenario(30.0, 5.0, FusionKind::Adaptive);
    c.runs = 4;
    c.horizon = 15;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&c, a.path()).unwrap();
    run_experiment(&c, b.path()).unwrap();
    let ra = std::fs::read(a.path().join(RECORDS_FILE)).unwrap();
    let rb = std::fs::read(b.path().join(RECORDS_FILE)).unwrap();
    let pass = ra == rb && !ra.is_empty();
    report(10, "reproducibility", pass, format!("{} bytes, identical = {}", ra.len(), ra == rb));
    assert!(pass);
}
