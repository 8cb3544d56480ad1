use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfio_core::applications::{wave_branch_phase, wave_expected, wave_mc, wave_solve, WaveScenario};
use sfio_core::jets::{Monomial, Point, Polynomial, Signature};
use sfio_core::oscillatory::QuadratureConfig;
use sfio_core::stochastic::*;
use sfio_core::symbol_spaces::{axis, Amplitude, TestFunction};
use sfio_core::{Complex64, Error};
use std::sync::Arc;

fn model() -> RandomFieldModel {
    RandomFieldModel::new(1.0, 0.3, vec![Mode { k: 1.0, sigma: 0.3 }, Mode { k: 2.5, sigma: 0.2 }, Mode { k: 4.0, sigma: 0.1 }]).unwrap()
}

fn cheap() -> QuadratureConfig {
    QuadratureConfig { xi_max: 24.0, estimate_error: false, ..Default::default() }
}

fn scenario(s: f64) -> WaveScenario {
    let u0 = TestFunction::gaussian(0.0, 1.0, 1.0).unwrap();
    WaveScenario::new(1.0, u0).unwrap().with_perturbation(GlobalGaussianSpeed::new(1.0, s, 0.2).unwrap()).unwrap()
}

/// `E[½u₀(x + ct) + ½u₀(x − ct)]` for `u₀ = e^{−x²}` and untruncated `c ~ N(c₀, s²)`.
fn smoothed_dalembert(c0: f64, s: f64, t: f64, x: f64) -> f64 {
    let w = 1.0 + 2.0 * s * s * t * t;
    let g = |m: f64| (-(x - m) * (x - m) / w).exp() / w.sqrt();
    0.5 * (g(-c0 * t) + g(c0 * t))
}

#[test]
fn no_modes_means_constant_speed() {
    let m = RandomFieldModel::new(1.5, 0.5, vec![]).unwrap();
    let c = sample_field(&m, 7);
    for x in axis(-10.0, 10.0, 41) {
        assert_eq!(c.value(&Point::new(&[x], &[], &[]).unwrap()).unwrap(), 1.5);
    }
}

#[test]
fn model_rejects_an_overdrawn_budget() {
    assert!(RandomFieldModel::new(1.0, 0.5, vec![Mode { k: 1.0, sigma: 0.6 }]).is_err());
    assert!(RandomFieldModel::new(1.0, 1.5, vec![]).is_err());
    assert!(GlobalGaussianSpeed::new(1.0, -0.1, 0.5).is_err());
}

#[test]
fn samples_are_deterministic_in_the_seed() {
    let xs = axis(-5.0, 5.0, 101);
    let eval = |seed| -> Vec<f64> {
        let c = sample_field(&model(), seed);
        xs.iter().map(|&x| c.value(&Point::new(&[x], &[], &[]).unwrap()).unwrap()).collect()
    };
    assert_eq!(eval(3), eval(3));
    assert_ne!(eval(3), eval(4));
}

#[test]
fn pointwise_variance_matches_a_monte_carlo_estimate() {
    let m = model();
    let xs = [0.0, 0.7];
    let stats = mc_estimate(
        |seed| {
            let c = sample_field(&m, seed);
            xs.iter().map(|&x| Ok(Complex64::new(c.value(&Point::new(&[x], &[], &[])?)?, 0.0))).collect()
        },
        4000,
        &xs,
        11,
        &[],
    )
    .unwrap();
    let var = m.pointwise_variance();
    for i in 0..xs.len() {
        assert!((stats.mean[i].re - m.c0).abs() < 3.0 * stats.se[i], "{:?}", stats.mean[i]);
        // the variance estimator has its own spread; 10% is several of its standard errors here
        assert!((stats.variance[i] - var).abs() < 0.1 * var, "{} vs {var}", stats.variance[i]);
    }
}

#[test]
fn squared_mode_mean_matches_the_normal_integral() {
    // E[σ s(ζ) cos θ]² per mode, here as the mean of (s(ζ) cos θ)² where θ is uniform
    let closed = normal_expectation(|z| squash(z).powi(2)) / 2.0;
    let stats = mc_estimate(
        |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            let th = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            Ok(vec![Complex64::new((squash(z) * th.cos()).powi(2), 0.0)])
        },
        3000,
        &[0.0],
        5,
        &[],
    )
    .unwrap();
    assert!((stats.mean[0].re - closed).abs() < 3.0 * stats.se[0], "{} vs {closed} (se {})", stats.mean[0].re, stats.se[0]);
}

#[test]
fn deterministic_scenarios_have_no_variance() {
    let m = RandomFieldModel::new(1.0, 0.5, vec![]).unwrap();
    let xs = [0.0, 1.0, 2.0];
    let stats = mc_estimate(
        |seed| {
            let c = sample_field(&m, seed);
            xs.iter().map(|&x| Ok(Complex64::new(c.value(&Point::new(&[x], &[], &[])?)?, 0.0))).collect()
        },
        64,
        &xs,
        1,
        &[(0, 2)],
    )
    .unwrap();
    assert!(stats.variance.iter().all(|v| *v < 1e-14));
    assert!(stats.autocovariance[0].norm() < 1e-14);
    let w = scenario(0.0);
    let stats = wave_mc(&w, 1.0, &xs, 50, 2, &[]).unwrap();
    assert!(stats.variance.iter().all(|v| *v < 1e-14));
}

#[test]
fn standard_error_follows_the_square_root_law() {
    let w = scenario(0.3);
    let xs = [0.5];
    let a = wave_mc(&w, 1.0, &xs, 2000, 9, &[]).unwrap();
    let b = wave_mc(&w, 1.0, &xs, 8000, 9, &[]).unwrap();
    let ratio = b.se[0] / a.se[0];
    assert!((ratio - 0.5).abs() < 0.1, "{ratio}");
}

fn noisy(seed: u64, len: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|i| Complex64::new(1e3 + i as f64 + rng.random::<f64>(), rng.random::<f64>() - 0.5)).collect()
}

#[test]
fn streaming_and_two_pass_statistics_agree() {
    let xs = [0.0, 1.0, 2.0, 3.0];
    let pairs = [(0, 1), (2, 2), (3, 0)];
    let n = 301;
    let stats = mc_estimate(|s| Ok(noisy(s, 4)), n, &xs, 42, &pairs).unwrap();
    let samples: Vec<_> = (0..n as u64).map(|i| noisy(derive_seed(42, i), 4)).collect();
    let (mean, var, cov) = two_pass_stats(&samples, &pairs);
    for i in 0..4 {
        assert!((stats.mean[i] - mean[i]).norm() <= 1e-10 * mean[i].norm());
        assert!((stats.variance[i] - var[i]).abs() <= 1e-10 * var[i]);
    }
    for k in 0..pairs.len() {
        assert!((stats.autocovariance[k] - cov[k]).norm() <= 1e-10 * cov[k].norm());
    }
    assert_eq!(stats.autocovariance[1].re, stats.variance[2]);
}

#[test]
fn results_do_not_depend_on_the_worker_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_estimate(|s| Ok(noisy(s, 3)), 500, &[0.0, 1.0, 2.0], 3, &[(0, 1)]).unwrap())
    };
    assert_eq!(run(1).to_json(), run(3).to_json());
}

#[test]
fn failures_are_reported_and_skipped() {
    let stats = mc_estimate(
        |s| if s % 5 == 0 { Err(Error::NonFinite("synthetic".into())) } else { Ok(noisy(s, 2)) },
        200,
        &[0.0, 1.0],
        8,
        &[],
    )
    .unwrap();
    assert_eq!(stats.n + stats.failures.len(), 200);
    assert!(!stats.failures.is_empty());
    for f in &stats.failures {
        assert_eq!(f.seed, derive_seed(8, f.index));
    }
    assert!(mc_estimate(|s| Ok(noisy(s, 2)), 1, &[0.0, 1.0], 8, &[]).is_err());
    assert!(mc_estimate(|s| Ok(noisy(s, 2)), 10, &[0.0, 1.0], 8, &[(0, 2)]).is_err());
}

#[test]
fn statistics_serialize() {
    let stats = mc_estimate(|s| Ok(noisy(s, 2)), 10, &[0.0, 0.5], 1, &[]).unwrap();
    assert!(stats.to_csv().starts_with("x,mean_re,mean_im,var,se\n0,"));
    let back: MCStats = serde_json::from_str(&stats.to_json()).unwrap();
    assert_eq!(back, stats);
}

#[test]
fn zero_variance_reproduces_the_deterministic_operator() {
    let xs = [-0.5, 0.8];
    let w = scenario(0.0);
    let a = wave_expected(&w, 0.6, &xs, &cheap()).unwrap();
    let b = wave_solve(&w, 0.6, &xs, &cheap()).unwrap();
    for (u, v) in a.values.iter().zip(&b.values) {
        assert!((u - v).norm() < 1e-12, "{u} vs {v}");
    }
}

#[test]
fn damping_never_increases_the_field() {
    let xs = [-1.0, 0.0, 1.0];
    let det = wave_solve(&scenario(0.3), 1.0, &xs, &cheap()).unwrap();
    let exp = wave_expected(&scenario(0.3), 1.0, &xs, &cheap()).unwrap();
    let sup = |v: &[Complex64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(sup(&exp.values) <= sup(&det.values));
    for (x, v) in xs.iter().zip(&exp.values) {
        assert!((v.re - smoothed_dalembert(1.0, 0.3, 1.0, *x)).abs() < 1e-6, "x = {x}: {v}");
        assert!(v.im.abs() < 1e-6);
    }
}

#[test]
fn zero_time_gives_the_mean_amplitude_times_psi() {
    let psi = TestFunction::gaussian(0.2, 0.8, 1.0).unwrap();
    let phi = wave_branch_phase(1.0, 1.0, 0.0).unwrap();
    let pert = GaussianPhasePerturbation::global_speed(phi.clone(), 0.5, 0.0).unwrap();
    let amp = Amplitude::constant(phi.signature(), 0.5);
    let xs = [-0.3, 0.4];
    let f = expected_operator_field(&pert, &amp, &psi, &xs, &QuadratureConfig::default()).unwrap();
    for (x, v) in xs.iter().zip(&f.values) {
        assert!((v - 0.5 * psi.value(&[*x]).unwrap()).norm() < 1e-6);
    }
}

#[test]
fn negative_phase_variance_is_rejected() {
    let phi = wave_branch_phase(1.0, 1.0, 0.5).unwrap();
    let sig = Signature::new(1, 1, 1);
    let neg = Polynomial::new(sig, &[Monomial { coef: -1.0, x: vec![], y: vec![], xi: vec![2] }]).unwrap();
    let pert = GaussianPhasePerturbation { mean_phase: phi, variance: Arc::new(neg) };
    let psi = TestFunction::gaussian(0.0, 1.0, 1.0).unwrap();
    let r = expected_operator_field(&pert, &Amplitude::constant(sig, 0.5), &psi, &[0.0], &cheap());
    assert!(r.is_err());
}

#[test]
fn monte_carlo_matches_the_expected_field() {
    let w = scenario(0.3);
    let xs = [-1.5, -0.5, 0.0, 0.5, 1.5];
    let exp = wave_expected(&w, 1.0, &xs, &cheap()).unwrap();
    let mc = wave_mc(&w, 1.0, &xs, 2000, 77, &[(0, 4), (1, 3)]).unwrap();
    for i in 0..xs.len() {
        assert!((mc.mean[i] - exp.values[i]).norm() < 3.0 * mc.se[i], "x = {}: {} vs {}", xs[i], mc.mean[i], exp.values[i]);
    }
    // the scenario is even in x, so paired points share their statistics
    assert!((mc.autocovariance[0].re - mc.variance[0]).abs() < 1e-12);
}

#[test]
fn monte_carlo_error_shrinks_with_more_replicates() {
    let w = scenario(0.3);
    let xs = axis(-3.0, 3.0, 13);
    let exact: Vec<f64> = xs.iter().map(|&x| smoothed_dalembert(1.0, 0.3, 1.0, x)).collect();
    let err = |n, seed| {
        let m = wave_mc(&w, 1.0, &xs, n, seed, &[]).unwrap();
        m.mean.iter().zip(&exact).map(|(a, b)| (a.re - b).abs()).fold(0.0, f64::max)
    };
    let wins = (0..20u64).filter(|&s| err(4000, 1000 + s) < err(250, 1000 + s)).count();
    assert!(wins >= 19, "{wins} of 20");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sample_paths_respect_the_lower_bound(seed in any::<u64>()) {
        let m = model();
        let c = sample_field(&m, seed);
        let lo = min_on_grid(c.as_ref(), &axis(-20.0, 20.0, 4001)).unwrap();
        prop_assert!(lo >= m.alpha, "{lo}");
    }

    #[test]
    fn block_merges_are_order_independent(seed in any::<u64>(), split in 1usize..60) {
        let samples: Vec<_> = (0..61u64).map(|i| noisy(seed ^ i, 3)).collect();
        let mut whole = Moments::new(3, &[(0, 2)]);
        samples.iter().for_each(|s| whole.push(s));
        let (mut a, mut b) = (Moments::new(3, &[(0, 2)]), Moments::new(3, &[(0, 2)]));
        samples[..split].iter().for_each(|s| a.push(s));
        samples[split..].iter().rev().for_each(|s| b.push(s));
        let mut ba = b.clone();
        ba.merge(&a);
        a.merge(&b);
        for m in [&a, &ba] {
            for i in 0..3 {
                prop_assert!((m.mean[i] - whole.mean[i]).norm() <= 1e-10 * whole.mean[i].norm());
                prop_assert!((m.m2[i] - whole.m2[i]).abs() <= 1e-10 * whole.m2[i]);
            }
            prop_assert!((m.co[0] - whole.co[0]).norm() <= 1e-10 * whole.co[0].norm());
        }
    }

    #[test]
    fn variance_is_nonnegative_and_autocovariance_hermitian(seed in any::<u64>()) {
        let s = mc_estimate(|q| Ok(noisy(q, 2)), 40, &[0.0, 1.0], seed, &[(0, 1), (1, 0)]).unwrap();
        prop_assert!(s.variance.iter().all(|v| *v >= 0.0));
        prop_assert!((s.autocovariance[0] - s.autocovariance[1].conj()).norm() < 1e-12);
        for i in 0..2 {
            prop_assert!((s.se[i] - (s.variance[i] / s.n as f64).sqrt()).abs() < 1e-15);
        }
    }
}
