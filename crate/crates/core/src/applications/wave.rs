//! Wave equation with constant mean speed as a sum of two half-wave branches.

use crate::error::{invalid, Result};
use crate::jets::{ConstantMap, ScaledNormPhase, Signature};
use crate::oscillatory::{Field, FioOperator, QuadratureConfig};
use crate::stochastic::{expected_operator_field, mc_estimate, GaussianPhasePerturbation, GlobalGaussianSpeed, MCStats};
use crate::symbol_spaces::{Amplitude, PhaseFunction, TestFunction};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// `u_tt = c₀² u_xx` with `u(·,0) = u₀`, `u_t(·,0) = 0`, optionally with a random global speed.
#[derive(Clone, Debug)]
pub struct WaveScenario {
    pub c0: f64,
    pub u0: TestFunction,
    /// Amplitudes of the `+` and `−` branches.
    pub weights: [f64; 2],
    pub perturbation: Option<GlobalGaussianSpeed>,
}

impl WaveScenario {
    pub fn new(c0: f64, u0: TestFunction) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(invalid("wave speed must be positive"));
        }
        Ok(WaveScenario { c0, u0, weights: [0.5, 0.5], perturbation: None })
    }

    pub fn with_perturbation(mut self, p: GlobalGaussianSpeed) -> Result<Self> {
        if p.c0 != self.c0 {
            return Err(invalid("perturbation mean must equal the scenario speed"));
        }
        self.perturbation = Some(p);
        Ok(self)
    }
}

/// `Φ± = (x − y)ξ ± c t|ξ|`.
pub fn wave_branch_phase(c: f64, sign: f64, t: f64) -> Result<PhaseFunction> {
    let speed = Arc::new(ConstantMap::new(Signature::new(1, 0, 0), c));
    Ok(PhaseFunction::new(Arc::new(ScaledNormPhase::new(1, sign, speed, Some(t))?)))
}

const SIGNS: [f64; 2] = [1.0, -1.0];

fn sum_fields(a: Field, b: Field) -> Field {
    Field {
        values: a.values.iter().zip(&b.values).map(|(u, v)| u + v).collect(),
        estimates: a.estimates.iter().zip(&b.estimates).map(|(u, v)| u + v).collect(),
        nodes: a.nodes.iter().zip(&b.nodes).map(|(u, v)| *u.max(v)).collect(),
        converged: a.converged && b.converged,
        x: a.x,
    }
}

/// Deterministic branch sum at speed `c₀`.
pub fn wave_solve(scenario: &WaveScenario, t: f64, xs: &[f64], config: &QuadratureConfig) -> Result<Field> {
    let mut out: Option<Field> = None;
    for (sign, w) in SIGNS.iter().zip(scenario.weights) {
        let phi = wave_branch_phase(scenario.c0, *sign, t)?;
        let amp = Amplitude::constant(phi.signature(), w);
        let f = FioOperator::new(phi, amp, config.clone())?.apply(&scenario.u0, xs)?;
        out = Some(match out {
            None => f,
            Some(acc) => sum_fields(acc, f),
        });
    }
    Ok(out.expect("two branches"))
}

/// `E[u(·, t)]` from the characteristic function of the Gaussian speed.
///
/// The truncation of the speed law is ignored here; its mass is reported by
/// [`GlobalGaussianSpeed::truncation_mass`].
pub fn wave_expected(scenario: &WaveScenario, t: f64, xs: &[f64], config: &QuadratureConfig) -> Result<Field> {
    let s = scenario.perturbation.map_or(0.0, |p| p.s);
    let mut out: Option<Field> = None;
    for (sign, w) in SIGNS.iter().zip(scenario.weights) {
        let phi = wave_branch_phase(scenario.c0, *sign, t)?;
        let amp = Amplitude::constant(phi.signature(), w);
        let pert = GaussianPhasePerturbation::global_speed(phi, s, t)?;
        let f = expected_operator_field(&pert, &amp, &scenario.u0, xs, config)?;
        out = Some(match out {
            None => f,
            Some(acc) => sum_fields(acc, f),
        });
    }
    Ok(out.expect("two branches"))
}

/// `w₊u₀(x + ct) + w₋u₀(x − ct)`.
pub fn dalembert(u0: &TestFunction, weights: [f64; 2], c: f64, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter().map(|&x| Ok(weights[0] * u0.value(&[x + c * t])? + weights[1] * u0.value(&[x - c * t])?)).collect()
}

/// One replicate: draw the speed from `seed`, then the exact branch sum at that speed.
pub fn wave_sample_exact(scenario: &WaveScenario, t: f64, xs: &[f64], seed: u64) -> Result<Vec<Complex64>> {
    let c = match &scenario.perturbation {
        Some(p) => p.sample(&mut ChaCha8Rng::seed_from_u64(seed)),
        None => scenario.c0,
    };
    Ok(dalembert(&scenario.u0, scenario.weights, c, t, xs)?.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
}

pub fn wave_mc(scenario: &WaveScenario, t: f64, xs: &[f64], n: usize, base_seed: u64, pairs: &[(usize, usize)]) -> Result<MCStats> {
    mc_estimate(|seed| wave_sample_exact(scenario, t, xs, seed), n, xs, base_seed, pairs)
}
