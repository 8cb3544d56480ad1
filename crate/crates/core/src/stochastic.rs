//! Random speed fields, Monte Carlo statistics of random operator outputs and
//! expected fields of Gaussian phase perturbations.

use crate::error::{invalid, Error, Result};
use crate::jets::{ExpMap, Monomial, Point, Polynomial, ProductMap, Signature, SmoothMap, TrigPolynomial, TrigTerm, Block};
use crate::oscillatory::{composite, FioOperator, Field, QuadratureConfig};
use crate::symbol_spaces::{axis, Amplitude, PhaseFunction, TestFunction};
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Bounded smooth squashing of a standard normal draw into `(−1, 1)`.
pub fn squash(z: f64) -> f64 {
    z.tanh()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: f64,
    pub sigma: f64,
}

/// `c(x, ω) = c₀ + Σ σⱼ s(ζⱼ) cos(kⱼ x + θⱼ)` with `Σ σⱼ ≤ c₀ − α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomFieldModel {
    pub c0: f64,
    pub alpha: f64,
    #[serde(default)]
    pub modes: Vec<Mode>,
}

impl RandomFieldModel {
    pub fn new(c0: f64, alpha: f64, modes: Vec<Mode>) -> Result<Self> {
        let m = RandomFieldModel { c0, alpha, modes };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < self.c0) {
            return Err(invalid("random field needs 0 < α < c₀"));
        }
        if self.modes.iter().any(|m| !(m.sigma >= 0.0) || !m.k.is_finite()) {
            return Err(invalid("mode amplitudes must be nonnegative and wavenumbers finite"));
        }
        let budget = self.budget();
        if budget > self.c0 - self.alpha {
            return Err(invalid(format!("amplitude budget {budget} exceeds c₀ − α = {}", self.c0 - self.alpha)));
        }
        Ok(())
    }

    /// `Σ σⱼ`, the largest possible deviation from `c₀`.
    pub fn budget(&self) -> f64 {
        self.modes.iter().map(|m| m.sigma).sum()
    }

    /// The sampled path as a trigonometric polynomial in `x`.
    pub fn sample(&self, seed: u64) -> TrigPolynomial {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = self
            .modes
            .iter()
            .map(|m| {
                let z: f64 = rng.sample(StandardNormal);
                let theta = 2.0 * PI * rng.random::<f64>();
                let amp = m.sigma * squash(z);
                TrigTerm { k: m.k, cos: amp * theta.cos(), sin: -amp * theta.sin() }
            })
            .collect();
        TrigPolynomial::new(Signature::new(1, 0, 0), Block::X, 0, self.c0, terms).expect("coordinate 0 exists")
    }

    /// Variance of `c(x)` at any `x`: `Σ σⱼ² E[s(ζ)²] / 2`.
    pub fn pointwise_variance(&self) -> f64 {
        let s2 = normal_expectation(|z| squash(z).powi(2));
        self.modes.iter().map(|m| m.sigma * m.sigma * s2 / 2.0).sum()
    }
}

/// A sample path `c_ω` of the model, deterministic in `seed`.
pub fn sample_field(model: &RandomFieldModel, seed: u64) -> Arc<dyn SmoothMap> {
    Arc::new(model.sample(seed))
}

/// Smallest value of a map of one x-variable over the given points.
pub fn min_on_grid(c: &dyn SmoothMap, xs: &[f64]) -> Result<f64> {
    xs.iter().try_fold(f64::INFINITY, |m, &x| Ok(m.min(c.value(&Point::new(&[x], &[], &[])?)?)))
}

/// `∫ f(z) φ(z) dz` against the standard normal density, over `|z| ≤ 12`.
pub fn normal_expectation(f: impl Fn(f64) -> f64) -> f64 {
    normal_integral(&f, -12.0, 12.0)
}

fn normal_integral(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let n = ((hi - lo) / 0.5).ceil().max(1.0) as usize;
    let panels: Vec<_> = (0..n).map(|i| (lo + (hi - lo) * i as f64 / n as f64, lo + (hi - lo) * (i + 1) as f64 / n as f64)).collect();
    let (z, w) = composite(&panels, 12);
    let norm = 1.0 / (2.0 * PI).sqrt();
    z.iter().zip(&w).map(|(z, w)| w * norm * (-0.5 * z * z).exp() * f(*z)).sum()
}

/// A single global Gaussian speed `c = c₀ + s ζ`, truncated to `c ≥ α`.
///
/// The truncation is symmetric, `|ζ| ≤ (c₀ − α)/s`, so the mean stays `c₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalGaussianSpeed {
    pub c0: f64,
    pub s: f64,
    pub alpha: f64,
}

impl GlobalGaussianSpeed {
    pub fn new(c0: f64, s: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < c0) || !(s >= 0.0) {
            return Err(invalid("global Gaussian speed needs 0 < α < c₀ and s ≥ 0"));
        }
        Ok(GlobalGaussianSpeed { c0, s, alpha })
    }

    /// Truncation point in standard deviations.
    pub fn z_max(&self) -> f64 {
        if self.s == 0.0 {
            f64::INFINITY
        } else {
            (self.c0 - self.alpha) / self.s
        }
    }

    /// Probability mass removed by the truncation; bounds the bias of any bounded statistic by twice this.
    pub fn truncation_mass(&self) -> f64 {
        let z = self.z_max();
        if !z.is_finite() || z > 38.0 {
            return 0.0;
        }
        2.0 * normal_integral(&|_| 1.0, z, z + 40.0)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let z_max = self.z_max();
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if z.abs() <= z_max {
                return self.c0 + self.s * z;
            }
        }
    }
}

/// Counter-based seed of replicate `index` under `base_seed`.
pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    rng.next_u64()
}

/// Streaming first and second moments with Chan-style merging.
#[derive(Clone, Debug)]
pub struct Moments {
    pub n: usize,
    pub mean: Vec<Complex64>,
    /// Sum of `|z − mean|²`.
    pub m2: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    /// Sum of `(zᵢ − meanᵢ)·conj(zⱼ − meanⱼ)` per pair.
    pub co: Vec<Complex64>,
}

impl Moments {
    pub fn new(len: usize, pairs: &[(usize, usize)]) -> Self {
        Moments {
            n: 0,
            mean: vec![Complex64::new(0.0, 0.0); len],
            m2: vec![0.0; len],
            pairs: pairs.to_vec(),
            co: vec![Complex64::new(0.0, 0.0); pairs.len()],
        }
    }

    pub fn push(&mut self, z: &[Complex64]) {
        self.n += 1;
        let inv = 1.0 / self.n as f64;
        let before: Vec<Complex64> = self.pairs.iter().map(|&(i, _)| z[i] - self.mean[i]).collect();
        for (i, v) in z.iter().enumerate() {
            let d = v - self.mean[i];
            self.mean[i] += d * inv;
            self.m2[i] += (d.conj() * (v - self.mean[i])).re;
        }
        for (c, (&(_, j), d)) in self.co.iter_mut().zip(self.pairs.iter().zip(before)) {
            *c += d * (z[j] - self.mean[j]).conj();
        }
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = o.clone();
            return;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        let delta: Vec<Complex64> = o.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        for i in 0..self.mean.len() {
            self.m2[i] += o.m2[i] + delta[i].norm_sqr() * na * nb / n;
            self.mean[i] += delta[i] * (nb / n);
        }
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            self.co[k] += o.co[k] + delta[i] * delta[j].conj() * (na * nb / n);
        }
        self.n += o.n;
    }

    pub fn finish(&self, x: &[f64], n_requested: usize, base_seed: u64, failures: Vec<Failure>) -> MCStats {
        let n = self.n as f64;
        let variance: Vec<f64> = self.m2.iter().map(|m| if self.n > 1 { (m / (n - 1.0)).max(0.0) } else { 0.0 }).collect();
        let se = variance.iter().map(|v| (v / n).sqrt()).collect();
        let autocovariance = self.co.iter().map(|c| if self.n > 1 { c / (n - 1.0) } else { Complex64::new(0.0, 0.0) }).collect();
        MCStats {
            n: self.n,
            n_requested,
            base_seed,
            x: x.to_vec(),
            mean: self.mean.clone(),
            variance,
            se,
            pairs: self.pairs.clone(),
            autocovariance,
            failures,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub index: u64,
    pub seed: u64,
    pub message: String,
}

/// Monte Carlo mean, variance and autocovariance of a random field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCStats {
    /// Replicates that succeeded.
    pub n: usize,
    pub n_requested: usize,
    pub base_seed: u64,
    pub x: Vec<f64>,
    pub mean: Vec<Complex64>,
    /// `E|z − E z|²`, unbiased.
    pub variance: Vec<f64>,
    pub se: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    /// `E[(zᵢ − E zᵢ) conj(zⱼ − E zⱼ)]` per pair.
    pub autocovariance: Vec<Complex64>,
    pub failures: Vec<Failure>,
}

impl MCStats {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,mean_re,mean_im,var,se\n");
        for i in 0..self.x.len() {
            s.push_str(&format!("{},{},{},{},{}\n", self.x[i], self.mean[i].re, self.mean[i].im, self.variance[i], self.se[i]));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("statistics serialize")
    }
}

/// Replicates per block; blocks are merged in index order so results do not
/// depend on the number of workers.
const BLOCK: usize = 32;

/// Run `n` replicates of `builder(seed)` with seeds derived from `base_seed`.
pub fn mc_estimate<F>(builder: F, n: usize, xs: &[f64], base_seed: u64, pairs: &[(usize, usize)]) -> Result<MCStats>
where
    F: Fn(u64) -> Result<Vec<Complex64>> + Sync,
{
    if n < 2 {
        return Err(invalid("Monte Carlo needs at least two replicates"));
    }
    if pairs.iter().any(|&(i, j)| i >= xs.len() || j >= xs.len()) {
        return Err(invalid("autocovariance pair outside the grid"));
    }
    let blocks: Vec<(Moments, Vec<Failure>)> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut m = Moments::new(xs.len(), pairs);
            let mut failures = Vec::new();
            for i in (b * BLOCK)..((b + 1) * BLOCK).min(n) {
                let seed = derive_seed(base_seed, i as u64);
                match builder(seed).and_then(|z| {
                    if z.len() == xs.len() {
                        Ok(z)
                    } else {
                        Err(Error::Inconsistent(format!("replicate returned {} values for {} points", z.len(), xs.len())))
                    }
                }) {
                    Ok(z) => m.push(&z),
                    Err(e) => failures.push(Failure { index: i as u64, seed, message: e.to_string() }),
                }
            }
            (m, failures)
        })
        .collect();
    let mut total = Moments::new(xs.len(), pairs);
    let mut failures = Vec::new();
    for (m, f) in blocks {
        total.merge(&m);
        failures.extend(f);
    }
    Ok(total.finish(xs, n, base_seed, failures))
}

/// Reference statistics from stored samples: mean first, then deviations.
pub fn two_pass_stats(samples: &[Vec<Complex64>], pairs: &[(usize, usize)]) -> (Vec<Complex64>, Vec<f64>, Vec<Complex64>) {
    let n = samples.len() as f64;
    let len = samples.first().map_or(0, |s| s.len());
    let mean: Vec<Complex64> = (0..len).map(|i| samples.iter().map(|s| s[i]).sum::<Complex64>() / n).collect();
    let var = (0..len).map(|i| samples.iter().map(|s| (s[i] - mean[i]).norm_sqr()).sum::<f64>() / (n - 1.0)).collect();
    let cov = pairs
        .iter()
        .map(|&(i, j)| samples.iter().map(|s| (s[i] - mean[i]) * (s[j] - mean[j]).conj()).sum::<Complex64>() / (n - 1.0))
        .collect();
    (mean, var, cov)
}

/// A phase whose value at each point is Gaussian with mean `μ` and variance `σ²`.
#[derive(Clone, Debug)]
pub struct GaussianPhasePerturbation {
    pub mean_phase: PhaseFunction,
    pub variance: Arc<dyn SmoothMap>,
}

impl GaussianPhasePerturbation {
    /// Variance `s²t²‖ξ‖²` of `c t‖ξ‖` for `c ~ N(c₀, s²)` in one dimension.
    pub fn global_speed(mean_phase: PhaseFunction, s: f64, t: f64) -> Result<Self> {
        let sig = mean_phase.signature();
        if sig != Signature::new(1, 1, 1) {
            return Err(Error::Unsupported("global speed perturbation is one-dimensional".into()));
        }
        let var = Polynomial::new(sig, &[Monomial { coef: s * s * t * t, x: vec![0], y: vec![0], xi: vec![2] }])?;
        Ok(GaussianPhasePerturbation { mean_phase, variance: Arc::new(var) })
    }
}

/// `E[A_ω[ψ]](x)`: the operator with phase `μ` and amplitude `E[a]·exp(−σ²/2)`.
pub fn expected_operator_field(
    pert: &GaussianPhasePerturbation,
    a_mean: &Amplitude,
    psi: &TestFunction,
    xs: &[f64],
    config: &QuadratureConfig,
) -> Result<Field> {
    let sig = pert.mean_phase.signature();
    if pert.variance.signature() != sig || a_mean.signature() != sig {
        return Err(invalid("perturbation maps and amplitude must share the phase signature"));
    }
    check_variance(pert.variance.as_ref(), psi, xs)?;
    let half = Polynomial::new(sig, &[Monomial { coef: -0.5, x: vec![0], y: vec![0], xi: vec![0] }])?;
    let damping: Arc<dyn SmoothMap> = Arc::new(ExpMap::new(Arc::new(ProductMap::new(vec![Arc::new(half), pert.variance.clone()])?)));
    let times = |m: &Arc<dyn SmoothMap>| -> Result<Arc<dyn SmoothMap>> { Ok(Arc::new(ProductMap::new(vec![m.clone(), damping.clone()])?)) };
    let amp = Amplitude::complex(times(&a_mean.re)?, a_mean.im.as_ref().map(times).transpose()?, a_mean.d, a_mean.rho, a_mean.delta)?;
    FioOperator::new(pert.mean_phase.clone(), amp, config.clone())?.apply(psi, xs)
}

/// `σ² ≥ 0` on the output points, across the support of `ψ` and several frequency scales.
fn check_variance(var: &dyn SmoothMap, psi: &TestFunction, xs: &[f64]) -> Result<()> {
    let ys = match &psi.support {
        Some(s) => axis(s[0].0, s[0].1, 9),
        None => vec![0.0],
    };
    for &x in xs {
        for &y in &ys {
            for xi in [-16.0, -4.0, -1.0, -0.5, 0.5, 1.0, 4.0, 16.0] {
                let v = var.value(&Point::scalar(x, y, xi))?;
                if v < 0.0 {
                    return Err(invalid(format!("phase variance {v} is negative at (x, y, ξ) = ({x}, {y}, {xi})")));
                }
            }
        }
    }
    Ok(())
}
