//! Quadrature of regularized oscillatory integrals and FIO application.
//!
//! `A[ψ](x) = ∫∫ e^{iΦ(x,y,ξ)} L^κ(a ψ)(x,y,ξ) dy đξ` with `đξ = (2π)^{−1}dξ`,
//! truncated at `|ξ| ≤ R` and evaluated on composite Gauss–Legendre panels:
//! `[0,1]`, four panels on `[1,2]` where the cutoff varies, then unit panels.
//! The inner panels follow the effective support of the test function and are
//! refined with the local oscillation rate `|∂Φ|` of the phase.
//! [`oscillatory_integral`] uses plain `dξ`, without the `(2π)^{−1}`.
//!
//! Quadrature covers one dimension in `ξ` and in the integration variable;
//! the other spatial block may have any dimension.

use crate::error::{invalid, Error, Result};
use crate::jets::{localized, Block, ComplexSeries, Point, Signature, SmoothMap, VarSet};
use crate::jets::RealSeries;
use crate::regularizer::{check_inputs, times_phase, CutoffChi, KappaPlan, LKernel};
use crate::symbol_spaces::{
    check_alpha_membership, seminorm_pi_sampled, Amplitude, DerivativeField, GridSpec, OpenSet, PhaseFunction,
    SeminormReport, TestFunction,
};
use crate::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Cached `n`-point Gauss–Legendre rule.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("rule cache poisoned");
    guard.entry(n).or_insert_with(|| Arc::new(compute_rule(n))).clone()
}

fn compute_rule(n: usize) -> GaussLegendre {
    assert!(n >= 1, "a quadrature rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(z) and its derivative
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussLegendre { nodes, weights }
}

/// Composite rule: nodes and weights for each panel `[a, b]` in order.
pub fn composite(panels: &[(f64, f64)], n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_legendre(n);
    let mut xs = Vec::with_capacity(panels.len() * n);
    let mut ws = Vec::with_capacity(panels.len() * n);
    for &(a, b) in panels {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(c + h * t);
            ws.push(h * w);
        }
    }
    (xs, ws)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// ξ truncation radius `R`.
    pub xi_max: f64,
    /// Gauss–Legendre nodes per ξ panel.
    pub xi_nodes: usize,
    /// Panels across the cutoff transition `1 ≤ |ξ| ≤ 2`, where the integrand varies fastest.
    pub cutoff_panels: usize,
    /// Gauss–Legendre nodes per panel of the integration variable.
    pub inner_nodes: usize,
    /// Largest inner panel width.
    pub inner_width: f64,
    /// Largest phase advance `|∂Φ|·width` (radians) across one inner panel.
    pub inner_radians: f64,
    /// Absolute tolerance on the per-point estimate.
    pub tolerance: f64,
    /// Estimate the error against a rule with two fewer ξ nodes and four fewer inner nodes
    /// per panel, refining by the same steps on failure.
    pub estimate_error: bool,
    /// Upper bound on nodes per panel during refinement.
    pub max_nodes: usize,
    /// Fail when the estimate stays above tolerance at `max_nodes`.
    pub strict: bool,
    /// Override of the planned number of `L` applications.
    pub kappa: Option<usize>,
    /// Extra ξ-decay requested from the plan.
    pub extra_decay: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            xi_max: 40.0,
            xi_nodes: 8,
            cutoff_panels: 16,
            inner_nodes: 16,
            inner_width: 1.0,
            inner_radians: 16.0,
            tolerance: 1e-6,
            estimate_error: true,
            max_nodes: 32,
            strict: false,
            kappa: None,
            extra_decay: 0.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi_max > 2.0) {
            return Err(invalid("ξ truncation radius must exceed 2"));
        }
        if self.xi_nodes < 4 || self.inner_nodes < 6 || self.cutoff_panels == 0 {
            return Err(invalid("panels need at least 4 ξ nodes and 6 inner nodes"));
        }
        if !(self.inner_width > 0.0 && self.inner_radians > 0.0 && self.tolerance > 0.0) {
            return Err(invalid("panel widths and tolerance must be positive"));
        }
        if self.max_nodes < self.xi_nodes.max(self.inner_nodes) {
            return Err(invalid("max_nodes is below the starting resolution"));
        }
        Ok(())
    }

    /// ξ panels on `[0, R]`.
    pub fn xi_panels(&self) -> Vec<(f64, f64)> {
        let mut p = vec![(0.0, 1.0)];
        let k = self.cutoff_panels;
        for i in 0..k {
            p.push((1.0 + i as f64 / k as f64, 1.0 + (i + 1) as f64 / k as f64));
        }
        let mut a = 2.0;
        while a < self.xi_max {
            let b = (a + 1.0).min(self.xi_max);
            p.push((a, b));
            a = b;
        }
        p
    }
}

/// A Fourier integral operator `A_{Φ,a}` with its regularization plan and quadrature.
#[derive(Clone, Debug)]
pub struct FioOperator {
    pub phi: PhaseFunction,
    pub amp: Amplitude,
    pub chi: CutoffChi,
    pub plan: KappaPlan,
    pub config: QuadratureConfig,
}

/// Values (and optional derivatives) at output points with per-point estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub x: Vec<f64>,
    pub values: Vec<Complex64>,
    pub estimates: Vec<f64>,
    /// Final inner nodes per panel at each point.
    pub nodes: Vec<usize>,
    pub converged: bool,
}

impl Field {
    pub fn max_estimate(&self) -> f64 {
        self.estimates.iter().cloned().fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,re,im\n");
        for (x, v) in self.x.iter().zip(&self.values) {
            s.push_str(&format!("{},{},{}\n", x, v.re, v.im));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fields serialize")
    }

    pub fn zeros(x: &[f64]) -> Self {
        Field {
            x: x.to_vec(),
            values: vec![Complex64::new(0.0, 0.0); x.len()],
            estimates: vec![0.0; x.len()],
            nodes: vec![0; x.len()],
            converged: true,
        }
    }
}

/// One evaluated output point: derivatives `∂^j` for `j ≤ order` in the outer variable.
#[derive(Clone, Debug)]
struct PointOut {
    derivs: Vec<Complex64>,
    estimate: f64,
    nodes: usize,
    converged: bool,
}

/// Localized maps at the inner nodes of one panel level, shared across output points.
type NodeMaps = Arc<Vec<(Arc<dyn SmoothMap>, Amplitude)>>;

/// Inner nodes, weights and test-function series of one panel level.
struct Level {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    tests: Vec<RealSeries>,
}

struct Integrator<'a> {
    op: &'a FioOperator,
    u: &'a TestFunction,
    integ: Block,
    outer_order: usize,
    kappa: usize,
    kernel: LKernel,
    cache: Mutex<HashMap<(usize, usize), NodeMaps>>,
    levels: Mutex<HashMap<(usize, usize), Arc<Level>>>,
}

impl FioOperator {
    pub fn new(phi: PhaseFunction, amp: Amplitude, config: QuadratureConfig) -> Result<Self> {
        config.validate()?;
        let sig = phi.signature();
        if amp.signature() != sig {
            return Err(invalid("amplitude and phase have different signatures"));
        }
        if sig.ny != 1 || sig.nxi != 1 {
            return Err(Error::Unsupported(format!(
                "quadrature covers one-dimensional y and ξ; got {sig:?}"
            )));
        }
        let plan = KappaPlan::for_amplitude(&amp, sig.nxi, config.extra_decay)?;
        let plan = match config.kappa {
            Some(k) => KappaPlan {
                kappa: k,
                achieved: plan.d - k as f64 * (1.0 - plan.delta).min(plan.rho),
                ..plan
            },
            None => plan,
        };
        Ok(FioOperator { phi, amp, chi: CutoffChi::default(), plan, config })
    }

    /// Certify `Φ ∈ M_α` on the compacts of `grid` before use.
    pub fn certify(&self, alpha: f64, grid: &GridSpec, m: usize) -> Result<crate::symbol_spaces::AlphaReport> {
        check_alpha_membership(&self.phi, alpha, grid, m)
    }

    pub fn with_kappa(&self, kappa: usize) -> Self {
        let mut op = self.clone();
        op.config.kappa = Some(kappa);
        op.plan.kappa = kappa;
        op.plan.achieved = op.plan.d - kappa as f64 * (1.0 - op.plan.delta).min(op.plan.rho);
        op
    }

    pub fn signature(&self) -> Signature {
        self.phi.signature()
    }

    /// `A[ψ]` on a one-dimensional x-grid.
    pub fn apply(&self, psi: &TestFunction, xs: &[f64]) -> Result<Field> {
        self.check_nx1()?;
        let outs = self.run(psi, Block::Y, &xs.iter().map(|&x| vec![x]).collect::<Vec<_>>(), 0)?;
        Ok(field(xs, &outs, |o| o.derivs[0]))
    }

    /// `A[ψ](x)` at one point of any x-dimension, with its estimate.
    pub fn apply_at(&self, psi: &TestFunction, x: &[f64]) -> Result<(Complex64, f64)> {
        if x.len() != self.signature().nx {
            return Err(invalid("x has the wrong dimension"));
        }
        let out = self.run(psi, Block::Y, &[x.to_vec()], 0)?.remove(0);
        Ok((out.derivs[0], out.estimate))
    }

    /// `∂_x^j A[ψ]` for `j ≤ order`, differentiating the integrand under the integral.
    pub fn apply_derivatives(&self, psi: &TestFunction, xs: &[f64], order: usize) -> Result<DerivativeField> {
        self.check_nx1()?;
        let outs = self.run(psi, Block::Y, &xs.iter().map(|&x| vec![x]).collect::<Vec<_>>(), order)?;
        Ok(DerivativeField { x: xs.to_vec(), derivs: outs.into_iter().map(|o| o.derivs).collect() })
    }

    /// `Aᵗ[φ](y) = ∫∫ e^{iΦ} L_x^κ(a φ) dx đξ` on a y-grid.
    pub fn apply_adjoint(&self, phi_test: &TestFunction, ys: &[f64]) -> Result<Field> {
        self.check_nx1()?;
        let outs = self.run(phi_test, Block::X, &ys.iter().map(|&y| vec![y]).collect::<Vec<_>>(), 0)?;
        Ok(field(ys, &outs, |o| o.derivs[0]))
    }

    /// `∂_y^j Aᵗ[φ]` for `j ≤ order`.
    pub fn adjoint_derivatives(&self, phi_test: &TestFunction, ys: &[f64], order: usize) -> Result<DerivativeField> {
        self.check_nx1()?;
        let outs = self.run(phi_test, Block::X, &ys.iter().map(|&y| vec![y]).collect::<Vec<_>>(), order)?;
        Ok(DerivativeField { x: ys.to_vec(), derivs: outs.into_iter().map(|o| o.derivs).collect() })
    }

    fn check_nx1(&self) -> Result<()> {
        if self.signature().nx != 1 {
            return Err(Error::Unsupported("grid output needs a one-dimensional x".into()));
        }
        Ok(())
    }

    fn run(&self, u: &TestFunction, integ: Block, outer: &[Vec<f64>], order: usize) -> Result<Vec<PointOut>> {
        check_inputs(self.phi.map.as_ref(), &self.amp, u, integ)?;
        if u.dim() != 1 {
            return Err(Error::Unsupported("the integration variable must be one-dimensional".into()));
        }
        let need = self.plan.kappa + order + 1;
        if need > self.phi.map.max_order() {
            return Err(Error::OrderExceeded { requested: need, max: self.phi.map.max_order() });
        }
        if u.is_zero() || outer.is_empty() {
            return Ok(outer
                .iter()
                .map(|_| PointOut { derivs: vec![Complex64::new(0.0, 0.0); order + 1], estimate: 0.0, nodes: 0, converged: true })
                .collect());
        }
        let it = Integrator {
            op: self,
            u,
            integ,
            outer_order: order,
            kappa: self.plan.kappa,
            kernel: LKernel::new(self.signature(), integ, order, self.plan.kappa, self.chi),
            cache: Mutex::new(HashMap::new()),
            levels: Mutex::new(HashMap::new()),
        };
        let outs: Vec<PointOut> = outer.par_iter().map(|o| it.point(o)).collect::<Result<_>>()?;
        if self.config.strict {
            if let Some(bad) = outs.iter().find(|o| !o.converged) {
                return Err(Error::ToleranceNotReached { target: self.config.tolerance, achieved: bad.estimate });
            }
        }
        Ok(outs)
    }
}

fn field(xs: &[f64], outs: &[PointOut], pick: impl Fn(&PointOut) -> Complex64) -> Field {
    Field {
        x: xs.to_vec(),
        values: outs.iter().map(&pick).collect(),
        estimates: outs.iter().map(|o| o.estimate).collect(),
        nodes: outs.iter().map(|o| o.nodes).collect(),
        converged: outs.iter().all(|o| o.converged),
    }
}

impl Integrator<'_> {
    fn point(&self, outer: &[f64]) -> Result<PointOut> {
        let cfg = &self.op.config;
        let mut p_xi = cfg.xi_nodes;
        let mut p_in = cfg.inner_nodes;
        let mut fine = self.integral(outer, p_xi, p_in)?;
        if !cfg.estimate_error {
            return Ok(PointOut { derivs: fine, estimate: 0.0, nodes: p_in, converged: true });
        }
        let mut coarse = self.integral(outer, p_xi - 2, p_in - 4)?;
        loop {
            let est = fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if !est.is_finite() {
                return Err(Error::NonFinite(format!("quadrature at {outer:?}")));
            }
            if est <= cfg.tolerance || p_xi + 2 > cfg.max_nodes || p_in + 4 > cfg.max_nodes {
                return Ok(PointOut { derivs: fine, estimate: est, nodes: p_in, converged: est <= cfg.tolerance });
            }
            p_xi += 2;
            p_in += 4;
            coarse = fine;
            fine = self.integral(outer, p_xi, p_in)?;
        }
    }

    fn assemble(&self, outer: &[f64], v: f64, xi: f64) -> Result<Point> {
        match self.integ {
            Block::Y => Point::new(outer, &[v], &[xi]),
            _ => Point::new(&[v], outer, &[xi]),
        }
    }

    /// `max |∂_IΦ|` over a few support samples at `ξ = ±1`, per unit `|ξ|`.
    fn slope(&self, phi: &dyn SmoothMap, outer: &[f64], lo: f64, hi: f64) -> Result<f64> {
        let sig = phi.signature();
        let c = sig.coord(self.integ, 0);
        let mut s: f64 = 0.0;
        for i in 0..5 {
            let v = lo + (hi - lo) * i as f64 / 4.0;
            for xi in [-1.0, 1.0] {
                let p = self.assemble(outer, v, xi)?;
                let ser = phi.series(&p, 1, VarSet(1 << c))?;
                s = s.max(ser.coeffs()[1].abs());
            }
        }
        Ok(s)
    }

    fn node_maps(&self, level: usize, p_in: usize, nodes: &[f64]) -> Result<Option<NodeMaps>> {
        if self.integ != Block::X {
            return Ok(None);
        }
        let key = (p_in, level);
        if let Some(m) = self.cache.lock().expect("node cache poisoned").get(&key) {
            return Ok(Some(m.clone()));
        }
        let order = self.kappa + self.outer_order + 1;
        let mut maps = Vec::with_capacity(nodes.len());
        for &x in nodes {
            maps.push((localized(&self.op.phi.map, &[x], order)?, self.op.amp.localize(&[x], order)?));
        }
        let maps = Arc::new(maps);
        self.cache.lock().expect("node cache poisoned").insert(key, maps.clone());
        Ok(Some(maps))
    }

    fn level(&self, level: usize, p_in: usize, lo: f64, len: f64, base: usize) -> Result<Arc<Level>> {
        let key = (p_in, level);
        if let Some(l) = self.levels.lock().expect("level cache poisoned").get(&key) {
            return Ok(l.clone());
        }
        let n = base * (level + 1);
        let h = len / n as f64;
        let panels: Vec<(f64, f64)> = (0..n).map(|i| (lo + h * i as f64, lo + h * (i + 1) as f64)).collect();
        let (nodes, weights) = composite(&panels, p_in);
        let tests = nodes.iter().map(|&v| self.kernel.test_series_at(self.u, &[v])).collect::<Result<_>>()?;
        let l = Arc::new(Level { nodes, weights, tests });
        self.levels.lock().expect("level cache poisoned").insert(key, l.clone());
        Ok(l)
    }

    /// Integral at one output point; returns `∂^j` for `j ≤ outer_order`.
    fn integral(&self, outer: &[f64], p_xi: usize, p_in: usize) -> Result<Vec<Complex64>> {
        let op = self.op;
        let cfg = &op.config;
        let (lo, hi) = self.u.support.as_ref().expect("nonzero test function")[0];
        let len = (hi - lo).max(1e-300);
        // phase and amplitude frozen at this output point when the outer block is x
        let (phi_out, amp_out) = if self.integ == Block::Y {
            let order = self.kappa + self.outer_order + 1;
            (localized(&op.phi.map, outer, order)?, op.amp.localize(outer, order)?)
        } else {
            (op.phi.map.clone(), op.amp.clone())
        };
        let slope = self.slope(phi_out.as_ref(), outer, lo, hi)?;
        let base = (len / cfg.inner_width).ceil().max(1.0) as usize;
        let (xi_nodes, xi_weights) = composite(&cfg.xi_panels(), p_xi);
        let n_out = if self.outer_order > 0 { outer.len() } else { 0 };
        let mut acc = ComplexSeries::zeros(n_out, self.outer_order);
        for sign in [-1.0, 1.0] {
            for (&t, &wt) in xi_nodes.iter().zip(&xi_weights) {
                let xi = sign * t;
                let needed = (len * t * slope / cfg.inner_radians).ceil() as usize;
                let level = needed.div_ceil(base).max(1) - 1;
                let lv = self.level(level, p_in, lo, len, base)?;
                let cached = self.node_maps(level, p_in, &lv.nodes)?;
                for (idx, (&v, &wv)) in lv.nodes.iter().zip(&lv.weights).enumerate() {
                    let p = self.assemble(outer, v, xi)?;
                    let (phi_n, amp_n) = match &cached {
                        Some(m) => (m[idx].0.as_ref(), &m[idx].1),
                        None => (phi_out.as_ref(), &amp_out),
                    };
                    let (f, phase) = self.kernel.eval(phi_n, amp_n, &lv.tests[idx], &p)?;
                    acc.add_assign(&times_phase(&f, &phase).scale(wt * wv));
                }
            }
        }
        let l = acc.layout();
        Ok((0..=self.outer_order)
            .map(|j| {
                if self.outer_order == 0 {
                    acc.value() / (2.0 * PI)
                } else {
                    let mut e = [0u8; crate::jets::MAX_VARS];
                    e[0] = j as u8;
                    let i = l.index_of(&e).expect("univariate index");
                    acc.coeffs()[i] * l.factorial(i) / (2.0 * PI)
                }
            })
            .collect())
    }
}

/// `∫∫ e^{iΦ} L^κ(a u) dy dξ` with plain `dξ` at a fixed `x`.
pub fn oscillatory_integral(
    phi: &PhaseFunction,
    amp: &Amplitude,
    u: &TestFunction,
    config: &QuadratureConfig,
    x: &[f64],
) -> Result<(Complex64, f64)> {
    let op = FioOperator::new(phi.clone(), amp.clone(), config.clone())?;
    let (v, est) = op.apply_at(u, x)?;
    Ok((v * 2.0 * PI, est * 2.0 * PI))
}

/// One atom `w·δ^{(r)}_y` of a finitely supported distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub order: usize,
    pub weight: Complex64,
}

/// `u = Σ w_i δ^{(r_i)}_{y_i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointDistribution {
    pub atoms: Vec<Atom>,
}

impl PointDistribution {
    pub fn delta(y: f64) -> Self {
        PointDistribution { atoms: vec![Atom { location: y, order: 0, weight: Complex64::new(1.0, 0.0) }] }
    }

    pub fn max_order(&self) -> usize {
        self.atoms.iter().map(|a| a.order).max().unwrap_or(0)
    }
}

/// `⟨A[u], ψ⟩ = Σ w_i (−1)^{r_i} ∂^{r_i}_y Aᵗ[ψ](y_i)`.
pub fn pair_distribution(op: &FioOperator, u: &PointDistribution, psi: &TestFunction) -> Result<Complex64> {
    if u.atoms.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let order = u.max_order();
    let avail = op.phi.map.max_order().saturating_sub(op.plan.kappa + 1);
    if order > avail {
        return Err(Error::OrderExceeded { requested: order, max: avail });
    }
    let ys: Vec<f64> = u.atoms.iter().map(|a| a.location).collect();
    let d = op.adjoint_derivatives(psi, &ys, order)?;
    Ok(u
        .atoms
        .iter()
        .zip(&d.derivs)
        .map(|(a, dv)| a.weight * dv[a.order] * if a.order % 2 == 1 { -1.0 } else { 1.0 })
        .sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub index: usize,
    pub seminorm: f64,
    pub report: SeminormReport,
}

/// `π_{X,m̃}(A_n[ψ] − A_∞[ψ])` for each operator of a sequence.
pub fn convergence_study(
    sequence: &[FioOperator],
    limit: &FioOperator,
    psi: &TestFunction,
    xs: &[f64],
    x_set: &OpenSet,
    m_tilde: usize,
) -> Result<Vec<ConvergenceRow>> {
    let reference = limit.apply_derivatives(psi, xs, m_tilde)?;
    sequence
        .iter()
        .enumerate()
        .map(|(i, op)| {
            let diff = op.apply_derivatives(psi, xs, m_tilde)?.sub(&reference)?;
            let report = seminorm_pi_sampled(&diff, x_set, m_tilde)?;
            Ok(ConvergenceRow { index: i, seminorm: report.value, report })
        })
        .collect()
}
