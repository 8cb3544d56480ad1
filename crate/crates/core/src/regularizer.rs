//! The regularizing operator `L` and its powers.
//!
//! With `r = ‖ξ‖²‖∇_ξΦ‖² + ‖∇_yΦ‖²` the coefficients are
//! `α_l = −i(1−χ)‖ξ‖²∂_{ξ_l}Φ / r`, `β_k = −i(1−χ)∂_{y_k}Φ / r`, `γ = χ`, and
//! `L f = −Σ ∂_{ξ_l}(α_l f) − Σ ∂_{y_k}(β_k f) + γ f`. The adjoint satisfies
//! `Lᵗ e^{iΦ} = e^{iΦ}`, so `L^κ` may be inserted under the integral.
//!
//! `L^κ(a·u)` is evaluated by carrying Taylor series through each application,
//! losing one order per step. The adjoint integral uses the same construction
//! with `x` in place of `y`.

use crate::error::{invalid, Error, Result};
use crate::jets::univariate::{exp_i, smooth_step};
use crate::jets::{Block, ComplexSeries, Jet, Point, RealSeries, Signature, SmoothMap, VarSet};
use crate::symbol_spaces::{fit_slope, Amplitude, GridSpec, PhaseFunction, TestFunction};
use crate::Complex64;
use serde::{Deserialize, Serialize};

/// The cutoff `χ(ξ) = g(outer−‖ξ‖)/(g(outer−‖ξ‖) + g(‖ξ‖−inner))` with `g(s) = e^{−1/s}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffChi {
    pub inner: f64,
    pub outer: f64,
}

impl Default for CutoffChi {
    fn default() -> Self {
        CutoffChi { inner: 1.0, outer: 2.0 }
    }
}

impl CutoffChi {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(invalid("cutoff needs 0 < inner < outer"));
        }
        Ok(CutoffChi { inner, outer })
    }

    pub fn value(&self, norm: f64) -> f64 {
        smooth_step(norm, self.inner, self.outer, 0)[0]
    }

    /// `χ` composed with a series of `‖ξ‖`.
    pub fn series(&self, norm: &RealSeries) -> RealSeries {
        norm.compose(&smooth_step(norm.value(), self.inner, self.outer, norm.order()))
    }
}

/// The integration block of the regularized integral: `y` for `A`, `x` for `Aᵗ`.
fn other(b: Block) -> Block {
    match b {
        Block::Y => Block::X,
        _ => Block::Y,
    }
}

/// Active coordinates: the outer block (for output derivatives), then the integration block, then ξ.
struct Slots {
    vars: VarSet,
    outer: Vec<usize>,
    integ: Vec<usize>,
    xi: Vec<usize>,
}

impl Slots {
    fn new(sig: Signature, integ: Block, with_outer: bool) -> Self {
        let ob = other(integ);
        let mut vars = VarSet::blocks(sig, &[integ, Block::Xi]);
        if with_outer {
            vars = VarSet(vars.0 | VarSet::blocks(sig, &[ob]).0);
        }
        let slot = |b: Block| -> Vec<usize> {
            (0..sig.block_len(b)).map(|i| vars.slot(sig.coord(b, i)).expect("active coordinate")).collect()
        };
        Slots {
            vars,
            outer: if with_outer { slot(ob) } else { Vec::new() },
            integ: slot(integ),
            xi: slot(Block::Xi),
        }
    }
}

/// Series of `‖ξ‖²` and `‖ξ‖` in the active variables.
fn xi_series(p: &Point, s: &Slots, order: usize) -> Result<(RealSeries, RealSeries)> {
    let sig = p.signature();
    let n = s.vars.count();
    let mut n2 = RealSeries::zeros(n, order);
    for (i, &slot) in s.xi.iter().enumerate() {
        let v = RealSeries::variable(n, order, slot, p.coord(sig.coord(Block::Xi, i)));
        n2 = n2.add(&v.mul(&v));
    }
    let v = n2.value();
    if v <= 0.0 {
        return Err(Error::OutsideDomain("ξ = 0".into()));
    }
    let norm = if s.xi.len() == 1 {
        let c = p.coord(sig.coord(Block::Xi, 0));
        RealSeries::variable(n, order, s.xi[0], c).scale(c.signum())
    } else {
        n2.compose(&crate::jets::univariate::pow(v, 0.5, order))
    };
    Ok((n2, norm))
}

/// Real parts `A_l, B_k` (with `α = −iA`, `β = −iB`), `χ`, and `r`, as series of `order`.
struct RawCoeffs {
    a: Vec<RealSeries>,
    b: Vec<RealSeries>,
    chi: RealSeries,
    r: RealSeries,
}

fn raw_coeffs(phi: &RealSeries, p: &Point, s: &Slots, chi: &CutoffChi, order: usize) -> Result<RawCoeffs> {
    let (n2, norm) = xi_series(p, s, order)?;
    let dxi: Vec<RealSeries> = s.xi.iter().map(|&l| phi.deriv(l).truncated(order)).collect();
    let dint: Vec<RealSeries> = s.integ.iter().map(|&k| phi.deriv(k).truncated(order)).collect();
    let n = s.vars.count();
    let mut gxi = RealSeries::zeros(n, order);
    for d in &dxi {
        gxi = gxi.add(&d.mul(d));
    }
    let mut r = n2.mul(&gxi);
    for d in &dint {
        r = r.add(&d.mul(d));
    }
    let chi_s = chi.series(&norm);
    let one_minus = chi_s.neg().add_scalar(1.0);
    let active = one_minus.coeffs().iter().any(|&c| c != 0.0);
    if !active {
        let z = RealSeries::zeros(n, order);
        return Ok(RawCoeffs { a: vec![z.clone(); dxi.len()], b: vec![z; dint.len()], chi: chi_s, r });
    }
    if !(r.value() > 0.0) {
        return Err(Error::DegenerateR(format!("r = 0 at {:?} where 1 − χ ≠ 0", p.flat())));
    }
    let w = one_minus.div(&r)?;
    let wn2 = w.mul(&n2);
    Ok(RawCoeffs {
        a: dxi.iter().map(|d| wn2.mul(d)).collect(),
        b: dint.iter().map(|d| w.mul(d)).collect(),
        chi: chi_s,
        r,
    })
}

/// Jet of `r` at `p` (in all coordinates, to `order`).
pub fn compute_r(phi: &dyn SmoothMap, p: &Point, order: usize) -> Result<Jet> {
    compute_r_for(phi, p, order, Block::Y)
}

/// `r` with the gradient taken over `integ` (`Block::X` for the adjoint).
pub fn compute_r_for(phi: &dyn SmoothMap, p: &Point, order: usize, integ: Block) -> Result<Jet> {
    let sig = p.signature();
    let s = full_slots(sig, integ);
    let ps = phi.series(p, order + 1, s.vars)?;
    let (n2, _) = xi_series(p, &s, order)?;
    let n = s.vars.count();
    let mut g = RealSeries::zeros(n, order);
    for &l in &s.xi {
        let d = ps.deriv(l);
        g = g.add(&d.mul(&d));
    }
    let mut r = n2.mul(&g);
    for &k in &s.integ {
        let d = ps.deriv(k);
        r = r.add(&d.mul(&d));
    }
    Ok(Jet::from_series(*p, r))
}

fn full_slots(sig: Signature, integ: Block) -> Slots {
    let vars = VarSet::all(sig.total());
    let slot = |b: Block| -> Vec<usize> { (0..sig.block_len(b)).map(|i| sig.coord(b, i)).collect() };
    Slots { vars, outer: slot(other(integ)), integ: slot(integ), xi: slot(Block::Xi) }
}

/// Jets of `α_l`, `β_k` and `γ` at one point.
#[derive(Clone, Debug)]
pub struct RegularizerCoeffs {
    pub point: Point,
    pub order: usize,
    pub alpha: Vec<Jet<Complex64>>,
    pub beta: Vec<Jet<Complex64>>,
    pub gamma: Jet,
    pub r: Jet,
}

impl RegularizerCoeffs {
    /// `|i·Σα_l∂_{ξ_l}Φ + i·Σβ_k∂_{y_k}Φ + γ − 1|` at the point.
    pub fn identity_residual(&self, phi: &dyn SmoothMap) -> Result<f64> {
        let sig = self.point.signature();
        let g = phi.jet(&self.point, 1)?;
        let d = |c: usize| {
            let mut e = [0u8; crate::jets::MAX_VARS];
            e[c] = 1;
            g.series().coeff(&e)
        };
        let i = Complex64::i();
        let mut s = Complex64::new(self.gamma.value(), 0.0);
        for (l, a) in self.alpha.iter().enumerate() {
            s += i * a.value() * d(sig.coord(Block::Xi, l));
        }
        for (k, b) in self.beta.iter().enumerate() {
            s += i * b.value() * d(sig.coord(Block::Y, k));
        }
        Ok((s - 1.0).norm())
    }
}

pub fn compute_coeffs(phi: &dyn SmoothMap, chi: &CutoffChi, p: &Point, order: usize) -> Result<RegularizerCoeffs> {
    compute_coeffs_for(phi, chi, p, order, Block::Y)
}

/// Coefficients with `integ` as the integration block.
pub fn compute_coeffs_for(
    phi: &dyn SmoothMap,
    chi: &CutoffChi,
    p: &Point,
    order: usize,
    integ: Block,
) -> Result<RegularizerCoeffs> {
    let sig = p.signature();
    let s = full_slots(sig, integ);
    let ps = phi.series(p, order + 1, s.vars)?;
    let raw = raw_coeffs(&ps, p, &s, chi, order)?;
    let minus_i = |r: &RealSeries| Jet::from_series(*p, r.to_complex().scale_by(Complex64::new(0.0, -1.0)));
    Ok(RegularizerCoeffs {
        point: *p,
        order,
        alpha: raw.a.iter().map(minus_i).collect(),
        beta: raw.b.iter().map(minus_i).collect(),
        gamma: Jet::from_series(*p, raw.chi),
        r: Jet::from_series(*p, raw.r),
    })
}

/// The number of `L` applications and the decay it buys.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaPlan {
    pub d: f64,
    pub rho: f64,
    pub delta: f64,
    pub n_xi: usize,
    pub extra_decay: f64,
    pub kappa: usize,
    /// `d − κ((1−δ) ∧ ρ)`.
    pub achieved: f64,
}

/// Minimal `κ` with `d − κ((1−δ)∧ρ) ≤ −(n_ξ+1) − extra_decay`.
pub fn select_kappa(d: f64, rho: f64, delta: f64, n_xi: usize, extra_decay: f64) -> Result<KappaPlan> {
    if !(rho > 0.0 && rho <= 1.0) || !(0.0..1.0).contains(&delta) {
        return Err(invalid("need ρ ∈ (0, 1] and δ ∈ [0, 1)"));
    }
    let rate = (1.0 - delta).min(rho);
    let target = -(n_xi as f64 + 1.0) - extra_decay;
    let mut kappa = (((d - target) / rate).ceil().max(0.0)) as usize;
    // guard against rounding on either side of an exact fit
    while kappa > 0 && d - (kappa - 1) as f64 * rate <= target + 1e-12 {
        kappa -= 1;
    }
    while d - kappa as f64 * rate > target + 1e-12 {
        kappa += 1;
    }
    Ok(KappaPlan { d, rho, delta, n_xi, extra_decay, kappa, achieved: d - kappa as f64 * rate })
}

impl KappaPlan {
    pub fn for_amplitude(a: &Amplitude, n_xi: usize, extra_decay: f64) -> Result<Self> {
        select_kappa(a.d, a.rho, a.delta, n_xi, extra_decay)
    }
}

/// Evaluator of `L^κ(a·u)` for a fixed signature, integration block and output order.
/// The result is a series in the outer block of order `outer_order`; `u` lives on the
/// integration block.
pub(crate) struct LKernel {
    slots: Slots,
    n: usize,
    kappa: usize,
    outer_order: usize,
    chi: CutoffChi,
    integ: Block,
}

impl LKernel {
    pub(crate) fn new(sig: Signature, integ: Block, outer_order: usize, kappa: usize, chi: CutoffChi) -> Self {
        let slots = Slots::new(sig, integ, outer_order > 0);
        let n = slots.vars.count();
        LKernel { slots, n, kappa, outer_order, chi, integ }
    }

    /// Series of `u` at the integration coordinates of `p`, embedded in the active variables.
    pub(crate) fn test_series(&self, u: &TestFunction, p: &Point) -> Result<RealSeries> {
        let sig = p.signature();
        let pts: smallvec::SmallVec<[f64; 8]> =
            (0..sig.block_len(self.integ)).map(|i| p.coord(sig.coord(self.integ, i))).collect();
        self.test_series_at(u, &pts)
    }

    pub(crate) fn test_series_at(&self, u: &TestFunction, v: &[f64]) -> Result<RealSeries> {
        Ok(u.series(v, self.kappa + self.outer_order)?.embed(self.n, &self.slots.integ))
    }

    /// `(L^κ(a·u), Φ)` projected to the outer block; `us` comes from [`Self::test_series`].
    pub(crate) fn eval(
        &self,
        phi: &dyn SmoothMap,
        amp: &Amplitude,
        us: &RealSeries,
        p: &Point,
    ) -> Result<(ComplexSeries, RealSeries)> {
        let s = &self.slots;
        let n = self.n;
        let norm = p.xi_norm();
        if norm == 0.0 {
            return Err(Error::OutsideDomain("ξ = 0".into()));
        }
        // χ ≡ 1 near ‖ξ‖ ≤ inner, where L is the identity
        let kappa = if norm <= self.chi.inner { 0 } else { self.kappa };
        let top = kappa + self.outer_order;
        let ps = phi.series(p, top + 1, s.vars)?;
        let mut f = amp.series(p, top, s.vars)?.mul_real(us);
        if kappa > 0 {
            let raw = raw_coeffs(&ps, p, s, &self.chi, top)?;
            let i = Complex64::i();
            for step in 0..kappa {
                let m = top - step;
                let mut g = ComplexSeries::zeros(n, m - 1);
                for (l, &slot) in s.xi.iter().enumerate() {
                    g.add_assign(&f.mul_real(&raw.a[l]).deriv(slot));
                }
                for (k, &slot) in s.integ.iter().enumerate() {
                    g.add_assign(&f.mul_real(&raw.b[k]).deriv(slot));
                }
                let mut next = g.scale_by(i);
                if raw.chi.coeffs().iter().any(|&c| c != 0.0) {
                    next.add_assign(&f.truncated(m - 1).mul_real(&raw.chi));
                }
                f = next;
            }
        }
        if self.outer_order == 0 {
            return Ok((ComplexSeries::constant(0, 0, f.value()), RealSeries::constant(0, 0, ps.value())));
        }
        let f = f.project(&s.outer);
        let phase = ps.truncated(self.outer_order).project(&s.outer);
        Ok((f, phase))
    }
}

/// Value of `L^κ(a·ψ)` at `p`, integrating over `y`.
pub fn apply_l_power(
    phi: &dyn SmoothMap,
    amp: &Amplitude,
    psi: &TestFunction,
    chi: &CutoffChi,
    kappa: usize,
    p: &Point,
) -> Result<Complex64> {
    check_inputs(phi, amp, psi, Block::Y)?;
    let k = LKernel::new(p.signature(), Block::Y, 0, kappa, *chi);
    Ok(k.eval(phi, amp, &k.test_series(psi, p)?, p)?.0.value())
}

pub(crate) fn check_inputs(phi: &dyn SmoothMap, amp: &Amplitude, u: &TestFunction, integ: Block) -> Result<()> {
    let sig = phi.signature();
    if amp.signature() != sig {
        return Err(invalid("amplitude and phase have different signatures"));
    }
    if u.dim() != sig.block_len(integ) {
        return Err(invalid("test function dimension differs from the integration block"));
    }
    Ok(())
}

/// `e^{iΦ}·f` for series in the outer block.
pub(crate) fn times_phase(f: &ComplexSeries, phase: &RealSeries) -> ComplexSeries {
    if f.order() == 0 {
        let e = Complex64::from_polar(1.0, phase.value());
        return f.scale_by(e);
    }
    let e = phase.compose_complex(&exp_i(phase.value(), phase.order()));
    f.mul(&e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBoundReport {
    pub m: usize,
    pub radii: Vec<f64>,
    /// Observed `max ⟨ξ⟩^{|l|} |∂^j∂^k∂^l α_i|`.
    pub alpha_constant: f64,
    /// Observed `max ⟨ξ⟩^{1+|l|} |∂^j∂^k∂^l β_i|`.
    pub beta_constant: f64,
    /// Largest fitted log-log exponent minus the bound `−|l|` (α) or `−1−|l|` (β); ≤ 0 up to noise.
    pub alpha_excess: f64,
    pub beta_excess: f64,
    /// Fitted exponents `(coefficient, flattened multi-index, exponent, bound)` for nonvanishing entries.
    pub fits: Vec<CoefficientFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFit {
    pub coefficient: String,
    pub index: Vec<u8>,
    pub point: Vec<f64>,
    pub exponent: f64,
    pub bound: f64,
}

/// Checks the symbol bounds of `α_l` and `β_k` over ξ at `radii` (all beyond the cutoff).
pub fn check_coefficient_symbol_bounds(
    phi: &PhaseFunction,
    chi: &CutoffChi,
    m: usize,
    grid: &GridSpec,
    radii: &[f64],
) -> Result<CoefficientBoundReport> {
    let sig = phi.signature();
    let dirs = grid.unit_points(sig, m)?;
    let mut rep = CoefficientBoundReport {
        m,
        radii: radii.to_vec(),
        alpha_constant: 0.0,
        beta_constant: 0.0,
        alpha_excess: f64::NEG_INFINITY,
        beta_excess: f64::NEG_INFINITY,
        fits: Vec::new(),
    };
    for p in &dirs {
        let mut tables = Vec::with_capacity(radii.len());
        for &rad in radii {
            let mut q = *p;
            for i in 0..sig.nxi {
                let c = sig.coord(Block::Xi, i);
                q.set_coord(c, p.coord(c) * rad);
            }
            tables.push(compute_coeffs(phi.map.as_ref(), chi, &q, m)?);
        }
        let groups: [(&str, usize, f64); 2] = [("alpha", sig.nxi, 0.0), ("beta", sig.ny, -1.0)];
        for (name, count, shift) in groups {
            for c in 0..count {
                let pick = |t: &RegularizerCoeffs| if name == "alpha" { t.alpha[c].entries() } else { t.beta[c].entries() };
                let first = pick(&tables[0]);
                let all: Vec<_> = tables.iter().map(pick).collect();
                for e in 0..first.len() {
                    let l = first[e].0.block_total(Block::Xi) as f64;
                    let bound = shift - l;
                    let vals: Vec<f64> = all.iter().map(|t| t[e].1.norm()).collect();
                    for (&rad, &v) in radii.iter().zip(&vals) {
                        let w = (1.0 + rad * rad).sqrt().powf(-bound) * v;
                        if name == "alpha" {
                            rep.alpha_constant = rep.alpha_constant.max(w);
                        } else {
                            rep.beta_constant = rep.beta_constant.max(w);
                        }
                    }
                    // entries that vanish identically carry no exponent
                    if radii.len() < 2 || vals.iter().any(|&v| v <= 1e-14) {
                        continue;
                    }
                    let pts: Vec<(f64, f64)> =
                        radii.iter().zip(&vals).map(|(&r, &v)| ((1.0 + r * r).sqrt().ln(), v.ln())).collect();
                    let exponent = fit_slope(&pts);
                    let excess = exponent - bound;
                    if name == "alpha" {
                        rep.alpha_excess = rep.alpha_excess.max(excess);
                    } else {
                        rep.beta_excess = rep.beta_excess.max(excess);
                    }
                    rep.fits.push(CoefficientFit {
                        coefficient: format!("{name}{}", c + 1),
                        index: first[e].0.flat()[..sig.total()].to_vec(),
                        point: p.flat().to_vec(),
                        exponent,
                        bound,
                    });
                }
            }
        }
    }
    Ok(rep)
}
