//! Closed-form map families with exact jets.

use super::layout::layout;
use super::map::{Block, Point, Signature, SmoothMap, VarSet};
use super::series::RealSeries;
use super::univariate::{self as uni, Taylor1};
use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Evaluation context shared by the family implementations.
pub(crate) struct Ctx<'a> {
    pub p: &'a Point,
    pub order: usize,
    pub vars: VarSet,
    pub n: usize,
}

impl<'a> Ctx<'a> {
    pub fn new(p: &'a Point, order: usize, vars: VarSet) -> Self {
        Ctx { p, order, vars, n: vars.count() }
    }

    pub fn constant(&self, v: f64) -> RealSeries {
        RealSeries::constant(self.n, self.order, v)
    }

    pub fn coord(&self, c: usize) -> RealSeries {
        match self.vars.slot(c) {
            Some(s) => RealSeries::variable(self.n, self.order, s, self.p.coord(c)),
            None => self.constant(self.p.coord(c)),
        }
    }

    /// A univariate function of coordinate `c` given by its Taylor coefficients there.
    pub fn lift(&self, c: usize, coeffs: &[f64]) -> RealSeries {
        match self.vars.slot(c) {
            Some(s) => {
                let l = layout(self.n);
                let mut r = RealSeries::zeros(self.n, self.order);
                let cs = r.coeffs_mut();
                for (k, &v) in coeffs.iter().enumerate().take(self.order + 1) {
                    cs[l.pure_power(s, k)] = v;
                }
                r
            }
            None => self.constant(coeffs[0]),
        }
    }

    /// `‖ξ‖` over the ξ-block starting at coordinate `start`.
    pub fn xi_norm(&self, start: usize, nxi: usize) -> Result<RealSeries> {
        if nxi == 1 {
            let v = self.p.coord(start);
            if v == 0.0 {
                return Err(Error::OutsideDomain("ξ = 0".into()));
            }
            return Ok(self.coord(start).scale(v.signum()));
        }
        let mut s2 = self.constant(0.0);
        for i in 0..nxi {
            let c = self.coord(start + i);
            s2 = s2.add(&c.mul(&c));
        }
        let v = s2.value();
        if v <= 0.0 {
            return Err(Error::OutsideDomain("ξ = 0".into()));
        }
        Ok(s2.compose(&uni::pow(v, 0.5, self.order)))
    }
}

fn check_coord(sig: Signature, var: Block, index: usize) -> Result<usize> {
    if index >= sig.block_len(var) {
        return Err(invalid(format!("coordinate {var:?}[{index}] outside signature {sig:?}")));
    }
    Ok(sig.coord(var, index))
}

#[derive(Debug)]
pub struct ConstantMap {
    sig: Signature,
    value: f64,
}

impl ConstantMap {
    pub fn new(sig: Signature, value: f64) -> Self {
        ConstantMap { sig, value }
    }
}

impl SmoothMap for ConstantMap {
    fn signature(&self) -> Signature {
        self.sig
    }
    fn describe(&self) -> String {
        format!("{}", self.value)
    }
    fn series(&self, _p: &Point, order: usize, vars: VarSet) -> Result<RealSeries> {
        Ok(RealSeries::constant(vars.count(), order, self.value))
    }
}

/// `Φ = ⟨x − y, ξ⟩`.
#[derive(Debug)]
pub struct LinearPhase {
    sig: Signature,
}

impl LinearPhase {
    pub fn new(n: usize) -> Self {
        LinearPhase { sig: Signature::new(n, n, n) }
    }
}

/// Sparse series of `⟨x − y, ξ⟩` over the first `n` coordinates of each block.
fn linear_part(ctx: &Ctx, sig: Signature, n: usize) -> RealSeries {
    let mut r = ctx.constant(0.0);
    let l = layout(ctx.n);
    let up = |s: usize, t: usize| l.up(s)[1 + t] as usize;
    let mut value = 0.0;
    for i in 0..n {
        let (cx, cy, cz) = (sig.coord(Block::X, i), sig.coord(Block::Y, i), sig.coord(Block::Xi, i));
        let (x, y, z) = (ctx.p.coord(cx), ctx.p.coord(cy), ctx.p.coord(cz));
        value += (x - y) * z;
        if ctx.order == 0 {
            continue;
        }
        let (sx, sy, sz) = (ctx.vars.slot(cx), ctx.vars.slot(cy), ctx.vars.slot(cz));
        let c = r.coeffs_mut();
        if let Some(s) = sx {
            c[1 + s] += z;
        }
        if let Some(s) = sy {
            c[1 + s] -= z;
        }
        if let Some(s) = sz {
            c[1 + s] += x - y;
            if ctx.order >= 2 {
                if let Some(t) = sx {
                    c[up(s, t)] += 1.0;
                }
                if let Some(t) = sy {
                    c[up(s, t)] -= 1.0;
                }
            }
        }
    }
    r.coeffs_mut()[0] = value;
    r
}

impl SmoothMap for LinearPhase {
    fn signature(&self) -> Signature {
        self.sig
    }
    fn describe(&self) -> String {
        "<x-y,xi>".into()
    }
    fn series(&self, p: &Point, order: usize, vars: VarSet) -> Result<RealSeries> {
        Ok(linear_part(&Ctx::new(p, order, vars), self.sig, self.sig.nxi))
    }
}

/// `Φ = ⟨x − y, ξ⟩ + sign·c(x)·t·‖ξ‖`, with `t` fixed or the last x-coordinate.
#[derive(Debug)]
pub struct ScaledNormPhase {
    sig: Signature,
    sign: f64,
    speed: Arc<dyn SmoothMap>,
    time: Option<f64>,
}

impl ScaledNormPhase {
    pub fn new(n: usize, sign: f64, speed: Arc<dyn SmoothMap>, time: Option<f64>) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return Err(invalid("sign must be +1 or -1"));
        }
        if speed.signature() != Signature::new(n, 0, 0) {
            return Err(invalid("speed must be a map of the spatial x-coordinates only"));
        }
        let nx = if time.is_some() { n } else { n + 1 };
        Ok(ScaledNormPhase { sig: Signature::new(nx, n, n), sign, speed, time })
    }
}

impl SmoothMap for ScaledNormPhase {
    fn signature(&self) -> Signature {
        self.sig
    }
    fn describe(&self) -> String {
        let t = self.time.map_or("t".to_string(), |t| t.to_string());
        format!("<x-y,xi> {} ({})*{}*|xi|", if self.sign > 0.0 { "+" } else { "-" }, self.speed.describe(), t)
    }
    fn series(&self, p: &Point, order: usize, vars: VarSet) -> Result<RealSeries> {
        let ctx = Ctx::new(p, order, vars);
        let n = self.sig.nxi;
        let lin = linear_part(&ctx, self.sig, n);
        let speed_sig = Signature::new(n, 0, 0);
        let sub_vars = VarSet(vars.0 & VarSet::all(n).0);
        let cs = self.speed.series(&p.restrict(speed_sig), order, sub_vars)?;
        let c = if sub_vars.count() == 0 {
            ctx.constant(cs.value())
        } else {
            let slots: Vec<usize> = sub_vars.coords().iter().map(|&c| vars.slot(c).unwrap()).collect();
            cs.embed(ctx.n, &slots)
        };
        let t = match self.time {
            Some(t) => ctx.constant(t),
            None => ctx.coord(n),
        };
        let norm = ctx.xi_norm(self.sig.offset(Block::Xi), n)?;
        Ok(lin.add(&c.mul(&t).mul(&norm).scale(self.sign)))
    }
    fn localize(&self, x0: &[f64], order: usize) -> Result<Option<Arc<dyn SmoothMap>>> {
        let n = self.sig.nxi;
        Ok(self.speed.localize(&x0[..n], order)?.map(|speed| {
            Arc::new(ScaledNormPhase { sig: self.sig, sign: self.sign, speed, time: self.time }) as Arc<dyn SmoothMap>
        }))
    }
}

/// A one-dimensional x-profile `φ(x, ±1)` given through its Taylor coefficients.
pub trait PhaseProfile: Send + Sync + fmt::Debug {
    fn profile(&self, x: f64, sign: f64, order: usize) -> Result<Taylor1<f64>>;

    fn describe(&self) -> String;

    /// Profile data at `x0` for both signs, reusable without recomputation.
    fn freeze(&self, x0: f64, order: usize) -> Result<Arc<dyn PhaseProfile>> {
        Ok(Arc::new(FrozenProfile {
            x0,
            plus: self.profile(x0, 1.0, order)?,
            minus: self.profile(x0, -1.0, order)?,
            name: self.describe(),
        }))
    }
}

#[derive(Debug)]
struct FrozenProfile {
    x0: f64,
    plus: Taylor1<f64>,
    minus: Taylor1<f64>,
    name: String,
}

impl PhaseProfile for FrozenProfile {
    fn profile(&self, x: f64, sign: f64, order: usize) -> Result<Taylor1<f64>> {
        if x.to_bits() != self.x0.to_bits() {
            return Err(Error::OutsideDomain(format!("profile frozen at x = {} queried at x = {}", self.x0, x)));
        }
        let src = if sign > 0.0 { &self.plus } else { &self.minus };
        if order + 1 > src.len() {
            return Err(Error::OrderExceeded { requested: order, max: src.len() - 1 });
        }
        Ok(src[..=order].iter().copied().collect())
    }
    fn describe(&self) -> String {
        self.name.clone()
    }
    fn freeze(&self, x0: f64, order: usize) -> Result<Arc<dyn PhaseProfile>> {
        let _ = self.profile(x0, 1.0, order)?;
        Ok(Arc::new(FrozenProfile { x0, plus: self.plus.clone(), minus: self.minus.clone(), name: self.name.clone() }))
    }
}

/// One-dimensional homogenized phase `Φ = |ξ|·φ(x, sign ξ) − yξ`.
#[derive(Debug)]
pub struct TabulatedPhase {
    profile: Arc<dyn PhaseProfile>,
}

impl TabulatedPhase {
    pub fn new(profile: Arc<dyn PhaseProfile>) -> Self {
        TabulatedPhase { profile }
    }
}

impl SmoothMap for TabulatedPhase {
    fn signature(&self) -> Signature {
        Signature::new(1, 1, 1)
    }
    fn describe(&self) -> String {
        format!("|xi|*{} - y*xi", self.profile.describe())
    }
    fn series(&self, p: &Point, order: usize, vars: VarSet) -> Result<RealSeries> {
        let ctx = Ctx::new(p, order, vars);
        let xi0 = p.coord(2);
        if xi0 == 0.0 {
            return Err(Error::OutsideDomain("ξ = 0".into()));
        }
        let sign = xi0.signum();
        let prof = ctx.lift(0, &self.profile.profile(p.coord(0), sign, order)?);
        let xi = ctx.coord(2);
        Ok(prof.scale(sign).sub(&ctx.coord(1)).mul(&xi))
    }
    fn localize(&self, x0: &[f64], order: usize) -> Result<Option<Arc<dyn SmoothMap>>> {
        Ok(Some(Arc::new(TabulatedPhase { profile: self.profile.freeze(x0[0], order)? })))
    }
}

/// `scale · exp(−((u − center)/width)²)` in one coordinate.
#[derive(Debug)]
pub struct GaussianBump {
    sig: Signature,
    coord: usize,
    center: f64,
    width: f64,
    scale: f64,
}

impl GaussianBump {
    pub fn new(sig: Signature, var: Block, index: usize, center: f64, width: f64, scale: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(invalid("gaussian width must be positive"));
        }
        Ok(GaussianBump { sig, coord: check_coord(sig, var, index)?, center, width, scale })
    }

    /// Taylor coefficients in the bump's coordinate at `u0`.
    pub fn coefficients(&self, u0: f64, order: usize) -> Taylor1<f64> {
        let z0 = (u0 - self.center) / self.width;
        let mut z = RealSeries::variable(1, order, 0, z0);
        if order >= 1 {
            z.coeffs_mut()[1] = 1.0 / self.width;
        }
        let q = z.mul(&z).neg();
        q.compose(&uni::exp(-z0 * z0, order)).scale(self.scale).coeffs().iter().copied().collect()
    }
}

impl SmoothMap for GaussianBump {
    fn signature(&self) -> Signature {
        self.sig
    }
    fn describe(&self) -> String {
        format!("{}*exp(-((u{}-{})/{})^2)", self.scale, self.coord, self.center, self.width)
    }
    fn series(&self, p: &Point, order: usize, vars: VarSet) -> Result<RealSeries> {
        let ctx = Ctx::new(p, order, vars);
        Ok(ctx.lift(self.coord, &self.coefficients(p.coord(self.coord), order)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub k: f64,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// `c₀ + Σ (a cos(k u) + b sin(k u))` in one coordinate.
#[derive(Debug)]
pub struct TrigPolynomial {
    sig: Signature,
    coord: usize,
    constant: f64,
    terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    pub fn new(sig: Signature, var: Block, index: usize, constant: f64, terms: Vec<TrigTerm>) -> Result<Self> {
        Ok(TrigPolynomial { sig, coord: check_coord(sig, var, index)?, constant, terms })
    }

    pub fn coefficients(&self, u0: f64, order: usize) -> Taylor1<f64> {
        let mut out = Taylor1::from_elem(0.0, order + 1);
        out[0] = self.constant;
        for t in &self.terms {
            if t.cos != 0.0 {
                for (o, c) in out.iter_mut().zip(uni::cos_affine(t.k, 0.0, u0, order)) {
                    *o += t.cos * c;
                }
            }
            if t.sin != 0.0 {
                for (o, c) in out.iter_mut().zip(uni::sin_affine(t.k, 0.0, u0, order)) {
                    *o += t.sin * c;
                }
            }
        }
        out
    }

    /// `Σ (|a| + |b|)`, a bound on the oscillating part.
    pub fn amplitude_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.cos.abs() + t.sin.abs()).sum()
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }
}

impl SmoothMap for TrigPolynomial {
    fn signature(&self) -> Signature {
        self.sig
    }
    fn describe(&self) -> String {
        let mut s = format!("{}", self.constant);
        for t in &self.terms {
            s.push_str(&format!(" + {}cos({}u) + {}sin({}u)", t.cos, t.k, t.sin, t.k));
        }
        s
    }
    fn series(&self, p: &Point, order: usize, vars: VarSet) -> Result<RealSeries> {
        let ctx = Ctx::new(p, order, vars);
        Ok(ctx.lift(self.coord, &self.coefficients(p.coord(self.coord), order)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    #[serde(default)]
    pub x: Vec<u8>,
    #[serde(default)]
    pub y: Vec<u8>,
    #[serde(default)]
    pub xi: Vec<u8>,
}

/// Finite sum of monomials `coef · x^j y^k ξ^l`.
#[derive(Debug)]
pub struct Polynomial {
    sig: Signature,
    terms: Vec<(f64, Vec<(usize, u8)>)>,
}

impl Polynomial {
    pub fn new(sig: Signature, monomials: &[Monomial]) -> Result<Self> {
        let mut terms = Vec::new();
        for m in monomials {
            let mut powers = Vec::new();
            for (b, e) in [(Block::X, &m.x), (Block::Y, &m.y), (Block::Xi, &m.xi)] {
                if e.len() > sig.block_len(b) {
                    return Err(invalid(format!("monomial exponents exceed the {b:?}-block")));
                }
                for (i, &k) in e.iter().enumerate() {
                    if k > 0 {
                        powers.push((sig.coord(b, i), k));
                    }
                }
            }
            terms.push((m.coef, powers));
        }
        Ok(Polynomial { sig, terms })
    }
}

impl SmoothMap for Polynomial {
    fn signature(&self) -> Signature {
        self.sig
    }
    fn describe(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, pw)| {
                let mut s = format!("{c}");
                for (v, k) in pw {
                    s.push_str(&format!("*u{v}^{k}"));
                }
                s
            })
            .collect();
        parts.join(" + ")
    }
    fn series(&self, p: &Point, order: usize, vars: VarSet) -> Result<RealSeries> {
        let ctx = Ctx::new(p, order, vars);
        let mut acc = ctx.constant(0.0);
        for (coef, powers) in &self.terms {
            let mut m = ctx.constant(*coef);
            for &(c, k) in powers {
                m = m.mul(&ctx.lift(c, &uni::pow(p.coord(c), k as f64, order)));
            }
            acc = acc.add(&m);
        }
        Ok(acc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Cos,
    Sin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub freq: f64,
    pub power: f64,
    pub part: Part,
}

/// `⟨ξ⟩^d`, optionally times `cos` or `sin` of `freq·⟨ξ⟩^power`.
#[derive(Debug)]
pub struct BracketSymbol {
    sig: Signature,
    d: f64,
    osc: Option<Oscillation>,
}

impl BracketSymbol {
    pub fn new(sig: Signature, d: f64, osc: Option<Oscillation>) -> Result<Self> {
        if sig.nxi == 0 {
            return Err(invalid("bracket symbol needs a ξ-block"));
        }
        Ok(BracketSymbol { sig, d, osc })
    }
}

impl SmoothMap for BracketSymbol {
    fn signature(&self) -> Signature {
        self.sig
    }
    fn describe(&self) -> String {
        match self.osc {
            None => format!("<xi>^{}", self.d),
            Some(o) => format!("<xi>^{}*{:?}({}*<xi>^{})", self.d, o.part, o.freq, o.power),
        }
    }
    fn series(&self, p: &Point, order: usize, vars: VarSet) -> Result<RealSeries> {
        let ctx = Ctx::new(p, order, vars);
        let start = self.sig.offset(Block::Xi);
        let mut s2 = ctx.constant(1.0);
        for i in 0..self.sig.nxi {
            let c = ctx.coord(start + i);
            s2 = s2.add(&c.mul(&c));
        }
        let b = s2.compose(&uni::pow(s2.value(), 0.5, order));
        let b0 = b.value();
        let mut a = b.compose(&uni::pow(b0, self.d, order));
        if let Some(o) = self.osc {
            let w = b.compose(&uni::pow(b0, o.power, order)).scale(o.freq);
            let coeffs = match o.part {
                Part::Cos => uni::cos(w.value(), order),
                Part::Sin => uni::sin(w.value(), order),
            };
            a = a.mul(&w.compose(&coeffs));
        }
        Ok(a)
    }
}

#[derive(Debug)]
pub struct SumMap {
    sig: Signature,
    terms: Vec<Arc<dyn SmoothMap>>,
}

impl SumMap {
    pub fn new(terms: Vec<Arc<dyn SmoothMap>>) -> Result<Self> {
        let sig = same_signature(&terms)?;
        Ok(SumMap { sig, terms })
    }
}

#[derive(Debug)]
pub struct ProductMap {
    sig: Signature,
    factors: Vec<Arc<dyn SmoothMap>>,
}

impl ProductMap {
    pub fn new(factors: Vec<Arc<dyn SmoothMap>>) -> Result<Self> {
        let sig = same_signature(&factors)?;
        Ok(ProductMap { sig, factors })
    }
}

fn same_signature(maps: &[Arc<dyn SmoothMap>]) -> Result<Signature> {
    let first = maps.first().ok_or_else(|| invalid("composite needs at least one operand"))?.signature();
    if maps.iter().any(|m| m.signature() != first) {
        return Err(invalid("composite operands have different signatures"));
    }
    Ok(first)
}

fn localize_all(maps: &[Arc<dyn SmoothMap>], x0: &[f64], order: usize) -> Result<Option<Vec<Arc<dyn SmoothMap>>>> {
    let mut changed = false;
    let mut out = Vec::with_capacity(maps.len());
    for m in maps {
        match m.localize(x0, order)? {
            Some(l) => {
                changed = true;
                out.push(l);
            }
            None => out.push(m.clone()),
        }
    }
    Ok(changed.then_some(out))
}

impl SmoothMap for SumMap {
    fn signature(&self) -> Signature {
        self.sig
    }
    fn describe(&self) -> String {
        let parts: Vec<String> = self.terms.iter().map(|t| format!("({})", t.describe())).collect();
        parts.join(" + ")
    }
    fn series(&self, p: &Point, order: usize, vars: VarSet) -> Result<RealSeries> {
        let mut acc = self.terms[0].series(p, order, vars)?;
        for t in &self.terms[1..] {
            acc = acc.add(&t.series(p, order, vars)?);
        }
        Ok(acc)
    }
    fn localize(&self, x0: &[f64], order: usize) -> Result<Option<Arc<dyn SmoothMap>>> {
        Ok(localize_all(&self.terms, x0, order)?.map(|terms| Arc::new(SumMap { sig: self.sig, terms }) as _))
    }
}

impl SmoothMap for ProductMap {
    fn signature(&self) -> Signature {
        self.sig
    }
    fn describe(&self) -> String {
        let parts: Vec<String> = self.factors.iter().map(|t| format!("({})", t.describe())).collect();
        parts.join(" * ")
    }
    fn series(&self, p: &Point, order: usize, vars: VarSet) -> Result<RealSeries> {
        let mut acc = self.factors[0].series(p, order, vars)?;
        for t in &self.factors[1..] {
            acc = acc.mul(&t.series(p, order, vars)?);
        }
        Ok(acc)
    }
    fn localize(&self, x0: &[f64], order: usize) -> Result<Option<Arc<dyn SmoothMap>>> {
        Ok(localize_all(&self.factors, x0, order)?.map(|factors| Arc::new(ProductMap { sig: self.sig, factors }) as _))
    }
}

/// `exp(f)`.
#[derive(Debug)]
pub struct ExpMap {
    arg: Arc<dyn SmoothMap>,
}

impl ExpMap {
    pub fn new(arg: Arc<dyn SmoothMap>) -> Self {
        ExpMap { arg }
    }
}

impl SmoothMap for ExpMap {
    fn signature(&self) -> Signature {
        self.arg.signature()
    }
    fn describe(&self) -> String {
        format!("exp({})", self.arg.describe())
    }
    fn series(&self, p: &Point, order: usize, vars: VarSet) -> Result<RealSeries> {
        let a = self.arg.series(p, order, vars)?;
        Ok(a.compose(&uni::exp(a.value(), order)))
    }
    fn localize(&self, x0: &[f64], order: usize) -> Result<Option<Arc<dyn SmoothMap>>> {
        Ok(self.arg.localize(x0, order)?.map(|arg| Arc::new(ExpMap { arg }) as _))
    }
}

fn default_y() -> Block {
    Block::Y
}

fn default_x() -> Block {
    Block::X
}

fn one() -> f64 {
    1.0
}

/// Serializable description of a builtin map family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MapSpec {
    Constant {
        value: f64,
    },
    LinearPhase,
    ScaledNormPhase {
        sign: f64,
        speed: Box<MapSpec>,
        /// Fixed time; when absent, time is the last x-coordinate.
        #[serde(default)]
        t: Option<f64>,
    },
    GaussianBump {
        #[serde(default = "default_y")]
        var: Block,
        #[serde(default)]
        index: usize,
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    TrigPolynomial {
        #[serde(default = "default_x")]
        var: Block,
        #[serde(default)]
        index: usize,
        #[serde(default)]
        constant: f64,
        #[serde(default)]
        terms: Vec<TrigTerm>,
    },
    Polynomial {
        terms: Vec<Monomial>,
    },
    Bracket {
        order: f64,
        #[serde(default)]
        oscillation: Option<Oscillation>,
    },
    Sum {
        terms: Vec<MapSpec>,
    },
    Product {
        factors: Vec<MapSpec>,
    },
    Exp {
        arg: Box<MapSpec>,
    },
}

pub const FAMILIES: &[&str] = &[
    "constant",
    "linear_phase",
    "scaled_norm_phase",
    "gaussian_bump",
    "trig_polynomial",
    "polynomial",
    "bracket",
    "sum",
    "product",
    "exp",
];

/// Build a builtin map over the signature `sig`.
pub fn builtin_map(spec: &MapSpec, sig: Signature) -> Result<Arc<dyn SmoothMap>> {
    sig.validate()?;
    Ok(match spec {
        MapSpec::Constant { value } => Arc::new(ConstantMap::new(sig, *value)),
        MapSpec::LinearPhase => {
            if sig.nx != sig.nxi || sig.ny != sig.nxi || sig.nxi == 0 {
                return Err(invalid("linear_phase needs n_x = n_y = n_ξ ≥ 1"));
            }
            Arc::new(LinearPhase::new(sig.nxi))
        }
        MapSpec::ScaledNormPhase { sign, speed, t } => {
            let n = sig.nxi;
            let expected = Signature::new(if t.is_some() { n } else { n + 1 }, n, n);
            if sig != expected || n == 0 {
                return Err(invalid(format!("scaled_norm_phase needs signature {expected:?}, got {sig:?}")));
            }
            let c = builtin_map(speed, Signature::new(n, 0, 0))?;
            Arc::new(ScaledNormPhase::new(n, *sign, c, *t)?)
        }
        MapSpec::GaussianBump { var, index, center, width, scale } => {
            Arc::new(GaussianBump::new(sig, *var, *index, *center, *width, *scale)?)
        }
        MapSpec::TrigPolynomial { var, index, constant, terms } => {
            Arc::new(TrigPolynomial::new(sig, *var, *index, *constant, terms.clone())?)
        }
        MapSpec::Polynomial { terms } => Arc::new(Polynomial::new(sig, terms)?),
        MapSpec::Bracket { order, oscillation } => Arc::new(BracketSymbol::new(sig, *order, *oscillation)?),
        MapSpec::Sum { terms } => {
            Arc::new(SumMap::new(terms.iter().map(|t| builtin_map(t, sig)).collect::<Result<_>>()?)?)
        }
        MapSpec::Product { factors } => {
            Arc::new(ProductMap::new(factors.iter().map(|t| builtin_map(t, sig)).collect::<Result<_>>()?)?)
        }
        MapSpec::Exp { arg } => Arc::new(ExpMap::new(builtin_map(arg, sig)?)),
    })
}

/// Build from a JSON description, reporting unknown family names explicitly.
pub fn builtin_map_from_json(value: &serde_json::Value, sig: Signature) -> Result<Arc<dyn SmoothMap>> {
    let family = value.get("family").and_then(|f| f.as_str()).ok_or_else(|| invalid("missing `family` field"))?;
    if !FAMILIES.contains(&family) {
        return Err(Error::UnknownFamily(family.to_string()));
    }
    let spec: MapSpec = serde_json::from_value(value.clone()).map_err(|e| invalid(e.to_string()))?;
    builtin_map(&spec, sig)
}
