//! Phase-function and amplitude spaces: compact exhaustions, grid seminorms,
//! homogeneity and `M_α` checks, and the derivative bound of homogeneous phases.
//!
//! All suprema are taken over finite grids, so every reported seminorm is a
//! lower bound of the true supremum. Grids refine by inserting midpoints, so
//! a refined grid contains the coarse one and reported values never decrease.

use crate::error::{invalid, Error, Result};
use crate::jets::{Block, MultiIndex, Point, Signature, SmoothMap, VarSet};
use crate::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// An open subset `Z ⊂ ℝⁿ`: the whole space or an axis-aligned open box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpenSet {
    Whole { dim: usize },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl OpenSet {
    pub fn whole(dim: usize) -> Self {
        OpenSet::Whole { dim }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        OpenSet::Box { lo: vec![lo], hi: vec![hi] }
    }

    pub fn dim(&self) -> usize {
        match self {
            OpenSet::Whole { dim } => *dim,
            OpenSet::Box { lo, .. } => lo.len(),
        }
    }
}

/// `K_{Z,m} = {‖x‖∞ ≤ m, dist(x, Zᶜ) ≥ 1/m}`, realized as a closed box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactBox {
    pub m: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub empty: bool,
}

pub fn compact_box(z: &OpenSet, m: usize) -> Result<CompactBox> {
    if m == 0 {
        return Err(invalid("compact exhaustion index m must be at least 1"));
    }
    let mf = m as f64;
    let (lo, hi): (Vec<f64>, Vec<f64>) = match z {
        OpenSet::Whole { dim } => (vec![-mf; *dim], vec![mf; *dim]),
        OpenSet::Box { lo, hi } => {
            if lo.len() != hi.len() {
                return Err(invalid("box bounds have different dimensions"));
            }
            lo.iter().zip(hi).map(|(&a, &b)| ((a + 1.0 / mf).max(-mf), (b - 1.0 / mf).min(mf))).unzip()
        }
    };
    let empty = lo.iter().zip(&hi).any(|(a, b)| a > b);
    Ok(CompactBox { m, lo, hi, empty })
}

impl CompactBox {
    pub fn contains(&self, x: &[f64]) -> bool {
        !self.empty && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Tensor grid with `n` points per axis including the endpoints.
    pub fn grid(&self, n: usize) -> Vec<Vec<f64>> {
        if self.empty {
            return Vec::new();
        }
        let axes: Vec<Vec<f64>> = self.lo.iter().zip(&self.hi).map(|(&a, &b)| axis(a, b, n)).collect();
        tensor(&axes)
    }
}

/// `n` equispaced points on `[a, b]`; refining `n → 2n − 1` keeps all old points.
pub fn axis(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 || a == b {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn tensor(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for ax in axes {
        let mut next = Vec::with_capacity(out.len() * ax.len());
        for prefix in &out {
            for &v in ax {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Sample points of the unit sphere `∂B ⊂ ℝⁿ`: `{−1, +1}` in 1-D, normalized
/// cube-surface grid points otherwise.
pub fn unit_sphere(n: usize, points_per_axis: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![-1.0], vec![1.0]];
    }
    let ax = axis(-1.0, 1.0, points_per_axis.max(2));
    tensor(&vec![ax; n])
        .into_iter()
        .filter(|p| p.iter().any(|v| v.abs() == 1.0))
        .map(|p| {
            let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            p.into_iter().map(|v| v / r).collect()
        })
        .collect()
}

/// Where and how finely the seminorm scans sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_set: OpenSet,
    pub y_set: OpenSet,
    pub points_per_axis: usize,
    #[serde(default = "default_sphere")]
    pub sphere_points: usize,
}

fn default_sphere() -> usize {
    5
}

impl GridSpec {
    pub fn whole_line(points_per_axis: usize) -> Self {
        GridSpec { x_set: OpenSet::whole(1), y_set: OpenSet::whole(1), points_per_axis, sphere_points: 5 }
    }

    pub fn new(x_set: OpenSet, y_set: OpenSet, points_per_axis: usize) -> Self {
        GridSpec { x_set, y_set, points_per_axis, sphere_points: 5 }
    }

    /// Midpoint refinement; the refined grid contains this one.
    pub fn refined(&self) -> Self {
        GridSpec {
            points_per_axis: 2 * self.points_per_axis.max(1) - 1,
            sphere_points: 2 * self.sphere_points.max(1) - 1,
            ..self.clone()
        }
    }

    fn boxes(&self, m: usize) -> Result<(CompactBox, CompactBox)> {
        let kx = compact_box(&self.x_set, m)?;
        let ky = compact_box(&self.y_set, m)?;
        if kx.empty || ky.empty {
            return Err(Error::EmptyBox);
        }
        Ok((kx, ky))
    }

    /// Points `(x, y, ω)` over `K_{X,m} × K_{Y,m} × ∂B`, scanned x-major.
    pub fn unit_points(&self, sig: Signature, m: usize) -> Result<Vec<Point>> {
        self.scaled_points(sig, m, &[1.0])
    }

    /// Points `(x, y, r·ω)` for each radius `r`, scanned x-major then y, radius, direction.
    pub fn scaled_points(&self, sig: Signature, m: usize, radii: &[f64]) -> Result<Vec<Point>> {
        if self.x_set.dim() != sig.nx || self.y_set.dim() != sig.ny {
            return Err(invalid(format!("grid sets do not match signature {sig:?}")));
        }
        let (kx, ky) = self.boxes(m)?;
        let xs = kx.grid(self.points_per_axis);
        let ys = ky.grid(self.points_per_axis);
        let dirs = if sig.nxi == 0 { vec![Vec::new()] } else { unit_sphere(sig.nxi, self.sphere_points) };
        let mut out = Vec::with_capacity(xs.len() * ys.len() * dirs.len() * radii.len());
        for x in &xs {
            for y in &ys {
                for &r in radii {
                    for w in &dirs {
                        let xi: Vec<f64> = w.iter().map(|v| v * r).collect();
                        out.push(Point::new(x, y, &xi)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub points_per_axis: usize,
    pub sphere_points: usize,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    /// Flattened multi-index `(j, k, l)` attaining the value.
    pub index: Vec<u8>,
}

/// Grid supremum of a seminorm; a certified lower bound of the true value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub m: usize,
    pub value: f64,
    pub grid: GridInfo,
    pub witness: Option<Witness>,
    /// Per-radius suprema `(‖ξ‖, value)` for amplitude scans.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scale_profile: Vec<(f64, f64)>,
    /// Amplitude scans only: whether the weighted suprema stay bounded across scales.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_class: Option<bool>,
}

/// A phase function: a real map, positively homogeneous of degree 1 in ξ.
#[derive(Clone, Debug)]
pub struct PhaseFunction {
    pub map: Arc<dyn SmoothMap>,
}

impl PhaseFunction {
    pub fn new(map: Arc<dyn SmoothMap>) -> Self {
        PhaseFunction { map }
    }

    pub fn signature(&self) -> Signature {
        self.map.signature()
    }

    /// Declared homogeneity degree in ξ.
    pub fn degree(&self) -> f64 {
        1.0
    }
}

/// A possibly complex amplitude `a = re + i·im` with declared symbol class `S^d_{ρ,δ}`.
#[derive(Clone, Debug)]
pub struct Amplitude {
    pub re: Arc<dyn SmoothMap>,
    pub im: Option<Arc<dyn SmoothMap>>,
    pub d: f64,
    pub rho: f64,
    pub delta: f64,
}

impl Amplitude {
    pub fn new(re: Arc<dyn SmoothMap>, d: f64, rho: f64, delta: f64) -> Result<Self> {
        Self::complex(re, None, d, rho, delta)
    }

    pub fn complex(re: Arc<dyn SmoothMap>, im: Option<Arc<dyn SmoothMap>>, d: f64, rho: f64, delta: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(invalid("ρ must lie in (0, 1]"));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(invalid("δ must lie in [0, 1)"));
        }
        if let Some(im) = &im {
            if im.signature() != re.signature() {
                return Err(invalid("real and imaginary parts have different signatures"));
            }
        }
        Ok(Amplitude { re, im, d, rho, delta })
    }

    /// The constant amplitude `c` of class `S⁰_{1,0}`.
    pub fn constant(sig: Signature, c: f64) -> Self {
        Amplitude { re: Arc::new(crate::jets::ConstantMap::new(sig, c)), im: None, d: 0.0, rho: 1.0, delta: 0.0 }
    }

    pub fn signature(&self) -> Signature {
        self.re.signature()
    }

    /// Complex Taylor series in the active coordinates.
    pub fn series(&self, p: &Point, order: usize, vars: VarSet) -> Result<crate::jets::ComplexSeries> {
        let re = self.re.series(p, order, vars)?;
        let mut c = re.to_complex();
        if let Some(im) = &self.im {
            let s = im.series(p, order, vars)?;
            for (z, v) in c.coeffs_mut().iter_mut().zip(s.coeffs()) {
                z.im = *v;
            }
        }
        Ok(c)
    }

    pub fn localize(&self, x0: &[f64], order: usize) -> Result<Amplitude> {
        Ok(Amplitude {
            re: crate::jets::localized(&self.re, x0, order)?,
            im: match &self.im {
                Some(im) => Some(crate::jets::localized(im, x0, order)?),
                None => None,
            },
            ..self.clone()
        })
    }
}

fn grid_info(spec: &GridSpec, samples: usize) -> GridInfo {
    GridInfo { points_per_axis: spec.points_per_axis, sphere_points: spec.sphere_points, samples }
}

/// `p_m(Φ) = sup |∂^j_x ∂^k_y ∂^l_ξ Φ|` over `K_{X,m} × K_{Y,m} × ∂B`, `|j|+|k|+|l| ≤ m`.
pub fn seminorm_p(phi: &PhaseFunction, m: usize, grid: &GridSpec) -> Result<SeminormReport> {
    let sig = phi.signature();
    let pts = grid.unit_points(sig, m)?;
    let mut best = 0.0;
    let mut witness = None;
    for p in &pts {
        let jet = phi.map.jet(p, m)?;
        for (idx, v) in jet.entries() {
            if v.abs() > best {
                best = v.abs();
                witness = Some(Witness { point: p.flat().to_vec(), index: idx.flat()[..sig.total()].to_vec() });
            }
        }
    }
    Ok(SeminormReport { m, value: best, grid: grid_info(grid, pts.len()), witness, scale_profile: vec![], in_class: None })
}

/// `q_m(a) = sup ⟨ξ⟩^{−d+ρ|l|−δ(|j|+|k|)} |∂^j ∂^k ∂^l a|` over the grid and the radii `xi_samples`.
pub fn seminorm_q(a: &Amplitude, m: usize, grid: &GridSpec, xi_samples: &[f64]) -> Result<SeminormReport> {
    let sig = a.signature();
    if xi_samples.is_empty() {
        return Err(invalid("seminorm_q needs at least one ξ radius"));
    }
    let pts = grid.scaled_points(sig, m, xi_samples)?;
    let mut best = 0.0;
    let mut witness = None;
    let mut per_radius: Vec<(f64, f64)> = xi_samples.iter().map(|&r| (r, 0.0)).collect();
    for p in &pts {
        let s = a.series(p, m, VarSet::all(sig.total()))?;
        let norm = p.xi_norm();
        let bracket = (1.0 + norm * norm).sqrt();
        let slot = xi_samples.iter().position(|&r| (r - norm).abs() <= 1e-12 * r.max(1.0)).unwrap_or(0);
        let l = s.layout();
        for i in 0..s.coeffs().len() {
            let idx = MultiIndex::from_flat(sig, *l.exponents(i));
            let (j, k, lx) = (idx.block_total(Block::X), idx.block_total(Block::Y), idx.block_total(Block::Xi));
            let w = bracket.powf(-a.d + a.rho * lx as f64 - a.delta * (j + k) as f64);
            let v = w * (s.coeffs()[i] * l.factorial(i)).norm();
            if v > per_radius[slot].1 {
                per_radius[slot].1 = v;
            }
            if v > best {
                best = v;
                witness = Some(Witness { point: p.flat().to_vec(), index: idx.flat()[..sig.total()].to_vec() });
            }
        }
    }
    let in_class = Some(class_flag(&per_radius));
    Ok(SeminormReport {
        m,
        value: best,
        grid: grid_info(grid, pts.len()),
        witness,
        scale_profile: per_radius,
        in_class,
    })
}

/// Weighted suprema of a symbol stay bounded across dyadic scales; growth
/// (a positive log-log slope over the upper half of the radii) flags a non-member.
fn class_flag(profile: &[(f64, f64)]) -> bool {
    let pts: Vec<(f64, f64)> = profile
        .iter()
        .filter(|(r, v)| *r >= 1.0 && *v > 0.0)
        .map(|(r, v)| ((1.0 + r * r).sqrt().ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return true;
    }
    let upper = &pts[pts.len() / 2..];
    let slope = if upper.len() >= 2 { fit_slope(upper) } else { fit_slope(&pts) };
    slope <= 0.1
}

/// Least-squares slope of `(u, v)` pairs.
pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mu = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - mu) * (p.1 - mv)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mu) * (p.0 - mu)).sum();
    num / den
}

/// `π_{X,m}(v) = sup_{x ∈ K_{X,m}, |j| ≤ m} |∂^j v(x)|` for a map on `X`.
pub fn seminorm_pi(v: &dyn SmoothMap, x_set: &OpenSet, m: usize, points_per_axis: usize) -> Result<SeminormReport> {
    let sig = v.signature();
    if sig.ny != 0 || sig.nxi != 0 {
        return Err(invalid("seminorm_pi expects a function of x only"));
    }
    let kx = compact_box(x_set, m)?;
    if kx.empty {
        return Err(Error::EmptyBox);
    }
    let xs = kx.grid(points_per_axis);
    let mut best = 0.0;
    let mut witness = None;
    for x in &xs {
        let p = Point::new(x, &[], &[])?;
        for (idx, val) in v.jet(&p, m)?.entries() {
            if val.abs() > best {
                best = val.abs();
                witness = Some(Witness { point: x.clone(), index: idx.flat()[..sig.total()].to_vec() });
            }
        }
    }
    Ok(SeminormReport {
        m,
        value: best,
        grid: GridInfo { points_per_axis, sphere_points: 0, samples: xs.len() },
        witness,
        scale_profile: vec![],
        in_class: None,
    })
}

/// Sampled x-derivatives of a complex field: `derivs[i][j] = ∂^j v(x_i)` in one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeField {
    pub x: Vec<f64>,
    pub derivs: Vec<Vec<Complex64>>,
}

impl DerivativeField {
    pub fn order(&self) -> usize {
        self.derivs.first().map_or(0, |d| d.len().saturating_sub(1))
    }

    pub fn sub(&self, o: &DerivativeField) -> Result<DerivativeField> {
        if self.x != o.x || self.order() != o.order() {
            return Err(invalid("derivative fields live on different grids"));
        }
        let derivs = self
            .derivs
            .iter()
            .zip(&o.derivs)
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u - v).collect())
            .collect();
        Ok(DerivativeField { x: self.x.clone(), derivs })
    }
}

/// `π_{X,m}` of sampled derivative data restricted to `K_{X,m}`.
pub fn seminorm_pi_sampled(v: &DerivativeField, x_set: &OpenSet, m: usize) -> Result<SeminormReport> {
    if v.order() < m {
        return Err(Error::OrderExceeded { requested: m, max: v.order() });
    }
    let kx = compact_box(x_set, m)?;
    if kx.empty {
        return Err(Error::EmptyBox);
    }
    let mut best = 0.0;
    let mut witness = None;
    let mut samples = 0;
    for (x, d) in v.x.iter().zip(&v.derivs) {
        if !kx.contains(&[*x]) {
            continue;
        }
        samples += 1;
        for (j, val) in d.iter().enumerate().take(m + 1) {
            if val.norm() > best {
                best = val.norm();
                witness = Some(Witness { point: vec![*x], index: vec![j as u8] });
            }
        }
    }
    Ok(SeminormReport {
        m,
        value: best,
        grid: GridInfo { points_per_axis: v.x.len(), sphere_points: 0, samples },
        witness,
        scale_profile: vec![],
        in_class: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub max_residual: f64,
    pub homogeneous: bool,
    pub witness: Option<Vec<f64>>,
    pub lambda: Option<f64>,
}

/// Residuals beyond this flag a phase as not positively homogeneous.
pub const HOMOGENEITY_TOL: f64 = 1e-10;

/// `max |Φ(x,y,λξ) − λΦ(x,y,ξ)| / (1 + λ|Φ(x,y,ξ)|)` over the grid (ξ at radii ½, 1, 3) and `λ`.
pub fn check_homogeneity(phi: &PhaseFunction, lambdas: &[f64], grid: &GridSpec, m: usize) -> Result<HomogeneityReport> {
    let sig = phi.signature();
    let pts = grid.scaled_points(sig, m, &[0.5, 1.0, 3.0])?;
    let mut worst = 0.0;
    let mut witness = None;
    let mut lambda = None;
    for p in &pts {
        let base = phi.map.value(p)?;
        for &lam in lambdas {
            if !(lam > 0.0) {
                return Err(invalid("λ must be positive"));
            }
            let mut q = *p;
            for i in 0..sig.nxi {
                let c = sig.coord(Block::Xi, i);
                q.set_coord(c, p.coord(c) * lam);
            }
            let r = (phi.map.value(&q)? - lam * base).abs() / (1.0 + lam * base.abs());
            if r > worst {
                worst = r;
                witness = Some(p.flat().to_vec());
                lambda = Some(lam);
            }
        }
    }
    Ok(HomogeneityReport { max_residual: worst, homogeneous: worst < HOMOGENEITY_TOL, witness, lambda })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub pass: bool,
    pub alpha: f64,
    pub min_observed: f64,
    /// Minima of `‖(‖ξ‖⁻¹∇_x, ∇_ξ)Φ‖²` and `‖(‖ξ‖⁻¹∇_y, ∇_ξ)Φ‖²` separately.
    pub min_x_condition: f64,
    pub min_y_condition: f64,
    pub witness: Option<Vec<f64>>,
    pub samples: usize,
    /// The check only covers `K_{X,m} × K_{Y,m}`; membership on all of `X` is not certified.
    pub region: String,
}

/// Both squared mixed gradient norms at one point.
pub fn alpha_conditions(phi: &dyn SmoothMap, p: &Point) -> Result<(f64, f64)> {
    let sig = phi.signature();
    let jet = phi.jet(p, 1)?;
    let s = jet.series();
    let norm = p.xi_norm();
    let grad = |b: Block| -> f64 {
        (0..sig.block_len(b))
            .map(|i| {
                let mut e = [0u8; crate::jets::MAX_VARS];
                e[sig.coord(b, i)] = 1;
                s.coeff(&e).powi(2)
            })
            .sum()
    };
    let gx = grad(Block::X) / (norm * norm);
    let gy = grad(Block::Y) / (norm * norm);
    let gxi = grad(Block::Xi);
    Ok((gx + gxi, gy + gxi))
}

/// Certify `Φ ∈ M_α` on `K_{X,m} × K_{Y,m} × ∂B`.
pub fn check_alpha_membership(phi: &PhaseFunction, alpha: f64, grid: &GridSpec, m: usize) -> Result<AlphaReport> {
    let pts = grid.unit_points(phi.signature(), m)?;
    let (mut mx, mut my) = (f64::INFINITY, f64::INFINITY);
    let mut min = f64::INFINITY;
    let mut witness = None;
    for p in &pts {
        let (a, b) = alpha_conditions(phi.map.as_ref(), p)?;
        mx = mx.min(a);
        my = my.min(b);
        if a.min(b) < min {
            min = a.min(b);
            witness = Some(p.flat().to_vec());
        }
    }
    let (kx, ky) = grid.boxes(m)?;
    Ok(AlphaReport {
        pass: min >= alpha,
        alpha,
        min_observed: min,
        min_x_condition: mx,
        min_y_condition: my,
        witness,
        samples: pts.len(),
        region: format!("K_X,{m} = {:?}..{:?}, K_Y,{m} = {:?}..{:?} (compact restriction only)", kx.lo, kx.hi, ky.lo, ky.hi),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBoundReport {
    pub m: usize,
    pub p_m: f64,
    /// Smallest `C` with `|∂^j∂^k∂^l Φ| ≤ C ‖ξ‖^{1−|l|} p_m(Φ)` over the sample.
    pub constant: f64,
    /// Largest relative spread of `|∂Φ(x,y,λω)| / λ^{1−|l|}` across the radii.
    pub max_ratio_spread: f64,
    /// Largest deviation of a fitted log-log exponent from `1 − |l|`.
    pub max_exponent_deviation: f64,
    pub radii: Vec<f64>,
}

/// Derivative bound of a homogeneous phase over ξ at the given radii.
pub fn check_derivative_bound(phi: &PhaseFunction, m: usize, grid: &GridSpec, radii: &[f64]) -> Result<DerivativeBoundReport> {
    let sig = phi.signature();
    let pm = seminorm_p(phi, m, grid)?.value;
    let dirs = grid.unit_points(sig, m)?;
    let mut constant: f64 = 0.0;
    let mut spread: f64 = 0.0;
    let mut dev: f64 = 0.0;
    for p in &dirs {
        let mut tables = Vec::with_capacity(radii.len());
        for &r in radii {
            let mut q = *p;
            for i in 0..sig.nxi {
                let c = sig.coord(Block::Xi, i);
                q.set_coord(c, p.coord(c) * r);
            }
            tables.push(phi.map.jet(&q, m)?.entries());
        }
        for e in 0..tables[0].len() {
            let l = tables[0][e].0.block_total(Block::Xi) as f64;
            let ratios: Vec<f64> = radii.iter().zip(&tables).map(|(&r, t)| t[e].1.abs() / r.powf(1.0 - l)).collect();
            let hi = ratios.iter().cloned().fold(0.0, f64::max);
            let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            if hi > 1e-300 {
                if pm == 0.0 {
                    return Err(Error::Inconsistent("p_m(Φ) = 0 but a derivative is nonzero".into()));
                }
                constant = constant.max(hi / pm);
            }
            if hi > 1e-12 {
                spread = spread.max((hi - lo) / hi);
                if radii.len() >= 2 && lo > 0.0 {
                    let pts: Vec<(f64, f64)> =
                        radii.iter().zip(&tables).map(|(&r, t)| (r.ln(), t[e].1.abs().ln())).collect();
                    dev = dev.max((fit_slope(&pts) - (1.0 - l)).abs());
                }
            }
        }
    }
    Ok(DerivativeBoundReport {
        m,
        p_m: pm,
        constant,
        max_ratio_spread: spread,
        max_exponent_deviation: dev,
        radii: radii.to_vec(),
    })
}

/// Effective-support threshold of test functions: beyond it `|ψ| < 1e−17`.
pub const SUPPORT_THRESHOLD: f64 = 1e-17;

/// A test function on `ℝⁿ` with a box outside which it is negligible.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub map: Arc<dyn SmoothMap>,
    /// `None` for the zero function.
    pub support: Option<Vec<(f64, f64)>>,
}

impl TestFunction {
    /// `map` must have signature `(n, 0, 0)`; `support` bounds where it is non-negligible.
    pub fn new(map: Arc<dyn SmoothMap>, support: Option<Vec<(f64, f64)>>) -> Result<Self> {
        let sig = map.signature();
        if sig.ny != 0 || sig.nxi != 0 {
            return Err(invalid("test functions take a single block of variables"));
        }
        if let Some(s) = &support {
            if s.len() != sig.nx || s.iter().any(|(a, b)| !(a <= b)) {
                return Err(invalid("test function support does not match its dimension"));
            }
        }
        Ok(TestFunction { map, support })
    }

    /// `scale · exp(−((v − center)/width)²)` on the line.
    pub fn gaussian(center: f64, width: f64, scale: f64) -> Result<Self> {
        let sig = Signature { nx: 1, ny: 0, nxi: 0 };
        let map = crate::jets::GaussianBump::new(sig, Block::X, 0, center, width, scale)?;
        let support = if scale.abs() > SUPPORT_THRESHOLD {
            let h = width * (scale.abs() / SUPPORT_THRESHOLD).ln().sqrt();
            Some(vec![(center - h, center + h)])
        } else {
            None
        };
        Self::new(Arc::new(map), support)
    }

    pub fn dim(&self) -> usize {
        self.map.signature().nx
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_none()
    }

    pub fn value(&self, v: &[f64]) -> Result<f64> {
        self.map.value(&Point::new(v, &[], &[])?)
    }

    /// Taylor series in all `n` variables at `v`.
    pub fn series(&self, v: &[f64], order: usize) -> Result<crate::jets::RealSeries> {
        self.map.series(&Point::new(v, &[], &[])?, order, VarSet::all(v.len()))
    }
}
