use super::layout::{layout, Exponents, MAX_ORDER, MAX_VARS};
use super::series::{RealSeries, Scalar, Series};
use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::fmt::Debug;
use std::sync::Arc;

/// Variable group of a coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    X,
    Y,
    Xi,
}

/// Dimension signature `(n_x, n_y, n_ξ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub nx: usize,
    pub ny: usize,
    pub nxi: usize,
}

impl Signature {
    pub const fn new(nx: usize, ny: usize, nxi: usize) -> Self {
        Signature { nx, ny, nxi }
    }

    pub fn total(&self) -> usize {
        self.nx + self.ny + self.nxi
    }

    pub fn block_len(&self, b: Block) -> usize {
        match b {
            Block::X => self.nx,
            Block::Y => self.ny,
            Block::Xi => self.nxi,
        }
    }

    pub fn offset(&self, b: Block) -> usize {
        match b {
            Block::X => 0,
            Block::Y => self.nx,
            Block::Xi => self.nx + self.ny,
        }
    }

    /// Flat coordinate index of `(block, i)`.
    pub fn coord(&self, b: Block, i: usize) -> usize {
        self.offset(b) + i
    }

    pub fn block_of(&self, c: usize) -> Block {
        if c < self.nx {
            Block::X
        } else if c < self.nx + self.ny {
            Block::Y
        } else {
            Block::Xi
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total() > MAX_VARS {
            return Err(invalid(format!("signature {self:?} has more than {MAX_VARS} coordinates")));
        }
        Ok(())
    }
}

/// A point of `X × Y × Ξ`, stored flat.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    sig: Signature,
    coords: [f64; MAX_VARS],
}

impl Point {
    pub fn new(x: &[f64], y: &[f64], xi: &[f64]) -> Result<Self> {
        let sig = Signature::new(x.len(), y.len(), xi.len());
        sig.validate()?;
        let mut coords = [0.0; MAX_VARS];
        for (d, s) in coords.iter_mut().zip(x.iter().chain(y).chain(xi)) {
            *d = *s;
        }
        Ok(Point { sig, coords })
    }

    pub fn from_flat(sig: Signature, flat: &[f64]) -> Self {
        let mut coords = [0.0; MAX_VARS];
        coords[..flat.len()].copy_from_slice(flat);
        Point { sig, coords }
    }

    /// One-dimensional shorthand `(x, y, ξ)`.
    pub fn scalar(x: f64, y: f64, xi: f64) -> Self {
        Self::from_flat(Signature::new(1, 1, 1), &[x, y, xi])
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn flat(&self) -> &[f64] {
        &self.coords[..self.sig.total()]
    }

    #[inline]
    pub fn coord(&self, c: usize) -> f64 {
        self.coords[c]
    }

    pub fn set_coord(&mut self, c: usize, v: f64) {
        self.coords[c] = v;
    }

    pub fn x(&self) -> &[f64] {
        &self.coords[..self.sig.nx]
    }

    pub fn y(&self) -> &[f64] {
        &self.coords[self.sig.nx..self.sig.nx + self.sig.ny]
    }

    pub fn xi(&self) -> &[f64] {
        &self.coords[self.sig.nx + self.sig.ny..self.sig.total()]
    }

    pub fn xi_norm(&self) -> f64 {
        self.xi().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Sub-point made of the given blocks only, other blocks dropped.
    pub fn restrict(&self, target: Signature) -> Point {
        let mut p = Point { sig: target, coords: [0.0; MAX_VARS] };
        for b in [Block::X, Block::Y, Block::Xi] {
            for i in 0..target.block_len(b) {
                p.coords[target.coord(b, i)] = self.coords[self.sig.coord(b, i)];
            }
        }
        p
    }
}

/// Set of active coordinates (bit `c` set when coordinate `c` carries a displacement).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VarSet(pub u8);

impl VarSet {
    pub const NONE: VarSet = VarSet(0);

    pub fn all(n: usize) -> Self {
        VarSet(((1u16 << n) - 1) as u8)
    }

    pub fn blocks(sig: Signature, blocks: &[Block]) -> Self {
        let mut m = 0u8;
        for &b in blocks {
            for i in 0..sig.block_len(b) {
                m |= 1 << sig.coord(b, i);
            }
        }
        VarSet(m)
    }

    pub fn with(self, c: usize) -> Self {
        VarSet(self.0 | (1 << c))
    }

    #[inline]
    pub fn contains(&self, c: usize) -> bool {
        self.0 & (1 << c) != 0
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.0.count_ones() as usize
    }

    /// Slot of coordinate `c` among the active coordinates.
    #[inline]
    pub fn slot(&self, c: usize) -> Option<usize> {
        if self.contains(c) {
            Some((self.0 & ((1u16 << c) - 1) as u8).count_ones() as usize)
        } else {
            None
        }
    }

    pub fn coords(&self) -> SmallVec<[usize; MAX_VARS]> {
        (0..MAX_VARS).filter(|&c| self.contains(c)).collect()
    }

    /// Active coordinates of `self` expressed in the coordinate numbering of `target`,
    /// where `map[c]` gives the target coordinate of source coordinate `c`.
    pub fn remap(&self, map: &[usize]) -> VarSet {
        let mut m = 0u8;
        for (c, &t) in map.iter().enumerate() {
            if self.contains(c) {
                m |= 1 << t;
            }
        }
        VarSet(m)
    }
}

/// Multi-index `(j, k, l)` over the x-, y- and ξ-blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    sig: Signature,
    e: Exponents,
}

impl MultiIndex {
    pub fn new(sig: Signature, j: &[u8], k: &[u8], l: &[u8]) -> Result<Self> {
        if j.len() != sig.nx || k.len() != sig.ny || l.len() != sig.nxi {
            return Err(invalid("multi-index blocks do not match the signature"));
        }
        let mut e = [0u8; MAX_VARS];
        for (d, s) in e.iter_mut().zip(j.iter().chain(k).chain(l)) {
            *d = *s;
        }
        Ok(MultiIndex { sig, e })
    }

    pub fn zero(sig: Signature) -> Self {
        MultiIndex { sig, e: [0; MAX_VARS] }
    }

    pub fn from_flat(sig: Signature, e: Exponents) -> Self {
        MultiIndex { sig, e }
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn flat(&self) -> &Exponents {
        &self.e
    }

    pub fn total(&self) -> usize {
        self.e.iter().map(|&v| v as usize).sum()
    }

    pub fn block_total(&self, b: Block) -> usize {
        let o = self.sig.offset(b);
        self.e[o..o + self.sig.block_len(b)].iter().map(|&v| v as usize).sum()
    }

    /// All multi-indices of total order `<= m`, in graded order.
    pub fn all_up_to(sig: Signature, m: usize) -> Vec<MultiIndex> {
        let l = layout(sig.total());
        (0..l.len(m)).map(|i| MultiIndex { sig, e: *l.exponents(i) }).collect()
    }
}

/// Values of a function and all partials up to `order` at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T = f64> {
    point: Point,
    series: Series<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn from_series(point: Point, series: Series<T>) -> Self {
        debug_assert_eq!(series.nvars(), point.signature().total());
        Jet { point, series }
    }

    pub fn point(&self) -> &Point {
        &self.point
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    pub fn series(&self) -> &Series<T> {
        &self.series
    }

    pub fn value(&self) -> T {
        self.series.value()
    }

    /// `∂^j_x ∂^k_y ∂^l_ξ f` at the base point.
    pub fn get(&self, idx: &MultiIndex) -> Result<T> {
        if idx.signature() != self.point.signature() {
            return Err(invalid("multi-index signature differs from the jet"));
        }
        if idx.total() > self.order() {
            return Err(Error::OrderExceeded { requested: idx.total(), max: self.order() });
        }
        Ok(self.series.derivative(idx.flat()))
    }

    /// Every `(multi-index, derivative)` pair of the table.
    pub fn entries(&self) -> Vec<(MultiIndex, T)> {
        let sig = self.point.signature();
        let l = self.series.layout();
        (0..l.len(self.order()))
            .map(|i| (MultiIndex::from_flat(sig, *l.exponents(i)), self.series.coeffs()[i].scale(l.factorial(i))))
            .collect()
    }

    fn check_compatible(&self, o: &Self) -> Result<()> {
        if self.point != o.point {
            return Err(Error::MismatchedJets("different base points".into()));
        }
        if self.order() != o.order() {
            return Err(Error::MismatchedJets(format!("orders {} and {}", self.order(), o.order())));
        }
        Ok(())
    }
}

/// Leibniz product of two jets at the same point and order.
pub fn jet_mul<T: Scalar>(a: &Jet<T>, b: &Jet<T>) -> Result<Jet<T>> {
    a.check_compatible(b)?;
    Ok(Jet { point: a.point, series: a.series.mul(&b.series) })
}

/// Recursive quotient of two jets at the same point and order.
pub fn jet_div<T: Scalar>(a: &Jet<T>, b: &Jet<T>) -> Result<Jet<T>> {
    a.check_compatible(b)?;
    Ok(Jet { point: a.point, series: a.series.div(&b.series)? })
}

/// `c1·a + c2·b`.
pub fn jet_linear<T: Scalar>(c1: T, a: &Jet<T>, c2: T, b: &Jet<T>) -> Result<Jet<T>> {
    a.check_compatible(b)?;
    Ok(Jet { point: a.point, series: a.series.scale_by(c1).add(&b.series.scale_by(c2)) })
}

/// A smooth real map on `X × Y × Ξ` with exact jet access.
pub trait SmoothMap: Send + Sync + Debug {
    fn signature(&self) -> Signature;

    fn max_order(&self) -> usize {
        MAX_ORDER
    }

    fn describe(&self) -> String;

    /// Taylor series at `p` in the active coordinates `vars` (others frozen), truncated at `order`.
    fn series(&self, p: &Point, order: usize, vars: VarSet) -> Result<RealSeries>;

    /// A copy specialized to the x-coordinates `x0`, valid only at points with that x.
    /// `None` means the map is already cheap to evaluate repeatedly.
    fn localize(&self, _x0: &[f64], _order: usize) -> Result<Option<Arc<dyn SmoothMap>>> {
        Ok(None)
    }

    /// Full jet in all coordinates.
    fn jet(&self, p: &Point, order: usize) -> Result<Jet> {
        check_call(self.signature(), self.max_order(), p, order)?;
        let s = self.series(p, order, VarSet::all(p.signature().total()))?;
        Ok(Jet { point: *p, series: s })
    }

    fn value(&self, p: &Point) -> Result<f64> {
        check_call(self.signature(), self.max_order(), p, 0)?;
        Ok(self.series(p, 0, VarSet::NONE)?.value())
    }
}

pub(crate) fn check_call(sig: Signature, max: usize, p: &Point, order: usize) -> Result<()> {
    if p.signature() != sig {
        return Err(invalid(format!("point signature {:?} differs from map signature {:?}", p.signature(), sig)));
    }
    if order > max {
        return Err(Error::OrderExceeded { requested: order, max });
    }
    Ok(())
}

/// Localize when the map offers it, otherwise keep the shared handle.
pub fn localized(map: &Arc<dyn SmoothMap>, x0: &[f64], order: usize) -> Result<Arc<dyn SmoothMap>> {
    Ok(map.localize(x0, order)?.unwrap_or_else(|| map.clone()))
}
