//! Smooth maps and their derivative jets.
//!
//! Every derivative used by the regularizer, the seminorm checks and the
//! applications flows through [`SmoothMap::series`], which returns a
//! truncated Taylor series in a chosen subset of coordinates. Coordinates
//! outside the subset are frozen, which keeps inner quadrature loops small.

mod families;
mod fd;
mod layout;
mod map;
mod series;
pub mod univariate;

pub use families::{
    builtin_map, builtin_map_from_json, BracketSymbol, ConstantMap, ExpMap, GaussianBump, LinearPhase, MapSpec,
    Monomial, Oscillation, Part, PhaseProfile, Polynomial, ProductMap, ScaledNormPhase, SumMap, TabulatedPhase,
    TrigPolynomial, TrigTerm, FAMILIES,
};
pub use fd::{fd_jet, fd_jet_richardson};
pub use layout::{entries, layout, Exponents, Layout, MAX_ORDER, MAX_VARS};
pub use map::{jet_div, jet_linear, jet_mul, localized, Block, Jet, MultiIndex, Point, Signature, SmoothMap, VarSet};
pub use series::{ComplexSeries, RealSeries, Scalar, Series};
