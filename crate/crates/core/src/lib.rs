//! Symbolic dynamics of suspended horseshoes: subshifts of finite type,
//! suspension flows with locally constant roofs, thermodynamic quantities,
//! loop selection and weaving, orbit/chord censuses, a 3-d affine model,
//! and linking numbers of its closed orbits.

pub mod error;
pub mod io;
pub mod scalar;
pub mod shift;
pub mod census;
pub mod linking;
pub mod model;
pub mod select;
pub mod suspension;
pub mod thermo;

pub use error::{Error, Result};
pub use scalar::{Rational, Real, Scalar};
pub use shift::{Necklace, Symbol, TransitionGraph, Word};
pub use suspension::{
    CylinderFunction, EpSequence, FlowPoint, PeriodicPoint, RoofFunction, SymbolSequence,
};

/// Roof function over `f64` values.
pub type Roof64 = suspension::RoofFunction<f64>;
/// Roof function with exact rational values.
pub type RoofQ = suspension::RoofFunction<Rational>;
/// Cylinder function over `f64` values.
pub type Cylinder64 = suspension::CylinderFunction<f64>;
