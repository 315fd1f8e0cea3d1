//! Order-by-order asymptotic solver for problems with symbolic structure.
//!
//! The generic engine lives in [`scheme`]; [`ode`], [`circle`] and [`wave`]
//! instantiate it on half-line ODEs, elliptic operators on the circle and
//! second-order strictly hyperbolic equations.

pub mod circle;
pub mod error;
pub mod numerics;
pub mod ode;
pub mod scalar;
pub mod scheme;
pub mod symbol;
pub mod wave;

pub use error::{CircleError, OdeError, ParseError, SchemeError, SymbolError, WaveError};
pub use scalar::{QComplex, Ring, Scalar};
pub use symbol::{dir_reflect, phg_add, phg_mul, Dir, DirPair, ExcisionCutoff, PolyhomExpansion};
