// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod dtn;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod oracle;
pub mod quad;
pub mod specfun;
pub mod volterra;

pub use curve::{BoundaryCurve, CubicSpline, CurveKind, SlopeInverse};
pub use error::{Error, Result};
pub use grid::{ComplexSignal, TimeGrid};
