//! Numerical laboratory for Muckenhoupt weights on dyadic models of `[0,1)`
//! and the discrete circle.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: dyadic grids, interval families and O(1) interval averages.
//! * [`weight`]: weights, their constructions and the text serialisation.
//! * [`characteristic`]: `A_1`, `A_p`, `A_inf`, BMO and BLO suprema, the
//!   metric `d_*` and the helpers built on them.
//! * [`operators`] / [`norms`]: concrete operators and certified weighted
//!   operator norms.
//! * [`interpolation`]: Stein–Weiss parameters, geometric weight paths and
//!   the factorisation `w = w0^(1-t) W^t`.
//! * [`experiments`]: runnable sweeps and checks, with [`table`] for CSV output.
//!
//! Data-parallel reductions go through [`Exec`]; with the `parallel` feature
//! disabled every path runs sequentially.

// `!(x > 0.0)` style guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristic;
mod error;
pub mod exec;
pub mod experiments;
pub mod grid;
pub mod interpolation;
pub mod norms;
pub mod operators;
pub mod table;
pub mod weight;

pub use characteristic::{Analyzer, CharacteristicKind, CharacteristicReport};
pub use error::{Error, Result};
pub use exec::Exec;
pub use grid::{CircleGrid, Family, Grid, GridFunction, Interval};
pub use norms::{NormEstimate, NormMethod, NormOptions};
pub use operators::{OperatorSpec, SignPattern};
pub use weight::Weight;

/// Real cell-wise function viewed as an element of BMO.
pub type BmoFunction = GridFunction;
