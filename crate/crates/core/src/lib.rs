//! Multi-symplectic solvers and structure checks for the Serre-Green-Naghdi
//! shallow-water equations on a periodic domain.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod diff;
pub mod error;
pub mod grid;
pub mod integrators;
pub mod linalg;
pub mod reference;
pub mod scenarios;
pub mod structure;
pub mod verification;

pub use diff::{integrate, DiffKind, DiffOperator};
pub use error::{Error, Result};
pub use grid::{Field, Grid1D, Params, PhysicalState};
