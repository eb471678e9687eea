//! Energy-conservative finite-difference schemes for the one-dimensional
//! periodic Zakharov equations
//!
//! ```text
//! i E_t + E_xx = N E,    N_tt - N_xx = (|E|^2)_xx,
//! ```
//!
//! with the auxiliary potential `V` (`N_t = V_xx`, `V_t = N + |E|^2`).
//!
//! The crate provides Glassey's linearly implicit scheme with three
//! choices of the first density level, the fully implicit DVDM scheme
//! solved by simplified Newton, exact dn-soliton references, invariant
//! tracking, and an experiment harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elliptic;
pub mod error;
pub mod exact;
pub mod grid;
pub mod harness;
pub mod invariants;
pub mod linalg;
pub mod schemes;

pub use error::{Error, Result};
pub use exact::{resolve_soliton, InitialData, InitialVariant, SolitonParams};
pub use grid::Grid;
