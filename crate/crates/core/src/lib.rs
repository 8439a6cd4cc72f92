//! Exact desk-scale simulation of the Gauss-sum square-free decomposition
//! algorithm.
//!
//! * [`numtheory`]: binary GCD / Jacobi algorithms and trial-division oracles.
//! * [`gauss`]: Gauss sums of the Jacobi character and their identities.
//! * [`qsim`]: arithmetic-level statevector simulation of the subroutine Ω.
//! * [`reversible`]: bit-level reversible GCD and Jacobi circuits.
//! * [`driver`]: the recursive decomposition and its failure bounds.
//! * [`costmodel`]: asymptotic cost curves for the three competing methods.

pub mod costmodel;
pub mod driver;
pub mod error;
pub mod gauss;
pub mod numtheory;
pub mod qsim;
pub mod reversible;

pub use error::{Error, Result};
