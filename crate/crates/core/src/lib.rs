//! Point counts on non-split quaternary quadric cones under congruence
//! conditions, together with the local and global constants that predict
//! them.
//!
//! The crate is organised bottom-up: [`arith`] supplies exact elementary
//! number theory, [`quadform`] the form and its invariants, [`expsums`] the
//! complete exponential sums, [`localdens`] p-adic densities and the derived
//! measures, [`brauer`] Hilbert symbols and the obstruction density,
//! [`lattice`] exact enumeration, and [`singint`] the real density.

pub mod arith;
pub mod brauer;
pub mod cyclo;
pub mod error;
pub mod expsums;
pub mod lattice;
pub mod localdens;
pub mod quadform;
pub mod singint;

pub use error::{Error, Result};

pub use quadform::QuadraticForm;
