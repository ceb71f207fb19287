//! Steering activation in entanglement-swapping networks.
//!
//! Two-qubit states are swapped through a Bell measurement (linear chain) or an
//! eight-outcome measurement (three-link star), and the conditional states are
//! tested with steering and Bell-locality criteria.

pub mod bloch;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod families;
pub mod netswap;
pub mod optimize;
pub mod qmat;
pub mod sweep;

pub use error::{Error, Result};
