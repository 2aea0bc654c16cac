//! Exact tools for secure network coding and secure index coding.
//!
//! The crate implements both instance mappings between the two problems,
//! the code translations in each direction, an exact verifier for
//! zero-error decodability and information-theoretic security, and a
//! bounded exhaustive search that certifies feasibility of desk-scale
//! instances. Everything that decides a pass/fail question does so by
//! exhaustive enumeration with integer counting.

pub mod cli;
pub mod format;
pub mod model;
pub mod search;
pub mod tables;
pub mod transform;
pub mod translate;
pub mod verify;

pub use model::{Alphabet, IndexInstance, NetworkInstance};
pub use tables::FiniteFunction;
pub use translate::{IndexCode, NetworkCode};
