//! Certification toolkit for Majorana island lattices.

pub mod cache;
pub mod clifford;
pub mod error;
pub mod fock;
pub mod lattice;
pub mod model;
pub mod pipeline;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
