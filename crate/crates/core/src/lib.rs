//! Translation-only equidecomposition on finite lattice windows.
//!
//! Two shapes on the torus T^k are pulled back along a coset of Z^d spanned by free
//! vectors; the resulting lattice sets are matched by bounded translations.

pub mod baire;
pub mod config;
pub mod discrepancy;
pub mod error;
pub mod geometry;
pub mod io;
pub mod lattice;
pub mod lebesgue;
pub mod matching;
pub mod oracle;
pub mod rng;
pub mod suites;
pub mod window;

pub use error::{Error, LoadError, Result};
