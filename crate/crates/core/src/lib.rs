//! Combinatorics and numerics of rational functions with real critical
//! points: nets and their labelings, critical-sequence polytopes, and a
//! homotopy solver for the Wronski map with net classification of solutions.

pub mod critpoly;
pub mod error;
pub mod labelpoly;
pub mod netcomb;
pub mod nettrace;
pub mod numcore;
pub mod render;
pub mod solver;

pub use error::{Error, Result};
