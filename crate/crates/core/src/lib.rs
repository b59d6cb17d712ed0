//! Syndrome-extraction circuits for generalized bicycle codes with sublattice
//! routing: schedule construction, stabilizer verification, coupler metrics,
//! multi-tier chip routing and circuit export.

pub mod absent;
pub mod circuit;
pub mod cli;
pub mod code;
pub mod emit;
pub mod error;
pub mod gf2;
pub mod metrics;
pub mod optimize;
pub mod router;
pub mod schedule;
pub mod tableau;
pub mod tracker;
pub mod verify;

pub use error::{Error, Result};
