//! Seeded instance generation, experiment sweeps, mechanism property checks
//! and file I/O for the federated-learning auction.

pub mod checks;
pub mod config;
pub mod generate;
pub mod io;
pub mod summary;
pub mod sweep;
