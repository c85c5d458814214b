//! Entangled photon pairs from a chi(2) photonic crystal and a beam splitter:
//! Fock-space amplitudes, photon statistics, band structure, source
//! parameters and BB84 sessions.

pub mod acceptance;
pub mod bands;
pub mod bb84;
pub mod commands;
pub mod config;
pub mod error;
pub mod fock;
pub mod numeric;
pub mod report;
pub mod source;
pub mod stats;

pub use error::{Error, Result};
