//! De novo peptide sequencing from tandem mass spectra with a genetic
//! algorithm seeded from spectrum-derived sequence tags.
//!
//! The pipeline runs [`spectrum::preprocess`] on each MGF record, builds an
//! initial pool with [`tags::build_init_pool`] and evolves it with
//! [`engine::evolve`]. [`eval`] scores predictions against ground truth and
//! synthesizes spectra for testing.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks too

pub mod chem;
pub mod cli;
pub mod engine;
pub mod error;
pub mod eval;
pub mod spectrum;
pub mod tags;
pub mod theo;

pub use chem::{AminoAcid, Peptide};
pub use engine::{evolve, EvolutionResult, GaConfig, Individual};
pub use error::{Error, Result};
pub use spectrum::{Peak, PreprocessConfig, Spectrum};
pub use theo::{fitness, MatchResult, Scorer};
