//! Numerical experiments around the fourth moment of Dirichlet L-functions
//! at the central point.
//!
//! The crate builds character groups modulo `q`, evaluates the smoothed
//! approximate functional equation for every character, and assembles
//! `sum* |L(1/2, chi)|^4` over primitive characters through two independent
//! routes: a naive per-character double sum ([`lfunc`]) and residue-class
//! weight tables pushed through a transform over the character group
//! ([`spectra`]). [`asymptotics`] holds the closed-form main terms and the
//! lemma-level sums that are checked against them.

pub mod arith;
pub mod asymptotics;
pub mod chargroup;
pub mod config;
pub mod error;
pub mod kernel;
pub mod lfunc;
pub mod pairs;
pub mod special;
pub mod spectra;
pub mod summation;
pub mod verify;

pub use error::{Error, Result};
