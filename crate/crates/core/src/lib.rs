//! Design and verification routines for low-power mm-wave phased-array
//! receive chains: array tapers and patterns, transformer-coupled input
//! matching networks, cascade budgets, and measured-data extraction.

// Negated comparisons double as NaN rejection in input validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod matchnet;
pub mod netcore;
pub mod nodal;
pub mod pattern;
pub mod rxbudget;
pub mod taper;
pub mod tsio;

pub use netcore::{FrequencyGrid, Immittance, NoiseSpec, TwoPortNetwork, C64};
