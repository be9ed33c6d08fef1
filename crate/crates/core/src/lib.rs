//! Core library for Bayesian quantum phase estimation with coherent probes.
//!
//! The crate models single-parameter phase estimation on a truncated Fock
//! space: coherent probe states, POVM measurements, discretized priors,
//! Fisher / Van Trees information functionals, measurement optimization
//! (analytic over a projector family, Monte-Carlo over random projective
//! measurements), and adaptive measurement schedules.

pub mod adaptive;
pub mod hilbert;
pub mod infotheory;
pub mod optimizer;
pub mod povm;
pub mod priors;
