//! Stochastic SI epidemics on latent contact networks grown by a modified
//! preferential-attachment process, with likelihood evaluation and
//! Metropolis-within-Gibbs inference of the network and its parameters from
//! infection times and the transmission tree.

pub mod analysis;
pub mod episim;
pub mod error;
pub mod io;
pub mod likelihood;
pub mod mcmc;
pub mod netgen;
pub mod special;
pub mod study;
pub mod types;

pub use error::{Error, Result};
