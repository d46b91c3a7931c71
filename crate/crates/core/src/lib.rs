//! Invasion percolation and critical Bernoulli bond percolation on Z².

pub mod cli;
pub mod connectivity;
pub mod error;
pub mod experiments;
pub mod invasion;
pub mod lattice;
pub mod oracle;
pub mod runner;
pub mod scaling;
pub mod stats;
pub mod unionfind;
pub mod weights;

pub use error::{Error, Result};
