//! Entanglement and basis-class quantum coherence for small multiparty
//! quantum systems.

pub mod coherence;
pub mod entanglement;
pub mod entropy;
pub mod error;
pub mod harness;
pub mod locc;
pub mod optim;
pub mod qmat;

pub use error::{Error, Result};
