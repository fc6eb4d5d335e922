//! Integer-constrained neural network training.
//!
//! This crate implements feed-forward networks whose parameters are driven
//! toward (or projected exactly onto) integer lattices during gradient
//! descent, together referred to as diophantine training. It provides:
//!
//! - dense linear algebra primitives ([`linalg`]),
//! - network construction and evaluation with certified output bounds and
//!   Lipschitz constants ([`network`]),
//! - reverse-mode gradients with a finite-difference oracle ([`grad`]),
//! - integer polynomial constraints, fixed-point encodings, integer
//!   projection, continued-fraction approximation, and lattice basis
//!   reduction ([`constraints`]),
//! - training loops with penalty terms and adversarial augmentation
//!   ([`training`]),
//! - robustness and stability analysis ([`analysis`]).

pub mod analysis;
pub mod constraints;
pub mod error;
pub mod grad;
pub mod linalg;
pub mod network;
pub mod training;

pub use error::{Error, Result};
