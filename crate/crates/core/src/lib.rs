//! Sampling and analysis of binomial `l`-gonal random group presentations.
//!
//! The crate samples presentations from the binomial, positive and
//! uniform-count models, certifies freeness by generator/relator elimination,
//! certifies Property FA through the exact (L) and (SL) covering checks,
//! computes abelian invariants, and runs reproducible parallel sweeps that
//! localize the free / splits / FA transitions.

pub mod abelianization;
pub mod error;
pub mod experiments;
pub mod fa;
pub mod freeness;
pub mod hypergraph;
pub mod model;
pub mod presentation;
pub mod words;

pub use error::{Error, Result};
pub use presentation::{ModelKind, ModelTag, Presentation};
pub use words::{Letter, Word};
