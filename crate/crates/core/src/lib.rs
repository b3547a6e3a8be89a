//! Mod-p loop-space homology of highly connected Poincaré duality complexes.
//!
//! The loop homology of a `(n-2)`-connected `(2n-1)`-dimensional mod-p Poincaré
//! complex is computed as the quotient of a free tensor algebra by the two-sided
//! ideal of a single attaching element. On top of that the crate replays the formal
//! spectral sequence that certifies the quotient, produces loop-space
//! decompositions with their Hilbert series, and decides loop equivalence.

pub mod algebra;
pub mod attach;
pub mod classify;
pub mod cli;
pub mod complex;
pub mod decompose;
pub mod error;
pub mod loop_algebra;
pub mod spectral;

pub use error::{Error, Result};
