//! Level-k abelian Chern–Simons theory as an exact finite calculus.
//!
//! Layers, bottom up: [`zlattice`] (exact integer/rational kernels), [`symplectic`]
//! (Lagrangians, Maslov index, Sp(2g,Z) words), [`homology`] and [`torsion`] (simplicial
//! input), [`quantize`] (Bohr–Sommerfeld bases), [`intertwine`] (BKS operators) and
//! [`tqft`] (extended cobordisms, gluing, invariants). [`verify`] bundles the executable
//! axiom checks used by the CLI.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod zlattice;
pub mod symplectic;
pub mod phase;
pub mod homology;
pub mod triangulate;
pub mod torsion;
pub mod quantize;
pub mod intertwine;
pub mod tqft;
pub mod verify;

pub use error::{Error, Result};
