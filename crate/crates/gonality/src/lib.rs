//! Exact-arithmetic toolkit for divisor theory on metric graphs.
//!
//! A metric graph is presented by a combinatorial model: a connected graph
//! with strictly positive rational edge lengths. On top of that presentation
//! the crate provides chip-firing (reduced divisors, Baker-Norine rank),
//! indexed harmonic morphisms with independent verification, and synthesis of
//! degree-3 morphisms to metric trees (or trees of triangles) certifying
//! divisorial trigonality. All arithmetic is exact; there is no floating
//! point anywhere.

pub mod graph_core;
pub mod divisor_theory;
pub mod morphism;
pub mod synthesis;
pub mod cli_io;

pub use graph_core::rational::Rational;
