//! Exact, desk-scale computations over ordinals below ε₀ and the
//! combinatorial structures built on top of them.
//!
//! The crate is organised in layers:
//!
//! - [`ord`] — Cantor-normal-form ordinal arithmetic and the canonical
//!   C-sequence assignment, with parsing and total ordering.
//! - [`walks`] — walk characteristics ρ, ρ₁, ρ₂, ρ̄ with memoization, traces,
//!   and exact sublevel-set enumeration.
//! - [`matrix`] — the abstract matrix interface, providers derived from walk
//!   characteristics, axiom verification, and unbounded-function search.
//! - [`group`] — the symmetric-difference group on finite ordinal sets,
//!   neighbourhoods, convergence, and topological group axiom checks.
//! - [`tree`] — explicit tree fragments, the induced tree matrix, and the
//!   ℓ∞ calculus on finite integer sequences.
//! - [`sets`] — decidable ω-set expressions, towers with certificates,
//!   pre-gaps, ρ_TO, splitter and two-sided neighbourhood checks.
//! - [`report`] — check records and deterministic reports (JSON/CSV/text).
//! - [`lab`] — the config-driven suite runner tying it all together.
//! - [`fixtures`] and [`sample`] — bundled example inputs and the
//!   deterministic ordinal sampler.
//!
//! Everything is exact and deterministic: no floating point, no wall-clock
//! dependence in canonical outputs, and every probabilistic choice is driven
//! by an explicit seed.

pub mod fixtures;
pub mod group;
pub mod lab;
pub mod matrix;
pub mod ord;
pub mod report;
pub mod sample;
pub mod sets;
pub mod tree;
pub mod walks;

pub use ord::Ordinal;
pub use report::{Report, Status};
