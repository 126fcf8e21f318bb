//! Computational paths over the untyped λ-calculus.
//!
//! A computational path is a proof of equality between two terms, built from
//! basic β/η/α steps and the closure rules of the equality theory (ρ, σ, τ,
//! ξ, μ, ν). Paths are first-class expression trees with endpoints at every
//! node. A small rewrite system over paths removes redundancies such as
//! `sigma(sigma(r))`; its traces are themselves paths one level up, which is
//! what makes the groupoid and globular structure checkable by machine.
//!
//! Module map:
//! - [`term`]: λ-terms, substitution, α-equivalence, β/η contraction.
//! - [`path`]: path expressions, endpoint tracking, path search.
//! - [`rewrite`]: the seven-rule path rewrite system and its traces.
//! - [`kernel`]: derivation checker for the path-based identity type.
//! - [`groupoid`]: groupoid laws, path levels, globular sets.
//! - [`parse`]: concrete syntax for terms and paths.
//! - [`deriv`]: file format for derivations.

pub mod deriv;
pub mod groupoid;
pub mod kernel;
pub mod parse;
pub mod path;
pub mod rewrite;
pub mod term;

pub use path::{Endpoint, Path, PathError};
pub use rewrite::{RuleId, Trace};
pub use term::{RedexKind, RedexSite, Term, TermError};
