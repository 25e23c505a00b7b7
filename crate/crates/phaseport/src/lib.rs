//! Numerical analysis of planar C1 vector fields given as expression pairs.
//!
//! The crate parses a field X = (f, g), differentiates it exactly with
//! forward-mode dual numbers, and then builds evidence about its global
//! phase portrait:
//!
//! - [`spectral`] samples trace/determinant of the Jacobian over a region
//!   and classifies the field (Hurwitz almost everywhere, purely imaginary
//!   spectrum almost everywhere, or mixed);
//! - [`singular`] locates and classifies singularities and reports whether
//!   the singular set looks empty, like a single point, non-discrete, or
//!   like several isolated points;
//! - [`topo`] computes Poincaré indices along circles and applies constant
//!   perturbations;
//! - [`flow`] integrates trajectories of X and of the orthogonal field X*,
//!   classifies omega-limit behaviour, builds flow rectangles and checks
//!   the Green identity relating boundary functionals to the trace
//!   integral;
//! - [`verdict`] combines the evidence into classifications (global
//!   attractor, global center, singularity-set trichotomy) with explicit
//!   hypothesis checklists;
//! - [`corpus`] ships the built-in example fields with closed-form
//!   trace/determinant oracles used by the test suite and the CLI.
//!
//! Everything is deterministic: randomized sampling routines draw from a
//! single seeded generator, so identical inputs produce byte-identical
//! reports.

pub mod corpus;
pub mod expr;
pub mod flow;
pub mod geom;
pub mod report;
pub mod rng;
pub mod singular;
pub mod spectral;
pub mod svg;
pub mod topo;
pub mod verdict;

pub use expr::{parse_field, DomainError, Dual2, Expr, FieldExpr, ParseError};
pub use geom::{Complex, Mat2, Point, Rect};

#[cfg(test)]
mod static_checks {
    use super::*;

    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn field_expr_is_shareable() {
        assert_send_sync::<FieldExpr>();
    }
}
