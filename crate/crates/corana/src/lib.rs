//! Correspondence analysis of labelled count tables, plus the two stages
//! that usually follow it in sequence analysis: sequence-constrained
//! hierarchical clustering and permutation-tested style statistics.
//!
//! The crate is organised as a pipeline:
//!
//! * [`tabulate`] builds a validated [`tabulate::ContingencyTable`] from raw
//!   script text (scene splitting + tokenization), from declarative attribute
//!   rules, or from a CSV file, and supports row/column aggregation.
//! * [`ca`] turns a table into a [`ca::FrequencyModel`] (masses, profiles,
//!   chi-squared metric) and decomposes it into a [`ca::FactorSpace`]: a
//!   Euclidean embedding in which pairwise distances equal the chi-squared
//!   distances between profiles. Supplementary elements can be projected
//!   into an existing space without changing it.
//! * [`seqclust`] clusters an ordered sequence of points under the
//!   constraint that only adjacent segments may merge (complete linkage),
//!   yielding a dendrogram, its cophenetic ultrametric, caesura positions,
//!   and ultrametricity diagnostics.
//! * [`stylometrics`] computes movement variability, tempo and mean rhythm
//!   for an ordered point sequence and Monte Carlo tests them against
//!   uniformly randomized orderings.
//!
//! All operations are pure functions of their inputs; every result is
//! deterministic given the same inputs (and seed, for the Monte Carlo test).

pub use nalgebra;

use serde::{Deserialize, Serialize};

pub mod ca;
pub mod seqclust;
pub mod stylometrics;
pub mod tabulate;

mod util;

pub use util::fmt_sig;

/// Which side of a table an operation applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Rows,
    Columns,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Rows => write!(f, "rows"),
            Axis::Columns => write!(f, "columns"),
        }
    }
}
