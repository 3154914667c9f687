//! Analysis toolkit for multi-model Cantor sets given by clone
//! structures.
//!
//! A clone structure partitions a Cantor set into finitely many models
//! and describes every level-1 piece (clone) as a scaled copy of one of
//! the models sitting inside another. That combinatorial data already
//! determines the metric theory, and this crate computes it:
//!
//! - [`structure`] — models, clones, addressing, subdivision and
//!   d-quantities, with exact rational arithmetic when the inputs allow;
//! - [`spectral`] — the matrix whose (i, j) entry sums d-th powers of
//!   the inverse scales of type-i clones in model j, irreducibility over
//!   support patterns, Frobenius eigendata, power limits;
//! - [`dimension`] — the Hausdorff dimension as the unique exponent
//!   where the Frobenius eigenvalue crosses 1;
//! - [`measure`] — relative Hausdorff measures from the left
//!   eigenvector, plus upper/lower bounds from clone covers;
//! - [`geometry`] — planar realizations: separation statistics with
//!   certified intervals, box-counting estimates, SVG renders;
//! - [`invariants`] — truncated clopen invariants, similarity-class
//!   comparison, and mass ratios of clone pairings;
//! - [`oracle`] — independent cross-checks (scalar bisection, explicit
//!   enumeration) used to pin expected values.
//!
//! Everything is immutable after construction and safe to share across
//! threads.

#![forbid(unsafe_code)]

pub mod dimension;
pub mod error;
pub mod gallery;
pub mod geometry;
pub mod invariants;
pub mod io;
pub mod measure;
pub mod numeric;
pub mod oracle;
pub mod spectral;
pub mod structure;

pub use dimension::{eigenvalue_curve, solve_dimension, DimensionResult};
pub use error::{Error, Result};
pub use geometry::{
    validate_embedding, BoxCountResult, Disc, EmbeddedRealization, PlanarSimilarity,
    SeparationReport,
};
pub use invariants::{
    clopen_invariant, compare_invariants, mass_ratio, mass_ratio_spectrum, CompareVerdict,
    MassRatioMap, TruncatedClopenInvariant,
};
pub use measure::{MeasureReport, SolvedStructure};
pub use numeric::{PowerSum, Scalar};
pub use spectral::{
    build_matrix, build_matrix_symbolic, frobenius, is_irreducible, power_limit, power_structure,
    uniform_power_bound, FrobeniusData, Irreducibility, SpectralMatrix, SymbolicMatrix,
};
pub use structure::{
    validate_structure, CloneAddress, CloneMapSpec, CloneStructure, DQuantity, Model, TypeId,
    ValidationReport, Violation,
};
