//! Eigenvalue location on symmetric matrices whose graph is a tree.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`] exact rationals and the exact/float scalar switch,
//! * [`tree`] rooted forests, branch duplication and the diameter-7 unfolding shapes,
//! * [`diag`] the bottom-up congruence diagonalization and the quantities read off it,
//! * [`charpoly`] an independent characteristic-polynomial and Sturm oracle,
//! * [`realization`] the weighted families and the ≤ 8 eigenvalue certificate,
//! * [`verifier`] lemma sweeps, trace-identity algebra and randomized probes.

pub mod arith;
pub mod charpoly;
pub mod diag;
pub mod error;
pub mod realization;
pub mod tree;
pub mod verifier;

pub use arith::{rational_of_string, Rational, Scalar, ScalarBackend};
pub use charpoly::{IntPoly, RationalPoly};
pub use diag::{DiagOutcome, Inertia, WeightedTreeMatrix};
pub use error::{ArithError, DiagError, PolyError, RealizationError, TreeError, VerifyError};
pub use realization::RealizationCertificate;
pub use tree::{RootedForest, SeedId, SeedPart, UnfoldingSpec};
pub use verifier::ProbeReport;
