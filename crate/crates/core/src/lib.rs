//! Exact von Neumann rank approximation for group-ring elements over
//! finitely generated amenable groups, together with finite-stage
//! quasitilings, Bratteli tiling systems, ultramatricial embeddings and
//! sofic representations.

pub mod embed;
pub mod error;
pub mod exactla;
pub mod field;
pub mod folner;
pub mod groupring;
pub mod groups;
pub mod rank;
pub mod tiling;

pub use error::{Error, Result};
pub use exactla::{SparseMatrix, SparseMatrixBuilder};
pub use field::{Field, Scalar};
pub use folner::{folner_set, FiniteSubset};
pub use groups::{GroupElement, GroupKind, LabeledGraph, MarkedGroup, Projection};
pub use groupring::{GroupRingElement, GroupRingMatrix};
pub use rank::{ConvergenceReport, Method, RankEstimate, Verdict};
