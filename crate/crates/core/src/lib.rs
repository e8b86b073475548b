//! PSD completion of graph-sparse partial matrices, the conical distance
//! of a sparsity pattern, recognition of the tractable pattern class, and
//! clique-decomposed SDP relaxations with certified two-sided bounds.
//!
//! Module layout:
//!
//! - [`numerics`]: dense symmetric kernels (eigendecomposition, Gram
//!   factorization, orthogonal alignment),
//! - [`graph`]: sparsity patterns, cliques, chordality, hole detection,
//! - [`partial`]: partial matrices over a pattern and partial positivity,
//! - [`completion`]: minimal-shift completion, dual certificates, and the
//!   rank-2 cycle machinery,
//! - [`recognition`]: membership in the tractable pattern class with
//!   decomposition certificates and the per-pattern shift constant,
//! - [`sampling`]: seeded generators for boundary instances and class
//!   members,
//! - [`sdp`]: sparse SDP programs, clique decomposition, the interior-point
//!   engine, and bound recovery.

pub mod completion;
pub mod graph;
pub mod numerics;
pub mod partial;
pub mod recognition;
pub mod sampling;
pub mod sdp;
