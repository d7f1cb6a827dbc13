//! Nearest Ω-stable matrices.
//!
//! Given a square matrix `A` and a closed region Ω of the complex plane, find
//! a matrix `B` with all eigenvalues in Ω minimizing `‖A − B‖_F`. The problem
//! is rewritten as a minimization over orthogonal (or unitary) matrices `Q`
//! of the squared norm of the part of `Q*AQ` that a stable (block) upper
//! triangular matrix cannot match, and solved with Riemannian trust-region
//! iterations.

pub mod cli;
pub mod manifold;
pub mod objective;
pub mod region;
pub mod scalar;
pub mod solver;

pub use manifold::{OptimizerOptions, OrthogonalPoint, Status, TangentVector};
pub use objective::{Mode, ProblemInstance, SplitResult};
pub use region::{RegionKind, RegionSpec};
pub use solver::{nearest_stable, SolveConfig, SolveError, SolveOutcome};
