//! Separability certification for bipartite density operators via two-sided
//! estimation of the greatest cross norm (the projective tensor norm of the
//! trace-class factors).
//!
//! The cross norm of a density operator is at least 1, with equality
//! exactly on the separable states, and `gamma - 1` serves as an
//! entanglement measure. This crate brackets the norm from below
//! (realignment spectrum, product-witness see-saw) and from above (search
//! over finite elementary-tensor decompositions), and condenses the result
//! into a [`crossnorm::Certificate`] whose evidence a third party can
//! re-check: an explicit separable mixture within a reported trace
//! distance, or orthonormal witness families whose pairing value exceeds 1.
//!
//! Modules:
//! * [`matrix`], [`linalg`] — dense complex kernels (Jacobi SVD/eig, norms);
//! * [`bipartite`] — Kronecker, partial trace/transpose, realignment,
//!   operator-Schmidt;
//! * [`states`] — validated density operators, separable mixtures, named
//!   families, seeded generators;
//! * [`crossnorm`] — bounds, decomposition search, positivization,
//!   certification;
//! * [`baselines`] — PPT and Schmidt oracles for cross-checks.
//!
//! All values are immutable after construction and all operations are pure
//! functions of their inputs; search restarts may run in parallel but
//! reproduce the sequential result bit for bit.

pub mod baselines;
pub mod bipartite;
pub mod crossnorm;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod states;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
