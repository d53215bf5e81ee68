//! Geometry of Grassmannians of finite-dimensional complex inner-product
//! spaces, and reconstruction of the (anti-)unitary operator behind a
//! transformation that preserves orthogonality and adjacency.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`]: complex dense kernels (Jacobi SVD, rank, null spaces).
//! - [`grassmann`]: subspaces, principal angles and the binary relations.
//! - [`graph`]: Grassmann graph views, stars, tops, apartments, geodesics.
//! - [`operators`]: semilinear operators and the maps they induce.
//! - [`wigner`]: preservation checks, operator reconstruction, the
//!   half-dimension counterexample.

pub mod graph;
pub mod grassmann;
pub mod linalg;
pub mod operators;
pub mod random;
pub mod wigner;

pub use grassmann::{Subspace, Tolerances};
pub use linalg::{CMatrix, C64};
pub use operators::{Endo, SemilinearOperator};
