//! Applications of frame sparsification to finite-dimensional geometry:
//! sparse John decompositions, dimension reduction for `l_1` point sets,
//! and coordinate reduction for subspaces of `l_p` with `p` even.

mod john;
mod l1;
mod lp;

pub use john::{approximate_john, JohnApproximation, JohnDecomposition};
pub use l1::{cut_decompose, embed_l1, l1_distance, CutDecomposition, EmbeddedPoints, L1Embedding};
pub use lp::{binomial, embed_lp_even, lp_norm, monomial_exponents, orthonormal_span, LpEmbedding};
