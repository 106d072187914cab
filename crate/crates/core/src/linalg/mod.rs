//! Dense symmetric linear algebra used by every construction in the crate.

mod cholesky;
mod eigen;
mod frame;
mod matrix;
mod rank_one;

pub use cholesky::{generalized_eigh, resolvent_apply, BarrierSide, Cholesky, Resolvent};
pub use eigen::{eigenvalues, eigh, EigenDecomposition, SWEEPS_PER_ORDER};
pub use frame::{default_rank_tol, frame_energy, isotropic_reduce, Frame, ReductionMap, ISOTROPY_TOL};
pub use matrix::{dot, norm_sq, Matrix, SymmetricMatrix};
pub use rank_one::{sherman_morrison_inverse_update, trace_after_rank_one};
