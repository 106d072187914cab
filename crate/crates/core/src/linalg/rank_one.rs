//! Rank-one update identities for inverses and their traces.

use crate::error::{Error, Result};
use crate::linalg::matrix::{dot, SymmetricMatrix};

const SINGULAR_UPDATE_TOL: f64 = 1e-12;

/// `(M + z z^T)^{-1}` from `M^{-1}` by the Sherman-Morrison formula
/// `M^{-1} - (M^{-1} z)(M^{-1} z)^T / (1 + <M^{-1} z, z>)`.
pub fn sherman_morrison_inverse_update(m_inv: &SymmetricMatrix, z: &[f64]) -> Result<SymmetricMatrix> {
    let n = m_inv.order();
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: z.len(),
        });
    }
    let w = m_inv.matvec(z);
    let denom = 1.0 + dot(&w, z);
    if denom.abs() < SINGULAR_UPDATE_TOL {
        return Err(Error::SingularUpdate { denominator: denom });
    }
    let mut out = m_inv.clone();
    out.add_outer(-1.0 / denom, &w);
    Ok(out)
}

/// `tr((M + z z^T)^{-1}) = tr(M^{-1}) - <M^{-2} z, z> / (1 + <M^{-1} z, z>)`.
pub fn trace_after_rank_one(m_inv_trace: f64, m_inv_z: &[f64], m_inv2_z_dot_z: f64, z: &[f64]) -> Result<f64> {
    if m_inv_z.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            got: m_inv_z.len(),
        });
    }
    let denom = 1.0 + dot(m_inv_z, z);
    if denom.abs() < SINGULAR_UPDATE_TOL {
        return Err(Error::SingularUpdate { denominator: denom });
    }
    Ok(m_inv_trace - m_inv2_z_dot_z / denom)
}
