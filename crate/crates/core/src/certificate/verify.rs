use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::CertificateError;

/// Default PSD tolerance for the hybrid test `λ_min ≥ −tol (1 + ‖S‖₂)`.
pub const DEFAULT_PSD_TOL: f64 = 1e-8;

/// Eigenvalues below `PINV_RTOL · max|μ|` are treated as zero in the
/// pseudo-inverse.
pub const PINV_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdVerdict {
    pub psd: bool,
    pub lambda_min: f64,
    pub spectral_norm: f64,
    /// `−tol (1 + ‖S‖₂)`.
    pub threshold: f64,
    /// `λ_min − threshold`; negative exactly when the verdict is "not PSD".
    pub margin: f64,
}

/// PSD verdict from a symmetric eigendecomposition.
pub fn psd_check(s: &DMatrix<f64>, tol: f64) -> PsdVerdict {
    let eig = SymmetricEigen::new(s.clone());
    let lambda_min = eig.eigenvalues.min();
    let spectral_norm = eig.eigenvalues.amax();
    let threshold = -tol * (1.0 + spectral_norm);
    PsdVerdict {
        psd: lambda_min >= threshold,
        lambda_min,
        spectral_norm,
        threshold,
        margin: lambda_min - threshold,
    }
}

/// Cholesky of `S + jitter·I` with `jitter = tol (1 + ‖S‖_F)`. Only a fast
/// filter: success implies the eigenvalue verdict passes, failure proves
/// nothing.
pub fn cholesky_prescreen(s: &DMatrix<f64>, tol: f64) -> bool {
    let n = s.nrows();
    let jitter = tol * (1.0 + s.norm());
    (s + DMatrix::identity(n, n) * jitter).cholesky().is_some()
}

/// Result of the Schur-complement solve for the smallest feasible `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurSolve {
    /// `τᵀ (2A)⁺ τ`.
    pub t_star: f64,
    pub rank: usize,
    /// `‖τ − P τ‖` with `P` the projector onto `range(2A)`.
    pub range_residual: f64,
}

/// `t* = τᵀ(2A)⁺τ`, so that `S(t) ⪰ 0 ⇔ t ≥ t*` whenever `2A ⪰ 0` and
/// `τ ∈ range(2A)`.
pub fn min_feasible_t(two_a: &DMatrix<f64>, tau: &[f64], tol: f64) -> Result<SchurSolve, CertificateError> {
    let n = two_a.nrows();
    if two_a.ncols() != n || tau.len() != n {
        return Err(CertificateError::Dimension {
            expected: n,
            got: tau.len(),
        });
    }
    let eig = SymmetricEigen::new(two_a.clone());
    let scale = eig.eigenvalues.amax();
    let min_eig = eig.eigenvalues.min();
    if min_eig < -tol * (1.0 + scale) {
        return Err(CertificateError::NotPsd { min_eig });
    }
    let tau = DVector::from_column_slice(tau);
    let coords = eig.eigenvectors.tr_mul(&tau);
    let cutoff = PINV_RTOL * scale;
    let mut t_star = 0.0;
    let mut rank = 0;
    let mut null_sq = 0.0;
    for (mu, c) in eig.eigenvalues.iter().zip(coords.iter()) {
        if *mu > cutoff {
            t_star += c * c / mu;
            rank += 1;
        } else {
            null_sq += c * c;
        }
    }
    let range_residual = null_sq.sqrt();
    if range_residual > tol * (1.0 + tau.norm()) {
        return Err(CertificateError::TauOutsideRange {
            residual: range_residual,
        });
    }
    Ok(SchurSolve {
        t_star,
        rank,
        range_residual,
    })
}
