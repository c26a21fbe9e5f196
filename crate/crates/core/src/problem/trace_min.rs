//! Infima of `f(X) = tr(A Xᵀ B X + 2 b aᵀ X)` over all `X ∈ ℝ^{n×m}` and
//! over the rank-one family `X = ξ bᵀ`.
//!
//! Shapes: `A` is `m×m`, `B` is `n×n`, `a ∈ ℝⁿ`, `b ∈ ℝᵐ \ {0}`. Both
//! infima are computed from their stationarity systems in the eigenbases of
//! `A` and `B`:
//!
//! - full: `A X̄ᵀ B + b aᵀ = 0`, value `tr(b aᵀ X̄)`
//! - rank one: `(bᵀAb) B ξ̄ + ‖b‖² a = 0`, value `‖b‖² aᵀξ̄`

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;
const PIVOT_RTOL: f64 = 1e-12;
const CONSISTENCY_RTOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Lemma2Error {
    #[error("shape mismatch: A is {a_rows}x{a_cols}, B is {b_rows}x{b_cols}, a has {a_len}, b has {b_len}")]
    Shape {
        a_rows: usize,
        a_cols: usize,
        b_rows: usize,
        b_cols: usize,
        a_len: usize,
        b_len: usize,
    },
    #[error("b must be nonzero")]
    ZeroB,
    #[error("matrix {0} is not symmetric")]
    NotSymmetric(&'static str),
    #[error("matrix {which} is not PSD (min eigenvalue {min_eig:e})")]
    NotPsd { which: &'static str, min_eig: f64 },
    #[error("{0} problem is unbounded below (stationarity system inconsistent)")]
    Unbounded(&'static str),
}

#[derive(Debug, Clone)]
pub struct Lemma2Report {
    pub inf_matrix: f64,
    pub inf_rank_one: f64,
    pub gap: f64,
    pub argmin_matrix: DMatrix<f64>,
    pub argmin_rank_one: DVector<f64>,
}

/// Evaluate `tr(A Xᵀ B X + 2 b aᵀ X)`.
pub fn trace_quadratic(
    amat: &DMatrix<f64>,
    bmat: &DMatrix<f64>,
    a: &DVector<f64>,
    b: &DVector<f64>,
    x: &DMatrix<f64>,
) -> f64 {
    let quad = (amat * x.transpose() * bmat * x).trace();
    let lin = (b * a.transpose() * x).trace();
    quad + 2.0 * lin
}

fn psd_eigen(m: &DMatrix<f64>, which: &'static str) -> Result<SymmetricEigen<f64, nalgebra::Dyn>, Lemma2Error> {
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > SYMMETRY_TOL * scale {
        return Err(Lemma2Error::NotSymmetric(which));
    }
    let eig = SymmetricEigen::new(m.clone());
    let min_eig = eig.eigenvalues.min();
    if min_eig < -PSD_TOL * scale {
        return Err(Lemma2Error::NotPsd { which, min_eig });
    }
    Ok(eig)
}

/// `|inf_X f(X) − inf_ξ f(ξ bᵀ)|` together with both infima and minimisers.
pub fn lemma2_gap(
    amat: &DMatrix<f64>,
    bmat: &DMatrix<f64>,
    a: &DVector<f64>,
    b: &DVector<f64>,
) -> Result<Lemma2Report, Lemma2Error> {
    let (m, n) = (b.len(), a.len());
    if amat.shape() != (m, m) || bmat.shape() != (n, n) {
        return Err(Lemma2Error::Shape {
            a_rows: amat.nrows(),
            a_cols: amat.ncols(),
            b_rows: bmat.nrows(),
            b_cols: bmat.ncols(),
            a_len: n,
            b_len: m,
        });
    }
    if b.iter().all(|&v| v == 0.0) {
        return Err(Lemma2Error::ZeroB);
    }
    let ea = psd_eigen(amat, "A")?;
    let eb = psd_eigen(bmat, "B")?;
    let mu = &ea.eigenvalues;
    let nu = &eb.eigenvalues;
    let a_rot = eb.eigenvectors.tr_mul(a);
    let b_rot = ea.eigenvectors.tr_mul(b);

    let pivot_floor = PIVOT_RTOL * mu.amax().max(f64::MIN_POSITIVE) * nu.amax().max(f64::MIN_POSITIVE);
    let rhs_floor = CONSISTENCY_RTOL * a.norm() * b.norm();

    // (ν_l μ_j) X'_{lj} = −a'_l b'_j in the rotated coordinates
    let mut x_rot = DMatrix::zeros(n, m);
    let mut inf_matrix = 0.0;
    for l in 0..n {
        for j in 0..m {
            let coef = nu[l] * mu[j];
            let rhs = -a_rot[l] * b_rot[j];
            if coef.abs() > pivot_floor {
                let v = rhs / coef;
                x_rot[(l, j)] = v;
                inf_matrix += a_rot[l] * v * b_rot[j];
            } else if rhs.abs() > rhs_floor {
                return Err(Lemma2Error::Unbounded("matrix"));
            }
        }
    }
    let argmin_matrix = &eb.eigenvectors * x_rot * ea.eigenvectors.transpose();

    // (bᵀAb) ν_l ξ'_l = −‖b‖² a'_l
    let bab = b.dot(&(amat * b));
    let bb = b.norm_squared();
    let mut xi_rot = DVector::zeros(n);
    let mut inf_rank_one = 0.0;
    let pivot_floor_1 = PIVOT_RTOL * bab.abs().max(f64::MIN_POSITIVE) * nu.amax().max(f64::MIN_POSITIVE);
    for l in 0..n {
        let coef = bab * nu[l];
        let rhs = -bb * a_rot[l];
        if coef.abs() > pivot_floor_1 && bab > PSD_TOL * amat.amax() * bb {
            let v = rhs / coef;
            xi_rot[l] = v;
            inf_rank_one += bb * a_rot[l] * v;
        } else if rhs.abs() > rhs_floor * b.norm() {
            return Err(Lemma2Error::Unbounded("rank-one"));
        }
    }
    let argmin_rank_one = &eb.eigenvectors * xi_rot;

    Ok(Lemma2Report {
        inf_matrix,
        inf_rank_one,
        gap: (inf_matrix - inf_rank_one).abs(),
        argmin_matrix,
        argmin_rank_one,
    })
}
