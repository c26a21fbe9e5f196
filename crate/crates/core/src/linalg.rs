//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative change of the Rayleigh quotient below which power iteration stops.
pub const POWER_STAGNATION_TOL: f64 = 1e-12;
pub const POWER_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn power_from(sym: &DMatrix<f64>, start: DVector<f64>) -> PowerEstimate {
    let mut v = start;
    let norm = v.norm();
    if norm == 0.0 {
        return PowerEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    v /= norm;
    let mut w = sym * &v;
    let mut rq = v.dot(&w);
    for iter in 1..=POWER_MAX_ITERS {
        let wn = w.norm();
        if wn == 0.0 {
            return PowerEstimate {
                value: 0.0,
                iterations: iter,
                converged: true,
            };
        }
        v = w / wn;
        w = sym * &v;
        let next = v.dot(&w);
        let done = (next - rq).abs() <= POWER_STAGNATION_TOL * next.abs();
        rq = next;
        if done {
            return PowerEstimate {
                value: rq,
                iterations: iter,
                converged: true,
            };
        }
    }
    PowerEstimate {
        value: rq,
        iterations: POWER_MAX_ITERS,
        converged: false,
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
///
/// Runs from the normalised all-ones vector, then again from an alternating
/// ramp so that a start orthogonal to the top eigenvector cannot stall the
/// estimate. Both Rayleigh quotients underestimate; the larger is returned.
pub fn power_iteration(sym: &DMatrix<f64>) -> PowerEstimate {
    let n = sym.nrows();
    let ones = DVector::from_element(n, 1.0);
    let ramp = DVector::from_fn(n, |j, _| {
        let s = if j % 2 == 0 { 1.0 } else { -1.0 };
        s * (1.0 + j as f64 / n as f64)
    });
    let a = power_from(sym, ones);
    let b = power_from(sym, ramp);
    let best = if b.value > a.value { b } else { a };
    PowerEstimate {
        iterations: a.iterations + b.iterations,
        converged: a.converged && b.converged,
        ..best
    }
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(sym: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(sym.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Determinant by partial-pivot LU.
pub fn lu_determinant(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_iteration_matches_dense_eigen() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0]);
        let est = power_iteration(&m);
        let top = *symmetric_eigenvalues(&m).last().unwrap();
        assert!(est.converged);
        assert!((est.value - top).abs() <= 1e-10 * top);
    }

    #[test]
    fn power_iteration_survives_orthogonal_ones_start() {
        // top eigenvector is (1, -1); the all-ones start sees only eigenvalue 1
        let m = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let est = power_iteration(&m);
        assert!((est.value - 3.0).abs() < 1e-10);
    }

    #[test]
    fn power_iteration_zero_matrix() {
        let est = power_iteration(&DMatrix::zeros(3, 3));
        assert_eq!(est.value, 0.0);
    }
}
