//! Leading principal minors of `2A` by three independent routes: LU per
//! order, the three-term determinant recursion in `λ`, and the closed forms.
//!
//! The recursion holds for any symmetric matrix whose column `r` carries one
//! constant `c_r` above the diagonal `a_r`. For `2A` the first `M` columns
//! have `a_m = 2λ_m`, `c_m = λ_m − λ_{m−1}` (`λ_0 = 0`); the last column has
//! `a = 1`, `c = 1 − λ_M`, so the final step uses the general form.

use nalgebra::DMatrix;

use super::schedule::{from_usize, two, MultiplierSchedule, Scalar};
use super::CertificateError;
use crate::linalg::lu_determinant;

/// `det` of every leading principal block, orders `1..=n`, by pivoted LU.
pub fn leading_minors_lu(m: &DMatrix<f64>) -> Vec<f64> {
    (1..=m.nrows())
        .map(|k| lu_determinant(&m.view((0, 0), (k, k)).into_owned()))
        .collect()
}

/// Leading minors by unpivoted elimination: the order-`k` minor is the
/// product of the first `k` pivots. Exact for rational scalars.
pub fn leading_minors_exact<T: Scalar>(m: &DMatrix<T>) -> Result<Vec<T>, CertificateError> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut out = Vec::with_capacity(n);
    let mut det = T::one();
    for k in 0..n {
        let pivot = a[(k, k)].clone();
        det = det * pivot.clone();
        out.push(det.clone());
        if k + 1 == n {
            break;
        }
        if pivot.is_zero() {
            return Err(CertificateError::ZeroPivot { index: k });
        }
        for r in k + 1..n {
            let f = a[(r, k)].clone() / pivot.clone();
            for c in k..n {
                let v = a[(r, c)].clone() - f.clone() * a[(k, c)].clone();
                a[(r, c)] = v;
            }
        }
    }
    Ok(out)
}

/// One step `d_m = α d_{m−1} − β d_{m−2}` with
/// `α = a_m − 2c_m²/c_{m−1} + c_m² a_{m−1}/c_{m−1}²` and
/// `β = c_m² (1 − a_{m−1}/c_{m−1})²`.
fn recursion_step<T: Scalar>(a: T, c: T, a_prev: T, c_prev: T, d1: &T, d2: &T) -> T {
    let c2 = c.clone() * c;
    let alpha = a - two::<T>() * c2.clone() / c_prev.clone()
        + c2.clone() * a_prev.clone() / (c_prev.clone() * c_prev.clone());
    let s = T::one() - a_prev / c_prev;
    let beta = c2 * s.clone() * s;
    alpha * d1.clone() - beta * d2.clone()
}

/// Minors of orders `1..=M+1` from the recursion. Orders 1 and 2 use the
/// base cases `2λ_1` and `4λ_1λ_2 − (λ_2 − λ_1)²`; orders `3..=M` use `α`, `β`
/// written in `λ` differences; order `M+1` is the general step with `a = 1`.
pub fn recursion_minors<T: Scalar>(schedule: &MultiplierSchedule<T>) -> Result<Vec<T>, CertificateError> {
    let m = schedule.num_steps();
    let lam = |q: usize| schedule.lambda_at(q);
    let diff = |q: usize| lam(q) - lam(q - 1);
    let mut d: Vec<T> = Vec::with_capacity(m + 2);
    d.push(T::one());
    d.push(two::<T>() * lam(1));
    if m >= 2 {
        let g = diff(2);
        d.push(from_usize::<T>(4) * lam(1) * lam(2) - g.clone() * g);
    }
    for q in 3..=m {
        if diff(q - 1).is_zero() {
            return Err(CertificateError::ZeroDifference { index: q - 1 });
        }
        let next = recursion_step(
            two::<T>() * lam(q),
            diff(q),
            two::<T>() * lam(q - 1),
            diff(q - 1),
            &d[q - 1],
            &d[q - 2],
        );
        d.push(next);
    }
    let c_prev = diff(m);
    if c_prev.is_zero() {
        return Err(CertificateError::ZeroDifference { index: m });
    }
    let last = recursion_step(
        T::one(),
        T::one() - lam(m),
        two::<T>() * lam(m),
        c_prev,
        &d[m],
        &d[m - 1],
    );
    d.push(last);
    d.remove(0);
    Ok(d)
}

/// Closed-form minors of orders `1..=M` in flat indexing:
/// `det_m = (2M+1)²/(2M+1−m)² · (1 + (2M−2m+1) Σ_{q<m} x_q) · Π_{q<m} y_q`
/// with `x_q = 1/(2M + 4Mq − 2q² + 1)` and `y_q = (2M + 4Mq − 2q² + 1)/(2M+1−q)²`.
pub fn closed_form_minors<T: Scalar>(num_steps: usize) -> Vec<T> {
    let mm = num_steps;
    let big = from_usize::<T>(2 * mm + 1);
    let mut sum_x = T::zero();
    let mut prod_y = T::one();
    let mut out = Vec::with_capacity(mm);
    for order in 1..=mm {
        let q = order - 1;
        let num = from_usize::<T>(2 * mm + 4 * mm * q + 1) - from_usize::<T>(2 * q * q);
        let den = from_usize::<T>(2 * mm + 1 - q);
        sum_x = sum_x + T::one() / num.clone();
        prod_y = prod_y * num / (den.clone() * den);
        let lead = from_usize::<T>(2 * mm + 1 - order);
        let g = from_usize::<T>(2 * mm + 1 - 2 * order);
        out.push(big.clone() * big.clone() / (lead.clone() * lead) * (T::one() + g * sum_x.clone()) * prod_y.clone());
    }
    out
}

/// Closed-form `det(2A) = (2M+1)²/(M+1)² · Π_{q<M} y_q`.
pub fn closed_form_full_det<T: Scalar>(num_steps: usize) -> T {
    let mm = num_steps;
    let big = from_usize::<T>(2 * mm + 1);
    let tail = from_usize::<T>(mm + 1);
    let mut prod_y = T::one();
    for q in 0..mm {
        let num = from_usize::<T>(2 * mm + 4 * mm * q + 1) - from_usize::<T>(2 * q * q);
        let den = from_usize::<T>(2 * mm + 1 - q);
        prod_y = prod_y * num / (den.clone() * den);
    }
    big.clone() * big / (tail.clone() * tail) * prod_y
}

/// Agreement of the minor routes for one schedule, all in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionReport {
    pub lu: Vec<f64>,
    pub recursion: Vec<f64>,
    pub closed_form: Vec<f64>,
    /// `max |lu − recursion| / (1 + max |lu|)` over all orders.
    pub recursion_residual: f64,
    /// Same against the closed forms (orders `1..=M+1`).
    pub closed_form_residual: f64,
    pub min_minor: f64,
}

fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let scale = 1.0 + a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

pub fn recursion_check(schedule: &MultiplierSchedule<f64>, two_a: &DMatrix<f64>) -> Result<RecursionReport, CertificateError> {
    let lu = leading_minors_lu(two_a);
    let recursion = recursion_minors(schedule)?;
    let mut closed_form = closed_form_minors::<f64>(schedule.num_steps());
    closed_form.push(closed_form_full_det(schedule.num_steps()));
    Ok(RecursionReport {
        recursion_residual: relative_gap(&lu, &recursion),
        closed_form_residual: relative_gap(&lu, &closed_form),
        min_minor: lu.iter().copied().fold(f64::INFINITY, f64::min),
        lu,
        recursion,
        closed_form,
    })
}
