use nalgebra::DMatrix;

use super::schedule::{from_usize, two, MultiplierSchedule, Scalar};
use super::CertificateError;
use crate::partition::BlockPartition;

/// Block weights `D_i / D` kept as integers so they can be materialised in
/// any scalar type without rounding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockWeights {
    sizes: Vec<usize>,
}

impl BlockWeights {
    pub fn equal(blocks: usize) -> Self {
        Self { sizes: vec![1; blocks] }
    }

    pub fn from_partition(part: &BlockPartition) -> Self {
        Self {
            sizes: part.sizes().to_vec(),
        }
    }

    pub fn from_sizes(sizes: Vec<usize>) -> Result<Self, CertificateError> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(CertificateError::NonPositiveWeight);
        }
        Ok(Self { sizes })
    }

    pub fn blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn values<T: Scalar>(&self) -> Vec<T> {
        let total = from_usize::<T>(self.sizes.iter().sum());
        self.sizes
            .iter()
            .map(|&s| from_usize::<T>(s) / total.clone())
            .collect()
    }
}

fn check_weights<T: Scalar>(weights: &[T], blocks: usize) -> Result<(), CertificateError> {
    if weights.len() != blocks {
        return Err(CertificateError::WeightCount {
            expected: blocks,
            got: weights.len(),
        });
    }
    if weights.iter().any(|w| *w <= T::zero()) {
        return Err(CertificateError::NonPositiveWeight);
    }
    let sum = weights.iter().fold(T::zero(), |acc, w| acc + w.clone());
    let tol = T::from_f64(1e-12).unwrap_or_else(T::zero);
    if (sum - T::one()).abs() > tol {
        return Err(CertificateError::WeightSum);
    }
    Ok(())
}

/// `2A` assembled term by term from its outer-product expansion.
///
/// With `w_i = p D_i / D`, step `q = kp + i` (block `i`) contributes
///
/// - `w_i λ_q (u_{q−1}u_{q−1}ᵀ + u_q u_qᵀ)`
/// - `w_i τ_q u_q u_qᵀ`
/// - `τ_q Σ_{q' ≤ q} w_{i'} (u_q u_{q'−1}ᵀ + u_{q'−1} u_qᵀ)`, `i'` the block of step `q'`
///
/// and the initial point adds `w_1 τ_0 u_0 u_0ᵀ`.
pub fn build_dual_matrix<T: Scalar>(
    schedule: &MultiplierSchedule<T>,
    weights: &[T],
) -> Result<DMatrix<T>, CertificateError> {
    let p = schedule.blocks();
    check_weights(weights, p)?;
    let m = schedule.num_steps();
    let pw = from_usize::<T>(p);
    let w: Vec<T> = weights.iter().map(|x| pw.clone() * x.clone()).collect();
    let block_of = |q: usize| (q - 1) % p;
    let tau = schedule.tau();

    let mut a = DMatrix::from_element(m + 1, m + 1, T::zero());
    let mut add = |r: usize, c: usize, v: T| {
        let cur = std::mem::replace(&mut a[(r, c)], T::zero());
        a[(r, c)] = cur + v;
    };

    for q in 1..=m {
        let wi = w[block_of(q)].clone();
        let lam = schedule.lambda_at(q);
        add(q - 1, q - 1, wi.clone() * lam.clone());
        add(q, q, wi.clone() * lam);
        add(q, q, wi * tau[q].clone());
        for qp in 1..=q {
            let v = tau[q].clone() * w[block_of(qp)].clone();
            add(q, qp - 1, v.clone());
            add(qp - 1, q, v);
        }
    }
    add(0, 0, w[0].clone() * tau[0].clone());
    Ok(a)
}

/// `2A` from its closed-form pattern for equal blocks: diagonal
/// `(2λ_1, ..., 2λ_M, 1)` and entry `(j, r)`, `j < r`, equal to `τ_r`.
pub fn pattern_matrix<T: Scalar>(schedule: &MultiplierSchedule<T>) -> DMatrix<T> {
    let m = schedule.num_steps();
    let tau = schedule.tau();
    DMatrix::from_fn(m + 1, m + 1, |j, r| {
        if j == r {
            if j < m {
                two::<T>() * schedule.lambda_at(j + 1)
            } else {
                T::one()
            }
        } else {
            tau[j.max(r)].clone()
        }
    })
}

/// `S = [[2A, τ], [τᵀ, t]]`.
pub fn assemble_certificate<T: Scalar>(
    two_a: &DMatrix<T>,
    tau: &[T],
    t: T,
) -> Result<DMatrix<T>, CertificateError> {
    let n = two_a.nrows();
    if two_a.ncols() != n || tau.len() != n {
        return Err(CertificateError::Dimension {
            expected: n,
            got: tau.len(),
        });
    }
    Ok(DMatrix::from_fn(n + 1, n + 1, |r, c| match (r < n, c < n) {
        (true, true) => two_a[(r, c)].clone(),
        (true, false) => tau[r].clone(),
        (false, true) => tau[c].clone(),
        (false, false) => t.clone(),
    }))
}

/// `2A` and its bordered extension `S` for one schedule.
#[derive(Debug, Clone)]
pub struct CertificateMatrix<T: Scalar> {
    pub two_a: DMatrix<T>,
    pub bordered: DMatrix<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> CertificateMatrix<T> {
    pub fn build(schedule: &MultiplierSchedule<T>, weights: &BlockWeights) -> Result<Self, CertificateError> {
        let w = weights.values::<T>();
        let two_a = build_dual_matrix(schedule, &w)?;
        let bordered = assemble_certificate(&two_a, schedule.tau(), schedule.t().clone())?;
        Ok(Self {
            two_a,
            bordered,
            weights: w,
        })
    }

    pub fn order(&self) -> usize {
        self.two_a.nrows()
    }
}

#[cfg(test)]
mod tests {
    use super::super::lambda_schedule;
    use super::*;
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn rmat(n: usize, v: &[(i64, i64)]) -> DMatrix<BigRational> {
        DMatrix::from_row_iterator(n, n, v.iter().map(|&(a, b)| r(a, b)))
    }

    #[test]
    fn single_block_matrix() {
        let s = lambda_schedule::<BigRational>(0, 1);
        let a = build_dual_matrix(&s, &BlockWeights::equal(1).values()).unwrap();
        assert_eq!(a, rmat(2, &[(1, 1), (1, 2), (1, 2), (1, 1)]));
        let sm = assemble_certificate(&a, s.tau(), s.t().clone()).unwrap();
        assert_eq!(
            sm,
            rmat(3, &[(1, 1), (1, 2), (1, 2), (1, 2), (1, 1), (1, 2), (1, 2), (1, 2), (1, 3)])
        );
    }

    #[test]
    fn two_block_matrix() {
        let s = lambda_schedule::<BigRational>(0, 2);
        let a = build_dual_matrix(&s, &BlockWeights::equal(2).values()).unwrap();
        let want = rmat(
            3,
            &[(1, 2), (5, 12), (1, 3), (5, 12), (4, 3), (1, 3), (1, 3), (1, 3), (1, 1)],
        );
        assert_eq!(a, want);
        assert_eq!(pattern_matrix(&s), want);
    }

    #[test]
    fn outer_products_match_pattern_exactly() {
        for n in 0..=6 {
            for p in 1..=4 {
                let s = lambda_schedule::<BigRational>(n, p);
                let a = build_dual_matrix(&s, &BlockWeights::equal(p).values()).unwrap();
                assert_eq!(a, pattern_matrix(&s), "N={n} p={p}");
            }
        }
    }

    #[test]
    fn float_assembly_close_to_pattern() {
        let s = lambda_schedule::<f64>(5, 3);
        let a = build_dual_matrix(&s, &BlockWeights::equal(3).values()).unwrap();
        let diff = (&a - pattern_matrix(&s)).amax();
        assert!(diff <= 1e-15, "{diff}");
        assert_eq!(a, a.transpose());
    }

    #[test]
    fn weighted_assembly_is_symmetric_and_reduces_for_equal_sizes() {
        let s = lambda_schedule::<BigRational>(2, 3);
        let w = BlockWeights::from_sizes(vec![1, 2, 3]).unwrap();
        let a = build_dual_matrix(&s, &w.values()).unwrap();
        assert_eq!(a, a.transpose());
        assert_ne!(a, pattern_matrix(&s));
        let eq = BlockWeights::from_sizes(vec![4, 4, 4]).unwrap();
        assert_eq!(build_dual_matrix(&s, &eq.values()).unwrap(), pattern_matrix(&s));
    }

    #[test]
    fn weight_validation() {
        let s = lambda_schedule::<f64>(0, 2);
        assert!(matches!(
            build_dual_matrix(&s, &[1.0]),
            Err(CertificateError::WeightCount { .. })
        ));
        assert!(matches!(
            build_dual_matrix(&s, &[0.6, 0.6]),
            Err(CertificateError::WeightSum)
        ));
        assert!(matches!(
            build_dual_matrix(&s, &[1.5, -0.5]),
            Err(CertificateError::NonPositiveWeight)
        ));
        assert!(BlockWeights::from_sizes(vec![]).is_err());
    }
}
