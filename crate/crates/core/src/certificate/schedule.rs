use num_traits::{FromPrimitive, Num, Signed};
use std::fmt::Debug;

use super::CertificateError;

/// Field scalar the certificate code is generic over: `f64` for numerics,
/// `BigRational` for exact checks.
pub trait Scalar: Clone + PartialOrd + Debug + Num + Signed + FromPrimitive + 'static {}

impl<T> Scalar for T where T: Clone + PartialOrd + Debug + Num + Signed + FromPrimitive + 'static {}

pub(crate) fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("integer fits the scalar type")
}

pub(crate) fn two<T: Scalar>() -> T {
    T::one() + T::one()
}

/// Multipliers `λ_q` (`q = 1..M`), `τ_q` (`q = 0..M`) and the scalar `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSchedule<T> {
    last_outer: usize,
    blocks: usize,
    lambda: Vec<T>,
    tau: Vec<T>,
    t: T,
}

/// `λ_q = q / (2M + 1 − q)`, `t = 1 / (2M + 1)` with `M = (N + 1)p`, and `τ`
/// from the stationarity conditions.
pub fn lambda_schedule<T: Scalar>(last_outer: usize, blocks: usize) -> MultiplierSchedule<T> {
    assert!(blocks >= 1, "schedule needs at least one block");
    let m = (last_outer + 1) * blocks;
    let lambda: Vec<T> = (1..=m)
        .map(|q| from_usize::<T>(q) / from_usize::<T>(2 * m + 1 - q))
        .collect();
    let t = T::one() / from_usize::<T>(2 * m + 1);
    let tau = tau_from_lambda(&lambda);
    MultiplierSchedule {
        last_outer,
        blocks,
        lambda,
        tau,
        t,
    }
}

/// Eliminate `τ` through the three stationarity equations in flat order:
/// `τ_0 = λ_1`, `τ_q = λ_{q+1} − λ_q` for `0 < q < M`, `τ_M = 1 − λ_M`.
///
/// Across an outer-iteration seam the middle equation reads
/// `τ_{k,p} = λ_{k+1,1} − λ_{k,p}`, which is what makes `Σ τ = 1`.
pub fn tau_from_lambda<T: Scalar>(lambda: &[T]) -> Vec<T> {
    let m = lambda.len();
    assert!(m >= 1);
    let mut tau = Vec::with_capacity(m + 1);
    tau.push(lambda[0].clone());
    for q in 1..m {
        tau.push(lambda[q].clone() - lambda[q - 1].clone());
    }
    tau.push(T::one() - lambda[m - 1].clone());
    tau
}

impl<T: Scalar> MultiplierSchedule<T> {
    /// Arbitrary `λ` (length `(N + 1)p`) with `τ` eliminated.
    pub fn from_lambda(last_outer: usize, blocks: usize, lambda: Vec<T>, t: T) -> Result<Self, CertificateError> {
        let m = (last_outer + 1) * blocks;
        if blocks == 0 || lambda.len() != m {
            return Err(CertificateError::Dimension {
                expected: m,
                got: lambda.len(),
            });
        }
        let tau = tau_from_lambda(&lambda);
        Ok(Self {
            last_outer,
            blocks,
            lambda,
            tau,
            t,
        })
    }

    pub fn last_outer(&self) -> usize {
        self.last_outer
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// `M = (N + 1)p`.
    pub fn num_steps(&self) -> usize {
        self.lambda.len()
    }

    /// `λ_1..λ_M`.
    pub fn lambda(&self) -> &[T] {
        &self.lambda
    }

    /// `λ_q` with the convention `λ_0 = 0`.
    pub fn lambda_at(&self, q: usize) -> T {
        if q == 0 {
            T::zero()
        } else {
            self.lambda[q - 1].clone()
        }
    }

    /// `τ_0..τ_M`.
    pub fn tau(&self) -> &[T] {
        &self.tau
    }

    pub fn t(&self) -> &T {
        &self.t
    }

    pub fn with_t(mut self, t: T) -> Self {
        self.t = t;
        self
    }

    /// Every `λ` and `τ` is nonnegative.
    pub fn is_sign_feasible(&self) -> bool {
        self.lambda.iter().chain(&self.tau).all(|v| *v >= T::zero())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> MultiplierSchedule<U> {
        MultiplierSchedule {
            last_outer: self.last_outer,
            blocks: self.blocks,
            lambda: self.lambda.iter().map(&f).collect(),
            tau: self.tau.iter().map(&f).collect(),
            t: f(&self.t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn single_block_single_cycle() {
        let s = lambda_schedule::<BigRational>(0, 1);
        assert_eq!(s.lambda(), &[r(1, 2)]);
        assert_eq!(s.tau(), &[r(1, 2), r(1, 2)]);
        assert_eq!(s.t(), &r(1, 3));
    }

    #[test]
    fn two_blocks_single_cycle() {
        let s = lambda_schedule::<BigRational>(0, 2);
        assert_eq!(s.lambda(), &[r(1, 4), r(2, 3)]);
        assert_eq!(s.tau(), &[r(1, 4), r(5, 12), r(1, 3)]);
        assert_eq!(s.t(), &r(1, 5));
    }

    #[test]
    fn telescoping_and_signs() {
        for n in 0..6 {
            for p in 1..5 {
                let s = lambda_schedule::<BigRational>(n, p);
                let m = (n + 1) * p;
                let sum = s.tau().iter().fold(BigRational::zero(), |acc, v| acc + v);
                assert!(sum.is_one());
                assert!(s.is_sign_feasible());
                assert!(s.lambda().windows(2).all(|w| w[0] < w[1]));
                assert_eq!(s.lambda()[m - 1], r(m as i64, m as i64 + 1));
                assert_eq!(s.t(), &r(1, 2 * m as i64 + 1));
            }
        }
    }

    #[test]
    fn from_lambda_checks_length() {
        assert!(MultiplierSchedule::from_lambda(1, 2, vec![0.1, 0.2, 0.3], 0.0).is_err());
        let s = MultiplierSchedule::from_lambda(0, 2, vec![0.5, 0.25], 1.0).unwrap();
        assert_eq!(s.tau(), &[0.5, -0.25, 0.75]);
        assert!(!s.is_sign_feasible());
    }
}
