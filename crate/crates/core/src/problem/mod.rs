//! Least-squares instances `f(x) = ½‖Ax − b‖²` with block structure.

mod instance_io;
mod trace_min;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg::power_iteration;
use crate::partition::{BlockPartition, PartitionError};

pub use instance_io::{parse_instance, read_instance, render_instance, write_instance};
pub use trace_min::{lemma2_gap, trace_quadratic, Lemma2Error, Lemma2Report};

/// Default floor on the smallest singular value of generated design matrices.
pub const DEFAULT_MIN_SIGMA: f64 = 1e-3;
/// Regeneration attempts before `random_least_squares` gives up.
pub const MAX_GENERATION_ATTEMPTS: usize = 64;
/// `σ_min` below this (relative to `σ_max`) is treated as numerically singular.
pub const SINGULAR_RTOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("design matrix is {rows}x{cols}, rhs has length {rhs}, partition covers {dim}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        rhs: usize,
        dim: usize,
    },
    #[error("min_sigma must be positive and finite, got {0}")]
    InvalidMinSigma(f64),
    #[error("no instance with sigma_min >= {min_sigma} after {attempts} attempts")]
    GenerationExhausted { min_sigma: f64, attempts: usize },
    #[error("design matrix is numerically singular (sigma_min = {sigma_min:e})")]
    Singular { sigma_min: f64 },
    #[error("block {block} out of range for {blocks} blocks")]
    BlockOutOfRange { block: usize, blocks: usize },
    #[error("point has length {got}, expected {expected}")]
    PointLength { got: usize, expected: usize },
    #[error("instance file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("instance files only describe equal partitions")]
    UnequalPartition,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `R(x0)`: the radius of the initial level set about the minimiser.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LevelSetRadius(pub f64);

impl LevelSetRadius {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// A nonsingular least-squares instance with its cached smoothness data.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    design: DMatrix<f64>,
    rhs: DVector<f64>,
    partition: BlockPartition,
    seed: u64,
    block_lipschitz: Vec<f64>,
    global_lipschitz: f64,
    minimizer: DVector<f64>,
    optimal_value: f64,
    sigma_min: f64,
}

impl QuadraticProblem {
    pub fn new(
        design: DMatrix<f64>,
        rhs: DVector<f64>,
        partition: BlockPartition,
        seed: u64,
    ) -> Result<Self, ProblemError> {
        let dim = partition.total_dim();
        if design.nrows() != dim || design.ncols() != dim || rhs.len() != dim {
            return Err(ProblemError::DimensionMismatch {
                rows: design.nrows(),
                cols: design.ncols(),
                rhs: rhs.len(),
                dim,
            });
        }
        let sv = design.clone().svd(false, false).singular_values;
        let sigma_min = sv.min();
        let sigma_max = sv.max();
        if !(sigma_min.is_finite() && sigma_min > SINGULAR_RTOL * sigma_max) {
            return Err(ProblemError::Singular { sigma_min });
        }
        let minimizer = design
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or(ProblemError::Singular { sigma_min })?;

        let block_lipschitz = partition
            .ranges()
            .map(|r| {
                let cols = design.columns(r.start, r.len());
                power_iteration(&cols.tr_mul(&cols)).value
            })
            .collect();
        let global_lipschitz = power_iteration(&design.tr_mul(&design)).value;

        let mut problem = Self {
            design,
            rhs,
            partition,
            seed,
            block_lipschitz,
            global_lipschitz,
            minimizer,
            optimal_value: 0.0,
            sigma_min,
        };
        problem.optimal_value = problem.objective(&problem.minimizer);
        Ok(problem)
    }

    /// Gaussian instance: entries of `A` and `b` i.i.d. standard normal from a
    /// ChaCha8 stream seeded with `seed`, redrawn until `σ_min(A) ≥ min_sigma`.
    pub fn random_least_squares(
        dim: usize,
        blocks: usize,
        seed: u64,
        min_sigma: f64,
    ) -> Result<Self, ProblemError> {
        if !(min_sigma > 0.0 && min_sigma.is_finite()) {
            return Err(ProblemError::InvalidMinSigma(min_sigma));
        }
        let partition = BlockPartition::equal(dim, blocks)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..MAX_GENERATION_ATTEMPTS {
            let design = DMatrix::from_row_iterator(
                dim,
                dim,
                (0..dim * dim).map(|_| StandardNormal.sample(&mut rng)),
            );
            let rhs = DVector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(&mut rng)));
            match Self::new(design, rhs, partition.clone(), seed) {
                Ok(p) if p.sigma_min >= min_sigma => return Ok(p),
                Ok(_) | Err(ProblemError::Singular { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(ProblemError::GenerationExhausted {
            min_sigma,
            attempts: MAX_GENERATION_ATTEMPTS,
        })
    }

    pub fn dim(&self) -> usize {
        self.partition.total_dim()
    }

    pub fn num_blocks(&self) -> usize {
        self.partition.num_blocks()
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn minimizer(&self) -> &DVector<f64> {
        &self.minimizer
    }

    /// `f(x*)` as computed; zero up to rounding.
    pub fn optimal_value(&self) -> f64 {
        self.optimal_value
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn block_lipschitz_constants(&self) -> &[f64] {
        &self.block_lipschitz
    }

    /// `L_i`, the top eigenvalue of `A_iᵀA_i` (zero-based `block`).
    pub fn block_lipschitz(&self, block: usize) -> Result<f64, ProblemError> {
        self.block_lipschitz
            .get(block)
            .copied()
            .ok_or(ProblemError::BlockOutOfRange {
                block,
                blocks: self.num_blocks(),
            })
    }

    /// `L`, the top eigenvalue of `AᵀA`.
    pub fn global_lipschitz(&self) -> f64 {
        self.global_lipschitz
    }

    pub fn l_max(&self) -> f64 {
        self.block_lipschitz.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn l_min(&self) -> f64 {
        self.block_lipschitz.iter().copied().fold(f64::MAX, f64::min)
    }

    /// The minimal block constant as literally printed in the classical bound's
    /// definition, which uses a max. Equals [`Self::l_max`].
    pub fn l_min_as_printed(&self) -> f64 {
        self.l_max()
    }

    fn check_len(&self, x: &DVector<f64>) -> Result<(), ProblemError> {
        if x.len() != self.dim() {
            return Err(ProblemError::PointLength {
                got: x.len(),
                expected: self.dim(),
            });
        }
        Ok(())
    }

    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.design * x - &self.rhs
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.residual(x).norm_squared()
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.design.tr_mul(&self.residual(x))
    }

    /// `∇_i f(x) = A_iᵀ(Ax − b)`, computed on the column slice of block `i`.
    pub fn block_gradient(&self, x: &DVector<f64>, block: usize) -> DVector<f64> {
        let r = self.partition.range(block);
        self.design
            .columns(r.start, r.len())
            .tr_mul(&self.residual(x))
    }

    /// `R(x0) = √(2 f(x0)) / σ_min(A)`, evaluated as `‖A(x0 − x*)‖ / σ_min`.
    pub fn level_radius(&self, x0: &DVector<f64>) -> Result<LevelSetRadius, ProblemError> {
        self.check_len(x0)?;
        if !(self.sigma_min > 0.0) {
            return Err(ProblemError::Singular {
                sigma_min: self.sigma_min,
            });
        }
        let d = x0 - &self.minimizer;
        Ok(LevelSetRadius((&self.design * d).norm() / self.sigma_min))
    }

    /// `f(y) − f(x) − ⟨∇f(x), y − x⟩ − ‖∇_i f(y) − ∇_i f(x)‖² / (2 L_i)`.
    /// Nonnegative for every member of the class.
    pub fn lemma1_residual(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        block: usize,
    ) -> Result<f64, ProblemError> {
        self.check_len(x)?;
        self.check_len(y)?;
        let li = self.block_lipschitz(block)?;
        let gx = self.gradient(x);
        let gy = self.gradient(y);
        let r = self.partition.range(block);
        let diff = gy.rows(r.start, r.len()) - gx.rows(r.start, r.len());
        let linear = self.objective(y) - self.objective(x) - gx.dot(&(y - x));
        Ok(linear - diff.norm_squared() / (2.0 * li))
    }
}
