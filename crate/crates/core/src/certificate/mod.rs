//! Dual certificate for cyclic BCD: the multiplier schedule `(λ, τ, t)`, the
//! matrix `2A` and its bordered form `S = [[2A, τ], [τᵀ, t]]`, and the checks
//! that `S ⪰ 0`.

mod matrix;
mod minors;
mod schedule;
mod verify;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::fmt::{join_sig17, sig17};

pub use matrix::{assemble_certificate, build_dual_matrix, pattern_matrix, BlockWeights, CertificateMatrix};
pub use minors::{
    closed_form_full_det, closed_form_minors, leading_minors_exact, leading_minors_lu, recursion_check,
    recursion_minors, RecursionReport,
};
pub use schedule::{lambda_schedule, tau_from_lambda, MultiplierSchedule, Scalar};
pub use verify::{cholesky_prescreen, min_feasible_t, psd_check, PsdVerdict, SchurSolve, DEFAULT_PSD_TOL, PINV_RTOL};

/// Environment variable capping worker threads for grid sweeps.
pub const THREADS_ENV: &str = "BCD_PEP_THREADS";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("expected {expected} block weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("block weights must sum to 1")]
    WeightSum,
    #[error("block weights must be positive")]
    NonPositiveWeight,
    #[error("2A is not PSD (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },
    #[error("tau is outside range(2A) (residual {residual:e}); no finite t makes S PSD")]
    TauOutsideRange { residual: f64 },
    #[error("consecutive lambda values coincide at index {index}")]
    ZeroDifference { index: usize },
    #[error("zero pivot at index {index} in unpivoted elimination")]
    ZeroPivot { index: usize },
}

/// Everything checked for one `(N, p)` cell.
#[derive(Debug, Clone)]
pub struct CertifyReport {
    pub last_outer: usize,
    pub blocks: usize,
    pub t: f64,
    pub verdict: PsdVerdict,
    pub schur: Result<SchurSolve, CertificateError>,
    pub prescreen: bool,
}

impl CertifyReport {
    /// PSD verdict holds and `t* ≤ t + 1e-8`.
    pub fn passed(&self) -> bool {
        self.verdict.psd && matches!(&self.schur, Ok(s) if s.t_star <= self.t + 1e-8)
    }
}

/// Build the equal-block certificate for `(N, p)` in `f64`.
pub fn equal_block_certificate(last_outer: usize, blocks: usize) -> (MultiplierSchedule<f64>, CertificateMatrix<f64>) {
    let s = lambda_schedule::<f64>(last_outer, blocks);
    let c = CertificateMatrix::build(&s, &BlockWeights::equal(blocks)).expect("equal weights are valid");
    (s, c)
}

pub fn certify(last_outer: usize, blocks: usize, tol: f64) -> CertifyReport {
    let (s, c) = equal_block_certificate(last_outer, blocks);
    CertifyReport {
        last_outer,
        blocks,
        t: *s.t(),
        verdict: psd_check(&c.bordered, tol),
        schur: min_feasible_t(&c.two_a, s.tau(), tol),
        prescreen: cholesky_prescreen(&c.bordered, tol),
    }
}

/// Thread count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Run `f` in a pool sized by [`thread_cap`] (rayon's default otherwise).
pub(crate) fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Certify every cell of `0..=max_n × 1..=max_p`, in row-major order.
pub fn certify_grid(max_n: usize, max_p: usize, tol: f64) -> Vec<CertifyReport> {
    let cells: Vec<(usize, usize)> = (0..=max_n).flat_map(|n| (1..=max_p).map(move |p| (n, p))).collect();
    with_pool(|| cells.par_iter().map(|&(n, p)| certify(n, p, tol)).collect())
}

/// Plain-text dump: header `N p M t`, the `λ` row, the `τ` row, then the
/// `M + 2` rows of `S`.
pub fn render_certificate(schedule: &MultiplierSchedule<f64>, cert: &CertificateMatrix<f64>) -> String {
    let mut out = format!(
        "{} {} {} {}\n",
        schedule.last_outer(),
        schedule.blocks(),
        schedule.num_steps(),
        sig17(*schedule.t())
    );
    out.push_str(&join_sig17(schedule.lambda().iter().copied(), " "));
    out.push('\n');
    out.push_str(&join_sig17(schedule.tau().iter().copied(), " "));
    out.push('\n');
    for row in cert.bordered.row_iter() {
        out.push_str(&join_sig17(row.iter().copied(), " "));
        out.push('\n');
    }
    out
}

pub fn write_certificate(
    path: &Path,
    schedule: &MultiplierSchedule<f64>,
    cert: &CertificateMatrix<f64>,
) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(render_certificate(schedule, cert).as_bytes())
}
