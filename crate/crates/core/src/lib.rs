//! Cyclic block coordinate descent (BCD) together with the machinery needed to
//! study its worst-case behaviour through a performance-estimation dual
//! certificate.
//!
//! The crate is organised bottom-up:
//!
//! - [`partition`]: contiguous block partitions and the flat `q = kp + i`
//!   iterate indexing shared by every other module.
//! - [`problem`]: least-squares test instances, their smoothness constants,
//!   the level-set radius `R(x0)` and oracle checks for the two auxiliary
//!   inequalities the analysis relies on.
//! - [`bcd`]: the cyclic BCD iteration with full trace recording, plus the
//!   relaxed PEP constraint residuals evaluated on real traces.
//! - [`bounds`]: closed-form worst-case bounds (the classical cyclic bound and
//!   the certificate bound) and their ratio.
//! - [`certificate`]: the multiplier schedule, the structured certificate
//!   matrix, PSD verification, the minimal feasible `t` and the determinant
//!   recursion for the leading principal minors.
//! - [`sdp`]: export of the dual problem as an SDPA sparse file.
//! - [`experiment`]: the least-squares convergence experiment harness.

pub mod bcd;
pub mod bounds;
pub mod certificate;
pub mod experiment;
pub mod linalg;
pub mod partition;
pub mod problem;
pub mod sdp;

mod fmt;

pub use nalgebra;

pub use bcd::{pep_constraint_residuals, run_cyclic_bcd, BcdError, BcdTrace, PepResiduals};
pub use bounds::{beck_bound, bound_ratio, certificate_t, dual_objective, new_bound, BoundError};
pub use certificate::{
    assemble_certificate, build_dual_matrix, lambda_schedule, min_feasible_t, psd_check,
    CertificateError, MultiplierSchedule, PsdVerdict,
};
pub use partition::{flatten, BlockPartition, FlatLayout, PartitionError};
pub use problem::{LevelSetRadius, ProblemError, QuadraticProblem};
pub use sdp::{build_sdp, read_sdpa, write_sdpa, SdpModel};
