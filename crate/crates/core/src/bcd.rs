//! Cyclic block coordinate descent with step `1/L_i`, recorded in full.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use nalgebra::DVector;
use thiserror::Error;

use crate::fmt::sig17;
use crate::partition::FlatLayout;
use crate::problem::{ProblemError, QuadraticProblem};

/// Normalised slacks below `-SLACK_TOL` count as violations.
pub const SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BcdError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("start point has length {got}, expected {expected}")]
    StartLength { got: usize, expected: usize },
    #[error("block {block} has nonpositive Lipschitz constant {value}")]
    BadStep { block: usize, value: f64 },
    #[error("nonfinite value at step q={flat} (k={outer}, i={inner}); instance scaling is likely broken")]
    NonFinite { flat: usize, outer: usize, inner: usize },
}

/// Everything one run of the method produced, indexed by `q = kp + i`.
///
/// The iterate at `(k, p)` and at `(k + 1, 0)` share one slot, so the
/// normalised quantities at the two indices are identical by construction.
#[derive(Debug, Clone)]
pub struct BcdTrace {
    layout: FlatLayout,
    points: Vec<DVector<f64>>,
    objective: Vec<f64>,
    gaps: Vec<f64>,
    gradients: Vec<DVector<f64>>,
    step_constants: Vec<f64>,
}

impl BcdTrace {
    pub fn layout(&self) -> FlatLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn point(&self, outer: usize, inner: usize) -> Option<&DVector<f64>> {
        self.layout.flatten(outer, inner).ok().map(|q| &self.points[q])
    }

    pub fn objective_values(&self) -> &[f64] {
        &self.objective
    }

    /// `f(x_q) − f(x*)`.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn gradients(&self) -> &[DVector<f64>] {
        &self.gradients
    }

    /// The `L_i` used as inverse step for each block.
    pub fn step_constants(&self) -> &[f64] {
        &self.step_constants
    }

    /// Gap after `cycles` completed outer iterations, i.e. at `x_cycles`.
    pub fn gap_after_cycles(&self, cycles: usize) -> Option<f64> {
        self.gaps.get(cycles * self.layout.blocks()).copied()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,k,i,f_gap,grad_norm\n");
        for (q, (gap, grad)) in self.gaps.iter().zip(&self.gradients).enumerate() {
            let (k, i) = self.layout.unflatten(q).expect("q within trace");
            let _ = writeln!(out, "{q},{k},{i},{},{}", sig17(*gap), sig17(grad.norm()));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Run `N + 1` outer iterations (`(N + 1)p` block updates) from `x0`.
pub fn run_cyclic_bcd(
    problem: &QuadraticProblem,
    x0: &DVector<f64>,
    last_outer: usize,
) -> Result<BcdTrace, BcdError> {
    if x0.len() != problem.dim() {
        return Err(BcdError::StartLength {
            got: x0.len(),
            expected: problem.dim(),
        });
    }
    let blocks = problem.num_blocks();
    let layout = FlatLayout::new(last_outer, blocks).map_err(ProblemError::from)?;
    let steps = problem.block_lipschitz_constants().to_vec();
    if let Some((block, &value)) = steps.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
        return Err(BcdError::BadStep { block, value });
    }

    let f_star = problem.optimal_value();
    let n = layout.len();
    let mut points = Vec::with_capacity(n);
    let mut objective = Vec::with_capacity(n);
    let mut gaps = Vec::with_capacity(n);
    let mut gradients = Vec::with_capacity(n);

    let mut x = x0.clone();
    for q in 0..n {
        if q > 0 {
            let block = layout.block_at(q);
            let r = problem.partition().range(block);
            let g: &DVector<f64> = &gradients[q - 1];
            let inv = 1.0 / steps[block];
            for j in r {
                x[j] -= inv * g[j];
            }
        }
        let fx = problem.objective(&x);
        let grad = problem.gradient(&x);
        if !fx.is_finite() || grad.iter().any(|v| !v.is_finite()) {
            let (outer, inner) = layout.unflatten(q).expect("q in range");
            return Err(BcdError::NonFinite { flat: q, outer, inner });
        }
        points.push(x.clone());
        objective.push(fx);
        gaps.push(fx - f_star);
        gradients.push(grad);
    }

    Ok(BcdTrace {
        layout,
        points,
        objective,
        gaps,
        gradients,
        step_constants: steps,
    })
}

/// Which inequality of the relaxed PEP a slack belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `(p/2)‖U_tᵀ(g_{q−1} − g_q)‖² ≤ δ_{q−1} − δ_q − ⟨g_q, x_{q−1} − x_q⟩/R`
    Consecutive,
    /// `(p/2)‖U_tᵀ g_q‖² ≤ δ_q`
    Upper,
    /// `(p/2)‖U_tᵀ g_q‖² ≤ −δ_q − ⟨g_q, x* − x_q⟩/R`, `q ≥ 1`
    Optimality,
    /// the same inequality at `q = 0`
    Initial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slack {
    pub kind: ConstraintKind,
    pub flat: usize,
    /// Zero-based block `t` of the `U_t` projection.
    pub block: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FamilyStats {
    pub count: usize,
    pub violations: usize,
    pub min: Option<Slack>,
}

impl FamilyStats {
    fn push(&mut self, s: Slack) {
        self.count += 1;
        if s.value < -SLACK_TOL {
            self.violations += 1;
        }
        if self.min.is_none_or(|m| s.value < m.value) {
            self.min = Some(s);
        }
    }

    pub fn min_value(&self) -> f64 {
        self.min.map_or(f64::INFINITY, |s| s.value)
    }
}

/// Relaxed-PEP constraint slacks evaluated on one trace.
#[derive(Debug, Clone)]
pub struct PepResiduals {
    /// The common constant used in the normalisation.
    pub l_c: f64,
    /// True when the block constants differ and `L_c = max_i L_i` stands in.
    pub substituted: bool,
    pub radius: f64,
    /// `p L_c R²`; slacks are divided by this when positive.
    pub scale: f64,
    /// Every `t = 1..p` for every constraint.
    pub all_blocks: FamilyStats,
    /// Only `t = i` (the block updated at that step; `t = 1` for `q = 0`).
    pub matched_block: FamilyStats,
    pub matched_slacks: Vec<Slack>,
}

impl PepResiduals {
    pub fn min_slack(&self) -> f64 {
        self.all_blocks.min_value().min(self.matched_block.min_value())
    }
}

/// Evaluate every inequality of the relaxed problem on a real trace.
///
/// Negative slack is a finding, not an error. Traces from unequal block
/// constants are normalised with `L_c = max_i L_i`, which keeps every
/// inequality valid.
pub fn pep_constraint_residuals(
    trace: &BcdTrace,
    problem: &QuadraticProblem,
) -> Result<PepResiduals, BcdError> {
    let layout = trace.layout();
    let p = layout.blocks();
    let consts = problem.block_lipschitz_constants();
    let l_c = problem.l_max();
    let substituted = consts.iter().any(|&l| (l - l_c).abs() > 1e-12 * l_c);
    let radius = problem.level_radius(&trace.points[0])?.value();
    let scale = p as f64 * l_c * radius * radius;
    let norm = |raw: f64| if scale > 0.0 { raw / scale } else { raw };
    let half_inv_lc = 0.5 / l_c;
    let x_star = problem.minimizer();
    let part = problem.partition();
    let block_sq = |v: &DVector<f64>| -> Vec<f64> {
        part.ranges().map(|r| v.rows(r.start, r.len()).norm_squared()).collect()
    };

    let mut all_blocks = FamilyStats::default();
    let mut matched_block = FamilyStats::default();
    let mut matched_slacks = Vec::with_capacity(3 * layout.num_steps() + 1);
    let mut record = |kind, flat, block, matched: usize, value: f64| {
        let s = Slack { kind, flat, block, value };
        all_blocks.push(s);
        if block == matched {
            matched_block.push(s);
            matched_slacks.push(s);
        }
    };

    let gaps = trace.gaps();
    let grads = trace.gradients();
    let pts = trace.points();

    // (0,0) constraint
    {
        let inner = grads[0].dot(&(x_star - &pts[0]));
        let sq = block_sq(&grads[0]);
        for (t, s) in sq.iter().enumerate() {
            let raw = -gaps[0] - inner - half_inv_lc * s;
            record(ConstraintKind::Initial, 0, t, 0, norm(raw));
        }
    }

    for q in 1..trace.len() {
        let i = layout.block_at(q);
        let dx = &pts[q - 1] - &pts[q];
        let dg = &grads[q - 1] - &grads[q];
        let consec_base = gaps[q - 1] - gaps[q] - grads[q].dot(&dx);
        let opt_base = -gaps[q] - grads[q].dot(&(x_star - &pts[q]));
        let dg_sq = block_sq(&dg);
        let g_sq = block_sq(&grads[q]);
        for t in 0..p {
            record(
                ConstraintKind::Consecutive,
                q,
                t,
                i,
                norm(consec_base - half_inv_lc * dg_sq[t]),
            );
            record(ConstraintKind::Upper, q, t, i, norm(gaps[q] - half_inv_lc * g_sq[t]));
            record(
                ConstraintKind::Optimality,
                q,
                t,
                i,
                norm(opt_base - half_inv_lc * g_sq[t]),
            );
        }
    }

    Ok(PepResiduals {
        l_c,
        substituted,
        radius,
        scale,
        all_blocks,
        matched_block,
        matched_slacks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::BlockPartition;
    use nalgebra::DMatrix;

    fn quad_problem(q: &[f64], dim: usize, blocks: usize) -> QuadraticProblem {
        // ½xᵀQx = ½‖Ax‖² with A the Cholesky factor transpose
        let qm = DMatrix::from_row_slice(dim, dim, q);
        let a = qm.cholesky().unwrap().l().transpose();
        QuadraticProblem::new(a, DVector::zeros(dim), BlockPartition::equal(dim, blocks).unwrap(), 0).unwrap()
    }

    #[test]
    fn isotropic_converges_in_one_cycle() {
        let p = quad_problem(&[1.0, 0.0, 0.0, 1.0], 2, 2);
        let tr = run_cyclic_bcd(&p, &DVector::from_vec(vec![1.0, 1.0]), 0).unwrap();
        assert_eq!(tr.len(), 3);
        assert!(tr.point(1, 0).is_none());
        assert!(tr.point(0, 2).unwrap().norm() < 1e-15);
        assert!(tr.gap_after_cycles(1).unwrap() < 1e-30);
    }

    #[test]
    fn hand_computed_two_by_two() {
        let p = quad_problem(&[2.0, 1.0, 1.0, 2.0], 2, 2);
        assert!((p.block_lipschitz(0).unwrap() - 2.0).abs() < 1e-12);
        let tr = run_cyclic_bcd(&p, &DVector::from_vec(vec![1.0, 1.0]), 0).unwrap();
        let x01 = tr.point(0, 1).unwrap();
        assert!((x01[0] + 0.5).abs() < 1e-12 && (x01[1] - 1.0).abs() < 1e-12);
        let x1 = tr.point(0, 2).unwrap();
        assert!((x1[0] + 0.5).abs() < 1e-12 && (x1[1] - 0.25).abs() < 1e-12);
        assert!((tr.objective_values()[2] - 0.1875).abs() < 1e-12);

        let res = pep_constraint_residuals(&tr, &p).unwrap();
        assert!(!res.substituted);
        assert!(res.min_slack() >= -1e-12);
        assert_eq!(res.all_blocks.count, 2 + 2 * 3 * 2);
        assert_eq!(res.matched_block.count, 1 + 2 * 3);
    }

    #[test]
    fn stationary_start_has_zero_gradients() {
        let p = QuadraticProblem::random_least_squares(6, 3, 1, 1e-3).unwrap();
        let tr = run_cyclic_bcd(&p, &p.minimizer().clone(), 2).unwrap();
        for g in tr.gradients() {
            assert!(g.norm() < 1e-10);
        }
        let res = pep_constraint_residuals(&tr, &p).unwrap();
        assert!(res.min_slack() >= -1e-12);
    }

    #[test]
    fn descent_and_identification() {
        for seed in 0..20 {
            let p = QuadraticProblem::random_least_squares(10, 5, seed, 1e-3).unwrap();
            let tr = run_cyclic_bcd(&p, &DVector::zeros(10), 3).unwrap();
            assert_eq!(tr.len(), 4 * 5 + 1);
            let g0 = tr.gaps()[0];
            for w in tr.gaps().windows(2) {
                assert!(w[1] <= w[0] + 1e-12 * (1.0 + g0));
            }
            // (k, p) and (k + 1, 0) are the same stored point
            let a = tr.point(0, 5).unwrap() as *const _;
            let b = tr.point(1, 0).unwrap() as *const _;
            assert_eq!(a, b);
            let res = pep_constraint_residuals(&tr, &p).unwrap();
            assert!(res.substituted);
            assert_eq!(res.all_blocks.violations, 0, "seed {seed}: {:?}", res.all_blocks.min);
        }
    }

    #[test]
    fn csv_has_one_row_per_flat_index() {
        let p = QuadraticProblem::random_least_squares(4, 2, 9, 1e-3).unwrap();
        let tr = run_cyclic_bcd(&p, &DVector::zeros(4), 1).unwrap();
        let csv = tr.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "q,k,i,f_gap,grad_norm");
        assert_eq!(lines.len(), 1 + 5);
        assert!(lines[1].starts_with("0,0,0,"));
        assert!(lines[3].starts_with("2,0,2,"));
        assert!(lines[4].starts_with("3,1,1,"));
        let gap: f64 = lines[5].split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(gap.to_bits(), tr.gaps()[4].to_bits());
    }

    #[test]
    fn rejects_wrong_start_length() {
        let p = QuadraticProblem::random_least_squares(4, 2, 9, 1e-3).unwrap();
        assert!(matches!(
            run_cyclic_bcd(&p, &DVector::zeros(3), 0),
            Err(BcdError::StartLength { .. })
        ));
    }

    #[test]
    fn nonfinite_start_aborts() {
        let p = QuadraticProblem::random_least_squares(4, 2, 9, 1e-3).unwrap();
        let x0 = DVector::from_vec(vec![f64::NAN, 0.0, 0.0, 0.0]);
        assert!(matches!(
            run_cyclic_bcd(&p, &x0, 0),
            Err(BcdError::NonFinite { flat: 0, .. })
        ));
    }
}
