//! Convergence experiment on random least-squares instances: empirical gaps
//! of cyclic BCD next to the classical bound and the certificate bound.
//!
//! Row `k` of a run refers to the iterate after `k` completed cycles. The
//! certificate bound for that iterate is `p L_c R² / (4kp + 2)`, i.e. the
//! theorem with `N = k − 1` (the *matched* alignment). The *strict* alignment
//! compares the same gap with the theorem at `N = k`, one cycle early, and is
//! reported alongside.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rayon::prelude::*;
use thiserror::Error;

use crate::bcd::{pep_constraint_residuals, run_cyclic_bcd, BcdError, SLACK_TOL};
use crate::bounds::{beck_bound, bound_after_cycles, new_bound, BoundError};
use crate::certificate::with_pool;
use crate::fmt::sig17;
use crate::problem::{ProblemError, QuadraticProblem, DEFAULT_MIN_SIGMA};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Bcd(#[from] BcdError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub p_list: Vec<usize>,
    /// Number of completed cycles per run.
    pub cycles: usize,
    pub seeds: Vec<u64>,
    pub min_sigma: f64,
    pub out_dir: PathBuf,
    pub plot_script: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 100,
            p_list: vec![2, 5, 20, 100],
            cycles: 200,
            seeds: (0..20).collect(),
            min_sigma: DEFAULT_MIN_SIGMA,
            out_dir: PathBuf::from("figure1"),
            plot_script: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.dim == 0 {
            return bad("dimension must be positive".into());
        }
        if self.p_list.is_empty() {
            return bad("no block counts given".into());
        }
        if let Some(p) = self.p_list.iter().find(|&&p| p == 0 || !self.dim.is_multiple_of(p)) {
            return bad(format!("block count {p} does not divide n = {}", self.dim));
        }
        if self.seeds.is_empty() {
            return bad("no seeds given".into());
        }
        if !(self.min_sigma > 0.0) {
            return bad(format!("min_sigma must be positive, got {}", self.min_sigma));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureRow {
    pub p: usize,
    pub seed: u64,
    pub k: usize,
    pub gap: f64,
    pub beck: f64,
    pub new: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    /// Gap after `k` cycles against the theorem at `N = k − 1`.
    Matched,
    /// Gap after `k` cycles against the theorem at `N = k`.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub p: usize,
    pub seed: u64,
    pub k: usize,
    pub gap: f64,
    pub bound: f64,
    pub alignment: Alignment,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:?} violation: p={} seed={} k={} gap={} bound={}",
            self.alignment,
            self.p,
            self.seed,
            self.k,
            sig17(self.gap),
            sig17(self.bound)
        )
    }
}

/// One `(p, seed)` run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub p: usize,
    pub seed: u64,
    pub l_c: f64,
    pub l_min: f64,
    pub l_global: f64,
    pub radius: f64,
    pub rows: Vec<FigureRow>,
    pub matched_violations: Vec<Violation>,
    pub strict_violations: Vec<Violation>,
    /// Largest `gap / bound` over `k ≥ 1` under the matched alignment.
    pub worst_ratio: f64,
    /// Gaps nonincreasing across every block step (to a `1e-12` relative
    /// tolerance).
    pub monotone: bool,
    pub pep_min_slack: f64,
    pub pep_violations: usize,
}

/// Run cyclic BCD from `x0 = 0` for `cycles` cycles on `problem` and collect
/// rows, bound checks and PEP slacks.
pub fn run_instance(problem: &QuadraticProblem, cycles: usize) -> Result<RunOutcome, ExperimentError> {
    let p = problem.num_blocks();
    let seed = problem.seed();
    let x0 = DVector::zeros(problem.dim());
    let radius = problem.level_radius(&x0)?.value();
    let (l_c, l_min, l_global) = (problem.l_max(), problem.l_min(), problem.global_lipschitz());

    let (gaps, monotone, pep) = if cycles == 0 {
        (vec![problem.objective(&x0) - problem.optimal_value()], true, None)
    } else {
        let trace = run_cyclic_bcd(problem, &x0, cycles - 1)?;
        let g = trace.gaps();
        let monotone = g.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1e-300));
        let pep = pep_constraint_residuals(&trace, problem)?;
        let per_cycle: Vec<f64> = (0..=cycles).map(|k| trace.gap_after_cycles(k).expect("k ≤ cycles")).collect();
        (per_cycle, monotone, Some(pep))
    };

    let mut rows = Vec::with_capacity(cycles + 1);
    let mut matched_violations = Vec::new();
    let mut strict_violations = Vec::new();
    let mut worst_ratio = 0.0f64;
    for (k, &gap) in gaps.iter().enumerate() {
        let new = bound_after_cycles(k, p, l_c, radius)?;
        let beck = beck_bound(k, p, l_c, l_min, l_global, radius)?;
        rows.push(FigureRow { p, seed, k, gap, beck, new });
        let violation = |bound: f64, alignment| Violation { p, seed, k, gap, bound, alignment };
        if gap > new {
            matched_violations.push(violation(new, Alignment::Matched));
        }
        if k >= 1 && new > 0.0 {
            worst_ratio = worst_ratio.max(gap / new);
        }
        let strict = new_bound(k, p, l_c, radius)?;
        if gap > strict {
            strict_violations.push(violation(strict, Alignment::Strict));
        }
    }
    let (pep_min_slack, pep_violations) = match pep {
        Some(r) => (r.min_slack(), r.all_blocks.violations),
        None => (f64::INFINITY, 0),
    };
    Ok(RunOutcome {
        p,
        seed,
        l_c,
        l_min,
        l_global,
        radius,
        rows,
        matched_violations,
        strict_violations,
        worst_ratio,
        monotone,
        pep_min_slack,
        pep_violations,
    })
}

/// Generate the seeded instance for `(p, seed)` and run it.
pub fn run_seeded(config: &ExperimentConfig, p: usize, seed: u64) -> Result<RunOutcome, ExperimentError> {
    let problem = QuadraticProblem::random_least_squares(config.dim, p, seed, config.min_sigma)?;
    run_instance(&problem, config.cycles)
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub outcomes: Vec<RunOutcome>,
    pub files: Vec<PathBuf>,
}

impl ExperimentSummary {
    pub fn matched_violations(&self) -> impl Iterator<Item = &Violation> {
        self.outcomes.iter().flat_map(|o| &o.matched_violations)
    }

    pub fn pep_violations(&self) -> usize {
        self.outcomes.iter().map(|o| o.pep_violations).sum()
    }
}

pub fn render_csv(config: &ExperimentConfig, p: usize, runs: &[&RunOutcome]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# cyclic BCD on least squares: n={} p={} cycles={} x0=0",
        config.dim, p, config.cycles
    );
    let _ = writeln!(
        out,
        "# new = p*L_c*R^2/(4*k*p+2) with L_c = max_i L_i substituted for the common block constant"
    );
    let _ = writeln!(
        out,
        "# row k is the iterate after k completed cycles; new is the theorem at N = k-1, beck at k = cycles"
    );
    let _ = writeln!(out, "# beck uses L_max, L_min = min_i L_i and L = lambda_max(A^T A)");
    out.push_str("seed,k,gap,beck,new\n");
    for run in runs {
        for r in &run.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.seed, r.k, sig17(r.gap), sig17(r.beck), sig17(r.new));
        }
    }
    out
}

pub fn render_summary(config: &ExperimentConfig, outcomes: &[RunOutcome]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "n={} p_list={:?} cycles={} seeds={:?} min_sigma={}",
        config.dim,
        config.p_list,
        config.cycles,
        config.seeds,
        sig17(config.min_sigma)
    );
    out.push_str("p,seed,L_c,L_min,L,R,worst_gap_over_new,matched_violations,strict_violations,monotone,pep_min_slack,pep_violations\n");
    for o in outcomes {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            o.p,
            o.seed,
            sig17(o.l_c),
            sig17(o.l_min),
            sig17(o.l_global),
            sig17(o.radius),
            sig17(o.worst_ratio),
            o.matched_violations.len(),
            o.strict_violations.len(),
            o.monotone,
            sig17(o.pep_min_slack),
            o.pep_violations
        );
    }
    let matched: usize = outcomes.iter().map(|o| o.matched_violations.len()).sum();
    let strict: usize = outcomes.iter().map(|o| o.strict_violations.len()).sum();
    let pep: usize = outcomes.iter().map(|o| o.pep_violations).sum();
    let _ = writeln!(out, "total matched violations: {matched}");
    let _ = writeln!(out, "total strict violations: {strict}");
    let _ = writeln!(out, "total PEP slack violations (below -{SLACK_TOL:e}): {pep}");
    for v in outcomes.iter().flat_map(|o| o.matched_violations.iter().chain(&o.strict_violations)) {
        let _ = writeln!(out, "{v}");
    }
    out
}

fn render_plot_script(config: &ExperimentConfig) -> String {
    let mut out = String::from("set logscale y\nset datafile separator comma\nset key autotitle columnhead\nset xlabel 'cycle k'\nset ylabel 'f(x_k) - f*'\n");
    let seed = config.seeds[0];
    for p in &config.p_list {
        let _ = writeln!(out, "set title 'p = {p}, seed {seed}'");
        let _ = writeln!(out, "set terminal pngcairo\nset output 'figure1_p{p}.png'");
        let filter = format!("($1=={seed}?$%d:1/0)");
        let _ = writeln!(
            out,
            "plot 'figure1_p{p}.csv' using 2:{} with lines title 'gap', '' using 2:{} with lines title 'beck', '' using 2:{} with lines title 'new'",
            filter.replace("%d", "3"),
            filter.replace("%d", "4"),
            filter.replace("%d", "5")
        );
    }
    out
}

/// Run every `(p, seed)` pair, write one CSV per `p`, `summary.txt` and
/// optionally a gnuplot script into `config.out_dir`.
pub fn run_figure1(config: &ExperimentConfig) -> Result<ExperimentSummary, ExperimentError> {
    config.validate()?;
    let jobs: Vec<(usize, u64)> = config
        .p_list
        .iter()
        .flat_map(|&p| config.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let outcomes = with_pool(|| {
        jobs.par_iter()
            .map(|&(p, s)| run_seeded(config, p, s))
            .collect::<Result<Vec<_>, _>>()
    })?;

    std::fs::create_dir_all(&config.out_dir)?;
    let mut files = Vec::new();
    for &p in &config.p_list {
        let runs: Vec<&RunOutcome> = outcomes.iter().filter(|o| o.p == p).collect();
        let path = config.out_dir.join(format!("figure1_p{p}.csv"));
        write(&path, &render_csv(config, p, &runs))?;
        files.push(path);
    }
    let path = config.out_dir.join("summary.txt");
    write(&path, &render_summary(config, &outcomes))?;
    files.push(path);
    if config.plot_script {
        let path = config.out_dir.join("figure1.gp");
        write(&path, &render_plot_script(config))?;
        files.push(path);
    }
    Ok(ExperimentSummary { outcomes, files })
}

fn write(path: &Path, text: &str) -> std::io::Result<()> {
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::BlockPartition;
    use nalgebra::DMatrix;

    fn small(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            dim: 12,
            p_list: vec![2, 3],
            cycles: 15,
            seeds: vec![1, 2],
            out_dir: dir.to_path_buf(),
            ..Default::default()
        }
    }

    #[test]
    fn identity_design_converges_in_one_cycle() {
        let part = BlockPartition::equal(4, 2).unwrap();
        let b = DVector::from_row_slice(&[1.0, -2.0, 0.5, 3.0]);
        let problem = QuadraticProblem::new(DMatrix::identity(4, 4), b, part, 0).unwrap();
        let out = run_instance(&problem, 3).unwrap();
        assert_eq!(out.rows.len(), 4);
        assert!(out.rows[1..].iter().all(|r| r.gap.abs() < 1e-15));
        assert!(out.rows.iter().all(|r| r.beck > 0.0 && r.new > 0.0));
        assert!(out.matched_violations.is_empty());
    }

    #[test]
    fn random_runs_respect_matched_bound() {
        let cfg = small(Path::new("unused"));
        for &p in &cfg.p_list {
            let out = run_seeded(&cfg, p, 7).unwrap();
            assert_eq!(out.rows.len(), cfg.cycles + 1);
            assert!(out.monotone);
            assert!(out.matched_violations.is_empty(), "{:?}", out.matched_violations);
            assert_eq!(out.pep_violations, 0);
            assert!(out.rows.iter().all(|r| r.gap >= -1e-12 && r.beck.is_finite()));
        }
    }

    #[test]
    fn one_block_per_coordinate() {
        let cfg = ExperimentConfig {
            cycles: 50,
            ..Default::default()
        };
        let out = run_seeded(&cfg, 100, 0).unwrap();
        assert_eq!(out.rows.len(), 51);
        assert!(out.rows.windows(2).all(|w| w[1].gap <= w[0].gap));
        assert!(out.monotone && out.matched_violations.is_empty());
    }

    #[test]
    fn figure_files_are_deterministic() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut cfg = small(a.path());
        cfg.plot_script = true;
        let sa = run_figure1(&cfg).unwrap();
        cfg.out_dir = b.path().to_path_buf();
        run_figure1(&cfg).unwrap();
        assert_eq!(sa.files.len(), 4);
        for f in &sa.files {
            let name = f.file_name().unwrap();
            assert_eq!(std::fs::read(f).unwrap(), std::fs::read(b.path().join(name)).unwrap());
        }
        let csv = std::fs::read_to_string(a.path().join("figure1_p2.csv")).unwrap();
        let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], "seed,k,gap,beck,new");
        assert_eq!(data.len(), 1 + 2 * 16);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.p_list = vec![3];
        assert!(cfg.validate().is_err());
        cfg.p_list = vec![2];
        cfg.seeds.clear();
        assert!(cfg.validate().is_err());
    }
}
