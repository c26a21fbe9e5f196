//! The dual problem as a linear SDP in SDPA sparse format.
//!
//! Variables are `y = (λ_1, ..., λ_M, t)` and the model reads
//! `min t  s.t.  Σ y_k F_k − F_0 ⪰ 0` with two blocks: the bordered matrix
//! `S(λ, t)` of order `M + 2` (`τ` eliminated, so `S` is affine in `y`) and a
//! diagonal block of order `2M + 1` holding `λ ≥ 0` and `τ(λ) ≥ 0`.
//!
//! Affine coefficients are extracted from the exact rational certificate
//! builder, so substituting `y` reproduces the assembled certificate.

use std::path::Path;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::certificate::{tau_from_lambda, BlockWeights, CertificateError, CertificateMatrix, MultiplierSchedule};
use crate::linalg::symmetric_eigenvalues;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("line {line}: bad {field}: {msg}")]
    Parse {
        line: usize,
        field: &'static str,
        msg: String,
    },
    #[error("expected {expected} variables, got {got}")]
    VariableCount { expected: usize, got: usize },
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One nonzero `F_matrix[block](row, col) = value`, 1-based, `row ≤ col`.
/// `matrix = 0` is the constant `F_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpEntry {
    pub matrix: usize,
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpModel {
    pub num_vars: usize,
    /// Positive for dense symmetric blocks, negative for diagonal blocks.
    pub block_struct: Vec<i64>,
    pub objective: Vec<f64>,
    pub entries: Vec<SdpEntry>,
    /// Comment lines without the leading `"`.
    pub comments: Vec<String>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("coefficient representable as f64")
}

/// Exact `S(λ, t)` for the given weights.
fn exact_bordered(
    last_outer: usize,
    blocks: usize,
    weights: &BlockWeights,
    lambda: Vec<BigRational>,
    t: BigRational,
) -> Result<DMatrix<BigRational>, CertificateError> {
    let s = MultiplierSchedule::from_lambda(last_outer, blocks, lambda, t)?;
    Ok(CertificateMatrix::build(&s, weights)?.bordered)
}

/// Dual SDP for `(N, p)` with block weights `D_i / D`.
pub fn build_sdp(last_outer: usize, blocks: usize, weights: &BlockWeights) -> Result<SdpModel, SdpError> {
    if weights.blocks() != blocks {
        return Err(CertificateError::WeightCount {
            expected: blocks,
            got: weights.blocks(),
        }
        .into());
    }
    let m = (last_outer + 1) * blocks;
    let nv = m + 1;
    let unit = |j: Option<usize>| -> Vec<BigRational> {
        (0..m).map(|q| if Some(q) == j { rat(1) } else { rat(0) }).collect()
    };

    let base = exact_bordered(last_outer, blocks, weights, unit(None), rat(0))?;
    let base_tau = tau_from_lambda(&unit(None));
    let mut entries = Vec::new();
    let mut push_matrix = |matrix: usize, mat: &DMatrix<BigRational>| {
        for r in 0..mat.nrows() {
            for c in r..mat.ncols() {
                if !mat[(r, c)].is_zero() {
                    entries.push(SdpEntry {
                        matrix,
                        block: 1,
                        row: r + 1,
                        col: c + 1,
                        value: to_f64(&mat[(r, c)]),
                    });
                }
            }
        }
    };
    push_matrix(0, &base.map(|v| -v));
    for j in 0..m {
        let s = exact_bordered(last_outer, blocks, weights, unit(Some(j)), rat(0))?;
        push_matrix(j + 1, &(s - &base));
    }
    let s_t = exact_bordered(last_outer, blocks, weights, unit(None), rat(1))?;
    push_matrix(nv, &(s_t - &base));

    // diagonal block: λ_1..λ_M then τ_0..τ_M
    let mut diag = Vec::new();
    for (q, c) in base_tau.iter().enumerate() {
        if !c.is_zero() {
            diag.push((0, m + 1 + q, -c.clone()));
        }
    }
    for j in 0..m {
        diag.push((j + 1, j + 1, rat(1)));
        let tau_j = tau_from_lambda(&unit(Some(j)));
        for (q, (a, b)) in tau_j.iter().zip(&base_tau).enumerate() {
            let c = a - b;
            if !c.is_zero() {
                diag.push((j + 1, m + 1 + q, c));
            }
        }
    }
    for (matrix, idx, c) in diag {
        entries.push(SdpEntry {
            matrix,
            block: 2,
            row: idx,
            col: idx,
            value: to_f64(&c),
        });
    }
    sort_entries(&mut entries);

    let mut objective = vec![0.0; nv];
    objective[nv - 1] = 1.0;
    Ok(SdpModel {
        num_vars: nv,
        block_struct: vec![(m + 2) as i64, -((2 * m + 1) as i64)],
        objective,
        entries,
        comments: vec![
            format!("cyclic BCD dual certificate SDP: N={last_outer} p={blocks} M={m}"),
            "variables: lambda_1..lambda_M, t; minimise t".to_string(),
            format!("bound = scaling * t with scaling = 0.5*p*L_c*R^2 = {}*L_c*R^2", 0.5 * blocks as f64),
            format!("generator: bcd-pep {}", env!("CARGO_PKG_VERSION")),
        ],
    })
}

fn sort_entries(entries: &mut [SdpEntry]) {
    entries.sort_by_key(|e| (e.matrix, e.block, e.row, e.col));
}

impl SdpModel {
    /// `M`, the number of `λ` variables.
    pub fn num_steps(&self) -> usize {
        self.num_vars - 1
    }

    /// The variable vector `(λ, t)` of a schedule.
    pub fn schedule_point(schedule: &MultiplierSchedule<f64>) -> Vec<f64> {
        let mut y = schedule.lambda().to_vec();
        y.push(*schedule.t());
        y
    }

    /// `Σ y_k F_k − F_0`, one dense matrix per block (diagonal blocks as
    /// diagonal matrices).
    pub fn evaluate(&self, y: &[f64]) -> Result<Vec<DMatrix<f64>>, SdpError> {
        if y.len() != self.num_vars {
            return Err(SdpError::VariableCount {
                expected: self.num_vars,
                got: y.len(),
            });
        }
        let mut out: Vec<DMatrix<f64>> = self
            .block_struct
            .iter()
            .map(|&b| {
                let n = b.unsigned_abs() as usize;
                DMatrix::zeros(n, n)
            })
            .collect();
        for e in &self.entries {
            let v = if e.matrix == 0 { -e.value } else { y[e.matrix - 1] * e.value };
            let mat = &mut out[e.block - 1];
            let (r, c) = (e.row - 1, e.col - 1);
            mat[(r, c)] += v;
            if r != c {
                mat[(c, r)] += v;
            }
        }
        Ok(out)
    }

    /// Smallest eigenvalue over all blocks at `y`; the point is feasible iff
    /// this is nonnegative.
    pub fn feasibility_slack(&self, y: &[f64]) -> Result<f64, SdpError> {
        let mats = self.evaluate(y)?;
        let mut slack = f64::INFINITY;
        for (mat, &b) in mats.iter().zip(&self.block_struct) {
            let low = if b < 0 {
                mat.diagonal().min()
            } else {
                symmetric_eigenvalues(mat).first().copied().unwrap_or(f64::INFINITY)
            };
            slack = slack.min(low);
        }
        Ok(slack)
    }

    pub fn to_sdpa_string(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push('"');
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&format!("{}\n{}\n", self.num_vars, self.block_struct.len()));
        let sizes: Vec<String> = self.block_struct.iter().map(i64::to_string).collect();
        out.push_str(&sizes.join(" "));
        out.push('\n');
        let obj: Vec<String> = self.objective.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&obj.join(" "));
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!("{} {} {} {} {:?}\n", e.matrix, e.block, e.row, e.col, e.value));
        }
        out
    }

    pub fn from_sdpa_str(text: &str) -> Result<Self, SdpError> {
        let mut comments = Vec::new();
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(c) = line.strip_prefix('"') {
                comments.push(c.to_string());
            } else if !line.is_empty() {
                lines.push((i + 1, line));
            }
        }
        let mut it = lines.into_iter();
        let mut next = |field: &'static str| {
            it.next().ok_or(SdpError::Parse {
                line: text.lines().count() + 1,
                field,
                msg: "unexpected end of file".into(),
            })
        };
        let err = |line: usize, field: &'static str, msg: String| SdpError::Parse { line, field, msg };
        let clean = |s: &str| s.replace(['{', '}', '(', ')', ','], " ");

        let (ln, l) = next("variable count")?;
        let num_vars: usize = first_token(l)
            .parse()
            .map_err(|e| err(ln, "variable count", format!("{e}")))?;
        let (ln, l) = next("block count")?;
        let nblocks: usize = first_token(l)
            .parse()
            .map_err(|e| err(ln, "block count", format!("{e}")))?;
        let (ln, l) = next("block sizes")?;
        let block_struct = clean(l)
            .split_whitespace()
            .take(nblocks)
            .map(|t| t.parse::<i64>().map_err(|e| err(ln, "block sizes", format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if block_struct.len() != nblocks || block_struct.contains(&0) {
            return Err(err(ln, "block sizes", format!("expected {nblocks} nonzero sizes")));
        }
        let (ln, l) = next("objective")?;
        let objective = clean(l)
            .split_whitespace()
            .take(num_vars)
            .map(|t| t.parse::<f64>().map_err(|e| err(ln, "objective", format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if objective.len() != num_vars {
            return Err(err(ln, "objective", format!("expected {num_vars} values, got {}", objective.len())));
        }

        let mut entries = Vec::new();
        for (ln, l) in it {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() < 5 {
                return Err(err(ln, "entry", format!("expected 5 fields, got {}", toks.len())));
            }
            let int = |k: usize, field: &'static str| {
                toks[k]
                    .parse::<usize>()
                    .map_err(|e| err(ln, field, format!("{:?}: {e}", toks[k])))
            };
            let (matrix, block, row, col) = (int(0, "matrix")?, int(1, "block")?, int(2, "row")?, int(3, "col")?);
            let value: f64 = toks[4]
                .parse()
                .map_err(|e| err(ln, "value", format!("{:?}: {e}", toks[4])))?;
            if matrix > num_vars {
                return Err(err(ln, "matrix", format!("{matrix} exceeds {num_vars} variables")));
            }
            if block == 0 || block > nblocks {
                return Err(err(ln, "block", format!("{block} outside 1..={nblocks}")));
            }
            let size = block_struct[block - 1];
            let n = size.unsigned_abs() as usize;
            if row == 0 || col == 0 || row > n || col > n {
                return Err(err(ln, "row", format!("({row}, {col}) outside block of order {n}")));
            }
            if size < 0 && row != col {
                return Err(err(ln, "col", "off-diagonal entry in a diagonal block".into()));
            }
            let (row, col) = (row.min(col), row.max(col));
            entries.push(SdpEntry {
                matrix,
                block,
                row,
                col,
                value,
            });
        }
        Ok(Self {
            num_vars,
            block_struct,
            objective,
            entries,
            comments,
        })
    }
}

fn first_token(l: &str) -> &str {
    l.split_whitespace().next().unwrap_or("")
}

pub fn write_sdpa(model: &SdpModel, path: &Path) -> Result<(), SdpError> {
    std::fs::write(path, model.to_sdpa_string())?;
    Ok(())
}

pub fn read_sdpa(path: &Path) -> Result<SdpModel, SdpError> {
    SdpModel::from_sdpa_str(&std::fs::read_to_string(path)?)
}
