//! Plain-text instance files.
//!
//! ```text
//! D p seed
//! a_11 a_12 ... a_1D
//! ...
//! a_D1 a_D2 ... a_DD
//! b_1 ... b_D
//! ```
//!
//! Values are written with 17 significant digits so a read returns the exact
//! same matrix.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{ProblemError, QuadraticProblem};
use crate::fmt::join_sig17;
use crate::partition::BlockPartition;

pub fn render_instance(problem: &QuadraticProblem) -> Result<String, ProblemError> {
    if !problem.partition().is_equal() {
        return Err(ProblemError::UnequalPartition);
    }
    let d = problem.dim();
    let mut out = format!("{} {} {}\n", d, problem.num_blocks(), problem.seed());
    for row in problem.design().row_iter() {
        out.push_str(&join_sig17(row.iter().copied(), " "));
        out.push('\n');
    }
    out.push_str(&join_sig17(problem.rhs().iter().copied(), " "));
    out.push('\n');
    Ok(out)
}

pub fn write_instance(problem: &QuadraticProblem, path: impl AsRef<Path>) -> Result<(), ProblemError> {
    fs::write(path, render_instance(problem)?)?;
    Ok(())
}

fn parse_row(line: &str, lineno: usize, want: usize) -> Result<Vec<f64>, ProblemError> {
    let vals = line
        .split_whitespace()
        .enumerate()
        .map(|(col, tok)| {
            tok.parse::<f64>().map_err(|e| ProblemError::Parse {
                line: lineno,
                msg: format!("field {}: {e}", col + 1),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if vals.len() != want {
        return Err(ProblemError::Parse {
            line: lineno,
            msg: format!("expected {want} values, found {}", vals.len()),
        });
    }
    Ok(vals)
}

pub fn parse_instance(text: &str) -> Result<QuadraticProblem, ProblemError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (lineno, header) = lines.next().ok_or(ProblemError::Parse {
        line: 1,
        msg: "missing header \"D p seed\"".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(ProblemError::Parse {
            line: lineno,
            msg: format!("header needs 3 fields (D p seed), found {}", fields.len()),
        });
    }
    let field = |idx: usize, name: &str| {
        fields[idx].parse::<u64>().map_err(|e| ProblemError::Parse {
            line: lineno,
            msg: format!("{name}: {e}"),
        })
    };
    let dim = field(0, "D")? as usize;
    let blocks = field(1, "p")? as usize;
    let seed = field(2, "seed")?;
    let partition = BlockPartition::equal(dim, blocks)?;

    let mut entries = Vec::with_capacity(dim * dim);
    for row in 0..dim {
        let (lineno, line) = lines.next().ok_or(ProblemError::Parse {
            line: lineno + row + 1,
            msg: format!("missing matrix row {}", row + 1),
        })?;
        entries.extend(parse_row(line, lineno, dim)?);
    }
    let (lineno, line) = lines.next().ok_or(ProblemError::Parse {
        line: lineno + dim + 1,
        msg: "missing right-hand side row".into(),
    })?;
    let rhs = parse_row(line, lineno, dim)?;
    if let Some((lineno, _)) = lines.next() {
        return Err(ProblemError::Parse {
            line: lineno,
            msg: "trailing data after right-hand side".into(),
        });
    }
    QuadraticProblem::new(
        DMatrix::from_row_slice(dim, dim, &entries),
        DVector::from_vec(rhs),
        partition,
        seed,
    )
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<QuadraticProblem, ProblemError> {
    parse_instance(&fs::read_to_string(path)?)
}
