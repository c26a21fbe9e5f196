//! Closed-form worst-case bounds for cyclic BCD.
//!
//! Iteration alignment: `N` counts outer iterations in the loop
//! `k = 0, ..., N`, so the certificate bound with parameter `N` speaks about
//! the iterate after `N + 1` completed cycles. The classical bound is stated
//! per completed cycle `k`; comparisons therefore pair `new_bound(N)` with
//! `beck_bound(k = N + 1)`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("radius must be nonnegative and finite, got {0}")]
    BadRadius(f64),
    #[error("block count must be at least 1")]
    NoBlocks,
    #[error("multiplier t must be nonnegative, got {0}")]
    NegativeT(f64),
}

fn positive(name: &'static str, value: f64) -> Result<f64, BoundError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(BoundError::NonPositive { name, value })
    }
}

fn radius(r: f64) -> Result<f64, BoundError> {
    if r >= 0.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(BoundError::BadRadius(r))
    }
}

/// Smoothness data entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub blocks: usize,
    pub l_max: f64,
    pub l_min: f64,
    pub l_global: f64,
    pub l_c: f64,
    pub radius: f64,
}

impl BoundInputs {
    /// Equal block constants `L_c`; the global constant takes its worst case
    /// `L = p L_c` (since `L ≤ Σ L_i`).
    pub fn equal_constants(blocks: usize, l_c: f64, radius: f64) -> Self {
        Self {
            blocks,
            l_max: l_c,
            l_min: l_c,
            l_global: blocks as f64 * l_c,
            l_c,
            radius,
        }
    }

    pub fn beck(&self, k: usize) -> Result<f64, BoundError> {
        beck_bound(k, self.blocks, self.l_max, self.l_min, self.l_global, self.radius)
    }

    pub fn new_bound(&self, last_outer: usize) -> Result<f64, BoundError> {
        new_bound(last_outer, self.blocks, self.l_c, self.radius)
    }
}

/// `4 L_max (1 + p L² / L_min²) R² / (k + 8/p)`.
pub fn beck_bound(
    k: usize,
    blocks: usize,
    l_max: f64,
    l_min: f64,
    l_global: f64,
    r: f64,
) -> Result<f64, BoundError> {
    if blocks == 0 {
        return Err(BoundError::NoBlocks);
    }
    let l_max = positive("L_max", l_max)?;
    let l_min = positive("L_min", l_min)?;
    let l = positive("L", l_global)?;
    let r = radius(r)?;
    let p = blocks as f64;
    Ok(4.0 * l_max * (1.0 + p * l * l / (l_min * l_min)) * r * r / (k as f64 + 8.0 / p))
}

/// `t = 1 / (2(N + 1)p + 1)`, the multiplier of the certificate.
pub fn certificate_t(last_outer: usize, blocks: usize) -> f64 {
    1.0 / (2 * (last_outer + 1) * blocks + 1) as f64
}

/// `½ p L_c R² t`.
pub fn dual_objective(t: f64, blocks: usize, l_c: f64, r: f64) -> Result<f64, BoundError> {
    if !(t >= 0.0) {
        return Err(BoundError::NegativeT(t));
    }
    Ok(0.5 * blocks as f64 * l_c * r * r * t)
}

/// `p L_c R² / (4(N + 1)p + 2)`, evaluated as the dual objective at the
/// certificate's `t` so the two agree bit for bit.
pub fn new_bound(last_outer: usize, blocks: usize, l_c: f64, r: f64) -> Result<f64, BoundError> {
    if blocks == 0 {
        return Err(BoundError::NoBlocks);
    }
    let l_c = positive("L_c", l_c)?;
    let r = radius(r)?;
    dual_objective(certificate_t(last_outer, blocks), blocks, l_c, r)
}

/// Certificate bound on the gap after `cycles` completed outer iterations:
/// `p L_c R² / (4 cycles p + 2)`. Equals `new_bound(cycles − 1)` for
/// `cycles ≥ 1`; at `cycles = 0` it is `½ p L_c R²`.
pub fn bound_after_cycles(cycles: usize, blocks: usize, l_c: f64, r: f64) -> Result<f64, BoundError> {
    match cycles {
        0 => {
            if blocks == 0 {
                return Err(BoundError::NoBlocks);
            }
            dual_objective(1.0, blocks, positive("L_c", l_c)?, radius(r)?)
        }
        c => new_bound(c - 1, blocks, l_c, r),
    }
}

/// `beck(k = N + 1) / new(N)` in the equal-constant regime
/// (`L_max = L_min = L_c`, `L = p L_c`). Tends to `16(1 + p³)`.
pub fn bound_ratio(last_outer: usize, blocks: usize, l_c: f64, r: f64) -> Result<f64, BoundError> {
    let inputs = BoundInputs::equal_constants(blocks, l_c, r);
    Ok(inputs.beck(last_outer + 1)? / inputs.new_bound(last_outer)?)
}

/// `16(1 + p³)`, the limit of [`bound_ratio`] as `N → ∞`.
pub fn asymptotic_ratio(blocks: usize) -> f64 {
    let p = blocks as f64;
    16.0 * (1.0 + p * p * p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beck_examples() {
        assert_eq!(beck_bound(2, 2, 1.0, 1.0, 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(beck_bound(5, 3, 2.0, 1.0, 4.0, 0.0).unwrap(), 0.0);
        // equal block constants with L = p L_c give 4 L_c (1 + p³) R² / (k + 8/p)
        let (p, lc, r, k) = (3usize, 1.5, 2.0, 7usize);
        let got = BoundInputs::equal_constants(p, lc, r).beck(k).unwrap();
        let want = 4.0 * lc * (1.0 + 27.0) * r * r / (k as f64 + 8.0 / 3.0);
        assert!((got - want).abs() <= 1e-14 * want);
        assert!(beck_bound(1, 2, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(beck_bound(1, 2, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(beck_bound(1, 0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn new_bound_examples() {
        assert_eq!(new_bound(0, 1, 1.0, 1.0).unwrap(), 1.0 / 6.0);
        assert_eq!(new_bound(0, 2, 1.0, 1.0).unwrap(), 0.2);
        assert_eq!(new_bound(4, 3, 2.0, 0.0).unwrap(), 0.0);
        assert!(new_bound(0, 0, 1.0, 1.0).is_err());
        assert!(new_bound(0, 1, 0.0, 1.0).is_err());
    }

    #[test]
    fn dual_objective_examples() {
        assert_eq!(dual_objective(1.0 / 3.0, 1, 1.0, 1.0).unwrap(), new_bound(0, 1, 1.0, 1.0).unwrap());
        assert_eq!(dual_objective(0.0, 4, 2.0, 3.0).unwrap(), 0.0);
        assert_eq!(dual_objective(0.2, 2, 1.0, 1.0).unwrap(), 0.2);
        assert!(dual_objective(-1.0, 2, 1.0, 1.0).is_err());
    }

    #[test]
    fn bound_after_cycles_matches_shifted_new_bound() {
        assert_eq!(bound_after_cycles(0, 4, 2.0, 1.0).unwrap(), 4.0);
        for c in 1..20 {
            assert_eq!(
                bound_after_cycles(c, 5, 1.3, 0.7).unwrap(),
                new_bound(c - 1, 5, 1.3, 0.7).unwrap()
            );
        }
    }

    #[test]
    fn monotonicity() {
        for p in [1, 2, 5, 20] {
            for n in 0..50 {
                assert!(new_bound(n + 1, p, 1.0, 1.0).unwrap() < new_bound(n, p, 1.0, 1.0).unwrap());
                assert!(new_bound(n, p + 1, 1.0, 1.0).unwrap() > new_bound(n, p, 1.0, 1.0).unwrap());
                assert!(beck_bound(n + 1, p, 1.0, 1.0, 1.0, 1.0).unwrap() < beck_bound(n, p, 1.0, 1.0, 1.0, 1.0).unwrap());
            }
        }
    }

    #[test]
    fn ratio_limits() {
        let r1 = bound_ratio(100_000, 1, 1.0, 1.0).unwrap();
        assert!((r1 / 32.0 - 1.0).abs() < 0.01);
        let r5 = bound_ratio(100_000, 5, 1.0, 1.0).unwrap();
        assert!((r5 / 2016.0 - 1.0).abs() < 0.01);
        assert_eq!(asymptotic_ratio(5), 2016.0);
    }
}
