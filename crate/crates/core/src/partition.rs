//! Contiguous block partitions of `0..D` and the flat iterate index.
//!
//! Block numbers follow two conventions on purpose. Partition accessors take a
//! zero-based `block` (Rust slices); the iterate index `(k, i)` uses the inner
//! counter `i` in `0..=p`, where `i` is the number of blocks already updated in
//! outer iteration `k`. Step `(k, i)` with `i >= 1` therefore updates block
//! `i - 1` in zero-based terms.

use std::ops::Range;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition needs at least one block")]
    NoBlocks,
    #[error("block {block} has size zero")]
    EmptyBlock { block: usize },
    #[error("{blocks} blocks cannot split dimension {dim} evenly")]
    NotDivisible { dim: usize, blocks: usize },
    #[error("{blocks} blocks exceed dimension {dim}")]
    TooManyBlocks { dim: usize, blocks: usize },
    #[error("index (k={outer}, i={inner}) out of range for p={blocks}, N={last_outer}")]
    IndexOutOfRange {
        outer: usize,
        inner: usize,
        blocks: usize,
        last_outer: usize,
    },
    #[error("flat index {flat} out of range (length {len})")]
    FlatOutOfRange { flat: usize, len: usize },
}

/// `p` contiguous, disjoint blocks covering `0..D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    total_dim: usize,
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockPartition {
    pub fn new(sizes: Vec<usize>) -> Result<Self, PartitionError> {
        if sizes.is_empty() {
            return Err(PartitionError::NoBlocks);
        }
        if let Some(block) = sizes.iter().position(|&s| s == 0) {
            return Err(PartitionError::EmptyBlock { block });
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &s in &sizes {
            offsets.push(acc);
            acc += s;
        }
        Ok(Self {
            total_dim: acc,
            sizes,
            offsets,
        })
    }

    /// `p` blocks of size `D / p` each.
    pub fn equal(dim: usize, blocks: usize) -> Result<Self, PartitionError> {
        if blocks == 0 {
            return Err(PartitionError::NoBlocks);
        }
        if blocks > dim {
            return Err(PartitionError::TooManyBlocks { dim, blocks });
        }
        if !dim.is_multiple_of(blocks) {
            return Err(PartitionError::NotDivisible { dim, blocks });
        }
        Self::new(vec![dim / blocks; blocks])
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn size(&self, block: usize) -> usize {
        self.sizes[block]
    }

    /// Coordinates of `block`; selecting them is the action of `U_iᵀ`.
    pub fn range(&self, block: usize) -> Range<usize> {
        let start = self.offsets[block];
        start..start + self.sizes[block]
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.num_blocks()).map(|b| self.range(b))
    }

    pub fn block_of(&self, coord: usize) -> Option<usize> {
        if coord >= self.total_dim {
            return None;
        }
        // offsets are strictly increasing and start at 0
        Some(self.offsets.partition_point(|&o| o <= coord) - 1)
    }

    pub fn is_equal(&self) -> bool {
        self.sizes.windows(2).all(|w| w[0] == w[1])
    }

    /// Block weights `D_i / D` as floats.
    pub fn weights(&self) -> Vec<f64> {
        let d = self.total_dim as f64;
        self.sizes.iter().map(|&s| s as f64 / d).collect()
    }
}

/// `q = kp + i`. Accepts `i == p`, which lands on the same `q` as `(k + 1, 0)`.
pub fn flatten(outer: usize, inner: usize, blocks: usize) -> Result<usize, PartitionError> {
    if blocks == 0 {
        return Err(PartitionError::NoBlocks);
    }
    if inner > blocks {
        return Err(PartitionError::IndexOutOfRange {
            outer,
            inner,
            blocks,
            last_outer: usize::MAX,
        });
    }
    Ok(outer * blocks + inner)
}

/// Iterate layout for `N + 1` outer iterations of `p` blocks: flat indices
/// `0..=M` with `M = (N + 1)p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatLayout {
    last_outer: usize,
    blocks: usize,
}

impl FlatLayout {
    pub fn new(last_outer: usize, blocks: usize) -> Result<Self, PartitionError> {
        if blocks == 0 {
            return Err(PartitionError::NoBlocks);
        }
        Ok(Self { last_outer, blocks })
    }

    pub fn last_outer(&self) -> usize {
        self.last_outer
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// `M = (N + 1)p`, the number of block updates and multipliers `λ`.
    pub fn num_steps(&self) -> usize {
        (self.last_outer + 1) * self.blocks
    }

    /// Number of distinct iterates, `M + 1`.
    pub fn len(&self) -> usize {
        self.num_steps() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flatten(&self, outer: usize, inner: usize) -> Result<usize, PartitionError> {
        if outer > self.last_outer || inner > self.blocks {
            return Err(PartitionError::IndexOutOfRange {
                outer,
                inner,
                blocks: self.blocks,
                last_outer: self.last_outer,
            });
        }
        Ok(outer * self.blocks + inner)
    }

    /// Canonical `(k, i)`: `(0, 0)` for `q = 0`, otherwise `i` in `1..=p`.
    pub fn unflatten(&self, flat: usize) -> Result<(usize, usize), PartitionError> {
        if flat >= self.len() {
            return Err(PartitionError::FlatOutOfRange {
                flat,
                len: self.len(),
            });
        }
        if flat == 0 {
            return Ok((0, 0));
        }
        Ok(((flat - 1) / self.blocks, (flat - 1) % self.blocks + 1))
    }

    /// Zero-based block updated by the step that produces iterate `q >= 1`.
    pub fn block_at(&self, flat: usize) -> usize {
        debug_assert!(flat >= 1);
        (flat - 1) % self.blocks
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_partition_examples() {
        let part = BlockPartition::equal(4, 2).unwrap();
        assert_eq!(part.sizes(), &[2, 2]);
        assert_eq!(part.offsets(), &[0, 2]);

        let part = BlockPartition::equal(100, 20).unwrap();
        assert_eq!(part.sizes(), &[5; 20]);
        assert_eq!(part.range(19), 95..100);

        assert_eq!(
            BlockPartition::equal(3, 2),
            Err(PartitionError::NotDivisible { dim: 3, blocks: 2 })
        );
        assert_eq!(
            BlockPartition::equal(2, 4),
            Err(PartitionError::TooManyBlocks { dim: 2, blocks: 4 })
        );
        assert_eq!(BlockPartition::equal(2, 0), Err(PartitionError::NoBlocks));
    }

    #[test]
    fn general_partition_rejects_empty_blocks() {
        assert_eq!(
            BlockPartition::new(vec![2, 0, 1]),
            Err(PartitionError::EmptyBlock { block: 1 })
        );
        let part = BlockPartition::new(vec![1, 3, 2]).unwrap();
        assert_eq!(part.total_dim(), 6);
        assert_eq!(part.offsets(), &[0, 1, 4]);
        assert!(!part.is_equal());
        assert_eq!(part.weights(), vec![1.0 / 6.0, 0.5, 1.0 / 3.0]);
    }

    #[test]
    fn block_of_inverts_ranges() {
        let part = BlockPartition::new(vec![1, 3, 2]).unwrap();
        let coords: Vec<usize> = part.ranges().flatten().collect();
        assert_eq!(coords, (0..6).collect::<Vec<_>>());
        for b in 0..3 {
            for c in part.range(b) {
                assert_eq!(part.block_of(c), Some(b));
            }
        }
        assert_eq!(part.block_of(6), None);
    }

    #[test]
    fn flatten_examples() {
        assert_eq!(flatten(0, 0, 3).unwrap(), 0);
        assert_eq!(flatten(1, 0, 3).unwrap(), 3);
        assert_eq!(flatten(0, 3, 3).unwrap(), 3);
        assert_eq!(flatten(2, 1, 2).unwrap(), 5);
        assert!(flatten(0, 4, 3).is_err());
        assert!(flatten(0, 0, 0).is_err());
    }

    #[test]
    fn layout_bounds_and_canonical_form() {
        let layout = FlatLayout::new(2, 3).unwrap();
        assert_eq!(layout.num_steps(), 9);
        assert_eq!(layout.len(), 10);
        assert!(layout.flatten(3, 0).is_err());
        assert_eq!(layout.flatten(2, 3).unwrap(), 9);
        assert_eq!(layout.unflatten(0).unwrap(), (0, 0));
        assert_eq!(layout.unflatten(3).unwrap(), (0, 3));
        assert_eq!(layout.unflatten(4).unwrap(), (1, 1));
        assert_eq!(layout.unflatten(9).unwrap(), (2, 3));
        assert!(layout.unflatten(10).is_err());
        assert_eq!(layout.block_at(1), 0);
        assert_eq!(layout.block_at(3), 2);
        assert_eq!(layout.block_at(4), 0);
    }
}
