//! Exhaustive search over set partitions for the canonical-loss optimum.
//!
//! Only usable on tiny inputs: the number of partitions of n records is the Bell
//! number B(n), and runs above [`MAX_ORACLE_RECORDS`] are refused up front.

use std::cmp::Ordering;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::information_loss::{cluster_il_canonical, total_il_canonical, Cluster, Partition};
use crate::taxonomy::Hierarchies;

pub const MAX_ORACLE_RECORDS: usize = 12;

/// Relative tolerance under which two losses count as tied.
const TIE_TOLERANCE: f64 = 1e-9;

/// B(n), saturating at `u128::MAX`.
pub fn bell_number(n: usize) -> u128 {
    // Bell triangle.
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("row never empty"));
        for &x in &row {
            let last = *next.last().expect("next never empty");
            next.push(last.saturating_add(x));
        }
        row = next;
    }
    row[0]
}

/// Iterator over the set partitions of `{0..n}` whose blocks all have at least
/// `min_size` members. Partitions come out in lexicographic order of their
/// restricted growth strings; each block is ascending and blocks are ordered by
/// their first element.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    min_size: usize,
    /// Block label of each element; `labels[i] ≤ 1 + max(labels[..i])`.
    labels: Vec<usize>,
    /// `prefix_max[i] = max(labels[..=i])`.
    prefix_max: Vec<usize>,
    started: bool,
    done: bool,
}

impl SetPartitions {
    fn advance(&mut self) -> bool {
        let n = self.labels.len();
        if !self.started {
            self.started = true;
            return n > 0;
        }
        for i in (1..n).rev() {
            if self.labels[i] <= self.prefix_max[i - 1] {
                self.labels[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.labels[i]);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                return true;
            }
        }
        false
    }

    fn blocks(&self) -> Vec<Vec<usize>> {
        let count = self.prefix_max.last().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (i, &b) in self.labels.iter().enumerate() {
            blocks[b].push(i);
        }
        blocks
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<Vec<usize>>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            if !self.advance() {
                self.done = true;
                break;
            }
            let blocks = self.blocks();
            if blocks.iter().all(|b| b.len() >= self.min_size) {
                return Some(blocks);
            }
        }
        None
    }
}

/// All set partitions of `{0..n}` with every block of size at least `min_size`.
/// A `min_size` above `n` yields nothing.
pub fn enumerate_partitions(n: usize, min_size: usize) -> Result<SetPartitions> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if n > MAX_ORACLE_RECORDS {
        return Err(Error::OracleTooLarge {
            n,
            cap: MAX_ORACLE_RECORDS,
            estimate: bell_number(n),
        });
    }
    if min_size == 0 {
        return Err(Error::InvalidK);
    }
    Ok(SetPartitions {
        min_size,
        labels: vec![0; n],
        prefix_max: vec![0; n],
        started: false,
        done: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_partition: Partition,
    pub best_il: f64,
    pub partitions_examined: u64,
}

/// Minimize canonical loss over every partition whose blocks have at least
/// `min_size` records. Ties go to fewer clusters, then to the lexicographically
/// smallest block list.
pub fn optimal_partition(
    ds: &Dataset,
    min_size: usize,
    trees: &Hierarchies,
) -> Result<OracleResult> {
    let n = ds.len();
    if min_size > n {
        return Err(Error::Infeasible { n, k: min_size });
    }
    let partitions = enumerate_partitions(n, min_size)?;

    // Loss of a block depends only on its member set; memoize by bitmask.
    let mut block_loss: Vec<Option<f64>> = vec![None; 1 << n];
    let mut loss_of = |block: &[usize]| -> Result<f64> {
        let mask = block.iter().fold(0usize, |m, &i| m | (1 << i));
        if let Some(loss) = block_loss[mask] {
            return Ok(loss);
        }
        let loss = cluster_il_canonical(&Cluster::from_members(ds, block.to_vec())?, ds, trees)?;
        block_loss[mask] = Some(loss);
        Ok(loss)
    };

    let mut best: Option<(f64, Vec<Vec<usize>>)> = None;
    let mut examined = 0u64;
    for blocks in partitions {
        examined += 1;
        let mut total = 0.0;
        for block in &blocks {
            total += loss_of(block)?;
        }
        let better = match &best {
            None => true,
            Some((best_il, best_blocks)) => compare(total, &blocks, *best_il, best_blocks).is_lt(),
        };
        if better {
            best = Some((total, blocks));
        }
    }

    let (_, blocks) = best.ok_or(Error::Infeasible { n, k: min_size })?;
    let best_partition = Partition::from_blocks(ds, blocks)?;
    let best_il = total_il_canonical(&best_partition, ds, trees)?.total;
    Ok(OracleResult {
        best_partition,
        best_il,
        partitions_examined: examined,
    })
}

fn compare(il_a: f64, a: &[Vec<usize>], il_b: f64, b: &[Vec<usize>]) -> Ordering {
    let scale = il_a.abs().max(il_b.abs()).max(1.0);
    let by_loss = if (il_a - il_b).abs() <= TIE_TOLERANCE * scale {
        Ordering::Equal
    } else {
        il_a.total_cmp(&il_b)
    };
    by_loss.then(a.len().cmp(&b.len())).then_with(|| a.cmp(b))
}
