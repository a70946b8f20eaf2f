//! External clustering quality: purity, adjusted Rand index and normalized
//! mutual information.
//!
//! All functions take two label slices aligned by object. Label values are
//! arbitrary; only the grouping they induce matters.

use std::collections::HashMap;
use std::hash::Hash;

use crate::partition::ClusterPartition;
use crate::{Result, SdcError};

/// Counts `n[k][l] = |pred cluster k ∩ truth class l|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

fn dense<L: Hash + Eq>(labels: &[L]) -> (Vec<usize>, usize) {
    let mut ids: HashMap<&L, usize> = HashMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l).or_insert(next)
        })
        .collect();
    (out, ids.len())
}

impl ContingencyTable {
    pub fn new<P: Hash + Eq, T: Hash + Eq>(pred: &[P], truth: &[T]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(SdcError::LabelMismatch(format!(
                "{} predicted labels vs {} true labels",
                pred.len(),
                truth.len()
            )));
        }
        if pred.is_empty() {
            return Err(SdcError::LabelMismatch("no objects to compare".into()));
        }
        let (p, rows) = dense(pred);
        let (t, cols) = dense(truth);
        let mut counts = vec![vec![0u64; cols]; rows];
        for (&k, &l) in p.iter().zip(&t) {
            counts[k][l] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..cols).map(|l| counts.iter().map(|r| r[l]).sum()).collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            total: pred.len() as u64,
        })
    }

    /// Table for a partition of objects `0..truth.len()`.
    pub fn from_partition<T: Hash + Eq>(pred: &ClusterPartition, truth: &[T]) -> Result<Self> {
        Self::new(&pred.dense_labels(truth.len())?, truth)
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn purity(&self) -> f64 {
        let hits: u64 = self
            .counts
            .iter()
            .map(|r| r.iter().copied().max().unwrap_or(0))
            .sum();
        hits as f64 / self.total as f64
    }

    pub fn ari(&self) -> Result<f64> {
        if self.total < 2 {
            return Err(SdcError::LabelMismatch("ARI needs at least two objects".into()));
        }
        let pairs = |x: u64| (x * x.saturating_sub(1) / 2) as f64;
        let index: f64 = self.counts.iter().flatten().map(|&c| pairs(c)).sum();
        let sum_a: f64 = self.row_sums.iter().map(|&a| pairs(a)).sum();
        let sum_b: f64 = self.col_sums.iter().map(|&b| pairs(b)).sum();
        let expected = sum_a * sum_b / pairs(self.total);
        let max = 0.5 * (sum_a + sum_b);
        if max == expected {
            return Ok(if self.is_bijection() { 1.0 } else { 0.0 });
        }
        Ok((index - expected) / (max - expected))
    }

    /// NMI with arithmetic-mean normalization and natural logs.
    pub fn nmi(&self) -> f64 {
        let n = self.total as f64;
        let entropy = |sums: &[u64]| -> f64 {
            sums.iter()
                .filter(|&&s| s > 0)
                .map(|&s| {
                    let p = s as f64 / n;
                    -p * p.ln()
                })
                .sum()
        };
        let h_pred = entropy(&self.row_sums);
        let h_truth = entropy(&self.col_sums);
        match (h_pred == 0.0, h_truth == 0.0) {
            (true, true) => return 1.0,
            (true, false) | (false, true) => return 0.0,
            _ => {}
        }
        let mut mi = 0.0;
        for (k, row) in self.counts.iter().enumerate() {
            for (l, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let c = c as f64;
                let a = self.row_sums[k] as f64;
                let b = self.col_sums[l] as f64;
                mi += (c / n) * (n * c / (a * b)).ln();
            }
        }
        (mi / (0.5 * (h_pred + h_truth))).clamp(0.0, 1.0)
    }

    /// Every row and column has exactly one non-zero cell.
    fn is_bijection(&self) -> bool {
        let nonzero = |it: &mut dyn Iterator<Item = u64>| it.filter(|&c| c > 0).count() == 1;
        self.counts.iter().all(|r| nonzero(&mut r.iter().copied()))
            && (0..self.col_sums.len())
                .all(|l| nonzero(&mut self.counts.iter().map(|r| r[l])))
    }
}

pub fn purity<P: Hash + Eq, T: Hash + Eq>(pred: &[P], truth: &[T]) -> Result<f64> {
    Ok(ContingencyTable::new(pred, truth)?.purity())
}

pub fn ari<P: Hash + Eq, T: Hash + Eq>(pred: &[P], truth: &[T]) -> Result<f64> {
    ContingencyTable::new(pred, truth)?.ari()
}

pub fn nmi<P: Hash + Eq, T: Hash + Eq>(pred: &[P], truth: &[T]) -> Result<f64> {
    Ok(ContingencyTable::new(pred, truth)?.nmi())
}

/// All three scores at once.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Scores {
    pub nmi: f64,
    pub ari: f64,
    pub purity: f64,
}

pub fn score<P: Hash + Eq, T: Hash + Eq>(pred: &[P], truth: &[T]) -> Result<Scores> {
    let table = ContingencyTable::new(pred, truth)?;
    Ok(Scores {
        nmi: table.nmi(),
        ari: table.ari()?,
        purity: table.purity(),
    })
}
