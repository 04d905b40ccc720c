//! Measured bitstrings with trajectory bookkeeping.

use serde::Serialize;

use crate::error::{Error, Result};

/// Where a trajectory's randomness came from: `ChaCha8(master_seed)` on stream `stream`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrajectorySeed {
    pub master_seed: u64,
    pub stream: u64,
}

/// One row per shot; bit `q` of a row is qubit `q`'s outcome.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShotTable {
    n_qubits: usize,
    ancillas: Vec<usize>,
    rows: Vec<u64>,
    trajectory: Vec<u32>,
    seeds: Vec<TrajectorySeed>,
}

impl ShotTable {
    pub fn new(n_qubits: usize, ancillas: Vec<usize>) -> Self {
        Self {
            n_qubits,
            ancillas,
            ..Default::default()
        }
    }

    /// Build a table from bare rows, all tagged as trajectory 0.
    pub fn from_rows(n_qubits: usize, ancillas: Vec<usize>, rows: Vec<u64>) -> Self {
        let trajectory = vec![0; rows.len()];
        Self {
            n_qubits,
            ancillas,
            rows,
            trajectory,
            seeds: Vec::new(),
        }
    }

    pub fn push_trajectory(&mut self, seed: TrajectorySeed, rows: &[u64]) -> u32 {
        let id = self.seeds.len() as u32;
        self.seeds.push(seed);
        self.rows.extend_from_slice(rows);
        self.trajectory.extend(std::iter::repeat(id).take(rows.len()));
        id
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ancillas(&self) -> &[usize] {
        &self.ancillas
    }

    pub fn ancilla_mask(&self) -> u64 {
        self.ancillas.iter().fold(0, |m, &a| m | 1 << a)
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn trajectory_ids(&self) -> &[u32] {
        &self.trajectory
    }

    pub fn seeds(&self) -> &[TrajectorySeed] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn bit(&self, row: usize, q: usize) -> bool {
        self.rows[row] >> q & 1 == 1
    }

    /// Qubit-0-first text form of a row.
    pub fn bitstring(&self, row: usize) -> String {
        (0..self.n_qubits)
            .map(|q| if self.bit(row, q) { '1' } else { '0' })
            .collect()
    }

    /// Keep the rows for which `keep` holds; bits are never touched.
    pub fn filter(&self, mut keep: impl FnMut(u64) -> bool) -> ShotTable {
        let mut out = ShotTable::new(self.n_qubits, self.ancillas.clone());
        out.seeds = self.seeds.clone();
        for (&r, &t) in self.rows.iter().zip(&self.trajectory) {
            if keep(r) {
                out.rows.push(r);
                out.trajectory.push(t);
            }
        }
        out
    }

    /// Concatenate tables over the same register, renumbering trajectories.
    pub fn concat(tables: &[ShotTable]) -> Result<ShotTable> {
        let first = tables.first().ok_or(Error::EmptySamples)?;
        let mut out = ShotTable::new(first.n_qubits, first.ancillas.clone());
        for t in tables {
            if t.n_qubits != first.n_qubits {
                return Err(Error::DimensionMismatch(t.n_qubits, first.n_qubits));
            }
            let offset = out.seeds.len() as u32;
            out.seeds.extend_from_slice(&t.seeds);
            out.rows.extend_from_slice(&t.rows);
            out.trajectory.extend(t.trajectory.iter().map(|i| i + offset));
        }
        Ok(out)
    }

    /// Mean of `(−1)^{popcount(row & mask)}` with its standard error.
    pub fn parity_mean(&self, mask: u64) -> Result<(f64, f64)> {
        mean_stderr(
            self.rows
                .iter()
                .map(|r| if (r & mask).count_ones() & 1 == 1 { -1.0 } else { 1.0 }),
        )
    }

    /// Empirical distribution over `qubits` (bit `i` of the index is `qubits[i]`).
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(Error::EmptySamples);
        }
        let mut p = vec![0.0; 1 << qubits.len()];
        for &r in &self.rows {
            let idx = qubits
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &q)| acc | ((r >> q & 1) as usize) << i);
            p[idx] += 1.0;
        }
        let n = self.len() as f64;
        p.iter_mut().for_each(|x| *x /= n);
        Ok(p)
    }
}

/// Sample mean and standard error of the mean (two-pass, so sums of ±1 are exact).
pub fn mean_stderr(values: impl IntoIterator<Item = f64>) -> Result<(f64, f64)> {
    let v: Vec<f64> = values.into_iter().collect();
    if v.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let stderr = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok((mean, stderr))
}

/// Mean and standard error when values come in correlated clusters (shots of
/// one trajectory share its noise history). Uses the cluster-robust variance
/// `k/(k−1)·Σ_c (S_c − m·n_c)² / n²`; `NaN` error with fewer than two clusters.
pub fn clustered_mean_stderr(values: &[f64], clusters: &[u32]) -> Result<(f64, f64)> {
    if values.len() != clusters.len() {
        return Err(Error::DimensionMismatch(values.len(), clusters.len()));
    }
    if values.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut sums: std::collections::BTreeMap<u32, (f64, f64)> = Default::default();
    for (&x, &c) in values.iter().zip(clusters) {
        let e = sums.entry(c).or_default();
        e.0 += x;
        e.1 += 1.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let k = sums.len() as f64;
    if sums.len() < 2 {
        return Ok((mean, f64::NAN));
    }
    let ss: f64 = sums.values().map(|(s, m)| (s - mean * m).powi(2)).sum();
    Ok((mean, (k / (k - 1.0) * ss).sqrt() / n))
}
