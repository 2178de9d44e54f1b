//! Blocking scheme and independent block copies by maximal coupling.
//!
//! The sample Z_1..Z_T is extended by a deterministic padding point to
//! {z, Z_1, ..., Z_T, z, z, ...} and rearranged into M columns of n+1 entries
//! W_{i,j} = Z_{iM+j}, where M is an integer with T/(n+1) < M ≤ T/n. Within a
//! column, consecutive entries are M steps apart, so for a finite-state chain
//! each entry can be coupled against the stationary law through the lag-M
//! kernel: the pair (W_{i,j}, W*_{i,j}) is drawn from the maximal coupling of
//! (P^M(x, ·), π) given the previous entry x, which realizes the smallest
//! possible mismatch probability, the total-variation distance.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mixing::{validate_distribution, MarkovChainSpec, Trajectory};
use crate::rng::rng_from_seed;

/// Block layout for sample size T and effective sample size n: M columns of
/// n+1 entries, padded at extended indices 0 and above T.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    t: u64,
    n: u64,
    m: u64,
}

impl BlockLayout {
    pub fn t_len(&self) -> u64 {
        self.t
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn num_columns(&self) -> u64 {
        self.m
    }

    /// Time index of entry (i, j) in 1..=T, or `None` for a padding slot.
    pub fn entry(&self, i: u64, j: u64) -> Option<u64> {
        debug_assert!(i <= self.n && j < self.m);
        let e = i * self.m + j;
        if e >= 1 && e <= self.t {
            Some(e)
        } else {
            None
        }
    }
}

/// Picks M = ⌊T/n⌋, the largest admissible block count (smallest padding),
/// and fails with [`Error::BlockingInfeasible`] when (T/(n+1), T/n] contains
/// no integer.
pub fn block_layout(t: u64, n: u64) -> Result<BlockLayout> {
    if n < 1 || n > t {
        return Err(Error::Invalid(format!("need 1 <= n <= T, got n={n}, T={t}")));
    }
    let m = t / n;
    // M > T/(n+1)  <=>  M(n+1) > T, in exact integer arithmetic
    if m * (n + 1) <= t {
        return Err(Error::BlockingInfeasible { t, n });
    }
    Ok(BlockLayout { t, n, m })
}

/// Column sequences (W_{0,j}, ..., W_{n,j}) for j = 0..M−1, with `None` in
/// padding slots.
pub fn extract_block_sequences<T: Clone>(
    traj: &Trajectory<T>,
    layout: &BlockLayout,
) -> Result<Vec<Vec<Option<T>>>> {
    if traj.len() as u64 != layout.t {
        return Err(Error::Invalid(format!(
            "trajectory length {} does not match layout T = {}",
            traj.len(),
            layout.t
        )));
    }
    let mut columns = Vec::with_capacity(layout.m as usize);
    for j in 0..layout.m {
        let mut column = Vec::with_capacity(layout.n as usize + 1);
        for i in 0..=layout.n {
            column.push(layout.entry(i, j).map(|t| traj.at(t as usize).clone()));
        }
        columns.push(column);
    }
    Ok(columns)
}

/// Jointly drawn pair with exact marginals; `matched` implies equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoupledPair<T> {
    pub original: T,
    pub copy: T,
    pub matched: bool,
}

/// Total-variation distance between two distributions on the same state set.
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    validate_distribution(p, p.len())?;
    validate_distribution(q, p.len())?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Maximal coupling of two finite distributions by the overlap/residual
/// split: with probability ω = Σ min(p, q) both coordinates are drawn from
/// the normalized overlap (matched); otherwise they are drawn independently
/// from the disjoint residuals. P(matched) = 1 − TV(p, q) and both marginals
/// are exact.
pub fn maximal_coupling<R: Rng>(p: &[f64], q: &[f64], rng: &mut R) -> Result<CoupledPair<usize>> {
    validate_distribution(p, p.len())?;
    validate_distribution(q, p.len())?;
    let overlap: Vec<f64> = p.iter().zip(q).map(|(a, b)| a.min(*b)).collect();
    let omega: f64 = overlap.iter().sum();
    if rng.random::<f64>() < omega {
        let state = crate::mixing::sample_index(&overlap, omega * rng.random::<f64>());
        return Ok(CoupledPair { original: state, copy: state, matched: true });
    }
    let residual_mass = 1.0 - omega;
    let rp: Vec<f64> = p.iter().zip(&overlap).map(|(a, o)| (a - o) / residual_mass).collect();
    let rq: Vec<f64> = q.iter().zip(&overlap).map(|(a, o)| (a - o) / residual_mass).collect();
    let original = crate::mixing::sample_index(&rp, rng.random::<f64>());
    let copy = crate::mixing::sample_index(&rq, rng.random::<f64>());
    Ok(CoupledPair { original, copy, matched: false })
}

/// Draws the column (W_{0,j}, ..., W_{n,j}) of the blocking scheme together
/// with its coupled copy (W*_{0,j}, ...): W follows the lag-M skeleton of the
/// chain started from stationarity, each W* is a stationary draw, and each
/// pair is maximally coupled given the realized predecessor. Padding slots
/// stay `None` in both sequences.
pub fn sample_coupled_blocks(
    spec: &MarkovChainSpec,
    layout: &BlockLayout,
    j: u64,
    seed: u64,
) -> Result<(Vec<Option<usize>>, Vec<Option<usize>>)> {
    if j >= layout.m {
        return Err(Error::Invalid(format!(
            "column index {j} out of range for M = {}",
            layout.m
        )));
    }
    let m_states = spec.num_states();
    let lag_kernel = spec.transition_power(layout.m);
    let pi = spec.stationary();
    let mut rng = rng_from_seed(seed);
    let mut w = Vec::with_capacity(layout.n as usize + 1);
    let mut w_star = Vec::with_capacity(layout.n as usize + 1);
    let mut prev: Option<usize> = None;
    for i in 0..=layout.n {
        if layout.entry(i, j).is_none() {
            w.push(None);
            w_star.push(None);
            continue;
        }
        let conditional: &[f64] = match prev {
            Some(x) => &lag_kernel[x * m_states..(x + 1) * m_states],
            None => pi,
        };
        let pair = maximal_coupling(conditional, pi, &mut rng)?;
        w.push(Some(pair.original));
        w_star.push(Some(pair.copy));
        prev = Some(pair.original);
    }
    Ok((w, w_star))
}

/// Normalized coupling discrepancy of one realized column pair:
/// `sup_{θ ∈ grid} |(1/n) Σ_i (g(W_i, θ) − g(W*_i, θ))|`, with g defined as 0
/// at padding slots (the centering convention of the blocking scheme).
pub fn coupling_discrepancy<Z, Th>(
    g: impl Fn(&Z, &Th) -> f64,
    w: &[Option<Z>],
    w_star: &[Option<Z>],
    theta_grid: &[Th],
) -> Result<f64> {
    if theta_grid.is_empty() {
        return Err(Error::Invalid("theta grid must be nonempty".into()));
    }
    if w.len() != w_star.len() {
        return Err(Error::Invalid(format!(
            "sequence lengths differ: {} vs {}",
            w.len(),
            w_star.len()
        )));
    }
    if w.len() < 2 {
        return Err(Error::Invalid("block sequences must have length n + 1 >= 2".into()));
    }
    let n = (w.len() - 1) as f64;
    let mut sup = 0.0_f64;
    for theta in theta_grid {
        let mut acc = 0.0;
        for (a, b) in w.iter().zip(w_star) {
            let ga = a.as_ref().map_or(0.0, |z| g(z, theta));
            let gb = b.as_ref().map_or(0.0, |z| g(z, theta));
            acc += ga - gb;
        }
        sup = sup.max((acc / n).abs());
    }
    Ok(sup)
}
