//! Simple and lazy random walks, absorbing chains and absorption times.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Residual bound `‖(I−Q)m − 1‖∞` every exact solve must meet.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-8;

/// Default cap on the length of a simulated walk.
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// Row-stochastic matrix stored as per-row `(column, probability)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|&&(c, _)| c == j).map_or(0.0, |&(_, p)| p)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, p)| p).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                m[(i, j)] += p;
            }
        }
        m
    }
}

/// The simple random walk `P = D⁻¹A`.
pub fn transition_matrix(g: &Graph) -> Result<TransitionMatrix> {
    let rows = (0..g.n())
        .map(|i| {
            let d = g.degree(i);
            if d == 0 {
                return Err(Error::IsolatedVertex(i));
            }
            let p = 1.0 / d as f64;
            Ok(g.neighbors(i).iter().map(|&j| (j, p)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(TransitionMatrix { rows })
}

/// The lazy walk `½(I + P)`.
pub fn lazy(p: &TransitionMatrix) -> TransitionMatrix {
    let rows = p
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut out: Vec<(usize, f64)> = row.iter().map(|&(j, x)| (j, 0.5 * x)).collect();
            match out.iter_mut().find(|(j, _)| *j == i) {
                Some((_, x)) => *x += 0.5,
                None => {
                    out.push((i, 0.5));
                    out.sort_by_key(|&(j, _)| j);
                }
            }
            out
        })
        .collect();
    TransitionMatrix { rows }
}

/// A walk with the seed made absorbing, reduced to the transient block `Q`.
///
/// Row `r` of `Q` belongs to vertex `index_map[r]`; the seed has no row.
#[derive(Debug, Clone)]
pub struct AbsorbingChain {
    seed: usize,
    q: Vec<Vec<(usize, f64)>>,
    index_map: Vec<usize>,
    row_of: Vec<Option<usize>>,
    full: TransitionMatrix,
}

impl AbsorbingChain {
    /// Makes `seed` absorbing in an arbitrary walk.
    pub fn from_transition(p: &TransitionMatrix, seed: usize) -> Result<Self> {
        let n = p.n();
        if seed >= n {
            return Err(Error::InvalidVertex(seed));
        }
        let index_map: Vec<usize> = (0..n).filter(|&v| v != seed).collect();
        let mut row_of = vec![None; n];
        for (r, &v) in index_map.iter().enumerate() {
            row_of[v] = Some(r);
        }
        let q = index_map
            .iter()
            .map(|&v| p.row(v).iter().filter_map(|&(j, x)| row_of[j].map(|c| (c, x))).collect())
            .collect();
        Ok(AbsorbingChain { seed, q, index_map, row_of, full: p.clone() })
    }

    pub fn seed(&self) -> usize {
        self.seed
    }

    /// Order of `Q`, i.e. `n − 1`.
    pub fn dim(&self) -> usize {
        self.index_map.len()
    }

    pub fn n(&self) -> usize {
        self.full.n()
    }

    /// Vertex id of each row of `Q`.
    pub fn index_map(&self) -> &[usize] {
        &self.index_map
    }

    pub fn row_of(&self, v: usize) -> Option<usize> {
        self.row_of[v]
    }

    pub fn q_row(&self, r: usize) -> &[(usize, f64)] {
        &self.q[r]
    }

    /// The walk before the seed was made absorbing.
    pub fn walk(&self) -> &TransitionMatrix {
        &self.full
    }

    pub fn q_dense(&self) -> DMatrix<f64> {
        let k = self.dim();
        let mut m = DMatrix::zeros(k, k);
        for (r, row) in self.q.iter().enumerate() {
            for &(c, x) in row {
                m[(r, c)] += x;
            }
        }
        m
    }

    /// Dense `P̂`: the full walk with the seed row replaced by `e_seed`.
    pub fn absorbing_dense(&self) -> DMatrix<f64> {
        let mut m = self.full.to_dense();
        m.row_mut(self.seed).fill(0.0);
        m[(self.seed, self.seed)] = 1.0;
        m
    }

    /// `out = Q x` over the reduced index space.
    pub fn apply_q(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.q) {
            *o = row.iter().map(|&(c, p)| p * x[c]).sum();
        }
    }

    /// `‖(I−Q)m − 1‖∞`.
    pub fn residual(&self, m: &[f64]) -> f64 {
        let mut qm = vec![0.0; m.len()];
        self.apply_q(m, &mut qm);
        m.iter().zip(&qm).map(|(a, b)| (a - b - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// The absorbing chain of the simple random walk on `g` with `seed` absorbing.
pub fn absorbing_chain(g: &Graph, seed: usize) -> Result<AbsorbingChain> {
    g.check_vertex(seed)?;
    g.require_connected()?;
    AbsorbingChain::from_transition(&transition_matrix(g)?, seed)
}

/// Expected number of steps to absorption at `seed`, one entry per non-seed vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionVector {
    pub seed: usize,
    /// Vertex id of each entry of `m`.
    pub vertices: Vec<usize>,
    pub m: Vec<f64>,
}

impl AbsorptionVector {
    /// Expands to a length-`n` vector with 0 at the seed.
    pub fn full(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&v, &x) in self.vertices.iter().zip(&self.m) {
            out[v] = x;
        }
        out
    }

    pub fn get(&self, v: usize) -> Option<f64> {
        self.vertices.iter().position(|&u| u == v).map(|i| self.m[i])
    }
}

/// Solves `(I − Q) m = 1` by LU factorisation.
pub fn absorption_exact(chain: &AbsorbingChain) -> Result<AbsorptionVector> {
    let k = chain.dim();
    if k == 0 {
        return Err(Error::Degenerate("graph has no vertex besides the seed".into()));
    }
    let system = DMatrix::identity(k, k) - chain.q_dense();
    let m = system.lu().solve(&DVector::from_element(k, 1.0)).ok_or(Error::Singular)?;
    let m: Vec<f64> = m.iter().copied().collect();
    if m.iter().any(|x| !x.is_finite()) || chain.residual(&m) > SOLVE_RESIDUAL_TOL {
        return Err(Error::Singular);
    }
    Ok(AbsorptionVector { seed: chain.seed(), vertices: chain.index_map().to_vec(), m })
}

/// Matrix whose column `j` holds the absorption times to seed `j`, zero on the diagonal.
pub fn absorption_matrix(g: &Graph) -> Result<DMatrix<f64>> {
    g.require_connected()?;
    let p = transition_matrix(g)?;
    let columns: Vec<Vec<f64>> = (0..g.n())
        .into_par_iter()
        .map(|s| {
            let chain = AbsorbingChain::from_transition(&p, s)?;
            Ok(absorption_exact(&chain)?.full(g.n()))
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(g.n(), g.n(), |i, j| columns[j][i]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationResult {
    pub mean: f64,
    pub stderr: f64,
    pub completed: u64,
    pub truncated: u64,
}

/// Monte-Carlo estimate of the absorption time from `start` to `seed`.
///
/// Walk `w` draws from its own ChaCha8 stream `w` keyed by `rng_seed`, so the
/// result does not depend on thread scheduling.
pub fn simulate_absorption(
    g: &Graph,
    seed: usize,
    start: usize,
    walks: u64,
    max_steps: u64,
    rng_seed: u64,
) -> Result<SimulationResult> {
    g.check_vertex(seed)?;
    g.check_vertex(start)?;
    if start == seed {
        return Err(Error::InvalidParameter("start vertex equals the seed".into()));
    }
    if walks == 0 {
        return Err(Error::InvalidParameter("at least one walk is required".into()));
    }
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 0) {
        return Err(Error::IsolatedVertex(v));
    }

    let lengths: Vec<Option<u64>> = (0..walks)
        .into_par_iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(w);
            let mut at = start;
            for step in 1..=max_steps {
                let nbrs = g.neighbors(at);
                at = nbrs[rng.random_range(0..nbrs.len())];
                if at == seed {
                    return Some(step);
                }
            }
            None
        })
        .collect();

    let mut completed = 0u64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for len in lengths.iter().flatten() {
        let x = *len as f64;
        completed += 1;
        sum += x;
        sum_sq += x * x;
    }
    let truncated = walks - completed;
    if completed == 0 {
        return Err(Error::Degenerate(format!("all {walks} walks exceeded {max_steps} steps")));
    }
    let c = completed as f64;
    let mean = sum / c;
    let stderr = if completed > 1 {
        let var = ((sum_sq - c * mean * mean) / (c - 1.0)).max(0.0);
        (var / c).sqrt()
    } else {
        0.0
    };
    Ok(SimulationResult { mean, stderr, completed, truncated })
}
