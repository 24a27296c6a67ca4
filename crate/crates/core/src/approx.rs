//! Spectral approximations of absorption times and how to score them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov::{AbsorbingChain, AbsorptionVector};
use crate::spectral::{eig_symmetric, normalized_transient, DirichletFiedler, MatrixTag};

/// Partial sum `Σ_{t=0..T} Qᵗ1`.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesEstimate {
    pub seed: usize,
    pub cutoff: usize,
    pub vertices: Vec<usize>,
    pub partial: Vec<f64>,
}

/// Successive partial sums of the absorption-time series, one mat-vec per step.
pub struct SeriesIter<'a> {
    chain: &'a AbsorbingChain,
    term: Vec<f64>,
    scratch: Vec<f64>,
    partial: Vec<f64>,
    t: usize,
}

impl<'a> SeriesIter<'a> {
    pub fn new(chain: &'a AbsorbingChain) -> Self {
        let k = chain.dim();
        SeriesIter { chain, term: vec![1.0; k], scratch: vec![0.0; k], partial: vec![1.0; k], t: 0 }
    }

    /// Cutoff of the partial sum currently held.
    pub fn cutoff(&self) -> usize {
        self.t
    }

    pub fn partial(&self) -> &[f64] {
        &self.partial
    }

    /// Adds the next term `Q^{T+1} 1`.
    pub fn advance(&mut self) {
        self.chain.apply_q(&self.term, &mut self.scratch);
        std::mem::swap(&mut self.term, &mut self.scratch);
        for (p, x) in self.partial.iter_mut().zip(&self.term) {
            *p += x;
        }
        self.t += 1;
    }

    pub fn estimate(&self) -> SeriesEstimate {
        SeriesEstimate {
            seed: self.chain.seed(),
            cutoff: self.t,
            vertices: self.chain.index_map().to_vec(),
            partial: self.partial.clone(),
        }
    }
}

pub fn absorption_series(chain: &AbsorbingChain, cutoff: usize) -> SeriesEstimate {
    let mut it = SeriesIter::new(chain);
    while it.cutoff() < cutoff {
        it.advance();
    }
    it.estimate()
}

/// One row of a series convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub t: usize,
    pub sse: f64,
    /// `None` while the partial sum is still constant.
    pub pearson: Option<f64>,
}

/// SSE per vertex and Pearson correlation of every partial sum `T = 0..=t_max`
/// against the exact absorption times.
pub fn series_trace(
    chain: &AbsorbingChain,
    exact: &AbsorptionVector,
    t_max: usize,
) -> Result<Vec<TracePoint>> {
    let mut it = SeriesIter::new(chain);
    let mut out = Vec::with_capacity(t_max + 1);
    loop {
        let r = compare(exact, it.partial())?;
        out.push(TracePoint { t: it.cutoff(), sse: r.sse_per_vertex, pearson: r.pearson });
        if it.cutoff() >= t_max {
            return Ok(out);
        }
        it.advance();
    }
}

/// Rank-1 spectral approximation `1 + λ₁/(1−λ₁) · v₁ (v₁ᵀ d)`.
#[derive(Debug, Clone, Serialize)]
pub struct Rank1Estimate {
    pub seed: usize,
    pub lambda1: f64,
    pub vertices: Vec<usize>,
    pub estimate: Vec<f64>,
    /// `c₁ = v₁ᵀ d` over the non-seed vertices.
    pub c1: f64,
    /// `λ₁/(1−λ₁) · c₁`, so that `estimate_k = 1 + c′ (v₁)_k`.
    pub c_prime: f64,
}

/// `degrees` is indexed by vertex id over the whole graph.
pub fn absorption_rank1(df: &DirichletFiedler, degrees: &[f64]) -> Result<Rank1Estimate> {
    if df.lambda1 >= 1.0 - 1e-12 {
        return Err(Error::Degenerate(format!(
            "principal eigenvalue {} is not below 1; the chain does not absorb",
            df.lambda1
        )));
    }
    let c1: f64 = df.vertices.iter().zip(&df.v).map(|(&vert, &x)| x * degrees[vert]).sum();
    let c_prime = df.lambda1 / (1.0 - df.lambda1) * c1;
    let estimate = df.v.iter().map(|&x| 1.0 + c_prime * x).collect();
    Ok(Rank1Estimate {
        seed: df.seed,
        lambda1: df.lambda1,
        vertices: df.vertices.clone(),
        estimate,
        c1,
        c_prime,
    })
}

/// Pearson correlation, `None` when either vector is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    // Treat spreads at rounding level as constant.
    let floor = 1e-24 * n * (ma * ma + mb * mb).max(1.0);
    if saa <= floor || sbb <= floor {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareReport {
    /// `None` when either vector is constant.
    pub pearson: Option<f64>,
    /// `Σ (est − exact)² / n` with `n` the graph order.
    pub sse_per_vertex: f64,
    pub max_abs_diff: f64,
    pub exact_constant: bool,
}

/// Scores an estimate against exact absorption times, entry by entry.
pub fn compare(exact: &AbsorptionVector, est: &[f64]) -> Result<CompareReport> {
    if est.len() != exact.m.len() {
        return Err(Error::InvalidParameter(format!(
            "estimate has {} entries, exact has {}",
            est.len(),
            exact.m.len()
        )));
    }
    if est.len() < 2 {
        return Err(Error::InvalidParameter("need at least two values to compare".into()));
    }
    let order = (exact.m.len() + 1) as f64;
    let mut sse = 0.0;
    let mut max_abs_diff: f64 = 0.0;
    for (a, b) in exact.m.iter().zip(est) {
        let d = b - a;
        sse += d * d;
        max_abs_diff = max_abs_diff.max(d.abs());
    }
    let first = exact.m[0];
    let exact_constant = exact.m.iter().all(|&x| x == first);
    Ok(CompareReport {
        pearson: pearson(&exact.m, est),
        sse_per_vertex: sse / order,
        max_abs_diff,
        exact_constant,
    })
}

/// Eigenvalues of `P̂`, descending: 1 followed by the spectrum of `Q`.
pub fn spectrum_profile(chain: &AbsorbingChain, degrees: &[f64]) -> Result<Vec<f64>> {
    let pairs = eig_symmetric(&normalized_transient(chain, degrees), MatrixTag::NormalizedTransient)?;
    let mut out = Vec::with_capacity(pairs.len() + 1);
    out.push(1.0);
    out.extend(pairs.iter().map(|p| p.value));
    Ok(out)
}

/// Position `k` (1-based) maximising `values[k-1] − values[k]` among the first
/// `top` entries of a descending sequence.
pub fn largest_gap_after(values: &[f64], top: usize) -> Option<usize> {
    let top = top.min(values.len());
    (1..top).map(|k| (k, values[k - 1] - values[k])).max_by(|a, b| a.1.total_cmp(&b.1)).map(|(k, _)| k)
}
