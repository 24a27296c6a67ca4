//! Local gradient-descent estimate of the Dirichlet-Fiedler vector.
//!
//! The objective is
//!
//! ```text
//! f(v) = ½ Σ_{j∼k} (v_j − v_k)² + (c/2)(n − Σ_j v_j²)
//! ```
//!
//! with `v_seed = 0`. Its gradient at a non-seed vertex only involves the
//! vertex and its neighbours, so the descent can start from the all-ones vector
//! and update only the vertices next to something that has already moved below
//! 1. Far away from the seed nothing is ever touched.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 100_000;

/// Estimates with a component beyond this in absolute value are abandoned.
pub const DIVERGENCE_BOUND: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentParams {
    /// Weight of the soft norm constraint.
    pub c: f64,
    /// Step size.
    pub delta: f64,
    /// Stop once no component moves by this much in a sweep.
    pub epsilon: f64,
    pub max_iters: usize,
}

impl DescentParams {
    /// `c = 1/k̄`, `δ = c/10`, `ε = δ/10` for an average degree estimate `k̄`.
    pub fn heuristic(avg_degree: f64) -> Result<Self> {
        if !(avg_degree > 0.0 && avg_degree.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "average degree must be positive, got {avg_degree}"
            )));
        }
        let c = 1.0 / avg_degree;
        let delta = c / 10.0;
        Ok(DescentParams { c, delta, epsilon: delta / 10.0, max_iters: DEFAULT_MAX_ITERS })
    }

    pub fn for_graph(g: &Graph) -> Result<Self> {
        Self::heuristic(g.avg_degree())
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.c, self.delta, self.epsilon].iter().all(|x| *x > 0.0 && x.is_finite());
        if !ok || self.max_iters == 0 {
            return Err(Error::InvalidParameter(format!("descent parameters must be positive: {self:?}")));
        }
        Ok(())
    }
}

pub fn default_params(avg_degree: f64) -> Result<DescentParams> {
    DescentParams::heuristic(avg_degree)
}

/// `f(v)` for a full-length vector.
pub fn objective(g: &Graph, v: &[f64], c: f64) -> f64 {
    let smooth: f64 = g.edges().map(|(j, k)| (v[j] - v[k]).powi(2)).sum();
    let norm: f64 = v.iter().map(|x| x * x).sum();
    0.5 * smooth + 0.5 * c * (g.n() as f64 - norm)
}

fn partial(g: &Graph, v: &[f64], c: f64, j: usize) -> f64 {
    let nbr_sum: f64 = g.neighbors(j).iter().map(|&k| v[k]).sum();
    -nbr_sum + (g.degree(j) as f64 - c) * v[j]
}

/// `∂f/∂v_j` for every vertex; the seed is pinned and gets 0.
pub fn gradient(g: &Graph, seed: usize, v: &[f64], c: f64) -> Vec<f64> {
    (0..g.n()).map(|j| if j == seed { 0.0 } else { partial(g, v, c, j) }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescentStatus {
    Converged,
    MaxIters,
    Diverged,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiedlerEstimate {
    pub seed: usize,
    /// One value per vertex: 0 at the seed, exactly 1 where never updated.
    pub v_tilde: Vec<f64>,
    /// Vertices updated at least once, ascending.
    pub touched: Vec<usize>,
    pub iterations: usize,
    pub last_change: f64,
    pub final_objective: f64,
    pub status: DescentStatus,
}

impl FiedlerEstimate {
    pub fn converged(&self) -> bool {
        self.status == DescentStatus::Converged
    }

    /// Values at the non-seed vertices in ascending vertex order.
    pub fn non_seed_values(&self) -> Vec<f64> {
        self.v_tilde.iter().enumerate().filter(|&(j, _)| j != self.seed).map(|(_, &x)| x).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescentTracePoint {
    pub t: usize,
    pub max_change: f64,
    pub touched_count: usize,
    pub objective: f64,
}

/// Vertices other than the seed with a neighbour whose value is below 1, ascending.
pub fn active_set(g: &Graph, seed: usize, v: &[f64], below: &[usize]) -> Vec<usize> {
    let mut active: Vec<usize> =
        below.iter().flat_map(|&b| g.neighbors(b).iter().copied()).filter(|&j| j != seed).collect();
    active.sort_unstable();
    active.dedup();
    debug_assert!(active.iter().all(|&j| g.neighbors(j).iter().any(|&k| v[k] < 1.0)));
    active
}

/// One synchronous sweep over `active`: `v_j += δ(Σ_{k∼j} v_k − (d_j − c) v_j)`.
/// Returns the largest absolute change.
pub fn descent_step(g: &Graph, v: &mut [f64], active: &[usize], params: &DescentParams) -> f64 {
    let updates: Vec<f64> = active.iter().map(|&j| -params.delta * partial(g, v, params.c, j)).collect();
    let mut max_change: f64 = 0.0;
    for (&j, du) in active.iter().zip(updates) {
        v[j] += du;
        max_change = max_change.max(du.abs());
    }
    max_change
}

pub fn descend(g: &Graph, seed: usize, params: &DescentParams) -> Result<FiedlerEstimate> {
    run(g, seed, params, None)
}

/// Like [`descend`], also recording one trace point per sweep.
pub fn descend_traced(
    g: &Graph,
    seed: usize,
    params: &DescentParams,
) -> Result<(FiedlerEstimate, Vec<DescentTracePoint>)> {
    let mut trace = Vec::new();
    let fe = run(g, seed, params, Some(&mut trace))?;
    Ok((fe, trace))
}

fn run(
    g: &Graph,
    seed: usize,
    params: &DescentParams,
    mut trace: Option<&mut Vec<DescentTracePoint>>,
) -> Result<FiedlerEstimate> {
    g.check_vertex(seed)?;
    params.validate()?;
    g.require_connected()?;

    let n = g.n();
    let mut v = vec![1.0; n];
    v[seed] = 0.0;
    let mut touched = vec![false; n];
    let mut touched_list: Vec<usize> = Vec::new();
    // Vertices whose value is below 1; only these can activate neighbours.
    let mut below: Vec<usize> = vec![seed];

    let mut status = DescentStatus::MaxIters;
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;

    while iterations < params.max_iters {
        let active = active_set(g, seed, &v, &below);
        last_change = descent_step(g, &mut v, &active, params);
        iterations += 1;

        for &j in &active {
            if !touched[j] {
                touched[j] = true;
                touched_list.push(j);
            }
        }
        below = touched_list.iter().copied().filter(|&j| v[j] < 1.0).collect();
        below.push(seed);

        if let Some(tr) = trace.as_deref_mut() {
            tr.push(DescentTracePoint {
                t: iterations,
                max_change: last_change,
                touched_count: touched_list.len(),
                objective: objective(g, &v, params.c),
            });
        }

        if active.iter().any(|&j| v[j].abs() > DIVERGENCE_BOUND || !v[j].is_finite()) {
            status = DescentStatus::Diverged;
            break;
        }
        if last_change < params.epsilon {
            status = DescentStatus::Converged;
            break;
        }
    }

    touched_list.sort_unstable();
    let final_objective = objective(g, &v, params.c);
    Ok(FiedlerEstimate {
        seed,
        v_tilde: v,
        touched: touched_list,
        iterations,
        last_change,
        final_objective,
        status,
    })
}

/// Absorption-time estimate `1 + c′ ṽ` at the non-seed vertices.
///
/// Without a known `c′` (it needs the principal eigenvalue, which is not
/// available locally) the raw `ṽ` is returned; it orders and correlates with
/// the estimate identically.
pub fn estimate_absorption_from_local(fe: &FiedlerEstimate, c_prime: Option<f64>) -> Vec<f64> {
    let vals = fe.non_seed_values();
    match c_prime {
        Some(cp) => vals.into_iter().map(|x| 1.0 + cp * x).collect(),
        None => vals,
    }
}
