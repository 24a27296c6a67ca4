//! Score vectors to bipartitions, cut quality and the local clustering pipeline.

use serde::{Deserialize, Serialize};

use crate::approx::{absorption_rank1, absorption_series};
use crate::descent::{descend, DescentParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::markov::{absorbing_chain, absorption_exact};
use crate::spectral::dirichlet_fiedler_of_chain;

/// Cuts with a normalized value at or above this are flagged as low quality.
pub const LOW_QUALITY_NCUT: f64 = 1.0;

/// Score used to rank vertices by proximity to the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactAbsorption,
    Rank1,
    Series { cutoff: usize },
    LocalDescent { params: Option<DescentParams> },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ExactAbsorption => "exact-absorption",
            Method::Rank1 => "rank1",
            Method::Series { .. } => "series",
            Method::LocalDescent { .. } => "local-descent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classifier {
    Kmeans,
    Median,
}

impl Classifier {
    pub fn name(&self) -> &'static str {
        match self {
            Classifier::Kmeans => "kmeans",
            Classifier::Median => "median",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutResult {
    pub seed: Option<usize>,
    /// The side `S`, ascending vertex ids.
    pub members: Vec<usize>,
    pub capacity: usize,
    pub vol_s: f64,
    pub vol_sbar: f64,
    pub ncut: f64,
    pub threshold: f64,
    pub method: Option<Method>,
    pub classifier: Option<Classifier>,
}

impl CutResult {
    fn new(g: &Graph, members: Vec<usize>, threshold: f64) -> Result<Self> {
        let mask = membership(g, &members)?;
        let (capacity, vol_s, vol_sbar) = cut_stats(g, &mask);
        Ok(CutResult {
            seed: None,
            members,
            capacity,
            vol_s,
            vol_sbar,
            ncut: capacity as f64 / vol_s + capacity as f64 / vol_sbar,
            threshold,
            method: None,
            classifier: None,
        })
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// The cluster is only the seed, or the cut is no better than `LOW_QUALITY_NCUT`.
    pub fn is_low_quality(&self) -> bool {
        self.members.len() <= 1 || self.ncut >= LOW_QUALITY_NCUT
    }
}

/// Result of a one-dimensional two-classification.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoMeans {
    /// 0 for the low-mean class (the cluster), 1 for the rest.
    pub labels: Vec<u8>,
    pub threshold: f64,
}

/// Optimal 2-means on the line by scanning every split of the sorted values.
///
/// Equal values always land in the same class; among equally good splits the
/// lowest one wins.
pub fn two_means_1d(scores: &[f64]) -> Result<TwoMeans> {
    if scores.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("scores must be finite".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let n = scores.len();
    let mean = scores.iter().sum::<f64>() / n.max(1) as f64;
    let xs: Vec<f64> = order.iter().map(|&i| scores[i] - mean).collect();

    let total: f64 = xs.iter().sum();
    let total_sq: f64 = xs.iter().map(|x| x * x).sum();
    let scale = total_sq.max(f64::MIN_POSITIVE);
    let mut best: Option<(usize, f64)> = None;
    let (mut left, mut left_sq) = (0.0, 0.0);
    for k in 1..n {
        left += xs[k - 1];
        left_sq += xs[k - 1] * xs[k - 1];
        if xs[k] == xs[k - 1] {
            continue;
        }
        let (kl, kr) = (k as f64, (n - k) as f64);
        let right = total - left;
        let cost = (left_sq - left * left / kl) + (total_sq - left_sq - right * right / kr);
        if best.is_none_or(|(_, b)| cost < b - 1e-12 * scale) {
            best = Some((k, cost));
        }
    }
    let (k, _) = best.ok_or_else(|| Error::Degenerate("all scores are equal".into()))?;
    let mut labels = vec![1u8; n];
    for &i in &order[..k] {
        labels[i] = 0;
    }
    let threshold = 0.5 * (scores[order[k - 1]] + scores[order[k]]);
    Ok(TwoMeans { labels, threshold })
}

fn median(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Splits at the median into (above, below); values equal to the median join
/// the smaller side, and the lower side when both are the same size.
fn median_split(values: &[f64]) -> (Vec<usize>, Vec<usize>, f64) {
    let theta = median(values);
    let mut above = Vec::new();
    let mut below = Vec::new();
    let mut tied = Vec::new();
    for (i, &x) in values.iter().enumerate() {
        if x > theta {
            above.push(i);
        } else if x < theta {
            below.push(i);
        } else {
            tied.push(i);
        }
    }
    if above.len() < below.len() {
        above.extend(tied);
        above.sort_unstable();
    } else {
        below.extend(tied);
        below.sort_unstable();
    }
    (above, below, theta)
}

/// Spectral bisection: `S` is the set of vertices strictly above the median.
pub fn bipartition_by_median(g: &Graph, fiedler: &[f64]) -> Result<CutResult> {
    if fiedler.len() != g.n() || g.n() < 2 {
        return Err(Error::InvalidParameter("need one value per vertex and at least two vertices".into()));
    }
    let (above, below, theta) = median_split(fiedler);
    if above.is_empty() || below.is_empty() {
        return Err(Error::Degenerate("median split leaves one side empty".into()));
    }
    let mut cut = CutResult::new(g, above, theta)?;
    cut.classifier = Some(Classifier::Median);
    Ok(cut)
}

fn membership(g: &Graph, members: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; g.n()];
    for &v in members {
        g.check_vertex(v)?;
        mask[v] = true;
    }
    let size = mask.iter().filter(|&&b| b).count();
    if size == 0 || size == g.n() {
        return Err(Error::InvalidParameter("cut side must be a nonempty proper subset".into()));
    }
    Ok(mask)
}

fn cut_stats(g: &Graph, mask: &[bool]) -> (usize, f64, f64) {
    let capacity = g.edges().filter(|&(u, v)| mask[u] != mask[v]).count();
    let (mut vol_s, mut vol_sbar) = (0.0, 0.0);
    for (v, &inside) in mask.iter().enumerate() {
        if inside {
            vol_s += g.degree(v) as f64;
        } else {
            vol_sbar += g.degree(v) as f64;
        }
    }
    (capacity, vol_s, vol_sbar)
}

/// Number of edges between `members` and the rest of the graph.
pub fn cut_capacity(g: &Graph, members: &[usize]) -> Result<usize> {
    Ok(cut_stats(g, &membership(g, members)?).0)
}

/// `C/Vol(S) + C/Vol(V∖S)`.
pub fn normalized_cut(g: &Graph, members: &[usize]) -> Result<f64> {
    let (c, a, b) = cut_stats(g, &membership(g, members)?);
    Ok(c as f64 / a + c as f64 / b)
}

/// Per-vertex score for `method`, 0 at the seed.
pub fn proximity_scores(g: &Graph, seed: usize, method: &Method) -> Result<Vec<f64>> {
    let n = g.n();
    let expand = |vertices: &[usize], vals: &[f64]| {
        let mut out = vec![0.0; n];
        for (&v, &x) in vertices.iter().zip(vals) {
            out[v] = x;
        }
        out
    };
    match method {
        Method::ExactAbsorption => {
            let chain = absorbing_chain(g, seed)?;
            Ok(absorption_exact(&chain)?.full(n))
        }
        Method::Rank1 => {
            let chain = absorbing_chain(g, seed)?;
            let degrees = g.degrees();
            let df = dirichlet_fiedler_of_chain(&chain, &degrees)?;
            let r = absorption_rank1(&df, &degrees)?;
            Ok(expand(&r.vertices, &r.estimate))
        }
        Method::Series { cutoff } => {
            let chain = absorbing_chain(g, seed)?;
            let s = absorption_series(&chain, *cutoff);
            Ok(expand(&s.vertices, &s.partial))
        }
        Method::LocalDescent { params } => {
            let params = match params {
                Some(p) => *p,
                None => DescentParams::for_graph(g)?,
            };
            let fe = descend(g, seed, &params)?;
            if !fe.converged() {
                return Err(Error::Degenerate(format!(
                    "local descent stopped without converging ({:?} after {} sweeps)",
                    fe.status, fe.iterations
                )));
            }
            Ok(fe.v_tilde)
        }
    }
}

/// Scores every vertex by `method`, two-classifies the scores and returns the
/// low class as the seed's cluster. The seed is always a member.
pub fn local_cluster(g: &Graph, seed: usize, method: Method, classifier: Classifier) -> Result<CutResult> {
    g.check_vertex(seed)?;
    let scores = proximity_scores(g, seed, &method)?;
    cluster_from_scores(g, seed, &scores, method, classifier)
}

/// The classification half of [`local_cluster`], for precomputed scores.
pub fn cluster_from_scores(
    g: &Graph,
    seed: usize,
    scores: &[f64],
    method: Method,
    classifier: Classifier,
) -> Result<CutResult> {
    let mut rest = scores.iter().enumerate().filter(|&(v, _)| v != seed).map(|(_, &x)| x);
    let first = rest.next();
    if first.is_none() || rest.all(|x| Some(x) == first) {
        return Err(Error::Degenerate("all non-seed vertices score the same".into()));
    }

    let (mut members, threshold) = match classifier {
        Classifier::Kmeans => {
            let tm = two_means_1d(scores)?;
            let m: Vec<usize> = (0..g.n()).filter(|&v| tm.labels[v] == 0).collect();
            (m, tm.threshold)
        }
        Classifier::Median => {
            let (_, below, theta) = median_split(scores);
            (below, theta)
        }
    };
    if let Err(pos) = members.binary_search(&seed) {
        members.insert(pos, seed);
    }
    if members.len() == g.n() {
        return Err(Error::Degenerate("every vertex was classified into the cluster".into()));
    }
    let mut cut = CutResult::new(g, members, threshold)?;
    cut.seed = Some(seed);
    cut.method = Some(method);
    cut.classifier = Some(classifier);
    Ok(cut)
}
