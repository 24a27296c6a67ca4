//! Undirected simple graphs, the edge-list text format and the experiment graphs.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Name of the pseudorandom generator behind [`gen_gnp`], recorded in run
/// manifests so fixtures can pin it.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64";

/// An undirected simple graph with 0-based internal vertex ids.
///
/// Adjacency lists are sorted and symmetric. External labels, when present,
/// are what files and the CLI show to users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    labels: Option<Vec<i64>>,
}

impl Graph {
    /// Builds a graph on `n` vertices from an edge list. Duplicate edges
    /// collapse; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(Error::InvalidParameter("graph must have at least one vertex".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n {
                return Err(Error::InvalidVertex(u));
            }
            if v >= n {
                return Err(Error::InvalidVertex(v));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop on vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph { adjacency, labels: None })
    }

    /// Attaches external labels, one per vertex.
    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::InvalidParameter(format!(
                "expected {} labels, got {}",
                self.n(),
                labels.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.adjacency.iter().map(|a| a.len() as f64).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn avg_degree(&self) -> f64 {
        2.0 * self.edge_count() as f64 / self.n() as f64
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// External label of vertex `v`; the internal id when no labels are attached.
    pub fn label(&self, v: usize) -> i64 {
        match &self.labels {
            Some(l) => l[v],
            None => v as i64,
        }
    }

    /// Internal id carrying external label `label`.
    pub fn vertex_of(&self, label: i64) -> Result<usize> {
        match &self.labels {
            Some(l) => l.iter().position(|&x| x == label),
            None => usize::try_from(label).ok().filter(|&v| v < self.n()),
        }
        .ok_or(Error::UnknownLabel(label))
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::InvalidVertex(v))
        }
    }

    /// Fails with [`Error::Disconnected`] or [`Error::IsolatedVertex`] unless the
    /// graph is connected with at least two vertices.
    pub fn require_connected(&self) -> Result<()> {
        if let Some(v) = (0..self.n()).find(|&v| self.degree(v) == 0) {
            return Err(Error::IsolatedVertex(v));
        }
        if !is_connected(self) {
            return Err(Error::Disconnected);
        }
        Ok(())
    }
}

/// Two-faction ground truth, one class in `{0, 1}` per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub labels: Vec<u8>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_of(&self, v: usize) -> u8 {
        self.labels[v]
    }
}

/// Parses the whitespace-separated edge-list format.
///
/// Blank lines and lines starting with `#` are skipped. Labels are compacted
/// to `0..n` in order of first appearance and kept as external labels.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut index: HashMap<i64, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |label: i64, labels: &mut Vec<i64>| {
        *index.entry(label).or_insert_with(|| {
            labels.push(label);
            labels.len() - 1
        })
    };

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let mut next_label = || -> Result<i64> {
            let tok = tokens
                .next()
                .ok_or_else(|| Error::Parse { line: lineno, msg: "expected two vertex labels".into() })?;
            tok.parse::<i64>()
                .map_err(|_| Error::Parse { line: lineno, msg: format!("`{tok}` is not an integer label") })
        };
        let a = next_label()?;
        let b = next_label()?;
        if tokens.next().is_some() {
            return Err(Error::Parse { line: lineno, msg: "expected exactly two vertex labels".into() });
        }
        if a == b {
            return Err(Error::SelfLoop { line: lineno, label: a });
        }
        let u = intern(a, &mut labels);
        let v = intern(b, &mut labels);
        edges.push((u, v));
    }

    if labels.is_empty() {
        return Err(Error::Parse { line: 0, msg: "edge list is empty".into() });
    }
    Graph::from_edges(labels.len(), edges)?.with_labels(labels)
}

/// Formats `g` as an edge list using external labels.
pub fn write_edge_list(g: &Graph, header: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        for line in h.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{} {}", g.label(u), g.label(v));
    }
    out
}

/// A ring of `caves` near-cliques of `cave_size` vertices.
///
/// Cave `i` occupies `[i*k, (i+1)*k)`. Its internal edge `{i*k, i*k+1}` is
/// removed and the cave is linked to the next one by `{i*k+1, ((i+1) % caves)*k}`.
pub fn gen_caveman(caves: usize, cave_size: usize) -> Result<Graph> {
    if caves < 2 {
        return Err(Error::InvalidParameter(format!("caves must be >= 2, got {caves}")));
    }
    if cave_size < 3 {
        return Err(Error::InvalidParameter(format!("cave size must be >= 3, got {cave_size}")));
    }
    let k = cave_size;
    let mut edges = Vec::new();
    for cave in 0..caves {
        let base = cave * k;
        for a in 0..k {
            for b in a + 1..k {
                if (a, b) != (0, 1) {
                    edges.push((base + a, base + b));
                }
            }
        }
        edges.push((base + 1, ((cave + 1) % caves) * k));
    }
    Graph::from_edges(caves * k, edges)
}

/// Erdős–Rényi G(n, p), each pair `i < j` tested in lexicographic order.
pub fn gen_gnp(n: usize, p: f64, rng_seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0, 1), got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges)
}

// Zachary's karate club, 78-edge variant, 1-based labels.
const KARATE_EDGES: [(u8, u8); 78] = [
    (1, 2),
    (1, 3),
    (1, 4),
    (1, 5),
    (1, 6),
    (1, 7),
    (1, 8),
    (1, 9),
    (1, 11),
    (1, 12),
    (1, 13),
    (1, 14),
    (1, 18),
    (1, 20),
    (1, 22),
    (1, 32),
    (2, 3),
    (2, 4),
    (2, 8),
    (2, 14),
    (2, 18),
    (2, 20),
    (2, 22),
    (2, 31),
    (3, 4),
    (3, 8),
    (3, 9),
    (3, 10),
    (3, 14),
    (3, 28),
    (3, 29),
    (3, 33),
    (4, 8),
    (4, 13),
    (4, 14),
    (5, 7),
    (5, 11),
    (6, 7),
    (6, 11),
    (6, 17),
    (7, 17),
    (9, 31),
    (9, 33),
    (9, 34),
    (10, 34),
    (14, 34),
    (15, 33),
    (15, 34),
    (16, 33),
    (16, 34),
    (19, 33),
    (19, 34),
    (20, 34),
    (21, 33),
    (21, 34),
    (23, 33),
    (23, 34),
    (24, 26),
    (24, 28),
    (24, 30),
    (24, 33),
    (24, 34),
    (25, 26),
    (25, 28),
    (25, 32),
    (26, 32),
    (27, 30),
    (27, 34),
    (28, 34),
    (29, 32),
    (29, 34),
    (30, 33),
    (30, 34),
    (31, 33),
    (31, 34),
    (32, 33),
    (32, 34),
    (33, 34),
];

// Faction after the split: 0 stayed with the instructor (vertex 1),
// 1 followed the administrator (vertex 34).
const KARATE_FACTIONS: [u8; 34] =
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1];

/// The karate club network with 1-based labels and its two-faction split.
pub fn builtin_karate() -> (Graph, GroundTruth) {
    let edges = KARATE_EDGES.iter().map(|&(a, b)| (a as usize - 1, b as usize - 1));
    let g = Graph::from_edges(34, edges)
        .and_then(|g| g.with_labels((1..=34).collect()))
        .expect("embedded karate data is well formed");
    (g, GroundTruth { labels: KARATE_FACTIONS.to_vec() })
}

fn bfs_components(g: &Graph) -> Vec<usize> {
    let mut comp = vec![usize::MAX; g.n()];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..g.n() {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if comp[v] == usize::MAX {
                    comp[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    comp
}

pub fn is_connected(g: &Graph) -> bool {
    bfs_components(g).iter().all(|&c| c == 0)
}

pub fn is_bipartite(g: &Graph) -> bool {
    let mut side = vec![u8::MAX; g.n()];
    let mut queue = VecDeque::new();
    for start in 0..g.n() {
        if side[start] != u8::MAX {
            continue;
        }
        side[start] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if side[v] == u8::MAX {
                    side[v] = 1 - side[u];
                    queue.push_back(v);
                } else if side[v] == side[u] {
                    return false;
                }
            }
        }
    }
    true
}
