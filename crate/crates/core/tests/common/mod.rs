#![allow(dead_code)]

use fiedler_core::graph::{builtin_karate, gen_caveman, gen_gnp, is_connected};
use fiedler_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn experiment_graphs() -> Vec<(&'static str, Graph)> {
    vec![
        ("caveman(6,5)", gen_caveman(6, 5).unwrap()),
        ("karate", builtin_karate().0),
        ("G(100,0.1,seed=7)", connected_gnp(100, 0.1, 7)),
    ]
}

pub fn connected_gnp(n: usize, p: f64, seed: u64) -> Graph {
    let g = gen_gnp(n, p, seed).unwrap();
    assert!(is_connected(&g), "G({n},{p}) with seed {seed} is disconnected");
    g
}

/// The first `count` connected G(n,p) instances over generator seeds 0, 1, ...
pub fn connected_gnp_instances(n: usize, p: f64, count: usize) -> Vec<(u64, Graph)> {
    (0u64..).map(|s| (s, gen_gnp(n, p, s).unwrap())).filter(|(_, g)| is_connected(g)).take(count).collect()
}

/// Random connected graph: a random spanning tree plus independent extra edges.
pub fn random_connected(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let n = rng.random_range(2..=max_n);
    let p = rng.random_range(0.0..0.5);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row sums of the fundamental matrix `(I − Q)⁻¹`, inverted by Gauss-Jordan
/// elimination with partial pivoting on the dense walk matrix.
pub fn fundamental_row_sums(g: &Graph, seed: usize) -> Vec<f64> {
    let idx: Vec<usize> = (0..g.n()).filter(|&v| v != seed).collect();
    let k = idx.len();
    let mut a = vec![vec![0.0; 2 * k]; k];
    for (r, &u) in idx.iter().enumerate() {
        a[r][r] = 1.0;
        a[r][k + r] = 1.0;
        let d = g.degree(u) as f64;
        for (c, &v) in idx.iter().enumerate() {
            if g.has_edge(u, v) {
                a[r][c] -= 1.0 / d;
            }
        }
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        let p = a[col][col];
        for x in a[col].iter_mut() {
            *x /= p;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && row[col] != 0.0 {
                let f = row[col];
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
    }
    a.iter().map(|row| row[k..].iter().sum()).collect()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Prints one line per criterion and fails the test when `ok` is false.
pub fn verdict(id: &str, ok: bool, detail: impl AsRef<str>) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id}: {}", detail.as_ref());
    assert!(ok, "criterion {id} failed: {}", detail.as_ref());
}
