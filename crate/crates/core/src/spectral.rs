//! Laplacians, dense symmetric eigensystems and (Dirichlet-)Fiedler vectors.

use nalgebra::{DMatrix, DVector, Schur};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::markov::{absorbing_chain, AbsorbingChain};

/// Largest entrywise asymmetry accepted by [`eig_symmetric`].
pub const SYMMETRY_TOL: f64 = 1e-10;

const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITERS: usize = 100_000;

/// Eigenvalues closer than this to the principal one are treated as tied.
const TIE_TOL: f64 = 1e-9;

/// Below this the principal transient eigenvalue is reported as degenerate.
const DEGENERATE_LAMBDA: f64 = 1e-12;

/// Operator an eigenpair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatrixTag {
    /// `L = D − A`
    Laplacian,
    /// `I − D^{-1/2} A D^{-1/2}`
    NormalizedLaplacian,
    /// `P = D⁻¹A`
    Walk,
    /// `D^{-1/2} A D^{-1/2}`
    NormalizedWalk,
    /// `P̂`, the walk with the seed absorbing
    AbsorbingWalk,
    /// `Q`, the transient block of `P̂`
    Transient,
    /// `D^{1/2} Q D^{-1/2}`
    NormalizedTransient,
    /// `L` with the seed row and column removed
    DirichletLaplacian,
    /// normalized Laplacian with the seed row and column removed
    NormalizedDirichletLaplacian,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralPair {
    pub value: f64,
    /// Unit 2-norm eigenvector.
    pub vector: Vec<f64>,
    pub tag: MatrixTag,
}

pub fn adjacency(g: &Graph) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(g.n(), g.n());
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    a
}

pub fn laplacian(g: &Graph) -> DMatrix<f64> {
    let mut l = -adjacency(g);
    for v in 0..g.n() {
        l[(v, v)] = g.degree(v) as f64;
    }
    l
}

fn inv_sqrt_degrees(g: &Graph) -> Result<Vec<f64>> {
    (0..g.n())
        .map(|v| match g.degree(v) {
            0 => Err(Error::IsolatedVertex(v)),
            d => Ok(1.0 / (d as f64).sqrt()),
        })
        .collect()
}

/// `D^{-1/2} A D^{-1/2}`, symmetric and similar to the walk matrix.
pub fn normalized_walk(g: &Graph) -> Result<DMatrix<f64>> {
    let s = inv_sqrt_degrees(g)?;
    let mut a = adjacency(g);
    for i in 0..g.n() {
        for j in 0..g.n() {
            a[(i, j)] *= s[i] * s[j];
        }
    }
    Ok(a)
}

/// `I − D^{-1/2} A D^{-1/2}`.
pub fn normalized_laplacian(g: &Graph) -> Result<DMatrix<f64>> {
    Ok(DMatrix::identity(g.n(), g.n()) - normalized_walk(g)?)
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

fn fix_sign(v: &mut [f64]) {
    if let Some(&first) = v.iter().find(|x| x.abs() > 1e-10) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Full eigensystem of a symmetric matrix, sorted by descending eigenvalue.
///
/// Each eigenvector is scaled so its first nonzero component is positive.
pub fn eig_symmetric(m: &DMatrix<f64>, tag: MatrixTag) -> Result<Vec<SpectralPair>> {
    if !m.is_square() {
        return Err(Error::InvalidParameter("matrix is not square".into()));
    }
    let asym = max_asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::Asymmetric(asym));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut pairs: Vec<SpectralPair> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .map(|(&value, col)| {
            let mut vector: Vec<f64> = col.iter().copied().collect();
            fix_sign(&mut vector);
            SpectralPair { value, vector, tag }
        })
        .collect();
    pairs.sort_by(|a, b| b.value.total_cmp(&a.value));
    Ok(pairs)
}

/// `D^{1/2} Q D^{-1/2}` over the non-seed vertices; symmetric for reversible walks.
pub fn normalized_transient(chain: &AbsorbingChain, degrees: &[f64]) -> DMatrix<f64> {
    let idx = chain.index_map();
    let sq: Vec<f64> = idx.iter().map(|&v| degrees[v].sqrt()).collect();
    let k = chain.dim();
    let mut m = DMatrix::zeros(k, k);
    for r in 0..k {
        for &(c, p) in chain.q_row(r) {
            m[(r, c)] += sq[r] * p / sq[c];
        }
    }
    m
}

/// Outcome of checking `spec(Q) = spec(P̂) ∖ {1}` for one seed.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumIdentityReport {
    pub seed: usize,
    /// Real parts of the eigenvalues of `P̂`, descending.
    pub absorbing: Vec<f64>,
    /// Eigenvalues of `Q`, descending.
    pub transient: Vec<f64>,
    /// Largest distance between matched eigenvalues, including the unmatched one and 1.
    pub max_discrepancy: f64,
    /// Largest imaginary part among the eigenvalues of `P̂`.
    pub max_imaginary: f64,
    /// Largest `‖P̂v − λv‖₂ / ‖v‖₂` over eigenvectors of `Q` extended by 0 at the seed.
    pub max_extension_residual: f64,
}

impl SpectrumIdentityReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_discrepancy <= tol && self.max_imaginary <= tol && self.max_extension_residual <= tol
    }
}

/// Compares the spectrum of `P̂` (general nonsymmetric eigensolver) with that of
/// `Q` (through the symmetric `D^{1/2} Q D^{-1/2}`).
pub fn spectrum_identity_check(g: &Graph, seed: usize) -> Result<SpectrumIdentityReport> {
    let chain = absorbing_chain(g, seed)?;
    let degrees = g.degrees();

    let p_hat = chain.absorbing_dense();
    // The default machine-epsilon deflation test can stall on highly repeated
    // eigenvalues (caveman graphs), so use a slightly looser one with a cap.
    let complex = Schur::try_new(p_hat.clone(), SCHUR_EPS, SCHUR_MAX_ITERS)
        .ok_or_else(|| Error::Degenerate("Schur decomposition did not converge".into()))?
        .complex_eigenvalues();
    let max_imaginary = complex.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let mut absorbing: Vec<f64> = complex.iter().map(|z| z.re).collect();
    absorbing.sort_by(|a, b| b.total_cmp(a));

    let pairs = eig_symmetric(&normalized_transient(&chain, &degrees), MatrixTag::NormalizedTransient)?;
    let transient: Vec<f64> = pairs.iter().map(|p| p.value).collect();

    // Greedy multiset matching: each Q eigenvalue takes the nearest unused P̂ one.
    let mut used = vec![false; absorbing.len()];
    let mut max_discrepancy: f64 = 0.0;
    for &lam in &transient {
        let (best, dist) = absorbing
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, &mu)| (i, (mu - lam).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("P̂ has one more eigenvalue than Q");
        used[best] = true;
        max_discrepancy = max_discrepancy.max(dist);
    }
    for (i, &mu) in absorbing.iter().enumerate() {
        if !used[i] {
            max_discrepancy = max_discrepancy.max((mu - 1.0).abs());
        }
    }

    let idx = chain.index_map();
    let mut max_extension_residual: f64 = 0.0;
    for pair in &pairs {
        let mut v = DVector::zeros(g.n());
        for (r, &vert) in idx.iter().enumerate() {
            v[vert] = pair.vector[r] / degrees[vert].sqrt();
        }
        let res = (&p_hat * &v - &v * pair.value).norm() / v.norm();
        max_extension_residual = max_extension_residual.max(res);
    }

    Ok(SpectrumIdentityReport {
        seed,
        absorbing,
        transient,
        max_discrepancy,
        max_imaginary,
        max_extension_residual,
    })
}

/// Eigenvector of the smallest nonzero eigenvalue of `L` (or of the normalized
/// Laplacian when `normalized`), first nonzero component positive.
pub fn global_fiedler(g: &Graph, normalized: bool) -> Result<SpectralPair> {
    if g.n() < 2 {
        return Err(Error::InvalidParameter("graph needs at least two vertices".into()));
    }
    let (m, tag) = if normalized {
        (normalized_laplacian(g)?, MatrixTag::NormalizedLaplacian)
    } else {
        (laplacian(g), MatrixTag::Laplacian)
    };
    let mut pairs = eig_symmetric(&m, tag)?;
    pairs.reverse();
    if pairs[1].value <= TIE_TOL {
        return Err(Error::Disconnected);
    }
    Ok(pairs.swap_remove(1))
}

/// The principal eigenpair of the seed's transient block.
#[derive(Debug, Clone, Serialize)]
pub struct DirichletFiedler {
    pub seed: usize,
    /// Principal eigenvalue of `Q`.
    pub lambda1: f64,
    /// Vertex id of each entry of `u` and `v`.
    pub vertices: Vec<usize>,
    /// Unit eigenvector of `D^{1/2} Q D^{-1/2}`.
    pub u: Vec<f64>,
    /// `D^{-1/2} u`, an eigenvector of `Q`.
    pub v: Vec<f64>,
    /// Multiplicity of `lambda1` within the tie tolerance.
    pub multiplicity: usize,
    /// Set when `lambda1` is zero, i.e. `Q` vanishes.
    pub degenerate: bool,
}

impl DirichletFiedler {
    /// `v` expanded to all vertices with 0 at the seed.
    pub fn full_v(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&vert, &x) in self.vertices.iter().zip(&self.v) {
            out[vert] = x;
        }
        out
    }
}

/// Exact Dirichlet-Fiedler vector of `seed`.
///
/// When the principal eigenvalue is repeated (the seed separates isomorphic
/// pieces, or `Q = 0`) the vector is the projection of `D^{1/2}1` onto the
/// principal eigenspace, which keeps it entrywise nonnegative.
pub fn dirichlet_fiedler_exact(g: &Graph, seed: usize) -> Result<DirichletFiedler> {
    let chain = absorbing_chain(g, seed)?;
    dirichlet_fiedler_of_chain(&chain, &g.degrees())
}

pub fn dirichlet_fiedler_of_chain(chain: &AbsorbingChain, degrees: &[f64]) -> Result<DirichletFiedler> {
    if chain.dim() == 0 {
        return Err(Error::Degenerate("graph has no vertex besides the seed".into()));
    }
    let pairs = eig_symmetric(&normalized_transient(chain, degrees), MatrixTag::NormalizedTransient)?;
    let lambda1 = pairs[0].value;
    let top: Vec<&SpectralPair> = pairs.iter().take_while(|p| lambda1 - p.value <= TIE_TOL).collect();

    let sqrt_d: Vec<f64> = chain.index_map().iter().map(|&v| degrees[v].sqrt()).collect();
    let mut u = if top.len() == 1 {
        top[0].vector.clone()
    } else {
        let mut acc = vec![0.0; sqrt_d.len()];
        for p in &top {
            let w: f64 = p.vector.iter().zip(&sqrt_d).map(|(a, b)| a * b).sum();
            for (a, x) in acc.iter_mut().zip(&p.vector) {
                *a += w * x;
            }
        }
        acc
    };
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    u.iter_mut().for_each(|x| *x /= norm);
    if u.iter().sum::<f64>() < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    let v = u.iter().zip(&sqrt_d).map(|(x, s)| x / s).collect();

    Ok(DirichletFiedler {
        seed: chain.seed(),
        lambda1,
        vertices: chain.index_map().to_vec(),
        u,
        v,
        multiplicity: top.len(),
        degenerate: lambda1.abs() <= DEGENERATE_LAMBDA,
    })
}

/// Degree-weighted quotient `Σ_{i∼j}(v_i − v_j)² / Σ_i d_i v_i²` of a full-length vector.
pub fn rayleigh_quotient(g: &Graph, v: &[f64]) -> f64 {
    let num: f64 = g.edges().map(|(i, j)| (v[i] - v[j]).powi(2)).sum();
    let den: f64 = (0..g.n()).map(|i| g.degree(i) as f64 * v[i] * v[i]).sum();
    num / den
}

/// Unweighted variant `Σ_{i∼j}(v_i − v_j)² / Σ_i v_i²`, the quotient the soft
/// objective in [`crate::descent`] relaxes.
pub fn plain_rayleigh_quotient(g: &Graph, v: &[f64]) -> f64 {
    let num: f64 = g.edges().map(|(i, j)| (v[i] - v[j]).powi(2)).sum();
    let den: f64 = v.iter().map(|x| x * x).sum();
    num / den
}
