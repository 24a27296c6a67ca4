//! `fiedler`: absorption times, spectra and local clusters from the command line.
//!
//! Exit status is 0 on success, 2 for bad input and 3 when the computation is
//! numerically degenerate.

mod manifest;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fiedler_core::approx::{
    absorption_rank1, absorption_series, compare, largest_gap_after, series_trace, spectrum_profile,
};
use fiedler_core::classify::local_cluster;
use fiedler_core::descent::{descend_traced, estimate_absorption_from_local};
use fiedler_core::graph::{builtin_karate, gen_caveman, gen_gnp, load_edge_list, write_edge_list};
use fiedler_core::markov::{
    lazy, simulate_absorption, transition_matrix, AbsorptionVector, DEFAULT_MAX_STEPS,
};
use fiedler_core::report::{
    write_absorption_csv, write_cut_json, write_descent_trace_csv, write_matrix_csv, write_series_trace_csv,
    write_spectrum_csv, write_vertex_values, CutReport,
};
use fiedler_core::spectral::{dirichlet_fiedler_of_chain, eig_symmetric, normalized_laplacian};
use fiedler_core::{AbsorbingChain, Classifier, DescentParams, Error, Graph, MatrixTag, Method};
use nalgebra::DMatrix;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "fiedler",
    version,
    about = "Random-walk absorption times and Dirichlet-Fiedler local clustering"
)]
struct Cli {
    /// Worker threads for parallel sections (0 = one per core).
    #[arg(long, global = true, env = "FIEDLER_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated or bundled graph as an edge list.
    Generate(GenerateArgs),
    /// Absorption times to a seed vertex.
    Absorb(AbsorbArgs),
    /// Pearson correlation and SSE of estimators against exact absorption times.
    Compare(CompareArgs),
    /// Local cluster around a seed.
    Cluster(ClusterArgs),
    /// Sorted spectrum of the absorbing walk (with --seed) or the normalized Laplacian.
    Spectrum(SpectrumArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    kind: GenerateKind,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Ring of near-cliques joined by single edges.
    Caveman {
        #[arg(long, default_value_t = 6)]
        caves: usize,
        #[arg(long, default_value_t = 5)]
        size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Erdős–Rényi G(n, p).
    Gnp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Zachary's karate club; writes `<stem>.truth.csv` next to the edge list.
    Karate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Rank1,
    Series,
    Local,
    Simulate,
}

#[derive(Args, Clone)]
struct DescentOpts {
    /// Override the soft-constraint weight (default 1/average degree).
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Average degree used by the default parameter heuristic.
    #[arg(long)]
    avg_degree: Option<f64>,
}

impl DescentOpts {
    fn resolve(&self, g: &Graph) -> fiedler_core::Result<DescentParams> {
        let mut p = DescentParams::heuristic(self.avg_degree.unwrap_or_else(|| g.avg_degree()))?;
        if let Some(c) = self.c {
            p.c = c;
        }
        if let Some(d) = self.delta {
            p.delta = d;
        }
        if let Some(e) = self.epsilon {
            p.epsilon = e;
        }
        if let Some(m) = self.max_iters {
            p.max_iters = m;
        }
        p.validate()?;
        Ok(p)
    }

    fn is_default(&self) -> bool {
        self.c.is_none()
            && self.delta.is_none()
            && self.epsilon.is_none()
            && self.max_iters.is_none()
            && self.avg_degree.is_none()
    }
}

#[derive(Args)]
struct AbsorbArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Seed vertex label.
    #[arg(long, required_unless_present = "all_seeds")]
    seed: Option<i64>,
    /// Emit the full matrix: column j holds absorption times to seed j.
    #[arg(long, conflicts_with = "seed")]
    all_seeds: bool,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Use the lazy walk ½(I + P) (exact and series modes).
    #[arg(long)]
    lazy: bool,
    /// Series cutoff T.
    #[arg(long, default_value_t = 1000)]
    cutoff: usize,
    #[command(flatten)]
    descent: DescentOpts,
    /// Scale for the local estimate 1 + c′ṽ; without it ṽ is written.
    #[arg(long)]
    c_prime: Option<f64>,
    /// Per-sweep descent trace CSV (local mode).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Start vertex label for simulation (default: every non-seed vertex).
    #[arg(long)]
    start: Option<i64>,
    #[arg(long, default_value_t = 100_000)]
    walks: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Estimator {
    Rank1,
    Series,
    Local,
}

impl Estimator {
    fn name(self) -> &'static str {
        match self {
            Estimator::Rank1 => "rank1",
            Estimator::Series => "series",
            Estimator::Local => "local",
        }
    }
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, conflicts_with_all = ["all_seeds", "random_seeds"])]
    seed: Option<i64>,
    #[arg(long, conflicts_with = "random_seeds")]
    all_seeds: bool,
    /// Compare at this many seeds drawn without replacement.
    #[arg(long)]
    random_seeds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "rank1")]
    estimators: Vec<Estimator>,
    #[arg(long, default_value_t = 1000)]
    cutoff: usize,
    #[command(flatten)]
    descent: DescentOpts,
    /// Write the per-T series convergence trace `T,sse,pearson` up to T_max (needs --seed).
    #[arg(long, value_name = "T_MAX", requires = "seed")]
    series_sweep: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    ExactAbsorption,
    Rank1,
    Series,
    LocalDescent,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassifierArg {
    Kmeans,
    Median,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    seed: i64,
    #[arg(long, value_enum, default_value = "exact-absorption")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "kmeans")]
    classifier: ClassifierArg,
    #[arg(long, default_value_t = 1000)]
    cutoff: usize,
    #[command(flatten)]
    descent: DescentOpts,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    seed: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e.downcast_ref::<Error>().is_some_and(Error::is_numerical);
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Absorb(a) => cmd_absorb(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Spectrum(a) => cmd_spectrum(a),
    }
}

fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(load_edge_list(BufReader::new(file))?)
}

/// Opens `out`, or stdout when absent.
fn sink(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn chain_for(g: &Graph, seed: usize, lazy_walk: bool) -> fiedler_core::Result<AbsorbingChain> {
    g.require_connected()?;
    let p = transition_matrix(g)?;
    if lazy_walk {
        AbsorbingChain::from_transition(&lazy(&p), seed)
    } else {
        AbsorbingChain::from_transition(&p, seed)
    }
}

fn exact(g: &Graph, seed: usize, lazy_walk: bool) -> fiedler_core::Result<AbsorptionVector> {
    fiedler_core::markov::absorption_exact(&chain_for(g, seed, lazy_walk)?)
}

fn cmd_generate(a: GenerateArgs) -> anyhow::Result<()> {
    let mut man = RunManifest::new("generate");
    let (g, header, truth) = match a.kind {
        GenerateKind::Caveman { caves, size, ref out } => {
            man.params(json!({ "kind": "caveman", "caves": caves, "size": size }));
            man.out(out.as_deref());
            (gen_caveman(caves, size)?, format!("caveman caves={caves} size={size}"), None)
        }
        GenerateKind::Gnp { n, p, seed, ref out } => {
            man.params(json!({ "kind": "gnp", "n": n, "p": p }));
            man.rng_seeds.push(seed);
            man.out(out.as_deref());
            (gen_gnp(n, p, seed)?, format!("gnp n={n} p={p} seed={seed}"), None)
        }
        GenerateKind::Karate { ref out } => {
            man.params(json!({ "kind": "karate" }));
            man.out(out.as_deref());
            let (g, t) = builtin_karate();
            (g, "karate club, 1-based labels".to_string(), Some(t))
        }
    };
    let out = man.outputs.first().cloned();
    sink(out.as_deref())?.write_all(write_edge_list(&g, Some(&header)).as_bytes())?;

    if let (Some(truth), Some(out)) = (truth, out.as_ref()) {
        let path = out.with_extension("truth.csv");
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "vertex_label,faction")?;
        for v in 0..g.n() {
            writeln!(w, "{},{}", g.label(v), truth.class_of(v))?;
        }
        w.flush()?;
        man.outputs.push(path);
    }
    eprintln!("{} vertices, {} edges", g.n(), g.edge_count());
    man.write()
}

fn cmd_absorb(a: AbsorbArgs) -> anyhow::Result<()> {
    let g = read_graph(&a.graph)?;
    let mut man = RunManifest::new("absorb");
    man.input = Some(a.graph.clone());
    man.out(a.out.as_deref());
    if a.lazy && !matches!(a.mode, Mode::Exact | Mode::Series) {
        bail!(Error::InvalidParameter("--lazy applies to exact and series modes".into()));
    }

    if a.all_seeds {
        let m = absorption_columns(&g, &a)?;
        man.params(
            json!({ "mode": mode_name(a.mode), "all_seeds": true, "lazy": a.lazy, "cutoff": a.cutoff }),
        );
        write_matrix_csv(sink(a.out.as_deref())?, &g, &m)?;
        return man.write();
    }

    let seed_label = a.seed.expect("clap requires --seed without --all-seeds");
    let seed = g.vertex_of(seed_label)?;
    man.seeds.push(seed_label);
    let mut w = sink(a.out.as_deref())?;
    match a.mode {
        Mode::Exact => {
            man.params(json!({ "mode": "exact", "lazy": a.lazy }));
            write_absorption_csv(w, &g, &exact(&g, seed, a.lazy)?)?;
        }
        Mode::Rank1 => {
            man.params(json!({ "mode": "rank1" }));
            let chain = chain_for(&g, seed, false)?;
            let degrees = g.degrees();
            let r = absorption_rank1(&dirichlet_fiedler_of_chain(&chain, &degrees)?, &degrees)?;
            write_vertex_values(w, &g, &r.vertices, &r.estimate, "m")?;
            eprintln!("lambda1 = {}, c' = {}", r.lambda1, r.c_prime);
        }
        Mode::Series => {
            man.params(json!({ "mode": "series", "cutoff": a.cutoff, "lazy": a.lazy }));
            let s = absorption_series(&chain_for(&g, seed, a.lazy)?, a.cutoff);
            write_vertex_values(w, &g, &s.vertices, &s.partial, "m")?;
        }
        Mode::Local => {
            g.require_connected()?;
            let params = a.descent.resolve(&g)?;
            man.params(json!({ "mode": "local", "descent": params, "c_prime": a.c_prime }));
            let (fe, trace) = descend_traced(&g, seed, &params)?;
            if !fe.converged() {
                bail!(Error::Degenerate(format!(
                    "local descent stopped without converging ({:?} after {} sweeps)",
                    fe.status, fe.iterations
                )));
            }
            let vertices: Vec<usize> = (0..g.n()).filter(|&v| v != seed).collect();
            let values = estimate_absorption_from_local(&fe, a.c_prime);
            let column = if a.c_prime.is_some() { "m" } else { "v_tilde" };
            write_vertex_values(w, &g, &vertices, &values, column)?;
            if let Some(path) = &a.trace {
                write_descent_trace_csv(BufWriter::new(File::create(path)?), &trace)?;
                man.outputs.push(path.clone());
            }
            eprintln!("{} sweeps, {} vertices touched", fe.iterations, fe.touched.len());
        }
        Mode::Simulate => {
            g.require_connected()?;
            let starts: Vec<usize> = match a.start {
                Some(l) => vec![g.vertex_of(l)?],
                None => (0..g.n()).filter(|&v| v != seed).collect(),
            };
            man.rng_seeds.push(a.rng_seed);
            man.params(
                json!({ "mode": "simulate", "walks": a.walks, "max_steps": a.max_steps, "start": a.start }),
            );
            writeln!(w, "vertex_label,mean,stderr,completed,truncated")?;
            let mut rows: Vec<(i64, String)> = Vec::new();
            for &s in &starts {
                let r = simulate_absorption(&g, seed, s, a.walks, a.max_steps, a.rng_seed)?;
                rows.push((
                    g.label(s),
                    format!("{},{},{},{},{}", g.label(s), r.mean, r.stderr, r.completed, r.truncated),
                ));
            }
            rows.sort_by_key(|r| r.0);
            for (_, line) in rows {
                writeln!(w, "{line}")?;
            }
            w.flush()?;
        }
    }
    man.write()
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Exact => "exact",
        Mode::Rank1 => "rank1",
        Mode::Series => "series",
        Mode::Local => "local",
        Mode::Simulate => "simulate",
    }
}

/// Column j holds the chosen estimate of the absorption time to seed j (0 on the diagonal).
fn absorption_columns(g: &Graph, a: &AbsorbArgs) -> anyhow::Result<DMatrix<f64>> {
    let n = g.n();
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| -> fiedler_core::Result<Vec<f64>> {
            let (vertices, values) = match a.mode {
                Mode::Exact => {
                    let m = exact(g, j, a.lazy)?;
                    (m.vertices, m.m)
                }
                Mode::Rank1 => {
                    let chain = chain_for(g, j, false)?;
                    let d = g.degrees();
                    let r = absorption_rank1(&dirichlet_fiedler_of_chain(&chain, &d)?, &d)?;
                    (r.vertices, r.estimate)
                }
                Mode::Series => {
                    let s = absorption_series(&chain_for(g, j, a.lazy)?, a.cutoff);
                    (s.vertices, s.partial)
                }
                Mode::Local | Mode::Simulate => {
                    return Err(Error::InvalidParameter(
                        "--all-seeds supports exact, rank1 and series modes".into(),
                    ))
                }
            };
            let mut col = vec![0.0; n];
            for (v, x) in vertices.into_iter().zip(values) {
                col[v] = x;
            }
            Ok(col)
        })
        .collect::<fiedler_core::Result<_>>()?;
    Ok(DMatrix::from_fn(n, n, |i, j| columns[j][i]))
}

fn estimate(
    g: &Graph,
    chain: &AbsorbingChain,
    seed: usize,
    which: Estimator,
    cutoff: usize,
    params: &DescentParams,
) -> fiedler_core::Result<Vec<f64>> {
    match which {
        Estimator::Rank1 => {
            let d = g.degrees();
            Ok(absorption_rank1(&dirichlet_fiedler_of_chain(chain, &d)?, &d)?.estimate)
        }
        Estimator::Series => Ok(absorption_series(chain, cutoff).partial),
        Estimator::Local => {
            let (fe, _) = descend_traced(g, seed, params)?;
            if !fe.converged() {
                return Err(Error::Degenerate(format!("local descent did not converge at seed {seed}")));
            }
            Ok(fe.non_seed_values())
        }
    }
}

fn cmd_compare(a: CompareArgs) -> anyhow::Result<()> {
    let g = read_graph(&a.graph)?;
    g.require_connected()?;
    let mut man = RunManifest::new("compare");
    man.input = Some(a.graph.clone());
    man.out(a.out.as_deref());

    if let Some(t_max) = a.series_sweep {
        let label = a.seed.expect("clap requires --seed with --series-sweep");
        let seed = g.vertex_of(label)?;
        man.seeds.push(label);
        man.params(json!({ "series_sweep": t_max }));
        let chain = chain_for(&g, seed, false)?;
        let exact = fiedler_core::markov::absorption_exact(&chain)?;
        write_series_trace_csv(sink(a.out.as_deref())?, &series_trace(&chain, &exact, t_max)?)?;
        return man.write();
    }

    let seeds: Vec<usize> = if let Some(l) = a.seed {
        vec![g.vertex_of(l)?]
    } else if a.all_seeds {
        (0..g.n()).collect()
    } else if let Some(k) = a.random_seeds {
        if k == 0 || k > g.n() {
            bail!(Error::InvalidParameter(format!("--random-seeds must be in 1..={}", g.n())));
        }
        man.rng_seeds.push(a.rng_seed);
        let mut rng = ChaCha8Rng::seed_from_u64(a.rng_seed);
        let all: Vec<usize> = (0..g.n()).collect();
        all.choose_multiple(&mut rng, k).copied().collect()
    } else {
        bail!(Error::InvalidParameter("give --seed, --all-seeds or --random-seeds".into()));
    };
    man.seeds = seeds.iter().map(|&s| g.label(s)).collect();
    let params = a.descent.resolve(&g)?;
    let names: Vec<&str> = a.estimators.iter().map(|e| e.name()).collect();
    man.params(json!({ "estimators": names, "cutoff": a.cutoff, "descent": params }));

    let rows: Vec<(i64, Vec<(Estimator, fiedler_core::CompareReport)>)> = seeds
        .par_iter()
        .map(|&s| -> fiedler_core::Result<_> {
            let chain = chain_for(&g, s, false)?;
            let exact = fiedler_core::markov::absorption_exact(&chain)?;
            let reports = a
                .estimators
                .iter()
                .map(|&e| Ok((e, compare(&exact, &estimate(&g, &chain, s, e, a.cutoff, &params)?)?)))
                .collect::<fiedler_core::Result<Vec<_>>>()?;
            Ok((g.label(s), reports))
        })
        .collect::<fiedler_core::Result<_>>()?;
    let mut rows = rows;
    rows.sort_by_key(|r| r.0);

    let mut w = sink(a.out.as_deref())?;
    writeln!(w, "seed_label,estimator,pearson,sse,max_abs_diff")?;
    for (label, reports) in &rows {
        for (e, r) in reports {
            let p = r.pearson.map(|x| x.to_string()).unwrap_or_default();
            writeln!(w, "{label},{},{p},{},{}", e.name(), r.sse_per_vertex, r.max_abs_diff)?;
        }
    }
    w.flush()?;
    for (i, e) in a.estimators.iter().enumerate() {
        let ps: Vec<f64> = rows.iter().filter_map(|(_, r)| r[i].1.pearson).collect();
        if !ps.is_empty() {
            eprintln!(
                "{}: mean pearson {:.6} over {} seeds",
                e.name(),
                ps.iter().sum::<f64>() / ps.len() as f64,
                ps.len()
            );
        }
    }
    man.write()
}

fn cmd_cluster(a: ClusterArgs) -> anyhow::Result<()> {
    let g = read_graph(&a.graph)?;
    let seed = g.vertex_of(a.seed)?;
    let mut man = RunManifest::new("cluster");
    man.input = Some(a.graph.clone());
    man.seeds.push(a.seed);
    man.out(a.out.as_deref());

    let method = match a.method {
        MethodArg::ExactAbsorption => Method::ExactAbsorption,
        MethodArg::Rank1 => Method::Rank1,
        MethodArg::Series => Method::Series { cutoff: a.cutoff },
        MethodArg::LocalDescent => {
            let params = if a.descent.is_default() { None } else { Some(a.descent.resolve(&g)?) };
            Method::LocalDescent { params }
        }
    };
    let classifier = match a.classifier {
        ClassifierArg::Kmeans => Classifier::Kmeans,
        ClassifierArg::Median => Classifier::Median,
    };
    man.params(json!({ "method": method, "classifier": classifier }));

    let cut = local_cluster(&g, seed, method, classifier)?;
    let report = CutReport::new(&g, &cut);
    let members: Vec<String> = report.members.iter().map(i64::to_string).collect();
    eprintln!(
        "members: {}\ncapacity {}, vol(S) {}, vol(rest) {}, ncut {:.4}{}",
        members.join(" "),
        report.capacity,
        report.vol_s,
        report.vol_sbar,
        report.ncut,
        if report.low_quality { " (low quality)" } else { "" }
    );
    let mut w = sink(a.out.as_deref())?;
    write_cut_json(&mut w, &g, &cut)?;
    writeln!(w)?;
    w.flush()?;
    man.write()
}

fn cmd_spectrum(a: SpectrumArgs) -> anyhow::Result<()> {
    let g = read_graph(&a.graph)?;
    g.require_connected()?;
    let mut man = RunManifest::new("spectrum");
    man.input = Some(a.graph.clone());
    man.out(a.out.as_deref());

    let values = match a.seed {
        Some(label) => {
            let seed = g.vertex_of(label)?;
            man.seeds.push(label);
            man.params(json!({ "matrix": "absorbing-walk" }));
            let v = spectrum_profile(&chain_for(&g, seed, false)?, &g.degrees())?;
            if let Some(k) = largest_gap_after(&v, 10) {
                eprintln!("largest gap among the top 10 follows eigenvalue {k}");
            }
            v
        }
        None => {
            man.params(json!({ "matrix": "normalized-laplacian" }));
            let pairs = eig_symmetric(&normalized_laplacian(&g)?, MatrixTag::NormalizedLaplacian)?;
            pairs.iter().rev().map(|p| p.value).collect()
        }
    };
    write_spectrum_csv(sink(a.out.as_deref())?, &values)?;
    man.write()
}
