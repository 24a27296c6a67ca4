//! CSV and JSON outputs. Vertices are always written with their external labels.

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::approx::TracePoint;
use crate::classify::CutResult;
use crate::descent::DescentTracePoint;
use crate::error::Result;
use crate::graph::Graph;
use crate::markov::AbsorptionVector;

/// `vertex_label,<column>` rows for the given vertices, ascending by label.
pub fn write_vertex_values<W: Write>(
    w: W,
    g: &Graph,
    vertices: &[usize],
    values: &[f64],
    column: &str,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["vertex_label", column])?;
    let mut rows: Vec<(i64, f64)> = vertices.iter().zip(values).map(|(&v, &x)| (g.label(v), x)).collect();
    rows.sort_by_key(|r| r.0);
    for (label, x) in rows {
        out.write_record([label.to_string(), x.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// `vertex_label,m`.
pub fn write_absorption_csv<W: Write>(w: W, g: &Graph, av: &AbsorptionVector) -> Result<()> {
    write_vertex_values(w, g, &av.vertices, &av.m, "m")
}

/// `vertex_label,component` over all vertices.
pub fn write_vector_csv<W: Write>(w: W, g: &Graph, values: &[f64]) -> Result<()> {
    let vertices: Vec<usize> = (0..g.n()).collect();
    write_vertex_values(w, g, &vertices, values, "component")
}

/// `index,eigenvalue`, 0-based index.
pub fn write_spectrum_csv<W: Write>(w: W, values: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "eigenvalue"])?;
    for (i, x) in values.iter().enumerate() {
        out.write_record([i.to_string(), x.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Dense matrix with a header of column labels; the first field of each row is
/// the row label. Rows and columns are ascending by label. Entry `(i, j)` is the absorption time from `i` to seed `j`.
pub fn write_matrix_csv<W: Write>(w: W, g: &Graph, m: &DMatrix<f64>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by_key(|&v| g.label(v));
    let mut header = vec!["vertex_label".to_string()];
    header.extend(order.iter().map(|&j| g.label(j).to_string()));
    out.write_record(&header)?;
    for &i in &order {
        let mut row = vec![g.label(i).to_string()];
        row.extend(order.iter().map(|&j| m[(i, j)].to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// `T,sse,pearson`; the correlation is empty while undefined.
pub fn write_series_trace_csv<W: Write>(w: W, trace: &[TracePoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["T", "sse", "pearson"])?;
    for p in trace {
        out.write_record([
            p.t.to_string(),
            p.sse.to_string(),
            p.pearson.map(|x| x.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `t,max_change,touched_count,objective`.
pub fn write_descent_trace_csv<W: Write>(w: W, trace: &[DescentTracePoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "max_change", "touched_count", "objective"])?;
    for p in trace {
        out.write_record([
            p.t.to_string(),
            p.max_change.to_string(),
            p.touched_count.to_string(),
            p.objective.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// JSON form of a [`CutResult`] with external labels, members ascending.
#[derive(Debug, Clone, Serialize)]
pub struct CutReport {
    pub seed: Option<i64>,
    pub members: Vec<i64>,
    pub capacity: usize,
    pub vol_s: f64,
    pub vol_sbar: f64,
    pub ncut: f64,
    pub threshold: f64,
    pub method: Option<String>,
    pub classifier: Option<String>,
    pub low_quality: bool,
}

impl CutReport {
    pub fn new(g: &Graph, cut: &CutResult) -> Self {
        CutReport {
            seed: cut.seed.map(|s| g.label(s)),
            members: {
                let mut m: Vec<i64> = cut.members.iter().map(|&v| g.label(v)).collect();
                m.sort_unstable();
                m
            },
            capacity: cut.capacity,
            vol_s: cut.vol_s,
            vol_sbar: cut.vol_sbar,
            ncut: cut.ncut,
            threshold: cut.threshold,
            method: cut.method.map(|m| m.name().to_string()),
            classifier: cut.classifier.map(|c| c.name().to_string()),
            low_quality: cut.is_low_quality(),
        }
    }
}

pub fn write_cut_json<W: Write>(w: W, g: &Graph, cut: &CutResult) -> Result<()> {
    serde_json::to_writer_pretty(w, &CutReport::new(g, cut))?;
    Ok(())
}
