use serde::Serialize;

use super::{Graph, GraphFamily};
use crate::error::{Error, Result};

/// Largest vertex count accepted by [`edit_distance_iso`].
pub const EXACT_ISO_LIMIT: usize = 8;

fn same_size(g: &Graph, h: &Graph) -> Result<()> {
    if g.n() != h.n() {
        return Err(Error::VertexCountMismatch { left: g.n(), right: h.n() });
    }
    Ok(())
}

/// Size of the symmetric difference of the edge sets, vertex labels fixed.
pub fn edit_distance_labeled(g: &Graph, h: &Graph) -> Result<usize> {
    same_size(g, h)?;
    let eh = h.edge_set();
    let common = g.edge_set().iter().filter(|e| eh.contains(e)).count();
    Ok(g.edge_count() + h.edge_count() - 2 * common)
}

/// Edit distance minimized over all relabelings of `g`. Exhaustive over
/// `n!` permutations, so limited to [`EXACT_ISO_LIMIT`] vertices.
pub fn edit_distance_iso(g: &Graph, h: &Graph) -> Result<usize> {
    same_size(g, h)?;
    let n = g.n();
    if n > EXACT_ISO_LIMIT {
        return Err(Error::ExactSearchInfeasible { what: "isomorphism-minimized edit distance", size: n, limit: EXACT_ISO_LIMIT });
    }
    if g.edge_count() == 0 && h.edge_count() == 0 {
        return Ok(0);
    }
    let mut hrow = [0u8; EXACT_ISO_LIMIT];
    for &(u, v) in h.edges() {
        hrow[u] |= 1 << v;
        hrow[v] |= 1 << u;
    }
    let base = g.edge_count() + h.edge_count();
    let score = |p: &[usize]| {
        let common = g.edges().iter().filter(|&&(u, v)| hrow[p[u]] >> p[v] & 1 == 1).count();
        base - 2 * common
    };
    // Heap's algorithm.
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut best = score(&p);
    let mut i = 0;
    while i < n && best > 0 {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            best = best.min(score(&p));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

/// Finite-sample diagnostic for the relation "edit distance is o(|V|)".
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub indices: Vec<usize>,
    pub vertex_counts: Vec<usize>,
    pub distances: Vec<usize>,
    pub ratios: Vec<f64>,
    /// Least-squares slope of log(ratio) against log|V| over positive
    /// ratios; `None` when fewer than two ratios are positive.
    pub loglog_slope: Option<f64>,
    pub slope_tol: f64,
    /// All ratios zero, or the fitted slope is at most `-slope_tol`.
    pub consistent: bool,
}

/// Compares two families index by index using the labeled edit distance.
pub fn is_equivalent_sequence(a: &GraphFamily, b: &GraphFamily, indices: &[usize], slope_tol: f64) -> Result<EquivalenceReport> {
    let mut vertex_counts = Vec::with_capacity(indices.len());
    let mut distances = Vec::with_capacity(indices.len());
    let mut ratios = Vec::with_capacity(indices.len());
    for &i in indices {
        let (g, h) = (a.realize(i)?, b.realize(i)?);
        let d = edit_distance_labeled(&g, &h)?;
        vertex_counts.push(g.n());
        distances.push(d);
        ratios.push(if g.n() == 0 { 0.0 } else { d as f64 / g.n() as f64 });
    }
    let pts: Vec<(f64, f64)> = vertex_counts.iter().zip(&ratios).filter(|&(_, &r)| r > 0.0).map(|(&n, &r)| ((n as f64).ln(), r.ln())).collect();
    let loglog_slope = (pts.len() >= 2).then(|| {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx == 0.0 {
            0.0
        } else {
            sxy / sxx
        }
    });
    let all_zero = distances.iter().all(|&d| d == 0);
    let consistent = all_zero || loglog_slope.is_some_and(|s| s <= -slope_tol);
    Ok(EquivalenceReport { indices: indices.to_vec(), vertex_counts, distances, ratios, loglog_slope, slope_tol, consistent })
}
