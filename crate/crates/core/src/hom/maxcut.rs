use serde::Serialize;

use super::{hom_count, HomAlgorithm, TargetGraph};
use crate::enumerate::fold_colorings;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Exact cut enumeration is offered up to this many vertices.
pub const EXACT_MAXCUT_LIMIT: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct MaxCutRow {
    pub beta: f64,
    pub log_hom: f64,
    /// `(log hom)/β - n log 2 / β`.
    pub lower: f64,
    /// `(log hom)/β`.
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxCutReport {
    pub n: usize,
    pub rows: Vec<MaxCutRow>,
    /// Exact maximum cut, for graphs with at most [`EXACT_MAXCUT_LIMIT`] vertices.
    pub exact: Option<usize>,
    /// Every row brackets the exact value (when known).
    pub bracketed: Option<bool>,
}

/// Maximum cut by enumerating all `2^n` bipartitions.
pub fn exact_maxcut(g: &Graph) -> Result<usize> {
    if g.n() > EXACT_MAXCUT_LIMIT {
        return Err(Error::ExactSearchInfeasible { what: "cut enumeration", size: g.n(), limit: EXACT_MAXCUT_LIMIT });
    }
    fold_colorings(
        g.n(),
        2,
        u128::MAX,
        || 0usize,
        |best, c| {
            let cut = g.edges().iter().filter(|&&(u, v)| c[u] != c[v]).count();
            *best = (*best).max(cut);
        },
        usize::max,
    )
}

/// Brackets the maximum cut with `e^{β MaxCut} ≤ hom(G, H_β) ≤ 2^n e^{β MaxCut}`,
/// where `H_β` weights cut edges by `e^β`.
pub fn maxcut_from_beta(g: &Graph, betas: &[f64], budget: u128) -> Result<MaxCutReport> {
    let n = g.n();
    let mut rows = Vec::with_capacity(betas.len());
    for &beta in betas {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        let log_hom = hom_count(g, &TargetGraph::cut_weight(beta)?, HomAlgorithm::Components, budget)?.log_value;
        let upper = log_hom / beta;
        rows.push(MaxCutRow { beta, log_hom, lower: upper - n as f64 * 2f64.ln() / beta, upper });
    }
    let exact = if n <= EXACT_MAXCUT_LIMIT { Some(exact_maxcut(g)?) } else { None };
    let bracketed = exact.map(|m| {
        let m = m as f64;
        rows.iter().all(|r| r.lower <= m + 1e-9 * m.max(1.0) && m <= r.upper + 1e-9 * m.max(1.0))
    });
    Ok(MaxCutReport { n, rows, exact, bracketed })
}
