use std::collections::HashMap;

use serde::Serialize;

use super::{free_energy, hom_count, HomAlgorithm, TargetGraph};
use crate::enumerate::fold_colorings;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::LogSum;

/// Edges whose deletion makes a hard-core target nearly as easy to map
/// into as its softened version.
#[derive(Clone, Debug, Serialize)]
pub struct DeletionWitness {
    pub removed_edges: Vec<(usize, usize)>,
    /// `log hom(G - E₀, H)`.
    #[serde(with = "crate::numeric::ext")]
    pub log_hom_after: f64,
    pub epsilon: f64,
    pub lambda: f64,
    /// Number of violated edges in the heaviest bucket under `H_λ`.
    pub r0: usize,
    /// `f(G, H_λ)`, the reference free energy.
    pub f_hat: f64,
    /// `|E₀| ≤ ε n`.
    pub size_ok: bool,
    /// `hom(G - E₀, H) ≥ exp(-(f̂ + ε) n)`.
    pub weight_ok: bool,
}

impl DeletionWitness {
    pub fn satisfied(&self) -> bool {
        self.size_ok && self.weight_ok
    }
}

/// Groups colorings by the set `E₀(σ)` of edges sent to zero-weight pairs of
/// `H`, picks the size `r₀` whose bucket carries the most `H_λ` weight, then
/// the set `E₀` of that size whose colorings carry the most `H` weight on
/// `G - E₀`. Ties go to the lexicographically smallest edge set.
///
/// Both witness conditions are checked and reported. When either fails the
/// result is `Error::NoWitness`; use [`DeletionWitness::satisfied`] on the
/// report from [`deletion_witness_report`] to inspect without failing.
pub fn deletion_witness(g: &Graph, h: &TargetGraph, epsilon: f64, lambda: f64, budget: u128) -> Result<DeletionWitness> {
    let w = deletion_witness_report(g, h, epsilon, lambda, budget)?;
    if w.satisfied() {
        Ok(w)
    } else {
        let reason = if !w.size_ok {
            format!("best bucket needs {} deletions, more than epsilon * n = {}", w.r0, epsilon * g.n() as f64)
        } else {
            format!("log hom after deletion {} is below -(f + epsilon) n", w.log_hom_after)
        };
        Err(Error::NoWitness { epsilon, reason })
    }
}

/// Like [`deletion_witness`] but returns the report even when a condition fails.
pub fn deletion_witness_report(g: &Graph, h: &TargetGraph, epsilon: f64, lambda: f64, budget: u128) -> Result<DeletionWitness> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let edges = g.edges().to_vec();
    if edges.len() > 64 {
        return Err(Error::ExactSearchInfeasible { what: "edge set for deletion masks", size: edges.len(), limit: 64 });
    }
    let soft = h.soften(lambda)?;
    let log_alpha: Vec<f64> = h.alpha().iter().map(|a| a.ln()).collect();
    // Per violated-edge mask: log of Σ_σ (H weight of σ on G - mask).
    let masses = fold_colorings(
        g.n(),
        h.k(),
        budget,
        HashMap::<u64, LogSum>::new,
        |m, c| {
            let mut mask = 0u64;
            let mut w: f64 = c.iter().map(|&x| log_alpha[x as usize]).sum();
            for (e, &(u, v)) in edges.iter().enumerate() {
                let a = h.a(c[u] as usize, c[v] as usize);
                if a == 0.0 {
                    mask |= 1 << e;
                } else {
                    w += a.ln();
                }
            }
            m.entry(mask).or_default().push(w);
        },
        |mut a, b| {
            for (mask, s) in b {
                let e = a.entry(mask).or_default();
                *e = e.merge(s);
            }
            a
        },
    )?;
    let mut buckets: HashMap<usize, LogSum> = HashMap::new();
    for (mask, s) in &masses {
        let r = mask.count_ones() as usize;
        buckets.entry(r).or_default().push(s.value() + r as f64 * lambda.ln());
    }
    let mut rs: Vec<(usize, f64)> = buckets.into_iter().map(|(r, s)| (r, s.value())).collect();
    rs.sort_by_key(|&(r, _)| r);
    let (r0, _) = rs.iter().copied().fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let edge_list = |mask: u64| -> Vec<(usize, usize)> { (0..edges.len()).filter(|e| mask >> e & 1 == 1).map(|e| edges[e]).collect() };
    let (best_mask, _) =
        masses.iter().filter(|(m, _)| m.count_ones() as usize == r0).map(|(&m, s)| (m, s.value())).fold((None::<u64>, f64::NEG_INFINITY), |best, (m, v)| {
            match best.0 {
                Some(bm) if v < best.1 || (v == best.1 && edge_list(bm) <= edge_list(m)) => best,
                _ => (Some(m), v),
            }
        });
    let removed_edges = edge_list(best_mask.unwrap_or(0));
    let after = g.without_edges(&removed_edges);
    let log_hom_after = hom_count(&after, h, HomAlgorithm::Components, budget)?.log_value;
    let f_hat = free_energy(g, &soft, budget)?;
    let n = g.n() as f64;
    Ok(DeletionWitness {
        size_ok: removed_edges.len() as f64 <= epsilon * n,
        weight_ok: log_hom_after >= -(f_hat + epsilon) * n,
        removed_edges,
        log_hom_after,
        epsilon,
        lambda,
        r0,
        f_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_BUDGET;

    #[test]
    fn odd_cycle_loses_one_edge() {
        let c5 = Graph::cycle(5).unwrap();
        let w = deletion_witness(&c5, &TargetGraph::hard_core_k2(), 0.2, 0.01, DEFAULT_BUDGET).unwrap();
        assert_eq!(w.removed_edges.len(), 1);
        assert_eq!(w.r0, 1);
        assert!((w.log_hom_after.exp() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn nothing_to_delete() {
        let c6 = Graph::cycle(6).unwrap();
        let w = deletion_witness(&c6, &TargetGraph::hard_core_k2(), 0.1, 0.01, DEFAULT_BUDGET).unwrap();
        assert!(w.removed_edges.is_empty());
        assert!((w.log_hom_after.exp() - 2.0).abs() < 1e-12);
        let soft = TargetGraph::new(vec![1.0, 2.0], vec![vec![0.5, 1.0], vec![1.0, 3.0]]).unwrap();
        let w = deletion_witness(&c6, &soft, 0.0, 0.01, DEFAULT_BUDGET).unwrap();
        assert!(w.removed_edges.is_empty());
    }

    #[test]
    fn failure_is_reported() {
        let c5 = Graph::cycle(5).unwrap();
        let err = deletion_witness(&c5, &TargetGraph::hard_core_k2(), 0.1, 0.01, DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(err, Error::NoWitness { .. }));
        let r = deletion_witness_report(&c5, &TargetGraph::hard_core_k2(), 0.1, 0.01, DEFAULT_BUDGET).unwrap();
        assert!(!r.size_ok && r.weight_ok);
    }
}
