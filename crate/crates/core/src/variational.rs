//! Energy and entropy of quotients, and the bucket decomposition of the
//! partition function over the grid `Γ_δ`.
//!
//! Every coloring `σ` has weight `exp(-n ℰ_H(G/σ))`, so
//! `Z = Σ_cells Σ_{σ in cell} exp(-n ℰ_H)`. The energy is affine in the
//! quotient and moves by at most `K δ` inside a cell, where
//! `K = (k + k²/2) · max{|log α_i|, |log A_ij|}`. That gives
//!
//! ```text
//! L = max_cells [log count / n - ℰ(corner) - Kδ]  ≤  (1/n) log Z  ≤  L + 2Kδ + log(#cells) / n.
//! ```

use std::collections::BTreeMap;

use num_traits::Signed;
use serde::Serialize;

use crate::coloring::Quotient;
use crate::enumerate::{fold_colorings, key_of, CountHistogram};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hom::{hom_count, HomAlgorithm, TargetGraph};
use crate::numeric::{ln_u128, LogSum};
use crate::rate::{cell_of_key, full_coords};
use crate::rational::{to_f64, Q};

/// Energy of a point given as full `(k+1) × k` coordinates: `x`, then rows of `X`.
fn energy_full(k: usize, coords: &[f64], h: &TargetGraph) -> f64 {
    let mut e = 0.0;
    for i in 0..k {
        e -= coords[i] * h.alpha()[i].ln();
    }
    for i in 0..k {
        for j in 0..k {
            let x = coords[k + i * k + j];
            let a = h.a(i, j);
            if x == 0.0 {
                continue;
            }
            if a == 0.0 {
                return f64::INFINITY;
            }
            e -= 0.5 * x * a.ln();
        }
    }
    e
}

fn check_k(qk: usize, h: &TargetGraph) -> Result<()> {
    if qk != h.k() {
        return Err(Error::ResolutionMismatch(qk, h.k()));
    }
    Ok(())
}

/// `ℰ_H(x, X) = -Σ x_i log α_i - ½ Σ X_ij log A_ij`, with `0 · log 0 = 0`
/// and `+∞` when `X_ij > 0` but `A_ij = 0`.
pub fn energy(q: &Quotient, h: &TargetGraph) -> Result<f64> {
    check_k(q.k(), h)?;
    let coords: Vec<f64> = q.flatten().iter().map(to_f64).collect();
    Ok(energy_full(q.k(), &coords, h))
}

/// `(k + k²/2) · max{|log α_i|, |log A_ij|}` over the finite logarithms.
pub fn lipschitz_constant(h: &TargetGraph) -> f64 {
    let k = h.k() as f64;
    let m = h.alpha().iter().chain(h.a_rows().iter().flatten()).filter(|&&w| w > 0.0).map(|w| w.ln().abs()).fold(0.0, f64::max);
    (k + k * k / 2.0) * m
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyEntropyPoint {
    pub quotient: Quotient,
    pub energy: f64,
    #[serde(with = "crate::numeric::ext")]
    pub entropy: f64,
    /// `energy - entropy`.
    #[serde(with = "crate::numeric::ext")]
    pub free: f64,
}

/// Energy and entropy `log k - Î_k` of an achievable quotient, with the
/// rate taken at radius `delta`.
pub fn energy_entropy_point(g: &Graph, q: &Quotient, h: &TargetGraph, delta: &Q, budget: u128) -> Result<EnergyEntropyPoint> {
    let e = energy(q, h)?;
    let rate = crate::rate::rate_exact(g, q.k(), q, delta, budget)?.value;
    let entropy = (q.k() as f64).ln() - rate;
    Ok(EnergyEntropyPoint { quotient: q.clone(), energy: e, entropy, free: e - entropy })
}

/// One occupied cell: colorings counted, and the energy at its lower corner.
#[derive(Clone, Debug, Serialize)]
pub struct GibbsCell {
    pub cell: Vec<i64>,
    pub count: String,
    pub corner_energy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GibbsReport {
    pub n: usize,
    pub k: usize,
    #[serde(with = "crate::rational::as_str")]
    pub delta: Q,
    pub lipschitz: f64,
    pub occupied: usize,
    /// Per-vertex bounds on `log Z`.
    pub lower: f64,
    pub upper: f64,
    /// Exact `(1/n) log Z`.
    pub exact: f64,
    pub contained: bool,
    /// `2Kδ + log(#cells)/n`.
    pub width_bound: f64,
    /// `(1/n) log Σ_cells (exact weight of the cell)`, in identity-check mode.
    #[serde(with = "crate::numeric::ext_opt")]
    pub identity: Option<f64>,
    pub cells: Vec<GibbsCell>,
}

fn corner_energy(k: usize, cell: &[i64], delta: &Q, h: &TargetGraph) -> f64 {
    let coords: Vec<f64> = cell.iter().map(|&m| to_f64(&(*delta * m))).collect();
    energy_full(k, &coords, h)
}

/// Rounding allowance when comparing the exact value with the bounds.
const CONTAIN_SLACK: f64 = 1e-12;

/// Bounds `(1/n) log Z` through the `Γ_δ` bucket histogram and checks the
/// exact value lies between them. With `identity_check`, also sums exact
/// per-cell weights by brute force, which must reproduce `log Z`.
pub fn gibbs_bucket_decomposition(g: &Graph, h: &TargetGraph, delta: &Q, identity_check: bool, budget: u128) -> Result<GibbsReport> {
    if !h.is_soft_core() {
        return Err(Error::HardCoreRejected);
    }
    let k = h.k();
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidParameter("empty graph".into()));
    }
    let hist = CountHistogram::build(g, k, budget)?;
    let buckets = crate::rate::BucketHistogram::from_histogram(&hist, delta)?;
    let lip = lipschitz_constant(h);
    let kd = lip * to_f64(delta);
    let nf = n as f64;
    let cells: Vec<GibbsCell> = buckets
        .cells
        .iter()
        .map(|(cell, &c)| GibbsCell { cell: cell.clone(), count: c.to_string(), corner_energy: corner_energy(k, cell, delta, h) })
        .collect();
    let best = buckets.cells.iter().zip(&cells).map(|((_, &c), gc)| ln_u128(c) / nf - gc.corner_energy).fold(f64::NEG_INFINITY, f64::max);
    let lower = best - kd;
    let upper = best + kd + (cells.len() as f64).ln() / nf;
    let exact = hom_count(g, h, HomAlgorithm::Components, budget)?.per_vertex;
    let tol = CONTAIN_SLACK * exact.abs().max(1.0);
    let identity = if identity_check {
        let per_cell = fold_colorings(
            n,
            k,
            budget,
            BTreeMap::<Vec<i64>, LogSum>::new,
            |m, c| {
                let key = key_of(g, c, k);
                m.entry(cell_of_key(k, n, &key, delta)).or_default().push(h.log_weight(g, c));
            },
            |mut a, b| {
                for (cell, s) in b {
                    let e = a.entry(cell).or_default();
                    *e = e.merge(s);
                }
                a
            },
        )?;
        let mut total = LogSum::new();
        for s in per_cell.values() {
            total.push(s.value());
        }
        Some(total.value() / nf)
    } else {
        None
    };
    Ok(GibbsReport {
        n,
        k,
        delta: *delta,
        lipschitz: lip,
        occupied: cells.len(),
        lower,
        upper,
        exact,
        contained: lower <= exact + tol && exact <= upper + tol,
        width_bound: 2.0 * kd + (cells.len() as f64).ln() / nf,
        identity,
        cells,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VariationalReport {
    /// Grid cell of the minimizer and its lower corner.
    pub cell: Vec<i64>,
    #[serde(with = "crate::rational::vec_as_str")]
    pub corner: Vec<Q>,
    pub energy: f64,
    /// `log(count in cell) / n`, i.e. `log k - Î_k` for the cell.
    pub entropy: f64,
    /// `min (ℰ - 𝒮)` over occupied cells.
    pub value: f64,
    /// `-(1/n) log Z`.
    #[serde(with = "crate::numeric::ext")]
    pub direct: f64,
    /// `value - direct`.
    #[serde(with = "crate::numeric::ext")]
    pub gap: f64,
    /// `Kδ + log(#cells)/n`, a bound on `|gap|`.
    pub slack: f64,
    pub occupied: usize,
}

/// Minimizes `ℰ_H - 𝒮_k` over occupied cells of `Γ_δ`. The entropy of a cell
/// counts only colorings compatible with every zero of `A`; cells with none
/// have infinite energy and are never chosen while a finite cell exists.
/// Ties go to the lexicographically smallest cell.
pub fn variational_free_energy(g: &Graph, h: &TargetGraph, delta: &Q, budget: u128) -> Result<VariationalReport> {
    let k = h.k();
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidParameter("empty graph".into()));
    }
    if !delta.is_positive() {
        return Err(Error::InvalidParameter("grid pitch must be positive".into()));
    }
    let hist = CountHistogram::build(g, k, budget)?;
    let mut cells: BTreeMap<Vec<i64>, u128> = BTreeMap::new();
    for (key, c) in hist.iter() {
        let cell = cell_of_key(k, n, key, delta);
        let full = full_coords(k, key);
        let compatible = (0..k).all(|i| (0..k).all(|j| full[k + i * k + j] == 0 || h.a(i, j) > 0.0));
        let e = cells.entry(cell).or_insert(0);
        if compatible {
            *e += c;
        }
    }
    let nf = n as f64;
    let mut best: Option<(Vec<i64>, f64, f64, f64)> = None;
    for (cell, &c) in &cells {
        let (energy, entropy) = if c == 0 { (f64::INFINITY, f64::NEG_INFINITY) } else { (corner_energy(k, cell, delta, h), ln_u128(c) / nf) };
        let value = energy - entropy;
        if best.as_ref().is_none_or(|b| value < b.3) {
            best = Some((cell.clone(), energy, entropy, value));
        }
    }
    let (cell, energy, entropy, value) = best.ok_or(Error::EmptySet)?;
    let direct = hom_count(g, h, HomAlgorithm::Components, budget)?.free_energy();
    let corner = cell.iter().map(|&m| *delta * m).collect();
    Ok(VariationalReport {
        cell,
        corner,
        energy,
        entropy,
        value,
        direct,
        gap: value - direct,
        slack: lipschitz_constant(h) * to_f64(delta) + (cells.len() as f64).ln() / nf,
        occupied: cells.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_BUDGET;
    use crate::rational::q;
    use std::f64::consts::E;

    fn ising() -> TargetGraph {
        TargetGraph::new(vec![1.0, 1.0], vec![vec![1.0, E], vec![E, 1.0]]).unwrap()
    }

    #[test]
    fn energies() {
        let (z, h) = (q(0, 1), q(1, 2));
        let p = Quotient::new(vec![h, h], vec![vec![z, q(1, 1)], vec![q(1, 1), z]], 1).unwrap();
        assert_eq!(energy(&p, &TargetGraph::uniform(2).unwrap()).unwrap(), 0.0);
        assert!((energy(&p, &ising()).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(energy(&p, &TargetGraph::new(vec![1.0, 1.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()).unwrap(), f64::INFINITY);
        assert_eq!(energy(&p, &TargetGraph::hard_core_k2()).unwrap(), -0.0);
    }

    #[test]
    fn uniform_target_collapses() {
        let g = Graph::cycle(6).unwrap();
        let r = gibbs_bucket_decomposition(&g, &TargetGraph::uniform(3).unwrap(), &q(4, 1), true, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.occupied, 1);
        assert!((r.lower - 3f64.ln()).abs() < 1e-12 && (r.upper - 3f64.ln()).abs() < 1e-12);
        assert!(r.contained);
    }

    #[test]
    fn sandwich_on_small_graphs() {
        let g = Graph::complete(2).copies(8);
        let r = gibbs_bucket_decomposition(&g, &ising(), &q(1, 16), true, DEFAULT_BUDGET).unwrap();
        assert!(r.contained, "{r:?}");
        assert!((r.exact - 0.5 * (2.0 + 2.0 * E).ln()).abs() < 1e-12);
        assert!((r.identity.unwrap() - r.exact).abs() < 1e-12);
        assert!(r.upper - r.lower <= r.width_bound + 1e-12);
        let h = TargetGraph::new(vec![0.7, 1.9], vec![vec![1.3, 0.4], vec![0.4, 2.2]]).unwrap();
        let r = gibbs_bucket_decomposition(&Graph::cycle(6).unwrap(), &h, &q(1, 12), true, DEFAULT_BUDGET).unwrap();
        assert!(r.contained);
        assert!(matches!(gibbs_bucket_decomposition(&g, &TargetGraph::hard_core_k2(), &q(1, 4), false, DEFAULT_BUDGET), Err(Error::HardCoreRejected)));
    }

    #[test]
    fn variational_value() {
        let g = Graph::complete(2).copies(8);
        let r = variational_free_energy(&g, &ising(), &q(1, 16), DEFAULT_BUDGET).unwrap();
        assert!(r.gap.abs() <= r.slack);
        let u = variational_free_energy(&g, &TargetGraph::uniform(2).unwrap(), &q(4, 1), DEFAULT_BUDGET).unwrap();
        assert!((u.value + 2f64.ln()).abs() < 1e-12);
        let c5 = Graph::cycle(5).unwrap().copies(2);
        let hc = variational_free_energy(&c5, &TargetGraph::hard_core_k2(), &q(1, 8), DEFAULT_BUDGET).unwrap();
        assert_eq!(hc.direct, f64::INFINITY);
        let c6 = Graph::cycle(6).unwrap();
        let hc = variational_free_energy(&c6, &TargetGraph::hard_core_k2(), &q(1, 8), DEFAULT_BUDGET).unwrap();
        assert!(hc.value.is_finite());
        assert!((hc.entropy - 2f64.ln() / 6.0).abs() < 1e-12);
    }
}
