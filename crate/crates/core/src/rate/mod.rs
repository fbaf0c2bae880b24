//! Empirical rate functions.
//!
//! For a graph on `n` vertices, `k` colors, a center `c` of the quotient
//! space and a radius `δ`, the empirical rate is
//!
//! ```text
//! Î(c; δ) = log k - (1/n) log #{σ : ‖G/σ - c‖∞ ≤ δ}
//! ```
//!
//! i.e. `-(1/n) log P(G/σ ∈ B(c, δ))` for a uniform random coloring, and
//! `+∞` when the ball holds no coloring. [`RateEngine`] answers many such
//! queries from one exact histogram; [`sampled`] estimates the same
//! probability by i.i.d. or flat-histogram sampling; [`sanov`] computes it
//! for disjoint unions from the type vector of the copies.

pub mod diagnostics;
pub mod sampled;
pub mod sanov;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{check_k, Quotient};
use crate::enumerate::{key_len, pair_slot, CountHistogram};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::ln_u128;
use crate::rational::{format_q, Q};

/// Everything that defines a rate query.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateQuery {
    pub graph: Graph,
    pub k: usize,
    pub center: Quotient,
    #[serde(with = "crate::rational::as_str")]
    pub delta: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateMethod {
    Exact,
    Iid {
        samples: u64,
        seed: u64,
        z: f64,
    },
    FlatHistogram {
        seed: u64,
        stages: usize,
        sweeps: u64,
        #[serde(with = "crate::rational::as_str")]
        pitch: Q,
        all_flat: bool,
    },
    Sanov {
        copies: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// `Î`, possibly `+∞`.
    #[serde(with = "crate::numeric::ext")]
    pub value: f64,
    pub method: RateMethod,
    pub n: usize,
    pub k: usize,
    /// Exact number of colorings in the ball (decimal string), exact methods only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::numeric::ext_opt")]
    pub log_count: Option<f64>,
    /// Confidence interval on the rate scale, sampled methods only.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::numeric::ext_pair")]
    pub ci: Option<(f64, f64)>,
    #[serde(default)]
    pub censored: bool,
}

/// `log k - (1/n) log count`, clamped at zero; `+∞` for an empty ball.
pub fn rate_from_count(count: u128, n: usize, k: usize) -> f64 {
    if count == 0 {
        f64::INFINITY
    } else {
        ((k as f64).ln() - ln_u128(count) / n as f64).max(0.0)
    }
}

fn check_query(k: usize, center: &Quotient, delta: &Q) -> Result<()> {
    check_k(k)?;
    if center.k() != k {
        return Err(Error::ResolutionMismatch(center.k(), k));
    }
    if !delta.is_positive() {
        return Err(Error::InvalidParameter("ball radius must be positive".into()));
    }
    Ok(())
}

/// Numerators over `n` of the distinct coordinates of a key: `x_i`, then
/// `X_ij` for `i <= j` (so `2 e_ii` on the diagonal).
pub(crate) fn key_coords(k: usize, key: &[u32]) -> Vec<i64> {
    let mut out: Vec<i64> = key[..k].iter().map(|&v| v as i64).collect();
    for i in 0..k {
        for j in i..k {
            let e = key[pair_slot(k, i, j)] as i64;
            out.push(if i == j { 2 * e } else { e });
        }
    }
    out
}

/// The same coordinates of a quotient, as rationals.
pub(crate) fn quotient_coords(q: &Quotient) -> Vec<Q> {
    let k = q.k();
    let mut out = q.x().to_vec();
    for i in 0..k {
        for j in i..k {
            out.push(q.xx(i, j));
        }
    }
    out
}

/// Integer window `[lo, hi]` for each coordinate numerator of a ball.
pub(crate) fn ball_window(center: &Quotient, delta: &Q, n: usize) -> Vec<(i64, i64)> {
    let nn = Q::from_integer(n as i64);
    quotient_coords(center).iter().map(|c| (((c - delta) * nn).ceil().to_integer(), ((c + delta) * nn).floor().to_integer())).collect()
}

#[inline]
pub(crate) fn in_window(coords: &[i64], window: &[(i64, i64)]) -> bool {
    coords.iter().zip(window).all(|(&v, &(lo, hi))| lo <= v && v <= hi)
}

/// Exact ball counts from a precomputed histogram.
#[derive(Clone, Debug)]
pub struct RateEngine {
    k: usize,
    n: usize,
    dim: usize,
    coords: Vec<i64>,
    counts: Vec<u128>,
    hist: CountHistogram,
}

impl RateEngine {
    pub fn new(hist: CountHistogram) -> Self {
        let k = hist.k();
        let dim = key_len(k);
        let mut coords = Vec::with_capacity(hist.len() * dim);
        let mut counts = Vec::with_capacity(hist.len());
        for (key, c) in hist.sorted() {
            coords.extend(key_coords(k, key));
            counts.push(c);
        }
        Self { k, n: hist.n(), dim, coords, counts, hist }
    }

    pub fn build(g: &Graph, k: usize, budget: u128) -> Result<Self> {
        Ok(Self::new(CountHistogram::build(g, k, budget)?))
    }

    pub fn histogram(&self) -> &CountHistogram {
        &self.hist
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of colorings whose quotient lies in the closed ℓ∞ ball.
    pub fn count_ball(&self, center: &Quotient, delta: &Q) -> Result<u128> {
        check_query(self.k, center, delta)?;
        let w = ball_window(center, delta, self.n);
        Ok(self.coords.par_chunks(self.dim).zip(self.counts.par_iter()).filter(|(c, _)| in_window(c, &w)).map(|(_, &n)| n).sum())
    }

    pub fn estimate(&self, center: &Quotient, delta: &Q) -> Result<RateEstimate> {
        let count = self.count_ball(center, delta)?;
        Ok(RateEstimate {
            value: rate_from_count(count, self.n, self.k),
            method: RateMethod::Exact,
            n: self.n,
            k: self.k,
            count: Some(count.to_string()),
            log_count: Some(ln_u128(count)),
            ci: None,
            censored: false,
        })
    }
}

/// Exact empirical rate by (component-factorized) enumeration.
pub fn rate_exact(g: &Graph, k: usize, center: &Quotient, delta: &Q, budget: u128) -> Result<RateEstimate> {
    check_query(k, center, delta)?;
    RateEngine::build(g, k, budget)?.estimate(center, delta)
}

/// Exact coloring counts per cell of the grid `Γ_δ` on the `(k+1) × k`
/// flattening. Cells are half-open `[mδ, (m+1)δ)` per coordinate, so a
/// value on a grid line belongs to the cell above it.
#[derive(Clone, Debug, PartialEq)]
pub struct BucketHistogram {
    pub k: usize,
    pub n: usize,
    pub delta: Q,
    pub cells: BTreeMap<Vec<i64>, u128>,
}

/// Full `(k+1) × k` coordinate numerators (over `n`) of a key.
pub(crate) fn full_coords(k: usize, key: &[u32]) -> Vec<i64> {
    let mut out: Vec<i64> = key[..k].iter().map(|&v| v as i64).collect();
    for i in 0..k {
        for j in 0..k {
            let e = key[pair_slot(k, i, j)] as i64;
            out.push(if i == j { 2 * e } else { e });
        }
    }
    out
}

/// Γ_δ cell of a key: `floor(v / (n δ))` per coordinate, in integers.
pub(crate) fn cell_of_key(k: usize, n: usize, key: &[u32], pitch: &Q) -> Vec<i64> {
    let (p, q) = (*pitch.numer(), *pitch.denom());
    full_coords(k, key).into_iter().map(|v| (v * q).div_euclid(n as i64 * p)).collect()
}

/// Does the closed cell `cell` (pitch `pitch`) meet the closed ball?
pub(crate) fn cell_meets_ball(cell: &[i64], pitch: &Q, full_center: &[Q], delta: &Q) -> bool {
    cell.iter().zip(full_center).all(|(&m, c)| {
        let lo = *pitch * m;
        lo <= c + delta && lo + pitch >= c - delta
    })
}

impl BucketHistogram {
    pub fn from_histogram(h: &CountHistogram, delta: &Q) -> Result<Self> {
        if !delta.is_positive() {
            return Err(Error::InvalidParameter("grid pitch must be positive".into()));
        }
        let mut cells = BTreeMap::new();
        for (key, c) in h.iter() {
            *cells.entry(cell_of_key(h.k(), h.n(), key, delta)).or_insert(0u128) += c;
        }
        Ok(Self { k: h.k(), n: h.n(), delta: *delta, cells })
    }

    pub fn total(&self) -> u128 {
        self.cells.values().sum()
    }

    pub fn occupied(&self) -> usize {
        self.cells.len()
    }

    /// Lower corner of a cell as rational coordinates.
    pub fn representative(&self, cell: &[i64]) -> Vec<Q> {
        cell.iter().map(|&m| self.delta * m).collect()
    }

    /// CSV with one column per coordinate (lower corner, `p/q`) and a count.
    pub fn to_csv(&self) -> String {
        let k = self.k;
        let mut s = String::new();
        let mut cols: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
        cols.extend((1..=k).flat_map(|i| (1..=k).map(move |j| format!("X{i}_{j}"))));
        cols.push("count".into());
        writeln!(s, "{}", cols.join(",")).unwrap();
        for (cell, c) in &self.cells {
            let row: Vec<String> = self.representative(cell).iter().map(format_q).collect();
            writeln!(s, "{},{c}", row.join(",")).unwrap();
        }
        s
    }
}

/// [`BucketHistogram`] by exact enumeration.
pub fn bucket_histogram(g: &Graph, k: usize, delta: &Q, budget: u128) -> Result<BucketHistogram> {
    BucketHistogram::from_histogram(&CountHistogram::build(g, k, budget)?, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_BUDGET;
    use crate::numeric::ln_factorial;
    use crate::rational::q;

    fn center2(x0: Q, xx: [[Q; 2]; 2]) -> Quotient {
        Quotient::new(vec![x0, Q::from_integer(1) - x0], xx.iter().map(|r| r.to_vec()).collect(), 1).unwrap()
    }

    #[test]
    fn isolated_nodes() {
        let g = Graph::empty(10);
        let z = q(0, 1);
        let tight = q(1, 1000);
        let mono = rate_exact(&g, 2, &center2(q(1, 1), [[z, z], [z, z]]), &tight, DEFAULT_BUDGET).unwrap();
        assert_eq!(mono.count.as_deref(), Some("1"));
        assert!((mono.value - 2f64.ln()).abs() < 1e-15);
        let half = rate_exact(&g, 2, &center2(q(1, 2), [[z, z], [z, z]]), &tight, DEFAULT_BUDGET).unwrap();
        assert_eq!(half.count.as_deref(), Some("252"));
        let closed = 2f64.ln() - (ln_factorial(10) - 2.0 * ln_factorial(5)) / 10.0;
        assert!((half.value - closed).abs() < 1e-12);
        assert!((half.value - 0.1402).abs() < 1e-4);
    }

    #[test]
    fn unachievable_center_is_infinite() {
        let g = Graph::cycle(6).unwrap();
        let z = q(0, 1);
        let c = center2(q(1, 2), [[q(3, 1), z], [z, z]]);
        let r = rate_exact(&g, 2, &c, &q(1, 10), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.value, f64::INFINITY);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains(r#""value":"inf""#), "{s}");
    }

    #[test]
    fn k2_buckets() {
        let b = bucket_histogram(&Graph::complete(2), 2, &q(1, 4), DEFAULT_BUDGET).unwrap();
        let mut counts: Vec<u128> = b.cells.values().copied().collect();
        counts.sort_unstable();
        assert_eq!(counts, vec![1, 1, 2]);
        assert_eq!(b.total(), 4);
        let single = bucket_histogram(&Graph::empty(1), 3, &q(1, 4), DEFAULT_BUDGET).unwrap();
        assert_eq!(single.cells.values().copied().collect::<Vec<_>>(), vec![1, 1, 1]);
        assert!(b.to_csv().starts_with("x1,x2,X1_1,X1_2,X2_1,X2_2,count\n"));
    }

    #[test]
    fn radius_monotonicity() {
        let g = Graph::cycle(8).unwrap();
        let e = RateEngine::build(&g, 2, DEFAULT_BUDGET).unwrap();
        let c = center2(q(1, 2), [[q(1, 2), q(1, 2)], [q(1, 2), q(1, 2)]]);
        let mut last = f64::INFINITY;
        for d in 1..20 {
            let v = e.estimate(&c, &q(d, 40)).unwrap().value;
            assert!(v <= last);
            last = v;
        }
        assert_eq!(e.estimate(&c, &q(3, 1)).unwrap().value, 0.0);
    }
}
