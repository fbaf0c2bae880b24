use std::collections::{BTreeSet, HashSet};

use num_integer::Integer;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_k, Quotient};
use crate::enumerate::{key_of, CountHistogram};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rational::Q;
use crate::rng::seeded;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Exact,
    /// `budget` uniformly random colorings drawn from `seed`.
    Sampled {
        budget: u64,
        seed: u64,
    },
}

/// A finite set of quotients of one graph at a fixed `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientSet {
    pub k: usize,
    pub method: Method,
    pub points: BTreeSet<Quotient>,
}

impl QuotientSet {
    pub fn from_histogram(h: &CountHistogram) -> Self {
        let points = h.iter().map(|(key, _)| h.quotient(key)).collect();
        Self { k: h.k(), method: Method::Exact, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, q: &Quotient) -> bool {
        self.points.contains(q)
    }
}

/// All quotients `G/σ` over `k`-colorings: exhaustively (within `budget`,
/// per distinct component) or from random colorings.
pub fn partition_set(g: &Graph, k: usize, method: Method, budget: u128) -> Result<QuotientSet> {
    check_k(k)?;
    match method {
        Method::Exact => Ok(QuotientSet::from_histogram(&CountHistogram::build(g, k, budget)?)),
        Method::Sampled { budget: samples, seed } => {
            if g.n() == 0 {
                return Err(Error::InvalidParameter("graph has no vertices".into()));
            }
            let mut rng = seeded(seed, &[3]);
            let mut keys = HashSet::new();
            let mut colors = vec![0u8; g.n()];
            for _ in 0..samples {
                for c in colors.iter_mut() {
                    *c = rng.random_range(0..k as u8);
                }
                keys.insert(key_of(g, &colors, k));
            }
            let points = keys.iter().map(|key| Quotient::from_key(k, g.n(), key, g.degree_bound())).collect();
            Ok(QuotientSet { k, method, points })
        }
    }
}

/// Points rescaled to integers over a common denominator.
fn scaled(points: &[&Quotient], denom: i128) -> Vec<Vec<i128>> {
    points.iter().map(|p| p.flatten().iter().map(|v| *v.numer() as i128 * (denom / *v.denom() as i128)).collect()).collect()
}

fn common_denominator<'a>(pts: impl Iterator<Item = &'a Quotient>) -> Result<i128> {
    let mut l: i128 = 1;
    for p in pts {
        for v in p.flatten() {
            l = l.lcm(&(*v.denom() as i128));
            if l > i64::MAX as i128 {
                return Err(Error::InvalidParameter("denominators too large for exact distance".into()));
            }
        }
    }
    Ok(l)
}

fn directed(a: &[Vec<i128>], b: &[Vec<i128>]) -> i128 {
    a.par_iter().map(|p| b.iter().map(|r| p.iter().zip(r).map(|(x, y)| (x - y).abs()).max().unwrap_or(0)).min().expect("nonempty")).max().expect("nonempty")
}

/// Hausdorff distance under ℓ∞: the larger of the two directed
/// max-min distances. Exact.
pub fn set_distance(a: &QuotientSet, b: &QuotientSet) -> Result<Q> {
    if a.k != b.k {
        return Err(Error::ResolutionMismatch(a.k, b.k));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let l = common_denominator(a.points.iter().chain(&b.points))?;
    let pa: Vec<&Quotient> = a.points.iter().collect();
    let pb: Vec<&Quotient> = b.points.iter().collect();
    let (sa, sb) = (scaled(&pa, l), scaled(&pb, l));
    let d = directed(&sa, &sb).max(directed(&sb, &sa));
    Ok(Q::new(d as i64, l as i64))
}

/// ℓ∞ distance from a point to the nearest member of a set.
pub fn point_set_distance(p: &Quotient, set: &QuotientSet) -> Result<Q> {
    ScaledSet::new(set, 1)?.distance(p)
}

/// A set rescaled once to integers, for many nearest-point queries whose
/// denominators divide `denom`.
pub struct ScaledSet {
    k: usize,
    denom: i128,
    rows: Vec<Vec<i128>>,
}

impl ScaledSet {
    /// `extra` is folded into the common denominator so later queries with
    /// coordinates over `extra` need no rescaling of the set.
    pub fn new(set: &QuotientSet, extra: i64) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let l = common_denominator(set.points.iter())?.lcm(&(extra.max(1) as i128));
        if l > i64::MAX as i128 {
            return Err(Error::InvalidParameter("denominators too large for exact distance".into()));
        }
        let pts: Vec<&Quotient> = set.points.iter().collect();
        Ok(Self { k: set.k, denom: l, rows: scaled(&pts, l) })
    }

    pub fn distance(&self, p: &Quotient) -> Result<Q> {
        if p.k() != self.k {
            return Err(Error::ResolutionMismatch(p.k(), self.k));
        }
        let pl = common_denominator(std::iter::once(p))?;
        let l = self.denom.lcm(&pl);
        if l > i64::MAX as i128 {
            return Err(Error::InvalidParameter("denominators too large for exact distance".into()));
        }
        let up = l / self.denom;
        let query = scaled(&[p], l);
        let d = self.rows.par_iter().map(|r| query[0].iter().zip(r).map(|(x, y)| (x - y * up).abs()).max().unwrap_or(0)).min().expect("nonempty");
        Ok(Q::new(d as i64, l as i64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_BUDGET;
    use crate::rational::q;

    fn pt(x: [Q; 2], xx: [[Q; 2]; 2]) -> Quotient {
        Quotient::new(x.to_vec(), xx.iter().map(|r| r.to_vec()).collect(), 1).unwrap()
    }

    #[test]
    fn k2_exact_set() {
        let s = partition_set(&Graph::complete(2), 2, Method::Exact, DEFAULT_BUDGET).unwrap();
        let (z, h, o) = (q(0, 1), q(1, 2), q(1, 1));
        let expected: BTreeSet<_> = [pt([o, z], [[o, z], [z, z]]), pt([z, o], [[z, z], [z, o]]), pt([h, h], [[z, h], [h, z]])].into();
        assert_eq!(s.points, expected);
    }

    #[test]
    fn single_vertex_set() {
        let s = partition_set(&Graph::empty(1), 2, Method::Exact, DEFAULT_BUDGET).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn sampled_is_subset_of_exact() {
        let g = Graph::cycle(7).unwrap();
        let exact = partition_set(&g, 3, Method::Exact, DEFAULT_BUDGET).unwrap();
        let sampled = partition_set(&g, 3, Method::Sampled { budget: 300, seed: 4 }, DEFAULT_BUDGET).unwrap();
        assert!(!sampled.is_empty());
        assert!(sampled.points.is_subset(&exact.points));
        assert_eq!(sampled, partition_set(&g, 3, Method::Sampled { budget: 300, seed: 4 }, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn distance_examples() {
        let (z, h) = (q(0, 1), q(1, 2));
        let a = pt([h, h], [[z, h], [h, z]]);
        let b = pt([h, h], [[q(1, 10), h], [h, z]]);
        let one = |p: &Quotient| QuotientSet { k: 2, method: Method::Exact, points: [p.clone()].into() };
        assert_eq!(set_distance(&one(&a), &one(&a)).unwrap(), z);
        assert_eq!(set_distance(&one(&a), &one(&b)).unwrap(), q(1, 10));
        assert_eq!(point_set_distance(&a, &one(&b)).unwrap(), q(1, 10));
        let empty = QuotientSet { k: 2, method: Method::Exact, points: BTreeSet::new() };
        assert!(matches!(set_distance(&one(&a), &empty), Err(Error::EmptySet)));
    }

    #[test]
    fn unions_of_cycles_stay_on_the_row_sum_manifold() {
        for g in [Graph::cycle(4).unwrap().copies(3), Graph::cycle(6).unwrap().copies(2)] {
            let s = partition_set(&g, 2, Method::Exact, DEFAULT_BUDGET).unwrap();
            for p in &s.points {
                for i in 0..2 {
                    assert_eq!(p.row_sum(i), p.x()[i] * 2);
                }
            }
        }
    }
}
