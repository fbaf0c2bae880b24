//! Exhaustive coloring enumeration.
//!
//! Every exact computation in the crate reduces to walking all `k^n`
//! colorings or to the histogram of their *count keys*: `k` color counts
//! followed by the edge counts `e_ij` (`i <= j`). A key determines the
//! quotient, so the histogram is the exact partition set with
//! multiplicities. Disjoint unions are handled per component and combined
//! by convolution, and identical components are enumerated once.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::coloring::{check_k, Quotient};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default cap on the number of colorings visited by exact methods.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Target number of parallel chunks.
const CHUNKS: u128 = 256;

pub fn key_len(k: usize) -> usize {
    k + k * (k + 1) / 2
}

/// Slot of `e_ij` in a count key; order of `i`, `j` is irrelevant.
#[inline]
pub fn pair_slot(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    k + i * k - i * i.saturating_sub(1) / 2 + (j - i)
}

pub(crate) fn key_of(g: &Graph, colors: &[u8], k: usize) -> Vec<u32> {
    let mut key = vec![0u32; key_len(k)];
    for &c in colors {
        key[c as usize] += 1;
    }
    for &(u, v) in g.edges() {
        key[pair_slot(k, colors[u] as usize, colors[v] as usize)] += 1;
    }
    key
}

/// `k^n`, or `None` on overflow.
pub fn coloring_count(n: usize, k: usize) -> Option<u128> {
    (k as u128).checked_pow(n as u32)
}

fn check_budget(needed: Option<u128>, budget: u128) -> Result<u128> {
    match needed {
        Some(v) if v <= budget => Ok(v),
        Some(v) => Err(Error::BudgetExceeded { needed: v, budget }),
        None => Err(Error::BudgetExceeded { needed: u128::MAX, budget }),
    }
}

/// Splits `0..k^n` into chunks by fixing the colors of the top vertices.
fn chunking(n: usize, k: usize) -> (usize, u128) {
    let mut fixed = 0;
    let mut chunks: u128 = 1;
    while fixed < n && chunks < CHUNKS {
        fixed += 1;
        chunks *= k as u128;
    }
    (fixed, chunks)
}

fn chunk_start(n: usize, k: usize, fixed: usize, chunk: u128) -> Vec<u8> {
    let mut colors = vec![0u8; n];
    let mut c = chunk;
    for v in colors[n - fixed..].iter_mut() {
        *v = (c % k as u128) as u8;
        c /= k as u128;
    }
    colors
}

/// Advances the free prefix `colors[..free]` like an odometer. Returns
/// false after the last state.
#[inline]
fn step(colors: &mut [u8], free: usize, k: u8) -> bool {
    for c in colors[..free].iter_mut() {
        *c = if *c + 1 == k { 0 } else { *c + 1 };
        if *c != 0 {
            return true;
        }
    }
    false
}

/// Folds `visit` over all `k^n` colorings (zero-based colors) in parallel.
/// Chunk results are merged left to right in a fixed order, so the result
/// is deterministic even for non-associative (floating point) merges.
pub fn fold_colorings<T, I, V, M>(n: usize, k: usize, budget: u128, init: I, visit: V, merge: M) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    V: Fn(&mut T, &[u8]) + Sync,
    M: Fn(T, T) -> T,
{
    check_k(k)?;
    check_budget(coloring_count(n, k), budget)?;
    let (fixed, chunks) = chunking(n, k);
    let free = n - fixed;
    let parts: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = init();
            let mut colors = chunk_start(n, k, fixed, chunk);
            loop {
                visit(&mut acc, &colors);
                if !step(&mut colors, free, k as u8) {
                    break;
                }
            }
            acc
        })
        .collect();
    let mut it = parts.into_iter();
    let first = it.next().expect("at least one chunk");
    Ok(it.fold(first, merge))
}

type Counts = HashMap<Vec<u32>, u128>;

fn bump(map: &mut Counts, key: &[u32], by: u128) -> Result<()> {
    match map.get_mut(key) {
        Some(c) => *c = c.checked_add(by).ok_or_else(overflow)?,
        None => {
            map.insert(key.to_vec(), by);
        }
    }
    Ok(())
}

fn overflow() -> Error {
    Error::InvalidParameter("coloring count overflows 128 bits".into())
}

fn merge_counts(mut a: Counts, b: Counts) -> Result<Counts> {
    if a.len() < b.len() {
        return merge_counts(b, a);
    }
    for (key, c) in b {
        bump(&mut a, &key, c)?;
    }
    Ok(a)
}

#[inline]
pub(crate) fn recolor(g: &Graph, k: usize, key: &mut [u32], colors: &[u8], v: usize, old: u8, new: u8) {
    key[old as usize] -= 1;
    key[new as usize] += 1;
    for &w in g.neighbors(v) {
        let cw = colors[w] as usize;
        key[pair_slot(k, old as usize, cw)] -= 1;
        key[pair_slot(k, new as usize, cw)] += 1;
    }
}

/// Key histogram of a single graph by direct enumeration, updating the key
/// incrementally as the odometer turns.
fn enumerate_keys(g: &Graph, k: usize) -> Result<Counts> {
    let n = g.n();
    let (fixed, chunks) = chunking(n, k);
    let free = n - fixed;
    let parts: Vec<Result<Counts>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut map = Counts::new();
            let mut colors = chunk_start(n, k, fixed, chunk);
            let mut key = key_of(g, &colors, k);
            'outer: loop {
                bump(&mut map, &key, 1)?;
                for v in 0..free {
                    let old = colors[v];
                    let new = if old as usize + 1 == k { 0 } else { old + 1 };
                    recolor(g, k, &mut key, &colors, v, old, new);
                    colors[v] = new;
                    if new != 0 {
                        continue 'outer;
                    }
                }
                break;
            }
            Ok(map)
        })
        .collect();
    let mut out = Counts::new();
    for p in parts {
        out = merge_counts(out, p?)?;
    }
    Ok(out)
}

fn convolve(a: &Counts, b: &Counts) -> Result<Counts> {
    let (a, b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let bs: Vec<(&Vec<u32>, &u128)> = b.iter().collect();
    let parts: Vec<Result<Counts>> = a
        .par_iter()
        .fold(
            || Ok(Counts::new()),
            |acc: Result<Counts>, (ka, &ca)| {
                let mut acc = acc?;
                let mut key = ka.clone();
                for (kb, &cb) in &bs {
                    for (t, (x, y)) in key.iter_mut().zip(ka.iter().zip(kb.iter())) {
                        *t = x + y;
                    }
                    bump(&mut acc, &key, ca.checked_mul(cb).ok_or_else(overflow)?)?;
                }
                Ok(acc)
            },
        )
        .collect();
    let mut out = Counts::new();
    for p in parts {
        out = merge_counts(out, p?)?;
    }
    Ok(out)
}

/// Colorings visited when enumerating each distinct component shape once.
pub fn factorized_work(g: &Graph, k: usize) -> Option<u128> {
    let mut shapes = std::collections::HashSet::new();
    let mut total: u128 = 0;
    for comp in g.components() {
        if shapes.insert(g.component_shape(&comp)) {
            total = total.checked_add(coloring_count(comp.len(), k)?)?;
        }
    }
    Some(total)
}

/// Exact histogram of count keys over all `k^n` colorings.
#[derive(Clone, Debug)]
pub struct CountHistogram {
    k: usize,
    n: usize,
    degree_bound: usize,
    counts: Counts,
}

impl CountHistogram {
    /// Enumerates per distinct component shape (charged against `budget`)
    /// and convolves.
    pub fn build(g: &Graph, k: usize, budget: u128) -> Result<Self> {
        check_k(k)?;
        if g.n() == 0 {
            return Err(Error::InvalidParameter("graph has no vertices".into()));
        }
        coloring_count(g.n(), k).ok_or_else(overflow)?;
        check_budget(factorized_work(g, k), budget)?;
        let mut shapes: Vec<(_, usize)> = Vec::new();
        for comp in g.components() {
            let shape = g.component_shape(&comp);
            match shapes.iter_mut().find(|(s, _)| *s == shape) {
                Some((_, m)) => *m += 1,
                None => shapes.push((shape, 1)),
            }
        }
        let mut acc: Option<Counts> = None;
        for ((size, edges), mult) in shapes {
            let comp = Graph::new(size, edges, g.degree_bound()).expect("component of a valid graph");
            let base = enumerate_keys(&comp, k)?;
            let powered = power(&base, mult)?;
            acc = Some(match acc {
                None => powered,
                Some(a) => convolve(&a, &powered)?,
            });
        }
        Ok(Self { k, n: g.n(), degree_bound: g.degree_bound(), counts: acc.expect("nonempty graph") })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Number of distinct quotients.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Sum of all counts; equals `k^n`.
    pub fn total(&self) -> u128 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], u128)> {
        self.counts.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    /// Entries sorted by key.
    pub fn sorted(&self) -> Vec<(&[u32], u128)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable();
        v
    }

    pub fn quotient(&self, key: &[u32]) -> Quotient {
        Quotient::from_key(self.k, self.n, key, self.degree_bound)
    }

    /// `(quotient, count)` pairs sorted by quotient.
    pub fn quotients(&self) -> Vec<(Quotient, u128)> {
        let mut v: Vec<_> = self.iter().map(|(key, c)| (self.quotient(key), c)).collect();
        v.sort_unstable();
        v
    }
}

fn power(base: &Counts, mult: usize) -> Result<Counts> {
    let mut result: Option<Counts> = None;
    let mut sq = base.clone();
    let mut m = mult;
    loop {
        if m & 1 == 1 {
            result = Some(match result {
                None => sq.clone(),
                Some(r) => convolve(&r, &sq)?,
            });
        }
        m >>= 1;
        if m == 0 {
            break;
        }
        sq = convolve(&sq, &sq)?;
    }
    Ok(result.expect("multiplicity is positive"))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Histogram by recomputing every key from scratch, no factorization.
    fn naive(g: &Graph, k: usize) -> Counts {
        fold_colorings(g.n(), k, DEFAULT_BUDGET, Counts::new, |m, c| bump(m, &key_of(g, c, k), 1).unwrap(), |a, b| merge_counts(a, b).unwrap()).unwrap()
    }

    #[test]
    fn pair_slots_are_a_bijection() {
        for k in 1..6 {
            let mut slots: Vec<usize> = (0..k).flat_map(|i| (i..k).map(move |j| pair_slot(k, i, j))).collect();
            slots.sort_unstable();
            assert_eq!(slots, (k..key_len(k)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn incremental_matches_naive() {
        let g = Graph::new(7, vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (5, 6), (4, 6)], 3).unwrap();
        for k in 1..=3 {
            let h = CountHistogram::build(&g, k, DEFAULT_BUDGET).unwrap();
            assert_eq!(h.counts, naive(&g, k));
            assert_eq!(h.total(), (k as u128).pow(7));
        }
    }

    #[test]
    fn factorized_union_matches_naive() {
        let c4 = Graph::cycle(4).unwrap();
        let k2 = Graph::complete(2);
        let g = Graph::disjoint_union(&[&c4, &k2, &c4, &Graph::empty(1), &k2, &k2]);
        let h = CountHistogram::build(&g, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(h.counts, naive(&g, 2));
        assert_eq!(factorized_work(&g, 2), Some(16 + 4 + 2));
    }

    #[test]
    fn budget_is_enforced() {
        let g = Graph::cycle(20).unwrap();
        assert!(matches!(CountHistogram::build(&g, 3, 1000), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(fold_colorings(20, 3, 1000, || (), |_, _| {}, |a, _| a), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn fold_visits_every_coloring_once() {
        let seen = fold_colorings(
            5,
            3,
            DEFAULT_BUDGET,
            Vec::new,
            |v: &mut Vec<u32>, c| v.push(c.iter().rev().fold(0u32, |a, &d| a * 3 + d as u32)),
            |mut a, b| {
                a.extend(b);
                a
            },
        )
        .unwrap();
        let mut sorted = seen.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..243).collect::<Vec<_>>());
    }
}
