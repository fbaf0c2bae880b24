use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Attempts before the configuration model gives up.
const MAX_ATTEMPTS: u64 = 100_000;

/// A named sequence of graphs. Size parameters left as `None` take the
/// realization index, so `Cycle { length: None }` is the sequence C_1, C_2, ...
/// (valid from index 3 on).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphFamily {
    DisjointCopies {
        base: Graph,
        count: Option<usize>,
    },
    Cycle {
        length: Option<usize>,
    },
    Path {
        length: Option<usize>,
    },
    /// Nearest-neighbor lattice on {-n, ..., n}^d.
    Lattice {
        d: usize,
        n: Option<usize>,
    },
    RandomRegular {
        n: Option<usize>,
        degree: usize,
        seed: u64,
    },
    /// Two sides of n/2 vertices, every vertex of degree `degree`.
    RandomBipartiteRegular {
        n: Option<usize>,
        degree: usize,
        seed: u64,
    },
    /// G(n, c/n); the degree bound is the observed maximum degree.
    ErdosRenyi {
        n: Option<usize>,
        c: f64,
        seed: u64,
    },
    Alternating {
        even: Box<GraphFamily>,
        odd: Box<GraphFamily>,
    },
}

impl GraphFamily {
    /// The graph at position `index`. Pure in `(self, index)`.
    pub fn realize(&self, index: usize) -> Result<Graph> {
        if index == 0 {
            return Err(Error::InvalidParameter("family index must be positive".into()));
        }
        let size = |s: &Option<usize>| s.unwrap_or(index);
        match self {
            GraphFamily::DisjointCopies { base, count } => Ok(base.copies(size(count))),
            GraphFamily::Cycle { length } => Graph::cycle(size(length)),
            GraphFamily::Path { length } => Graph::path(size(length)),
            GraphFamily::Lattice { d, n } => lattice(*d, size(n)),
            GraphFamily::RandomRegular { n, degree, seed } => random_regular(size(n), *degree, *seed, index),
            GraphFamily::RandomBipartiteRegular { n, degree, seed } => random_bipartite_regular(size(n), *degree, *seed, index),
            GraphFamily::ErdosRenyi { n, c, seed } => erdos_renyi(size(n), *c, *seed, index),
            GraphFamily::Alternating { even, odd } => {
                if index.is_multiple_of(2) {
                    even.realize(index)
                } else {
                    odd.realize(index)
                }
            }
        }
    }

    /// Nominal degree for regular families, if there is one.
    pub fn nominal_degree(&self) -> Option<usize> {
        match self {
            GraphFamily::Cycle { .. } => Some(2),
            GraphFamily::RandomRegular { degree, .. } | GraphFamily::RandomBipartiteRegular { degree, .. } => Some(*degree),
            _ => None,
        }
    }
}

/// `{-n..n}^d` with edges between points at ℓ1 distance one. Coordinates are
/// flattened in mixed radix `2n+1`, first coordinate fastest.
pub fn lattice(d: usize, n: usize) -> Result<Graph> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("lattice needs d, n >= 1, got d={d}, n={n}")));
    }
    let side = 2 * n + 1;
    let total = side.checked_pow(d as u32).filter(|&t| t <= 1 << 24).ok_or_else(|| Error::InvalidParameter(format!("lattice ({side})^{d} too large")))?;
    let mut edges = Vec::with_capacity(total * d);
    let mut stride = 1;
    for _ in 0..d {
        for v in 0..total {
            if (v / stride) % side + 1 < side {
                edges.push((v, v + stride));
            }
        }
        stride *= side;
    }
    Graph::new(total, edges, 2 * d)
}

fn check_regular(n: usize, degree: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("regular graph needs n >= 1".into()));
    }
    if !(n * degree).is_multiple_of(2) {
        return Err(Error::Parity { n, degree });
    }
    if degree >= n {
        return Err(Error::InvalidParameter(format!("degree {degree} impossible on {n} vertices")));
    }
    Ok(())
}

/// Configuration model with rejection of loops and repeated edges.
pub fn random_regular(n: usize, degree: usize, seed: u64, index: usize) -> Result<Graph> {
    check_regular(n, degree)?;
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    'attempt: for attempt in 0..MAX_ATTEMPTS {
        let mut rng = seeded(seed, &[0, index as u64, attempt]);
        stubs.shuffle(&mut rng);
        let mut seen = std::collections::HashSet::with_capacity(stubs.len() / 2);
        let mut edges = Vec::with_capacity(stubs.len() / 2);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        return Graph::new(n, edges, degree);
    }
    Err(Error::InvalidParameter(format!("no simple {degree}-regular graph on {n} vertices after {MAX_ATTEMPTS} attempts")))
}

/// Bipartite configuration model: left vertices `0..n/2`, right `n/2..n`.
pub fn random_bipartite_regular(n: usize, degree: usize, seed: u64, index: usize) -> Result<Graph> {
    if !n.is_multiple_of(2) {
        return Err(Error::Parity { n, degree });
    }
    let half = n / 2;
    if half == 0 || degree > half {
        return Err(Error::InvalidParameter(format!("bipartite degree {degree} impossible with sides of {half}")));
    }
    let mut right: Vec<usize> = (half..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    'attempt: for attempt in 0..MAX_ATTEMPTS {
        let mut rng = seeded(seed, &[1, index as u64, attempt]);
        right.shuffle(&mut rng);
        let mut seen = std::collections::HashSet::with_capacity(right.len());
        let mut edges = Vec::with_capacity(right.len());
        for (i, &v) in right.iter().enumerate() {
            let u = i / degree;
            if !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        return Graph::new(n, edges, degree);
    }
    Err(Error::InvalidParameter(format!("no simple bipartite {degree}-regular graph on {n} vertices")))
}

pub fn erdos_renyi(n: usize, c: f64, seed: u64, index: usize) -> Result<Graph> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::InvalidParameter(format!("Erdős–Rényi needs c >= 0, got {c}")));
    }
    let p = if n == 0 { 0.0 } else { (c / n as f64).min(1.0) };
    let mut rng = seeded(seed, &[2, index as u64]);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::with_observed_bound(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_shapes() {
        let c4 = GraphFamily::Cycle { length: Some(4) }.realize(17).unwrap();
        assert_eq!((c4.n(), c4.edge_count(), c4.max_degree()), (4, 4, 2));

        let l = GraphFamily::Lattice { d: 1, n: Some(2) }.realize(1).unwrap();
        assert_eq!((l.n(), l.edge_count()), (5, 4));
        assert!(l.is_connected());

        let k2 = Graph::complete(2);
        let u = GraphFamily::DisjointCopies { base: k2, count: Some(3) }.realize(1).unwrap();
        assert_eq!((u.n(), u.edge_count(), u.max_degree()), (6, 3, 1));
    }

    #[test]
    fn lattice_2d_edge_count() {
        // (2n+1)^2 grid: 2 * side * (side - 1) edges.
        let g = lattice(2, 2).unwrap();
        assert_eq!(g.n(), 25);
        assert_eq!(g.edge_count(), 2 * 5 * 4);
        assert_eq!(g.max_degree(), 4);
    }

    #[test]
    fn regular_families_are_regular_and_deterministic() {
        for degree in 1..=5 {
            let n = if degree % 2 == 1 { 20 } else { 15 };
            let fam = GraphFamily::RandomRegular { n: Some(n), degree, seed: 9 };
            let g = fam.realize(3).unwrap();
            assert!((0..n).all(|v| g.degree(v) == degree));
            assert_eq!(g, fam.realize(3).unwrap());
        }
        let b = GraphFamily::RandomBipartiteRegular { n: Some(16), degree: 3, seed: 1 }.realize(1).unwrap();
        assert!((0..16).all(|v| b.degree(v) == 3));
        assert!(b.edges().iter().all(|&(u, v)| u < 8 && v >= 8));
    }

    #[test]
    fn errors() {
        assert!(matches!(random_regular(5, 3, 0, 1), Err(Error::Parity { .. })));
        assert!(lattice(0, 3).is_err());
        assert!(lattice(2, 0).is_err());
        assert!(GraphFamily::Cycle { length: Some(2) }.realize(1).is_err());
    }

    #[test]
    fn alternating_dispatches_on_parity() {
        let fam = GraphFamily::Alternating { even: Box::new(GraphFamily::Cycle { length: None }), odd: Box::new(GraphFamily::Path { length: None }) };
        assert_eq!(fam.realize(6).unwrap().edge_count(), 6);
        assert_eq!(fam.realize(7).unwrap().edge_count(), 6);
    }

    #[test]
    fn erdos_renyi_bound_is_observed() {
        let g = erdos_renyi(200, 3.0, 5, 1).unwrap();
        assert_eq!(g.degree_bound(), g.max_degree());
    }
}
