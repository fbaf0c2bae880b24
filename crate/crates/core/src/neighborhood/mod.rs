//! Radius-`r` balls, their isomorphism classes, and the frequency vectors of
//! (colored) neighborhoods over all vertices of a graph.
//!
//! An uncolored graph is treated as 1-colored, so plain neighborhood
//! statistics are colored statistics of the monochrome coloring.

mod canon;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use canon::{canonical_key, decode_key, CANONICAL_LIMIT};

use crate::coloring::{Coloring, Method};
use crate::enumerate::fold_colorings;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rational::{format_q, parse_q, Q};

/// A rooted graph with zero-based vertex colors, every vertex within
/// `radius` of the root.
#[derive(Clone, Debug, PartialEq)]
pub struct RootedColoredGraph {
    pub graph: Graph,
    pub root: usize,
    pub colors: Vec<u8>,
    pub radius: usize,
}

impl RootedColoredGraph {
    pub fn canonical_key(&self) -> Result<Vec<u8>> {
        let adj: Vec<Vec<usize>> = (0..self.graph.n()).map(|v| self.graph.neighbors(v).to_vec()).collect();
        canonical_key(&adj, self.root, &self.colors)
    }

    /// Rebuilds the representative of a key, rooted at vertex 0.
    pub fn from_key(key: &[u8], radius: usize) -> Result<Self> {
        let (n, colors, edges) = decode_key(key)?;
        let graph = Graph::with_observed_bound(n, edges)?;
        Ok(Self { graph, root: 0, colors: colors.iter().map(|c| c.saturating_sub(1)).collect(), radius })
    }
}

/// Vertices within distance `r` of `u`, in BFS order starting at `u`.
fn ball_vertices(g: &Graph, u: usize, r: usize) -> Vec<usize> {
    let mut dist = HashMap::from([(u, 0usize)]);
    let mut order = vec![u];
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        let d = dist[&v];
        if d == r {
            continue;
        }
        for &w in g.neighbors(v) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                e.insert(d + 1);
                order.push(w);
            }
        }
    }
    order
}

fn check_vertex(g: &Graph, u: usize) -> Result<()> {
    if u >= g.n() {
        return Err(Error::VertexOutOfRange { vertex: u, n: g.n() });
    }
    Ok(())
}

/// The induced ball `B(u, r)`, rooted at `u` (vertex 0 of the result).
pub fn ball(g: &Graph, u: usize, r: usize) -> Result<RootedColoredGraph> {
    check_vertex(g, u)?;
    let vs = ball_vertices(g, u, r);
    Ok(RootedColoredGraph { colors: vec![0; vs.len()], graph: g.induced(&vs), root: 0, radius: r })
}

/// The ball `B(u, r)` carrying the colors of `sigma`.
pub fn colored_ball(g: &Graph, sigma: &Coloring, u: usize, r: usize) -> Result<RootedColoredGraph> {
    check_vertex(g, u)?;
    sigma.check_len(g.n())?;
    let vs = ball_vertices(g, u, r);
    Ok(RootedColoredGraph { colors: vs.iter().map(|&v| sigma.colors()[v]).collect(), graph: g.induced(&vs), root: 0, radius: r })
}

/// Most vertices a radius-`r` ball can have at maximum degree `d`.
pub fn ball_size_bound(d: usize, r: usize) -> usize {
    match d {
        0 => 1,
        1 => 1 + usize::from(r >= 1),
        2 => 1 + 2 * r,
        _ => 1 + d * ((d - 1).pow(r as u32) - 1) / (d - 2),
    }
}

/// Fractions of vertices whose colored `r`-ball falls in each class.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrequencyVector {
    pub m: usize,
    pub r: usize,
    pub entries: BTreeMap<Vec<u8>, Q>,
}

#[derive(Serialize, Deserialize)]
struct FrequencyWire {
    m: usize,
    r: usize,
    entries: BTreeMap<String, String>,
}

impl Serialize for FrequencyVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FrequencyWire { m: self.m, r: self.r, entries: self.entries.iter().map(|(k, v)| (hex::encode(k), format_q(v))).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FrequencyVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = FrequencyWire::deserialize(d)?;
        let entries = w
            .entries
            .into_iter()
            .map(|(k, v)| Ok((hex::decode(&k).map_err(D::Error::custom)?, parse_q(&v).map_err(D::Error::custom)?)))
            .collect::<std::result::Result<_, D::Error>>()?;
        Ok(Self { m: w.m, r: w.r, entries })
    }
}

/// One row of the decoding table shipped next to a frequency vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodedClass {
    pub n: usize,
    pub root: usize,
    /// One-based colors by vertex.
    pub colors: Vec<u8>,
    pub edges: Vec<(usize, usize)>,
}

impl FrequencyVector {
    fn from_counts(m: usize, r: usize, n: usize, counts: HashMap<Vec<u8>, i64>) -> Self {
        Self { m, r, entries: counts.into_iter().map(|(k, c)| (k, Q::new(c, n as i64))).collect() }
    }

    pub fn total(&self) -> Q {
        self.entries.values().sum()
    }

    pub fn get(&self, key: &[u8]) -> Q {
        self.entries.get(key).copied().unwrap_or_default()
    }

    /// Drops colors and re-aggregates by uncolored class.
    pub fn forget_colors(&self) -> Result<Self> {
        let mut entries: BTreeMap<Vec<u8>, Q> = BTreeMap::new();
        for (key, f) in &self.entries {
            let (n, _, edges) = decode_key(key)?;
            let mut adj = vec![Vec::new(); n];
            for &(u, v) in &edges {
                adj[u].push(v);
                adj[v].push(u);
            }
            *entries.entry(canonical_key(&adj, 0, &vec![1; n])?).or_default() += f;
        }
        Ok(Self { m: 1, r: self.r, entries })
    }

    /// Hex key to representative graph, for reading keys back.
    pub fn decode_table(&self) -> Result<BTreeMap<String, DecodedClass>> {
        self.entries
            .keys()
            .map(|k| {
                let (n, colors, edges) = decode_key(k)?;
                Ok((hex::encode(k), DecodedClass { n, root: 0, colors, edges }))
            })
            .collect()
    }

    /// ℓ∞ distance over the union of keys, absent keys counting as zero.
    pub fn distance(&self, other: &Self) -> Q {
        let keys: BTreeSet<&Vec<u8>> = self.entries.keys().chain(other.entries.keys()).collect();
        keys.into_iter()
            .map(|k| {
                let d = self.get(k) - other.get(k);
                if d < Q::default() {
                    -d
                } else {
                    d
                }
            })
            .max()
            .unwrap_or_default()
    }
}

/// A graph's `r`-balls as local adjacency lists (root at 0) with the
/// original vertex of each ball position.
struct Balls {
    vertices: Vec<Vec<usize>>,
    adj: Vec<Vec<Vec<usize>>>,
}

impl Balls {
    fn new(g: &Graph, r: usize) -> Result<Self> {
        let vertices: Vec<Vec<usize>> = (0..g.n()).map(|u| ball_vertices(g, u, r)).collect();
        if let Some(big) = vertices.iter().find(|v| v.len() > CANONICAL_LIMIT) {
            return Err(Error::ExactSearchInfeasible { what: "neighborhood ball", size: big.len(), limit: CANONICAL_LIMIT });
        }
        let adj = vertices
            .iter()
            .map(|vs| {
                let sub = g.induced(vs);
                (0..sub.n()).map(|v| sub.neighbors(v).to_vec()).collect()
            })
            .collect();
        Ok(Self { vertices, adj })
    }

    /// Colors of ball `u` as stored in keys (one-based).
    fn local_colors(&self, u: usize, colors: &[u8]) -> Vec<u8> {
        self.vertices[u].iter().map(|&v| colors[v] + 1).collect()
    }

    fn vector(&self, m: usize, r: usize, colors: &[u8], cache: &mut HashMap<(usize, Vec<u8>), Vec<u8>>) -> Result<FrequencyVector> {
        let n = self.vertices.len();
        let mut counts: HashMap<Vec<u8>, i64> = HashMap::new();
        for u in 0..n {
            let lc = self.local_colors(u, colors);
            let key = match cache.get(&(u, lc.clone())) {
                Some(k) => k.clone(),
                None => {
                    let k = canonical_key(&self.adj[u], 0, &lc)?;
                    cache.insert((u, lc), k.clone());
                    k
                }
            };
            *counts.entry(key).or_insert(0) += 1;
        }
        Ok(FrequencyVector::from_counts(m, r, n, counts))
    }
}

fn check_nonempty(g: &Graph) -> Result<()> {
    if g.n() == 0 {
        return Err(Error::InvalidParameter("graph has no vertices".into()));
    }
    Ok(())
}

/// Exact frequencies of uncolored `r`-ball classes over all vertices.
pub fn bs_frequencies(g: &Graph, r: usize) -> Result<FrequencyVector> {
    colored_frequencies(g, &Coloring::monochrome(g.n(), 1)?, r)
}

/// Exact frequencies of colored `r`-ball classes under `sigma`.
pub fn colored_frequencies(g: &Graph, sigma: &Coloring, r: usize) -> Result<FrequencyVector> {
    check_nonempty(g)?;
    sigma.check_len(g.n())?;
    let balls = Balls::new(g, r)?;
    let keys: Vec<Vec<u8>> =
        (0..g.n()).into_par_iter().map(|u| canonical_key(&balls.adj[u], 0, &balls.local_colors(u, sigma.colors()))).collect::<Result<_>>()?;
    let mut counts: HashMap<Vec<u8>, i64> = HashMap::new();
    for k in keys {
        *counts.entry(k).or_insert(0) += 1;
    }
    Ok(FrequencyVector::from_counts(sigma.k(), r, g.n(), counts))
}

/// The set of colored frequency vectors over colorings with `m` colors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencySet {
    pub m: usize,
    pub r: usize,
    pub method: Method,
    pub vectors: BTreeSet<FrequencyVector>,
}

/// All (or sampled) colored frequency vectors of `g`.
pub fn colored_frequency_set(g: &Graph, m: usize, r: usize, method: Method, budget: u128) -> Result<FrequencySet> {
    check_nonempty(g)?;
    crate::coloring::check_k(m)?;
    let balls = Balls::new(g, r)?;
    type Acc = (Result<BTreeSet<FrequencyVector>>, HashMap<(usize, Vec<u8>), Vec<u8>>);
    let vectors = match method {
        Method::Exact => {
            let (set, _) = fold_colorings(
                g.n(),
                m,
                budget,
                || -> Acc { (Ok(BTreeSet::new()), HashMap::new()) },
                |(set, cache), c| {
                    if let Ok(s) = set {
                        match balls.vector(m, r, c, cache) {
                            Ok(v) => {
                                s.insert(v);
                            }
                            Err(e) => *set = Err(e),
                        }
                    }
                },
                |(a, ca), (b, _)| {
                    let merged = match (a, b) {
                        (Ok(mut a), Ok(b)) => {
                            a.extend(b);
                            Ok(a)
                        }
                        (Err(e), _) | (_, Err(e)) => Err(e),
                    };
                    (merged, ca)
                },
            )?;
            set?
        }
        Method::Sampled { budget: samples, seed } => {
            let mut rng = crate::rng::seeded(seed, &[7]);
            let mut cache = HashMap::new();
            let mut set = BTreeSet::new();
            let mut colors = vec![0u8; g.n()];
            for _ in 0..samples {
                for c in colors.iter_mut() {
                    *c = rng.random_range(0..m as u8);
                }
                set.insert(balls.vector(m, r, &colors, &mut cache)?);
            }
            set
        }
    };
    Ok(FrequencySet { m, r, method, vectors })
}

/// Hausdorff distance between two sets of frequency vectors.
pub fn frequency_set_distance(a: &FrequencySet, b: &FrequencySet) -> Result<Q> {
    if a.vectors.is_empty() || b.vectors.is_empty() {
        return Err(Error::EmptySet);
    }
    let directed = |x: &FrequencySet, y: &FrequencySet| {
        x.vectors.par_iter().map(|p| y.vectors.iter().map(|q| p.distance(q)).min().unwrap_or_default()).max().unwrap_or_default()
    };
    Ok(directed(a, b).max(directed(b, a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::lattice;
    use crate::rational::q;

    #[test]
    fn balls() {
        let g = Graph::cycle(8).unwrap();
        assert_eq!(ball(&g, 3, 0).unwrap().graph.n(), 1);
        let b = ball(&g, 3, 1).unwrap();
        assert_eq!(b.graph.n(), 3);
        assert_eq!(b.graph.degree(b.root), 2);
        let grid = lattice(2, 5).unwrap();
        let center = 2 + 5 * 2;
        let s = ball(&grid, center, 1).unwrap();
        assert_eq!(s.graph.n(), 5);
        assert_eq!(s.graph.degree(0), 4);
        assert!(ball(&g, 8, 1).is_err());
    }

    #[test]
    fn uncolored_frequencies() {
        let f = bs_frequencies(&Graph::cycle(10).unwrap(), 3).unwrap();
        assert_eq!(f.entries.len(), 1);
        assert_eq!(f.total(), q(1, 1));
        let iso = bs_frequencies(&Graph::empty(7), 2).unwrap();
        assert_eq!(iso.entries.values().collect::<Vec<_>>(), vec![&q(1, 1)]);
        let c4 = bs_frequencies(&Graph::cycle(4).unwrap().copies(3), 2).unwrap();
        let c6 = bs_frequencies(&Graph::cycle(6).unwrap().copies(2), 2).unwrap();
        assert!(c4.entries.keys().collect::<BTreeSet<_>>().is_disjoint(&c6.entries.keys().collect()));
        assert_eq!(c4.distance(&c6), q(1, 1));
    }

    #[test]
    fn colored_examples() {
        let c4 = Graph::cycle(4).unwrap();
        let proper = Coloring::new(vec![0, 1, 0, 1], 2).unwrap();
        let f = colored_frequencies(&c4, &proper, 1).unwrap();
        assert_eq!(f.entries.len(), 2);
        assert!(f.entries.values().all(|v| *v == q(1, 2)));
        assert_eq!(f.forget_colors().unwrap(), bs_frequencies(&c4, 1).unwrap());
        let mono = colored_frequencies(&c4, &Coloring::monochrome(4, 1).unwrap(), 1).unwrap();
        assert_eq!(mono, bs_frequencies(&c4, 1).unwrap());
        let table = f.decode_table().unwrap();
        assert!(table.values().all(|d| d.n == 3 && d.edges.len() == 2));
    }

    #[test]
    fn frequency_sets() {
        let one = colored_frequency_set(&Graph::empty(1), 2, 0, Method::Exact, 1 << 20).unwrap();
        assert_eq!(one.vectors.len(), 2);
        let k2 = colored_frequency_set(&Graph::complete(2), 2, 1, Method::Exact, 1 << 20).unwrap();
        assert_eq!(k2.vectors.len(), 3);
        let g = Graph::cycle(7).unwrap();
        let exact = colored_frequency_set(&g, 2, 1, Method::Exact, 1 << 20).unwrap();
        let sampled = colored_frequency_set(&g, 2, 1, Method::Sampled { budget: 50, seed: 1 }, 1 << 20).unwrap();
        assert!(sampled.vectors.is_subset(&exact.vectors));
        assert_eq!(frequency_set_distance(&exact, &exact).unwrap(), q(0, 1));
    }

    #[test]
    fn json_round_trip() {
        let f = colored_frequencies(&Graph::path(5).unwrap(), &Coloring::new(vec![0, 1, 1, 0, 1], 2).unwrap(), 1).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<FrequencyVector>(&s).unwrap(), f);
    }
}
