//! Canonical keys for small rooted colored graphs by individualization and
//! refinement. Twins (same cell, same neighbors apart from each other) are
//! swapped by an automorphism, so only one of them is individualized.

use crate::error::{Error, Result};

/// Largest graph the search accepts.
pub const CANONICAL_LIMIT: usize = 16;

fn rank(sigs: &[(usize, Vec<usize>)]) -> Vec<usize> {
    let mut sorted: Vec<&(usize, Vec<usize>)> = sigs.iter().collect();
    sorted.sort();
    sorted.dedup();
    sigs.iter().map(|s| sorted.binary_search(&s).expect("signature present")).collect()
}

fn distinct(cells: &[usize]) -> usize {
    cells.iter().copied().max().map_or(0, |m| m + 1)
}

fn refine(adj: &[Vec<usize>], cells: &mut Vec<usize>) {
    loop {
        let before = distinct(cells);
        let sigs: Vec<(usize, Vec<usize>)> = (0..adj.len())
            .map(|v| {
                let mut nb: Vec<usize> = adj[v].iter().map(|&w| cells[w]).collect();
                nb.sort_unstable();
                (cells[v], nb)
            })
            .collect();
        *cells = rank(&sigs);
        if distinct(cells) == before {
            return;
        }
    }
}

fn twins(adj: &[Vec<usize>], a: usize, b: usize) -> bool {
    let strip = |v: usize, other: usize| {
        let mut s: Vec<usize> = adj[v].iter().copied().filter(|&w| w != other).collect();
        s.sort_unstable();
        s
    };
    strip(a, b) == strip(b, a)
}

/// Byte encoding of the graph under `order` (position → vertex):
/// vertex count, colors by position, then the upper adjacency triangle.
fn encode(adj: &[Vec<usize>], colors: &[u8], order: &[usize]) -> Vec<u8> {
    let n = order.len();
    let mut out = Vec::with_capacity(1 + n + n * n / 16 + 1);
    out.push(n as u8);
    out.extend(order.iter().map(|&v| colors[v]));
    let mut pos = vec![0; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let mut bits = vec![false; n * (n.saturating_sub(1)) / 2];
    let tri = |i: usize, j: usize| i * (2 * n - i - 1) / 2 + (j - i - 1);
    for v in 0..n {
        for &w in &adj[v] {
            let (i, j) = (pos[v].min(pos[w]), pos[v].max(pos[w]));
            bits[tri(i, j)] = true;
        }
    }
    for chunk in bits.chunks(8) {
        out.push(chunk.iter().enumerate().fold(0u8, |b, (i, &x)| b | (u8::from(x) << (7 - i))));
    }
    out
}

fn search(adj: &[Vec<usize>], colors: &[u8], mut cells: Vec<usize>, best: &mut Option<Vec<u8>>) {
    refine(adj, &mut cells);
    let n = adj.len();
    if distinct(&cells) == n {
        let mut order = vec![0; n];
        for (v, &c) in cells.iter().enumerate() {
            order[c] = v;
        }
        let enc = encode(adj, colors, &order);
        if best.as_ref().is_none_or(|b| enc < *b) {
            *best = Some(enc);
        }
        return;
    }
    let mut size = vec![0usize; distinct(&cells)];
    for &c in &cells {
        size[c] += 1;
    }
    let target = size.iter().position(|&s| s > 1).expect("some cell is not a singleton");
    let members: Vec<usize> = (0..n).filter(|&v| cells[v] == target).collect();
    let mut reps: Vec<usize> = Vec::new();
    for &v in &members {
        if reps.iter().any(|&r| twins(adj, r, v)) {
            continue;
        }
        reps.push(v);
        let sigs: Vec<(usize, Vec<usize>)> = (0..n).map(|u| (2 * cells[u] + usize::from(u != v), Vec::new())).collect();
        search(adj, colors, rank(&sigs), best);
    }
}

/// Minimal encoding over all vertex orders that put `root` first and are
/// consistent with color and distance refinement. Equal keys iff there is
/// an isomorphism preserving root and colors.
pub fn canonical_key(adj: &[Vec<usize>], root: usize, colors: &[u8]) -> Result<Vec<u8>> {
    let n = adj.len();
    if n > CANONICAL_LIMIT {
        return Err(Error::ExactSearchInfeasible { what: "canonical labeling", size: n, limit: CANONICAL_LIMIT });
    }
    if root >= n || colors.len() != n {
        return Err(Error::InvalidParameter("root or colors do not fit the graph".into()));
    }
    let mut dist = vec![usize::MAX; n];
    dist[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    let sigs: Vec<(usize, Vec<usize>)> = (0..n).map(|v| (usize::from(v != root), vec![colors[v] as usize, dist[v]])).collect();
    let mut best = None;
    search(adj, colors, rank(&sigs), &mut best);
    Ok(best.expect("search reaches a leaf"))
}

/// Vertex count, colors and edges of a decoded key; the root is vertex 0.
pub type DecodedKey = (usize, Vec<u8>, Vec<(usize, usize)>);

/// Inverse of the encoding.
pub fn decode_key(key: &[u8]) -> Result<DecodedKey> {
    let bad = || Error::Parse("malformed neighborhood key".into());
    let n = *key.first().ok_or_else(bad)? as usize;
    let pairs = n * n.saturating_sub(1) / 2;
    if key.len() != 1 + n + pairs.div_ceil(8) {
        return Err(bad());
    }
    let colors = key[1..=n].to_vec();
    let bits = &key[1 + n..];
    let mut edges = Vec::new();
    let mut t = 0;
    for i in 0..n {
        for j in i + 1..n {
            if bits[t / 8] >> (7 - t % 8) & 1 == 1 {
                edges.push((i, j));
            }
            t += 1;
        }
    }
    Ok((n, colors, edges))
}
