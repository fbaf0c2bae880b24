use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rational::Q;

/// Number of homomorphisms `F → G` by rooted backtracking: anchor the first
/// vertex of `F` at each vertex of `G`, then extend along a BFS order so
/// every later vertex only tries neighbors of its parent's image.
pub fn pattern_hom_count(f: &Graph, g: &Graph) -> Result<u128> {
    if f.n() == 0 || !f.is_connected() {
        return Err(Error::InvalidParameter("pattern graph must be nonempty and connected".into()));
    }
    let mut order = vec![0usize];
    let mut parent = vec![usize::MAX; f.n()];
    let mut seen = vec![false; f.n()];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        i += 1;
        for &w in f.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                parent[w] = u;
                order.push(w);
            }
        }
    }
    let mut pos = vec![0; f.n()];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    // For each position, the earlier neighbors whose images must be adjacent.
    let back: Vec<Vec<usize>> = order.iter().map(|&v| f.neighbors(v).iter().copied().filter(|&w| pos[w] < pos[v] && w != parent[v]).collect()).collect();

    fn extend(f_order: &[usize], parent: &[usize], back: &[Vec<usize>], g: &Graph, image: &mut [usize], depth: usize) -> u128 {
        if depth == f_order.len() {
            return 1;
        }
        let v = f_order[depth];
        let mut total = 0;
        for &c in g.neighbors(image[parent[v]]) {
            if back[depth].iter().all(|&w| g.has_edge(image[w], c)) {
                image[v] = c;
                total += extend(f_order, parent, back, g, image, depth + 1);
            }
        }
        total
    }

    Ok((0..g.n())
        .into_par_iter()
        .map(|root| {
            let mut image = vec![0; f.n()];
            image[order[0]] = root;
            extend(&order, &parent, &back, g, &mut image, 1)
        })
        .sum())
}

/// `hom(F, G) / |V(G)|` as an exact fraction.
pub fn hom_density_from(f: &Graph, g: &Graph) -> Result<Q> {
    if g.n() == 0 {
        return Err(Error::InvalidParameter("density into the empty graph".into()));
    }
    let count = pattern_hom_count(f, g)?;
    let num = i64::try_from(count).map_err(|_| Error::InvalidParameter("homomorphism count exceeds 64 bits".into()))?;
    Ok(Q::new(num, g.n() as i64))
}
