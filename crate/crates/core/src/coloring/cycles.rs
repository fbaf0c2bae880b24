use super::{check_k, Coloring, Quotient};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Vertices of each component in cycle order, if `g` is a disjoint union of
/// cycles of one common even length.
fn even_cycles(g: &Graph) -> Result<Vec<Vec<usize>>> {
    let comps = g.components();
    let len = comps.first().map(Vec::len).ok_or(Error::NotCycleUnion)?;
    if len < 4 || len % 2 != 0 || (0..g.n()).any(|v| g.degree(v) != 2) || comps.iter().any(|c| c.len() != len) {
        return Err(Error::NotCycleUnion);
    }
    Ok(comps
        .iter()
        .map(|c| {
            let mut order = vec![c[0]];
            let mut prev = c[0];
            let mut cur = g.neighbors(c[0])[0];
            while cur != c[0] {
                order.push(cur);
                let nb = g.neighbors(cur);
                let next = if nb[0] == prev { nb[1] } else { nb[0] };
                prev = cur;
                cur = next;
            }
            order
        })
        .collect())
}

/// Colors a union of `n` equal even cycles so that its quotient is within
/// ℓ∞ distance `k/n` of `target`.
///
/// Each cycle is either monochrome in color `i` (adding `1/n` to `x_i` and
/// `2/n` to `X_ii`) or alternates `i, j` (adding `1/(2n)` to `x_i` and `x_j`
/// and `1/n` to `X_ij`). The target fixes the ideal number of cycles of each
/// type; these are rounded by largest remainder so they sum to `n`.
pub fn achievable_coloring_c4c6(target: &Quotient, g: &Graph) -> Result<Coloring> {
    let k = target.k();
    check_k(k)?;
    for i in 0..k {
        if target.row_sum(i) != target.x()[i] * 2 {
            return Err(Error::TargetOutsideConstraints(format!("row {} of X does not sum to 2 x_{}", i + 1, i + 1)));
        }
    }
    let cycles = even_cycles(g)?;
    let n = cycles.len() as i64;

    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i..k {
            let ideal = if i == j { target.xx(i, i) * n / 2 } else { target.xx(i, j) * n };
            pairs.push((i, j, ideal));
        }
    }
    let mut counts: Vec<i64> = pairs.iter().map(|p| p.2.floor().to_integer()).collect();
    let deficit = n - counts.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| (pairs[b].2.fract()).cmp(&pairs[a].2.fract()).then(a.cmp(&b)));
    for &t in order.iter().take(deficit.max(0) as usize) {
        counts[t] += 1;
    }

    let mut colors = vec![0u8; g.n()];
    let mut next = cycles.iter();
    for (&(i, j, _), &c) in pairs.iter().zip(&counts) {
        for _ in 0..c {
            let cyc = next.next().expect("rounded counts sum to the number of cycles");
            for (pos, &v) in cyc.iter().enumerate() {
                colors[v] = if pos % 2 == 0 { i as u8 } else { j as u8 };
            }
        }
    }
    Coloring::new(colors, k)
}
