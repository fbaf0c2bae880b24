use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{check_k, Coloring};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rational::{format_q, parse_q, Q};

/// A point `(x, X)` of the quotient space: `k` node weights and a symmetric
/// `k × k` matrix of edge weights, all exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "QuotientWire", into = "QuotientWire")]
pub struct Quotient {
    k: usize,
    x: Vec<Q>,
    xx: Vec<Q>,
    degree_bound: usize,
}

#[derive(Serialize, Deserialize)]
struct QuotientWire {
    k: usize,
    x: Vec<String>,
    #[serde(rename = "X")]
    xx: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree_bound: Option<usize>,
}

impl TryFrom<QuotientWire> for Quotient {
    type Error = Error;
    fn try_from(w: QuotientWire) -> Result<Self> {
        let x = w.x.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>()?;
        let xx = w.xx.iter().map(|row| row.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
        if x.len() != w.k {
            return Err(Error::Parse(format!("k = {} but x has {} entries", w.k, x.len())));
        }
        let bound = match w.degree_bound {
            Some(d) => d,
            None => {
                let total: Q = xx.iter().flatten().sum();
                total.ceil().to_integer().max(0) as usize
            }
        };
        Quotient::new(x, xx, bound)
    }
}

impl From<Quotient> for QuotientWire {
    fn from(q: Quotient) -> Self {
        QuotientWire {
            k: q.k,
            x: q.x.iter().map(format_q).collect(),
            xx: (0..q.k).map(|i| (0..q.k).map(|j| format_q(&q.xx(i, j))).collect()).collect(),
            degree_bound: Some(q.degree_bound),
        }
    }
}

impl Quotient {
    /// Validates a point of the quotient space: `x` a probability vector,
    /// `X` square, symmetric and nonnegative. `X` may exceed the degree
    /// bound; such points are simply unachievable.
    pub fn new(x: Vec<Q>, xx: Vec<Vec<Q>>, degree_bound: usize) -> Result<Self> {
        let k = x.len();
        check_k(k)?;
        let bad = |m: &str| Err(Error::InvalidParameter(format!("quotient: {m}")));
        if xx.len() != k || xx.iter().any(|r| r.len() != k) {
            return bad("X must be k x k");
        }
        if x.iter().any(Q::is_negative) || xx.iter().flatten().any(Q::is_negative) {
            return bad("entries must be nonnegative");
        }
        if x.iter().sum::<Q>() != Q::from_integer(1) {
            return bad("x must sum to 1");
        }
        for i in 0..k {
            for j in 0..i {
                if xx[i][j] != xx[j][i] {
                    return bad("X must be symmetric");
                }
            }
        }
        Ok(Self { k, x, xx: xx.into_iter().flatten().collect(), degree_bound })
    }

    /// From a count key: `k` color counts followed by edge counts `e_ij`,
    /// `i <= j`, in row-major upper-triangular order.
    pub(crate) fn from_key(k: usize, n: usize, key: &[u32], degree_bound: usize) -> Self {
        let n = n as i64;
        let x = key[..k].iter().map(|&c| Q::new(c as i64, n)).collect();
        let mut xx = vec![Q::zero(); k * k];
        let mut t = k;
        for i in 0..k {
            for j in i..k {
                let e = key[t] as i64;
                t += 1;
                if i == j {
                    xx[i * k + i] = Q::new(2 * e, n);
                } else {
                    xx[i * k + j] = Q::new(e, n);
                    xx[j * k + i] = Q::new(e, n);
                }
            }
        }
        Self { k, x, xx, degree_bound }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn x(&self) -> &[Q] {
        &self.x
    }

    pub fn xx(&self, i: usize, j: usize) -> Q {
        self.xx[i * self.k + j]
    }

    /// `X` in row-major order.
    pub fn xx_flat(&self) -> &[Q] {
        &self.xx
    }

    pub fn xx_rows(&self) -> Vec<Vec<Q>> {
        self.xx.chunks(self.k).map(<[Q]>::to_vec).collect()
    }

    /// `x` followed by the rows of `X`: the `(k+1) × k` flattening.
    pub fn flatten(&self) -> Vec<Q> {
        self.x.iter().chain(&self.xx).copied().collect()
    }

    /// Total edge weight `Σ X_ij = 2|E|/|V|` for achieved points.
    pub fn edge_mass(&self) -> Q {
        self.xx.iter().sum()
    }

    pub fn row_sum(&self, i: usize) -> Q {
        self.xx[i * self.k..(i + 1) * self.k].iter().sum()
    }

    /// ℓ∞ distance over the `(k+1) × k` flattening.
    pub fn linf(&self, other: &Quotient) -> Result<Q> {
        if self.k != other.k {
            return Err(Error::ResolutionMismatch(self.k, other.k));
        }
        Ok(self.flatten().iter().zip(other.flatten()).map(|(a, b)| (a - b).abs()).max().unwrap_or_default())
    }

    /// Relabels parts: part `i` becomes part `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let k = self.k;
        let mut x = vec![Q::zero(); k];
        let mut xx = vec![Q::zero(); k * k];
        for i in 0..k {
            x[perm[i]] = self.x[i];
            for j in 0..k {
                xx[perm[i] * k + perm[j]] = self.xx[i * k + j];
            }
        }
        Self { k, x, xx, degree_bound: self.degree_bound }
    }

    pub fn with_degree_bound(mut self, d: usize) -> Self {
        self.degree_bound = d;
        self
    }
}

/// The quotient `G/σ`, computed exactly.
pub fn quotient(g: &Graph, sigma: &Coloring) -> Result<Quotient> {
    sigma.check_len(g.n())?;
    if g.n() == 0 {
        return Err(Error::InvalidParameter("quotient of the empty graph is undefined".into()));
    }
    let key = crate::enumerate::key_of(g, sigma.colors(), sigma.k());
    Ok(Quotient::from_key(sigma.k(), g.n(), &key, g.degree_bound()))
}
