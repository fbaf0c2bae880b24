//! Colorings, k-quotients and partition sets.
//!
//! A k-coloring `σ: V → [k]` collapses a graph onto a weighted graph on `k`
//! nodes: node `i` carries the fraction `x_i` of vertices colored `i`, and
//! the pair `(i, j)` carries `X_ij`, the number of ordered adjacent pairs
//! `(u, v)` with `σ(u) = i`, `σ(v) = j`, divided by `|V|`.
//!
//! ```
//! use sparse_ld::{coloring::{quotient, Coloring}, rational::q, Graph};
//!
//! let g = Graph::new(4, vec![(0, 1), (0, 2), (1, 2), (2, 3)], 3)?;
//! let sigma = Coloring::from_one_based(&[1, 1, 2, 2], 2)?;
//! let qt = quotient(&g, &sigma)?;
//! assert_eq!(qt.x(), &[q(1, 2), q(1, 2)]);
//! assert_eq!(qt.xx(0, 1), q(1, 2));
//! # Ok::<(), sparse_ld::Error>(())
//! ```

mod cycles;
mod partition;
mod quotient;

pub use cycles::achievable_coloring_c4c6;
pub use partition::{partition_set, point_set_distance, set_distance, Method, QuotientSet, ScaledSet};
pub use quotient::{quotient, Quotient};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported color count.
pub const MAX_COLORS: usize = 64;

/// A vertex coloring with colors stored zero-based; the wire format and the
/// `*_one_based` helpers use `1..=k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ColoringWire", into = "ColoringWire")]
pub struct Coloring {
    colors: Vec<u8>,
    k: usize,
}

#[derive(Serialize, Deserialize)]
struct ColoringWire {
    k: usize,
    colors: Vec<usize>,
}

impl TryFrom<ColoringWire> for Coloring {
    type Error = Error;
    fn try_from(w: ColoringWire) -> Result<Self> {
        Coloring::from_one_based(&w.colors, w.k)
    }
}

impl From<Coloring> for ColoringWire {
    fn from(c: Coloring) -> Self {
        ColoringWire { k: c.k, colors: c.to_one_based() }
    }
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    if k == 0 || k > MAX_COLORS {
        return Err(Error::InvalidParameter(format!("color count must be in 1..={MAX_COLORS}, got {k}")));
    }
    Ok(())
}

impl Coloring {
    /// Zero-based colors.
    pub fn new(colors: Vec<u8>, k: usize) -> Result<Self> {
        check_k(k)?;
        if let Some((vertex, &c)) = colors.iter().enumerate().find(|(_, &c)| c as usize >= k) {
            return Err(Error::ColorOutOfRange { vertex, color: c as usize + 1, k });
        }
        Ok(Self { colors, k })
    }

    pub fn from_one_based(colors: &[usize], k: usize) -> Result<Self> {
        check_k(k)?;
        let mut out = Vec::with_capacity(colors.len());
        for (vertex, &c) in colors.iter().enumerate() {
            if c == 0 || c > k {
                return Err(Error::ColorOutOfRange { vertex, color: c, k });
            }
            out.push((c - 1) as u8);
        }
        Ok(Self { colors: out, k })
    }

    pub fn monochrome(n: usize, k: usize) -> Result<Self> {
        Self::new(vec![0; n], k)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.colors.iter().map(|&c| c as usize + 1).collect()
    }

    /// Zero-based colors.
    pub fn colors(&self) -> &[u8] {
        &self.colors
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Relabels colors: vertex colored `c` gets `perm[c]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Self::new(self.colors.iter().map(|&c| perm[c as usize] as u8).collect(), self.k)
    }

    /// Concatenation, matching [`crate::Graph::disjoint_union`].
    pub fn concat(&self, other: &Coloring) -> Result<Self> {
        if self.k != other.k {
            return Err(Error::ResolutionMismatch(self.k, other.k));
        }
        Self::new([self.colors.as_slice(), other.colors.as_slice()].concat(), self.k)
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.colors.len() != n {
            return Err(Error::ColoringLength { got: self.colors.len(), expected: n });
        }
        Ok(())
    }
}
