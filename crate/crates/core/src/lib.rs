//! Colorings, quotients and large-deviation statistics for sequences of
//! bounded-degree graphs.
//!
//! A `k`-coloring of a graph is summarized by its [`coloring::Quotient`]:
//! the share of each color and the edge density between each pair of
//! colors. The crate enumerates or samples those quotients, counts how many
//! colorings fall near a target, and relates the counts to weighted
//! homomorphism numbers and to local neighborhood statistics.
//!
//! ```
//! use sparse_ld::coloring::{partition_set, Method};
//! use sparse_ld::enumerate::DEFAULT_BUDGET;
//! use sparse_ld::Graph;
//!
//! let c4 = Graph::cycle(4)?;
//! let set = partition_set(&c4, 2, Method::Exact, DEFAULT_BUDGET)?;
//! assert!(set.len() > 1);
//! # Ok::<(), sparse_ld::Error>(())
//! ```
//!
//! Quotients are exact rationals, partition functions are natural logs, and
//! every random routine takes an explicit seed. Exhaustive work is bounded by
//! a budget and fails with [`Error::BudgetExceeded`] rather than running
//! without end.

#![allow(clippy::needless_range_loop)]

pub mod coloring;
pub mod enumerate;
pub mod error;
pub mod graph;
pub mod hom;
pub mod lab;
pub mod measures;
pub mod neighborhood;
pub mod numeric;
pub mod rate;
pub mod rational;
pub mod rng;
pub mod variational;

pub use error::{Error, Result};
pub use graph::{Graph, GraphFamily};

// The book's snippets run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/quotients.md")]
    mod quotients {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/rates.md")]
    mod rates {}
    #[doc = include_str!("../../../book/src/homomorphisms.md")]
    mod homomorphisms {}
    #[doc = include_str!("../../../book/src/variational.md")]
    mod variational {}
    #[doc = include_str!("../../../book/src/neighborhoods.md")]
    mod neighborhoods {}
    #[doc = include_str!("../../../book/src/lab.md")]
    mod lab {}
}
