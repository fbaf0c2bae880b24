//! Weighted homomorphism counts `hom(G, H) = Σ_σ Π α_{σ(u)} Π A_{σ(u)σ(v)}`,
//! free energies, soft-core regularization and the tools built on them.
//!
//! All partition values are logarithms. A zero count is `-∞`, and the
//! corresponding free energy is `+∞`; neither is an error.
//!
//! ```
//! use sparse_ld::hom::{hom_count, HomAlgorithm, TargetGraph};
//! use sparse_ld::Graph;
//!
//! let h = TargetGraph::new(vec![1.0, 1.0], vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
//! let c4 = Graph::cycle(4).unwrap();
//! let z = hom_count(&c4, &h, HomAlgorithm::Transfer, 1 << 20).unwrap();
//! assert!((z.log_value.exp() - 82.0).abs() < 1e-9);
//! ```

mod density;
mod maxcut;
mod witness;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use density::{hom_density_from, pattern_hom_count};
pub use maxcut::{exact_maxcut, maxcut_from_beta, MaxCutReport, MaxCutRow};
pub use witness::{deletion_witness, deletion_witness_report, DeletionWitness};

use crate::enumerate::fold_colorings;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphFamily};
use crate::numeric::LogSum;

/// A weighted target graph: positive node weights `alpha` and a symmetric
/// nonnegative edge-weight matrix `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TargetWire", into = "TargetWire")]
pub struct TargetGraph {
    alpha: Vec<f64>,
    a: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct TargetWire {
    alpha: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<TargetWire> for TargetGraph {
    type Error = Error;
    fn try_from(w: TargetWire) -> Result<Self> {
        let mut h = TargetGraph::new(w.alpha, w.a)?;
        if let Some(l) = w.labels {
            if l.len() != h.k() {
                return Err(Error::InvalidParameter(format!("{} labels for {} nodes", l.len(), h.k())));
            }
            h.labels = Some(l);
        }
        Ok(h)
    }
}

impl From<TargetGraph> for TargetWire {
    fn from(h: TargetGraph) -> Self {
        TargetWire { alpha: h.alpha, a: h.a, labels: h.labels }
    }
}

impl TargetGraph {
    pub fn new(alpha: Vec<f64>, a: Vec<Vec<f64>>) -> Result<Self> {
        let k = alpha.len();
        if k == 0 || k > crate::coloring::MAX_COLORS {
            return Err(Error::InvalidParameter(format!("target needs 1..={} nodes", crate::coloring::MAX_COLORS)));
        }
        if alpha.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(Error::InvalidParameter("node weights must be positive and finite".into()));
        }
        if a.len() != k || a.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidParameter(format!("edge weights must be {k}x{k}")));
        }
        for i in 0..k {
            for j in 0..k {
                if !(a[i][j].is_finite() && a[i][j] >= 0.0) {
                    return Err(Error::InvalidParameter("edge weights must be nonnegative and finite".into()));
                }
                if a[i][j] != a[j][i] {
                    return Err(Error::InvalidParameter("edge weights must be symmetric".into()));
                }
            }
        }
        Ok(Self { alpha, a, labels: None })
    }

    /// All weights one: `hom(G, H) = k^n`.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0; k], vec![vec![1.0; k]; k])
    }

    /// Two adjacent nodes without loops: homomorphisms are proper 2-colorings.
    pub fn hard_core_k2() -> Self {
        Self::new(vec![1.0, 1.0], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).expect("valid target")
    }

    /// `α = (1, 1)`, `A_12 = e^β`, `A_11 = A_22 = 1`.
    pub fn cut_weight(beta: f64) -> Result<Self> {
        let b = beta.exp();
        Self::new(vec![1.0, 1.0], vec![vec![1.0, b], vec![b, 1.0]])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.k() {
            return Err(Error::InvalidParameter(format!("{} labels for {} nodes", labels.len(), self.k())));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn a_rows(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Every edge weight is positive.
    pub fn is_soft_core(&self) -> bool {
        self.a.iter().flatten().all(|&w| w > 0.0)
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha.iter().copied().fold(0.0, f64::max)
    }

    pub fn a_min(&self) -> f64 {
        self.a.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn a_max(&self) -> f64 {
        self.a.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// `max{|log α_i|, |log A_ij|}`; infinite for hard-core targets.
    pub fn max_abs_log(&self) -> f64 {
        self.alpha.iter().chain(self.a.iter().flatten()).map(|w| w.ln().abs()).fold(0.0, f64::max)
    }

    /// `H_λ`: every edge weight raised to at least `λ`.
    pub fn soften(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        let a = self.a.iter().map(|r| r.iter().map(|&w| w.max(lambda)).collect()).collect();
        Ok(Self { alpha: self.alpha.clone(), a, labels: self.labels.clone() })
    }

    /// `log` of the weight of one coloring; `-∞` if it uses a zero edge.
    pub fn log_weight(&self, g: &Graph, colors: &[u8]) -> f64 {
        let mut w: f64 = colors.iter().map(|&c| self.alpha[c as usize].ln()).sum();
        for &(u, v) in g.edges() {
            w += self.a[colors[u] as usize][colors[v] as usize].ln();
        }
        w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomAlgorithm {
    /// Sum over all `k^n` colorings.
    Brute,
    /// Transfer matrices; every component must be a path or a cycle.
    Transfer,
    /// Product over components, each by transfer if possible, else brute.
    Components,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LogPartition {
    /// `log hom(G, H)`, `-∞` when the count is zero.
    #[serde(with = "crate::numeric::ext")]
    pub log_value: f64,
    #[serde(with = "crate::numeric::ext")]
    pub per_vertex: f64,
    pub exact: bool,
    pub algorithm: HomAlgorithm,
}

impl LogPartition {
    fn new(log_value: f64, n: usize, algorithm: HomAlgorithm) -> Self {
        let per_vertex = if n == 0 { 0.0 } else { log_value / n as f64 };
        Self { log_value, per_vertex, exact: true, algorithm }
    }

    /// `-(1/n) log hom`; `+∞` for a zero count.
    pub fn free_energy(&self) -> f64 {
        -self.per_vertex
    }
}

fn brute_log(g: &Graph, h: &TargetGraph, budget: u128) -> Result<f64> {
    let k = h.k();
    let la: Vec<f64> = h.alpha.iter().map(|w| w.ln()).collect();
    let l_a: Vec<f64> = h.a.iter().flatten().map(|w| w.ln()).collect();
    let acc = fold_colorings(
        g.n(),
        k,
        budget,
        LogSum::new,
        |s, c| {
            let mut w: f64 = c.iter().map(|&x| la[x as usize]).sum();
            for &(u, v) in g.edges() {
                w += l_a[c[u] as usize * k + c[v] as usize];
            }
            s.push(w);
        },
        LogSum::merge,
    )?;
    Ok(acc.value())
}

enum Shape {
    Path(usize),
    Cycle(usize),
}

fn classify(g: &Graph) -> Option<Shape> {
    if g.max_degree() > 2 || !g.is_connected() {
        return None;
    }
    match g.edge_count() {
        m if m + 1 == g.n() => Some(Shape::Path(g.n())),
        m if m == g.n() && g.n() >= 3 => Some(Shape::Cycle(g.n())),
        _ => None,
    }
}

type Matrix = Vec<Vec<f64>>;

/// Multiplies and rescales so the largest entry is one; returns the log scale.
fn mul_scaled(a: &Matrix, b: &Matrix) -> (Matrix, f64) {
    let k = a.len();
    let mut c = vec![vec![0.0; k]; k];
    for i in 0..k {
        for l in 0..k {
            if a[i][l] != 0.0 {
                for j in 0..k {
                    c[i][j] += a[i][l] * b[l][j];
                }
            }
        }
    }
    let m = c.iter().flatten().copied().fold(0.0, f64::max);
    if m == 0.0 {
        return (c, f64::NEG_INFINITY);
    }
    c.iter_mut().flatten().for_each(|v| *v /= m);
    (c, m.ln())
}

/// `log trace((diag(α) A)^len)`.
fn cycle_log(h: &TargetGraph, len: usize) -> f64 {
    let k = h.k();
    let m: Matrix = (0..k).map(|i| (0..k).map(|j| h.alpha[i] * h.a[i][j]).collect()).collect();
    let mut base = (m, 0.0);
    let mut acc: Option<(Matrix, f64)> = None;
    let mut e = len;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some((a, s)) => {
                    let (p, t) = mul_scaled(&a, &base.0);
                    (p, s + base.1 + t)
                }
            });
        }
        e >>= 1;
        if e > 0 {
            let (p, t) = mul_scaled(&base.0, &base.0);
            base = (p, 2.0 * base.1 + t);
        }
    }
    let (p, s) = acc.expect("cycle length is positive");
    let tr: f64 = (0..k).map(|i| p[i][i]).sum();
    if tr == 0.0 || s == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        s + tr.ln()
    }
}

/// `log Σ` over walks of `len` vertices weighted by `α` and `A`.
fn path_log(h: &TargetGraph, len: usize) -> f64 {
    let k = h.k();
    let mut v = h.alpha.clone();
    let mut scale = 0.0;
    for _ in 1..len {
        let mut w = vec![0.0; k];
        for i in 0..k {
            for j in 0..k {
                w[j] += v[i] * h.a[i][j] * h.alpha[j];
            }
        }
        let m = w.iter().copied().fold(0.0, f64::max);
        if m == 0.0 {
            return f64::NEG_INFINITY;
        }
        w.iter_mut().for_each(|x| *x /= m);
        scale += m.ln();
        v = w;
    }
    scale + v.iter().sum::<f64>().ln()
}

fn shape_log(g: &Graph, h: &TargetGraph) -> Option<f64> {
    classify(g).map(|s| match s {
        Shape::Path(l) => path_log(h, l),
        Shape::Cycle(l) => cycle_log(h, l),
    })
}

/// `log hom(G, H)` by the requested algorithm.
pub fn hom_count(g: &Graph, h: &TargetGraph, algorithm: HomAlgorithm, budget: u128) -> Result<LogPartition> {
    let log_value = match algorithm {
        HomAlgorithm::Brute => brute_log(g, h, budget)?,
        HomAlgorithm::Transfer | HomAlgorithm::Components => {
            let mut shapes: HashMap<(usize, Vec<(usize, usize)>), usize> = HashMap::new();
            for members in g.components() {
                *shapes.entry(g.component_shape(&members)).or_insert(0) += 1;
            }
            let mut shapes: Vec<_> = shapes.into_iter().collect();
            shapes.sort();
            let mut total = 0.0;
            for ((size, edges), count) in shapes {
                let sub = Graph::new(size, edges, g.degree_bound()).expect("component of a valid graph");
                let part = match shape_log(&sub, h) {
                    Some(v) => v,
                    None if algorithm == HomAlgorithm::Components => brute_log(&sub, h, budget)?,
                    None => return Err(Error::UnsupportedTopology(size)),
                };
                total += part * count as f64;
            }
            total
        }
    };
    Ok(LogPartition::new(log_value, g.n(), algorithm))
}

/// `f(G, H) = -(1/n) log hom(G, H)`, `+∞` when there is no homomorphism.
pub fn free_energy(g: &Graph, h: &TargetGraph, budget: u128) -> Result<f64> {
    if g.n() == 0 {
        return Err(Error::InvalidParameter("free energy of the empty graph".into()));
    }
    Ok(hom_count(g, h, HomAlgorithm::Components, budget)?.free_energy())
}

/// `λ = 2^-1, ..., 2^-steps`.
pub fn dyadic_schedule(steps: u32) -> Vec<f64> {
    (1..=steps as i32).map(|j| 2f64.powi(-j)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaRow {
    pub index: usize,
    pub n: usize,
    /// `f(G_index, H_λ)` for each `λ` of the schedule.
    #[serde(with = "ext_vec")]
    pub values: Vec<f64>,
    /// Nondecreasing as `λ` shrinks.
    pub monotone: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaTable {
    pub lambdas: Vec<f64>,
    pub rows: Vec<LambdaRow>,
    pub monotone: bool,
}

mod ext_vec {
    use serde::ser::SerializeSeq;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&crate::numeric::fmt_ext(*x))?;
        }
        seq.end()
    }
}

impl LambdaTable {
    /// One row per `λ`: the `lambda` column, then `f` for each index.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["lambda".to_string()];
        header.extend(self.rows.iter().map(|r| format!("f_{}", r.index)));
        w.write_record(&header)?;
        for (j, l) in self.lambdas.iter().enumerate() {
            let mut rec = vec![l.to_string()];
            rec.extend(self.rows.iter().map(|r| crate::numeric::fmt_ext(r.values[j])));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Relative slack used when comparing free energies that are equal in exact
/// arithmetic.
const MONOTONE_SLACK: f64 = 1e-12;

/// Table of `f(G_index, H_λ)` over a schedule of `λ` and family indices.
/// Reports whether each row is monotone in `λ`; says nothing about limits.
pub fn lambda_limit(family: &GraphFamily, h: &TargetGraph, indices: &[usize], lambdas: &[f64], budget: u128) -> Result<LambdaTable> {
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]));
    let mut rows = Vec::with_capacity(indices.len());
    for &index in indices {
        let g = family.realize(index)?;
        let values = lambdas.iter().map(|&l| free_energy(&g, &h.soften(l)?, budget)).collect::<Result<Vec<_>>>()?;
        let monotone = order.windows(2).all(|w| {
            let (big, small) = (values[w[0]], values[w[1]]);
            small >= big - MONOTONE_SLACK * big.abs().max(1.0)
        });
        rows.push(LambdaRow { index, n: g.n(), values, monotone });
    }
    let monotone = rows.iter().all(|r| r.monotone);
    Ok(LambdaTable { lambdas: lambdas.to_vec(), rows, monotone })
}
