//! Real-valued colorings and the measure pair they induce.
//!
//! A coloring `σ: V → [0, 1]` gives a probability measure `ρ` with an atom
//! of mass `1/|V|` at every `σ(u)`, and a measure `μ` on the unit square
//! with atoms of mass `1/|V|` at `(σ(u), σ(v))` for every oriented edge.
//! Projecting onto the `k`-grid (spreading each cell's mass uniformly over
//! the cell) gives a [`StepMeasurePair`], which is the same data as a
//! k-quotient.

mod flow;
mod prokhorov;

pub use prokhorov::{prokhorov_atoms_to_step, prokhorov_bounds, ProkhorovBounds};

use num_traits::{Signed, Zero};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::coloring::{check_k, Coloring, Quotient};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rational::{format_q, parse_q, Q};
use crate::rng::seeded;

/// Values in `[0, 1]`, one per vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealColoring {
    pub values: Vec<f64>,
    /// Seed, when the values were drawn by [`RealColoring::uniform`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RealColoring {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("real color {v} outside [0, 1]")));
        }
        Ok(Self { values, seed: None })
    }

    /// i.i.d. uniform values, redrawn whenever a value lands on a grid line
    /// `i/k` for some `k` in `avoid`.
    pub fn uniform(n: usize, seed: u64, avoid: &[usize]) -> Self {
        let mut rng = seeded(seed, &[4, n as u64]);
        let values = (0..n)
            .map(|_| loop {
                let v: f64 = rng.random();
                if avoid.iter().all(|&k| !on_grid(v, k)) {
                    break v;
                }
            })
            .collect();
        Self { values, seed: Some(seed) }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn on_grid(p: f64, k: usize) -> bool {
    (p * k as f64).fract() == 0.0
}

/// How to treat atoms lying exactly on a grid line `i/k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPolicy {
    /// Fail with [`Error::GridLineAtom`].
    #[default]
    Reject,
    /// Put the atom in the cell to its left (the cell `⌈kp⌉ - 1`, or the
    /// first cell for `p = 0`), matching [`discretize_coloring`].
    AssignLower,
}

/// Zero-based cell of a position.
pub fn cell_of(p: f64, k: usize, policy: GridPolicy) -> Result<usize> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("position {p} outside [0, 1]")));
    }
    let t = p * k as f64;
    match policy {
        GridPolicy::Reject if t.fract() == 0.0 => Err(Error::GridLineAtom { position: p, k }),
        GridPolicy::Reject => Ok(t.floor() as usize),
        GridPolicy::AssignLower => Ok((t.ceil() as usize).saturating_sub(1).min(k - 1)),
    }
}

/// Atomic measures `ρ(σ)` on `[0, 1]` and `μ(σ)` on `[0, 1]²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureWire", into = "MeasureWire")]
pub struct MeasurePair {
    pub rho: Vec<(f64, Q)>,
    pub mu: Vec<([f64; 2], Q)>,
    pub degree_bound: usize,
}

#[derive(Serialize, Deserialize)]
struct Atom<P> {
    at: P,
    mass: String,
}

#[derive(Serialize, Deserialize)]
struct MeasureWire {
    degree_bound: usize,
    rho: Vec<Atom<f64>>,
    mu: Vec<Atom<[f64; 2]>>,
}

impl TryFrom<MeasureWire> for MeasurePair {
    type Error = Error;
    fn try_from(w: MeasureWire) -> Result<Self> {
        Ok(Self {
            rho: w.rho.into_iter().map(|a| Ok((a.at, parse_q(&a.mass)?))).collect::<Result<_>>()?,
            mu: w.mu.into_iter().map(|a| Ok((a.at, parse_q(&a.mass)?))).collect::<Result<_>>()?,
            degree_bound: w.degree_bound,
        })
    }
}

impl From<MeasurePair> for MeasureWire {
    fn from(m: MeasurePair) -> Self {
        MeasureWire {
            degree_bound: m.degree_bound,
            rho: m.rho.iter().map(|(at, q)| Atom { at: *at, mass: format_q(q) }).collect(),
            mu: m.mu.iter().map(|(at, q)| Atom { at: *at, mass: format_q(q) }).collect(),
        }
    }
}

impl MeasurePair {
    pub fn rho_mass(&self) -> Q {
        self.rho.iter().map(|a| a.1).sum()
    }

    pub fn mu_mass(&self) -> Q {
        self.mu.iter().map(|a| a.1).sum()
    }
}

/// `(ρ(σ), μ(σ))`: one atom per vertex, two per edge, each of mass `1/|V|`.
pub fn build_measures(g: &Graph, sigma: &RealColoring) -> Result<MeasurePair> {
    if sigma.len() != g.n() {
        return Err(Error::ColoringLength { got: sigma.len(), expected: g.n() });
    }
    if g.n() == 0 {
        return Err(Error::InvalidParameter("graph has no vertices".into()));
    }
    let w = Q::new(1, g.n() as i64);
    let s = &sigma.values;
    Ok(MeasurePair {
        rho: s.iter().map(|&p| (p, w)).collect(),
        mu: g.edges().iter().flat_map(|&(u, v)| [([s[u], s[v]], w), ([s[v], s[u]], w)]).collect(),
        degree_bound: g.degree_bound(),
    })
}

/// Measures with constant density on each grid cell `(i/k, (i+1)/k)` and
/// each square cell; stored as cell masses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "StepWire", into = "StepWire")]
pub struct StepMeasurePair {
    k: usize,
    rho: Vec<Q>,
    mu: Vec<Q>,
    degree_bound: usize,
}

#[derive(Serialize, Deserialize)]
struct StepWire {
    k: usize,
    rho: Vec<String>,
    mu: Vec<Vec<String>>,
    #[serde(default)]
    degree_bound: usize,
}

impl TryFrom<StepWire> for StepMeasurePair {
    type Error = Error;
    fn try_from(w: StepWire) -> Result<Self> {
        let rho = w.rho.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>()?;
        let mu = w.mu.iter().map(|r| r.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
        StepMeasurePair::new(rho, mu, w.degree_bound)
    }
}

impl From<StepMeasurePair> for StepWire {
    fn from(s: StepMeasurePair) -> Self {
        StepWire {
            k: s.k,
            rho: s.rho.iter().map(format_q).collect(),
            mu: s.mu.chunks(s.k).map(|r| r.iter().map(format_q).collect()).collect(),
            degree_bound: s.degree_bound,
        }
    }
}

impl StepMeasurePair {
    /// Cell masses: `rho` of length `k`, `mu` a symmetric `k × k` matrix,
    /// all nonnegative.
    pub fn new(rho: Vec<Q>, mu: Vec<Vec<Q>>, degree_bound: usize) -> Result<Self> {
        let k = rho.len();
        check_k(k)?;
        let bad = |m: &str| Err(Error::InvalidParameter(format!("step measure: {m}")));
        if mu.len() != k || mu.iter().any(|r| r.len() != k) {
            return bad("mu must be k x k");
        }
        if rho.iter().chain(mu.iter().flatten()).any(Q::is_negative) {
            return bad("masses must be nonnegative");
        }
        if (0..k).any(|i| (0..i).any(|j| mu[i][j] != mu[j][i])) {
            return bad("mu must be symmetric");
        }
        Ok(Self { k, rho, mu: mu.into_iter().flatten().collect(), degree_bound })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn rho(&self) -> &[Q] {
        &self.rho
    }

    /// Row-major `k × k` cell masses.
    pub fn mu(&self) -> &[Q] {
        &self.mu
    }

    pub fn mu_cell(&self, i: usize, j: usize) -> Q {
        self.mu[i * self.k + j]
    }

    /// `T_{k'}` of a step pair whose resolution is a multiple of `k'`:
    /// aggregate blocks of cells.
    pub fn coarsen(&self, k: usize) -> Result<Self> {
        check_k(k)?;
        if !self.k.is_multiple_of(k) {
            return Err(Error::ResolutionMismatch(self.k, k));
        }
        let f = self.k / k;
        let mut rho = vec![Q::zero(); k];
        let mut mu = vec![vec![Q::zero(); k]; k];
        for i in 0..self.k {
            rho[i / f] += self.rho[i];
            for j in 0..self.k {
                mu[i / f][j / f] += self.mu_cell(i, j);
            }
        }
        Self::new(rho, mu, self.degree_bound)
    }

    /// Inverse of [`StepMeasurePair::coarsen`] that splits each cell evenly.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        check_k(self.k * factor)?;
        let k = self.k * factor;
        let f1 = Q::from_integer(factor as i64);
        let f2 = f1 * f1;
        let rho = (0..k).map(|i| self.rho[i / factor] / f1).collect();
        let mu = (0..k).map(|i| (0..k).map(|j| self.mu_cell(i / factor, j / factor) / f2).collect()).collect();
        Self::new(rho, mu, self.degree_bound)
    }
}

/// `T_k`: cell masses of an atomic pair. Atoms on grid lines are rejected.
pub fn project_tk(m: &MeasurePair, k: usize) -> Result<StepMeasurePair> {
    project_tk_with(m, k, GridPolicy::Reject)
}

pub fn project_tk_with(m: &MeasurePair, k: usize, policy: GridPolicy) -> Result<StepMeasurePair> {
    check_k(k)?;
    let mut rho = vec![Q::zero(); k];
    let mut mu = vec![vec![Q::zero(); k]; k];
    for &(p, w) in &m.rho {
        rho[cell_of(p, k, policy)?] += w;
    }
    for &([a, b], w) in &m.mu {
        mu[cell_of(a, k, policy)?][cell_of(b, k, policy)?] += w;
    }
    StepMeasurePair::new(rho, mu, m.degree_bound)
}

/// `t_k`: color `⌈kσ(u)⌉`, with `σ(u) = 0` sent to the first color.
pub fn discretize_coloring(sigma: &RealColoring, k: usize) -> Result<Coloring> {
    check_k(k)?;
    let colors = sigma.values.iter().map(|&p| cell_of(p, k, GridPolicy::AssignLower).map(|c| c as u8)).collect::<Result<_>>()?;
    Coloring::new(colors, k)
}

/// `F_k`: a quotient as a step pair (`ρ` cell `i` has mass `x_i`, `μ` cell
/// `(i, j)` has mass `X_ij`).
pub fn quotient_to_step(q: &Quotient) -> StepMeasurePair {
    StepMeasurePair { k: q.k(), rho: q.x().to_vec(), mu: q.xx_flat().to_vec(), degree_bound: q.degree_bound() }
}

/// Inverse of [`quotient_to_step`]; fails unless `ρ` has unit mass.
pub fn step_to_quotient(s: &StepMeasurePair) -> Result<Quotient> {
    Quotient::new(s.rho.clone(), s.mu.chunks(s.k).map(<[Q]>::to_vec).collect(), s.degree_bound)
}

fn dvar_component(a: &[Q], b: &[Q]) -> Q {
    let (mut pos, mut neg) = (Q::zero(), Q::zero());
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        if d.is_positive() {
            pos += d;
        } else {
            neg -= d;
        }
    }
    pos.max(neg)
}

/// `max_A |a(A) - b(A)|` over both components. For step measures the
/// supremum is attained on unions of cells, where it equals the larger of
/// the total positive and total negative cell differences.
pub fn d_var(a: &StepMeasurePair, b: &StepMeasurePair) -> Result<Q> {
    if a.k != b.k {
        return Err(Error::ResolutionMismatch(a.k, b.k));
    }
    Ok(dvar_component(&a.rho, &b.rho).max(dvar_component(&a.mu, &b.mu)))
}
