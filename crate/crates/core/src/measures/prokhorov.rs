//! Certified bounds on the Prokhorov distance between step measure pairs.
//!
//! The distance is the least `τ` with `a(A) ≤ b(A^τ) + τ` and the same with
//! `a`, `b` swapped, for every Borel `A`, where `A^τ` is the closed
//! ℓ∞-neighborhood. Two certificates bracket it:
//!
//! * **lower**: a concrete test set `A` violating the inequality for every
//!   `τ' < τ` proves `d ≥ τ`. Test sets are fine-grid intervals and unions
//!   of cells in one dimension and grid rectangles in two.
//! * **upper**: a partial transport moving all but at most `τ` of each
//!   measure's mass by at most `τ` proves `d ≤ τ`. Cells are split into
//!   equal subcells and matched by translation with a max-flow.
//!
//! Both are combined with the `d_var` sandwich `d ≤ d_var ≤ (4kD+1) d`.

use num_traits::ToPrimitive;
use serde::Serialize;

use super::flow::transport_mass;
use super::{cell_of, d_var, GridPolicy, MeasurePair, StepMeasurePair};
use crate::error::{Error, Result};
use crate::rational::Q;

/// Largest `k` for which test-set and transport refinements are attempted.
pub const REFINE_LIMIT: usize = 12;
/// Fine-grid resolution targets.
const FINE_1D: usize = 48;
const FINE_2D: usize = 12;
const BISECTIONS: usize = 64;

#[derive(Clone, Debug, Serialize)]
pub struct ProkhorovBounds {
    pub lower: f64,
    pub upper: f64,
    #[serde(with = "crate::rational::as_str")]
    pub d_var: Q,
    /// `d_var / (4kD + 1)` with `D` replaced by `max(D, 1)`.
    pub sandwich_lower: f64,
    pub test_set_lower: Option<f64>,
    pub transport_upper: Option<f64>,
}

fn f(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn subdivisions(k: usize, target: usize) -> usize {
    (target / k).max(1)
}

/// Mass of a 1d step measure (cell masses `m`) on a union of disjoint
/// intervals.
fn mass_1d(m: &[f64], set: &[(f64, f64)]) -> f64 {
    let k = m.len() as f64;
    let mut total = 0.0;
    for (i, &mi) in m.iter().enumerate() {
        if mi == 0.0 {
            continue;
        }
        let (lo, hi) = (i as f64 / k, (i + 1) as f64 / k);
        let cover: f64 = set.iter().map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0)).sum();
        total += mi * k * cover;
    }
    total
}

fn dilate(set: &[(f64, f64)], tau: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(set.len());
    for &(a, b) in set {
        let (a, b) = ((a - tau).max(0.0), (b + tau).min(1.0));
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

type Rect = [(f64, f64); 2];

fn mass_2d(m: &[f64], k: usize, r: &Rect) -> f64 {
    let kf = k as f64;
    let mut total = 0.0;
    for i in 0..k {
        let ox = (r[0].1.min((i + 1) as f64 / kf) - r[0].0.max(i as f64 / kf)).max(0.0);
        if ox == 0.0 {
            continue;
        }
        for j in 0..k {
            let mij = m[i * k + j];
            if mij == 0.0 {
                continue;
            }
            let oy = (r[1].1.min((j + 1) as f64 / kf) - r[1].0.max(j as f64 / kf)).max(0.0);
            total += mij * kf * kf * ox * oy;
        }
    }
    total
}

/// Largest `τ` certified by one test set: `h(τ) = a(A) - b(A^τ) - τ` is
/// decreasing, and `d ≥ τ` for every `τ` with `h(τ) > 0`. Returns the lower
/// end of the final bisection bracket.
fn certify(a_mass: f64, b_dilated: impl Fn(f64) -> f64, hi: f64) -> f64 {
    let h = |t: f64| a_mass - b_dilated(t) - t;
    if h(0.0) <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn test_set_lower_1d(a: &[f64], b: &[f64]) -> f64 {
    let k = a.len();
    let fine = k * subdivisions(k, FINE_1D);
    let hi = a.iter().chain(b).sum::<f64>() + 1.0;
    let mut sets: Vec<Vec<(f64, f64)>> = Vec::new();
    for i in 0..fine {
        for j in i + 1..=fine {
            sets.push(vec![(i as f64 / fine as f64, j as f64 / fine as f64)]);
        }
    }
    if k <= REFINE_LIMIT {
        for mask in 1u32..(1 << k) {
            let cells: Vec<(f64, f64)> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| (i as f64 / k as f64, (i + 1) as f64 / k as f64)).collect();
            sets.push(dilate(&cells, 0.0));
        }
    }
    let mut best: f64 = 0.0;
    for set in &sets {
        for (x, y) in [(a, b), (b, a)] {
            best = best.max(certify(mass_1d(x, set), |t| mass_1d(y, &dilate(set, t)), hi));
        }
    }
    best
}

fn test_set_lower_2d(a: &[f64], b: &[f64], k: usize) -> f64 {
    let fine = k * subdivisions(k, FINE_2D);
    let hi = a.iter().chain(b).sum::<f64>() + 1.0;
    let g = |i: usize| i as f64 / fine as f64;
    let mut best: f64 = 0.0;
    for x0 in 0..fine {
        for x1 in x0 + 1..=fine {
            for y0 in 0..fine {
                for y1 in y0 + 1..=fine {
                    let r = [(g(x0), g(x1)), (g(y0), g(y1))];
                    let grow = |t: f64| [((r[0].0 - t).max(0.0), (r[0].1 + t).min(1.0)), ((r[1].0 - t).max(0.0), (r[1].1 + t).min(1.0))];
                    for (x, y) in [(a, b), (b, a)] {
                        best = best.max(certify(mass_2d(x, k, &r), |t| mass_2d(y, k, &grow(t)), hi));
                    }
                }
            }
        }
    }
    best
}

/// Best `max(r/K, unmatched)` over shifts `r`, where subcells at index
/// distance at most `r` may be matched.
fn transport_upper(a: &[f64], b: &[f64], fine: usize, dist: impl Fn(usize, usize) -> usize) -> f64 {
    let (ta, tb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    let mut best = f64::INFINITY;
    for r in 0..=fine {
        let tau = r as f64 / fine as f64;
        if tau >= best {
            break;
        }
        let moved = transport_mass(a, b, |i, j| dist(i, j) <= r);
        best = best.min(tau.max(ta - moved).max(tb - moved).max(0.0));
    }
    best
}

fn split_1d(m: &[f64], s: usize) -> Vec<f64> {
    m.iter().flat_map(|&v| std::iter::repeat_n(v / s as f64, s)).collect()
}

fn split_2d(m: &[f64], k: usize, s: usize) -> Vec<f64> {
    let fine = k * s;
    let w = (s * s) as f64;
    (0..fine * fine).map(|c| m[(c / fine / s) * k + (c % fine) / s] / w).collect()
}

/// Lower and upper bounds on the Prokhorov distance between two step pairs
/// of the same resolution.
pub fn prokhorov_bounds(a: &StepMeasurePair, b: &StepMeasurePair) -> Result<ProkhorovBounds> {
    let dv = d_var(a, b)?;
    let k = a.k();
    let dd = a.degree_bound().max(b.degree_bound()).max(1);
    let sandwich_lower = f(&dv) / (4 * k * dd + 1) as f64;
    let (mut test_set_lower, mut transport) = (None, None);
    if k <= REFINE_LIMIT {
        let fl = |v: &[Q]| v.iter().map(f).collect::<Vec<_>>();
        let (ra, rb, ma, mb) = (fl(a.rho()), fl(b.rho()), fl(a.mu()), fl(b.mu()));
        test_set_lower = Some(test_set_lower_1d(&ra, &rb).max(test_set_lower_2d(&ma, &mb, k)));
        let s1 = subdivisions(k, FINE_1D);
        let s2 = subdivisions(k, FINE_2D);
        let f2 = k * s2;
        let up_rho = transport_upper(&split_1d(&ra, s1), &split_1d(&rb, s1), k * s1, |i, j| i.abs_diff(j));
        let up_mu = transport_upper(&split_2d(&ma, k, s2), &split_2d(&mb, k, s2), f2, |i, j| (i / f2).abs_diff(j / f2).max((i % f2).abs_diff(j % f2)));
        transport = Some(up_rho.max(up_mu));
    }
    let lower = sandwich_lower.max(test_set_lower.unwrap_or(0.0));
    let upper = transport.map_or(f(&dv), |t| t.min(f(&dv)));
    Ok(ProkhorovBounds { lower, upper, d_var: dv, sandwich_lower, test_set_lower, transport_upper: transport })
}

/// Smallest `max(τ, unmatched(τ))` over candidate radii, where
/// `unmatched(τ)` is the mass left over by the best transport that moves
/// atoms only to subcells lying entirely within distance `τ`.
fn atoms_vs_cells(atom_mass: &[f64], cell_mass: &[f64], sup_dist: impl Fn(usize, usize) -> f64) -> f64 {
    let (ta, tb): (f64, f64) = (atom_mass.iter().sum(), cell_mass.iter().sum());
    let mut cands: Vec<f64> = (0..atom_mass.len()).flat_map(|i| (0..cell_mass.len()).map(move |j| (i, j))).map(|(i, j)| sup_dist(i, j)).collect();
    cands.push(0.0);
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let unmatched = |tau: f64| {
        let moved = transport_mass(atom_mass, cell_mass, |i, j| sup_dist(i, j) <= tau);
        (ta - moved).max(tb - moved).max(0.0)
    };
    // First candidate whose unmatched mass is within the candidate radius.
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    if unmatched(cands[hi]) > cands[hi] {
        return unmatched(cands[hi]).max(cands[hi]);
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if unmatched(cands[mid]) <= cands[mid] {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if lo == 0 {
        cands[0]
    } else {
        cands[lo].min(unmatched(cands[lo - 1]))
    }
}

/// Certified upper bound on the Prokhorov distance between an atomic pair
/// and a step pair, by transporting atoms to subcells of the step pair.
pub fn prokhorov_atoms_to_step(m: &MeasurePair, s: &StepMeasurePair) -> Result<f64> {
    let k = s.k();
    for &(p, _) in &m.rho {
        cell_of(p, 1, GridPolicy::AssignLower)?;
    }
    if m.mu.iter().any(|(p, _)| !p.iter().all(|c| (0.0..=1.0).contains(c))) {
        return Err(Error::InvalidParameter("atom outside the unit square".into()));
    }
    let s1 = subdivisions(k, FINE_1D);
    let k1 = k * s1;
    let rho_cells: Vec<f64> = split_1d(&s.rho().iter().map(f).collect::<Vec<_>>(), s1);
    let rho_atoms: Vec<f64> = m.rho.iter().map(|a| f(&a.1)).collect();
    let sup1 = |p: f64, c: usize, fine: usize| {
        let (lo, hi) = (c as f64 / fine as f64, (c + 1) as f64 / fine as f64);
        (p - lo).abs().max((hi - p).abs())
    };
    let up_rho = atoms_vs_cells(&rho_atoms, &rho_cells, |i, j| sup1(m.rho[i].0, j, k1));

    let s2 = subdivisions(k, FINE_2D);
    let k2 = k * s2;
    let mu_cells = split_2d(&s.mu().iter().map(f).collect::<Vec<_>>(), k, s2);
    let mu_atoms: Vec<f64> = m.mu.iter().map(|a| f(&a.1)).collect();
    let up_mu = if mu_atoms.is_empty() && mu_cells.iter().all(|&v| v == 0.0) {
        0.0
    } else {
        atoms_vs_cells(&mu_atoms, &mu_cells, |i, j| {
            let [x, y] = m.mu[i].0;
            sup1(x, j / k2, k2).max(sup1(y, j % k2, k2))
        })
    };
    Ok(up_rho.max(up_mu))
}
