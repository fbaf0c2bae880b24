//! Finite-`n` checks of how empirical rates behave under refinement of the
//! color grid and under small edits of the graph.

use num_traits::{Signed, Zero};
use serde::Serialize;

use std::collections::BTreeSet;

use rand::Rng as _;

use super::{quotient_coords, RateEngine, RateEstimate};
use crate::coloring::{Quotient, QuotientSet, ScaledSet};
use crate::enumerate::{fold_colorings, pair_slot, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::graph::{edit_distance_labeled, Graph};
use crate::measures::{d_var, quotient_to_step, StepMeasurePair};
use crate::rational::Q;

/// Merges colors `2i` and `2i + 1` of a quotient at resolution `2k`.
pub fn coarsen_quotient(q: &Quotient) -> Result<Quotient> {
    if !q.k().is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("cannot halve resolution {}", q.k())));
    }
    let k = q.k() / 2;
    let x = (0..k).map(|i| q.x()[2 * i] + q.x()[2 * i + 1]).collect();
    let xx =
        (0..k).map(|i| (0..k).map(|j| (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| q.xx(2 * i + a, 2 * j + b)).sum()).collect()).collect();
    Quotient::new(x, xx, q.degree_bound())
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementRow {
    pub center: Quotient,
    pub coarse_center: Quotient,
    pub fine: RateEstimate,
    /// Rate of the merged center at radius `4δ`.
    pub coarse: RateEstimate,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementReport {
    #[serde(with = "crate::rational::as_str")]
    pub delta: Q,
    pub rows: Vec<RefinementRow>,
    pub violations: usize,
}

/// For each center `c` at resolution `2k`, compares `Î_{2k}(c; δ)` with
/// `Î_k(T c; 4δ)`, where `T` merges color pairs. Merging moves every
/// quotient in `B(c, δ)` into `B(Tc, 4δ)` and every `k`-coloring has exactly
/// `2^n` preimages, so `Î_k(Tc; 4δ) ≤ Î_{2k}(c; δ)` holds exactly at every
/// finite `n`; any violation is a bug.
pub fn refinement_diagnostic(g: &Graph, centers: &[Quotient], delta: &Q, budget: u128) -> Result<RefinementReport> {
    let Some(first) = centers.first() else {
        return Ok(RefinementReport { delta: *delta, rows: Vec::new(), violations: 0 });
    };
    let k2 = first.k();
    let fine = RateEngine::build(g, k2, budget)?;
    let coarse = RateEngine::build(g, k2 / 2, budget)?;
    let wide = *delta * 4;
    let mut rows = Vec::with_capacity(centers.len());
    for c in centers {
        if c.k() != k2 {
            return Err(Error::ResolutionMismatch(c.k(), k2));
        }
        let tc = coarsen_quotient(c)?;
        let f = fine.estimate(c, delta)?;
        let r = coarse.estimate(&tc, &wide)?;
        let holds = r.value <= f.value;
        rows.push(RefinementRow { center: c.clone(), coarse_center: tc, fine: f, coarse: r, holds });
    }
    let violations = rows.iter().filter(|r| !r.holds).count();
    Ok(RefinementReport { delta: *delta, rows, violations })
}

#[derive(Clone, Debug, Serialize)]
pub struct BallInfimum {
    pub k: usize,
    #[serde(with = "crate::rational::as_str")]
    pub radius: Q,
    /// Smallest `Î_k(q; δ)` over achievable `q` with `d_var(q, T_k target) ≤ radius`.
    #[serde(with = "crate::numeric::ext")]
    pub infimum: f64,
    pub candidates: usize,
}

/// The sequence `ℓ ↦ inf Î_{2^ℓ}` over achievable quotients near
/// `T_{2^ℓ}(target)`, for `2^ℓ` up to the target's resolution. Nearness is
/// `d_var ≤ 2/2^ℓ`, which implies the same Prokhorov bound, so each entry
/// is an infimum over a subset of the Prokhorov ball. Reported, not asserted.
pub fn ball_infima(g: &Graph, target: &StepMeasurePair, delta: &Q, budget: u128) -> Result<Vec<BallInfimum>> {
    let mut out = Vec::new();
    let mut k = 1;
    while k <= target.k() {
        if !target.k().is_multiple_of(k) {
            break;
        }
        let t = target.coarsen(k)?;
        let engine = RateEngine::build(g, k, budget)?;
        let radius = Q::new(2, k as i64);
        let mut best = f64::INFINITY;
        let mut candidates = 0;
        for (q, _) in engine.histogram().quotients() {
            if d_var(&quotient_to_step(&q), &t)? <= radius {
                candidates += 1;
                best = best.min(engine.estimate(&q, delta)?.value);
            }
        }
        out.push(BallInfimum { k, radius, infimum: best, candidates });
        k *= 2;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationRow {
    pub center: Quotient,
    /// `Î_G(c; δ)`, `Î_G̃(c; δ/2)`, `Î_G̃(c; δ)`, `Î_G(c; δ/2)`.
    #[serde(with = "crate::numeric::ext")]
    pub g_delta: f64,
    #[serde(with = "crate::numeric::ext")]
    pub gt_half: f64,
    #[serde(with = "crate::numeric::ext")]
    pub gt_delta: f64,
    #[serde(with = "crate::numeric::ext")]
    pub g_half: f64,
    /// `Î_G̃(c; δ/2) ≥ Î_G(c; δ)`.
    pub forward: bool,
    /// `Î_G(c; δ/2) ≥ Î_G̃(c; δ)`.
    pub backward: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    pub edit_distance: usize,
    /// Bound `2·edits/n` on how far one coloring's quotient can move.
    #[serde(with = "crate::rational::as_str")]
    pub sensitivity: Q,
    /// Largest quotient shift over all colorings, measured.
    #[serde(with = "crate::rational::as_str")]
    pub max_shift: Q,
    /// `sensitivity ≤ δ/2`, where both inequalities are exact.
    pub exact_regime: bool,
    pub rows: Vec<PerturbationRow>,
    /// Rows where an inequality fails although `exact_regime` holds.
    pub violations: usize,
}

/// Largest ℓ∞ distance between `G/σ` and `G̃/σ` over all colorings.
pub fn max_quotient_shift(g: &Graph, gt: &Graph, k: usize, budget: u128) -> Result<Q> {
    let n = g.n();
    let (eg, et) = (g.edge_set(), gt.edge_set());
    let plus: Vec<(usize, usize)> = et.difference(&eg).copied().collect();
    let minus: Vec<(usize, usize)> = eg.difference(&et).copied().collect();
    let worst = fold_colorings(
        n,
        k,
        budget,
        || 0i64,
        |best, c| {
            let mut diff = vec![0i64; crate::enumerate::key_len(k)];
            for &(u, v) in &plus {
                diff[pair_slot(k, c[u] as usize, c[v] as usize)] += 1;
            }
            for &(u, v) in &minus {
                diff[pair_slot(k, c[u] as usize, c[v] as usize)] -= 1;
            }
            for i in 0..k {
                for j in i..k {
                    let d = diff[pair_slot(k, i, j)].abs() * if i == j { 2 } else { 1 };
                    *best = (*best).max(d);
                }
            }
        },
        i64::max,
    )?;
    Ok(Q::new(worst, n as i64))
}

/// Compares rates of `g` and an edited `gt` at radii `δ` and `δ/2`.
pub fn perturbation_stability(g: &Graph, gt: &Graph, k: usize, centers: &[Quotient], delta: &Q, budget: u128) -> Result<PerturbationReport> {
    let edits = edit_distance_labeled(g, gt)?;
    let n = g.n() as i64;
    let sensitivity = Q::new(2 * edits as i64, n);
    let half = *delta / 2;
    let exact_regime = sensitivity <= half;
    let shift_budget = budget.min(DEFAULT_BUDGET);
    let max_shift = if edits == 0 { Q::zero() } else { max_quotient_shift(g, gt, k, shift_budget)? };
    let eg = RateEngine::build(g, k, budget)?;
    let et = RateEngine::build(gt, k, budget)?;
    let mut rows = Vec::with_capacity(centers.len());
    for c in centers {
        let g_delta = eg.estimate(c, delta)?.value;
        let gt_half = et.estimate(c, &half)?.value;
        let gt_delta = et.estimate(c, delta)?.value;
        let g_half = eg.estimate(c, &half)?.value;
        rows.push(PerturbationRow { center: c.clone(), g_delta, gt_half, gt_delta, g_half, forward: gt_half >= g_delta, backward: g_half >= gt_delta });
    }
    let violations = if exact_regime { rows.iter().filter(|r| !(r.forward && r.backward)).count() } else { 0 };
    debug_assert!(!max_shift.is_negative());
    Ok(PerturbationReport { edit_distance: edits, sensitivity, max_shift, exact_regime, rows, violations })
}

/// How grid points are chosen for [`thickening_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSample {
    /// Every grid point within `2δ` of some achievable quotient.
    Exhaustive,
    /// Random grid points within `2δ` of random achievable quotients.
    Sampled { count: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ThickeningReport {
    pub k: usize,
    #[serde(with = "crate::rational::as_str")]
    pub delta: Q,
    pub sample: GridSample,
    pub candidates: usize,
    /// Grid points with `Î_k(p; δ) < ∞`.
    pub finite: usize,
    /// Grid points within `δ` of the exact partition set.
    pub near: usize,
    /// Grid points where the two tests disagree.
    pub mismatches: usize,
    /// Largest finite rate seen; never above `log k`.
    pub max_finite_rate: f64,
}

impl ThickeningReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.max_finite_rate <= (self.k as f64).ln() + 1e-12
    }
}

/// Compares, on grid points `p` of pitch `δ = 1/M`, the set where the
/// empirical rate `Î_k(p; δ)` is finite with the closed `δ`-thickening of
/// the exact partition set. The two coincide at every finite `n`; the
/// check runs the ball counter and the set-distance code independently.
pub fn thickening_check(g: &Graph, k: usize, delta: &Q, sample: GridSample, budget: u128) -> Result<ThickeningReport> {
    if *delta.numer() != 1 || *delta.denom() < 1 {
        return Err(Error::InvalidParameter(format!("grid pitch must be 1/M, got {delta}")));
    }
    let steps = *delta.denom();
    let engine = RateEngine::build(g, k, budget)?;
    let set = QuotientSet::from_histogram(engine.histogram());
    let points: Vec<Vec<Q>> = set.points.iter().map(quotient_coords).collect();
    // Grid indices m with |m δ - c| ≤ 2δ and m ≥ 0.
    let window = |c: &Q| -> (i64, i64) {
        let lo = ((c / delta) - 2).ceil().to_integer().max(0);
        let hi = ((c / delta) + 2).floor().to_integer();
        (lo, hi)
    };
    let complete = |mut m: Vec<i64>, ranges: &[(i64, i64)]| -> Option<Vec<i64>> {
        let last = steps - m[..k - 1].iter().sum::<i64>();
        if last < ranges[k - 1].0 || last > ranges[k - 1].1 {
            return None;
        }
        m[k - 1] = last;
        Some(m)
    };
    let mut grid: BTreeSet<Vec<i64>> = BTreeSet::new();
    match sample {
        GridSample::Exhaustive => {
            for c in &points {
                let ranges: Vec<(i64, i64)> = c.iter().map(window).collect();
                let free: Vec<usize> = (0..ranges.len()).filter(|&t| t != k - 1).collect();
                let mut m: Vec<i64> = ranges.iter().map(|r| r.0).collect();
                'odometer: loop {
                    if let Some(full) = complete(m.clone(), &ranges) {
                        grid.insert(full);
                    }
                    for &t in &free {
                        if m[t] < ranges[t].1 {
                            m[t] += 1;
                            continue 'odometer;
                        }
                        m[t] = ranges[t].0;
                    }
                    break;
                }
            }
        }
        GridSample::Sampled { count, seed } => {
            let mut rng = crate::rng::seeded(seed, &[8]);
            let mut tries = 0;
            while grid.len() < count && tries < 50 * count {
                tries += 1;
                let c = &points[rng.random_range(0..points.len())];
                let ranges: Vec<(i64, i64)> = c.iter().map(window).collect();
                let m: Vec<i64> = ranges.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
                if let Some(full) = complete(m, &ranges) {
                    grid.insert(full);
                }
            }
        }
    }
    let scaled = ScaledSet::new(&set, steps)?;
    let (mut finite, mut near, mut mismatches) = (0, 0, 0);
    let mut max_finite_rate = 0.0f64;
    for m in &grid {
        let x: Vec<Q> = m[..k].iter().map(|&v| *delta * v).collect();
        let mut xx = vec![vec![Q::zero(); k]; k];
        let mut t = k;
        for i in 0..k {
            for j in i..k {
                xx[i][j] = *delta * m[t];
                xx[j][i] = xx[i][j];
                t += 1;
            }
        }
        let p = Quotient::new(x, xx, g.degree_bound())?;
        let rate = engine.estimate(&p, delta)?.value;
        let is_finite = rate.is_finite();
        let is_near = scaled.distance(&p)? <= *delta;
        if is_finite {
            finite += 1;
            max_finite_rate = max_finite_rate.max(rate);
        }
        near += usize::from(is_near);
        mismatches += usize::from(is_finite != is_near);
    }
    Ok(ThickeningReport { k, delta: *delta, sample, candidates: grid.len(), finite, near, mismatches, max_finite_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn refinement_on_k2_unions() {
        let g = Graph::complete(2).copies(6);
        let engine = RateEngine::build(&g, 4, DEFAULT_BUDGET).unwrap();
        let centers: Vec<Quotient> = engine.histogram().quotients().into_iter().map(|(q, _)| q).take(200).collect();
        let rep = refinement_diagnostic(&g, &centers, &q(1, 12), DEFAULT_BUDGET).unwrap();
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn coarsening_merges_pairs() {
        let z = q(0, 1);
        let f =
            Quotient::new(vec![q(1, 4); 4], vec![vec![z, q(1, 4), z, z], vec![q(1, 4), z, z, z], vec![z, z, z, q(1, 4)], vec![z, z, q(1, 4), z]], 1).unwrap();
        let c = coarsen_quotient(&f).unwrap();
        assert_eq!(c.x(), &[q(1, 2), q(1, 2)]);
        assert_eq!(c.xx(0, 0), q(1, 2));
        assert_eq!(c.xx(0, 1), z);
    }

    #[test]
    fn cycle_versus_path() {
        let c8 = Graph::cycle(8).unwrap();
        let p8 = Graph::path(8).unwrap();
        assert_eq!(max_quotient_shift(&c8, &p8, 2, DEFAULT_BUDGET).unwrap(), q(2, 8));
        let same = perturbation_stability(&c8, &c8, 2, &[], &q(1, 4), DEFAULT_BUDGET).unwrap();
        assert_eq!(same.max_shift, q(0, 1));
        let engine = RateEngine::build(&c8, 2, DEFAULT_BUDGET).unwrap();
        let centers: Vec<Quotient> = engine.histogram().quotients().into_iter().map(|(q, _)| q).collect();
        let rep = perturbation_stability(&c8, &p8, 2, &centers, &q(1, 2), DEFAULT_BUDGET).unwrap();
        assert!(rep.exact_regime);
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn thickening_matches_finite_rates() {
        let r = thickening_check(&Graph::empty(6), 2, &q(1, 4), GridSample::Exhaustive, DEFAULT_BUDGET).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.finite > 0 && r.finite < r.candidates);
        let g = Graph::complete(2).copies(3);
        let r = thickening_check(&g, 3, &q(1, 4), GridSample::Sampled { count: 300, seed: 2 }, DEFAULT_BUDGET).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(thickening_check(&g, 2, &q(2, 5), GridSample::Exhaustive, DEFAULT_BUDGET).is_err());
    }

    #[test]
    fn infima_sequence_is_reported() {
        let g = Graph::complete(2).copies(4);
        let target = StepMeasurePair::new(vec![q(1, 4); 4], vec![vec![q(1, 16); 4]; 4], 1).unwrap();
        let seq = ball_infima(&g, &target, &q(1, 8), DEFAULT_BUDGET).unwrap();
        assert_eq!(seq.iter().map(|b| b.k).collect::<Vec<_>>(), vec![1, 2, 4]);
        assert!(seq.iter().all(|b| b.candidates > 0));
    }
}
