//! Rates for disjoint unions of a small base graph.
//!
//! A coloring of `N` copies of a base graph `B` is a sequence of `N`
//! base colorings. Group base colorings by their count key (their *type*);
//! the quotient of the union depends only on how many copies have each type,
//! i.e. on the type vector `z`. The exact number of colorings in a ball is
//! then a sum of multinomial terms over compositions of `N`, and as `N → ∞`
//! the rate per vertex tends to `min KL(z ‖ p) / |V(B)|` over type
//! distributions `z` whose averaged quotient lies in the ball, where `p` is
//! the type distribution of a uniform base coloring.

use std::collections::HashMap;

use serde::Serialize;

use super::{ball_window, check_query, in_window, key_coords, quotient_coords, rate_from_count, RateEstimate, RateMethod};
use crate::coloring::Quotient;
use crate::enumerate::{coloring_count, fold_colorings, key_of};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::{ln_u128, log_sum_exp, solve};
use crate::rational::{to_f64, Q};

/// Largest number of base colorings enumerated.
pub const BASE_LIMIT: u128 = 1 << 20;
/// Largest number of compositions summed for the finite count.
pub const COMPOSITION_LIMIT: u128 = 50_000_000;

/// One coloring type of the base graph.
#[derive(Clone, Debug, Serialize)]
pub struct ColoringType {
    pub key: Vec<u32>,
    /// Number of base colorings of this type.
    pub multiplicity: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct SanovReport {
    /// Exact finite-`N` rate from the composition sum.
    pub finite: RateEstimate,
    /// `min KL(z ‖ p) / |V(B)|` over admissible type vectors; `+∞` if none.
    /// Computed as a dual value, so it never exceeds the true minimum.
    #[serde(with = "crate::numeric::ext")]
    pub asymptotic: f64,
    /// KL of the recovered primal type vector (an upper estimate when the
    /// solver converged).
    #[serde(with = "crate::numeric::ext")]
    pub primal: f64,
    pub types: Vec<ColoringType>,
}

fn base_types(base: &Graph, k: usize) -> Result<Vec<ColoringType>> {
    let total = coloring_count(base.n(), k).filter(|&t| t <= BASE_LIMIT);
    if total.is_none() {
        return Err(Error::ExactSearchInfeasible { what: "base graph colorings", size: base.n(), limit: BASE_LIMIT as usize });
    }
    let map = fold_colorings(
        base.n(),
        k,
        BASE_LIMIT,
        HashMap::<Vec<u32>, u128>::new,
        |m, c| *m.entry(key_of(base, c, k)).or_insert(0) += 1,
        |mut a, b| {
            for (key, c) in b {
                *a.entry(key).or_insert(0) += c;
            }
            a
        },
    )?;
    let mut types: Vec<ColoringType> = map.into_iter().map(|(key, multiplicity)| ColoringType { key, multiplicity }).collect();
    types.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(types)
}

fn binomials(n: usize) -> Vec<Vec<u128>> {
    let mut t = vec![vec![0u128; n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = 1;
        for j in 1..=i {
            t[i][j] = t[i - 1][j - 1].saturating_add(if j < i { t[i - 1][j] } else { 0 });
        }
    }
    t
}

struct Compositions<'a> {
    coords: Vec<Vec<i64>>,
    mult: Vec<u128>,
    binom: Vec<Vec<u128>>,
    window: &'a [(i64, i64)],
}

impl Compositions<'_> {
    /// Sum over counts `c_t, ..., c_M` of the remaining types.
    fn sum(&self, t: usize, remaining: usize, acc: &mut Vec<i64>, weight: u128) -> Result<u128> {
        let last = t + 1 == self.coords.len();
        let range = if last { remaining..=remaining } else { 0..=remaining };
        let mut total: u128 = 0;
        for c in range {
            let w = weight
                .checked_mul(self.binom[remaining][c])
                .and_then(|w| w.checked_mul(self.mult[t].checked_pow(c as u32)?))
                .ok_or_else(|| Error::InvalidParameter("composition count overflows 128 bits".into()))?;
            for (a, v) in acc.iter_mut().zip(&self.coords[t]) {
                *a += v * c as i64;
            }
            let part = if last {
                if in_window(acc, self.window) {
                    w
                } else {
                    0
                }
            } else {
                self.sum(t + 1, remaining - c, acc, w)?
            };
            for (a, v) in acc.iter_mut().zip(&self.coords[t]) {
                *a -= v * c as i64;
            }
            total = total.checked_add(part).ok_or_else(|| Error::InvalidParameter("count overflows 128 bits".into()))?;
        }
        Ok(total)
    }
}

/// Exact and asymptotic rates for `copies` disjoint copies of `base`.
pub fn sanov_rate_disjoint_union(base: &Graph, copies: usize, k: usize, center: &Quotient, delta: &Q) -> Result<SanovReport> {
    check_query(k, center, delta)?;
    if copies == 0 || base.n() == 0 {
        return Err(Error::InvalidParameter("need at least one copy of a nonempty base graph".into()));
    }
    let types = base_types(base, k)?;
    let m = types.len();
    let compositions = binomials(copies + m)[copies + m - 1][m - 1];
    if compositions > COMPOSITION_LIMIT {
        return Err(Error::BudgetExceeded { needed: compositions, budget: COMPOSITION_LIMIT });
    }
    let n = copies * base.n();
    let window = ball_window(center, delta, n);
    let comp = Compositions {
        coords: types.iter().map(|t| key_coords(k, &t.key)).collect(),
        mult: types.iter().map(|t| t.multiplicity).collect(),
        binom: binomials(copies),
        window: &window,
    };
    let mut acc = vec![0i64; window.len()];
    let count = comp.sum(0, copies, &mut acc, 1)?;
    let finite = RateEstimate {
        value: rate_from_count(count, n, k),
        method: RateMethod::Sanov { copies },
        n,
        k,
        count: Some(count.to_string()),
        log_count: Some(ln_u128(count)),
        ci: None,
        censored: false,
    };

    let n0 = base.n() as f64;
    let log_total = n0 * (k as f64).ln();
    let log_p: Vec<f64> = types.iter().map(|t| ln_u128(t.multiplicity) - log_total).collect();
    let a: Vec<Vec<f64>> = types.iter().map(|t| key_coords(k, &t.key).iter().map(|&v| v as f64 / n0).collect()).collect();
    let d = to_f64(delta);
    let c: Vec<f64> = quotient_coords(center).iter().map(to_f64).collect();
    let lo: Vec<f64> = c.iter().map(|v| v - d).collect();
    let hi: Vec<f64> = c.iter().map(|v| v + d).collect();
    let (dual, primal) = min_kl_in_box(&log_p, &a, &lo, &hi);
    Ok(SanovReport { finite, asymptotic: dual / n0, primal: primal / n0, types })
}

/// `min KL(z ‖ p)` over distributions `z` with `lo ≤ Σ_m z_m a_m ≤ hi`,
/// by a log-barrier Newton ascent on the concave dual
///
/// ```text
/// φ(α, β) = -log Σ_m p_m exp(-a_m·(α - β)) - α·hi + β·lo,   α, β ≥ 0.
/// ```
///
/// Returns `(best dual value, KL of the recovered primal)`. Any dual value
/// is a lower bound on the minimum; a dual value above `max_m log(1/p_m)`
/// (the largest KL of any distribution) proves infeasibility and yields `+∞`.
pub fn min_kl_in_box(log_p: &[f64], a: &[Vec<f64>], lo: &[f64], hi: &[f64]) -> (f64, f64) {
    let d = lo.len();
    let cap = log_p.iter().map(|l| -l).fold(0.0, f64::max) + 1.0;
    let tilt = |lam: &[f64]| -> (f64, Vec<f64>) {
        let logits: Vec<f64> = log_p.iter().zip(a).map(|(lp, am)| lp - am.iter().zip(lam).map(|(x, l)| x * l).sum::<f64>()).collect();
        let lse = log_sum_exp(logits.iter().copied());
        (lse, logits.iter().map(|l| (l - lse).exp()).collect())
    };
    let phi = |al: &[f64], be: &[f64]| -> f64 {
        let lam: Vec<f64> = al.iter().zip(be).map(|(x, y)| x - y).collect();
        -tilt(&lam).0 - al.iter().zip(hi).map(|(x, h)| x * h).sum::<f64>() + be.iter().zip(lo).map(|(x, l)| x * l).sum::<f64>()
    };
    let mut al = vec![1.0; d];
    let mut be = vec![1.0; d];
    let mut best = phi(&al, &be);
    let mut t = 1.0;
    'outer: while t < 1e14 {
        for _ in 0..200 {
            let lam: Vec<f64> = al.iter().zip(&be).map(|(x, y)| x - y).collect();
            let (_, z) = tilt(&lam);
            let az: Vec<f64> = (0..d).map(|j| z.iter().zip(a).map(|(zm, am)| zm * am[j]).sum()).collect();
            let mut cov = vec![vec![0.0; d]; d];
            for (zm, am) in z.iter().zip(a) {
                for i in 0..d {
                    for j in 0..d {
                        cov[i][j] += zm * (am[i] - az[i]) * (am[j] - az[j]);
                    }
                }
            }
            // Gradient and negated Hessian of t·φ + Σ log α + Σ log β.
            let mut grad = vec![0.0; 2 * d];
            let mut neg_h = vec![vec![0.0; 2 * d]; 2 * d];
            for i in 0..d {
                grad[i] = t * (az[i] - hi[i]) + 1.0 / al[i];
                grad[d + i] = t * (lo[i] - az[i]) + 1.0 / be[i];
                for j in 0..d {
                    neg_h[i][j] = t * cov[i][j];
                    neg_h[i][d + j] = -t * cov[i][j];
                    neg_h[d + i][j] = -t * cov[i][j];
                    neg_h[d + i][d + j] = t * cov[i][j];
                }
                neg_h[i][i] += 1.0 / (al[i] * al[i]);
                neg_h[d + i][d + i] += 1.0 / (be[i] * be[i]);
            }
            let Some(step) = solve(neg_h, grad.clone()) else { break };
            let decrement: f64 = step.iter().zip(&grad).map(|(s, g)| s * g).sum();
            if decrement < 1e-12 {
                break;
            }
            let obj = |al: &[f64], be: &[f64]| t * phi(al, be) + al.iter().chain(be).map(|v| v.ln()).sum::<f64>();
            let f0 = obj(&al, &be);
            let mut s = 1.0f64;
            for (v, dv) in al.iter().chain(&be).zip(&step) {
                if *dv < 0.0 {
                    s = s.min(-0.99 * v / dv);
                }
            }
            let mut moved = false;
            while s > 1e-12 {
                let na: Vec<f64> = al.iter().zip(&step[..d]).map(|(v, dv)| v + s * dv).collect();
                let nb: Vec<f64> = be.iter().zip(&step[d..]).map(|(v, dv)| v + s * dv).collect();
                if obj(&na, &nb) >= f0 + 0.25 * s * decrement {
                    al = na;
                    be = nb;
                    moved = true;
                    break;
                }
                s *= 0.5;
            }
            best = best.max(phi(&al, &be));
            if best > cap {
                break 'outer;
            }
            if !moved {
                break;
            }
        }
        t *= 10.0;
    }
    if best > cap {
        return (f64::INFINITY, f64::INFINITY);
    }
    let lam: Vec<f64> = al.iter().zip(&be).map(|(x, y)| x - y).collect();
    let (_, z) = tilt(&lam);
    let kl: f64 = z.iter().zip(log_p).filter(|(zm, _)| **zm > 0.0).map(|(zm, lp)| zm * (zm.ln() - lp)).sum();
    (best.max(0.0), kl)
}
