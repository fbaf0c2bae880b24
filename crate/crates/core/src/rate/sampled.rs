//! Sampling estimators of the ball probability `P(G/σ ∈ B(c, δ))`.

use std::collections::HashMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ball_window, cell_meets_ball, cell_of_key, check_query, in_window, key_coords, RateEstimate, RateMethod};
use crate::coloring::Quotient;
use crate::enumerate::{key_of, recolor};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::log_sum_exp;
use crate::rational::Q;
use crate::rng::seeded;

/// Wilson score interval for `hits` successes out of `n` trials.
pub fn wilson(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IidConfig {
    pub samples: u64,
    pub seed: u64,
    /// Width of the Wilson interval in standard deviations.
    pub z: f64,
}

impl Default for IidConfig {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0, z: 3.0 }
    }
}

const IID_CHUNKS: u64 = 64;

/// Hit-or-miss estimate with uniform i.i.d. colorings. With no hits the
/// value is the rate at the upper Wilson bound (a lower confidence bound on
/// the rate) and the estimate is marked censored.
pub fn rate_iid(g: &Graph, k: usize, center: &Quotient, delta: &Q, cfg: &IidConfig) -> Result<RateEstimate> {
    check_query(k, center, delta)?;
    let n = g.n();
    let window = ball_window(center, delta, n);
    let hits: u64 = (0..IID_CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let share = cfg.samples / IID_CHUNKS + u64::from(chunk < cfg.samples % IID_CHUNKS);
            let mut rng = seeded(cfg.seed, &[5, chunk]);
            let mut colors = vec![0u8; n];
            let mut hits = 0;
            for _ in 0..share {
                for c in colors.iter_mut() {
                    *c = rng.random_range(0..k as u8);
                }
                if in_window(&key_coords(k, &key_of(g, &colors, k)), &window) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let (lo, hi) = wilson(hits, cfg.samples, cfg.z);
    let to_rate = |p: f64| if p <= 0.0 { f64::INFINITY } else { (-p.ln() / n as f64).max(0.0) };
    let censored = hits == 0;
    let value = if censored { to_rate(hi) } else { to_rate(hits as f64 / cfg.samples as f64) };
    Ok(RateEstimate {
        value,
        method: RateMethod::Iid { samples: cfg.samples, seed: cfg.seed, z: cfg.z },
        n,
        k,
        count: None,
        log_count: None,
        ci: Some((to_rate(hi), to_rate(lo))),
        censored,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlatHistogramConfig {
    pub seed: u64,
    /// Bin pitch of the Γ grid; defaults to the query radius.
    #[serde(default, with = "opt_q")]
    pub pitch: Option<Q>,
    pub stages: usize,
    pub flatness: f64,
    /// Cap on sweeps (n moves each) per stage.
    pub max_sweeps_per_stage: u64,
    /// Sweeps between flatness checks.
    pub check_every: u64,
}

mod opt_q {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::rational::{format_q, parse_q, Q};

    pub fn serialize<S: Serializer>(v: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(format_q).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
        Option::<String>::deserialize(d)?.map(|s| parse_q(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

impl Default for FlatHistogramConfig {
    fn default() -> Self {
        Self { seed: 0, pitch: None, stages: 20, flatness: 0.8, max_sweeps_per_stage: 20_000, check_every: 20 }
    }
}

/// Output of the flat-histogram walk.
#[derive(Clone, Debug, Serialize)]
pub struct FlatHistogramResult {
    pub estimate: RateEstimate,
    /// Visited bins with their normalized weights (estimated probability
    /// that a uniform coloring falls in the bin), sorted by cell.
    pub bins: Vec<(Vec<i64>, f64)>,
    /// Stages that ended on the sweep cap rather than a flat histogram.
    pub non_flat_stages: Vec<usize>,
    pub total_sweeps: u64,
}

/// Wang–Landau estimate of the density of states over Γ cells, using
/// single-vertex recoloring moves. Bins whose closure meets the ball are
/// summed.
pub fn rate_flat_histogram(g: &Graph, k: usize, center: &Quotient, delta: &Q, cfg: &FlatHistogramConfig) -> Result<FlatHistogramResult> {
    check_query(k, center, delta)?;
    let n = g.n();
    if n == 0 || k < 2 {
        return Err(Error::InvalidParameter("flat-histogram sampling needs n >= 1 and k >= 2".into()));
    }
    if !(0.0..1.0).contains(&cfg.flatness) || cfg.stages == 0 {
        return Err(Error::InvalidParameter("flatness must lie in [0, 1) and stages must be positive".into()));
    }
    let pitch = cfg.pitch.unwrap_or(*delta);
    let mut rng = seeded(cfg.seed, &[6]);
    let mut colors: Vec<u8> = (0..n).map(|_| rng.random_range(0..k as u8)).collect();
    let mut key = key_of(g, &colors, k);

    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut cells: Vec<Vec<i64>> = Vec::new();
    let mut ln_g: Vec<f64> = Vec::new();
    let mut hist: Vec<u64> = Vec::new();
    let mut lookup = |cell: Vec<i64>, ln_g: &mut Vec<f64>, hist: &mut Vec<u64>| -> usize {
        if let Some(&i) = index.get(&cell) {
            return i;
        }
        let floor = ln_g.iter().copied().fold(f64::INFINITY, f64::min);
        ln_g.push(if floor.is_finite() { floor } else { 0.0 });
        hist.push(0);
        cells.push(cell.clone());
        index.insert(cell, ln_g.len() - 1);
        ln_g.len() - 1
    };
    let mut cur = lookup(cell_of_key(k, n, &key, &pitch), &mut ln_g, &mut hist);

    let mut ln_f = 1.0;
    let mut non_flat = Vec::new();
    let mut total_sweeps = 0;
    for stage in 0..cfg.stages {
        hist.iter_mut().for_each(|h| *h = 0);
        let mut sweeps = 0;
        let flat = loop {
            for _ in 0..cfg.check_every * n as u64 {
                let v = rng.random_range(0..n);
                let old = colors[v];
                let new = (old + rng.random_range(1..k as u8)) % k as u8;
                recolor(g, k, &mut key, &colors, v, old, new);
                let cand = lookup(cell_of_key(k, n, &key, &pitch), &mut ln_g, &mut hist);
                let accept = ln_g[cur] >= ln_g[cand] || rng.random::<f64>() < (ln_g[cur] - ln_g[cand]).exp();
                if accept {
                    colors[v] = new;
                    cur = cand;
                } else {
                    recolor(g, k, &mut key, &colors, v, new, old);
                }
                ln_g[cur] += ln_f;
                hist[cur] += 1;
            }
            sweeps += cfg.check_every;
            let mean = hist.iter().sum::<u64>() as f64 / hist.len() as f64;
            let min = *hist.iter().min().expect("at least one bin") as f64;
            if min >= cfg.flatness * mean {
                break true;
            }
            if sweeps >= cfg.max_sweeps_per_stage {
                break false;
            }
        };
        total_sweeps += sweeps;
        if !flat {
            non_flat.push(stage);
        }
        ln_f /= 2.0;
    }

    let norm = log_sum_exp(ln_g.iter().copied());
    let fc = center.flatten();
    let in_ball = log_sum_exp(cells.iter().zip(&ln_g).filter(|(c, _)| cell_meets_ball(c, &pitch, &fc, delta)).map(|(_, &l)| l - norm));
    let value = if in_ball == f64::NEG_INFINITY { f64::INFINITY } else { (-in_ball / n as f64).max(0.0) };
    let mut bins: Vec<(Vec<i64>, f64)> = cells.into_iter().zip(ln_g.iter().map(|l| (l - norm).exp())).collect();
    bins.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(FlatHistogramResult {
        estimate: RateEstimate {
            value,
            method: RateMethod::FlatHistogram { seed: cfg.seed, stages: cfg.stages, sweeps: total_sweeps, pitch, all_flat: non_flat.is_empty() },
            n,
            k,
            count: None,
            log_count: None,
            ci: None,
            censored: false,
        },
        bins,
        non_flat_stages: non_flat,
        total_sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_BUDGET;
    use crate::numeric::ln_factorial;
    use crate::rate::rate_exact;
    use crate::rational::q;

    fn isolated_center(x0: Q) -> Quotient {
        let z = q(0, 1);
        Quotient::new(vec![x0, q(1, 1) - x0], vec![vec![z, z], vec![z, z]], 0).unwrap()
    }

    #[test]
    fn wilson_brackets_the_proportion() {
        let (lo, hi) = wilson(30, 100, 1.96);
        assert!(lo < 0.3 && 0.3 < hi);
        assert_eq!(wilson(0, 100, 3.0).0, 0.0);
        assert_eq!(wilson(100, 100, 3.0).1, 1.0);
    }

    #[test]
    fn iid_agrees_with_exact() {
        let g = Graph::empty(10);
        let c = isolated_center(q(1, 2));
        let d = q(1, 1000);
        let exact = rate_exact(&g, 2, &c, &d, DEFAULT_BUDGET).unwrap().value;
        let est = rate_iid(&g, 2, &c, &d, &IidConfig { samples: 200_000, seed: 11, z: 3.0 }).unwrap();
        let (lo, hi) = est.ci.unwrap();
        assert!(lo <= exact && exact <= hi, "{exact} not in {lo}..{hi}");
        assert!(!est.censored);
    }

    #[test]
    fn iid_whole_space_and_censoring() {
        let g = Graph::cycle(6).unwrap();
        let c = isolated_center(q(1, 2));
        let all = rate_iid(&g, 2, &c, &q(3, 1), &IidConfig { samples: 1000, seed: 1, z: 3.0 }).unwrap();
        assert_eq!(all.value, 0.0);
        let none = rate_iid(&g, 2, &c, &q(1, 100), &IidConfig { samples: 1000, seed: 1, z: 3.0 }).unwrap();
        assert!(none.censored && none.value.is_finite() && none.ci.unwrap().1 == f64::INFINITY);
    }

    #[test]
    fn flat_histogram_on_a_rare_ball() {
        let n = 40;
        let g = Graph::empty(n);
        let c = isolated_center(q(9, 10));
        let d = q(1, 200);
        let cfg = FlatHistogramConfig { seed: 3, ..Default::default() };
        let res = rate_flat_histogram(&g, 2, &c, &d, &cfg).unwrap();
        let closed = 2f64.ln() - (ln_factorial(40) - ln_factorial(36) - ln_factorial(4)) / n as f64;
        let rel = (res.estimate.value - closed).abs() / closed;
        assert!(rel < 0.05, "estimate {} vs {closed}", res.estimate.value);
        assert_eq!(res.bins.len(), 41);
        let total: f64 = res.bins.iter().map(|b| b.1).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
