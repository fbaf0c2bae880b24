use num_traits::{Signed, Zero};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Emitter, Verdict};
use crate::coloring::{partition_set, point_set_distance, quotient, set_distance, Coloring, Method, Quotient};
use crate::enumerate::fold_colorings;
use crate::error::{Error, Result};
use crate::graph::{lattice, random_bipartite_regular, random_regular, Graph, GraphFamily};
use crate::hom::{deletion_witness_report, dyadic_schedule, free_energy, hom_density_from, lambda_limit, maxcut_from_beta, TargetGraph};
use crate::neighborhood::bs_frequencies;
use crate::numeric::fmt_ext;
use crate::rate::diagnostics::{perturbation_stability, refinement_diagnostic, thickening_check, GridSample};
use crate::rate::sanov::sanov_rate_disjoint_union;
use crate::rate::RateEngine;
use crate::rational::{format_q, q, Q};
use crate::variational::{gibbs_bucket_decomposition, variational_free_energy};

fn qs(v: &Q) -> String {
    format_q(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct C4c6Params {
    /// Number of cycles in each union.
    pub copies: usize,
    pub k: usize,
    /// Radius for the neighborhood comparison.
    pub r: usize,
}

impl Default for C4c6Params {
    fn default() -> Self {
        Self { copies: 6, k: 2, r: 2 }
    }
}

/// Closed walks of length 4 in a cycle of length `m`, from the adjacency
/// matrix directly.
fn closed_four_walks(m: usize) -> i64 {
    let a: Vec<Vec<i64>> = (0..m).map(|i| (0..m).map(|j| i64::from((i + 1) % m == j || (j + 1) % m == i)).collect()).collect();
    let mul =
        |x: &Vec<Vec<i64>>, y: &Vec<Vec<i64>>| -> Vec<Vec<i64>> { (0..m).map(|i| (0..m).map(|j| (0..m).map(|l| x[i][l] * y[l][j]).sum()).collect()).collect() };
    let a2 = mul(&a, &a);
    let a4 = mul(&a2, &a2);
    (0..m).map(|i| a4[i][i]).sum()
}

/// Unions of 4-cycles and of 6-cycles: partition sets within `2k/n`, but
/// different 4-cycle densities and disjoint neighborhood types.
pub fn c4c6_partition_not_left(p: &C4c6Params, budget: u128, out: &mut Emitter) -> Result<Verdict> {
    let c4 = Graph::cycle(4)?;
    let c6 = Graph::cycle(6)?;
    let (a, b) = (c4.copies(p.copies), c6.copies(p.copies));
    let sa = partition_set(&a, p.k, Method::Exact, budget)?;
    let sb = partition_set(&b, p.k, Method::Exact, budget)?;
    let distance = set_distance(&sa, &sb)?;
    let bound = Q::new(2 * p.k as i64, p.copies as i64);
    let (da, db) = (hom_density_from(&c4, &a)?, hom_density_from(&c4, &b)?);
    let gap = da - db;
    let expected_gap = Q::new(closed_four_walks(4), 4) - Q::new(closed_four_walks(6), 6);
    let fa = bs_frequencies(&a, p.r)?;
    let fb = bs_frequencies(&b, p.r)?;
    let bs_distance = fa.distance(&fb);
    let passed = distance <= bound && gap == expected_gap && gap.is_positive();
    out.json(
        "c4c6.json",
        &json!({
            "partition_points": [sa.len(), sb.len()],
            "partition_distance": qs(&distance),
            "distance_bound": qs(&bound),
            "c4_density": [qs(&da), qs(&db)],
            "density_gap": qs(&gap),
            "expected_gap": qs(&expected_gap),
            "neighborhood_distance": qs(&bs_distance),
        }),
    )?;
    Ok(Verdict {
        passed,
        criterion: format!("partition-set distance <= 2k/n = {} and 4-cycle density gap equals the closed-walk oracle {}", qs(&bound), qs(&expected_gap)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpanderParams {
    pub n: usize,
    pub degree: usize,
    pub targets: usize,
}

impl Default for ExpanderParams {
    fn default() -> Self {
        Self { n: 14, degree: 3, targets: 5 }
    }
}

/// Exact edge expansion `min |∂S| / |S|` over nonempty `S` with `|S| ≤ n/2`.
pub fn edge_expansion(g: &Graph) -> Result<Q> {
    if g.n() < 2 {
        return Err(Error::InvalidParameter("edge expansion needs two vertices".into()));
    }
    let n = g.n();
    let best = fold_colorings(
        n,
        2,
        u128::MAX,
        || None::<Q>,
        |best, c| {
            let size = c.iter().filter(|&&x| x == 1).count();
            if size == 0 || 2 * size > n {
                return;
            }
            let cut = g.edges().iter().filter(|&&(u, v)| c[u] != c[v]).count();
            let r = Q::new(cut as i64, size as i64);
            if best.is_none_or(|b| r < b) {
                *best = Some(r);
            }
        },
        |a, b| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        },
    )?;
    Ok(best.expect("some set qualifies"))
}

/// Random soft-core target with 2 or 3 nodes.
pub fn random_soft_target(rng: &mut crate::rng::Rng) -> TargetGraph {
    let k = rng.random_range(2..=3);
    let alpha = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
    let mut a = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            a[i][j] = rng.random_range(0.2..3.0);
            a[j][i] = a[i][j];
        }
    }
    TargetGraph::new(alpha, a).expect("valid random target")
}

/// An expander and two copies of it: equal free energies for every target,
/// yet only the doubled graph has a balanced coloring with no cut edges.
pub fn expander_right_not_partition(p: &ExpanderParams, seed: u64, budget: u128, out: &mut Emitter) -> Result<Verdict> {
    let g = random_regular(p.n, p.degree, seed, 1)?;
    let gg = g.copies(2);
    let mut rng = crate::rng::seeded(seed, &[9]);
    let mut rows = Vec::new();
    let mut all_equal = true;
    for t in 0..p.targets {
        let h = random_soft_target(&mut rng);
        let (f1, f2) = (free_energy(&g, &h, budget)?, free_energy(&gg, &h, budget)?);
        all_equal &= f1 == f2;
        rows.push(vec![t.to_string(), h.k().to_string(), fmt_ext(f1), fmt_ext(f2), (f1 == f2).to_string()]);
    }
    out.csv("free_energy.csv", &["target", "k", "f_single", "f_double", "equal"], &rows)?;
    let single = partition_set(&g, 2, Method::Exact, budget)?;
    let double = partition_set(&gg, 2, Method::Exact, budget)?;
    let diag = Q::new(g.edge_count() as i64, g.n() as i64);
    let zero_cut = Quotient::new(vec![q(1, 2), q(1, 2)], vec![vec![diag, Q::zero()], vec![Q::zero(), diag]], g.degree_bound())?;
    let present = double.contains(&zero_cut);
    let distance = point_set_distance(&zero_cut, &single)?;
    let gamma = edge_expansion(&g)?;
    let bound = q(1, 4).min(gamma / 4);
    let passed = all_equal && present && distance >= bound && gamma.is_positive();
    out.json(
        "expander.json",
        &json!({
            "n": g.n(),
            "edges": g.edge_count(),
            "edge_expansion": qs(&gamma),
            "zero_cut_in_doubled": present,
            "zero_cut_distance_single": qs(&distance),
            "distance_bound": qs(&bound),
            "partition_points": [single.len(), double.len()],
            "free_energies_equal": all_equal,
        }),
    )?;
    Ok(Verdict {
        passed,
        criterion: "free energies of G and G+G agree exactly; the balanced zero-cut point lies in the doubled partition set and at distance >= min(1/4, expansion/4) from the single one".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularBipartiteParams {
    pub n: usize,
    pub degree: usize,
    pub beta: f64,
    pub r: usize,
}

impl Default for RegularBipartiteParams {
    fn default() -> Self {
        Self { n: 16, degree: 3, beta: 20.0, r: 1 }
    }
}

/// A random regular graph and a random bipartite regular graph: close
/// neighborhood statistics, separated maximum cuts.
pub fn regular_bipartite_left_not_right(p: &RegularBipartiteParams, seed: u64, budget: u128, out: &mut Emitter) -> Result<Verdict> {
    let odd = random_regular(p.n, p.degree, seed, 1)?;
    let even = random_bipartite_regular(p.n, p.degree, seed, 2)?;
    let ro = maxcut_from_beta(&odd, &[p.beta], budget)?;
    let re = maxcut_from_beta(&even, &[p.beta], budget)?;
    let n = p.n as f64;
    let (mo, me) = (ro.exact.expect("small graph"), re.exact.expect("small graph"));
    let separated = ro.rows[0].upper / n < re.rows[0].lower / n;
    let bs = bs_frequencies(&odd, p.r)?.distance(&bs_frequencies(&even, p.r)?);
    let passed = me == even.edge_count() && mo < odd.edge_count() && ro.bracketed == Some(true) && re.bracketed == Some(true) && separated;
    out.json(
        "maxcut.json",
        &json!({
            "regular": ro,
            "bipartite": re,
            "maxcut_per_vertex": [mo as f64 / n, me as f64 / n],
            "bounds_separated": separated,
            "neighborhood_distance": qs(&bs),
        }),
    )?;
    Ok(Verdict {
        passed,
        criterion: "bipartite graph cuts every edge, the regular graph does not, both brackets hold, and the per-vertex cut bounds are disjoint".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnionLdParams {
    pub base: GraphFamily,
    pub copies: Vec<usize>,
    pub k: usize,
    #[serde(with = "crate::rational::as_str")]
    pub delta: Q,
}

impl Default for UnionLdParams {
    fn default() -> Self {
        Self { base: GraphFamily::Path { length: Some(2) }, copies: vec![4, 8, 16, 32], k: 2, delta: q(1, 8) }
    }
}

/// Disjoint unions of a fixed graph: finite-size rates against the
/// type-counting limit.
pub fn union_ld(p: &UnionLdParams, _budget: u128, out: &mut Emitter) -> Result<Verdict> {
    let base = p.base.realize(1)?;
    let sigma = Coloring::new((0..base.n()).map(|v| (v % p.k) as u8).collect(), p.k)?;
    let center = quotient(&base, &sigma)?;
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    let mut bounded = true;
    for &c in &p.copies {
        let rep = sanov_rate_disjoint_union(&base, c, p.k, &center, &p.delta)?;
        let gap = rep.finite.value - rep.asymptotic;
        bounded &= gap >= -1e-9;
        gaps.push(gap);
        rows.push(vec![c.to_string(), rep.finite.n.to_string(), fmt_ext(rep.finite.value), fmt_ext(rep.asymptotic), fmt_ext(gap)]);
    }
    out.csv("rates.csv", &["copies", "n", "finite", "asymptotic", "gap"], &rows)?;
    let shrinks = gaps.len() < 2 || gaps.last() < gaps.first();
    Ok(Verdict {
        passed: bounded && shrinks,
        criterion: "every finite rate is at least the type-counting limit and the gap shrinks from the smallest to the largest union".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeLdParams {
    pub d: usize,
    /// Half-widths `n` of the lattices `{-n..n}^d`.
    pub sizes: Vec<usize>,
    #[serde(with = "crate::rational::as_str")]
    pub delta: Q,
    /// Half-width of the lattice used for the refinement check (at 4 colors).
    pub refine_size: usize,
    /// Length of the path compared with the cycle of the same length.
    pub path_length: usize,
}

impl Default for LatticeLdParams {
    fn default() -> Self {
        Self { d: 2, sizes: vec![1, 2], delta: q(1, 4), refine_size: 1, path_length: 16 }
    }
}

/// Lattices: rates at the checkerboard quotient across sizes, the
/// refinement inequality, and stability under the boundary edit that
/// turns a path into a cycle.
pub fn lattice_ld(p: &LatticeLdParams, budget: u128, out: &mut Emitter) -> Result<Verdict> {
    let mut rows = Vec::new();
    for &m in &p.sizes {
        let g = lattice(p.d, m)?;
        let sigma = Coloring::new(checkerboard(p.d, 2 * m + 1), 2)?;
        let center = quotient(&g, &sigma)?;
        let est = RateEngine::build(&g, 2, budget)?.estimate(&center, &p.delta)?;
        rows.push(vec![m.to_string(), g.n().to_string(), fmt_ext(est.value)]);
    }
    out.csv("checkerboard_rates.csv", &["half_width", "n", "rate"], &rows)?;
    let g = lattice(p.d, p.refine_size)?;
    let fine = RateEngine::build(&g, 4, budget)?;
    let centers: Vec<Quotient> = fine.histogram().quotients().into_iter().map(|(c, _)| c).collect();
    let refine = refinement_diagnostic(&g, &centers, &(p.delta / 4), budget)?;
    let path = Graph::path(p.path_length)?;
    let cycle = Graph::cycle(p.path_length)?;
    let pcenters: Vec<Quotient> = RateEngine::build(&path, 2, budget)?.histogram().quotients().into_iter().map(|(c, _)| c).collect();
    let delta_p = Q::new(4, p.path_length as i64);
    let pert = perturbation_stability(&path, &cycle, 2, &pcenters, &delta_p, budget)?;
    out.json(
        "lattice.json",
        &json!({
            "refinement_centers": refine.rows.len(),
            "refinement_violations": refine.violations,
            "perturbation": {
                "edit_distance": pert.edit_distance,
                "sensitivity": qs(&pert.sensitivity),
                "max_shift": qs(&pert.max_shift),
                "exact_regime": pert.exact_regime,
                "centers": pert.rows.len(),
                "violations": pert.violations,
            },
        }),
    )?;
    Ok(Verdict {
        passed: refine.violations == 0 && pert.exact_regime && pert.violations == 0,
        criterion: "refinement inequality holds at every occupied 4-color quotient and path/cycle rates satisfy the perturbation inequalities".into(),
    })
}

/// `Σ coordinates mod 2` on a lattice of the given side.
fn checkerboard(d: usize, side: usize) -> Vec<u8> {
    let n = side.pow(d as u32);
    (0..n)
        .map(|mut v| {
            let mut s = 0;
            for _ in 0..d {
                s += v % side;
                v /= side;
            }
            (s % 2) as u8
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardcoreSoftcoreParams {
    pub lengths: Vec<usize>,
    pub steps: u32,
    pub epsilon: f64,
    pub lambda: f64,
    pub witness_length: usize,
}

impl Default for HardcoreSoftcoreParams {
    fn default() -> Self {
        Self { lengths: vec![5, 6, 7, 8, 9, 10], steps: 12, epsilon: 0.2, lambda: 0.01, witness_length: 5 }
    }
}

/// Softened hard-core free energies on cycles, and the edge-deletion
/// witness on an odd cycle.
pub fn hardcore_softcore(p: &HardcoreSoftcoreParams, budget: u128, out: &mut Emitter) -> Result<Verdict> {
    let h = TargetGraph::hard_core_k2();
    let table = lambda_limit(&GraphFamily::Cycle { length: None }, &h, &p.lengths, &dyadic_schedule(p.steps), budget)?;
    out.files.insert("lambda.csv".into(), table.to_csv()?);
    let g = Graph::cycle(p.witness_length)?;
    let w = deletion_witness_report(&g, &h, p.epsilon, p.lambda, budget)?;
    out.json("witness.json", &w)?;
    Ok(Verdict {
        passed: table.monotone && w.satisfied(),
        criterion: "every row of the lambda table is monotone and the deletion witness meets both conditions".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationalParams {
    pub copies: usize,
    #[serde(with = "crate::rational::as_str")]
    pub delta: Q,
    pub beta: f64,
}

impl Default for VariationalParams {
    fn default() -> Self {
        Self { copies: 8, delta: q(1, 16), beta: 1.0 }
    }
}

/// Bucket decomposition and variational minimum on disjoint edges.
pub fn variational(p: &VariationalParams, budget: u128, out: &mut Emitter) -> Result<Verdict> {
    let g = Graph::complete(2).copies(p.copies);
    let h = TargetGraph::cut_weight(p.beta)?;
    let gibbs = gibbs_bucket_decomposition(&g, &h, &p.delta, true, budget)?;
    let var = variational_free_energy(&g, &h, &p.delta, budget)?;
    out.json("gibbs.json", &gibbs)?;
    out.json("variational.json", &var)?;
    let tol = 1e-12;
    let identity_ok = gibbs.identity.is_some_and(|v| (v - gibbs.exact).abs() <= tol * gibbs.exact.abs().max(1.0));
    let passed = gibbs.contained && gibbs.upper - gibbs.lower <= gibbs.width_bound + tol && var.gap.abs() <= var.slack + tol && identity_ok;
    Ok(Verdict {
        passed,
        criterion: "exact log Z lies in the bucket sandwich, the per-cell identity reproduces it, and the variational gap is within its slack".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SigmaKRateParams {
    pub isolated: Vec<usize>,
    pub ks: Vec<usize>,
    #[serde(with = "crate::rational::as_str")]
    pub delta: Q,
    pub edge_copies: usize,
    /// Sampled grid points for the 4-color check on the edge union.
    pub samples: usize,
}

impl Default for SigmaKRateParams {
    fn default() -> Self {
        Self { isolated: vec![10, 12, 14], ks: vec![2, 3], delta: q(1, 8), edge_copies: 8, samples: 3000 }
    }
}

/// Finite empirical rates on the grid against the thickened partition set.
pub fn sigma_k_rate(p: &SigmaKRateParams, seed: u64, budget: u128, out: &mut Emitter) -> Result<Verdict> {
    let mut reports = Vec::new();
    for &n in &p.isolated {
        for &k in &p.ks {
            reports.push((format!("isolated-{n}"), thickening_check(&Graph::empty(n), k, &p.delta, GridSample::Exhaustive, budget)?));
        }
    }
    let edges = Graph::complete(2).copies(p.edge_copies);
    reports.push(("edges-k2".into(), thickening_check(&edges, 2, &p.delta, GridSample::Exhaustive, budget)?));
    reports.push(("edges-k4".into(), thickening_check(&edges, 4, &p.delta, GridSample::Sampled { count: p.samples, seed }, budget)?));
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|(name, r)| {
            vec![
                name.clone(),
                r.k.to_string(),
                r.candidates.to_string(),
                r.finite.to_string(),
                r.near.to_string(),
                r.mismatches.to_string(),
                fmt_ext(r.max_finite_rate),
            ]
        })
        .collect();
    out.csv("thickening.csv", &["instance", "k", "grid_points", "finite", "near", "mismatches", "max_finite_rate"], &rows)?;
    Ok(Verdict {
        passed: reports.iter().all(|(_, r)| r.passed()),
        criterion: "on every grid point the rate is finite exactly when the point is within delta of the partition set".into(),
    })
}
