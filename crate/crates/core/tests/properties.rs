//! Property tests for the invariants each module promises.

use num_traits::{Signed, Zero};
use proptest::prelude::*;

use sparse_ld::coloring::{partition_set, quotient, set_distance, Coloring, Method, Quotient, QuotientSet};
use sparse_ld::enumerate::DEFAULT_BUDGET;
use sparse_ld::graph::{edit_distance_iso, edit_distance_labeled, GraphFamily};
use sparse_ld::hom::{hom_count, HomAlgorithm, TargetGraph};
use sparse_ld::measures::{build_measures, d_var, discretize_coloring, project_tk, quotient_to_step, RealColoring};
use sparse_ld::neighborhood::{ball, ball_size_bound, bs_frequencies, canonical_key, colored_frequencies};
use sparse_ld::rate::{bucket_histogram, RateEngine};
use sparse_ld::rational::{q, to_f64, Q};
use sparse_ld::variational::{energy, gibbs_bucket_decomposition, variational_free_energy};
use sparse_ld::Graph;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
            let edges = pairs.zip(bits).filter(|(_, b)| *b).map(|(e, _)| e).collect();
            Graph::with_observed_bound(n, edges).unwrap()
        })
    })
}

fn colored_graph(max_n: usize, max_k: usize) -> impl Strategy<Value = (Graph, Coloring)> {
    (graph_strategy(max_n), 1..=max_k).prop_flat_map(|(g, k)| {
        let n = g.n();
        proptest::collection::vec(0..k as u8, n).prop_map(move |c| (g.clone(), Coloring::new(c, k).unwrap()))
    })
}

fn relabel(g: &Graph, perm: &[usize]) -> Graph {
    Graph::new(g.n(), g.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect(), g.degree_bound()).unwrap()
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

fn soft_target(k: usize) -> impl Strategy<Value = TargetGraph> {
    (proptest::collection::vec(0.3f64..2.5, k), proptest::collection::vec(0.1f64..3.0, k * k)).prop_map(move |(alpha, raw)| {
        let a = (0..k).map(|i| (0..k).map(|j| raw[i.min(j) * k + i.max(j)]).collect()).collect();
        TargetGraph::new(alpha, a).unwrap()
    })
}

fn adjacency(g: &Graph) -> Vec<Vec<usize>> {
    (0..g.n()).map(|v| g.neighbors(v).to_vec()).collect()
}

/// Isomorphism-invariant form: the smallest rooted canonical key.
fn unrooted_form(g: &Graph) -> Vec<u8> {
    let adj = adjacency(g);
    (0..g.n()).map(|r| canonical_key(&adj, r, &vec![0; g.n()]).unwrap()).min().unwrap()
}

fn combine(a: &Quotient, b: &Quotient, t: Q) -> Quotient {
    let k = a.k();
    let x = (0..k).map(|i| a.x()[i] * t + b.x()[i] * (Q::from_integer(1) - t)).collect();
    let xx = (0..k).map(|i| (0..k).map(|j| a.xx(i, j) * t + b.xx(i, j) * (Q::from_integer(1) - t)).collect()).collect();
    Quotient::new(x, xx, a.degree_bound().max(b.degree_bound())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graphs_respect_their_degree_bound(g in graph_strategy(10)) {
        prop_assert!((0..g.n()).all(|v| g.degree(v) <= g.degree_bound()));
        prop_assert!(g.edges().iter().all(|&(u, v)| u < v && v < g.n()));
    }

    #[test]
    fn regular_realizations_are_pure_and_regular(half in 3usize..10, degree in 1usize..=4, seed in any::<u64>(), index in 1usize..5) {
        let n = 2 * half;
        let fam = GraphFamily::RandomRegular { n: Some(n), degree, seed };
        let g = fam.realize(index).unwrap();
        prop_assert_eq!(g.n(), n);
        prop_assert!((0..n).all(|v| g.degree(v) == degree));
        prop_assert_eq!(g.to_json(), fam.realize(index).unwrap().to_json());
    }

    #[test]
    fn iso_distance_bounds_and_zero_set(g in graph_strategy(6), h_bits in proptest::collection::vec(any::<bool>(), 15), perm in permutation(6)) {
        let n = g.n();
        let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        let h = Graph::with_observed_bound(n, pairs.zip(h_bits).filter(|(_, b)| *b).map(|(e, _)| e).collect()).unwrap();
        let iso = edit_distance_iso(&g, &h).unwrap();
        prop_assert!(iso <= edit_distance_labeled(&g, &h).unwrap());
        prop_assert_eq!(iso == 0, unrooted_form(&g) == unrooted_form(&h));
        let p: Vec<usize> = perm.into_iter().filter(|&v| v < n).collect();
        prop_assert_eq!(edit_distance_iso(&g, &relabel(&g, &p)).unwrap(), 0);
    }

    #[test]
    fn quotient_is_color_equivariant((g, sigma) in colored_graph(8, 4), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let k = sigma.k();
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(&mut sparse_ld::rng::seeded(seed, &[]));
        let direct = quotient(&g, &sigma.permuted(&perm).unwrap()).unwrap();
        prop_assert_eq!(direct, quotient(&g, &sigma).unwrap().permuted(&perm));
    }

    #[test]
    fn quotient_of_union_is_weighted_average((g1, s1) in colored_graph(6, 3), (g2, s2) in colored_graph(6, 3)) {
        prop_assume!(s1.k() == s2.k());
        let k = s1.k();
        let u = Graph::disjoint_union(&[&g1, &g2]);
        let qu = quotient(&u, &s1.concat(&s2).unwrap()).unwrap();
        let (q1, q2) = (quotient(&g1, &s1).unwrap(), quotient(&g2, &s2).unwrap());
        let w = Q::new(g1.n() as i64, u.n() as i64);
        let avg = combine(&q1, &q2, w);
        prop_assert_eq!(qu.flatten(), avg.flatten());
        prop_assert_eq!(qu.k(), k);
    }

    #[test]
    fn one_color_partition_set_is_a_point(g in graph_strategy(8)) {
        let s = partition_set(&g, 1, Method::Exact, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(s.len(), 1);
        let p = s.points.iter().next().unwrap();
        prop_assert_eq!(p.x()[0], Q::from_integer(1));
        prop_assert_eq!(p.xx(0, 0), Q::new(2 * g.edge_count() as i64, g.n() as i64));
    }

    #[test]
    fn sampled_partition_set_is_a_subset(g in graph_strategy(7), k in 1usize..=3, seed in any::<u64>()) {
        let exact = partition_set(&g, k, Method::Exact, DEFAULT_BUDGET).unwrap();
        let sampled = partition_set(&g, k, Method::Sampled { budget: 200, seed }, DEFAULT_BUDGET).unwrap();
        prop_assert!(sampled.points.is_subset(&exact.points));
    }

    #[test]
    fn set_distance_is_a_metric(a in graph_strategy(5), b in graph_strategy(5), c in graph_strategy(5)) {
        let set = |g: &Graph| -> QuotientSet { partition_set(g, 2, Method::Exact, DEFAULT_BUDGET).unwrap() };
        let (sa, sb, sc) = (set(&a), set(&b), set(&c));
        let d = |x: &QuotientSet, y: &QuotientSet| set_distance(x, y).unwrap();
        prop_assert!(d(&sa, &sa).is_zero());
        prop_assert_eq!(d(&sa, &sb), d(&sb, &sa));
        prop_assert!(d(&sa, &sc) <= d(&sa, &sb) + d(&sb, &sc));
        prop_assert_eq!(d(&sa, &sb).is_zero(), sa == sb);
    }

    #[test]
    fn projection_conserves_mass_and_commutes(g in graph_strategy(8), k in 1usize..=5, seed in any::<u64>()) {
        let sigma = RealColoring::uniform(g.n(), seed, &[k]);
        let step = project_tk(&build_measures(&g, &sigma).unwrap(), k).unwrap();
        prop_assert_eq!(step.rho().iter().sum::<Q>(), Q::from_integer(1));
        prop_assert_eq!(step.mu().iter().sum::<Q>(), Q::new(2 * g.edge_count() as i64, g.n() as i64));
        let via_quotient = quotient_to_step(&quotient(&g, &discretize_coloring(&sigma, k).unwrap()).unwrap());
        prop_assert_eq!(step.rho(), via_quotient.rho());
        prop_assert_eq!(step.mu(), via_quotient.mu());
    }

    #[test]
    fn d_var_is_a_metric((g, s) in colored_graph(6, 3), seeds in any::<[u8; 2]>()) {
        let k = s.k();
        let other = |seed: u8| {
            let colors: Vec<u8> = (0..g.n()).map(|v| ((v as u64 * 7 + seed as u64) % k as u64) as u8).collect();
            quotient_to_step(&quotient(&g, &Coloring::new(colors, k).unwrap()).unwrap())
        };
        let a = quotient_to_step(&quotient(&g, &s).unwrap());
        let (b, c) = (other(seeds[0]), other(seeds[1]));
        let d = |x, y| d_var(x, y).unwrap();
        prop_assert!(d(&a, &a).is_zero());
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }

    #[test]
    fn rates_are_monotone_in_radius_and_bounded(g in graph_strategy(8), k in 2usize..=3, idx in any::<prop::sample::Index>()) {
        let engine = RateEngine::build(&g, k, DEFAULT_BUDGET).unwrap();
        let qs = engine.histogram().quotients();
        let center = &qs[idx.index(qs.len())].0;
        let radii = [q(0, 1), q(1, 16), q(1, 8), q(1, 4), q(1, 2)];
        let counts: Vec<u128> = radii.iter().filter(|r| r.is_positive()).map(|r| engine.count_ball(center, r).unwrap()).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        for r in radii.iter().filter(|r| r.is_positive()) {
            let v = engine.estimate(center, r).unwrap().value;
            prop_assert!(v.is_finite() && v <= (k as f64).ln() + 1e-12);
        }
        let total = bucket_histogram(&g, k, &q(1, 8), DEFAULT_BUDGET).unwrap().total();
        prop_assert_eq!(total, (k as u128).pow(g.n() as u32));
    }

    #[test]
    fn soft_core_window(g in graph_strategy(8), h in soft_target(3)) {
        let lp = hom_count(&g, &h, HomAlgorithm::Components, DEFAULT_BUDGET).unwrap();
        let k = h.k() as f64;
        let d = g.degree_bound() as f64;
        // One α factor and at most D/2 edge factors per vertex.
        let lo = k.ln() + (d + 1.0) * h.alpha_min().min(h.a_min()).ln().min(0.0);
        let hi = k.ln() + (d + 1.0) * h.alpha_max().max(h.a_max()).ln().max(0.0);
        prop_assert!(lo - 1e-12 <= lp.per_vertex && lp.per_vertex <= hi + 1e-12, "{} not in [{lo}, {hi}]", lp.per_vertex);
    }

    #[test]
    fn deleting_an_edge_moves_log_hom_within_weight_range(g in graph_strategy(8), h in soft_target(2), pick in any::<prop::sample::Index>()) {
        prop_assume!(g.edge_count() > 0);
        let e = g.edges()[pick.index(g.edge_count())];
        let full = hom_count(&g, &h, HomAlgorithm::Brute, DEFAULT_BUDGET).unwrap().log_value;
        let cut = hom_count(&g.without_edges(&[e]), &h, HomAlgorithm::Brute, DEFAULT_BUDGET).unwrap().log_value;
        let diff = full - cut;
        prop_assert!(h.a_min().ln() - 1e-12 <= diff && diff <= h.a_max().ln() + 1e-12);
    }

    #[test]
    fn log_hom_adds_over_disjoint_unions(g1 in graph_strategy(6), g2 in graph_strategy(6), h in soft_target(3)) {
        let u = Graph::disjoint_union(&[&g1, &g2]);
        let l = |g: &Graph| hom_count(g, &h, HomAlgorithm::Components, DEFAULT_BUDGET).unwrap().log_value;
        let (a, b, c) = (l(&g1), l(&g2), l(&u));
        prop_assert!((c - (a + b)).abs() <= 1e-12 * c.abs().max(1.0));
    }

    #[test]
    fn softening_is_monotone(g in graph_strategy(7), l1 in 1e-4f64..1.0, l2 in 1e-4f64..1.0) {
        let (lo, hi) = (l1.min(l2), l1.max(l2));
        let h = TargetGraph::hard_core_k2();
        let at = |l: f64| hom_count(&g, &h.soften(l).unwrap(), HomAlgorithm::Brute, DEFAULT_BUDGET).unwrap().log_value;
        let hard = hom_count(&g, &h, HomAlgorithm::Brute, DEFAULT_BUDGET).unwrap().log_value;
        prop_assert!(hard <= at(lo) + 1e-12);
        prop_assert!(at(lo) <= at(hi) + 1e-12 * at(hi).abs().max(1.0));
    }

    #[test]
    fn energy_is_affine((g, s1) in colored_graph(6, 3), seed in any::<u8>(), h in soft_target(3), num in 0i64..=8) {
        prop_assume!(s1.k() == 3);
        let colors: Vec<u8> = (0..g.n()).map(|v| ((v + seed as usize) % 3) as u8).collect();
        let (a, b) = (quotient(&g, &s1).unwrap(), quotient(&g, &Coloring::new(colors, 3).unwrap()).unwrap());
        let t = Q::new(num, 8);
        let mixed = energy(&combine(&a, &b, t), &h).unwrap();
        let lin = to_f64(&t) * energy(&a, &h).unwrap() + (1.0 - to_f64(&t)) * energy(&b, &h).unwrap();
        prop_assert!((mixed - lin).abs() <= 1e-12 * lin.abs().max(1.0));
    }

    #[test]
    fn scaling_alpha_shifts_by_log_c(h in soft_target(2), c in 0.2f64..5.0) {
        let g = Graph::complete(2).copies(4);
        let scaled = TargetGraph::new(h.alpha().iter().map(|a| a * c).collect(), h.a_rows().to_vec()).unwrap();
        let delta = q(1, 8);
        let z = |t: &TargetGraph| hom_count(&g, t, HomAlgorithm::Components, DEFAULT_BUDGET).unwrap().per_vertex;
        prop_assert!((z(&scaled) - z(&h) - c.ln()).abs() <= 1e-12);
        let (va, vb) = (variational_free_energy(&g, &h, &delta, DEFAULT_BUDGET).unwrap(), variational_free_energy(&g, &scaled, &delta, DEFAULT_BUDGET).unwrap());
        prop_assert!((va.energy - vb.energy - c.ln()).abs() <= 1e-12);
        prop_assert_eq!(va.cell, vb.cell);
    }

    #[test]
    fn gibbs_identity_recovers_log_z(g in graph_strategy(6), h in soft_target(2)) {
        let rep = gibbs_bucket_decomposition(&g, &h, &q(1, 8), true, DEFAULT_BUDGET).unwrap();
        let id = rep.identity.unwrap();
        prop_assert!((id - rep.exact).abs() <= 1e-12 * rep.exact.abs().max(1.0));
        prop_assert!(rep.contained);
    }

    #[test]
    fn frequencies_sum_to_one_and_ignore_labels(g in graph_strategy(8), r in 0usize..=2, perm in permutation(8)) {
        let f = bs_frequencies(&g, r).unwrap();
        prop_assert_eq!(f.total(), Q::from_integer(1));
        let p: Vec<usize> = perm.into_iter().filter(|&v| v < g.n()).collect();
        prop_assert_eq!(f, bs_frequencies(&relabel(&g, &p), r).unwrap());
    }

    #[test]
    fn forgetting_colors_recovers_plain_frequencies((g, s) in colored_graph(8, 3), r in 0usize..=2) {
        let colored = colored_frequencies(&g, &s, r).unwrap();
        prop_assert_eq!(colored.total(), Q::from_integer(1));
        prop_assert_eq!(colored.forget_colors().unwrap().entries, bs_frequencies(&g, r).unwrap().entries);
    }

    #[test]
    fn balls_respect_the_size_bound(g in graph_strategy(10), r in 0usize..=3, root in any::<prop::sample::Index>()) {
        let b = ball(&g, root.index(g.n()), r).unwrap();
        prop_assert!(b.graph.n() <= ball_size_bound(g.degree_bound(), r));
    }

    #[test]
    fn cycles_have_one_neighborhood_type(n in 3usize..=16, r in 0usize..=3) {
        let f = bs_frequencies(&Graph::cycle(n).unwrap(), r).unwrap();
        prop_assert_eq!(f.entries.len(), 1);
    }
}
