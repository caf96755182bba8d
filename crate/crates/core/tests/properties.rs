//! Property tests over randomly generated models and weights.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use treeid::covariance::{sample_assignment, sigma_matrix, sigma_trek_oracle};
use treeid::cyclefind::{walk_weight, Weight2x2};
use treeid::fastp::syntax::{parse_fastp, serialize_fastp};
use treeid::oracle::poly::{symbolic_edge_rank, symbolic_sigma};
use treeid::oracle::{oracle_run, random_model, SolutionCount};
use treeid::pit::{FieldElem, PitConfig, PitSession, PrimeField, DEFAULT_PRIME};
use treeid::ring::Ring;
use treeid::{run_identification, IdentConfig, MissingEdge, TreeScm};

fn arb_model(max_n: usize) -> impl Strategy<Value = TreeScm> {
    (1..=max_n, any::<u64>(), prop::sample::select(vec![0.2, 0.5, 0.8])).prop_map(|(n, seed, d)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_model(&mut rng, n, d).expect("random model is valid")
    })
}

fn field() -> PrimeField {
    PrimeField::new(DEFAULT_PRIME).unwrap()
}

fn arb_weight() -> impl Strategy<Value = [i64; 4]> {
    prop::array::uniform4(-50i64..=50)
}

fn to_field(f: &PrimeField, w: [i64; 4]) -> Weight2x2<FieldElem> {
    Weight2x2::new(f.from_signed(w[0]), f.from_signed(w[1]), f.from_signed(w[2]), f.from_signed(w[3]))
}

/// `x ↦ (m11 x + m12) / (m21 x + m22)`, or `None` at the pole.
fn mobius(f: &PrimeField, w: &Weight2x2<FieldElem>, x: FieldElem) -> Option<FieldElem> {
    let [[m11, m12], [m21, m22]] = &w.m;
    f.div(f.add(&f.mul(m11, &x), m12), f.add(&f.mul(m21, &x), m22))
}

/// Moves every non-root node `v` to `perm[v - 1] + 1`.
fn relabel(m: &TreeScm, perm: &[usize]) -> TreeScm {
    let map = |v: usize| if v == 0 { 0 } else { perm[v - 1] + 1 };
    let mut parent = vec![None; m.node_count()];
    for v in 1..=m.n() {
        parent[map(v)] = m.parent(v).map(map);
    }
    let bi: Vec<_> = m.bidirected().map(|(a, b)| (map(a), map(b))).collect();
    TreeScm::new(m.n(), parent, bi).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn missing_and_present_pairs_partition(m in arb_model(9)) {
        let n = m.n();
        prop_assert_eq!(m.missing_edges().len() + m.bidirected_count(), n * (n + 1) / 2);
        prop_assert_eq!(m.root_missing().len() + m.pair_missing().len(), m.missing_edges().len());
    }

    #[test]
    fn model_json_round_trip(m in arb_model(9)) {
        let back = TreeScm::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn sigma_matches_trek_sum(m in arb_model(7), seed in any::<u64>()) {
        let f = field();
        let mut s = PitSession::new(&PitConfig::new(seed, 16)).unwrap();
        let a = sample_assignment(&m, &mut s).unwrap();
        let sigma = sigma_matrix(&f, &m, &a);
        for i in 0..=m.n() {
            for j in 0..=m.n() {
                prop_assert_eq!(*sigma.get(i, j), sigma_trek_oracle(&f, &m, &a, i, j).unwrap());
            }
        }
    }

    #[test]
    fn adjoint_inverts_up_to_det(w in arb_weight()) {
        let f = field();
        let w = to_field(&f, w);
        let det = w.det(&f);
        let expect = Weight2x2::identity(&f).scale(&f, &det);
        prop_assert_eq!(w.mul(&f, &w.adjoint(&f)), expect.clone());
        prop_assert_eq!(w.adjoint(&f).mul(&f, &w), expect);
    }

    #[test]
    fn reversed_walk_is_adjoint(ws in prop::collection::vec(arb_weight(), 1..6)) {
        let f = field();
        let ws: Vec<_> = ws.into_iter().map(|w| to_field(&f, w)).collect();
        let forward: Vec<_> = ws.iter().enumerate().map(|(s, w)| (s, s + 1, w.clone())).collect();
        let backward: Vec<_> = ws.iter().enumerate().rev().map(|(s, w)| (s + 1, s, w.adjoint(&f))).collect();
        let fw = walk_weight(&f, &forward).unwrap();
        let bw = walk_weight(&f, &backward).unwrap();
        prop_assert_eq!(bw, fw.adjoint(&f));
    }

    #[test]
    fn walk_product_composes_maps(ws in prop::collection::vec(arb_weight(), 1..6), x in -1000i64..1000) {
        let f = field();
        let ws: Vec<_> = ws.into_iter().map(|w| to_field(&f, w)).collect();
        let steps: Vec<_> = ws.iter().enumerate().map(|(s, w)| (s, s + 1, w.clone())).collect();
        let product = walk_weight(&f, &steps).unwrap();
        let mut y = Some(f.from_signed(x));
        for w in &ws {
            y = y.and_then(|v| mobius(&f, w, v));
        }
        if let Some(y) = y {
            prop_assert_eq!(mobius(&f, &product, f.from_signed(x)), Some(y));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn fastp_text_round_trip(m in arb_model(6), seed in any::<u64>()) {
        let report = run_identification(&m, &IdentConfig::with_seed(seed)).unwrap();
        for nr in &report.nodes {
            for f in nr.status.fastps() {
                let text = serialize_fastp(f);
                let back = parse_fastp(&text).unwrap();
                prop_assert_eq!(serialize_fastp(&back), text);
            }
        }
    }

    #[test]
    fn components_are_uniform(m in arb_model(7), seed in any::<u64>()) {
        let report = run_identification(&m, &IdentConfig::with_seed(seed)).unwrap();
        let errors = common::uniformity_errors(&report);
        prop_assert!(errors.is_empty(), "{:?}", errors);
        prop_assert!(report.anomalies.is_empty(), "{:?}", report.anomalies);
    }

    #[test]
    fn closed_forms_hit_ground_truth(m in arb_model(6), seed in any::<u64>()) {
        let report = run_identification(&m, &IdentConfig::with_seed(seed)).unwrap();
        let errors = common::truth_errors_seeded(&m, &report, seed);
        prop_assert!(errors.is_empty(), "{:?}", errors);
    }

    #[test]
    fn symbolic_rank_matches_engine(m in arb_model(5), seed in any::<u64>()) {
        let report = run_identification(&m, &IdentConfig::with_seed(seed)).unwrap();
        let sigma = symbolic_sigma(&m).unwrap();
        let pairs: Vec<MissingEdge> = m.pair_missing();
        prop_assert_eq!(report.edge_ranks.len(), pairs.len());
        for er in &report.edge_ranks {
            prop_assert_eq!(Some(er.rank), symbolic_edge_rank(&sigma, &er.edge), "edge {}", er.edge);
        }
    }

    #[test]
    fn statuses_survive_relabeling(
        m in arb_model(6),
        shuffle in any::<u64>(),
        seed in any::<u64>(),
    ) {
        let mut perm: Vec<usize> = (0..m.n()).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(shuffle));
        let r = relabel(&m, &perm);
        let a = run_identification(&m, &IdentConfig::with_seed(seed)).unwrap();
        let b = run_identification(&r, &IdentConfig::with_seed(seed ^ 1)).unwrap();
        for v in 1..=m.n() {
            prop_assert_eq!(
                a.node(v).unwrap().status.name(),
                b.node(perm[v - 1] + 1).unwrap().status.name(),
                "node {}", v
            );
        }
        let counts = |m: &TreeScm| oracle_run(m, &mut ChaCha8Rng::seed_from_u64(seed), 1_000_000).ok();
        if let (Some((_, x)), Some((_, y))) = (counts(&m), counts(&r)) {
            for v in 1..=m.n() {
                let (cx, cy): (Option<SolutionCount>, _) = (x.count(v), y.count(perm[v - 1] + 1));
                prop_assert_eq!(cx, cy, "node {}", v);
            }
        }
    }
}
