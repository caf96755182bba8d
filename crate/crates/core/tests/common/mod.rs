//! Shared fixtures: a small model corpus and ground-truth checks.
#![allow(dead_code)]

use num_rational::BigRational;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use treeid::covariance::ParamAssignment;
use treeid::fastp::expr::eval_expr;
use treeid::fastp::Fastp;
use treeid::oracle::exact::Rationals;
use treeid::oracle::{exact_sigma, random_assignment, random_model};
use treeid::{IdentReport, Status, TreeScm};

pub const M1: &str = r#"{"n":2,"parent":[null,0,1],"bidirected":[[1,2]]}"#;
pub const M2: &str = r#"{"n":4,"parent":[null,0,1,0,1],"bidirected":[[2,4],[1,4]]}"#;
pub const CHAIN: &str = r#"{"n":2,"parent":[null,0,1],"bidirected":[]}"#;
/// Every pair of non-root nodes missing, no root pair missing: one
/// quadratic root is rejected by an equation off the identifying cycle.
pub const ONE_BRANCH: &str = r#"{"n":4,"parent":[null,4,3,0,0],"bidirected":[[0,1],[0,2],[0,3],[0,4]]}"#;
/// Unmarked component {2,3,4,5} with two independent cycles in which
/// both quadratic roots satisfy every equation.
pub const TWO_BRANCH: &str =
    r#"{"n":6,"parent":[null,2,6,6,0,0,0],"bidirected":[[0,2],[0,3],[0,4],[0,5],[2,6],[3,6],[4,5]]}"#;
/// Triangle of unmarked nodes with both roots consistent.
pub const TRIANGLE: &str = r#"{"n":3,"parent":[null,0,1,0],"bidirected":[[0,1],[0,2],[0,3]]}"#;
/// Rank-2 edges between parents carrying a bidirected root pair.
pub const ROOT_PAIRS: &str = r#"{"n":3,"parent":[null,0,1,1],"bidirected":[[1,2],[0,3],[0,1],[0,2]]}"#;
pub const STAR: &str = r#"{"n":5,"parent":[null,0,0,0,0,0],"bidirected":[[0,1],[0,2],[0,3],[0,4],[0,5],[1,2]]}"#;
pub const SINGLE: &str = r#"{"n":1,"parent":[null,0],"bidirected":[[0,1]]}"#;

pub fn model(json: &str) -> TreeScm {
    TreeScm::from_json(json).expect("fixture parses")
}

/// Named fixtures plus seeded random models, all with `n <= 6`.
pub fn corpus() -> Vec<(String, TreeScm)> {
    let mut out: Vec<(String, TreeScm)> = [
        ("m1", M1),
        ("m2", M2),
        ("chain", CHAIN),
        ("one_branch", ONE_BRANCH),
        ("two_branch", TWO_BRANCH),
        ("triangle", TRIANGLE),
        ("root_pairs", ROOT_PAIRS),
        ("star", STAR),
        ("single", SINGLE),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), model(v)))
    .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..30 {
        let n = 1 + k % 6;
        let d = [0.2, 0.5, 0.8][k % 3];
        out.push((format!("random{k}"), random_model(&mut rng, n, d).unwrap()));
    }
    out
}

/// `num/den` of a rational closed form at exact covariances.
fn eval_rational(f: &Fastp, sigma: &dyn Fn(usize, usize) -> BigRational) -> Option<BigRational> {
    let r = Rationals;
    let den = eval_expr(&r, sigma, &f.r);
    (!den.is_zero()).then(|| eval_expr(&r, sigma, &f.p) / den)
}

/// `true` iff `x` equals `(p ± q√s)/(r ± t√s)` for one choice of sign:
/// `(r x − p)² = (q − t x)² s`.
fn is_branch_value(f: &Fastp, sigma: &dyn Fn(usize, usize) -> BigRational, x: &BigRational) -> bool {
    let r = Rationals;
    let e = |k: &treeid::fastp::expr::Expr| eval_expr(&r, sigma, k);
    let (p, q, rr, t, s) = (e(&f.p), e(&f.q), e(&f.r), e(&f.t), e(&f.s));
    let lhs = &rr * x - &p;
    let rhs = &q - &t * x;
    &lhs * &lhs == &rhs * &rhs * s && !(rr.is_zero() && t.is_zero())
}

/// Checks every closed form of `report` against an exact ground truth:
/// identifiable terms equal the true λ, two-identifiable pairs contain it.
pub fn ground_truth_errors(m: &TreeScm, report: &IdentReport, a: &ParamAssignment<BigRational>) -> Vec<String> {
    let sigma_m = exact_sigma(m, a);
    let sigma = |i: usize, j: usize| sigma_m.get(i, j).clone();
    let mut errors = Vec::new();
    for nr in &report.nodes {
        let truth = &a.lambda[nr.node];
        match &nr.status {
            Status::Identifiable(f) => {
                if !f.is_rational() {
                    errors.push(format!("node {} identifiable term is not rational", nr.node));
                } else if eval_rational(f, &sigma).as_ref() != Some(truth) {
                    errors.push(format!("node {} term misses λ = {truth}", nr.node));
                }
            }
            Status::TwoIdentifiable(f, g) => {
                if !(is_branch_value(f, &sigma, truth) && is_branch_value(g, &sigma, truth)) {
                    errors.push(format!("node {} branch pair misses λ = {truth}", nr.node));
                }
            }
            Status::Unidentifiable => {}
        }
    }
    errors
}

pub fn truth_errors_seeded(m: &TreeScm, report: &IdentReport, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ground_truth_errors(m, report, &random_assignment(m, &mut rng, 1_000_000))
}

/// Every rank-2 component carries one status and one radical.
pub fn uniformity_errors(report: &IdentReport) -> Vec<String> {
    let mut errors = Vec::new();
    for c in &report.components {
        let statuses: Vec<&Status> = c.nodes.iter().map(|&v| &report.node(v).unwrap().status).collect();
        if statuses.iter().any(|s| s.name() != statuses[0].name()) {
            errors.push(format!("component {:?} mixes statuses", c.nodes));
        }
        let fastps: Vec<&Fastp> = statuses.iter().flat_map(|s| s.fastps()).collect();
        if fastps.windows(2).any(|w| !w[0].shares_radical(w[1])) {
            errors.push(format!("component {:?} uses more than one radical", c.nodes));
        }
    }
    errors
}

