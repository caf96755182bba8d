//! Brute-force ground truth for small models.
//!
//! Works on one concrete covariance matrix with exact rational arithmetic:
//! marks come from the linear root equations, every pair equation is ranked
//! numerically, and each rank-2 component without a mark is solved through
//! the first cycle whose Möbius product is not a multiple of the identity.
//! Each root of that cycle's quadratic is propagated over a spanning tree and
//! kept if it satisfies every equation of the component.

pub mod cycles;
pub mod exact;
pub mod poly;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::covariance::{sigma_matrix, sigma_trek_oracle, ParamAssignment, SigmaMatrix, TREK_ORACLE_MAX_N};
use crate::cyclefind::weight::Weight2x2;
use crate::error::{ModelError, OracleError};
use crate::identify::{IdentReport, Status};
use crate::model::{MissingEdge, NodeId, TreeScm};
use crate::ring::Ring;

use cycles::for_each_simple_cycle;
use exact::{rat, rational_sqrt, QuadExt, Rationals};

/// Largest model `count_solutions` accepts.
pub const ORACLE_MAX_N: usize = 8;

/// Number of parameter values consistent with Σ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolutionCount {
    One,
    Two,
    Infinite,
}

impl SolutionCount {
    /// The status an engine report must carry for this count.
    pub fn status_name(self) -> &'static str {
        match self {
            SolutionCount::One => "identifiable",
            SolutionCount::Two => "two_identifiable",
            SolutionCount::Infinite => "unidentifiable",
        }
    }
}

impl fmt::Display for SolutionCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionCount::One => "1",
            SolutionCount::Two => "2",
            SolutionCount::Infinite => "inf",
        })
    }
}

impl Serialize for SolutionCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Exact value `a + b·√d`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadValue {
    pub a: BigRational,
    pub b: BigRational,
    pub d: BigRational,
}

impl QuadValue {
    fn rational(a: BigRational) -> Self {
        Self {
            a,
            b: BigRational::zero(),
            d: BigRational::zero(),
        }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn approx(&self) -> f64 {
        let f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
        f(&self.a) + f(&self.b) * f(&self.d).sqrt()
    }
}

impl fmt::Display for QuadValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} + {}*sqrt({})", self.a, self.b, self.d)
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleComponent {
    pub nodes: Vec<NodeId>,
    pub marked: bool,
    pub count: SolutionCount,
    /// Per node, the consistent values in the same branch order; empty when
    /// the count is infinite.
    pub solutions: BTreeMap<NodeId, Vec<QuadValue>>,
    /// Why each discarded root of the cycle quadratic failed.
    pub rejected: Vec<Rejection>,
}

/// Reason a candidate root is not a solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rejection {
    /// Propagation sends this node to infinity.
    Pole(NodeId),
    /// The equation of this missing edge fails.
    Equation(NodeId, NodeId),
    /// The value disagrees with this node's root equation.
    Mark(NodeId),
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub ranks: Vec<(MissingEdge, u8)>,
    pub components: Vec<OracleComponent>,
}

impl OracleReport {
    pub fn count(&self, v: NodeId) -> Option<SolutionCount> {
        self.component_of(v).map(|c| c.count)
    }

    pub fn component_of(&self, v: NodeId) -> Option<&OracleComponent> {
        self.components.iter().find(|c| c.nodes.contains(&v))
    }

    /// Nodes whose engine status disagrees with the solution count.
    pub fn mismatches(&self, report: &IdentReport) -> Vec<NodeId> {
        report
            .nodes
            .iter()
            .filter(|r| self.count(r.node).map(|c| c.status_name()) != Some(r.status.name()))
            .map(|r| r.node)
            .collect()
    }
}

/// Field operations the propagation needs beyond a ring.
trait ExactField: Ring {
    fn div(&self, a: &Self::Element, b: &Self::Element) -> Option<Self::Element>;
    fn embed(&self, q: &BigRational) -> Self::Element;
    fn value(&self, x: &Self::Element) -> QuadValue;
}

impl ExactField for Rationals {
    fn div(&self, a: &BigRational, b: &BigRational) -> Option<BigRational> {
        (!b.is_zero()).then(|| a / b)
    }
    fn embed(&self, q: &BigRational) -> BigRational {
        q.clone()
    }
    fn value(&self, x: &BigRational) -> QuadValue {
        QuadValue::rational(x.clone())
    }
}

impl ExactField for QuadExt {
    fn div(&self, a: &exact::QuadElem, b: &exact::QuadElem) -> Option<exact::QuadElem> {
        QuadExt::div(self, a, b)
    }
    fn embed(&self, q: &BigRational) -> exact::QuadElem {
        QuadExt::embed(self, q)
    }
    fn value(&self, x: &exact::QuadElem) -> QuadValue {
        QuadValue {
            a: x.0.clone(),
            b: x.1.clone(),
            d: self.radicand().clone(),
        }
    }
}

/// Equation `A·x·y − B·x + C·y − D = 0` of a rank-2 edge between the
/// parameters of `i` (x) and `j` (y).
#[derive(Clone, Debug)]
struct Equation {
    i: NodeId,
    j: NodeId,
    coeffs: [BigRational; 4],
}

impl Equation {
    /// Möbius matrix mapping x to y.
    fn forward(&self) -> Weight2x2<BigRational> {
        let [a, b, c, d] = self.coeffs.clone();
        Weight2x2::from_coefficients(a, b, c, d)
    }

    fn weight_from(&self, from: NodeId) -> Weight2x2<BigRational> {
        if from == self.i {
            self.forward()
        } else {
            self.forward().adjoint(&Rationals)
        }
    }

    fn residual<F: ExactField>(&self, f: &F, x: &F::Element, y: &F::Element) -> F::Element {
        let [a, b, c, d] = self.coeffs.clone().map(|q| f.embed(&q));
        let xy = f.mul(x, y);
        let t = f.sub(&f.mul(&a, &xy), &f.mul(&b, x));
        f.sub(&f.add(&t, &f.mul(&c, y)), &d)
    }
}

/// Ground-truth covariances, by trek enumeration where it is allowed.
pub fn exact_sigma(m: &TreeScm, a: &ParamAssignment<BigRational>) -> SigmaMatrix<BigRational> {
    if m.n() > TREK_ORACLE_MAX_N {
        return sigma_matrix(&Rationals, m, a);
    }
    let dim = m.node_count();
    let mut rows = vec![vec![BigRational::zero(); dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let v = sigma_trek_oracle(&Rationals, m, a, i, j).expect("size checked");
            rows[j][i] = v.clone();
            rows[i][j] = v;
        }
    }
    SigmaMatrix::from_rows(rows)
}

/// Integer parameters drawn from `[-bound, bound] \ {0}`; error variances
/// from `[1, bound]`.
pub fn random_assignment<G: Rng>(m: &TreeScm, rng: &mut G, bound: i64) -> ParamAssignment<BigRational> {
    let nonzero = |rng: &mut G| loop {
        let v = rng.gen_range(-bound..=bound);
        if v != 0 {
            return rat(v);
        }
    };
    let mut lambda = vec![BigRational::zero()];
    lambda.extend((1..=m.n()).map(|_| nonzero(rng)));
    let mut omega = BTreeMap::new();
    for v in 0..=m.n() {
        omega.insert((v, v), rat(rng.gen_range(1..=bound)));
    }
    for (a, b) in m.bidirected() {
        omega.insert((a, b), nonzero(rng));
    }
    ParamAssignment { lambda, omega }
}

/// Random tree on `0..=n` rooted at 0 (each node's parent is uniform among
/// nodes placed before it in a shuffled order), with every pair of nodes
/// joined by a bidirected edge with probability `density`.
pub fn random_model<G: Rng>(rng: &mut G, n: usize, density: f64) -> Result<TreeScm, ModelError> {
    let mut order: Vec<NodeId> = (1..=n).collect();
    order.shuffle(rng);
    order.insert(0, 0);
    let mut parent = vec![None; n + 1];
    for k in 1..=n {
        parent[order[k]] = Some(order[rng.gen_range(0..k)]);
    }
    let mut bidirected = Vec::new();
    for a in 0..=n {
        for b in a + 1..=n {
            if rng.gen_bool(density) {
                bidirected.push((a, b));
            }
        }
    }
    TreeScm::new(n, parent, bidirected)
}

fn matrix_rank(m: [[&BigRational; 2]; 2]) -> u8 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !det.is_zero() {
        2
    } else if m.iter().flatten().any(|x| !x.is_zero()) {
        1
    } else {
        0
    }
}

/// Solution count per node of the missing-edge equations at `sigma`.
pub fn count_solutions(m: &TreeScm, sigma: &SigmaMatrix<BigRational>) -> Result<OracleReport, OracleError> {
    if m.n() > ORACLE_MAX_N {
        return Err(OracleError::SizeGuard {
            what: "n",
            value: m.n(),
            limit: ORACLE_MAX_N,
        });
    }
    let s = |a: NodeId, b: NodeId| sigma.get(a, b);

    let mut marks: BTreeMap<NodeId, BigRational> = BTreeMap::new();
    for v in m.root_missing() {
        let p = m.parent_of(v);
        if s(0, p).is_zero() {
            return Err(OracleError::Degenerate(format!("σ[0,{p}] vanishes, root equation of {v} is empty")));
        }
        marks.insert(v, s(0, v) / s(0, p));
    }

    let mut ranks = Vec::new();
    let mut equations = Vec::new();
    for e in m.pair_missing() {
        let MissingEdge::Pair { i, j, p, q } = e else {
            continue;
        };
        let rank = matrix_rank([[s(p, q), s(i, q)], [s(p, j), s(i, j)]]);
        ranks.push((e, rank));
        let eq = Equation {
            i,
            j,
            coeffs: [s(p, q).clone(), s(p, j).clone(), -s(i, q), -s(i, j)],
        };
        match rank {
            0 => {}
            1 => {
                let explained = |v: NodeId| {
                    marks.get(&v).is_some_and(|x| {
                        let [a, b, c, d] = &eq.coeffs;
                        if v == i {
                            (a * x + c).is_zero() && (b * x + d).is_zero()
                        } else {
                            (a * x - b).is_zero() && (c * x - d).is_zero()
                        }
                    })
                };
                if !explained(i) && !explained(j) {
                    return Err(OracleError::Unsupported(format!(
                        "rank-1 edge {e} is not resolved by a root equation of an endpoint"
                    )));
                }
            }
            _ => equations.push(eq),
        }
    }

    let comps = crate::identify::components(
        m.n(),
        &ranks.iter().filter(|(_, r)| *r == 2).map(|(e, _)| *e).collect::<Vec<_>>(),
    );
    let mut components = Vec::new();
    for nodes in comps {
        let eqs: Vec<&Equation> = equations.iter().filter(|e| nodes.contains(&e.i)).collect();
        components.push(solve_component(nodes, &eqs, &marks)?);
    }
    Ok(OracleReport { ranks, components })
}

/// BFS order from `start` as `(node, equation used, predecessor)`.
fn spanning_order(start: NodeId, eqs: &[&Equation]) -> Vec<(NodeId, Option<(usize, NodeId)>)> {
    let mut seen = vec![start];
    let mut out = vec![(start, None)];
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for (k, e) in eqs.iter().enumerate() {
            let v = if e.i == u {
                e.j
            } else if e.j == u {
                e.i
            } else {
                continue;
            };
            if !seen.contains(&v) {
                seen.push(v);
                out.push((v, Some((k, u))));
                queue.push_back(v);
            }
        }
    }
    out
}

type Propagated<T> = Result<BTreeMap<NodeId, T>, Rejection>;

/// Propagates a value of `start` to the component and checks all equations
/// and marks.
fn propagate_value<F: ExactField>(
    f: &F,
    start: NodeId,
    x: F::Element,
    eqs: &[&Equation],
    marks: &BTreeMap<NodeId, BigRational>,
) -> Result<Propagated<F::Element>, OracleError> {
    let mut vals: BTreeMap<NodeId, F::Element> = BTreeMap::new();
    for (v, via) in spanning_order(start, eqs) {
        let val = match via {
            None => x.clone(),
            Some((k, u)) => {
                let w = eqs[k].weight_from(u).map(|q| f.embed(q));
                let xu = &vals[&u];
                let num = f.add(&f.mul(&w.m[0][0], xu), &w.m[0][1]);
                let den = f.add(&f.mul(&w.m[1][0], xu), &w.m[1][1]);
                match f.div(&num, &den) {
                    Some(y) => y,
                    None if f.is_zero(&num) => {
                        return Err(OracleError::Degenerate(format!(
                            "equation {{{},{}}} leaves node {v} free at this point",
                            eqs[k].i, eqs[k].j
                        )))
                    }
                    None => return Ok(Err(Rejection::Pole(v))),
                }
            }
        };
        vals.insert(v, val);
    }
    if let Some(e) = eqs.iter().find(|e| !f.is_zero(&e.residual(f, &vals[&e.i], &vals[&e.j]))) {
        return Ok(Err(Rejection::Equation(e.i, e.j)));
    }
    if let Some((v, _)) = vals
        .iter()
        .find(|(v, x)| marks.get(v).is_some_and(|mk| !f.is_zero(&f.sub(x, &f.embed(mk)))))
    {
        return Ok(Err(Rejection::Mark(*v)));
    }
    Ok(Ok(vals))
}

fn solve_component(
    nodes: Vec<NodeId>,
    eqs: &[&Equation],
    marks: &BTreeMap<NodeId, BigRational>,
) -> Result<OracleComponent, OracleError> {
    let single = |vals: BTreeMap<NodeId, QuadValue>, marked: bool| OracleComponent {
        solutions: vals.into_iter().map(|(v, x)| (v, vec![x])).collect(),
        nodes: nodes.clone(),
        marked,
        count: SolutionCount::One,
        rejected: Vec::new(),
    };

    if let Some((&v, x)) = marks.iter().find(|(v, _)| nodes.contains(v)) {
        let f = Rationals;
        let vals = propagate_value(&f, v, x.clone(), eqs, marks)?.map_err(|r| {
            OracleError::Inconsistent(format!("marks of component containing {v} disagree: {r:?}"))
        })?;
        return Ok(single(vals.iter().map(|(k, x)| (*k, f.value(x))).collect(), true));
    }

    let infinite = OracleComponent {
        nodes: nodes.clone(),
        marked: false,
        count: SolutionCount::Infinite,
        solutions: BTreeMap::new(),
        rejected: Vec::new(),
    };
    if nodes.len() > cycles::CYCLE_GUARD {
        return Err(OracleError::SizeGuard {
            what: "component size",
            value: nodes.len(),
            limit: cycles::CYCLE_GUARD,
        });
    }
    let local = |v: NodeId| nodes.iter().position(|&u| u == v).expect("node in component");
    let mut adj = vec![Vec::new(); nodes.len()];
    let mut weight: BTreeMap<(usize, usize), Weight2x2<BigRational>> = BTreeMap::new();
    for e in eqs {
        let (a, b) = (local(e.i), local(e.j));
        adj[a].push(b);
        adj[b].push(a);
        weight.insert((a, b), e.weight_from(e.i));
        weight.insert((b, a), e.weight_from(e.j));
    }

    let r = Rationals;
    let mut found: Option<(usize, Weight2x2<BigRational>)> = None;
    for_each_simple_cycle(&adj, |c| {
        let mut acc = Weight2x2::identity(&r);
        for k in 0..c.len() {
            let w = &weight[&(c[k], c[(k + 1) % c.len()])];
            acc = w.mul(&r, &acc);
        }
        if acc.is_scalar_multiple(&r) {
            return true;
        }
        found = Some((c[0], acc));
        false
    })?;
    let Some((base, w)) = found else {
        return Ok(infinite);
    };
    let base = nodes[base];

    // fixed points of the cycle map: a·x² + (c − b)·x − d = 0
    let (qa, qb, qc) = (w.a().clone(), w.c() - w.b(), -w.d().clone());
    let inconsistent = || OracleError::Inconsistent(format!("no parameter value satisfies the component of {base}"));
    if qa.is_zero() {
        if qb.is_zero() {
            return Err(inconsistent());
        }
        let f = Rationals;
        let x = -&qc / &qb;
        let vals = propagate_value(&f, base, x, eqs, marks)?.map_err(|_| inconsistent())?;
        return Ok(single(vals.iter().map(|(k, x)| (*k, f.value(x))).collect(), false));
    }
    let disc = &qb * &qb - rat(4) * &qa * &qc;
    let two_a = rat(2) * &qa;

    let mut branches: Vec<BTreeMap<NodeId, QuadValue>> = Vec::new();
    let mut rejected = Vec::new();
    match rational_sqrt(&disc) {
        Some(root) => {
            let f = Rationals;
            let mut roots = vec![(-&qb + &root) / &two_a];
            if !root.is_zero() {
                roots.push((-&qb - &root) / &two_a);
            }
            for x in roots {
                match propagate_value(&f, base, x, eqs, marks)? {
                    Ok(vals) => branches.push(vals.iter().map(|(k, x)| (*k, f.value(x))).collect()),
                    Err(r) => rejected.push(r),
                }
            }
        }
        None => {
            let f = QuadExt::new(disc.clone()).expect("non-square discriminant");
            for sign in [1, -1] {
                let x = (-&qb / &two_a, rat(sign) / &two_a);
                match propagate_value(&f, base, x, eqs, marks)? {
                    Ok(vals) => branches.push(vals.iter().map(|(k, x)| (*k, f.value(x))).collect()),
                    Err(r) => rejected.push(r),
                }
            }
        }
    }

    let count = match branches.len() {
        0 => return Err(inconsistent()),
        1 => SolutionCount::One,
        _ => SolutionCount::Two,
    };
    let mut solutions: BTreeMap<NodeId, Vec<QuadValue>> = BTreeMap::new();
    for b in branches {
        for (v, x) in b {
            solutions.entry(v).or_default().push(x);
        }
    }
    Ok(OracleComponent {
        nodes,
        marked: false,
        count,
        solutions,
        rejected,
    })
}

/// Draws an integer ground truth, checks that it reproduces itself among
/// the oracle solutions and returns the counts.
pub fn oracle_run<G: Rng>(m: &TreeScm, rng: &mut G, bound: i64) -> Result<(ParamAssignment<BigRational>, OracleReport), OracleError> {
    let a = random_assignment(m, rng, bound);
    let sigma = exact_sigma(m, &a);
    let report = count_solutions(m, &sigma)?;
    for c in &report.components {
        for (v, sols) in &c.solutions {
            let truth = QuadValue::rational(a.lambda[*v].clone());
            if !sols.contains(&truth) {
                return Err(OracleError::Inconsistent(format!(
                    "ground truth λ of node {v} is not among the solutions"
                )));
            }
        }
    }
    Ok((a, report))
}

/// Engine statuses compared against an oracle run: nodes that disagree.
pub fn check_report(report: &IdentReport, oracle: &OracleReport) -> Vec<(NodeId, &'static str, SolutionCount)> {
    oracle
        .mismatches(report)
        .into_iter()
        .filter_map(|v| {
            let status = report.node(v)?.status.name();
            Some((v, status, oracle.count(v)?))
        })
        .collect()
}

/// True if the status variant corresponds to the count.
pub fn agrees(status: &Status, count: SolutionCount) -> bool {
    status.name() == count.status_name()
}

/// Small helper for building an exact rational from numerator/denominator.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
