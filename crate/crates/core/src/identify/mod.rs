//! End-to-end identification of every λ parameter of a tree model.

pub mod report;

use std::collections::{BTreeMap, BTreeSet};

use crate::cyclefind::{cycle_weight, Direction, EquationGraph, WalkSearch, Weight2x2};
use crate::error::IdentError;
use crate::fastp::expr::{Expr, ExprRing};
use crate::fastp::{
    cycle_quadratic, fastp_rational, fastp_satisfies, propagate, roots_from_cycle, CycleRoots,
    Fastp,
};
use crate::model::{MissingEdge, NodeId, TreeScm};
use crate::pit::{PitConfig, PitSession, DEFAULT_ERROR_PROB, DEFAULT_PRIME, DEFAULT_REPETITIONS};
use crate::probe::Probe;
use crate::rank::{rank_table, EdgeRank};
use crate::ring::Ring;

pub use report::{ComponentInfo, IdentReport, NodeResult, Provenance, Status};

#[derive(Clone, Debug)]
pub struct IdentConfig {
    pub seed: u64,
    pub prime: u64,
    pub error_prob: f64,
    pub repetitions: u32,
}

impl Default for IdentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            prime: DEFAULT_PRIME,
            error_prob: DEFAULT_ERROR_PROB,
            repetitions: DEFAULT_REPETITIONS,
        }
    }
}

impl IdentConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Degree declared for walk-sum entries: `t ≤ n` tags plus `t` edge
/// weights, each of degree at most `2n + 1` in the parameters.
pub fn walk_degree(n: usize) -> u64 {
    4 * (n.max(1) as u64).pow(2)
}

/// Session-wide cap on declared degrees. Symbolic checks on propagated terms
/// exceed the walk bound, so the cap is cubic.
pub fn degree_cap(n: usize) -> u64 {
    64 * (n as u64 + 1).pow(3)
}

/// `σ_{0,i} / σ_{0,p}` for a node whose root edge is missing.
pub fn root_identify(m: &TreeScm, i: NodeId) -> Option<Fastp> {
    let p = m.parent(i)?;
    Some(Fastp::rational_unchecked(Expr::sigma(0, i), Expr::sigma(0, p)))
}

/// Endpoints of rank-1 edges whose root edge is missing. Also returns the
/// rank-1 edges whose equation is not solved identically by the root-edge
/// term of either endpoint; those contradict the tree structure.
pub fn rank1_marks(
    m: &TreeScm,
    ranks: &[EdgeRank],
    probe: &mut Probe,
    session: &mut PitSession,
) -> Result<(BTreeSet<NodeId>, Vec<MissingEdge>), IdentError> {
    let r = ExprRing;
    let root_missing: BTreeSet<NodeId> = m.root_missing().into_iter().collect();
    let mut marks = BTreeSet::new();
    let mut unexplained = Vec::new();
    for er in ranks.iter().filter(|e| e.rank == 1) {
        let MissingEdge::Pair { i, j, p, q } = er.edge else {
            continue;
        };
        let s = Expr::sigma;
        let mut explained = false;
        // x fixed: y·(x σpq − σiq) + (σij − x σpj) = 0
        if root_missing.contains(&i) {
            marks.insert(i);
            let x = root_identify(m, i).expect("non-root node");
            let c1 = r.sub(&r.mul(&s(p, q), &x.p), &r.mul(&s(i, q), &x.r));
            let c0 = r.sub(&r.mul(&s(i, j), &x.r), &r.mul(&s(p, j), &x.p));
            explained |= probe.all_zero(session, &[c1, c0])?;
        }
        // y fixed: x·(y σpq − σpj) + (σij − y σiq) = 0
        if root_missing.contains(&j) {
            marks.insert(j);
            if !explained {
                let y = root_identify(m, j).expect("non-root node");
                let c1 = r.sub(&r.mul(&s(p, q), &y.p), &r.mul(&s(p, j), &y.r));
                let c0 = r.sub(&r.mul(&s(i, j), &y.r), &r.mul(&s(i, q), &y.p));
                explained |= probe.all_zero(session, &[c1, c0])?;
            }
        }
        if !explained {
            unexplained.push(er.edge);
        }
    }
    Ok((marks, unexplained))
}

/// Connected components of the non-root nodes under the given edges, each
/// sorted, ordered by smallest member.
pub fn components(n: usize, edges: &[MissingEdge]) -> Vec<Vec<NodeId>> {
    let mut parent: Vec<usize> = (0..=n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in edges {
        let (a, b) = e.endpoints();
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for v in 1..=n {
        let root = find(&mut parent, v);
        groups.entry(root).or_default().push(v);
    }
    let mut out: Vec<Vec<NodeId>> = groups.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// Propagates seed terms over a breadth-first spanning forest.
pub fn propagate_component(
    g: &EquationGraph,
    seeds: &[(usize, Fastp)],
    probe: &mut Probe,
    session: &mut PitSession,
) -> Result<Vec<Option<Fastp>>, IdentError> {
    let mut vals: Vec<Option<Fastp>> = vec![None; g.len()];
    for (v, f) in seeds {
        vals[*v] = Some(f.clone());
    }
    let roots: Vec<usize> = seeds.iter().map(|s| s.0).collect();
    for (v, via) in g.bfs_tree(&roots) {
        let Some(k) = via else { continue };
        let e = &g.edges()[k];
        let from = vals[e.from].clone().expect("BFS visits tails first");
        let next = propagate(&from, &e.weight, probe, session)?.ok_or_else(|| {
            let (i, j) = e.source.map(|s| s.endpoints()).unwrap_or((e.from, e.to));
            IdentError::DegeneratePropagation { i, j }
        })?;
        vals[v] = Some(next);
    }
    Ok(vals)
}

/// First forward edge whose equation the values fail, if any.
fn first_violation(
    g: &EquationGraph,
    vals: &[Fastp],
    probe: &mut Probe,
    session: &mut PitSession,
) -> Result<Option<usize>, IdentError> {
    for (k, e) in g.edges().iter().enumerate() {
        if e.direction != Direction::Forward {
            continue;
        }
        if !fastp_satisfies(&vals[e.from], &vals[e.to], &e.weight, probe, session)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Möbius path matrices from `base` to every node along a BFS tree.
fn path_matrices(g: &EquationGraph, base: usize) -> Vec<Weight2x2<Expr>> {
    let r = ExprRing;
    let mut out = vec![Weight2x2::identity(&r); g.len()];
    for (v, via) in g.bfs_tree(&[base]) {
        if let Some(k) = via {
            let e = &g.edges()[k];
            out[v] = e.weight.mul(&r, &out[e.from]);
        }
    }
    out
}

type Lin = [Expr; 2];

fn lin_mul(a: &Lin, b: &Lin) -> [Expr; 3] {
    let r = ExprRing;
    [
        r.mul(&a[0], &b[0]),
        r.add(&r.mul(&a[0], &b[1]), &r.mul(&a[1], &b[0])),
        r.mul(&a[1], &b[1]),
    ]
}

fn lin_comb(w1: &Expr, a: &Lin, w2: &Expr, b: &Lin) -> Lin {
    let r = ExprRing;
    [
        r.add(&r.mul(w1, &a[0]), &r.mul(w2, &b[0])),
        r.add(&r.mul(w1, &a[1]), &r.mul(w2, &b[1])),
    ]
}

/// The root of the cycle quadratic `A x² + B x + C` that also solves the
/// equation on edge `k`, as a rational term. The edge equation becomes a
/// quadratic `E2 x² + E1 x + E0` in the base variable; eliminating `x²`
/// leaves a linear equation.
fn eliminate_branch(
    g: &EquationGraph,
    paths: &[Weight2x2<Expr>],
    k: usize,
    quad: &(Expr, Expr, Expr),
    probe: &mut Probe,
    session: &mut PitSession,
) -> Result<Option<Fastp>, IdentError> {
    let r = ExprRing;
    let e = &g.edges()[k];
    let (tu, tv) = (&paths[e.from], &paths[e.to]);
    // numerator and denominator of each endpoint as linear forms in x
    let nu: Lin = [tu.m[0][0].clone(), tu.m[0][1].clone()];
    let du: Lin = [tu.m[1][0].clone(), tu.m[1][1].clone()];
    let nv: Lin = [tv.m[0][0].clone(), tv.m[0][1].clone()];
    let dv: Lin = [tv.m[1][0].clone(), tv.m[1][1].clone()];
    let w = &e.weight.m;
    let lhs = lin_mul(&nv, &lin_comb(&w[1][0], &nu, &w[1][1], &du));
    let rhs = lin_mul(&dv, &lin_comb(&w[0][0], &nu, &w[0][1], &du));
    let [e2, e1, e0] = [0, 1, 2].map(|i| r.sub(&lhs[i], &rhs[i]));
    let (qa, qb, qc) = quad;
    let den = r.sub(&r.mul(qa, &e1), &r.mul(&e2, qb));
    let num = r.neg(&r.sub(&r.mul(qa, &e0), &r.mul(&e2, qc)));
    if probe.is_zero(session, &den)? {
        return Ok(None);
    }
    Ok(Some(fastp_rational(num, den, probe, session)?))
}

/// If one root of the cycle quadratic sends some node of the component to
/// infinity, the other root as a rational term. A node with path matrix
/// denominator `α x + β` has a pole at a root iff the resultant
/// `A β² − B α β + C α²` vanishes; the pole is `−β/α`, and the remaining
/// root is `−B/A + β/α`.
fn pole_free_root(
    g: &EquationGraph,
    base: usize,
    w: &Weight2x2<Expr>,
    probe: &mut Probe,
    session: &mut PitSession,
) -> Result<Option<Fastp>, IdentError> {
    let r = ExprRing;
    let (qa, qb, qc) = cycle_quadratic(w);
    let paths = path_matrices(g, base);
    for (v, t) in paths.iter().enumerate() {
        if v == base {
            continue;
        }
        let (alpha, beta) = (&t.m[1][0], &t.m[1][1]);
        let res = r.add(
            &r.sub(&r.mul(&qa, &r.mul(beta, beta)), &r.mul(&qb, &r.mul(alpha, beta))),
            &r.mul(&qc, &r.mul(alpha, alpha)),
        );
        if !probe.is_zero(session, &res)? || probe.is_zero(session, alpha)? {
            continue;
        }
        let num = r.sub(&r.mul(&qa, beta), &r.mul(&qb, alpha));
        let den = r.mul(&qa, alpha);
        return Ok(Some(fastp_rational(num, den, probe, session)?));
    }
    Ok(None)
}

struct Outcome {
    statuses: Vec<Status>,
    provenance: Vec<Option<Provenance>>,
    info: ComponentInfo,
}

pub fn run_identification(m: &TreeScm, cfg: &IdentConfig) -> Result<IdentReport, IdentError> {
    let n = m.n();
    let pit = PitConfig {
        prime: cfg.prime,
        seed: cfg.seed,
        degree_bound: degree_cap(n),
        target_error: cfg.error_prob,
        repetitions: cfg.repetitions,
    };
    let mut session = PitSession::new(&pit)?;
    let mut probe = Probe::sample(m, &mut session)?;
    let mut notes = Vec::new();
    let mut anomalies = Vec::new();

    let ranks = rank_table(&probe, &m.pair_missing(), &mut session)?;
    for r in ranks.iter().filter(|r| r.rank == 0) {
        notes.push(format!("missing edge {} has rank 0 and gives no constraint", r.edge));
    }
    let (r1_marks, unexplained) = rank1_marks(m, &ranks, &mut probe, &mut session)?;
    for e in unexplained {
        anomalies.push(format!(
            "rank-1 missing edge {e} is not explained by a root-edge term of either endpoint"
        ));
    }
    let mut marks: BTreeMap<NodeId, (Fastp, Provenance)> = BTreeMap::new();
    for i in m.root_missing() {
        let prov = if r1_marks.contains(&i) {
            Provenance::Rank1
        } else {
            Provenance::RootEdge
        };
        marks.insert(i, (root_identify(m, i).expect("non-root node"), prov));
    }

    let rank2: Vec<MissingEdge> = ranks.iter().filter(|r| r.rank == 2).map(|r| r.edge).collect();
    let mut nodes: Vec<Option<NodeResult>> = vec![None; n + 1];
    let mut infos = Vec::new();
    for comp in components(n, &rank2) {
        let members: BTreeSet<NodeId> = comp.iter().copied().collect();
        let edges: Vec<MissingEdge> = rank2
            .iter()
            .filter(|e| members.contains(&e.endpoints().0))
            .copied()
            .collect();
        let g = EquationGraph::from_model(&comp, &edges)?;
        let out = solve_component(m, &g, &marks, &mut probe, &mut session, &mut anomalies)?;
        for (local, status) in out.statuses.into_iter().enumerate() {
            let v = g.label(local);
            nodes[v] = Some(NodeResult {
                node: v,
                parent: m.parent_of(v),
                status,
                provenance: out.provenance[local],
            });
        }
        infos.push(out.info);
    }

    Ok(IdentReport {
        nodes: nodes.into_iter().flatten().collect(),
        edge_ranks: ranks,
        rank1_marks: r1_marks.into_iter().collect(),
        components: infos,
        notes,
        anomalies,
        seed: cfg.seed,
        prime: cfg.prime,
        error_target: cfg.error_prob,
        error_spent: session.error_spent(),
        pit_tests: session.tests_run(),
    })
}

fn solve_component(
    m: &TreeScm,
    g: &EquationGraph,
    marks: &BTreeMap<NodeId, (Fastp, Provenance)>,
    probe: &mut Probe,
    session: &mut PitSession,
    anomalies: &mut Vec<String>,
) -> Result<Outcome, IdentError> {
    let len = g.len();
    let marked: Vec<usize> = (0..len).filter(|&v| marks.contains_key(&g.label(v))).collect();
    let mut info = ComponentInfo {
        nodes: g.labels().to_vec(),
        marked: marked.iter().map(|&v| g.label(v)).collect(),
        cycle: None,
        cycle_class: None,
        status: "unidentifiable",
    };
    let unidentifiable = |info: ComponentInfo| Outcome {
        statuses: vec![Status::Unidentifiable; len],
        provenance: vec![None; len],
        info,
    };

    if !marked.is_empty() {
        let seeds: Vec<(usize, Fastp)> =
            marked.iter().map(|&v| (v, marks[&g.label(v)].0.clone())).collect();
        let vals: Vec<Fastp> = propagate_component(g, &seeds, probe, session)?
            .into_iter()
            .map(|v| v.expect("connected component"))
            .collect();
        if let Some(k) = first_violation(g, &vals, probe, session)? {
            anomalies.push(format!(
                "identified terms violate the equation of missing edge {}; covariances may be inconsistent with the model",
                describe(g, k)
            ));
        }
        let provenance = (0..len)
            .map(|v| Some(marks.get(&g.label(v)).map(|x| x.1).unwrap_or(Provenance::Propagation)))
            .collect();
        info.status = "identifiable";
        return Ok(Outcome {
            statuses: vals.into_iter().map(Status::Identifiable).collect(),
            provenance,
            info,
        });
    }

    if g.edges().is_empty() {
        return Ok(unidentifiable(info));
    }
    let search = WalkSearch::new(g, probe, walk_degree(m.n()));
    let Some(cycle) = search.find_identifying_cycle(probe, session)? else {
        return Ok(unidentifiable(info));
    };
    info.cycle = Some(cycle.nodes.iter().map(|&v| g.label(v)).collect());
    let base = cycle.base();
    let w = cycle_weight(g, &cycle);
    let roots = roots_from_cycle(&w, probe, session)?;
    info.cycle_class = Some(roots.class());
    let mut provenance: Vec<Option<Provenance>> = vec![Some(Provenance::Propagation); len];
    provenance[base] = Some(Provenance::Cycle);

    let pole_free = match roots {
        CycleRoots::Two { .. } => pole_free_root(g, base, &w, probe, session)?,
        _ => None,
    };
    let rational = match roots {
        CycleRoots::NoSolution | CycleRoots::Infinite => {
            anomalies.push(format!(
                "identifying cycle through node {} has class {:?}; covariances may be inconsistent with the model",
                g.label(base),
                roots.class()
            ));
            return Ok(unidentifiable(info));
        }
        CycleRoots::One(x) => x,
        CycleRoots::Two { .. } if pole_free.is_some() => pole_free.expect("checked"),
        CycleRoots::Two { plus, minus } => {
            let hi: Vec<Fastp> = propagate_component(g, &[(base, plus)], probe, session)?
                .into_iter()
                .map(|v| v.expect("connected component"))
                .collect();
            let Some(k) = first_violation(g, &hi, probe, session)? else {
                let lo = propagate_component(g, &[(base, minus)], probe, session)?;
                info.status = "two_identifiable";
                let statuses = hi
                    .into_iter()
                    .zip(lo)
                    .map(|(a, b)| Status::TwoIdentifiable(a, b.expect("connected component")))
                    .collect();
                return Ok(Outcome {
                    statuses,
                    provenance,
                    info,
                });
            };
            // exactly one root survives; recover it without the radical
            let quad = cycle_quadratic(&w);
            let paths = path_matrices(g, base);
            let mut found = eliminate_branch(g, &paths, k, &quad, probe, session)?;
            if found.is_none() {
                for k2 in k + 1..g.edges().len() {
                    if g.edges()[k2].direction != Direction::Forward
                        || fastp_satisfies(&hi[g.edges()[k2].from], &hi[g.edges()[k2].to], &g.edges()[k2].weight, probe, session)?
                    {
                        continue;
                    }
                    found = eliminate_branch(g, &paths, k2, &quad, probe, session)?;
                    if found.is_some() {
                        break;
                    }
                }
            }
            match found {
                Some(x) => x,
                None => {
                    return Err(IdentError::Contract(format!(
                        "no equation separates the two roots at node {} although one fails",
                        g.label(base)
                    )))
                }
            }
        }
    };
    let vals: Vec<Fastp> = propagate_component(g, &[(base, rational)], probe, session)?
        .into_iter()
        .map(|v| v.expect("connected component"))
        .collect();
    if let Some(k) = first_violation(g, &vals, probe, session)? {
        anomalies.push(format!(
            "recovered solution violates the equation of missing edge {}",
            describe(g, k)
        ));
    }
    info.status = "identifiable";
    Ok(Outcome {
        statuses: vals.into_iter().map(Status::Identifiable).collect(),
        provenance,
        info,
    })
}

fn describe(g: &EquationGraph, k: usize) -> String {
    let e = &g.edges()[k];
    match e.source {
        Some(s) => s.to_string(),
        None => format!("{{{},{}}}", g.name(e.from), g.name(e.to)),
    }
}

/// DOT view of the equation graph of all rank-2 edges, with each component's
/// identifying cycle highlighted.
pub fn report_dot(m: &TreeScm, report: &IdentReport) -> Result<String, IdentError> {
    let rank2: Vec<MissingEdge> = report
        .edge_ranks
        .iter()
        .filter(|r| r.rank == 2)
        .map(|r| r.edge)
        .collect();
    let nodes: Vec<NodeId> = (1..=m.n()).collect();
    let g = EquationGraph::from_model(&nodes, &rank2)?;
    let mut highlight = Vec::new();
    for c in report.components.iter().filter_map(|c| c.cycle.as_ref()) {
        for (k, &a) in c.iter().enumerate() {
            let b = c[(k + 1) % c.len()];
            if let (Some(la), Some(lb)) = (g.local_index(a), g.local_index(b)) {
                highlight.extend(g.find_edge(la, lb));
            }
        }
    }
    Ok(g.to_dot(&highlight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fastp::syntax::serialize_fastp;

    fn run(json: &str, seed: u64) -> IdentReport {
        let m = TreeScm::from_json(json).unwrap();
        run_identification(&m, &IdentConfig::with_seed(seed)).unwrap()
    }

    #[test]
    fn m1_both_identifiable() {
        let rep = run(r#"{"n":2,"parent":[null,0,1],"bidirected":[[1,2]]}"#, 7);
        let texts: Vec<String> = rep
            .nodes
            .iter()
            .map(|n| match &n.status {
                Status::Identifiable(f) => serialize_fastp(f),
                other => panic!("unexpected {other:?}"),
            })
            .collect();
        assert_eq!(texts, vec!["σ[0,1]/σ[0,0]", "σ[0,2]/σ[0,1]"]);
        assert!(rep.anomalies.is_empty());
    }

    #[test]
    fn chain_rank_one_marks_both() {
        let m = TreeScm::from_json(r#"{"n":2,"parent":[null,0,1],"bidirected":[]}"#).unwrap();
        let rep = run_identification(&m, &IdentConfig::with_seed(1)).unwrap();
        assert_eq!(rep.rank1_marks, vec![1, 2]);
        assert!(rep.nodes.iter().all(|n| n.provenance == Some(Provenance::Rank1)));
    }

    #[test]
    fn isolated_variable_is_unidentifiable() {
        // {0,1} and {0,2} bidirected, {1,2} bidirected: no constraints at all
        let rep = run(r#"{"n":2,"parent":[null,0,1],"bidirected":[[0,1],[0,2],[1,2]]}"#, 3);
        assert!(rep.nodes.iter().all(|n| matches!(n.status, Status::Unidentifiable)));
    }

    #[test]
    fn components_partition() {
        let e = |i, j| MissingEdge::Pair { i, j, p: 0, q: 0 };
        assert_eq!(components(5, &[e(1, 3), e(4, 5)]), vec![vec![1, 3], vec![2], vec![4, 5]]);
    }

    #[test]
    fn single_root_model() {
        let rep = run(r#"{"n":0,"parent":[null],"bidirected":[]}"#, 0);
        assert!(rep.nodes.is_empty());
    }
}
