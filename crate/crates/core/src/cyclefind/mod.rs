//! Identifying cycles in the equation graph.

pub mod graph;
pub mod layered;
pub mod weight;

use serde::Serialize;

use crate::error::IdentError;
use crate::fastp::expr::{Expr, ExprRing};
use crate::pit::{FieldElem, PitSession};
use crate::probe::Probe;
use crate::ring::Ring;

pub use graph::{EquationGraph, GraphEdge};
pub use layered::{layered_product, WalkRow, WeightedEdge};
pub use weight::{edge_weight, walk_weight, Direction, Weight2x2};

/// Solution structure of the quadratic attached to a cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleClass {
    TwoSolutions,
    OneSolution,
    NoSolution,
    Infinite,
}

/// A simple cycle of the equation graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentifyingCycle {
    /// Local node indices in walk order, starting at the base node.
    pub nodes: Vec<usize>,
    /// Edge indices in walk order; edge `k` leaves `nodes[k]`.
    pub edges: Vec<usize>,
}

impl IdentifyingCycle {
    pub fn base(&self) -> usize {
        self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Symbolic cycle product `M_last ⋯ M_first`.
pub fn cycle_weight(g: &EquationGraph, cycle: &IdentifyingCycle) -> Weight2x2<Expr> {
    let r = ExprRing;
    cycle
        .edges
        .iter()
        .fold(Weight2x2::identity(&r), |acc, &e| g.edges()[e].weight.mul(&r, &acc))
}

/// Walk search state: numeric edge weights at every probe point.
pub struct WalkSearch<'a> {
    graph: &'a EquationGraph,
    weights: Vec<Vec<WeightedEdge<FieldElem>>>,
    /// Declared total degree of a walk-sum entry (tags plus parameters).
    walk_degree: u64,
}

impl<'a> WalkSearch<'a> {
    pub fn new(graph: &'a EquationGraph, probe: &mut Probe, walk_degree: u64) -> Self {
        let weights = (0..probe.points())
            .map(|k| {
                graph
                    .numeric_weights::<crate::pit::PrimeField>(|e| probe.eval(k, e))
                    .into_iter()
                    .zip(graph.edges())
                    .map(|(w, e)| (e.from, e.to, w))
                    .collect()
            })
            .collect();
        Self {
            graph,
            weights,
            walk_degree,
        }
    }

    fn points(&self) -> usize {
        self.weights.len()
    }

    /// PIT verdict on "the closed-walk sum at `node` is a scalar multiple of
    /// the identity", given the sum at every point. Charges one verdict per
    /// tested entry.
    fn is_identifying(
        &self,
        probe: &Probe,
        session: &mut PitSession,
        sums: &[Option<Weight2x2<FieldElem>>],
    ) -> Result<bool, IdentError> {
        let f = probe.field();
        for part in 0..3 {
            session.charge(self.walk_degree)?;
            let nonzero = sums.iter().any(|s| match s {
                Some(w) => !f.is_zero(&w.non_scalar_parts(f)[part]),
                None => false,
            });
            if nonzero {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Closed length-`t` walk sums at `node` with fresh tags, restricted to
    /// alive edges.
    fn closed_sums(
        &self,
        probe: &Probe,
        session: &mut PitSession,
        node: usize,
        t: usize,
        alive: Option<&[bool]>,
    ) -> Result<Vec<Option<Weight2x2<FieldElem>>>, IdentError> {
        let f = probe.field();
        let mut out = Vec::with_capacity(self.points());
        for edges in &self.weights {
            let mut row = WalkRow::start(f, self.graph.len(), node);
            for _ in 0..t {
                let tags = session.fresh_point(edges.len())?;
                row.step(f, edges, alive, |e| tags[e]);
            }
            out.push(row.block(node).cloned());
        }
        Ok(out)
    }

    /// Whether `node` lies on an identifying closed walk of length `t`.
    pub fn has_identifying_walk(
        &self,
        probe: &Probe,
        session: &mut PitSession,
        node: usize,
        t: usize,
    ) -> Result<bool, IdentError> {
        let sums = self.closed_sums(probe, session, node, t, None)?;
        self.is_identifying(probe, session, &sums)
    }

    /// Sweeps `t = 2..=len` over all start nodes; at the first hit, extracts a
    /// simple cycle through the lowest hit node by edge deletion.
    pub fn find_identifying_cycle(
        &self,
        probe: &Probe,
        session: &mut PitSession,
    ) -> Result<Option<IdentifyingCycle>, IdentError> {
        let f = probe.field();
        let n = self.graph.len();
        if n < 2 || self.graph.edges().is_empty() {
            return Ok(None);
        }
        // rows[k][i]: walks from i at point k; layer tags are drawn once and
        // shared by every start node and every later t.
        let mut rows: Vec<Vec<WalkRow<FieldElem>>> = (0..self.points())
            .map(|_| (0..n).map(|i| WalkRow::start(f, n, i)).collect())
            .collect();
        for t in 1..=n {
            for (k, edges) in self.weights.iter().enumerate() {
                let tags = session.fresh_point(edges.len())?;
                for row in rows[k].iter_mut() {
                    row.step(f, edges, None, |e| tags[e]);
                }
            }
            if t < 2 {
                continue;
            }
            for i in 0..n {
                let sums: Vec<_> = rows.iter().map(|r| r[i].block(i).cloned()).collect();
                if self.is_identifying(probe, session, &sums)? {
                    return self.extract(probe, session, i, t).map(Some);
                }
            }
        }
        Ok(None)
    }

    fn extract(
        &self,
        probe: &Probe,
        session: &mut PitSession,
        start: usize,
        t: usize,
    ) -> Result<IdentifyingCycle, IdentError> {
        let edges = self.graph.edges();
        let all = vec![true; edges.len()];
        let from_start = self.graph.distances(start, &all, true);
        let to_start = self.graph.distances(start, &all, false);
        // an edge can only lie on a closed t-walk at start if it is close enough
        let mut alive: Vec<bool> = edges
            .iter()
            .map(|e| {
                from_start[e.from] != usize::MAX
                    && to_start[e.to] != usize::MAX
                    && from_start[e.from] + 1 + to_start[e.to] <= t
            })
            .collect();
        for k in 0..edges.len() {
            if !alive[k] {
                continue;
            }
            alive[k] = false;
            let sums = self.closed_sums(probe, session, start, t, Some(&alive))?;
            if !self.is_identifying(probe, session, &sums)? {
                alive[k] = true;
            }
        }
        self.trace_cycle(start, t, &alive).ok_or_else(|| {
            IdentError::Contract(format!(
                "edge deletion at node {} left {} edges that do not form a simple {t}-cycle",
                self.graph.label(start),
                alive.iter().filter(|&&a| a).count()
            ))
        })
    }

    fn trace_cycle(&self, start: usize, t: usize, alive: &[bool]) -> Option<IdentifyingCycle> {
        let edges = self.graph.edges();
        let kept: Vec<usize> = (0..edges.len()).filter(|&k| alive[k]).collect();
        if kept.len() != t {
            return None;
        }
        let mut nodes = vec![start];
        let mut walk = Vec::with_capacity(t);
        let mut at = start;
        for step in 0..t {
            let mut out = kept.iter().filter(|&&k| edges[k].from == at);
            let k = *out.next()?;
            if out.next().is_some() {
                return None;
            }
            walk.push(k);
            at = edges[k].to;
            if step + 1 < t {
                if nodes.contains(&at) {
                    return None;
                }
                nodes.push(at);
            }
        }
        (at == start).then_some(IdentifyingCycle { nodes, edges: walk })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fastp::expr::eval_expr;
    use crate::pit::{PitConfig, PrimeField, DEFAULT_PRIME};

    fn example_graph(with_u: bool) -> EquationGraph {
        let w = Weight2x2::new;
        let mut edges = vec![(0, 1, w(1, 0, 2, 1)), (1, 2, w(1, 0, -2, 1)), (2, 0, w(1, 0, 0, 1))];
        if with_u {
            edges.push((0, 3, w(1, 2, 2, 1)));
            edges.push((3, 2, w(1, -1, 0, 1)));
        }
        let names: &[&str] = if with_u { &["x", "y", "z", "u"] } else { &["x", "y", "z"] };
        EquationGraph::from_weights(names, &edges)
    }

    fn setup(seed: u64) -> (PitSession, Probe) {
        let s = PitSession::new(&PitConfig::new(seed, 64)).unwrap();
        let p = Probe::constant_only(PrimeField::new(DEFAULT_PRIME).unwrap(), 3);
        (s, p)
    }

    #[test]
    fn finds_the_u_cycle() {
        let g = example_graph(true);
        for seed in 0..5 {
            let (mut s, mut p) = setup(seed);
            let search = WalkSearch::new(&g, &mut p, 64);
            let c = search.find_identifying_cycle(&p, &mut s).unwrap().unwrap();
            let mut names: Vec<_> = c.nodes.iter().map(|&v| g.name(v)).collect();
            names.sort();
            assert_eq!(names, vec!["u", "x", "z"]);
            let w = cycle_weight(&g, &c);
            let zero = |_: usize, _: usize| 0i64;
            assert!(!w.map(|e| eval_expr(&ZRing, &zero, e)).is_scalar_multiple(&ZRing));
        }
    }

    #[test]
    fn identity_triangle_alone_has_none() {
        let g = example_graph(false);
        let (mut s, mut p) = setup(1);
        let search = WalkSearch::new(&g, &mut p, 64);
        assert!(search.find_identifying_cycle(&p, &mut s).unwrap().is_none());
        assert!(!search.has_identifying_walk(&p, &mut s, 0, 3).unwrap());
    }

    #[test]
    fn walk_test_on_example() {
        let g = example_graph(true);
        let (mut s, mut p) = setup(2);
        let search = WalkSearch::new(&g, &mut p, 64);
        assert!(search.has_identifying_walk(&p, &mut s, 0, 3).unwrap());
        assert!(!search.has_identifying_walk(&p, &mut s, 0, 2).unwrap());
        assert!(!search.has_identifying_walk(&p, &mut s, 1, 3).unwrap());
    }

    #[test]
    fn tree_graph_has_none() {
        let w = Weight2x2::new(1, 2, 3, 5);
        let g = EquationGraph::from_weights(&["a", "b", "c"], &[(0, 1, w.clone()), (1, 2, w)]);
        let (mut s, mut p) = setup(4);
        let search = WalkSearch::new(&g, &mut p, 64);
        assert!(search.find_identifying_cycle(&p, &mut s).unwrap().is_none());
    }

    struct ZRing;
    impl Ring for ZRing {
        type Element = i64;
        fn zero(&self) -> i64 {
            0
        }
        fn one(&self) -> i64 {
            1
        }
        fn add(&self, a: &i64, b: &i64) -> i64 {
            a + b
        }
        fn sub(&self, a: &i64, b: &i64) -> i64 {
            a - b
        }
        fn mul(&self, a: &i64, b: &i64) -> i64 {
            a * b
        }
        fn neg(&self, a: &i64) -> i64 {
            -a
        }
        fn is_zero(&self, a: &i64) -> bool {
            *a == 0
        }
    }
}
