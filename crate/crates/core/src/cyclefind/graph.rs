//! The equation graph: one node per λ variable, two opposite directed edges
//! per rank-2 missing edge.

use std::collections::VecDeque;
use std::fmt::Write as _;

use super::weight::{edge_weight, Direction, Weight2x2};
use crate::error::IdentError;
use crate::fastp::expr::{Expr, ExprRing};
use crate::model::{MissingEdge, NodeId};
use crate::ring::Ring;

#[derive(Clone, Debug)]
pub struct GraphEdge {
    /// Local index of the tail.
    pub from: usize,
    /// Local index of the head.
    pub to: usize,
    pub weight: Weight2x2<Expr>,
    /// The missing edge this equation comes from, if built from a model.
    pub source: Option<MissingEdge>,
    pub direction: Direction,
}

/// Directed graph on local indices `0..len`; edges sorted by `(from, to)`.
#[derive(Clone, Debug)]
pub struct EquationGraph {
    labels: Vec<NodeId>,
    names: Vec<String>,
    edges: Vec<GraphEdge>,
}

impl EquationGraph {
    /// Equation graph over the given model nodes (sorted ascending) using the
    /// given rank-2 missing edges, whose endpoints must lie in `nodes`.
    pub fn from_model(nodes: &[NodeId], rank2: &[MissingEdge]) -> Result<Self, IdentError> {
        let mut labels = nodes.to_vec();
        labels.sort_unstable();
        labels.dedup();
        let local = |v: NodeId| {
            labels.binary_search(&v).map_err(|_| {
                IdentError::Contract(format!("node {v} is not part of the equation graph"))
            })
        };
        let mut edges = Vec::with_capacity(2 * rank2.len());
        for e in rank2 {
            let (i, j) = e.endpoints();
            let (li, lj) = (local(i)?, local(j)?);
            for (dir, from, to) in [(Direction::Forward, li, lj), (Direction::Reverse, lj, li)] {
                edges.push(GraphEdge {
                    from,
                    to,
                    weight: edge_weight(&ExprRing, Expr::sigma, e, dir)?,
                    source: Some(*e),
                    direction: dir,
                });
            }
        }
        let names = labels.iter().map(|v| v.to_string()).collect();
        Ok(Self::assemble(labels, names, edges))
    }

    /// Graph with constant integer weights; each listed edge also gets its
    /// adjoint in the opposite direction.
    pub fn from_weights(names: &[&str], edges: &[(usize, usize, Weight2x2<i64>)]) -> Self {
        let r = ExprRing;
        let mut out = Vec::with_capacity(2 * edges.len());
        for (from, to, w) in edges {
            let fwd = w.map(|&c| Expr::constant(c));
            let rev = fwd.adjoint(&r);
            out.push(GraphEdge {
                from: *from,
                to: *to,
                weight: fwd,
                source: None,
                direction: Direction::Forward,
            });
            out.push(GraphEdge {
                from: *to,
                to: *from,
                weight: rev,
                source: None,
                direction: Direction::Reverse,
            });
        }
        let labels = (0..names.len()).collect();
        Self::assemble(labels, names.iter().map(|s| s.to_string()).collect(), out)
    }

    fn assemble(labels: Vec<NodeId>, names: Vec<String>, mut edges: Vec<GraphEdge>) -> Self {
        edges.sort_by_key(|e| (e.from, e.to));
        Self {
            labels,
            names,
            edges,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Model node behind a local index.
    pub fn label(&self, local: usize) -> NodeId {
        self.labels[local]
    }

    pub fn labels(&self) -> &[NodeId] {
        &self.labels
    }

    pub fn name(&self, local: usize) -> &str {
        &self.names[local]
    }

    pub fn local_index(&self, node: NodeId) -> Option<usize> {
        self.labels.binary_search(&node).ok()
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn find_edge(&self, from: usize, to: usize) -> Option<usize> {
        self.edges
            .binary_search_by_key(&(from, to), |e| (e.from, e.to))
            .ok()
    }

    /// Edge weights evaluated into another ring.
    pub fn numeric_weights<R: Ring>(
        &self,
        mut eval: impl FnMut(&Expr) -> R::Element,
    ) -> Vec<Weight2x2<R::Element>> {
        self.edges
            .iter()
            .map(|e| {
                let m = &e.weight.m;
                Weight2x2::new(eval(&m[0][0]), eval(&m[0][1]), eval(&m[1][0]), eval(&m[1][1]))
            })
            .collect()
    }

    /// Breadth-first spanning tree from `root`, as `(node, Some(edge index))`
    /// pairs in visiting order; the root comes first with `None`.
    pub fn bfs_tree(&self, roots: &[usize]) -> Vec<(usize, Option<usize>)> {
        let mut seen = vec![false; self.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for &r in roots {
            if !seen[r] {
                seen[r] = true;
                order.push((r, None));
                queue.push_back(r);
            }
        }
        while let Some(u) = queue.pop_front() {
            for (k, e) in self.edges.iter().enumerate() {
                if e.from == u && !seen[e.to] {
                    seen[e.to] = true;
                    order.push((e.to, Some(k)));
                    queue.push_back(e.to);
                }
            }
        }
        order
    }

    /// Hop distances from `start` along edges flagged alive; `forward` walks
    /// edges tail to head, otherwise head to tail.
    pub fn distances(&self, start: usize, alive: &[bool], forward: bool) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for (k, e) in self.edges.iter().enumerate() {
                if !alive[k] {
                    continue;
                }
                let (a, b) = if forward { (e.from, e.to) } else { (e.to, e.from) };
                if a == u && dist[b] == usize::MAX {
                    dist[b] = dist[u] + 1;
                    queue.push_back(b);
                }
            }
        }
        dist
    }

    /// DOT rendering; edges of `cycle` (edge indices) are drawn bold.
    pub fn to_dot(&self, cycle: &[usize]) -> String {
        let mut out = String::from("digraph equations {\n");
        for (k, name) in self.names.iter().enumerate() {
            let _ = writeln!(out, "  v{k} [label=\"{name}\"];");
        }
        for (k, e) in self.edges.iter().enumerate() {
            let label = match &e.source {
                Some(src) => format!("{src} {:?}", e.direction),
                None => format!("{:?}", e.direction),
            };
            let style = if cycle.contains(&k) {
                ", style=bold, color=red"
            } else {
                ""
            };
            let _ = writeln!(out, "  v{} -> v{} [label=\"{label}\"{style}];", e.from, e.to);
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_graph_has_paired_edges() {
        let e = MissingEdge::Pair { i: 1, j: 2, p: 0, q: 1 };
        let g = EquationGraph::from_model(&[2, 1], &[e]).unwrap();
        assert_eq!(g.labels(), &[1, 2]);
        assert_eq!(g.edges().len(), 2);
        assert_eq!((g.edges()[0].from, g.edges()[0].to), (0, 1));
        assert_eq!(g.edges()[0].direction, Direction::Forward);
        assert_eq!(g.edges()[1].direction, Direction::Reverse);
        assert!(EquationGraph::from_model(&[1], &[e]).is_err());
    }

    #[test]
    fn constant_graph_sorted_and_searchable() {
        let w = Weight2x2::new(1, 2, 3, 4);
        let g = EquationGraph::from_weights(&["a", "b", "c"], &[(2, 0, w.clone()), (0, 1, w)]);
        let keys: Vec<_> = g.edges().iter().map(|e| (e.from, e.to)).collect();
        assert_eq!(keys, vec![(0, 1), (0, 2), (1, 0), (2, 0)]);
        assert_eq!(g.find_edge(2, 0), Some(3));
        assert_eq!(g.find_edge(1, 2), None);
        let dot = g.to_dot(&[0]);
        assert!(dot.contains("v0 -> v1") && dot.contains("bold"));
    }

    #[test]
    fn bfs_and_distances() {
        let w = Weight2x2::new(1, 0, 0, 1);
        let g = EquationGraph::from_weights(&["a", "b", "c", "d"], &[(0, 1, w.clone()), (1, 2, w)]);
        let tree = g.bfs_tree(&[0]);
        assert_eq!(tree.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 1, 2]);
        let alive = vec![true; g.edges().len()];
        let d = g.distances(0, &alive, true);
        assert_eq!(&d[..3], &[0, 1, 2]);
        assert_eq!(d[3], usize::MAX);
    }
}
