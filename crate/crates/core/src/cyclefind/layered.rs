//! Tag-weighted walk sums over the layered graph.
//!
//! Layer `k` carries its own copy of every edge `e` with weight
//! `tag(k, e) · W_e`. The block `P_t[i][j]` of the iterated layer product is
//! the sum over all length-`t` walks from `i` to `j` of the walk's tag
//! monomial times its ordered weight product. Distinct walks get distinct
//! monomials, so no cancellation between walks is possible.

use super::weight::Weight2x2;
use crate::ring::Ring;

/// Directed edge `(from, to, weight)` on local node indices.
pub type WeightedEdge<T> = (usize, usize, Weight2x2<T>);

/// Block rows `R[j]` for one fixed start node: `R[j]` sums over walks from
/// the start to `j` of the current length.
#[derive(Clone, Debug)]
pub struct WalkRow<T> {
    blocks: Vec<Option<Weight2x2<T>>>,
    length: usize,
}

impl<T: Clone> WalkRow<T> {
    /// Length-zero walks: the identity block at `start`.
    pub fn start<R: Ring<Element = T>>(ring: &R, nodes: usize, start: usize) -> Self {
        let mut blocks = vec![None; nodes];
        blocks[start] = Some(Weight2x2::identity(ring));
        Self { blocks, length: 0 }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn block(&self, node: usize) -> Option<&Weight2x2<T>> {
        self.blocks[node].as_ref()
    }

    /// Extends every walk by one layer. Edges with `alive == false` are
    /// absent from the layer; `tag(e)` is the tag of edge index `e`.
    pub fn step<R: Ring<Element = T>>(
        &mut self,
        ring: &R,
        edges: &[WeightedEdge<T>],
        alive: Option<&[bool]>,
        mut tag: impl FnMut(usize) -> T,
    ) {
        let mut next: Vec<Option<Weight2x2<T>>> = vec![None; self.blocks.len()];
        for (k, (from, to, w)) in edges.iter().enumerate() {
            if alive.is_some_and(|a| !a[k]) {
                continue;
            }
            let Some(prev) = &self.blocks[*from] else {
                continue;
            };
            let term = w.mul(ring, prev).scale(ring, &tag(k));
            next[*to] = Some(match next[*to].take() {
                Some(acc) => acc.add(ring, &term),
                None => term,
            });
        }
        self.blocks = next;
        self.length += 1;
    }
}

/// Full `n x n` block matrix of length-`t` walk sums; `tag(layer, edge)` with
/// layers numbered from 1. Missing blocks are zero.
pub fn layered_product<R: Ring>(
    ring: &R,
    nodes: usize,
    edges: &[WeightedEdge<R::Element>],
    t: usize,
    mut tag: impl FnMut(usize, usize) -> R::Element,
) -> Vec<Vec<Weight2x2<R::Element>>> {
    let mut rows: Vec<WalkRow<R::Element>> =
        (0..nodes).map(|i| WalkRow::start(ring, nodes, i)).collect();
    // one tag per (layer, edge), shared by all start nodes
    for layer in 1..=t {
        let tags: Vec<R::Element> = (0..edges.len()).map(|e| tag(layer, e)).collect();
        for row in rows.iter_mut() {
            row.step(ring, edges, None, |e| tags[e].clone());
        }
    }
    rows.into_iter()
        .map(|row| {
            (0..nodes)
                .map(|j| row.block(j).cloned().unwrap_or_else(|| Weight2x2::zero(ring)))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclefind::weight::walk_weight;
    use crate::pit::{PitConfig, PitSession, PrimeField, DEFAULT_PRIME};

    fn example_graph(f: &PrimeField) -> Vec<WeightedEdge<crate::pit::FieldElem>> {
        let w = |a: i64, b: i64, c: i64, d: i64| {
            Weight2x2::new(f.from_signed(a), f.from_signed(b), f.from_signed(c), f.from_signed(d))
        };
        // x=0, y=1, z=2, u=3
        let fwd = vec![
            (0, 3, w(1, 2, 2, 1)),
            (3, 2, w(1, -1, 0, 1)),
            (2, 0, w(1, 0, 0, 1)),
            (0, 1, w(1, 0, 2, 1)),
            (1, 2, w(1, 0, -2, 1)),
        ];
        let mut all = Vec::new();
        for (a, b, m) in fwd {
            all.push((b, a, m.adjoint(f)));
            all.push((a, b, m));
        }
        all
    }

    /// Sum over explicitly enumerated walks with the same tags.
    fn brute<R: Ring>(
        ring: &R,
        edges: &[WeightedEdge<R::Element>],
        i: usize,
        j: usize,
        t: usize,
        tag: &dyn Fn(usize, usize) -> R::Element,
    ) -> Weight2x2<R::Element> {
        let mut total = Weight2x2::zero(ring);
        let mut stack: Vec<Vec<usize>> = vec![vec![]];
        while let Some(walk) = stack.pop() {
            let at = walk.last().map(|&e| edges[e].1).unwrap_or(i);
            if walk.len() == t {
                if at == j {
                    let steps: Vec<_> = walk.iter().map(|&e| edges[e].clone()).collect();
                    let mut w = walk_weight(ring, &steps).unwrap();
                    for (layer, &e) in walk.iter().enumerate() {
                        w = w.scale(ring, &tag(layer + 1, e));
                    }
                    total = total.add(ring, &w);
                }
                continue;
            }
            for (k, e) in edges.iter().enumerate() {
                if e.0 == at {
                    let mut next = walk.clone();
                    next.push(k);
                    stack.push(next);
                }
            }
        }
        total
    }

    #[test]
    fn matches_walk_enumeration() {
        let f = PrimeField::new(DEFAULT_PRIME).unwrap();
        let edges = example_graph(&f);
        let mut s = PitSession::new(&PitConfig::new(3, 100)).unwrap();
        let tags: Vec<Vec<_>> = (0..=4).map(|_| s.fresh_point(edges.len()).unwrap()).collect();
        let tag = |l: usize, e: usize| tags[l][e];
        for t in 1..=4 {
            let p = layered_product(&f, 4, &edges, t, tag);
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(p[i][j], brute(&f, &edges, i, j, t, &tag), "t={t} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn unit_tags_cancel_orientations() {
        let f = PrimeField::new(DEFAULT_PRIME).unwrap();
        let edges = example_graph(&f);
        let p = layered_product(&f, 4, &edges, 3, |_, _| f.one());
        // closed 3-walks at x: the two triangles (product I each) and the
        // two orientations of x,u,z
        let cyc = Weight2x2::new(-1i64, 1, 2, 1).map(|&v| f.from_signed(v));
        let expect = Weight2x2::identity(&f)
            .scale(&f, &f.from_i64(2))
            .add(&f, &cyc)
            .add(&f, &cyc.adjoint(&f));
        assert_eq!(p[0][0], expect);
        // M + adj(M) = tr(M)·I, so without random tags the two orientations
        // of the identifying cycle hide each other
        assert!(p[0][0].is_scalar_multiple(&f));
    }

    #[test]
    fn edgeless_graph_gives_zero() {
        let f = PrimeField::new(DEFAULT_PRIME).unwrap();
        for t in 1..4 {
            let p = layered_product(&f, 3, &[], t, |_, _| f.one());
            assert!(p.iter().flatten().all(|w| *w == Weight2x2::zero(&f)));
        }
    }

    #[test]
    fn doubled_edge_two_walk_is_scalar() {
        let f = PrimeField::new(DEFAULT_PRIME).unwrap();
        let w = Weight2x2::new(3i64, 5, 7, 11).map(|&v| f.from_signed(v));
        let edges = vec![(0, 1, w.clone()), (1, 0, w.adjoint(&f))];
        let p = layered_product(&f, 2, &edges, 2, |_, _| f.one());
        assert_eq!(p[0][0], Weight2x2::identity(&f).scale(&f, &w.det(&f)));
    }
}
