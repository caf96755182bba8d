//! 2x2 edge weights of the equation graph.
//!
//! A bilinear equation `a·x·y − b·x + c·y − d = 0` is stored on the edge
//! `x -> y` as `[[b, d], [a, c]]`: acting on `(x, 1)` it yields the numerator
//! and denominator of `y = (b·x + d)/(a·x + c)`. The reverse edge carries the
//! adjoint `[[c, −d], [−a, b]]`.

use crate::error::IdentError;
use crate::model::{MissingEdge, NodeId};
use crate::ring::Ring;

#[derive(Clone, Debug, PartialEq)]
pub struct Weight2x2<T> {
    pub m: [[T; 2]; 2],
}

/// Orientation of an equation-graph edge relative to its missing edge
/// `{i, j}` with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// From the variable of `i` to the variable of `j`.
    Forward,
    /// From the variable of `j` to the variable of `i`.
    Reverse,
}

impl<T: Clone> Weight2x2<T> {
    pub fn new(m11: T, m12: T, m21: T, m22: T) -> Self {
        Self {
            m: [[m11, m12], [m21, m22]],
        }
    }

    /// Builds `[[b, d], [a, c]]` from the equation coefficients.
    pub fn from_coefficients(a: T, b: T, c: T, d: T) -> Self {
        Self::new(b, d, a, c)
    }

    pub fn a(&self) -> &T {
        &self.m[1][0]
    }

    pub fn b(&self) -> &T {
        &self.m[0][0]
    }

    pub fn c(&self) -> &T {
        &self.m[1][1]
    }

    pub fn d(&self) -> &T {
        &self.m[0][1]
    }

    pub fn identity<R: Ring<Element = T>>(ring: &R) -> Self {
        Self::new(ring.one(), ring.zero(), ring.zero(), ring.one())
    }

    pub fn zero<R: Ring<Element = T>>(ring: &R) -> Self {
        Self::new(ring.zero(), ring.zero(), ring.zero(), ring.zero())
    }

    /// `self · rhs`.
    pub fn mul<R: Ring<Element = T>>(&self, ring: &R, rhs: &Self) -> Self {
        let e = |i: usize, j: usize| {
            ring.add(
                &ring.mul(&self.m[i][0], &rhs.m[0][j]),
                &ring.mul(&self.m[i][1], &rhs.m[1][j]),
            )
        };
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn add<R: Ring<Element = T>>(&self, ring: &R, rhs: &Self) -> Self {
        let e = |i: usize, j: usize| ring.add(&self.m[i][j], &rhs.m[i][j]);
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn scale<R: Ring<Element = T>>(&self, ring: &R, s: &T) -> Self {
        let e = |i: usize, j: usize| ring.mul(s, &self.m[i][j]);
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    /// `[[m22, −m12], [−m21, m11]]`; `adj(W)·W = det(W)·I`.
    pub fn adjoint<R: Ring<Element = T>>(&self, ring: &R) -> Self {
        Self::new(
            self.m[1][1].clone(),
            ring.neg(&self.m[0][1]),
            ring.neg(&self.m[1][0]),
            self.m[0][0].clone(),
        )
    }

    pub fn transpose(&self) -> Self {
        Self::new(
            self.m[0][0].clone(),
            self.m[1][0].clone(),
            self.m[0][1].clone(),
            self.m[1][1].clone(),
        )
    }

    pub fn det<R: Ring<Element = T>>(&self, ring: &R) -> T {
        ring.sub(
            &ring.mul(&self.m[0][0], &self.m[1][1]),
            &ring.mul(&self.m[0][1], &self.m[1][0]),
        )
    }

    /// The three quantities whose joint vanishing means "scalar multiple of
    /// the identity": `m21`, `m12` and `m11 − m22`.
    pub fn non_scalar_parts<R: Ring<Element = T>>(&self, ring: &R) -> [T; 3] {
        [
            self.m[1][0].clone(),
            self.m[0][1].clone(),
            ring.sub(&self.m[0][0], &self.m[1][1]),
        ]
    }

    /// Exact test; meaningful for rings with a real zero test.
    pub fn is_scalar_multiple<R: Ring<Element = T>>(&self, ring: &R) -> bool {
        self.non_scalar_parts(ring).iter().all(|x| ring.is_zero(x))
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Weight2x2<U> {
        Weight2x2::new(
            f(&self.m[0][0]),
            f(&self.m[0][1]),
            f(&self.m[1][0]),
            f(&self.m[1][1]),
        )
    }
}

/// Weight of the equation-graph edge for a non-root missing edge `{i, j}`.
///
/// With `x = λ_{p,i}` and `y = λ_{q,j}` the missing-edge equation
/// `x·y·σ_pq − x·σ_pj − y·σ_iq + σ_ij = 0` has `a = σ_pq`, `b = σ_pj`,
/// `c = −σ_iq`, `d = −σ_ij`.
pub fn edge_weight<R: Ring>(
    ring: &R,
    sigma: impl Fn(NodeId, NodeId) -> R::Element,
    edge: &MissingEdge,
    direction: Direction,
) -> Result<Weight2x2<R::Element>, IdentError> {
    let MissingEdge::Pair { i, j, p, q } = *edge else {
        return Err(IdentError::Contract(format!(
            "root-incident missing edge {edge} has no equation-graph weight"
        )));
    };
    let forward = Weight2x2::from_coefficients(
        sigma(p, q),
        sigma(p, j),
        ring.neg(&sigma(i, q)),
        ring.neg(&sigma(i, j)),
    );
    Ok(match direction {
        Direction::Forward => forward,
        Direction::Reverse => forward.adjoint(ring),
    })
}

/// Ordered product of a walk's edge weights, left-multiplying as the walk
/// proceeds: for steps `e1, e2, .., ek` the result is `M_ek ⋯ M_e2 · M_e1`.
pub fn walk_weight<R: Ring>(
    ring: &R,
    steps: &[(NodeId, NodeId, Weight2x2<R::Element>)],
) -> Result<Weight2x2<R::Element>, IdentError> {
    let mut acc = Weight2x2::identity(ring);
    let mut at: Option<NodeId> = None;
    for (from, to, w) in steps {
        if let Some(cur) = at {
            if cur != *from {
                return Err(IdentError::Contract(format!(
                    "walk is not contiguous: step starts at {from} but previous step ended at {cur}"
                )));
            }
        }
        acc = w.mul(ring, &acc);
        at = Some(*to);
    }
    Ok(acc)
}
