//! Covariance matrices of tree-shaped models at concrete parameter values.

use std::collections::BTreeMap;

use crate::error::{OracleError, PitError};
use crate::model::{NodeId, TreeScm};
use crate::pit::{FieldElem, PitSession};
use crate::ring::Ring;

/// Largest model the exhaustive trek enumeration accepts.
pub const TREK_ORACLE_MAX_N: usize = 10;

/// Values for every directed and bidirected parameter of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamAssignment<T> {
    /// `lambda[i]` is the coefficient of `parent[i] -> i`; index 0 is unused.
    pub lambda: Vec<T>,
    /// Keys are ordered pairs `(a, b)` with `a <= b`; the diagonal is always present.
    pub omega: BTreeMap<(NodeId, NodeId), T>,
}

impl<T: Clone> ParamAssignment<T> {
    pub fn omega(&self, a: NodeId, b: NodeId) -> Option<&T> {
        self.omega.get(&(a.min(b), a.max(b)))
    }

    pub fn lambda(&self, node: NodeId) -> &T {
        &self.lambda[node]
    }

    /// Builds an assignment from caller-chosen values, checking the key set.
    pub fn from_parts(
        m: &TreeScm,
        lambda: Vec<T>,
        omega: BTreeMap<(NodeId, NodeId), T>,
    ) -> Option<Self> {
        if lambda.len() != m.node_count() {
            return None;
        }
        let expected: Vec<(NodeId, NodeId)> = (0..=m.n())
            .map(|v| (v, v))
            .chain(m.bidirected())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let keys: Vec<_> = omega.keys().copied().collect();
        if keys != expected {
            return None;
        }
        Some(Self { lambda, omega })
    }
}

/// Symmetric `(n+1) x (n+1)` covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaMatrix<T> {
    entries: Vec<Vec<T>>,
}

impl<T: Clone> SigmaMatrix<T> {
    pub fn from_rows(entries: Vec<Vec<T>>) -> Self {
        Self { entries }
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> &T {
        &self.entries[i][j]
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.entries
    }
}

/// Draws uniform values for every parameter; diagonal error variances are
/// resampled until nonzero.
pub fn sample_assignment(
    m: &TreeScm,
    session: &mut PitSession,
) -> Result<ParamAssignment<FieldElem>, PitError> {
    let mut lambda = vec![FieldElem(0)];
    lambda.extend(session.fresh_point(m.n())?);
    let mut omega = BTreeMap::new();
    for v in 0..=m.n() {
        omega.insert((v, v), session.fresh_nonzero()?);
    }
    for (a, b) in m.bidirected() {
        omega.insert((a, b), session.fresh_point(1)?[0]);
    }
    Ok(ParamAssignment { lambda, omega })
}

/// Total path weights `B[i][u]` of the directed path `u -> .. -> i`
/// (zero when `u` is not an ancestor-or-self of `i`). Rows are filled in
/// topological order: `B[i] = e_i + lambda_i * B[parent(i)]`.
pub fn path_weights<R: Ring>(
    ring: &R,
    m: &TreeScm,
    a: &ParamAssignment<R::Element>,
) -> Vec<Vec<R::Element>> {
    let dim = m.node_count();
    let mut b = vec![vec![ring.zero(); dim]; dim];
    for &i in m.topological_order() {
        if let Some(p) = m.parent(i) {
            let row: Vec<_> = b[p].iter().map(|x| ring.mul(&a.lambda[i], x)).collect();
            b[i] = row;
        }
        b[i][i] = ring.one();
    }
    b
}

/// `Σ = (I - Λ)^{-1} Ω (I - Λ)^{-T}`, with the inverse obtained by
/// back-substitution along the tree.
pub fn sigma_matrix<R: Ring>(
    ring: &R,
    m: &TreeScm,
    a: &ParamAssignment<R::Element>,
) -> SigmaMatrix<R::Element> {
    let dim = m.node_count();
    let b = path_weights(ring, m, a);

    // C = B Ω, using the sparsity of Ω (diagonal plus bidirected pairs).
    let mut c = vec![vec![ring.zero(); dim]; dim];
    for (i, row) in c.iter_mut().enumerate() {
        for (&(u, v), w) in &a.omega {
            if !ring.is_zero(&b[i][u]) {
                row[v] = ring.add(&row[v], &ring.mul(&b[i][u], w));
            }
            if u != v && !ring.is_zero(&b[i][v]) {
                row[u] = ring.add(&row[u], &ring.mul(&b[i][v], w));
            }
        }
    }

    let mut sigma = vec![vec![ring.zero(); dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let mut acc = ring.zero();
            for (k, bjk) in b[j].iter().enumerate() {
                if !ring.is_zero(bjk) {
                    acc = ring.add(&acc, &ring.mul(&c[i][k], bjk));
                }
            }
            sigma[j][i] = acc.clone();
            sigma[i][j] = acc;
        }
    }
    SigmaMatrix::from_rows(sigma)
}

/// Wright's trek rule by explicit enumeration: every trek between `i` and `j`
/// is a pair of directed paths descending from tops `u` (to `i`) and `v`
/// (to `j`) joined either by `u == v` (monomial gets `ω_uu`) or by a
/// bidirected edge `u <-> v`.
pub fn sigma_trek_oracle<R: Ring>(
    ring: &R,
    m: &TreeScm,
    a: &ParamAssignment<R::Element>,
    i: NodeId,
    j: NodeId,
) -> Result<R::Element, OracleError> {
    if m.n() > TREK_ORACLE_MAX_N {
        return Err(OracleError::SizeGuard {
            what: "n",
            value: m.n(),
            limit: TREK_ORACLE_MAX_N,
        });
    }
    let left = descending_paths(ring, m, a, i);
    let right = descending_paths(ring, m, a, j);
    let mut total = ring.zero();
    for (u, wu) in &left {
        for (v, wv) in &right {
            let top = if u == v {
                a.omega(*u, *u).cloned()
            } else {
                a.omega(*u, *v).cloned()
            };
            if let Some(w) = top {
                let mono = ring.mul(&ring.mul(wu, &w), wv);
                total = ring.add(&total, &mono);
            }
        }
    }
    Ok(total)
}

/// All directed paths ending at `target`, as (top node, product of labels),
/// found by walking parent pointers upward one edge at a time.
fn descending_paths<R: Ring>(
    ring: &R,
    m: &TreeScm,
    a: &ParamAssignment<R::Element>,
    target: NodeId,
) -> Vec<(NodeId, R::Element)> {
    let mut out = vec![(target, ring.one())];
    let mut cur = target;
    let mut weight = ring.one();
    while let Some(p) = m.parent(cur) {
        weight = ring.mul(&weight, &a.lambda[cur]);
        out.push((p, weight.clone()));
        cur = p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pit::{PitConfig, PrimeField};

    const M1: &str = r#"{"n":2,"parent":[null,0,1],"bidirected":[[1,2]]}"#;
    const M2: &str = r#"{"n":4,"parent":[null,0,1,0,1],"bidirected":[[2,4],[1,4]]}"#;

    fn session(seed: u64) -> PitSession {
        PitSession::new(&PitConfig::new(seed, 1000)).unwrap()
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = TreeScm::from_json(M1).unwrap();
        let a = sample_assignment(&m, &mut session(7)).unwrap();
        let b = sample_assignment(&m, &mut session(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn omega_keys_follow_model() {
        let chain = TreeScm::from_json(r#"{"n":2,"parent":[null,0,1],"bidirected":[]}"#).unwrap();
        let a = sample_assignment(&chain, &mut session(1)).unwrap();
        assert!(a.omega.keys().all(|(u, v)| u == v));
        assert!(a.omega.values().all(|w| !w.is_zero()));

        let m2 = TreeScm::from_json(M2).unwrap();
        let a2 = sample_assignment(&m2, &mut session(2)).unwrap();
        assert_eq!(a2.lambda.len() - 1, 4);
        assert_eq!(a2.omega.len(), 5 + 2);
        assert_eq!(a2.omega.keys().filter(|(u, v)| u != v).count(), 2);
        assert!(ParamAssignment::from_parts(&m2, a2.lambda.clone(), a2.omega.clone()).is_some());
    }

    #[test]
    fn m1_closed_forms_with_unit_root_variance() {
        let f = PrimeField::new(crate::pit::DEFAULT_PRIME).unwrap();
        let m = TreeScm::from_json(M1).unwrap();
        let mut a = sample_assignment(&m, &mut session(9)).unwrap();
        a.omega.insert((0, 0), f.one());
        let s = sigma_matrix(&f, &m, &a);
        assert_eq!(*s.get(0, 1), a.lambda[1]);
        assert_eq!(*s.get(0, 2), f.mul(&a.lambda[1], &a.lambda[2]));
    }

    #[test]
    fn zero_lambda_gives_omega() {
        let f = PrimeField::new(crate::pit::DEFAULT_PRIME).unwrap();
        let m = TreeScm::from_json(M2).unwrap();
        let mut a = sample_assignment(&m, &mut session(4)).unwrap();
        for l in a.lambda.iter_mut() {
            *l = f.zero();
        }
        let s = sigma_matrix(&f, &m, &a);
        for i in 0..=4 {
            for j in 0..=4 {
                let w = a.omega(i, j).copied().unwrap_or(f.zero());
                assert_eq!(*s.get(i, j), w);
            }
        }
    }

    #[test]
    fn m1_sigma_12_by_hand() {
        // σ12 = ω00 λ01² λ12 + ω11 λ12 + ω12
        let f = PrimeField::new(crate::pit::DEFAULT_PRIME).unwrap();
        let m = TreeScm::from_json(M1).unwrap();
        let a = sample_assignment(&m, &mut session(11)).unwrap();
        let (l1, l2) = (a.lambda[1], a.lambda[2]);
        let w00 = a.omega[&(0, 0)];
        let w11 = a.omega[&(1, 1)];
        let w12 = a.omega[&(1, 2)];
        let expected = f.add(
            &f.add(&f.mul(&f.mul(&w00, &f.mul(&l1, &l1)), &l2), &f.mul(&w11, &l2)),
            &w12,
        );
        assert_eq!(sigma_trek_oracle(&f, &m, &a, 1, 2).unwrap(), expected);
        assert_eq!(*sigma_matrix(&f, &m, &a).get(1, 2), expected);
    }

    #[test]
    fn diagonal_contains_trivial_trek() {
        let f = PrimeField::new(crate::pit::DEFAULT_PRIME).unwrap();
        let m = TreeScm::from_json(M2).unwrap();
        let mut a = sample_assignment(&m, &mut session(3)).unwrap();
        for l in a.lambda.iter_mut() {
            *l = f.zero();
        }
        for v in 0..=4 {
            assert_eq!(sigma_trek_oracle(&f, &m, &a, v, v).unwrap(), a.omega[&(v, v)]);
        }
    }

    #[test]
    fn m2_matches_trek_oracle() {
        let f = PrimeField::new(crate::pit::DEFAULT_PRIME).unwrap();
        let m = TreeScm::from_json(M2).unwrap();
        for seed in 0..5 {
            let a = sample_assignment(&m, &mut session(seed)).unwrap();
            let s = sigma_matrix(&f, &m, &a);
            for i in 0..=4 {
                for j in i..=4 {
                    assert_eq!(*s.get(i, j), sigma_trek_oracle(&f, &m, &a, i, j).unwrap());
                    assert_eq!(s.get(i, j), s.get(j, i));
                }
            }
        }
    }

    #[test]
    fn trek_oracle_size_guard() {
        let n = TREK_ORACLE_MAX_N + 1;
        let parent: Vec<_> = std::iter::once(None).chain((0..n).map(Some)).collect();
        let m = TreeScm::new(n, parent, []).unwrap();
        let f = PrimeField::new(101).unwrap();
        let a = ParamAssignment {
            lambda: vec![f.one(); n + 1],
            omega: (0..=n).map(|v| ((v, v), f.one())).collect(),
        };
        assert!(matches!(
            sigma_trek_oracle(&f, &m, &a, 0, 1),
            Err(OracleError::SizeGuard { .. })
        ));
    }
}
