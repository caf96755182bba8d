//! Sparse multivariate integer polynomials, used to expand covariances and
//! rank determinants symbolically on small models.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::covariance::{sigma_trek_oracle, ParamAssignment, SigmaMatrix};
use crate::error::OracleError;
use crate::model::{MissingEdge, TreeScm};
use crate::ring::Ring;

/// Monomial as sorted `(variable, exponent)` pairs with positive exponents.
pub type Monomial = Vec<(u32, u32)>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigInt>,
}

impl Poly {
    pub fn var(v: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(v, 1)], BigInt::one());
        Self { terms }
    }

    pub fn constant(c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        Self { terms }
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn accumulate(&mut self, mono: Monomial, c: BigInt) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PolyRing;

impl Ring for PolyRing {
    type Element = Poly;
    fn zero(&self) -> Poly {
        Poly::default()
    }
    fn one(&self) -> Poly {
        Poly::constant(BigInt::one())
    }
    fn add(&self, a: &Poly, b: &Poly) -> Poly {
        let mut out = a.clone();
        for (m, c) in &b.terms {
            out.accumulate(m.clone(), c.clone());
        }
        out
    }
    fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        self.add(a, &self.neg(b))
    }
    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                out.accumulate(mono_mul(ma, mb), ca * cb);
            }
        }
        out
    }
    fn neg(&self, a: &Poly) -> Poly {
        Poly {
            terms: a.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
    fn is_zero(&self, a: &Poly) -> bool {
        a.is_zero()
    }
    fn from_i64(&self, v: i64) -> Poly {
        Poly::constant(BigInt::from(v))
    }
}

/// Every parameter as its own indeterminate: `λ_i` is variable `i`, the
/// `k`-th entry of Ω (in key order) is variable `n + 1 + k`.
pub fn symbolic_assignment(m: &TreeScm) -> ParamAssignment<Poly> {
    let mut lambda = vec![Poly::default()];
    lambda.extend((1..=m.n()).map(|i| Poly::var(i as u32)));
    let mut keys: Vec<(usize, usize)> = (0..=m.n()).map(|v| (v, v)).collect();
    keys.extend(m.bidirected());
    keys.sort();
    let omega = keys
        .into_iter()
        .enumerate()
        .map(|(k, key)| (key, Poly::var((m.n() + 1 + k) as u32)))
        .collect();
    ParamAssignment { lambda, omega }
}

/// Σ with every entry expanded by the trek rule.
pub fn symbolic_sigma(m: &TreeScm) -> Result<SigmaMatrix<Poly>, OracleError> {
    let a = symbolic_assignment(m);
    let dim = m.node_count();
    let mut rows = vec![vec![Poly::default(); dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let v = sigma_trek_oracle(&PolyRing, m, &a, i, j)?;
            rows[j][i] = v.clone();
            rows[i][j] = v;
        }
    }
    Ok(SigmaMatrix::from_rows(rows))
}

/// Rank of `[[σ_pq, σ_iq], [σ_pj, σ_ij]]` over the polynomial ring.
pub fn symbolic_edge_rank(sigma: &SigmaMatrix<Poly>, e: &MissingEdge) -> Option<u8> {
    let MissingEdge::Pair { i, j, p, q } = *e else {
        return None;
    };
    let r = PolyRing;
    let s = |a, b| sigma.get(a, b).clone();
    let det = r.sub(&r.mul(&s(p, q), &s(i, j)), &r.mul(&s(i, q), &s(p, j)));
    Some(if !det.is_zero() {
        2
    } else if [s(p, q), s(i, q), s(p, j), s(i, j)].iter().any(|x| !x.is_zero()) {
        1
    } else {
        0
    })
}
