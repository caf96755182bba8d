//! Fractional affine square-root terms `(p + q·√s) / (r + t·√s)` over σ.
//!
//! The square root is kept formal: arithmetic works on pairs `u + v·τ` with
//! `τ² = s`, and a pair is zero only if both components are.

pub mod expr;
pub mod syntax;

use crate::cyclefind::Weight2x2;
use crate::error::IdentError;
use crate::model::NodeId;
use crate::pit::{FieldElem, PitSession, PrimeField};
use crate::probe::Probe;
use crate::ring::Ring;

use expr::{Evaluator, Expr, ExprRing};

#[derive(Clone, Debug)]
pub struct Fastp {
    pub p: Expr,
    pub q: Expr,
    pub r: Expr,
    pub t: Expr,
    pub s: Expr,
}

/// Sign of the square root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// `u + v·τ` with `τ² = s`.
#[derive(Clone, Debug)]
pub(crate) struct Surd {
    pub u: Expr,
    pub v: Expr,
}

impl Surd {
    pub fn rational(u: Expr) -> Self {
        Self { u, v: Expr::zero() }
    }

    pub fn add(&self, o: &Surd) -> Surd {
        let r = ExprRing;
        Surd {
            u: r.add(&self.u, &o.u),
            v: r.add(&self.v, &o.v),
        }
    }

    pub fn sub(&self, o: &Surd) -> Surd {
        let r = ExprRing;
        Surd {
            u: r.sub(&self.u, &o.u),
            v: r.sub(&self.v, &o.v),
        }
    }

    pub fn scale(&self, c: &Expr) -> Surd {
        let r = ExprRing;
        Surd {
            u: r.mul(c, &self.u),
            v: r.mul(c, &self.v),
        }
    }

    pub fn mul(&self, o: &Surd, s: &Expr) -> Surd {
        let r = ExprRing;
        let vv = r.mul(&self.v, &o.v);
        Surd {
            u: r.add(&r.mul(&self.u, &o.u), &r.mul(&vv, s)),
            v: r.add(&r.mul(&self.u, &o.v), &r.mul(&self.v, &o.u)),
        }
    }
}

impl Fastp {
    /// `num / den` with no radical; `s` is the shared literal zero.
    pub fn rational_unchecked(num: Expr, den: Expr) -> Self {
        Self {
            p: num,
            q: Expr::zero(),
            r: den,
            t: Expr::zero(),
            s: Expr::zero(),
        }
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_literal_zero() && self.t.is_literal_zero()
    }

    pub(crate) fn numerator(&self) -> Surd {
        Surd {
            u: self.p.clone(),
            v: self.q.clone(),
        }
    }

    pub(crate) fn denominator(&self) -> Surd {
        Surd {
            u: self.r.clone(),
            v: self.t.clone(),
        }
    }

    /// The other branch: `(p − q·√s) / (r − t·√s)`.
    pub fn conjugate(&self) -> Self {
        let r = ExprRing;
        Self {
            p: self.p.clone(),
            q: r.neg(&self.q),
            r: self.r.clone(),
            t: r.neg(&self.t),
            s: self.s.clone(),
        }
    }

    /// Whether both terms use the same radicand node.
    pub fn shares_radical(&self, other: &Fastp) -> bool {
        self.s.ptr_eq(&other.s)
    }

    /// Highest σ-degree among the five components.
    pub fn degree(&self) -> u32 {
        [&self.p, &self.q, &self.r, &self.t, &self.s]
            .iter()
            .map(|e| e.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn components(&self) -> [&Expr; 5] {
        [&self.p, &self.q, &self.r, &self.t, &self.s]
    }
}

fn surd_is_zero(probe: &mut Probe, session: &mut PitSession, x: &Surd) -> Result<bool, IdentError> {
    if !probe.is_zero(session, &x.u)? {
        return Ok(false);
    }
    Ok(x.v.is_literal_zero() || probe.is_zero(session, &x.v)?)
}

/// Rational FASTP `num / den`, rejecting a denominator that vanishes
/// identically.
pub fn fastp_rational(
    num: Expr,
    den: Expr,
    probe: &mut Probe,
    session: &mut PitSession,
) -> Result<Fastp, IdentError> {
    if probe.is_zero(session, &den)? {
        return Err(IdentError::Contract(format!(
            "denominator {} vanishes identically",
            expr::render(&den)
        )));
    }
    Ok(Fastp::rational_unchecked(num, den))
}

/// Solutions of the fixed-point equation of a cycle weight `[[b, d], [a, c]]`,
/// that is of `a·x² + (c − b)·x − d = 0`.
#[derive(Clone, Debug)]
pub enum CycleRoots {
    /// Two distinct roots; the pair shares one radicand, `plus` uses `+√s`.
    Two { plus: Fastp, minus: Fastp },
    One(Fastp),
    NoSolution,
    Infinite,
}

impl CycleRoots {
    pub fn class(&self) -> crate::cyclefind::CycleClass {
        use crate::cyclefind::CycleClass;
        match self {
            CycleRoots::Two { .. } => CycleClass::TwoSolutions,
            CycleRoots::One(_) => CycleClass::OneSolution,
            CycleRoots::NoSolution => CycleClass::NoSolution,
            CycleRoots::Infinite => CycleClass::Infinite,
        }
    }
}

/// Coefficients `(a, c − b, −d)` of the cycle quadratic.
pub fn cycle_quadratic(w: &Weight2x2<Expr>) -> (Expr, Expr, Expr) {
    let r = ExprRing;
    (w.a().clone(), r.sub(w.c(), w.b()), r.neg(w.d()))
}

pub fn roots_from_cycle(
    w: &Weight2x2<Expr>,
    probe: &mut Probe,
    session: &mut PitSession,
) -> Result<CycleRoots, IdentError> {
    let r = ExprRing;
    let a = w.a().clone();
    let cb = r.sub(w.c(), w.b());
    let d = w.d().clone();
    if !probe.is_zero(session, &a)? {
        let disc = r.add(&r.mul(&cb, &cb), &r.mul(&Expr::constant(4), &r.mul(&a, &d)));
        let p = r.neg(&cb);
        let den = r.mul(&Expr::constant(2), &a);
        if probe.is_zero(session, &disc)? {
            return Ok(CycleRoots::One(Fastp::rational_unchecked(p, den)));
        }
        let plus = Fastp {
            p,
            q: Expr::one(),
            r: den,
            t: Expr::zero(),
            s: disc,
        };
        let minus = plus.conjugate();
        return Ok(CycleRoots::Two { plus, minus });
    }
    if !probe.is_zero(session, &cb)? {
        return Ok(CycleRoots::One(Fastp::rational_unchecked(d, cb)));
    }
    if !probe.is_zero(session, &d)? {
        return Ok(CycleRoots::NoSolution);
    }
    Ok(CycleRoots::Infinite)
}

/// Applies the Möbius map of `w` (acting on `(x, 1)`) to `x`. Returns `None`
/// when the resulting denominator vanishes identically.
pub fn propagate(
    x: &Fastp,
    w: &Weight2x2<Expr>,
    probe: &mut Probe,
    session: &mut PitSession,
) -> Result<Option<Fastp>, IdentError> {
    let (num, den) = (x.numerator(), x.denominator());
    let n2 = num.scale(&w.m[0][0]).add(&den.scale(&w.m[0][1]));
    let d2 = num.scale(&w.m[1][0]).add(&den.scale(&w.m[1][1]));
    if surd_is_zero(probe, session, &d2)? {
        return Ok(None);
    }
    Ok(Some(Fastp {
        p: n2.u,
        q: n2.v,
        r: d2.u,
        t: d2.v,
        s: x.s.clone(),
    }))
}

/// Radicand shared by two terms, treating rational terms as radical-free.
fn common_radical(x: &Fastp, y: &Fastp) -> Result<Expr, IdentError> {
    match (x.is_rational(), y.is_rational()) {
        (true, true) => Ok(Expr::zero()),
        (false, true) => Ok(x.s.clone()),
        (true, false) => Ok(y.s.clone()),
        (false, false) if x.s.same(&y.s) => Ok(x.s.clone()),
        _ => Err(IdentError::Contract(
            "FASTPs with different square-root terms cannot be combined".into(),
        )),
    }
}

/// Residual `y·(w21·x + w22) − (w11·x + w12)` with denominators cleared, as
/// `u + v·τ`.
pub(crate) fn equation_residual(x: &Fastp, y: &Fastp, w: &Weight2x2<Expr>) -> Result<Surd, IdentError> {
    let s = common_radical(x, y)?;
    let (nx, dx) = (x.numerator(), x.denominator());
    let (ny, dy) = (y.numerator(), y.denominator());
    let lhs = ny.mul(&nx.scale(&w.m[1][0]).add(&dx.scale(&w.m[1][1])), &s);
    let rhs = dy.mul(&nx.scale(&w.m[0][0]).add(&dx.scale(&w.m[0][1])), &s);
    Ok(lhs.sub(&rhs))
}

/// Whether `(x, y)` solves the equation of the edge `x -> y` with weight `w`,
/// for both signs of the square root.
pub fn fastp_satisfies(
    x: &Fastp,
    y: &Fastp,
    w: &Weight2x2<Expr>,
    probe: &mut Probe,
    session: &mut PitSession,
) -> Result<bool, IdentError> {
    let res = equation_residual(x, y, w)?;
    surd_is_zero(probe, session, &res)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("negative radicand")]
    NegativeRadicand,
    #[error("radicand is not a square in the field")]
    NonResidue,
    #[error("denominator vanishes at this point")]
    ZeroDenominator,
}

/// Reals as a ring, for numeric spot checks.
#[derive(Clone, Copy, Debug, Default)]
pub struct Reals;

impl Ring for Reals {
    type Element = f64;
    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn sub(&self, a: &f64, b: &f64) -> f64 {
        a - b
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn neg(&self, a: &f64) -> f64 {
        -a
    }
    fn is_zero(&self, a: &f64) -> bool {
        *a == 0.0
    }
    fn from_i64(&self, v: i64) -> f64 {
        v as f64
    }
}

/// Value over the reals at covariances `sigma`.
pub fn eval_fastp(
    f: &Fastp,
    sigma: &dyn Fn(NodeId, NodeId) -> f64,
    branch: Branch,
) -> Result<f64, EvalError> {
    let mut ev = Evaluator::new();
    let mut e = |x: &Expr| ev.eval(&Reals, sigma, x);
    let (p, q, r, t) = (e(&f.p), e(&f.q), e(&f.r), e(&f.t));
    let root = if f.is_rational() {
        0.0
    } else {
        let s = e(&f.s);
        if s < 0.0 {
            return Err(EvalError::NegativeRadicand);
        }
        let sq = s.sqrt();
        if branch == Branch::Plus {
            sq
        } else {
            -sq
        }
    };
    let den = r + t * root;
    if den == 0.0 {
        return Err(EvalError::ZeroDenominator);
    }
    Ok((p + q * root) / den)
}

/// Square root in a field with modulus ≡ 3 (mod 4), if `a` is a square.
pub fn field_sqrt(f: &PrimeField, a: FieldElem) -> Option<FieldElem> {
    let m = f.modulus();
    if m % 4 != 3 {
        return None;
    }
    let r = f.pow(a, (m + 1) / 4);
    (f.mul(&r, &r) == a).then_some(r)
}

/// Value in the prime field; the `Plus` branch uses the field square root
/// returned by [`field_sqrt`].
pub fn eval_fastp_field(
    f: &Fastp,
    field: &PrimeField,
    sigma: &dyn Fn(NodeId, NodeId) -> FieldElem,
    branch: Branch,
) -> Result<FieldElem, EvalError> {
    let mut ev = Evaluator::new();
    let mut e = |x: &Expr| ev.eval(field, sigma, x);
    let (p, q, r, t) = (e(&f.p), e(&f.q), e(&f.r), e(&f.t));
    let root = if f.is_rational() {
        field.zero()
    } else {
        let sq = field_sqrt(field, e(&f.s)).ok_or(EvalError::NonResidue)?;
        if branch == Branch::Plus {
            sq
        } else {
            field.neg(&sq)
        }
    };
    let num = field.add(&p, &field.mul(&q, &root));
    let den = field.add(&r, &field.mul(&t, &root));
    field.div(num, den).ok_or(EvalError::ZeroDenominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pit::{PitConfig, DEFAULT_PRIME};

    fn setup(seed: u64) -> (PitSession, Probe) {
        let s = PitSession::new(&PitConfig::new(seed, 1000)).unwrap();
        let p = Probe::constant_only(PrimeField::new(DEFAULT_PRIME).unwrap(), 3);
        (s, p)
    }

    fn cw(m11: i64, m12: i64, m21: i64, m22: i64) -> Weight2x2<Expr> {
        Weight2x2::new(m11, m12, m21, m22).map(|&c| Expr::constant(c))
    }

    fn no_sigma(_: usize, _: usize) -> f64 {
        0.0
    }

    #[test]
    fn example_cycle_roots() {
        let (mut s, mut p) = setup(1);
        let roots = roots_from_cycle(&cw(-1, 1, 2, 1), &mut p, &mut s).unwrap();
        let CycleRoots::Two { plus, minus } = roots else {
            panic!("expected two roots");
        };
        assert!(plus.shares_radical(&minus));
        let hi = eval_fastp(&plus, &no_sigma, Branch::Plus).unwrap();
        let lo = eval_fastp(&minus, &no_sigma, Branch::Plus).unwrap();
        let expect_hi = (-2.0 + 12f64.sqrt()) / 4.0;
        let expect_lo = (-2.0 - 12f64.sqrt()) / 4.0;
        assert!((hi - expect_hi).abs() < 1e-12);
        assert!((lo - expect_lo).abs() < 1e-12);
        for x in [hi, lo] {
            assert!((2.0 * x * x + 2.0 * x - 1.0).abs() < 1e-12);
        }
        // each root is a fixed point of the cycle map
        let w = cw(-1, 1, 2, 1);
        assert!(fastp_satisfies(&plus, &plus, &w, &mut p, &mut s).unwrap());
        assert!(fastp_satisfies(&minus, &minus, &w, &mut p, &mut s).unwrap());
    }

    #[test]
    fn degenerate_cycle_classes() {
        let (mut s, mut p) = setup(2);
        assert!(matches!(
            roots_from_cycle(&cw(3, 0, 0, 3), &mut p, &mut s).unwrap(),
            CycleRoots::Infinite
        ));
        assert!(matches!(
            roots_from_cycle(&cw(2, 5, 0, 2), &mut p, &mut s).unwrap(),
            CycleRoots::NoSolution
        ));
        let CycleRoots::One(x) = roots_from_cycle(&cw(1, 6, 0, 4), &mut p, &mut s).unwrap() else {
            panic!("expected one root");
        };
        assert_eq!(eval_fastp(&x, &no_sigma, Branch::Plus).unwrap(), 2.0);
        // double root: x² − 2x + 1 from [[b,d],[a,c]] = [[3,-1],[1,1]]
        let CycleRoots::One(x) = roots_from_cycle(&cw(3, -1, 1, 1), &mut p, &mut s).unwrap() else {
            panic!("expected a double root");
        };
        assert_eq!(eval_fastp(&x, &no_sigma, Branch::Minus).unwrap(), 1.0);
    }

    #[test]
    fn propagate_and_back() {
        let (mut s, mut p) = setup(3);
        let w = cw(1, 2, 2, 1);
        let x = Fastp::rational_unchecked(Expr::constant(3), Expr::constant(5));
        let y = propagate(&x, &w, &mut p, &mut s).unwrap().unwrap();
        assert!((eval_fastp(&y, &no_sigma, Branch::Plus).unwrap() - 13.0 / 11.0).abs() < 1e-12);
        assert!(fastp_satisfies(&x, &y, &w, &mut p, &mut s).unwrap());
        let back = propagate(&y, &w.adjoint(&ExprRing), &mut p, &mut s).unwrap().unwrap();
        assert!((eval_fastp(&back, &no_sigma, Branch::Plus).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn zero_fastp_fails_inhomogeneous_equation() {
        let (mut s, mut p) = setup(4);
        let zero = Fastp::rational_unchecked(Expr::zero(), Expr::one());
        // y = (x + 1)/1 is not solved by x = y = 0
        assert!(!fastp_satisfies(&zero, &zero, &cw(1, 1, 0, 1), &mut p, &mut s).unwrap());
    }

    #[test]
    fn degenerate_propagation_detected() {
        let (mut s, mut p) = setup(5);
        let x = Fastp::rational_unchecked(Expr::one(), Expr::one());
        // denominator 1·x − 1 vanishes at x = 1
        assert!(propagate(&x, &cw(1, 0, 1, -1), &mut p, &mut s).unwrap().is_none());
    }

    #[test]
    fn mismatched_radicals_rejected() {
        let a = Fastp {
            p: Expr::one(),
            q: Expr::one(),
            r: Expr::one(),
            t: Expr::zero(),
            s: Expr::constant(2),
        };
        let b = Fastp {
            s: Expr::constant(3),
            ..a.clone()
        };
        assert!(equation_residual(&a, &b, &cw(1, 0, 0, 1)).is_err());
    }

    #[test]
    fn field_sqrt_roundtrip() {
        let f = PrimeField::new(DEFAULT_PRIME).unwrap();
        let x = f.elem(123_456_789);
        let r = field_sqrt(&f, f.mul(&x, &x)).unwrap();
        assert!(r == x || r == f.neg(&x));
    }
}
