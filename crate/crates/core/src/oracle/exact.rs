//! Exact arithmetic for the oracle: rationals and one quadratic extension.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ring::Ring;

#[derive(Clone, Copy, Debug, Default)]
pub struct Rationals;

impl Ring for Rationals {
    type Element = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
}

pub fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exact square root of a non-negative rational, if it is a square.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

/// `Q(√d)` for a rational `d` that is not a square; elements are `a + b√d`.
#[derive(Clone, Debug)]
pub struct QuadExt {
    d: BigRational,
}

pub type QuadElem = (BigRational, BigRational);

impl QuadExt {
    /// `None` if `d` is a rational square (the extension would not be a field).
    pub fn new(d: BigRational) -> Option<Self> {
        rational_sqrt(&d).is_none().then_some(Self { d })
    }

    pub fn radicand(&self) -> &BigRational {
        &self.d
    }

    pub fn embed(&self, a: &BigRational) -> QuadElem {
        (a.clone(), BigRational::zero())
    }

    pub fn inv(&self, x: &QuadElem) -> Option<QuadElem> {
        let norm = &x.0 * &x.0 - &x.1 * &x.1 * &self.d;
        if norm.is_zero() {
            return None;
        }
        Some((&x.0 / &norm, -&x.1 / &norm))
    }

    pub fn div(&self, a: &QuadElem, b: &QuadElem) -> Option<QuadElem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    /// Real value, for display.
    pub fn approx(&self, x: &QuadElem) -> f64 {
        use num_traits::ToPrimitive;
        let f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
        f(&x.0) + f(&x.1) * f(&self.d).sqrt()
    }
}

impl Ring for QuadExt {
    type Element = QuadElem;
    fn zero(&self) -> QuadElem {
        (BigRational::zero(), BigRational::zero())
    }
    fn one(&self) -> QuadElem {
        (BigRational::one(), BigRational::zero())
    }
    fn add(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        (&a.0 + &b.0, &a.1 + &b.1)
    }
    fn sub(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        (&a.0 - &b.0, &a.1 - &b.1)
    }
    fn mul(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        (
            &a.0 * &b.0 + &a.1 * &b.1 * &self.d,
            &a.0 * &b.1 + &a.1 * &b.0,
        )
    }
    fn neg(&self, a: &QuadElem) -> QuadElem {
        (-&a.0, -&a.1)
    }
    fn is_zero(&self, a: &QuadElem) -> bool {
        a.0.is_zero() && a.1.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_squares_only() {
        assert_eq!(rational_sqrt(&BigRational::new(9.into(), 4.into())), Some(BigRational::new(3.into(), 2.into())));
        assert_eq!(rational_sqrt(&rat(12)), None);
        assert_eq!(rational_sqrt(&rat(-4)), None);
        assert_eq!(rational_sqrt(&rat(0)), Some(rat(0)));
    }

    #[test]
    fn extension_field_arithmetic() {
        assert!(QuadExt::new(rat(4)).is_none());
        let k = QuadExt::new(rat(12)).unwrap();
        let x = (rat(-2), rat(1)); // -2 + √12
        let inv = k.inv(&x).unwrap();
        assert!(k.is_zero(&k.sub(&k.mul(&x, &inv), &k.one())));
        // (-2 + √12)/4 solves 2x² + 2x − 1 = 0
        let r = k.div(&x, &k.embed(&rat(4))).unwrap();
        let two = k.embed(&rat(2));
        let val = k.sub(&k.add(&k.mul(&two, &k.mul(&r, &r)), &k.mul(&two, &r)), &k.one());
        assert!(k.is_zero(&val));
        assert!((k.approx(&r) - (-2.0 + 12f64.sqrt()) / 4.0).abs() < 1e-12);
    }
}
