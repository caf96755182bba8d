//! Commutative ring abstraction shared by the numeric, symbolic and exact
//! back ends.
//!
//! A ring is a context object; elements are plain values. This lets the same
//! 2x2 Möbius machinery run over a prime field, over expression DAGs and over
//! exact rationals without duplicating code.

use std::fmt::Debug;

pub trait Ring {
    type Element: Clone + Debug;

    fn zero(&self) -> Self::Element;
    fn one(&self) -> Self::Element;
    fn add(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn sub(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn mul(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn neg(&self, a: &Self::Element) -> Self::Element;
    /// Structural zero test. For exact rings this is the real thing; for
    /// expression DAGs it only recognises the literal constant zero.
    fn is_zero(&self, a: &Self::Element) -> bool;

    fn from_i64(&self, v: i64) -> Self::Element {
        let mut acc = self.zero();
        let one = self.one();
        let mut base = if v < 0 { self.neg(&one) } else { one };
        let mut k = v.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            k >>= 1;
        }
        acc
    }
}
