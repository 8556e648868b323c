//! Field abstraction shared by the exact linear algebra.
//!
//! A `Field` value is a context (it may carry a modulus polynomial or a
//! cyclotomic order); elements are plain data. All coefficient arithmetic in
//! the modular-symbol and q-series code is generic over this trait, with two
//! implementations: cyclotomic fields Q(zeta_n) and residue fields of their
//! rings of integers.

use std::fmt::Debug;

pub trait Field: Clone + PartialEq + Send + Sync + Debug {
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; panics on zero.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;

    fn add_assign(&self, a: &mut Self::Elem, b: &Self::Elem) {
        *a = self.add(a, b);
    }

    /// acc += b * c
    fn add_mul(&self, acc: &mut Self::Elem, b: &Self::Elem, c: &Self::Elem) {
        let t = self.mul(b, c);
        self.add_assign(acc, &t);
    }

    fn from_i64(&self, v: i64) -> Self::Elem;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.mul(a, &self.inv(b))
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }
}
