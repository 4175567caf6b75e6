//! Finite fields `F_{p^f}` with `p <= 7` and `f in {1, 2}`.
//!
//! Elements are encoded as small integers `a0 + a1 * p` (coefficients of the
//! polynomial basis `1, x` modulo the defining polynomial), so every field fits
//! in a `u8` and arithmetic is table lookup.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Field element code.
pub type Elem = u8;

struct Tables {
    p: u32,
    f: u32,
    q: usize,
    /// Defining polynomial `x^2 + c1 x + c0` stored as `[c0, c1]` (f = 2 only).
    modulus: Vec<u32>,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    inv: Vec<Elem>,
}

/// A finite field `F_q`, cheap to clone and shareable across threads.
#[derive(Clone)]
pub struct Fq(Arc<Tables>);

impl PartialEq for Fq {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.f == other.0.f
    }
}
impl Eq for Fq {}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.0.q)
    }
}

pub fn is_prime(n: u32) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn poly_eval(coeffs_low_first: &[u32], x: u32, p: u32) -> u32 {
    coeffs_low_first.iter().rev().fold(0, |acc, &c| (acc * x + c) % p)
}

/// Lex-lowest monic irreducible quadratic `x^2 + c1 x + c0` over `F_p`,
/// ordered by `(c1, c0)`. A quadratic is irreducible iff it has no root.
fn lowest_irreducible_quadratic(p: u32) -> [u32; 2] {
    for c1 in 0..p {
        for c0 in 0..p {
            let has_root = (0..p).any(|x| poly_eval(&[c0, c1, 1], x, p) == 0);
            if !has_root {
                return [c0, c1];
            }
        }
    }
    unreachable!("an irreducible quadratic exists over every prime field")
}

impl Fq {
    pub fn new(p: u32, f: u32) -> Result<Self> {
        if !is_prime(p) || p > 7 {
            return Err(Error::Construction(format!("unsupported characteristic {p}")));
        }
        if f != 1 && f != 2 {
            return Err(Error::Construction(format!("unsupported extension degree {f}")));
        }
        let q = p.pow(f) as usize;
        let modulus = if f == 2 { lowest_irreducible_quadratic(p).to_vec() } else { Vec::new() };
        let decode = |e: usize| -> (u32, u32) { ((e as u32) % p, (e as u32) / p) };
        let encode = |a0: u32, a1: u32| -> Elem { (a0 % p + (a1 % p) * p) as Elem };
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            for b in 0..q {
                let (a0, a1) = decode(a);
                let (b0, b1) = decode(b);
                add[a * q + b] = encode(a0 + b0, a1 + b1);
                mul[a * q + b] = if f == 1 {
                    ((a0 * b0) % p) as Elem
                } else {
                    // x^2 = -c1 x - c0
                    let (c0, c1) = (modulus[0], modulus[1]);
                    let hi = a1 * b1 % p;
                    let lo = a0 * b0 % p;
                    let mid = (a0 * b1 + a1 * b0) % p;
                    let r0 = (lo + hi * (p - c0)) % p;
                    let r1 = (mid + hi * (p - c1)) % p;
                    encode(r0, r1)
                };
            }
        }
        let mut neg = vec![0; q];
        let mut inv = vec![0; q];
        for a in 0..q {
            neg[a] = (0..q).find(|&b| add[a * q + b] == 0).unwrap() as Elem;
            if a != 0 {
                inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).unwrap() as Elem;
            }
        }
        Ok(Fq(Arc::new(Tables { p, f, q, modulus, add, mul, neg, inv })))
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.0.p
    }
    #[inline]
    pub fn degree(&self) -> u32 {
        self.0.f
    }
    #[inline]
    pub fn order(&self) -> usize {
        self.0.q
    }
    /// Defining polynomial as `[c0, c1]` for `x^2 + c1 x + c0`; empty for prime fields.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.0.add[a as usize * self.0.q + b as usize]
    }
    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }
    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.0.mul[a as usize * self.0.q + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.0.neg[a as usize]
    }
    /// Multiplicative inverse; panics on zero.
    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        assert!(a != 0, "inverse of zero");
        self.0.inv[a as usize]
    }

    /// Row of the multiplication table for a fixed factor, used by row operations.
    #[inline]
    pub fn mul_row(&self, c: Elem) -> &[Elem] {
        let q = self.0.q;
        &self.0.mul[c as usize * q..(c as usize + 1) * q]
    }
    #[inline]
    pub fn add_row(&self, c: Elem) -> &[Elem] {
        let q = self.0.q;
        &self.0.add[c as usize * q..(c as usize + 1) * q]
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc: Elem = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `a^(-e)` read as `a^E` with `E` the representative of `-e` in `[0, q-2]`
    /// and `0^0 = 1`. This is the convention that makes `sum_l l^(-e) [l]`
    /// lie in the augmentation ideal.
    pub fn pow_neg(&self, a: Elem, e: u64) -> Elem {
        let m = (self.0.q - 1) as u64;
        let exp = (m - e % m) % m;
        self.pow(a, exp)
    }

    pub fn frobenius(&self, a: Elem) -> Elem {
        self.pow(a, self.0.p as u64)
    }

    pub fn from_int(&self, n: i64) -> Elem {
        n.rem_euclid(self.0.p as i64) as Elem
    }

    /// The class of `x` in `F_p[x]/(modulus)`; for prime fields this is 1.
    pub fn generator(&self) -> Elem {
        if self.0.f == 2 {
            self.0.p as Elem
        } else {
            1
        }
    }

    /// Smallest-code element generating the multiplicative group.
    pub fn primitive_element(&self) -> Elem {
        let m = (self.0.q - 1) as u64;
        (1..self.0.q as Elem)
            .find(|&a| (1..m).all(|e| !m.is_multiple_of(e) || self.pow(a, e) != 1))
            .unwrap()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.0.q as Elem
    }

    /// Coefficients `(a0, a1)` of an element in the basis `1, x`.
    pub fn coords(&self, a: Elem) -> (u32, u32) {
        let p = self.0.p;
        (a as u32 % p, a as u32 / p)
    }

    pub fn from_coords(&self, a0: u32, a1: u32) -> Elem {
        let p = self.0.p;
        (a0 % p + (a1 % p) * p) as Elem
    }

    /// Whether `a` lies in the prime subfield.
    pub fn is_prime_subfield(&self, a: Elem) -> bool {
        (a as u32) < self.0.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moduli_are_lex_lowest() {
        assert!(Fq::new(2, 1).unwrap().modulus().is_empty());
        assert_eq!(Fq::new(2, 2).unwrap().modulus(), &[1, 1]);
        assert_eq!(Fq::new(3, 2).unwrap().modulus(), &[1, 0]);
        assert_eq!(Fq::new(5, 2).unwrap().modulus(), &[2, 0]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Fq::new(4, 1).is_err());
        assert!(Fq::new(11, 1).is_err());
        assert!(Fq::new(3, 3).is_err());
    }

    #[test]
    fn field_axioms_exhaustive() {
        for &(p, f) in &[(2, 1), (2, 2), (3, 1), (3, 2), (5, 1), (5, 2), (7, 1), (7, 2)] {
            let k = Fq::new(p, f).unwrap();
            let q = k.order();
            for a in k.elements() {
                assert_eq!(k.add(a, 0), a);
                assert_eq!(k.mul(a, 1), a);
                assert_eq!(k.add(a, k.neg(a)), 0);
                if a != 0 {
                    assert_eq!(k.mul(a, k.inv(a)), 1);
                    assert_eq!(k.pow(a, (q - 1) as u64), 1);
                }
                for b in k.elements() {
                    assert_eq!(k.mul(a, b), k.mul(b, a));
                    for c in k.elements() {
                        assert_eq!(k.mul(a, k.add(b, c)), k.add(k.mul(a, b), k.mul(a, c)));
                        assert_eq!(k.mul(a, k.mul(b, c)), k.mul(k.mul(a, b), c));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_is_automorphism_fixing_prime_field() {
        for &(p, f) in &[(2, 1), (2, 2), (3, 2), (5, 2), (7, 2)] {
            let k = Fq::new(p, f).unwrap();
            for a in k.elements() {
                assert_eq!(k.frobenius(a) == a, k.is_prime_subfield(a));
                for b in k.elements() {
                    assert_eq!(k.frobenius(k.add(a, b)), k.add(k.frobenius(a), k.frobenius(b)));
                    assert_eq!(k.frobenius(k.mul(a, b)), k.mul(k.frobenius(a), k.frobenius(b)));
                }
            }
        }
    }

    #[test]
    fn frobenius_examples() {
        let f4 = Fq::new(2, 2).unwrap();
        for a in f4.elements() {
            assert_eq!(f4.frobenius(f4.frobenius(a)), a);
        }
        let f9 = Fq::new(3, 2).unwrap();
        let g = f9.generator();
        assert_eq!(f9.frobenius(g), f9.pow(g, 3));
        let f2 = Fq::new(2, 1).unwrap();
        assert!(f2.elements().all(|a| f2.frobenius(a) == a));
    }

    #[test]
    fn negative_powers_sum_to_zero() {
        for &(p, f) in &[(2, 1), (2, 2), (3, 1), (3, 2)] {
            let k = Fq::new(p, f).unwrap();
            for e in 1..(k.order() as u64) {
                let s = k.elements().fold(0, |acc, l| k.add(acc, k.pow_neg(l, e)));
                assert_eq!(s, 0, "p={p} f={f} e={e}");
            }
        }
    }
}
