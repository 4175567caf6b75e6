//! Finite quotients `O_F / ϖ^m` of the integers of a quadratic extension of `Q_p`.
//!
//! Unramified: `O_F = Z_p[x]/(h)` with `h` the integer lift of the residue
//! field modulus, `ϖ = p`. Ramified: `O_F = Z_p[y]/(y^2 - u p)`, `ϖ = y`, with
//! `u` the Teichmüller lift of a nonzero residue class. Elements are carried
//! at a fixed working precision `p^PREC` and reduced to the requested level on
//! comparison.

use serde::{Deserialize, Serialize};

use crate::field::{Elem, Fq};

const PREC: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    #[serde(rename = "unram")]
    Unramified,
    #[serde(rename = "ram")]
    Ramified,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Unramified => "unram",
            Case::Ramified => "ram",
        }
    }
    /// Residue degree `f` of the extension.
    pub fn residue_degree(self) -> u32 {
        match self {
            Case::Unramified => 2,
            Case::Ramified => 1,
        }
    }
}

/// Element `a + b θ` with `θ = x` (unramified) or `θ = y` (ramified).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalElem {
    pub a: i64,
    pub b: i64,
}

#[derive(Clone, Debug)]
pub struct LocalRing {
    case: Case,
    p: i64,
    modulus: i64,
    /// Residue field `k_F`.
    kf: Fq,
    /// Unramified: `θ^2 = -c1 θ - c0`. Ramified: `θ^2 = u p`.
    c0: i64,
    c1: i64,
    u: i64,
    u_inv: i64,
    teich: Vec<LocalElem>,
}

fn modpow(mut b: i64, mut e: u64, m: i64) -> i64 {
    let mut acc = 1i64;
    b = b.rem_euclid(m);
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as i128 * b as i128).rem_euclid(m as i128) as i64;
        }
        b = (b as i128 * b as i128).rem_euclid(m as i128) as i64;
        e >>= 1;
    }
    acc
}

impl LocalRing {
    /// `u_residue` selects the ramified unit (ignored when unramified).
    pub fn new(case: Case, p: u32, u_residue: u32) -> crate::error::Result<Self> {
        let kf = Fq::new(p, case.residue_degree())?;
        let p = p as i64;
        let modulus = p.pow(PREC);
        let (c0, c1) = match case {
            Case::Unramified => (kf.modulus()[0] as i64, kf.modulus()[1] as i64),
            Case::Ramified => (0, 0),
        };
        let mut ring = LocalRing { case, p, modulus, kf, c0, c1, u: 1, u_inv: 1, teich: Vec::new() };
        if case == Case::Ramified {
            let ur = (u_residue as i64).rem_euclid(p);
            if ur == 0 {
                return Err(crate::error::Error::Construction("ramified unit must be nonzero mod p".into()));
            }
            let t = ring.teichmuller_int(ur);
            ring.u = t;
            // u^(p-1) = 1 for a Teichmüller lift, so u^-1 = u^(p-2)
            ring.u_inv = modpow(t, (p - 2) as u64, modulus);
        }
        ring.teich = ring.kf.elements().map(|l| ring.compute_teichmuller(l)).collect();
        Ok(ring)
    }

    pub fn case(&self) -> Case {
        self.case
    }
    pub fn p(&self) -> u32 {
        self.p as u32
    }
    pub fn residue_field(&self) -> &Fq {
        &self.kf
    }
    /// Residue field size `q`.
    pub fn q(&self) -> usize {
        self.kf.order()
    }
    /// The ramified unit `u` with `ϖ^2 = u p` (1 when unramified).
    pub fn unit(&self) -> i64 {
        self.u
    }

    fn m(&self, x: i128) -> i64 {
        x.rem_euclid(self.modulus as i128) as i64
    }

    pub fn zero(&self) -> LocalElem {
        LocalElem { a: 0, b: 0 }
    }
    pub fn one(&self) -> LocalElem {
        LocalElem { a: 1, b: 0 }
    }
    pub fn from_int(&self, n: i64) -> LocalElem {
        LocalElem { a: n.rem_euclid(self.modulus), b: 0 }
    }
    pub fn uniformizer(&self) -> LocalElem {
        match self.case {
            Case::Unramified => self.from_int(self.p),
            Case::Ramified => LocalElem { a: 0, b: 1 },
        }
    }

    pub fn add(&self, x: LocalElem, y: LocalElem) -> LocalElem {
        LocalElem { a: self.m(x.a as i128 + y.a as i128), b: self.m(x.b as i128 + y.b as i128) }
    }
    pub fn neg(&self, x: LocalElem) -> LocalElem {
        LocalElem { a: self.m(-(x.a as i128)), b: self.m(-(x.b as i128)) }
    }
    pub fn sub(&self, x: LocalElem, y: LocalElem) -> LocalElem {
        self.add(x, self.neg(y))
    }
    pub fn mul(&self, x: LocalElem, y: LocalElem) -> LocalElem {
        let (a, b, c, d) = (x.a as i128, x.b as i128, y.a as i128, y.b as i128);
        let bd = self.m(b * d) as i128;
        match self.case {
            Case::Unramified => LocalElem {
                a: self.m(a * c - bd * self.c0 as i128),
                b: self.m(a * d + b * c - bd * self.c1 as i128),
            },
            Case::Ramified => LocalElem {
                a: self.m(a * c + bd * (self.u as i128 * self.p as i128)),
                b: self.m(a * d + b * c),
            },
        }
    }
    pub fn pow(&self, x: LocalElem, e: u64) -> LocalElem {
        (0..e).fold(self.one(), |acc, _| self.mul(acc, x))
    }

    /// Canonical representative modulo `ϖ^level`.
    pub fn reduce(&self, x: LocalElem, level: u32) -> LocalElem {
        let (ea, eb) = match self.case {
            Case::Unramified => (level, level),
            Case::Ramified => (level.div_ceil(2), level / 2),
        };
        LocalElem { a: x.a.rem_euclid(self.p.pow(ea)), b: x.b.rem_euclid(self.p.pow(eb)) }
    }

    pub fn eq_mod(&self, x: LocalElem, y: LocalElem, level: u32) -> bool {
        self.reduce(x, level) == self.reduce(y, level)
    }

    /// Image in the residue field.
    pub fn residue(&self, x: LocalElem) -> Elem {
        let p = self.p;
        match self.case {
            Case::Unramified => self.kf.from_coords(x.a.rem_euclid(p) as u32, x.b.rem_euclid(p) as u32),
            Case::Ramified => x.a.rem_euclid(p) as Elem,
        }
    }

    /// Some lift of a residue class (not Teichmüller).
    fn naive_lift(&self, lambda: Elem) -> LocalElem {
        let (a0, a1) = self.kf.coords(lambda);
        match self.case {
            Case::Unramified => LocalElem { a: a0 as i64, b: a1 as i64 },
            Case::Ramified => LocalElem { a: a0 as i64, b: 0 },
        }
    }

    fn teichmuller_int(&self, r: i64) -> i64 {
        let mut t = r;
        for _ in 0..=PREC {
            t = modpow(t, self.p as u64, self.modulus);
        }
        t
    }

    /// Teichmüller representative `[λ]` at full working precision: the fixed
    /// point of `x ↦ x^q` lifting `λ`.
    pub fn teichmuller(&self, lambda: Elem) -> LocalElem {
        self.teich[lambda as usize]
    }

    fn compute_teichmuller(&self, lambda: Elem) -> LocalElem {
        let q = self.q() as u64;
        let mut t = self.naive_lift(lambda);
        loop {
            let next = self.pow(t, q);
            if next == t {
                return t;
            }
            t = next;
        }
    }

    /// Teichmüller representative reduced to `level`.
    pub fn teichmuller_at(&self, lambda: Elem, level: u32) -> LocalElem {
        self.reduce(self.teichmuller(lambda), level)
    }

    /// Exact division by `ϖ`; the input must have positive valuation.
    pub fn div_uniformizer(&self, x: LocalElem) -> LocalElem {
        let p = self.p;
        assert!(x.a.rem_euclid(p) == 0, "not divisible by the uniformizer");
        match self.case {
            Case::Unramified => {
                assert!(x.b.rem_euclid(p) == 0, "not divisible by the uniformizer");
                LocalElem { a: x.a / p, b: x.b / p }
            }
            // (a + b y) / y = b + (a / p) u^-1 y
            Case::Ramified => LocalElem { a: x.b, b: self.m((x.a / p) as i128 * self.u_inv as i128) },
        }
    }

    /// The first `n` Teichmüller digits `x = Σ [d_i] ϖ^i`.
    pub fn digits(&self, x: LocalElem, n: u32) -> Vec<Elem> {
        let mut out = Vec::with_capacity(n as usize);
        let mut z = x;
        for _ in 0..n {
            let d = self.residue(z);
            out.push(d);
            z = self.div_uniformizer(self.sub(z, self.teichmuller(d)));
        }
        out
    }

    pub fn from_digits(&self, digits: &[Elem]) -> LocalElem {
        let w = self.uniformizer();
        let mut acc = self.zero();
        let mut wp = self.one();
        for &d in digits {
            acc = self.add(acc, self.mul(self.teichmuller(d), wp));
            wp = self.mul(wp, w);
        }
        acc
    }

    /// Index of a digit tuple in the canonical coset ordering: `Σ d_i q^i`.
    pub fn digits_index(&self, digits: &[Elem]) -> usize {
        let q = self.q();
        digits.iter().rev().fold(0, |acc, &d| acc * q + d as usize)
    }

    pub fn index_digits(&self, mut idx: usize, m: u32) -> Vec<Elem> {
        let q = self.q();
        (0..m)
            .map(|_| {
                let d = (idx % q) as Elem;
                idx /= q;
                d
            })
            .collect()
    }

    /// The `q^m` canonical representatives `Σ_{i<m} [c_i] ϖ^i` of `O_F/ϖ^m`,
    /// in index order.
    pub fn coset_reps(&self, m: u32) -> Vec<LocalElem> {
        let count = self.q().pow(m);
        (0..count).map(|i| self.reduce(self.from_digits(&self.index_digits(i, m)), m)).collect()
    }

    /// Split `z` (read at level `m + 1`) into the index of its canonical
    /// representative modulo `ϖ^m` and the next digit.
    pub fn digit_decompose(&self, z: LocalElem, m: u32) -> (usize, Elem) {
        let d = self.digits(z, m + 1);
        (self.digits_index(&d[..m as usize]), d[m as usize])
    }

    /// All elements of `O_F/ϖ^level` in reduced form.
    pub fn elements(&self, level: u32) -> Vec<LocalElem> {
        let (ea, eb) = match self.case {
            Case::Unramified => (level, level),
            Case::Ramified => (level.div_ceil(2), level / 2),
        };
        let (na, nb) = (self.p.pow(ea), self.p.pow(eb));
        let mut out = Vec::new();
        for b in 0..nb {
            for a in 0..na {
                out.push(LocalElem { a, b });
            }
        }
        out
    }

    /// `ϖ`-adic valuation, capped at `cap`.
    pub fn valuation(&self, x: LocalElem, cap: u32) -> u32 {
        let mut z = x;
        for v in 0..cap {
            if self.residue(z) != 0 {
                return v;
            }
            z = self.div_uniformizer(z);
        }
        cap
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn teichmuller_examples() {
        let r = LocalRing::new(Case::Ramified, 3, 1).unwrap();
        // ramified level 2 over p = 3 is Z/3 + Z/3 y; integers live in the a-part
        let t = r.teichmuller(2);
        assert_eq!(t.a.rem_euclid(9), 8);
        assert_eq!(r.teichmuller(0), r.zero());
        assert_eq!(r.teichmuller(1), r.one());

        let u = LocalRing::new(Case::Unramified, 2, 1).unwrap();
        let g = u.residue_field().generator();
        let t = u.teichmuller_at(g, 2);
        assert!(u.eq_mod(u.pow(t, 4), t, 2));
        assert_eq!(u.residue(t), g);
    }

    #[test]
    fn teichmuller_is_multiplicative() {
        for case in [Case::Unramified, Case::Ramified] {
            for p in [2, 3, 5] {
                let r = LocalRing::new(case, p, 1).unwrap();
                let k = r.residue_field().clone();
                for a in k.elements() {
                    for b in k.elements() {
                        let lhs = r.teichmuller(k.mul(a, b));
                        let rhs = r.mul(r.teichmuller(a), r.teichmuller(b));
                        assert!(r.eq_mod(lhs, rhs, 6), "{case:?} p={p}");
                    }
                }
            }
        }
    }

    #[test]
    fn ring_sizes_and_uniformizer() {
        for case in [Case::Unramified, Case::Ramified] {
            for p in [2, 3] {
                let r = LocalRing::new(case, p, 1).unwrap();
                for m in 0..4 {
                    assert_eq!(r.elements(m).len(), r.q().pow(m));
                    let w = r.uniformizer();
                    assert!(r.eq_mod(r.pow(w, m as u64), r.zero(), m));
                    if m > 0 {
                        assert!(!r.eq_mod(r.pow(w, (m - 1) as u64), r.zero(), m));
                    }
                }
                if case == Case::Ramified {
                    let w = r.uniformizer();
                    assert_eq!(r.mul(w, w), r.from_int(p as i64 * r.unit()));
                }
            }
        }
    }

    #[test]
    fn digit_expansion_is_bijective() {
        for case in [Case::Unramified, Case::Ramified] {
            for p in [2, 3] {
                let r = LocalRing::new(case, p, 2 % p.max(2) + (p == 2) as u32).unwrap();
                for m in 0..4u32 {
                    let mut seen = vec![false; r.q().pow(m)];
                    for z in r.elements(m) {
                        let d = r.digits(z, m);
                        let idx = r.digits_index(&d);
                        assert!(!seen[idx]);
                        seen[idx] = true;
                        assert!(r.eq_mod(r.from_digits(&d), z, m));
                    }
                }
            }
        }
    }

    #[test]
    fn coset_reps_examples() {
        let r = LocalRing::new(Case::Unramified, 2, 1).unwrap();
        assert_eq!(r.coset_reps(0), vec![r.zero()]);
        let reps = r.coset_reps(1);
        assert_eq!(reps.len(), 4);
        let residues: Vec<Elem> = reps.iter().map(|&z| r.residue(z)).collect();
        assert_eq!(residues, vec![0, 1, 2, 3]);
        let rr = LocalRing::new(Case::Ramified, 3, 1).unwrap();
        assert_eq!(rr.coset_reps(2).len(), 9);
    }

    #[test]
    fn digit_decompose_examples() {
        let r = LocalRing::new(Case::Ramified, 2, 1).unwrap();
        let z = r.add(r.one(), r.uniformizer());
        assert_eq!(r.digit_decompose(z, 1), (1, 1));
        let u = LocalRing::new(Case::Unramified, 3, 1).unwrap();
        let z = u.add(u.teichmuller(1), u.mul(u.teichmuller(1), u.from_int(3)));
        assert_eq!(u.digit_decompose(z, 1), (1, 1));
        let c = u.from_digits(&[2, 5]);
        assert_eq!(u.digit_decompose(c, 2), (u.digits_index(&[2, 5]), 0));
    }
}
