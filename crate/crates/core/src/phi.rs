//! Monomial twists `φ(X_j) = u_j X_{π(j)}^{e_j}` of `A` and the pullback
//! functor `φ^* M = A ⊗_{φ,A} M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Fq};
use crate::flmod::{cyclic_module, FLModule, ModuleMap, MonIdeal};
use crate::koszul::{check_semilinear, tor_semilinear_between, Poly, TorSpace};
use crate::linalg::Mat;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistSpec {
    pub targets: Vec<usize>,
    pub exps: Vec<u32>,
    pub units: Vec<Elem>,
}

impl TwistSpec {
    pub fn new(targets: Vec<usize>, exps: Vec<u32>, units: Vec<Elem>) -> Result<Self> {
        let d = targets.len();
        if exps.len() != d || units.len() != d {
            return Err(Error::Construction("twist data of unequal lengths".into()));
        }
        let mut seen = vec![false; d];
        for &t in &targets {
            if t >= d || seen[t] {
                return Err(Error::Construction("twist targets must form a permutation".into()));
            }
            seen[t] = true;
        }
        if exps.contains(&0) || units.contains(&0) {
            return Err(Error::Construction("twist exponents must be positive and units nonzero".into()));
        }
        Ok(TwistSpec { targets, exps, units })
    }

    /// `X_j ↦ X_j^q`.
    pub fn qpow(d: usize, q: u32) -> Self {
        TwistSpec { targets: (0..d).collect(), exps: vec![q; d], units: vec![1; d] }
    }

    /// `X ↦ Y^p`, `Y ↦ X^p`.
    pub fn unram(p: u32) -> Self {
        TwistSpec { targets: vec![1, 0], exps: vec![p, p], units: vec![1, 1] }
    }

    /// `X ↦ Y`, `Y ↦ u X^p`.
    pub fn ram(p: u32, u: Elem) -> Self {
        TwistSpec { targets: vec![1, 0], exps: vec![1, p], units: vec![1, u] }
    }

    pub fn d(&self) -> usize {
        self.targets.len()
    }

    /// Rank of `A` over `φ(A)`.
    pub fn rank(&self) -> usize {
        self.exps.iter().map(|&e| e as usize).product()
    }

    /// `outer ∘ inner`.
    pub fn compose(k: &Fq, outer: &TwistSpec, inner: &TwistSpec) -> TwistSpec {
        let d = inner.d();
        let mut targets = vec![0; d];
        let mut exps = vec![0; d];
        let mut units = vec![0; d];
        for j in 0..d {
            let mid = inner.targets[j];
            targets[j] = outer.targets[mid];
            exps[j] = outer.exps[mid] * inner.exps[j];
            units[j] = k.mul(inner.units[j], k.pow(outer.units[mid], inner.exps[j] as u64));
        }
        TwistSpec { targets, exps, units }
    }

    pub fn square(&self, k: &Fq) -> TwistSpec {
        Self::compose(k, self, self)
    }

    pub fn power(&self, k: &Fq, n: u32) -> TwistSpec {
        let mut acc = Self::qpow(self.d(), 1);
        for _ in 0..n {
            acc = Self::compose(k, self, &acc);
        }
        acc
    }

    /// Exponent bound `E_i = e_{π^{-1}(i)}` of the monomial basis of `A` over `φ(A)`.
    pub fn basis_bounds(&self) -> Vec<u32> {
        let mut b = vec![0; self.d()];
        for (j, &t) in self.targets.iter().enumerate() {
            b[t] = self.exps[j];
        }
        b
    }

    fn inverse_target(&self, i: usize) -> usize {
        self.targets.iter().position(|&t| t == i).unwrap()
    }

    /// Image of the monomial `c X^a`.
    pub fn apply_monomial(&self, k: &Fq, c: Elem, a: &[u32]) -> (Elem, Vec<u32>) {
        let mut e = vec![0; self.d()];
        let mut coef = c;
        for (j, &aj) in a.iter().enumerate() {
            e[self.targets[j]] += self.exps[j] * aj;
            coef = k.mul(coef, k.pow(self.units[j], aj as u64));
        }
        (coef, e)
    }

    /// Matrix `C` with `φ(X_j) = Σ_l C[j][l] X_l`.
    pub fn c_matrix(&self) -> Vec<Vec<Poly>> {
        let d = self.d();
        let mut c = vec![vec![Vec::new(); d]; d];
        for j in 0..d {
            let l = self.targets[j];
            let mut e = vec![0; d];
            e[l] = self.exps[j] - 1;
            c[j][l] = vec![(self.units[j], e)];
        }
        c
    }
}

/// `φ(I) A`.
pub fn twist_ideal(k: &Fq, t: &TwistSpec, ideal: &MonIdeal) -> MonIdeal {
    let gens = ideal.gens().iter().map(|(c, a)| t.apply_monomial(k, *c, a)).collect();
    MonIdeal::new(ideal.d(), gens)
}

/// Monomial basis of `A` over `φ(A)` in degree-lexicographic order.
pub fn pullback_monomials(t: &TwistSpec) -> Vec<Vec<u32>> {
    MonIdeal::powers(&t.basis_bounds()).standard_monomials().expect("finite by construction")
}

/// `φ^* M` with basis `(monomial b, basis vector v)` at index `b * dim M + v`.
pub fn pullback(t: &TwistSpec, m: &FLModule) -> FLModule {
    let k = m.field();
    let d = t.d();
    assert_eq!(d, m.d(), "twist and module have different numbers of variables");
    let mons = pullback_monomials(t);
    let bounds = t.basis_bounds();
    let n = m.dim();
    let big = mons.len() * n;
    let index = |a: &[u32]| mons.iter().position(|b| b.as_slice() == a).unwrap();
    let act = (0..d)
        .map(|i| {
            let mut out = Mat::zeros(big, big);
            let j = t.inverse_target(i);
            let uinv = k.inv(t.units[j]);
            for (bi, b) in mons.iter().enumerate() {
                let mut nb = b.clone();
                if b[i] + 1 < bounds[i] {
                    nb[i] += 1;
                    let r = index(&nb);
                    for v in 0..n {
                        out.set(r * n + v, bi * n + v, 1);
                    }
                } else {
                    // X_i^{E_i} = u_j^{-1} φ(X_j)
                    nb[i] = 0;
                    let r = index(&nb);
                    let xj = m.act(j);
                    for v in 0..n {
                        for w in 0..n {
                            let x = xj.get(w, v);
                            if x != 0 {
                                out.set(r * n + w, bi * n + v, k.mul(uinv, x));
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    FLModule::new_unchecked(k.clone(), d, act)
}

/// `(φ^*)^n M`, built by iterating the pullback.
pub fn pullback_pow(t: &TwistSpec, m: &FLModule, n: usize) -> FLModule {
    (0..n).fold(m.clone(), |acc, _| pullback(t, &acc))
}

/// The semilinear unit `M → φ^* M`, `v ↦ 1 ⊗ v`. Because the monomial 1 comes
/// first, iterated units are the inclusion of the first `dim M` coordinates.
pub fn unit_map(m_dim: usize, target_dim: usize) -> Mat {
    let mut u = Mat::zeros(target_dim, m_dim);
    for v in 0..m_dim {
        u.set(v, v, 1);
    }
    u
}

pub fn pullback_map(t: &TwistSpec, f: &ModuleMap) -> ModuleMap {
    let r = t.rank();
    let a = f.mat();
    let mut mat = Mat::zeros(r * a.rows(), r * a.cols());
    for b in 0..r {
        mat.put(b * a.rows(), b * a.cols(), a);
    }
    ModuleMap::new_unchecked(pullback(t, f.source()), pullback(t, f.target()), mat)
}

/// The `A`-linear extension `φ^* M → N`, `b ⊗ v ↦ b g(v)`, of a map `g`
/// satisfying `g(X_j v) = φ(X_j) g(v)`.
pub fn pullback_extend(t: &TwistSpec, m: &FLModule, n: &FLModule, g: &Mat) -> Result<ModuleMap> {
    check_semilinear(&t.c_matrix(), g, m, n)?;
    let k = m.field();
    let mons = pullback_monomials(t);
    let dm = m.dim();
    let mut mat = Mat::zeros(n.dim(), mons.len() * dm);
    for (bi, b) in mons.iter().enumerate() {
        let block = n.monomial_matrix(b).mul(k, g);
        mat.put(0, bi * dm, &block);
    }
    let src = pullback(t, m);
    Ok(ModuleMap::new_unchecked(src, n.clone(), mat))
}

/// The comparison `φ^*(A/I) ≅ A/φ(I)A` sending `1 ⊗ 1` to `1`.
pub fn cyclic_pullback_iso(k: &Fq, t: &TwistSpec, ideal: &MonIdeal) -> Result<ModuleMap> {
    let src = cyclic_module(k, ideal)?;
    let tgt = cyclic_module(k, &twist_ideal(k, t, ideal))?;
    // g(X^a) = φ(X^a) in the target
    let mut g = Mat::zeros(tgt.module.dim(), src.module.dim());
    for (c, a) in src.monomials.iter().enumerate() {
        let (coef, e) = t.apply_monomial(k, 1, a);
        if let Some(r) = tgt.monomials.iter().position(|b| *b == e) {
            g.set(r, c, coef);
        }
    }
    let iso = pullback_extend(t, &src.module, &tgt.module, &g)?;
    if !iso.is_bijective() {
        return Err(Error::NotBijective("pullback of a cyclic module is not cyclic".into()));
    }
    Ok(iso)
}

/// `Tor_i(M) → Tor_i(φ^* M)` induced by the unit, between given Tor spaces.
pub fn tor_unit(t: &TwistSpec, src: &TorSpace, tgt: &TorSpace) -> Result<Mat> {
    let g = unit_map(src.module().dim(), tgt.module().dim());
    tor_semilinear_between(&t.c_matrix(), &g, src, tgt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flmod::random_module;
    use crate::koszul::{tor, tor_dims};

    fn k(p: u32, f: u32) -> Fq {
        Fq::new(p, f).unwrap()
    }

    #[test]
    fn twist_ideal_examples() {
        let f = k(3, 1);
        let ram = TwistSpec::ram(3, 2);
        let i = MonIdeal::powers(&[2, 1]);
        let twice = twist_ideal(&f, &ram, &twist_ideal(&f, &ram, &i));
        let c = cyclic_module(&f, &twice).unwrap();
        assert_eq!(c.monomials, cyclic_module(&f, &MonIdeal::powers(&[6, 3])).unwrap().monomials);

        let un = TwistSpec::unram(3);
        let j = twist_ideal(&f, &un, &MonIdeal::powers(&[2, 3]));
        let exps: Vec<Vec<u32>> = j.exponents().cloned().collect();
        assert_eq!(exps, vec![vec![0, 6], vec![9, 0]]);

        let q = TwistSpec::qpow(2, 4);
        let j = twist_ideal(&f, &q, &MonIdeal::powers(&[1, 1]));
        assert_eq!(j.exponents().cloned().collect::<Vec<_>>(), vec![vec![4, 0], vec![0, 4]]);
    }

    #[test]
    fn square_is_consistent() {
        let f = k(5, 1);
        let t = TwistSpec::ram(5, 3);
        let sq = t.square(&f);
        assert_eq!(sq.targets, vec![0, 1]);
        assert_eq!(sq.exps, vec![5, 5]);
        let i = MonIdeal::powers(&[3, 1]);
        let a = twist_ideal(&f, &sq, &i);
        let b = twist_ideal(&f, &t, &twist_ideal(&f, &t, &i));
        assert_eq!(a, b);
    }

    #[test]
    fn pullback_dimensions() {
        let f = k(2, 1);
        let res = FLModule::residue(f.clone(), 2);
        let p = pullback(&TwistSpec::unram(2), &res);
        assert_eq!(p.dim(), 4);
        p.validate().unwrap();
        assert_eq!(pullback(&TwistSpec::ram(3, 1), &FLModule::residue(k(3, 1), 2)).dim(), 3);
        let m = random_module(&f, 2, 5, 1);
        let q = pullback(&TwistSpec::qpow(2, 2), &m);
        assert_eq!(q.dim(), 20);
        q.validate().unwrap();
    }

    #[test]
    fn cyclic_iso_examples() {
        let f = k(2, 1);
        let iso = cyclic_pullback_iso(&f, &TwistSpec::unram(2), &MonIdeal::powers(&[1, 1])).unwrap();
        assert_eq!(iso.target().dim(), 4);
        let f3 = k(3, 1);
        for r in 0..3 {
            let iso = cyclic_pullback_iso(&f3, &TwistSpec::ram(3, 1), &MonIdeal::powers(&[r + 1, 1])).unwrap();
            assert_eq!(iso.target().dim(), 3 * (r as usize + 1));
        }
        let iso = cyclic_pullback_iso(&f3, &TwistSpec::qpow(2, 3), &MonIdeal::powers(&[2, 1])).unwrap();
        assert_eq!(iso.target().dim(), 18);
    }

    #[test]
    fn tor_dims_survive_pullback_and_unit_is_iso() {
        let f = k(3, 1);
        for (seed, t) in [(1, TwistSpec::unram(3)), (2, TwistSpec::ram(3, 2)), (3, TwistSpec::qpow(2, 3))] {
            let m = random_module(&f, 2, 4, seed);
            let pm = pullback(&t, &m);
            assert_eq!(tor_dims(&m), tor_dims(&pm));
            for i in 0..=2 {
                let a = tor(&m, i);
                let b = tor(&pm, i);
                let u = tor_unit(&t, &a, &b).unwrap();
                assert_eq!(u.rank(&f), a.dim(), "degree {i}");
            }
        }
    }
}
