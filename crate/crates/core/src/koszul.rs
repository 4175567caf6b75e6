//! `Tor_i^A(k, M)` as Koszul homology, induced maps, semilinear chain maps and
//! the long exact sequence of a short exact sequence.

use crate::error::{Error, Result};
use crate::field::{Elem, Fq};
use crate::flmod::{FLModule, ModuleMap};
use crate::linalg::{axpy, is_zero, Mat, RowEchelon};

/// Size-`i` subsets of `0..d` in lexicographic order.
pub fn subsets(d: usize, i: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == i {
            out.push(cur.clone());
            return;
        }
        for j in start..d {
            cur.push(j);
            rec(j + 1, d, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if i <= d {
        rec(0, d, i, &mut Vec::new(), &mut out);
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, j| acc * (n - j) / (j + 1))
}

/// Koszul differential `Λ^i ⊗ M → Λ^{i-1} ⊗ M`, blocks of size `dim M` in
/// subset order.
pub fn differential(m: &FLModule, i: usize) -> Mat {
    let k = m.field();
    let d = m.d();
    let n = m.dim();
    let src = subsets(d, i);
    let tgt = subsets(d, i.wrapping_sub(1));
    if i == 0 || i > d {
        return Mat::zeros(tgt.len() * n, src.len() * n);
    }
    let mut out = Mat::zeros(tgt.len() * n, src.len() * n);
    for (c, s) in src.iter().enumerate() {
        for (pos, &j) in s.iter().enumerate() {
            let rest: Vec<usize> = s.iter().copied().filter(|&x| x != j).collect();
            let r = tgt.iter().position(|t| *t == rest).unwrap();
            let sign = if pos % 2 == 0 { 1 } else { k.neg(1) };
            let a = m.act(j);
            for x in 0..n {
                for y in 0..n {
                    let v = a.get(x, y);
                    if v != 0 {
                        out.add_at(k, r * n + x, c * n + y, k.mul(sign, v));
                    }
                }
            }
        }
    }
    out
}

/// Homology of the Koszul complex in one degree, with chosen representatives.
#[derive(Clone, Debug)]
pub struct TorSpace {
    module: FLModule,
    degree: usize,
    boundaries: RowEchelon,
    /// Reduced echelon basis of the cycles modulo boundaries; rows are cycles.
    classes: RowEchelon,
}

impl TorSpace {
    pub fn dim(&self) -> usize {
        self.classes.dim()
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn module(&self) -> &FLModule {
        &self.module
    }
    pub fn chain_dim(&self) -> usize {
        self.boundaries.ambient()
    }
    pub fn reps(&self) -> &[Vec<Elem>] {
        self.classes.basis()
    }
    pub fn boundaries(&self) -> &RowEchelon {
        &self.boundaries
    }

    /// Coordinates of the class of a cycle `z`.
    pub fn coords(&self, z: &[Elem]) -> Vec<Elem> {
        let k = self.module.field();
        let (rem, _) = self.boundaries.reduce(k, z);
        let (rem2, c) = self.classes.reduce(k, &rem);
        debug_assert!(is_zero(&rem2), "vector is not a cycle");
        c
    }

    /// Whether a chain is a boundary.
    pub fn is_boundary(&self, z: &[Elem]) -> bool {
        self.boundaries.contains(self.module.field(), z)
    }
}

pub fn tor(m: &FLModule, i: usize) -> TorSpace {
    let k = m.field();
    let d = m.d();
    let n = m.dim();
    let chain_dim = binomial(d, i) * n;
    let cycles = if i == 0 || i > d {
        Mat::identity(chain_dim)
    } else {
        differential(m, i).kernel(k)
    };
    let boundaries = if i + 1 > d {
        RowEchelon::new(chain_dim)
    } else {
        RowEchelon::from_rows_of(k, &differential(m, i + 1).transpose())
    };
    let rems: Vec<Vec<Elem>> = (0..cycles.cols()).map(|j| boundaries.reduce(k, &cycles.col(j)).0).collect();
    let classes = RowEchelon::from_vectors(k, chain_dim, &rems);
    TorSpace { module: m.clone(), degree: i, boundaries, classes }
}

/// All Tor dimensions from ranks of the differentials.
pub fn tor_dims(m: &FLModule) -> Vec<usize> {
    let k = m.field();
    let d = m.d();
    let ranks: Vec<usize> = (0..=d + 1)
        .map(|i| if i == 0 || i > d || m.dim() == 0 { 0 } else { differential(m, i).rank(k) })
        .collect();
    (0..=d).map(|i| binomial(d, i) * m.dim() - ranks[i] - ranks[i + 1]).collect()
}

/// `Λ^i ⊗ f` on chains.
fn chain_apply(f: &Mat, k: &Fq, blocks: usize, z: &[Elem]) -> Vec<Elem> {
    let (r, c) = (f.rows(), f.cols());
    let mut out = vec![0; blocks * r];
    for b in 0..blocks {
        let img = f.apply(k, &z[b * c..(b + 1) * c]);
        out[b * r..(b + 1) * r].copy_from_slice(&img);
    }
    out
}

/// Matrix of `Tor_i(f)` in the chosen bases.
pub fn tor_map_between(src: &TorSpace, tgt: &TorSpace, f: &Mat) -> Mat {
    let k = src.module.field();
    let blocks = binomial(src.module.d(), src.degree);
    let cols: Vec<Vec<Elem>> = src.reps().iter().map(|z| tgt.coords(&chain_apply(f, k, blocks, z))).collect();
    Mat::from_cols(tgt.dim(), &cols)
}

pub fn tor_map(f: &ModuleMap, i: usize) -> Mat {
    let s = tor(f.source(), i);
    let t = tor(f.target(), i);
    tor_map_between(&s, &t, f.mat())
}

/// A polynomial in the variables of `A`, as (coefficient, exponent) terms.
pub type Poly = Vec<(Elem, Vec<u32>)>;

fn poly_mul(k: &Fq, a: &Poly, b: &Poly) -> Poly {
    let mut out: Poly = Vec::new();
    for (ca, ea) in a {
        for (cb, eb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let c = k.mul(*ca, *cb);
            match out.iter_mut().find(|(_, f)| *f == e) {
                Some(t) => t.0 = k.add(t.0, c),
                None => out.push((c, e)),
            }
        }
    }
    out.retain(|(c, _)| *c != 0);
    out
}

fn poly_add(k: &Fq, a: &Poly, b: &Poly, sign: Elem) -> Poly {
    let mut out = a.clone();
    for (c, e) in b {
        let c = k.mul(*c, sign);
        match out.iter_mut().find(|(_, f)| f == e) {
            Some(t) => t.0 = k.add(t.0, c),
            None => out.push((c, e.clone())),
        }
    }
    out.retain(|(c, _)| *c != 0);
    out
}

/// Operator of a polynomial on a module.
pub fn poly_operator(m: &FLModule, p: &Poly) -> Mat {
    let k = m.field();
    let mut out = Mat::zeros(m.dim(), m.dim());
    for (c, e) in p {
        out = out.add(k, &m.monomial_matrix(e).scaled(k, *c));
    }
    out
}

/// Determinant of the minor of `c` on rows `rs` and columns `cs`.
pub(crate) fn minor_det(k: &Fq, c: &[Vec<Poly>], rs: &[usize], cs: &[usize]) -> Poly {
    if rs.is_empty() {
        return vec![(1, vec![0; c.len()])];
    }
    // Laplace expansion along the first row
    let mut acc: Poly = Vec::new();
    for (j, &col) in cs.iter().enumerate() {
        let entry = &c[rs[0]][col];
        if entry.is_empty() {
            continue;
        }
        let sub_cs: Vec<usize> = cs.iter().copied().filter(|&x| x != col).collect();
        let sub = minor_det(k, c, &rs[1..], &sub_cs);
        let term = poly_mul(k, entry, &sub);
        let sign = if j % 2 == 0 { 1 } else { k.neg(1) };
        acc = poly_add(k, &acc, &term, sign);
    }
    acc
}

/// The map `Tor_i(k, M) → Tor_i(k, N)` induced by a semilinear `g: M → N`
/// with `g(X_j m) = (Σ_l C[j][l] X_l) g(m)`, via the chain map `Λ^i(C) ⊗ g`.
pub fn tor_semilinear(c: &[Vec<Poly>], g: &Mat, m: &FLModule, n: &FLModule, i: usize) -> Result<Mat> {
    let s = tor(m, i);
    let t = tor(n, i);
    tor_semilinear_between(c, g, &s, &t)
}

pub fn check_semilinear(c: &[Vec<Poly>], g: &Mat, m: &FLModule, n: &FLModule) -> Result<()> {
    let k = m.field();
    let d = m.d();
    for j in 0..d {
        let mut phi_xj = Mat::zeros(n.dim(), n.dim());
        for l in 0..d {
            if !c[j][l].is_empty() {
                let op = poly_operator(n, &c[j][l]).mul(k, n.act(l));
                phi_xj = phi_xj.add(k, &op);
            }
        }
        if g.mul(k, m.act(j)) != phi_xj.mul(k, g) {
            return Err(Error::NotSemilinear(format!("relation fails for variable {j}")));
        }
    }
    Ok(())
}

pub fn tor_semilinear_between(c: &[Vec<Poly>], g: &Mat, s: &TorSpace, t: &TorSpace) -> Result<Mat> {
    let m = s.module();
    let n = t.module();
    let k = m.field();
    let d = m.d();
    let i = s.degree();
    check_semilinear(c, g, m, n)?;
    let subs = subsets(d, i);
    let nd = n.dim();
    // block (T, S) operator: det C[S, T]
    let ops: Vec<Vec<Option<Mat>>> = subs
        .iter()
        .map(|srow| {
            subs.iter()
                .map(|tcol| {
                    let p = minor_det(k, c, srow, tcol);
                    if p.is_empty() {
                        None
                    } else {
                        Some(poly_operator(n, &p))
                    }
                })
                .collect()
        })
        .collect();
    let md = m.dim();
    let cols: Vec<Vec<Elem>> = s
        .reps()
        .iter()
        .map(|z| {
            let mut out = vec![0; subs.len() * nd];
            for (si, _) in subs.iter().enumerate() {
                let part = &z[si * md..(si + 1) * md];
                if is_zero(part) {
                    continue;
                }
                let gz = g.apply(k, part);
                for (ti, _) in subs.iter().enumerate() {
                    if let Some(op) = &ops[si][ti] {
                        let w = op.apply(k, &gz);
                        axpy(k, &mut out[ti * nd..(ti + 1) * nd], &w, 1);
                    }
                }
            }
            t.coords(&out)
        })
        .collect();
    Ok(Mat::from_cols(t.dim(), &cols))
}

/// Rank data for the long exact sequence of `0 → M → N → N/M → 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LesReport {
    /// Per degree `i`: (dim Tor_i M, dim Tor_i N, dim Tor_i N/M).
    pub dims: Vec<(usize, usize, usize)>,
    /// Per degree `i`: (rank Tor_i f, rank Tor_i π, rank δ_i : Tor_i(N/M) → Tor_{i-1}(M)).
    pub ranks: Vec<(usize, usize, usize)>,
    pub exact: bool,
}

pub fn les_check(f: &ModuleMap) -> Result<LesReport> {
    if !f.is_injective() {
        return Err(Error::NotInjective("les_check needs an injective map".into()));
    }
    let k = f.source().field().clone();
    let m = f.source();
    let n = f.target();
    let d = m.d();
    let img = RowEchelon::from_rows_of(&k, &f.mat().transpose());
    let quot = n.quotient(&img);
    let qm = &quot.module;
    let pi = quot.projection.mat().clone();

    let tm: Vec<TorSpace> = (0..=d).map(|i| tor(m, i)).collect();
    let tn: Vec<TorSpace> = (0..=d).map(|i| tor(n, i)).collect();
    let tq: Vec<TorSpace> = (0..=d).map(|i| tor(qm, i)).collect();
    let fi: Vec<Mat> = (0..=d).map(|i| tor_map_between(&tm[i], &tn[i], f.mat())).collect();
    let pii: Vec<Mat> = (0..=d).map(|i| tor_map_between(&tn[i], &tq[i], &pi)).collect();

    // lift along the section that picks the free coordinates
    let mut section = Mat::zeros(n.dim(), qm.dim());
    for (j, &c) in quot.free.iter().enumerate() {
        section.set(c, j, 1);
    }
    let fmat = f.mat();
    let delta: Vec<Mat> = (0..=d)
        .map(|i| {
            if i == 0 {
                return Mat::zeros(0, tq[0].dim());
            }
            let dn = differential(n, i);
            let bl_src = binomial(d, i);
            let bl_tgt = binomial(d, i - 1);
            let big_f = block_diag(fmat, bl_tgt);
            let cols: Vec<Vec<Elem>> = tq[i]
                .reps()
                .iter()
                .map(|z| {
                    let lift = chain_apply(&section, &k, bl_src, z);
                    let bd = dn.apply(&k, &lift);
                    let pre = big_f.solve(&k, &bd).expect("boundary lies in the submodule");
                    tm[i - 1].coords(&pre)
                })
                .collect();
            Mat::from_cols(tm[i - 1].dim(), &cols)
        })
        .collect();

    let mut exact = true;
    let mut dims = Vec::new();
    let mut ranks = Vec::new();
    for i in 0..=d {
        let rf = fi[i].rank(&k);
        let rp = pii[i].rank(&k);
        let rd = if i == 0 { 0 } else { delta[i].rank(&k) };
        dims.push((tm[i].dim(), tn[i].dim(), tq[i].dim()));
        ranks.push((rf, rp, rd));
        // compositions vanish
        exact &= pii[i].mul(&k, &fi[i]).is_zero();
        if i > 0 {
            exact &= delta[i].mul(&k, &pii[i]).is_zero();
            exact &= fi[i - 1].mul(&k, &delta[i]).is_zero();
        }
    }
    for i in 0..=d {
        let (dm, dn, dq) = dims[i];
        let (rf, rp, rd) = ranks[i];
        let rd_next = if i < d { ranks[i + 1].2 } else { 0 };
        exact &= dm - rf == rd_next;
        exact &= dn - rp == rf;
        exact &= dq - rd == rp;
    }
    Ok(LesReport { dims, ranks, exact })
}

fn block_diag(a: &Mat, copies: usize) -> Mat {
    let mut out = Mat::zeros(a.rows() * copies, a.cols() * copies);
    for b in 0..copies {
        out.put(b * a.rows(), b * a.cols(), a);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flmod::{cyclic_module, random_module, MonIdeal};

    fn k(p: u32) -> Fq {
        Fq::new(p, 1).unwrap()
    }

    #[test]
    fn residue_field_tor() {
        for d in 1..=3 {
            let m = FLModule::residue(k(2), d);
            let dims: Vec<usize> = (0..=d).map(|i| tor(&m, i).dim()).collect();
            let expected: Vec<usize> = (0..=d).map(|i| binomial(d, i)).collect();
            assert_eq!(dims, expected);
            assert_eq!(tor_dims(&m), expected);
        }
    }

    #[test]
    fn complete_intersections() {
        let f = k(3);
        for a in [[2, 1], [3, 2], [1, 4]] {
            let m = cyclic_module(&f, &MonIdeal::powers(&a)).unwrap().module;
            assert_eq!(tor_dims(&m), vec![1, 2, 1]);
        }
    }

    #[test]
    fn tor_map_examples() {
        let f = k(2);
        let m = cyclic_module(&f, &MonIdeal::powers(&[2, 2])).unwrap().module;
        for i in 0..=2 {
            let id = tor_map(&ModuleMap::identity(&m), i);
            assert_eq!(id, Mat::identity(tor(&m, i).dim()));
            assert!(tor_map(&ModuleMap::zero(&m, &m), i).is_zero());
        }
        let x = ModuleMap::new(m.clone(), m.clone(), m.act(0).clone()).unwrap();
        assert!(tor_map(&x, 0).is_zero());
    }

    #[test]
    fn semilinear_identity_twist_matches_tor_map() {
        let f = k(3);
        let m = random_module(&f, 2, 6, 11);
        let one = vec![(1, vec![0, 0])];
        let c = vec![vec![one.clone(), vec![]], vec![vec![], one]];
        for i in 0..=2 {
            let a = tor_semilinear(&c, &Mat::identity(6), &m, &m, i).unwrap();
            assert_eq!(a, Mat::identity(tor(&m, i).dim()));
        }
        let bad = Mat::from_fn(6, 6, |r, c| if r == 0 && c == 5 { 1 } else { 0 });
        let res = tor_semilinear(&c, &bad.add(&f, &Mat::identity(6)), &m, &m, 0);
        if !ModuleMap::new_unchecked(m.clone(), m.clone(), bad.add(&f, &Mat::identity(6))).is_linear() {
            assert!(res.is_err());
        }
    }

    #[test]
    fn les_socle_inclusion() {
        let f = k(2);
        let n = cyclic_module(&f, &MonIdeal::powers(&[2, 1])).unwrap().module;
        let m = FLModule::residue(f.clone(), 2);
        let inc = ModuleMap::new(m, n, Mat::from_rows(2, 1, vec![0, 1])).unwrap();
        let rep = les_check(&inc).unwrap();
        assert!(rep.exact);
        // connecting map Tor_1(k) -> Tor_0(k) is nonzero
        assert!(rep.ranks[1].2 > 0);
        let zero = FLModule::zero(f.clone(), 2);
        let z = ModuleMap::zero(&zero, &inc.target().clone());
        assert!(les_check(&z).unwrap().exact);
    }
}
