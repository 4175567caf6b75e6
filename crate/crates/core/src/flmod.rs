//! Finite-length modules over `A = k[[X_1, ..., X_d]]`, stored as `d` commuting
//! nilpotent matrices acting on column vectors.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Fq};
use crate::linalg::{axpy, is_zero, Mat, RowEchelon};

/// An ideal generated by unit multiples of monomials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonIdeal {
    d: usize,
    gens: Vec<(Elem, Vec<u32>)>,
}

impl MonIdeal {
    pub fn new(d: usize, gens: Vec<(Elem, Vec<u32>)>) -> Self {
        assert!(gens.iter().all(|(c, e)| *c != 0 && e.len() == d), "malformed ideal generator");
        MonIdeal { d, gens }
    }

    /// Ideal generated by monomials with unit coefficient 1.
    pub fn monomial(d: usize, exps: &[Vec<u32>]) -> Self {
        Self::new(d, exps.iter().map(|e| (1, e.clone())).collect())
    }

    /// `(X_1^{a_1}, ..., X_d^{a_d})`.
    pub fn powers(a: &[u32]) -> Self {
        let d = a.len();
        let exps: Vec<Vec<u32>> = (0..d)
            .map(|i| {
                let mut e = vec![0; d];
                e[i] = a[i];
                e
            })
            .collect();
        Self::monomial(d, &exps)
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn gens(&self) -> &[(Elem, Vec<u32>)] {
        &self.gens
    }
    pub fn exponents(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.gens.iter().map(|(_, e)| e)
    }

    /// Whether the monomial `X^a` lies in the ideal.
    pub fn contains_monomial(&self, a: &[u32]) -> bool {
        self.exponents().any(|e| e.iter().zip(a).all(|(x, y)| x <= y))
    }

    /// Per-axis bound: the smallest pure power of each variable in the ideal.
    fn axis_bounds(&self) -> Option<Vec<u32>> {
        (0..self.d)
            .map(|i| {
                self.exponents()
                    .filter(|e| e.iter().enumerate().all(|(j, &x)| j == i || x == 0))
                    .map(|e| e[i])
                    .min()
            })
            .collect()
    }

    pub fn has_finite_colength(&self) -> bool {
        self.axis_bounds().is_some()
    }

    /// Monomials outside the ideal, in degree-lexicographic order.
    pub fn standard_monomials(&self) -> Result<Vec<Vec<u32>>> {
        let bounds = self
            .axis_bounds()
            .ok_or_else(|| Error::InfiniteColength("ideal has infinite colength".into()))?;
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.d];
        loop {
            if !self.contains_monomial(&cur) {
                out.push(cur.clone());
            }
            // odometer over the bounding box
            let mut i = 0;
            loop {
                if i == self.d {
                    out.sort_by(|a, b| deglex(a, b));
                    return Ok(out);
                }
                cur[i] += 1;
                if cur[i] < bounds[i] {
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }
}

/// Degree first, then lexicographic with the first variable most significant.
pub fn deglex(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

struct ModuleData {
    field: Fq,
    d: usize,
    dim: usize,
    act: Vec<Mat>,
    labels: Option<Vec<String>>,
}

/// A finite-length `A`-module. Cloning is cheap.
#[derive(Clone)]
pub struct FLModule(Arc<ModuleData>);

impl std::fmt::Debug for FLModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FLModule(d={}, dim={}, {:?})", self.0.d, self.0.dim, self.0.field)
    }
}

impl FLModule {
    /// Validated constructor: actions must commute and be nilpotent.
    pub fn new(field: Fq, d: usize, act: Vec<Mat>) -> Result<Self> {
        let m = Self::new_unchecked(field, d, act);
        m.validate()?;
        Ok(m)
    }

    /// Constructor for actions known to be valid by construction.
    pub fn new_unchecked(field: Fq, d: usize, act: Vec<Mat>) -> Self {
        assert_eq!(act.len(), d, "one action matrix per variable");
        let dim = act.first().map_or(0, |a| a.rows());
        for a in &act {
            assert!(a.rows() == dim && a.cols() == dim, "action matrices must be square of equal size");
        }
        FLModule(Arc::new(ModuleData { field, d, dim, act, labels: None }))
    }

    pub fn zero(field: Fq, d: usize) -> Self {
        Self::new_unchecked(field, d, vec![Mat::zeros(0, 0); d])
    }

    /// The residue field `k = A/m`.
    pub fn residue(field: Fq, d: usize) -> Self {
        Self::new_unchecked(field, d, vec![Mat::zeros(1, 1); d])
    }

    /// `k^n` with every variable acting as zero.
    pub fn trivial(field: Fq, d: usize, n: usize) -> Self {
        Self::new_unchecked(field, d, vec![Mat::zeros(n, n); d])
    }

    pub fn with_labels(self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.dim());
        let d = &self.0;
        FLModule(Arc::new(ModuleData {
            field: d.field.clone(),
            d: d.d,
            dim: d.dim,
            act: d.act.clone(),
            labels: Some(labels),
        }))
    }

    pub fn validate(&self) -> Result<()> {
        let k = &self.0.field;
        for i in 0..self.d() {
            for j in i + 1..self.d() {
                let ab = self.act(i).mul(k, self.act(j));
                let ba = self.act(j).mul(k, self.act(i));
                if ab != ba {
                    return Err(Error::Construction(format!("actions {i} and {j} do not commute")));
                }
            }
            if !is_nilpotent(k, self.act(i)) {
                return Err(Error::Construction(format!("action {i} is not nilpotent")));
            }
        }
        Ok(())
    }

    pub fn field(&self) -> &Fq {
        &self.0.field
    }
    pub fn d(&self) -> usize {
        self.0.d
    }
    pub fn dim(&self) -> usize {
        self.0.dim
    }
    pub fn act(&self, i: usize) -> &Mat {
        &self.0.act[i]
    }
    pub fn acts(&self) -> &[Mat] {
        &self.0.act
    }
    pub fn labels(&self) -> Option<&[String]> {
        self.0.labels.as_deref()
    }

    /// `X^a v`.
    pub fn apply_monomial(&self, a: &[u32], v: &[Elem]) -> Vec<Elem> {
        let k = self.field();
        let mut w = v.to_vec();
        for (i, &e) in a.iter().enumerate() {
            for _ in 0..e {
                if is_zero(&w) {
                    return w;
                }
                w = self.act(i).apply(k, &w);
            }
        }
        w
    }

    pub fn monomial_matrix(&self, a: &[u32]) -> Mat {
        let k = self.field();
        let mut m = Mat::identity(self.dim());
        for (i, &e) in a.iter().enumerate() {
            for _ in 0..e {
                m = self.act(i).mul(k, &m);
            }
        }
        m
    }

    /// Stacked actions `[X_1; ...; X_d]`, a `d*dim x dim` matrix.
    pub fn stacked_actions(&self) -> Mat {
        let refs: Vec<&Mat> = self.acts().iter().collect();
        if refs.is_empty() {
            return Mat::zeros(0, self.dim());
        }
        Mat::vstack(&refs)
    }

    /// Basis (columns) of the socle `M[m]`.
    pub fn socle(&self) -> Mat {
        self.stacked_actions().kernel(self.field())
    }

    /// Dimension of the cotop `M/mM`.
    pub fn cotop_dim(&self) -> usize {
        if self.d() == 0 {
            return self.dim();
        }
        let refs: Vec<&Mat> = self.acts().iter().collect();
        self.dim() - Mat::hstack(&refs).rank(self.field())
    }

    pub fn direct_sum(mods: &[FLModule]) -> FLModule {
        assert!(!mods.is_empty());
        let k = mods[0].field().clone();
        let d = mods[0].d();
        let n: usize = mods.iter().map(|m| m.dim()).sum();
        let act = (0..d)
            .map(|i| {
                let mut a = Mat::zeros(n, n);
                let mut off = 0;
                for m in mods {
                    a.put(off, off, m.act(i));
                    off += m.dim();
                }
                a
            })
            .collect();
        FLModule::new_unchecked(k, d, act)
    }

    /// Induced actions on an `A`-stable subspace given by a reduced echelon basis.
    pub fn restrict(&self, sub: &RowEchelon) -> FLModule {
        let k = self.field();
        let n = sub.dim();
        let act = (0..self.d())
            .map(|i| {
                let mut a = Mat::zeros(n, n);
                for (c, v) in sub.basis().iter().enumerate() {
                    let w = self.act(i).apply(k, v);
                    for (r, &pc) in sub.pivots().iter().enumerate() {
                        a.set(r, c, w[pc]);
                    }
                    debug_assert!(sub.contains(k, &w), "subspace is not stable");
                }
                a
            })
            .collect();
        FLModule::new_unchecked(k.clone(), self.d(), act)
    }

    /// Quotient by an `A`-stable subspace. Basis: standard vectors at the
    /// non-pivot positions of `sub`.
    pub fn quotient(&self, sub: &RowEchelon) -> Quotient {
        let k = self.field();
        let n = self.dim();
        let mut is_pivot = vec![false; n];
        for &p in sub.pivots() {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let mut pos = vec![usize::MAX; n];
        for (j, &c) in free.iter().enumerate() {
            pos[c] = j;
        }
        let m = free.len();
        let act = (0..self.d())
            .map(|i| {
                let mut a = Mat::zeros(m, m);
                for (c, &fc) in free.iter().enumerate() {
                    let col: Vec<Elem> = (0..n).map(|r| self.act(i).get(r, fc)).collect();
                    let (rem, _) = sub.reduce(k, &col);
                    for (r, &x) in rem.iter().enumerate() {
                        if x != 0 {
                            a.set(pos[r], c, x);
                        }
                    }
                }
                a
            })
            .collect();
        let module = FLModule::new_unchecked(k.clone(), self.d(), act);
        let mut proj = Mat::zeros(m, n);
        for c in 0..n {
            let mut e = vec![0; n];
            e[c] = 1;
            let (rem, _) = sub.reduce(k, &e);
            for (r, &x) in rem.iter().enumerate() {
                if x != 0 {
                    proj.set(pos[r], c, x);
                }
            }
        }
        Quotient { module: module.clone(), sub: sub.clone(), free, projection: ModuleMap::new_unchecked(self.clone(), module, proj) }
    }

    pub fn to_json(&self) -> ModuleJson {
        ModuleJson {
            field: FieldJson { p: self.field().p(), f: self.field().degree() },
            d: self.d(),
            dim: self.dim(),
            act: self
                .acts()
                .iter()
                .map(|a| (0..a.rows()).map(|r| a.row(r).iter().map(|&x| x as u32).collect()).collect())
                .collect(),
        }
    }

    pub fn from_json(j: &ModuleJson) -> Result<FLModule> {
        let k = Fq::new(j.field.p, j.field.f)?;
        if j.act.len() != j.d {
            return Err(Error::Dimension("wrong number of action matrices".into()));
        }
        let mut act = Vec::new();
        for rows in &j.act {
            if rows.len() != j.dim || rows.iter().any(|r| r.len() != j.dim) {
                return Err(Error::Dimension("action matrix has the wrong shape".into()));
            }
            let q = k.order() as u32;
            if rows.iter().flatten().any(|&x| x >= q) {
                return Err(Error::Construction("entry outside the field".into()));
            }
            act.push(Mat::from_rows(j.dim, j.dim, rows.iter().flatten().map(|&x| x as Elem).collect()));
        }
        if j.d == 0 {
            return Ok(FLModule::zero(k, 0));
        }
        FLModule::new(k, j.d, act)
    }
}

fn is_nilpotent(k: &Fq, a: &Mat) -> bool {
    // iterate on a basis of the image until it vanishes; at most dim steps
    let mut cur = a.clone();
    for _ in 0..=a.rows() {
        if cur.is_zero() {
            return true;
        }
        cur = a.mul(k, &cur.column_space(k));
    }
    cur.is_zero()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FieldJson {
    pub p: u32,
    pub f: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ModuleJson {
    pub field: FieldJson,
    pub d: usize,
    pub dim: usize,
    pub act: Vec<Vec<Vec<u32>>>,
}

/// Quotient module with its projection.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub module: FLModule,
    pub sub: RowEchelon,
    /// Positions of the ambient basis vectors used as quotient basis.
    pub free: Vec<usize>,
    pub projection: ModuleMap,
}

/// An `A`-linear map, `mat` acting on column vectors of the source.
#[derive(Clone, Debug)]
pub struct ModuleMap {
    source: FLModule,
    target: FLModule,
    mat: Mat,
}

impl ModuleMap {
    pub fn new(source: FLModule, target: FLModule, mat: Mat) -> Result<Self> {
        let f = Self::new_unchecked(source, target, mat);
        if !f.is_linear() {
            return Err(Error::NotLinear("matrix does not commute with the actions".into()));
        }
        Ok(f)
    }

    pub fn new_unchecked(source: FLModule, target: FLModule, mat: Mat) -> Self {
        assert_eq!(mat.rows(), target.dim(), "map rows must match target dimension");
        assert_eq!(mat.cols(), source.dim(), "map columns must match source dimension");
        ModuleMap { source, target, mat }
    }

    pub fn identity(m: &FLModule) -> Self {
        Self::new_unchecked(m.clone(), m.clone(), Mat::identity(m.dim()))
    }

    pub fn zero(source: &FLModule, target: &FLModule) -> Self {
        Self::new_unchecked(source.clone(), target.clone(), Mat::zeros(target.dim(), source.dim()))
    }

    pub fn is_linear(&self) -> bool {
        let k = self.source.field();
        (0..self.source.d()).all(|i| {
            self.mat.mul(k, self.source.act(i)) == self.target.act(i).mul(k, &self.mat)
        })
    }

    pub fn source(&self) -> &FLModule {
        &self.source
    }
    pub fn target(&self) -> &FLModule {
        &self.target
    }
    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &ModuleMap) -> ModuleMap {
        assert_eq!(self.target.dim(), g.source.dim());
        let k = self.source.field();
        ModuleMap::new_unchecked(self.source.clone(), g.target.clone(), g.mat.mul(k, &self.mat))
    }

    pub fn add(&self, g: &ModuleMap) -> ModuleMap {
        let k = self.source.field();
        ModuleMap::new_unchecked(self.source.clone(), self.target.clone(), self.mat.add(k, &g.mat))
    }

    pub fn scaled(&self, c: Elem) -> ModuleMap {
        let k = self.source.field();
        ModuleMap::new_unchecked(self.source.clone(), self.target.clone(), self.mat.scaled(k, c))
    }

    pub fn rank(&self) -> usize {
        self.mat.rank(self.source.field())
    }
    pub fn is_injective(&self) -> bool {
        self.rank() == self.source.dim()
    }
    pub fn is_surjective(&self) -> bool {
        self.rank() == self.target.dim()
    }
    pub fn is_bijective(&self) -> bool {
        self.source.dim() == self.target.dim() && self.is_injective()
    }
}

/// Kernel, image and cokernel of a map, each with its structure maps.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub kernel: ModuleMap,
    pub coimage: ModuleMap,
    pub image: ModuleMap,
    pub cokernel: ModuleMap,
}

pub fn map_factor(f: &ModuleMap) -> Factorization {
    let k = f.source.field();
    let m = &f.source;
    let n = &f.target;

    let ker_cols = f.mat.kernel(k);
    let ker_ech = RowEchelon::from_rows_of(k, &ker_cols.transpose());
    let ker_mod = m.restrict(&ker_ech);
    let kernel = ModuleMap::new_unchecked(ker_mod, m.clone(), ker_ech.basis_matrix().transpose());

    let im_ech = RowEchelon::from_rows_of(k, &f.mat.transpose());
    let im_mod = n.restrict(&im_ech);
    let image = ModuleMap::new_unchecked(im_mod.clone(), n.clone(), im_ech.basis_matrix().transpose());
    let mut co = Mat::zeros(im_ech.dim(), m.dim());
    for c in 0..m.dim() {
        let v = f.mat.col(c);
        for (r, &pc) in im_ech.pivots().iter().enumerate() {
            co.set(r, c, v[pc]);
        }
    }
    let coimage = ModuleMap::new_unchecked(m.clone(), im_mod, co);

    let cokernel = n.quotient(&im_ech).projection;
    Factorization { kernel, coimage, image, cokernel }
}

/// Smallest `A`-stable subspace containing the given vectors, as an inclusion.
pub fn submodule_generated(m: &FLModule, vectors: &[Vec<Elem>]) -> ModuleMap {
    let ech = closure(m, vectors);
    let sub = m.restrict(&ech);
    ModuleMap::new_unchecked(sub, m.clone(), ech.basis_matrix().transpose())
}

/// Echelon basis of the `A`-submodule generated by `vectors`.
pub fn closure(m: &FLModule, vectors: &[Vec<Elem>]) -> RowEchelon {
    let k = m.field();
    let mut ech = RowEchelon::new(m.dim());
    let mut queue: Vec<Vec<Elem>> = Vec::new();
    for v in vectors {
        if ech.insert(k, v) {
            queue.push(v.clone());
        }
    }
    while let Some(v) = queue.pop() {
        for i in 0..m.d() {
            let w = m.act(i).apply(k, &v);
            if ech.insert(k, &w) {
                queue.push(w);
            }
        }
    }
    ech
}

/// `A/I` together with the class of 1.
#[derive(Clone, Debug)]
pub struct CyclicModule {
    pub module: FLModule,
    pub generator: Vec<Elem>,
    pub monomials: Vec<Vec<u32>>,
}

pub fn cyclic_module(field: &Fq, ideal: &MonIdeal) -> Result<CyclicModule> {
    let monomials = ideal.standard_monomials()?;
    let n = monomials.len();
    let index = |a: &[u32]| monomials.iter().position(|b| b.as_slice() == a);
    let d = ideal.d();
    let act = (0..d)
        .map(|i| {
            let mut m = Mat::zeros(n, n);
            for (c, a) in monomials.iter().enumerate() {
                let mut b = a.clone();
                b[i] += 1;
                if let Some(r) = index(&b) {
                    m.set(r, c, 1);
                }
            }
            m
        })
        .collect();
    let module = FLModule::new_unchecked(field.clone(), d, act);
    let mut generator = vec![0; n];
    if n > 0 {
        generator[0] = 1;
    }
    Ok(CyclicModule { module, generator, monomials })
}

/// A basis of `Hom_A(A/I, N)`: each map is determined by the image `n` of the
/// generator, which must satisfy `I n = 0`.
pub fn hom_from_cyclic(field: &Fq, ideal: &MonIdeal, target: &FLModule) -> Result<Vec<ModuleMap>> {
    let src = cyclic_module(field, ideal)?;
    let k = field;
    let n = target.dim();
    let blocks: Vec<Mat> = ideal.exponents().map(|e| target.monomial_matrix(e)).collect();
    let refs: Vec<&Mat> = blocks.iter().collect();
    let constraints = if refs.is_empty() { Mat::zeros(0, n) } else { Mat::vstack(&refs) };
    let sols = constraints.kernel(k);
    let mut out = Vec::new();
    for j in 0..sols.cols() {
        let img = sols.col(j);
        let cols: Vec<Vec<Elem>> = src.monomials.iter().map(|a| target.apply_monomial(a, &img)).collect();
        let mat = Mat::from_cols(n, &cols);
        out.push(ModuleMap::new_unchecked(src.module.clone(), target.clone(), mat));
    }
    Ok(out)
}

/// A basis of `Hom_A(M, N)`, solving the commutation equations `F X_i = X_i F`
/// directly. Output maps are ordered by the echelon form of the solution space.
pub fn hom_basis(m: &FLModule, n: &FLModule) -> Vec<ModuleMap> {
    let k = m.field();
    let (a, b) = (m.dim(), n.dim());
    // unknown F[r][c] at index r * a + c
    let mut rows: Vec<Vec<Elem>> = Vec::new();
    for i in 0..m.d() {
        let xm = m.act(i);
        let xn = n.act(i);
        for r in 0..b {
            for c in 0..a {
                // (F xm)[r][c] - (xn F)[r][c] = sum_j F[r][j] xm[j][c] - sum_j xn[r][j] F[j][c]
                let mut eq = vec![0; a * b];
                for j in 0..a {
                    let x = xm.get(j, c);
                    if x != 0 {
                        eq[r * a + j] = k.add(eq[r * a + j], x);
                    }
                }
                for j in 0..b {
                    let x = xn.get(r, j);
                    if x != 0 {
                        eq[j * a + c] = k.sub(eq[j * a + c], x);
                    }
                }
                if !is_zero(&eq) {
                    rows.push(eq);
                }
            }
        }
    }
    let ech = RowEchelon::from_vectors(k, a * b, &rows);
    let sols = ech.kernel_basis(k);
    let mut sol_vecs: Vec<Vec<Elem>> = (0..sols.cols()).map(|j| sols.col(j)).collect();
    // canonical order: reduced echelon basis of the solution space
    let sol_ech = RowEchelon::from_vectors(k, a * b, &sol_vecs);
    sol_vecs = sol_ech.basis().to_vec();
    sol_vecs
        .into_iter()
        .map(|v| ModuleMap::new_unchecked(m.clone(), n.clone(), Mat::from_rows(b, a, v)))
        .collect()
}

/// `M^∨` with transposed actions.
pub fn dual(m: &FLModule) -> FLModule {
    let act = m.acts().iter().map(|a| a.transpose()).collect();
    FLModule::new_unchecked(m.field().clone(), m.d(), act)
}

pub fn dual_map(f: &ModuleMap) -> ModuleMap {
    ModuleMap::new_unchecked(dual(&f.target), dual(&f.source), f.mat.transpose())
}

/// Certifies `ann(v) = I`: every generator kills `v` and `dim A v = dim A/I`.
pub fn ann_check(m: &FLModule, v: &[Elem], ideal: &MonIdeal) -> Result<bool> {
    if !ideal.gens().iter().all(|(_, e)| is_zero(&m.apply_monomial(e, v))) {
        return Ok(false);
    }
    let colength = ideal.standard_monomials()?.len();
    Ok(closure(m, &[v.to_vec()]).dim() == colength)
}

/// A deterministic pseudo-random module of dimension `dim`: a random
/// `A`-stable quotient of a random cyclic monomial module (or a direct sum of
/// two), which keeps commutation and nilpotency by construction.
pub fn random_module(field: &Fq, d: usize, dim: usize, seed: u64) -> FLModule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if dim == 0 {
        return FLModule::zero(field.clone(), d);
    }
    let split = if dim >= 2 && rng.gen_bool(0.4) { rng.gen_range(1..dim) } else { dim };
    let mut parts = Vec::new();
    for target in [split, dim - split] {
        if target > 0 {
            parts.push(random_indecomposable_ish(field, d, target, &mut rng));
        }
    }
    let base = FLModule::direct_sum(&parts);
    // random change of basis so actions are not monomial
    let k = field;
    let n = base.dim();
    let (g, ginv) = random_invertible(k, n, &mut rng);
    let act = base.acts().iter().map(|a| g.mul(k, &a.mul(k, &ginv))).collect();
    FLModule::new_unchecked(k.clone(), d, act)
}

fn random_indecomposable_ish(field: &Fq, d: usize, dim: usize, rng: &mut ChaCha8Rng) -> FLModule {
    let k = field;
    // staircase large enough to hold dim, then quotient down by random elements
    let bound = (dim as u32).max(1);
    let mut exps = vec![bound; d];
    for e in exps.iter_mut() {
        *e = rng.gen_range(1..=bound);
    }
    let mut ideal_exps: Vec<Vec<u32>> = (0..d)
        .map(|i| {
            let mut e = vec![0; d];
            e[i] = exps[i];
            e
        })
        .collect();
    // a random mixed generator cuts the box
    if d >= 2 && rng.gen_bool(0.5) {
        ideal_exps.push((0..d).map(|i| rng.gen_range(0..=exps[i].min(2))).collect());
    }
    let ideal = MonIdeal::monomial(d, &ideal_exps);
    let cyc = cyclic_module(k, &ideal).expect("finite colength by construction");
    let mut m = cyc.module;
    if m.dim() < dim {
        // enlarge by a direct sum with a smaller random piece
        let rest = random_indecomposable_ish(field, d, dim - m.dim(), rng);
        return FLModule::direct_sum(&[m, rest]);
    }
    while m.dim() > dim {
        // kill the submodule generated by a random socle vector combination
        let soc = m.socle();
        let q = k.order() as u8;
        let mut v = vec![0; m.dim()];
        for j in 0..soc.cols() {
            let c = rng.gen_range(0..q);
            axpy(k, &mut v, &soc.col(j), c);
        }
        if is_zero(&v) {
            v = soc.col(0);
        }
        let ech = closure(&m, &[v]);
        m = m.quotient(&ech).module;
    }
    m
}

fn random_invertible(k: &Fq, n: usize, rng: &mut ChaCha8Rng) -> (Mat, Mat) {
    let q = k.order() as u8;
    loop {
        let g = Mat::from_fn(n, n, |_, _| rng.gen_range(0..q));
        let aug = Mat::hstack(&[&g, &Mat::identity(n)]);
        let ech = RowEchelon::from_rows_of(k, &aug);
        if ech.dim() == n && ech.pivots().iter().all(|&p| p < n) {
            let bm = ech.basis_matrix();
            let inv = bm.submatrix(0..n, n..2 * n);
            return (g, inv);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(p: u32, f: u32) -> Fq {
        Fq::new(p, f).unwrap()
    }

    #[test]
    fn cyclic_examples() {
        let f = k(3, 1);
        let m = cyclic_module(&f, &MonIdeal::powers(&[1, 1])).unwrap();
        assert_eq!(m.module.dim(), 1);
        let m = cyclic_module(&f, &MonIdeal::powers(&[3, 2])).unwrap();
        assert_eq!(m.module.dim(), 6);
        m.module.validate().unwrap();
        let a = cyclic_module(&f, &MonIdeal::new(2, vec![(1, vec![3, 0]), (2, vec![0, 1])])).unwrap();
        let b = cyclic_module(&f, &MonIdeal::powers(&[3, 1])).unwrap();
        assert_eq!(a.module.dim(), 3);
        assert_eq!(a.module.acts(), b.module.acts());
        assert!(cyclic_module(&f, &MonIdeal::monomial(2, &[vec![2, 0]])).is_err());
    }

    #[test]
    fn hom_examples() {
        let f = k(2, 1);
        let res = FLModule::residue(f.clone(), 2);
        assert_eq!(hom_basis(&res, &res).len(), 1);
        let m = cyclic_module(&f, &MonIdeal::powers(&[2, 1])).unwrap().module;
        assert_eq!(hom_basis(&m, &res).len(), 1);
        let m = cyclic_module(&f, &MonIdeal::powers(&[2, 2])).unwrap().module;
        assert_eq!(hom_basis(&m, &m).len(), 4);
        let via_cyclic = hom_from_cyclic(&f, &MonIdeal::powers(&[2, 2]), &m).unwrap();
        assert_eq!(via_cyclic.len(), 4);
        assert!(via_cyclic.iter().all(|h| h.is_linear()));
    }

    #[test]
    fn factor_examples() {
        let f = k(3, 1);
        let m = cyclic_module(&f, &MonIdeal::powers(&[2, 1])).unwrap().module;
        let x = ModuleMap::new(m.clone(), m.clone(), m.act(0).clone()).unwrap();
        let fac = map_factor(&x);
        assert_eq!(fac.kernel.source().dim(), 1);
        assert_eq!(fac.image.source().dim(), 1);
        assert_eq!(fac.cokernel.target().dim(), 1);
        let id = map_factor(&ModuleMap::identity(&m));
        assert_eq!(id.kernel.source().dim(), 0);
        assert_eq!(id.cokernel.target().dim(), 0);
        let z = map_factor(&ModuleMap::zero(&m, &m));
        assert_eq!(z.kernel.source().dim(), 2);
        assert_eq!(z.cokernel.target().dim(), 2);
        for part in [&z.kernel, &z.image, &z.coimage, &z.cokernel] {
            assert!(part.is_linear());
        }
    }

    #[test]
    fn submodule_examples() {
        let f = k(2, 1);
        let m = cyclic_module(&f, &MonIdeal::powers(&[2, 1])).unwrap().module;
        assert_eq!(submodule_generated(&m, &[vec![0, 0]]).source().dim(), 0);
        assert_eq!(submodule_generated(&m, &[vec![0, 1]]).source().dim(), 1);
        let m = cyclic_module(&f, &MonIdeal::powers(&[2, 2])).unwrap();
        assert_eq!(submodule_generated(&m.module, std::slice::from_ref(&m.generator)).source().dim(), 4);
    }

    #[test]
    fn ann_examples() {
        let f = k(5, 1);
        let c = cyclic_module(&f, &MonIdeal::powers(&[1, 1])).unwrap();
        assert!(ann_check(&c.module, &c.generator, &MonIdeal::powers(&[1, 1])).unwrap());
        let c = cyclic_module(&f, &MonIdeal::powers(&[3, 2])).unwrap();
        assert!(ann_check(&c.module, &c.generator, &MonIdeal::powers(&[3, 2])).unwrap());
        assert!(!ann_check(&c.module, &c.generator, &MonIdeal::powers(&[3, 3])).unwrap());
    }

    #[test]
    fn random_modules_are_valid_and_deterministic() {
        let f = k(3, 1);
        let mut dims = std::collections::BTreeSet::new();
        for seed in 0..40 {
            let dim = 1 + (seed as usize % 12);
            let m = random_module(&f, 2, dim, seed);
            m.validate().unwrap();
            assert_eq!(m.dim(), dim);
            dims.insert(m.dim());
            let again = random_module(&f, 2, dim, seed);
            assert_eq!(m.acts(), again.acts());
        }
        assert!(dims.len() >= 10);
    }

    #[test]
    fn json_round_trip() {
        let f = k(3, 2);
        let m = random_module(&f, 2, 5, 7);
        let j = m.to_json();
        let s = serde_json::to_string(&j).unwrap();
        let back = FLModule::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back.acts(), m.acts());
    }

    #[test]
    fn dual_is_involutive() {
        let f = k(2, 2);
        let m = random_module(&f, 2, 6, 3);
        let dd = dual(&dual(&m));
        assert_eq!(dd.acts(), m.acts());
        assert_eq!(dual(&m).dim(), m.dim());
        dual(&m).validate().unwrap();
    }
}
