//! Serre weights as `A`-modules, the Hecke kernel, the operators `T₊`/`T₋`
//! on the coset model of `R_m(σ)`, the isomorphisms `(φ^*)^m σ ≅ R_m` and the
//! two skew presentations built from them.
//!
//! `R_m` has basis `[u_c α^m, e_i]` with `c` running over the canonical
//! representatives of `O_F/ϖ^m` (index `Σ d_j q^j` of the digit expansion) and
//! `e_i` over the basis of `σ`; the basis index is `c * dim σ + i`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Elem, Fq};
use crate::flmod::{cyclic_module, hom_from_cyclic, FLModule, ModuleMap, MonIdeal};
use crate::koszul::{tor, tor_map_between};
use crate::linalg::{Mat, RowEchelon};
use crate::localring::{Case, LocalElem, LocalRing};
use crate::phi::{pullback, pullback_extend, twist_ideal, TwistSpec};
use crate::skewmod::SkewPresentation;

/// A 2×2 matrix `(a b; c d)` over the residue field, stored as `[a, b, c, d]`.
pub type Mat2 = [Elem; 4];

/// `Sym^r` of `g`: `x ↦ a x + c y`, `y ↦ b x + d y` on the basis `x^{r-i} y^i`.
pub fn sym_power(k: &Fq, r: u32, g: Mat2) -> Mat {
    let [a, b, c, d] = g;
    let n = r as usize + 1;
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        // coefficients in y of (a + c y)^{r-i} (b + d y)^i
        let mut poly = vec![1u8];
        let mut times = |lin: (Elem, Elem)| {
            let mut next = vec![0u8; poly.len() + 1];
            for (j, &x) in poly.iter().enumerate() {
                next[j] = k.add(next[j], k.mul(x, lin.0));
                next[j + 1] = k.add(next[j + 1], k.mul(x, lin.1));
            }
            poly = next;
        };
        for _ in 0..n - 1 - i {
            times((a, c));
        }
        for _ in 0..i {
            times((b, d));
        }
        for (j, &x) in poly.iter().enumerate() {
            m.set(j, i, x);
        }
    }
    m
}

fn kron(k: &Fq, a: &Mat, b: &Mat) -> Mat {
    let (br, bc) = (b.rows(), b.cols());
    Mat::from_fn(a.rows() * br, a.cols() * bc, |i, j| k.mul(a.get(i / br, j / bc), b.get(i % br, j % bc)))
}

/// An irreducible representation `Sym^{r₀} ⊗ (Sym^{r₁})^{Fr}` (unramified) or
/// `Sym^r` (ramified) of `GL₂(k_F)`.
#[derive(Clone, Debug)]
pub struct SerreWeight {
    ring: LocalRing,
    params: Vec<u32>,
}

impl SerreWeight {
    pub fn new(ring: LocalRing, params: Vec<u32>) -> Result<Self> {
        let want = match ring.case() {
            Case::Unramified => 2,
            Case::Ramified => 1,
        };
        if params.len() != want {
            return Err(Error::Construction(format!("{} weight needs {want} parameters", ring.case().name())));
        }
        if params.iter().any(|&r| r >= ring.p()) {
            return Err(Error::Construction(format!("weight parameters must lie in 0..{}", ring.p())));
        }
        Ok(SerreWeight { ring, params })
    }

    pub fn unram(p: u32, r0: u32, r1: u32) -> Result<Self> {
        SerreWeight::new(LocalRing::new(Case::Unramified, p, 1)?, vec![r0, r1])
    }

    pub fn ram(p: u32, u: u32, r: u32) -> Result<Self> {
        SerreWeight::new(LocalRing::new(Case::Ramified, p, u)?, vec![r])
    }

    /// Every weight parameter tuple for the given prime and case.
    pub fn grid(p: u32, case: Case) -> Vec<Vec<u32>> {
        match case {
            Case::Unramified => (0..p).flat_map(|a| (0..p).map(move |b| vec![a, b])).collect(),
            Case::Ramified => (0..p).map(|r| vec![r]).collect(),
        }
    }

    pub fn ring(&self) -> &LocalRing {
        &self.ring
    }
    pub fn field(&self) -> &Fq {
        self.ring.residue_field()
    }
    pub fn case(&self) -> Case {
        self.ring.case()
    }
    pub fn p(&self) -> u32 {
        self.ring.p()
    }
    pub fn params(&self) -> &[u32] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.iter().map(|&r| r as usize + 1).product()
    }

    /// The annihilator of `w(v₀)`: `(X^{r₀+1}, Y^{r₁+1})` or `(X^{r+1}, Y)`.
    pub fn annihilator(&self) -> MonIdeal {
        match self.case() {
            Case::Unramified => MonIdeal::powers(&[self.params[0] + 1, self.params[1] + 1]),
            Case::Ramified => MonIdeal::powers(&[self.params[0] + 1, 1]),
        }
    }

    pub fn label(&self) -> String {
        let inner: Vec<String> = self.params.iter().map(|r| r.to_string()).collect();
        format!("{}({})", self.case().name(), inner.join(","))
    }

    /// `σ(g)`.
    pub fn matrix(&self, g: Mat2) -> Mat {
        let k = self.field();
        match self.case() {
            Case::Unramified => {
                let fr = g.map(|x| k.frobenius(x));
                kron(k, &sym_power(k, self.params[0], g), &sym_power(k, self.params[1], fr))
            }
            Case::Ramified => sym_power(k, self.params[0], g),
        }
    }

    /// The twist `φ` induced by `α = diag(ϖ, 1)`.
    pub fn twist(&self) -> TwistSpec {
        let p = self.p();
        match self.case() {
            Case::Unramified => TwistSpec::unram(p),
            Case::Ramified => TwistSpec::ram(p, self.field().from_int(self.ring.unit())),
        }
    }
}

fn upper(b: Elem) -> Mat2 {
    [1, b, 0, 1]
}
fn lower(c: Elem) -> Mat2 {
    [1, 0, c, 1]
}
const W: Mat2 = [0, 1, 1, 0];

/// Solve `P σ(u_b) = P`, `σ(ℓ_c) P = P`, `σ(h) P = P σ(h)` and normalize by
/// `P w(v₀) = w(v₀)`.
pub fn hecke_kernel(wt: &SerreWeight) -> Result<Mat> {
    let k = wt.field();
    let n = wt.dim();
    let nn = n * n;
    let var = |i: usize, j: usize| i * n + j;
    let mut eqs: Vec<Vec<Elem>> = Vec::new();
    let one = |v: &mut Vec<Elem>, idx: usize, c: Elem| v[idx] = k.add(v[idx], c);
    let gamma = k.primitive_element();
    for b in k.elements() {
        let s = wt.matrix(upper(b));
        let l = wt.matrix(lower(b));
        for i in 0..n {
            for j in 0..n {
                // (P s - P)_{ij}
                let mut e = vec![0; nn];
                for m in 0..n {
                    one(&mut e, var(i, m), s.get(m, j));
                }
                one(&mut e, var(i, j), k.neg(1));
                eqs.push(e);
                // (l P - P)_{ij}
                let mut e = vec![0; nn];
                for m in 0..n {
                    one(&mut e, var(m, j), l.get(i, m));
                }
                one(&mut e, var(i, j), k.neg(1));
                eqs.push(e);
            }
        }
    }
    for h in [[gamma, 0, 0, 1], [1, 0, 0, gamma]] {
        let s = wt.matrix(h);
        for i in 0..n {
            for j in 0..n {
                let mut e = vec![0; nn];
                for m in 0..n {
                    one(&mut e, var(m, j), s.get(i, m));
                    one(&mut e, var(i, m), k.neg(s.get(m, j)));
                }
                eqs.push(e);
            }
        }
    }
    let system = RowEchelon::from_vectors(k, nn, &eqs);
    let sols = system.kernel_basis(k);
    if sols.cols() != 1 {
        return Err(Error::Construction(format!(
            "Hecke kernel space for {} has dimension {}",
            wt.label(),
            sols.cols()
        )));
    }
    let p = Mat::from_rows(n, n, sols.col(0));
    let last = n - 1;
    let img = p.col(last);
    if img.iter().take(last).any(|&x| x != 0) || img[last] == 0 {
        return Err(Error::Construction("Hecke kernel does not fix the line of w(v0)".into()));
    }
    Ok(p.scaled(k, k.inv(img[last])))
}

/// The coefficients `c_λ` with `X = Σ c_λ u_{[λ]}` (and the same shape for `Y`).
fn group_coefficients(k: &Fq, e: u64) -> Vec<Elem> {
    k.elements().map(|l| k.pow_neg(l, e)).collect()
}

/// `σ` with its `A`-module structure, the Hecke kernel and the coset model.
#[derive(Clone, Debug)]
pub struct HeckeData {
    weight: SerreWeight,
    twist: TwistSpec,
    sigma: FLModule,
    v0: Vec<Elem>,
    wv0: Vec<Elem>,
    kernel: Mat,
    kernel_dual: Mat,
    unipotent: Vec<Mat>,
    x_coef: Vec<Elem>,
    y_coef: Vec<Elem>,
}

impl HeckeData {
    pub fn new(weight: SerreWeight) -> Result<Self> {
        let k = weight.field().clone();
        let n = weight.dim();
        let unipotent: Vec<Mat> = k.elements().map(|b| weight.matrix(upper(b))).collect();

        let stacked: Vec<Mat> = unipotent.iter().map(|s| s.sub(&k, &Mat::identity(n))).collect();
        let refs: Vec<&Mat> = stacked.iter().collect();
        let diffs = Mat::vstack(&refs);
        let invariants = diffs.kernel(&k);
        let coinv = n - Mat::hstack(&refs).rank(&k);
        if invariants.cols() != 1 || coinv != 1 {
            return Err(Error::Construction(format!("{} does not have one-dimensional U-invariants", weight.label())));
        }

        let x_coef = group_coefficients(&k, 1);
        let y_coef = match weight.case() {
            Case::Unramified => group_coefficients(&k, weight.p() as u64),
            Case::Ramified => group_coefficients(&k, 1),
        };
        let mut x = Mat::zeros(n, n);
        let mut y = Mat::zeros(n, n);
        for (l, s) in unipotent.iter().enumerate() {
            x = x.add(&k, &s.scaled(&k, x_coef[l]));
            if weight.case() == Case::Unramified {
                y = y.add(&k, &s.scaled(&k, y_coef[l]));
            } else {
                // u_{ϖ[λ]} acts trivially through the residue field
                y = y.add(&k, &Mat::identity(n).scaled(&k, y_coef[l]));
            }
        }
        let sigma = FLModule::new(k.clone(), 2, vec![x, y])?;

        let mut v0 = vec![0; n];
        v0[0] = 1;
        let wv0 = weight.matrix(W).apply(&k, &v0);
        let kernel = hecke_kernel(&weight)?;
        let sw = weight.matrix(W);
        let kernel_dual = sw.mul(&k, &kernel).mul(&k, &sw);
        let twist = weight.twist();
        Ok(HeckeData { weight, twist, sigma, v0, wv0, kernel, kernel_dual, unipotent, x_coef, y_coef })
    }

    pub fn weight(&self) -> &SerreWeight {
        &self.weight
    }
    pub fn field(&self) -> &Fq {
        self.weight.field()
    }
    pub fn twist(&self) -> &TwistSpec {
        &self.twist
    }
    /// `σ` as an `A`-module.
    pub fn sigma(&self) -> &FLModule {
        &self.sigma
    }
    /// The `U`-invariant vector `x^r`.
    pub fn v0(&self) -> &[Elem] {
        &self.v0
    }
    /// `w(v₀) = y^r`.
    pub fn wv0(&self) -> &[Elem] {
        &self.wv0
    }
    /// The Hecke kernel `P`.
    pub fn kernel(&self) -> &Mat {
        &self.kernel
    }
    /// `σ(w) P σ(w)`, the kernel on the `α^{-1}` side.
    pub fn kernel_dual(&self) -> &Mat {
        &self.kernel_dual
    }
    /// `σ(u_λ)`.
    pub fn unipotent(&self, lambda: Elem) -> &Mat {
        &self.unipotent[lambda as usize]
    }

    fn q(&self) -> usize {
        self.weight.ring.q()
    }

    pub fn rm_dim(&self, m: u32) -> usize {
        self.q().pow(m) * self.weight.dim()
    }

    fn coset_rep(&self, c: usize, m: u32) -> LocalElem {
        let ring = &self.weight.ring;
        ring.from_digits(&ring.index_digits(c, m))
    }

    fn add_translation(&self, out: &mut Mat, m: u32, z: LocalElem, coef: Elem) {
        if coef == 0 {
            return;
        }
        let k = self.field();
        let ring = &self.weight.ring;
        let n = self.weight.dim();
        for c in 0..self.q().pow(m) {
            let (c2, delta) = ring.digit_decompose(ring.add(z, self.coset_rep(c, m)), m);
            let s = &self.unipotent[delta as usize];
            for i in 0..n {
                for j in 0..n {
                    let x = s.get(i, j);
                    if x != 0 {
                        out.add_at(k, c2 * n + i, c * n + j, k.mul(coef, x));
                    }
                }
            }
        }
    }

    /// The action of `u_z` on `R_m`.
    pub fn translation(&self, m: u32, z: LocalElem) -> Mat {
        let dim = self.rm_dim(m);
        let mut out = Mat::zeros(dim, dim);
        self.add_translation(&mut out, m, z, 1);
        out
    }

    /// `R_m(σ)` with `X` and `Y` acting through the translations.
    pub fn rm_module(&self, m: u32) -> FLModule {
        let ring = &self.weight.ring;
        let dim = self.rm_dim(m);
        let mut x = Mat::zeros(dim, dim);
        let mut y = Mat::zeros(dim, dim);
        for l in self.field().elements() {
            let t = ring.teichmuller(l);
            self.add_translation(&mut x, m, t, self.x_coef[l as usize]);
            let ty = match self.weight.case() {
                Case::Unramified => t,
                Case::Ramified => ring.mul(ring.uniformizer(), t),
            };
            self.add_translation(&mut y, m, ty, self.y_coef[l as usize]);
        }
        FLModule::new_unchecked(self.field().clone(), 2, vec![x, y])
    }

    /// The block of `T₊` on one coset: `v ↦ (P' σ(u_{-λ}) v)_λ`, stacked by `λ`.
    pub fn tplus_block(&self) -> Mat {
        let k = self.field();
        let blocks: Vec<Mat> = k.elements().map(|l| self.kernel_dual.mul(k, self.unipotent(k.neg(l)))).collect();
        let refs: Vec<&Mat> = blocks.iter().collect();
        Mat::vstack(&refs)
    }

    /// `T₊` is block diagonal over the cosets of `R_m` with the same block,
    /// so its injectivity on every `R_m` reduces to the block.
    pub fn tplus_is_injective(&self) -> bool {
        self.tplus_block().is_injective(self.field())
    }

    /// `T₊ : R_m → R_{m+1}`, `[u_c α^m, v] ↦ Σ_λ [u_{c + ϖ^m [λ]} α^{m+1}, P' σ(u_{-λ}) v]`.
    pub fn tplus_matrix(&self, m: u32) -> Mat {
        let k = self.field();
        let n = self.weight.dim();
        let qm = self.q().pow(m);
        let mut out = Mat::zeros(self.rm_dim(m + 1), self.rm_dim(m));
        let blocks: Vec<(usize, Mat)> =
            k.elements().map(|l| (l as usize, self.kernel_dual.mul(k, self.unipotent(k.neg(l))))).collect();
        for c in 0..qm {
            for (l, b) in &blocks {
                out.put((c + l * qm) * n, c * n, b);
            }
        }
        out
    }

    /// `T₋ : R_m → R_{m-1}`, `[u_c α^m, v] ↦ [u_{c'} α^{m-1}, σ(u_δ) P v]` where
    /// `c = c' + ϖ^{m-1}[δ]`.
    pub fn tminus_matrix(&self, m: u32) -> Mat {
        assert!(m >= 1, "T- needs m >= 1");
        let k = self.field();
        let n = self.weight.dim();
        let top = self.q().pow(m - 1);
        let mut out = Mat::zeros(self.rm_dim(m - 1), self.rm_dim(m));
        for c in 0..self.q().pow(m) {
            let (low, delta) = (c % top, c / top);
            out.put(low * n, c * n, &self.unipotent[delta].mul(k, &self.kernel));
        }
        out
    }

    pub fn tplus(&self, m: u32) -> ModuleMap {
        ModuleMap::new_unchecked(self.rm_module(m), self.rm_module(m + 1), self.tplus_matrix(m))
    }

    pub fn tminus(&self, m: u32) -> ModuleMap {
        ModuleMap::new_unchecked(self.rm_module(m), self.rm_module(m - 1), self.tminus_matrix(m))
    }

    /// Left multiplication by `α`, `R_{m-1} → R_m`: `[u_c α^{m-1}, v] ↦ [u_{ϖc} α^m, v]`.
    pub fn alpha(&self, m: u32) -> Mat {
        assert!(m >= 1, "alpha maps R_(m-1) to R_m");
        let n = self.weight.dim();
        let q = self.q();
        let mut out = Mat::zeros(self.rm_dim(m), self.rm_dim(m - 1));
        for c in 0..q.pow(m - 1) {
            for i in 0..n {
                out.set(q * c * n + i, c * n + i, 1);
            }
        }
        out
    }

    /// `(φ^*)^m σ → R_m`, `a ⊗ v ↦ a [α^m, v]`, asserted bijective.
    pub fn rm_iso(&self, m: u32) -> Result<ModuleMap> {
        let k = self.field();
        let mut iso = ModuleMap::identity(&self.sigma);
        for j in 1..=m {
            let g = self.alpha(j).mul(k, iso.mat());
            iso = pullback_extend(&self.twist, iso.source(), &self.rm_module(j), &g)?;
            if !iso.is_bijective() {
                return Err(Error::NotBijective(format!("(phi^*)^{j} sigma -> R_{j} for {}", self.weight.label())));
            }
        }
        Ok(iso)
    }

    /// `(φ²)^* σ → R_2`, `a ⊗ v ↦ a [α², v]`.
    pub fn even_iso(&self) -> Result<ModuleMap> {
        let k = self.field();
        let square = self.twist.square(k);
        let g = self.alpha(2).mul(k, &self.alpha(1));
        let iso = pullback_extend(&square, &self.sigma, &self.rm_module(2), &g)?;
        if !iso.is_bijective() {
            return Err(Error::NotBijective(format!("(phi^2)^* sigma -> R_2 for {}", self.weight.label())));
        }
        Ok(iso)
    }

    fn transported(&self, iso_src: &ModuleMap, t: &Mat, iso_tgt: &ModuleMap) -> Result<ModuleMap> {
        let k = self.field();
        let inv = iso_tgt
            .mat()
            .inverse(k)
            .ok_or_else(|| Error::NotBijective("comparison map is singular".into()))?;
        let mat = inv.mul(k, &t.mul(k, iso_src.mat()));
        Ok(ModuleMap::new_unchecked(iso_src.source().clone(), iso_tgt.source().clone(), mat))
    }

    /// `T₋` on `R_1` transported to `φ^* σ → σ`.
    pub fn tminus_transported(&self) -> Result<ModuleMap> {
        let iso1 = self.rm_iso(1)?;
        self.transported(&iso1, &self.tminus_matrix(1), &ModuleMap::identity(&self.sigma))
    }

    /// `T₊` on `R_m` transported to `(φ^*)^m σ → (φ^*)^{m+1} σ`.
    pub fn tplus_transported(&self, m: u32) -> Result<ModuleMap> {
        let src = self.rm_iso(m)?;
        let tgt = self.rm_iso(m + 1)?;
        self.transported(&src, &self.tplus_matrix(m), &tgt)
    }

    /// `I_{≥0}(σ) / T(I_{≥1}(σ))`: twist `φ`, `W = σ`, `V = φ^* σ`,
    /// components `T₋` (shift 0) and `T₊` (shift 2).
    pub fn coker_presentation(&self) -> Result<SkewPresentation> {
        let r0 = self.tminus_transported()?;
        let r2 = self.tplus_transported(1)?;
        let v = r0.source().clone();
        SkewPresentation::new(self.twist.clone(), self.sigma.clone(), v, vec![(0, r0), (2, r2)], 1, true)
    }

    /// The even part `L(σ)`: twist `φ²`, `W = σ`, `V = φ^* σ`, components
    /// `T₋` (shift 0) and `T₊` (shift 1).
    pub fn even_presentation(&self) -> Result<SkewPresentation> {
        let k = self.field();
        let r0 = self.tminus_transported()?;
        let iso1 = self.rm_iso(1)?;
        let r1 = self.transported(&iso1, &self.tplus_matrix(1), &self.even_iso()?)?;
        let v = r0.source().clone();
        SkewPresentation::new(self.twist.square(k), self.sigma.clone(), v, vec![(0, r0), (1, r1)], 1, true)
    }
}

/// Whether `X` and `Y` reduce to a basis of `m/m²` in the group algebra of
/// `O_F/ϖ^L`, with `L` large enough for the images to be faithful.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParameterReport {
    pub level: u32,
    pub group_order: usize,
    pub in_max_ideal: bool,
    pub cotangent_dim: usize,
    pub independent: bool,
}

impl ParameterReport {
    pub fn pass(&self) -> bool {
        self.in_max_ideal && self.cotangent_dim == 2 && self.independent
    }
}

pub fn parameter_system_check(p: u32, case: Case, u: u32) -> Result<ParameterReport> {
    let ring = LocalRing::new(case, p, u)?;
    let k = ring.residue_field().clone();
    let level = match case {
        Case::Unramified => 2,
        Case::Ramified => 3,
    };
    let elems = ring.elements(level);
    let order = elems.len();
    let index = |z: LocalElem| ring.digits_index(&ring.digits(z, level));
    let one = k.neg(1);
    // (g - 1)(h - 1) = g h - g - h + 1, read as vectors in k[G]
    let mut square = RowEchelon::new(order);
    for &g in &elems {
        for &h in &elems {
            let mut v = vec![0; order];
            let mut bump = |i: usize, c: Elem| v[i] = k.add(v[i], c);
            bump(index(ring.add(g, h)), 1);
            bump(index(g), one);
            bump(index(h), one);
            bump(0, 1);
            square.insert(&k, &v);
        }
    }
    let element = |coef: &[Elem], scale: LocalElem| {
        let mut v = vec![0; order];
        for l in k.elements() {
            let i = index(ring.mul(scale, ring.teichmuller(l)));
            v[i] = k.add(v[i], coef[l as usize]);
        }
        v
    };
    let xc = group_coefficients(&k, 1);
    let x = element(&xc, ring.one());
    let y = match case {
        Case::Unramified => element(&group_coefficients(&k, p as u64), ring.one()),
        Case::Ramified => element(&xc, ring.uniformizer()),
    };
    let augmentation = |v: &[Elem]| v.iter().fold(0, |acc, &c| k.add(acc, c));
    let in_max_ideal = augmentation(&x) == 0 && augmentation(&y) == 0;
    let cotangent_dim = order - 1 - square.dim();
    let mut span = square.clone();
    let independent = span.insert(&k, &x) && span.insert(&k, &y);
    Ok(ParameterReport { level, group_order: order, in_max_ideal, cotangent_dim, independent })
}

/// Common kernel of `Tor₁(s₁)` and `Tor₁(s₂)` over all `s₁ : A/φI → A/I` and
/// injective `s₂ : A/φI → A/φ²I`, with the vanishing pattern of the maps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelReport {
    pub weight: String,
    pub hom1_dim: usize,
    pub hom2_dim: usize,
    pub injective_exists: bool,
    pub common_kernel_dim: usize,
    pub s1_vanish: bool,
    pub s2_vanish: bool,
    pub boundary: bool,
    pub refined_ok: bool,
}

impl KernelReport {
    pub fn pass(&self) -> bool {
        self.injective_exists && self.common_kernel_dim >= 1 && self.refined_ok
    }
}

pub fn kernel_intersection_check(wt: &SerreWeight) -> Result<KernelReport> {
    let k = wt.field();
    let twist = wt.twist();
    let ideal = wt.annihilator();
    let once = twist_ideal(k, &twist, &ideal);
    let twice = twist_ideal(k, &twist, &once);
    let base = cyclic_module(k, &ideal)?.module;
    let source = cyclic_module(k, &once)?.module;
    let far = cyclic_module(k, &twice)?.module;
    let h1 = hom_from_cyclic(k, &once, &base)?;
    let h2 = hom_from_cyclic(k, &once, &far)?;

    let anchor = h2.iter().find(|f| f.is_injective()).cloned();
    let spanning: Vec<ModuleMap> = match &anchor {
        Some(n0) => h2.iter().map(|b| if b.is_injective() { b.clone() } else { b.add(n0) }).collect(),
        None => Vec::new(),
    };

    let tor_src = tor(&source, 1);
    let tor_base = tor(&base, 1);
    let tor_far = tor(&far, 1);
    let m1: Vec<Mat> = h1.iter().map(|f| tor_map_between(&tor_src, &tor_base, f.mat())).collect();
    let m2: Vec<Mat> = spanning.iter().map(|f| tor_map_between(&tor_src, &tor_far, f.mat())).collect();
    let s1_vanish = m1.iter().all(|m| m.is_zero());
    let s2_vanish = m2.iter().all(|m| m.is_zero());
    let mut refs: Vec<&Mat> = m1.iter().chain(m2.iter()).collect();
    let zero = Mat::zeros(0, tor_src.dim());
    refs.push(&zero);
    let common_kernel_dim = Mat::vstack(&refs).kernel(k).cols();

    let p = wt.p();
    let r = wt.params();
    let boundary = match wt.case() {
        Case::Unramified => (r[0] == p - 1 && r[1] == 0) || (r[0] == 0 && r[1] == p - 1),
        Case::Ramified => r[0] == 0 || r[0] == p - 1,
    };
    let refined_ok = match wt.case() {
        Case::Unramified => s2_vanish != boundary && (boundary || s1_vanish),
        Case::Ramified => boundary || (s1_vanish && s2_vanish),
    };
    Ok(KernelReport {
        weight: wt.label(),
        hom1_dim: h1.len(),
        hom2_dim: h2.len(),
        injective_exists: anchor.is_some(),
        common_kernel_dim,
        s1_vanish,
        s2_vanish,
        boundary,
        refined_ok,
    })
}

/// `φ^* σ`, the relation module of both presentations.
pub fn relation_module(data: &HeckeData) -> FLModule {
    pullback(data.twist(), data.sigma())
}
