//! Dense matrices over `Fq` and Gaussian elimination.
//!
//! Matrices are row-major `u8` buffers. Elimination skips zero entries, which
//! keeps the sparse operator matrices coming from monomial and coset bases cheap.

use crate::field::{Elem, Fq};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

/// `dst += c * src`, entrywise.
#[inline]
pub fn axpy(k: &Fq, dst: &mut [Elem], src: &[Elem], c: Elem) {
    if c == 0 {
        return;
    }
    let mulc = k.mul_row(c);
    if k.order() == 2 {
        for (d, &s) in dst.iter_mut().zip(src) {
            *d ^= s;
        }
        return;
    }
    for (d, &s) in dst.iter_mut().zip(src) {
        if s != 0 {
            *d = k.add(*d, mulc[s as usize]);
        }
    }
}

#[inline]
pub fn scale(k: &Fq, v: &mut [Elem], c: Elem) {
    let mulc = k.mul_row(c);
    for x in v.iter_mut() {
        *x = mulc[*x as usize];
    }
}

pub fn is_zero(v: &[Elem]) -> bool {
    v.iter().all(|&x| x == 0)
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Elem>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors of length `rows`.
    pub fn from_cols(rows: usize, cols: &[Vec<Elem>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, &x) in c.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Elem) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Elem) {
        self.data[i * self.cols + j] = x;
    }
    #[inline]
    pub fn add_at(&mut self, k: &Fq, i: usize, j: usize, x: Elem) {
        let idx = i * self.cols + j;
        self.data[idx] = k.add(self.data[idx], x);
    }
    #[inline]
    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Elem] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
    pub fn col(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        is_zero(&self.data)
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn mul(&self, k: &Fq, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Mat::zeros(self.rows, other.cols);
        let oc = other.cols;
        for i in 0..self.rows {
            let (dst, _) = out.data[i * oc..].split_at_mut(oc);
            for l in 0..self.cols {
                let a = self.data[i * self.cols + l];
                if a != 0 {
                    axpy(k, dst, &other.data[l * oc..(l + 1) * oc], a);
                }
            }
        }
        out
    }

    pub fn apply(&self, k: &Fq, v: &[Elem]) -> Vec<Elem> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        let mut out = vec![0; self.rows];
        for (j, &x) in v.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let mx = k.mul_row(x);
            for (i, o) in out.iter_mut().enumerate() {
                let a = self.data[i * self.cols + j];
                if a != 0 {
                    *o = k.add(*o, mx[a as usize]);
                }
            }
        }
        out
    }

    pub fn add(&self, k: &Fq, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        axpy(k, &mut out.data, &other.data, 1);
        out
    }

    pub fn sub(&self, k: &Fq, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        axpy(k, &mut out.data, &other.data, k.neg(1));
        out
    }

    pub fn scaled(&self, k: &Fq, c: Elem) -> Mat {
        let mut out = self.clone();
        scale(k, &mut out.data, c);
        out
    }

    pub fn pow(&self, k: &Fq, e: usize) -> Mat {
        let mut acc = Mat::identity(self.rows);
        for _ in 0..e {
            acc = self.mul(k, &acc);
        }
        acc
    }

    pub fn hstack(blocks: &[&Mat]) -> Mat {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Mat::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows);
            for i in 0..rows {
                out.data[i * cols + off..i * cols + off + b.cols].copy_from_slice(b.row(i));
            }
            off += b.cols;
        }
        out
    }

    pub fn vstack(blocks: &[&Mat]) -> Mat {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            assert_eq!(b.cols, cols);
            data.extend_from_slice(&b.data);
            rows += b.rows;
        }
        Mat { rows, cols, data }
    }

    /// Copy `block` into position `(r0, c0)`.
    pub fn put(&mut self, r0: usize, c0: usize, block: &Mat) {
        for i in 0..block.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(i));
        }
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Mat {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self.get(rows.start + i, cols.start + j))
    }

    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    pub fn rank(&self, k: &Fq) -> usize {
        if self.rows > self.cols {
            return self.transpose().rank(k);
        }
        let mut m = self.clone();
        forward_eliminate(k, &mut m).len()
    }

    /// Basis of the right kernel `{x : self * x = 0}` as the columns of the result.
    pub fn kernel(&self, k: &Fq) -> Mat {
        let ech = RowEchelon::from_rows_of(k, self);
        ech.kernel_basis(k)
    }

    /// Basis of the column space, as the columns of the result (echelon order).
    pub fn column_space(&self, k: &Fq) -> Mat {
        let ech = RowEchelon::from_rows_of(k, &self.transpose());
        ech.basis_matrix().transpose()
    }

    /// Some `x` with `self * x = b`.
    pub fn solve(&self, k: &Fq, b: &[Elem]) -> Option<Vec<Elem>> {
        let aug = Mat::hstack(&[self, &Mat::from_cols(self.rows, &[b.to_vec()])]);
        let ech = RowEchelon::from_rows_of(k, &aug);
        let n = self.cols;
        let mut x = vec![0; n];
        for (r, &pc) in ech.pivots.iter().enumerate() {
            if pc == n {
                return None;
            }
            x[pc] = ech.rows[r][n];
        }
        Some(x)
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self, k: &Fq) -> Option<Mat> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut aug = Mat::hstack(&[self, &Mat::identity(n)]);
        let pivots = forward_eliminate(k, &mut aug);
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let w = 2 * n;
        for r in (0..n).rev() {
            let (head, tail) = aug.data.split_at_mut(r * w);
            let pivot_row = &tail[..w];
            for i in 0..r {
                let f = head[i * w + r];
                if f != 0 {
                    axpy(k, &mut head[i * w..(i + 1) * w], pivot_row, k.neg(f));
                }
            }
        }
        Some(aug.submatrix(0..n, n..w))
    }

    pub fn is_injective(&self, k: &Fq) -> bool {
        self.rank(k) == self.cols
    }
    pub fn is_surjective(&self, k: &Fq) -> bool {
        self.rank(k) == self.rows
    }
}

/// Row-reduce in place (not fully reduced); returns pivot columns.
fn forward_eliminate(k: &Fq, m: &mut Mat) -> Vec<usize> {
    let (rows, cols) = (m.rows, m.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| m.data[i * cols + c] != 0) else { continue };
        if piv != r {
            for j in c..cols {
                m.data.swap(piv * cols + j, r * cols + j);
            }
        }
        let inv = k.inv(m.data[r * cols + c]);
        {
            let row = &mut m.data[r * cols + c..(r + 1) * cols];
            scale(k, row, inv);
        }
        let (head, tail) = m.data.split_at_mut((r + 1) * cols);
        let pivot_row = &head[r * cols + c..];
        for i in 0..rows - r - 1 {
            let f = tail[i * cols + c];
            if f != 0 {
                axpy(k, &mut tail[i * cols + c..(i + 1) * cols], pivot_row, k.neg(f));
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// A subspace of `k^n` kept as a fully reduced row echelon basis.
#[derive(Clone, Debug)]
pub struct RowEchelon {
    n: usize,
    rows: Vec<Vec<Elem>>,
    pivots: Vec<usize>,
}

impl RowEchelon {
    pub fn new(n: usize) -> Self {
        RowEchelon { n, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn from_rows_of(k: &Fq, m: &Mat) -> Self {
        let mut mm = m.clone();
        let pivots = forward_eliminate(k, &mut mm);
        let mut rows: Vec<Vec<Elem>> = (0..pivots.len()).map(|i| mm.row(i).to_vec()).collect();
        // back substitution
        for r in (0..pivots.len()).rev() {
            let pc = pivots[r];
            let (above, below) = rows.split_at_mut(r);
            let pr = &below[0];
            for row in above.iter_mut() {
                let f = row[pc];
                if f != 0 {
                    axpy(k, &mut row[pc..], &pr[pc..], k.neg(f));
                }
            }
        }
        RowEchelon { n: m.cols, rows, pivots }
    }

    pub fn from_vectors(k: &Fq, n: usize, vs: &[Vec<Elem>]) -> Self {
        if vs.is_empty() {
            return Self::new(n);
        }
        let data: Vec<Elem> = vs.iter().flat_map(|v| v.iter().copied()).collect();
        Self::from_rows_of(k, &Mat::from_rows(vs.len(), n, data))
    }

    pub fn ambient(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        self.rows.len()
    }
    pub fn basis(&self) -> &[Vec<Elem>] {
        &self.rows
    }
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis_matrix(&self) -> Mat {
        let data = self.rows.iter().flat_map(|v| v.iter().copied()).collect();
        Mat::from_rows(self.rows.len(), self.n, data)
    }

    /// Reduce `v` modulo the subspace; returns the remainder and the coefficients
    /// `c` with `v = remainder + sum c_i basis_i`.
    pub fn reduce(&self, k: &Fq, v: &[Elem]) -> (Vec<Elem>, Vec<Elem>) {
        let mut rem = v.to_vec();
        let mut coeffs = vec![0; self.rows.len()];
        for (r, &pc) in self.pivots.iter().enumerate() {
            let f = rem[pc];
            if f != 0 {
                coeffs[r] = f;
                axpy(k, &mut rem[pc..], &self.rows[r][pc..], k.neg(f));
            }
        }
        (rem, coeffs)
    }

    pub fn contains(&self, k: &Fq, v: &[Elem]) -> bool {
        is_zero(&self.reduce(k, v).0)
    }

    /// Add a vector; returns true if the dimension grew.
    pub fn insert(&mut self, k: &Fq, v: &[Elem]) -> bool {
        let (mut rem, _) = self.reduce(k, v);
        let Some(pc) = rem.iter().position(|&x| x != 0) else { return false };
        let inv = k.inv(rem[pc]);
        scale(k, &mut rem, inv);
        for row in self.rows.iter_mut() {
            let f = row[pc];
            if f != 0 {
                axpy(k, row, &rem, k.neg(f));
            }
        }
        let pos = self.pivots.partition_point(|&p| p < pc);
        self.pivots.insert(pos, pc);
        self.rows.insert(pos, rem);
        true
    }

    /// Basis of `{x : row_i . x = 0 for all i}` as columns.
    pub fn kernel_basis(&self, k: &Fq) -> Mat {
        let n = self.n;
        let mut is_pivot = vec![false; n];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let mut out = Mat::zeros(n, free.len());
        for (j, &fc) in free.iter().enumerate() {
            out.set(fc, j, 1);
            for (r, &pc) in self.pivots.iter().enumerate() {
                let a = self.rows[r][fc];
                if a != 0 {
                    out.set(pc, j, k.neg(a));
                }
            }
        }
        out
    }

    pub fn intersect(&self, k: &Fq, other: &RowEchelon) -> RowEchelon {
        // x = sum a_i u_i = sum b_j w_j: kernel of [U^T | -W^T]
        let n = self.n;
        if self.dim() == 0 || other.dim() == 0 {
            return RowEchelon::new(n);
        }
        let u = self.basis_matrix().transpose();
        let w = other.basis_matrix().transpose().scaled(k, k.neg(1));
        let ker = Mat::hstack(&[&u, &w]).kernel(k);
        let vs: Vec<Vec<Elem>> = (0..ker.cols())
            .map(|j| {
                let a: Vec<Elem> = (0..self.dim()).map(|i| ker.get(i, j)).collect();
                u.apply(k, &a)
            })
            .collect();
        RowEchelon::from_vectors(k, n, &vs)
    }

    pub fn sum(&self, k: &Fq, other: &RowEchelon) -> RowEchelon {
        let mut out = self.clone();
        for v in &other.rows {
            out.insert(k, v);
        }
        out
    }
}

/// Coordinates in a quotient `U / B` for `B` a subspace of `U`, with a chosen
/// complement basis `H` of representatives. `coords(v)` returns the
/// coefficients of `v` on `H` modulo `B`, or `None` if `v` is not in `U`.
#[derive(Clone, Debug)]
pub struct QuotientBasis {
    ech: RowEchelon,
    /// Number of boundary directions at the front of the combined basis.
    nb: usize,
    /// For each row of the combined echelon, its expression in the original
    /// `[B | H]` generators, so that coordinates on `H` can be read off.
    transform: Vec<Vec<Elem>>,
    reps: Vec<Vec<Elem>>,
}

impl QuotientBasis {
    /// `sub` spans `B`; `full` spans `U` (must contain `B`). Representatives are
    /// the first vectors of `full` (in order) that are independent modulo `B`.
    pub fn new(k: &Fq, n: usize, sub: &[Vec<Elem>], full: &[Vec<Elem>]) -> Self {
        let sub_e = RowEchelon::from_vectors(k, n, sub);
        let mut acc = sub_e.clone();
        let mut reps = Vec::new();
        for v in full {
            if acc.insert(k, v) {
                reps.push(v.clone());
            }
        }
        let gens: Vec<Vec<Elem>> = sub_e.basis().iter().cloned().chain(reps.iter().cloned()).collect();
        Self::from_generators(k, n, gens, sub_e.dim(), reps)
    }

    /// Explicit representatives (assumed independent modulo `sub`).
    pub fn with_reps(k: &Fq, n: usize, sub: &[Vec<Elem>], reps: Vec<Vec<Elem>>) -> Self {
        let sub_e = RowEchelon::from_vectors(k, n, sub);
        let gens: Vec<Vec<Elem>> = sub_e.basis().iter().cloned().chain(reps.iter().cloned()).collect();
        Self::from_generators(k, n, gens, sub_e.dim(), reps)
    }

    fn from_generators(k: &Fq, n: usize, gens: Vec<Vec<Elem>>, nb: usize, reps: Vec<Vec<Elem>>) -> Self {
        // Row-reduce [G | I] to track how echelon rows combine the generators.
        let g = gens.len();
        let mut aug = Mat::zeros(g, n + g);
        for (i, v) in gens.iter().enumerate() {
            aug.row_mut(i)[..n].copy_from_slice(v);
            aug.set(i, n + i, 1);
        }
        let full = RowEchelon::from_rows_of(k, &aug);
        let mut rows = Vec::new();
        let mut pivots = Vec::new();
        let mut transform = Vec::new();
        for (r, &pc) in full.pivots.iter().enumerate() {
            if pc < n {
                rows.push(full.rows[r][..n].to_vec());
                pivots.push(pc);
                transform.push(full.rows[r][n..].to_vec());
            }
        }
        assert_eq!(rows.len(), g, "quotient generators are dependent");
        QuotientBasis { ech: RowEchelon { n, rows, pivots }, nb, transform, reps }
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }
    pub fn reps(&self) -> &[Vec<Elem>] {
        &self.reps
    }

    pub fn coords(&self, k: &Fq, v: &[Elem]) -> Option<Vec<Elem>> {
        let (rem, c) = self.ech.reduce(k, v);
        if !is_zero(&rem) {
            return None;
        }
        let g = self.transform.len();
        let mut gen_coeffs = vec![0; g];
        for (r, &cr) in c.iter().enumerate() {
            if cr != 0 {
                axpy(k, &mut gen_coeffs, &self.transform[r], cr);
            }
        }
        Some(gen_coeffs[self.nb..].to_vec())
    }
}
