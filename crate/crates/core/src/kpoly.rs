//! Polynomials over `k` in one variable `t` and diagonalization of small
//! polynomial matrices by unimodular row and column operations.

use crate::field::{Elem, Fq};

/// Coefficients, constant term first, without trailing zeros.
pub type KPoly = Vec<Elem>;

pub fn trim(mut p: KPoly) -> KPoly {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

pub fn degree(p: &KPoly) -> Option<usize> {
    if p.is_empty() {
        None
    } else {
        Some(p.len() - 1)
    }
}

/// Order of vanishing at `t = 0`.
pub fn order_at_zero(p: &KPoly) -> usize {
    p.iter().take_while(|&&c| c == 0).count()
}

/// `a - c t^s b`.
fn sub_shifted(k: &Fq, a: &KPoly, b: &KPoly, c: Elem, s: usize) -> KPoly {
    let mut out = a.clone();
    if out.len() < b.len() + s {
        out.resize(b.len() + s, 0);
    }
    for (i, &x) in b.iter().enumerate() {
        out[i + s] = k.sub(out[i + s], k.mul(c, x));
    }
    trim(out)
}

/// Quotient and remainder of `a` by nonzero `b`.
pub fn divrem(k: &Fq, a: &KPoly, b: &KPoly) -> (KPoly, KPoly) {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = k.inv(b[db]);
    let mut r = a.clone();
    let mut q = vec![0; a.len().saturating_sub(db)];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = k.mul(r[dr], lead_inv);
        q[dr - db] = c;
        r = sub_shifted(k, &r, b, c, dr - db);
    }
    (trim(q), r)
}

fn mul(k: &Fq, a: &KPoly, b: &KPoly) -> KPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = k.add(out[i + j], k.mul(x, y));
        }
    }
    trim(out)
}

fn sub(k: &Fq, a: &KPoly, b: &KPoly) -> KPoly {
    let n = a.len().max(b.len());
    trim((0..n).map(|i| k.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0))).collect())
}

/// Nonzero diagonal entries of a diagonal form of `m` (rows of polynomials).
/// The cokernel of `m` is `k[t]^{rows - len} ⊕ ⨁ k[t]/(d)`.
pub fn diagonal_form(k: &Fq, mut m: Vec<Vec<KPoly>>) -> Vec<KPoly> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut diag = Vec::new();
    for s in 0..rows.min(cols) {
        // smallest-degree nonzero entry of the remaining block
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, row) in m.iter().enumerate().skip(s) {
            for (j, e) in row.iter().enumerate().skip(s) {
                if let Some(d) = degree(e) {
                    if best.is_none_or(|(bd, _, _)| d < bd) {
                        best = Some((d, i, j));
                    }
                }
            }
        }
        let Some((_, bi, bj)) = best else { break };
        m.swap(s, bi);
        for row in m.iter_mut() {
            row.swap(s, bj);
        }
        loop {
            let mut clean = true;
            for i in s + 1..rows {
                if m[i][s].is_empty() {
                    continue;
                }
                let (q, r) = divrem(k, &m[i][s], &m[s][s]);
                for j in s..cols {
                    let t = mul(k, &q, &m[s][j]);
                    m[i][j] = sub(k, &m[i][j], &t);
                }
                if !r.is_empty() {
                    m.swap(s, i);
                    clean = false;
                }
            }
            for j in s + 1..cols {
                if m[s][j].is_empty() {
                    continue;
                }
                let (q, r) = divrem(k, &m[s][j], &m[s][s]);
                for row in m.iter_mut().skip(s) {
                    let t = mul(k, &q, &row[s]);
                    row[j] = sub(k, &row[j], &t);
                }
                if !r.is_empty() {
                    for row in m.iter_mut() {
                        row.swap(s, j);
                    }
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        diag.push(m[s][s].clone());
    }
    diag
}
