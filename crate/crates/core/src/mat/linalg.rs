//! Rectangular helpers: null spaces via Householder QR + one-sided Jacobi,
//! and Hermitian positive-definite solves via Cholesky.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float math is inherent once std is linked
use num_traits::Float;

use super::{vdot, vnorm, CMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Column-major rectangular complex matrix.
#[derive(Clone, Debug)]
pub struct ColMat {
    rows: usize,
    cols: Vec<Vec<C64>>,
}

impl ColMat {
    pub fn from_columns(rows: usize, cols: Vec<Vec<C64>>) -> Self {
        debug_assert!(cols.iter().all(|c| c.len() == rows));
        Self { rows, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &[C64] {
        &self.cols[j]
    }
}

/// Singular values (descending order not guaranteed) and right singular
/// vectors of `a`; `vectors[k]` pairs with `sigmas[k]`.
#[derive(Clone, Debug)]
pub struct RightSingular {
    pub sigmas: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl RightSingular {
    pub fn max(&self) -> f64 {
        self.sigmas.iter().copied().fold(0.0, f64::max)
    }
}

/// Right singular system of `a`. Tall inputs are first reduced to their
/// square `R` factor, which has the same singular values and right vectors.
pub fn right_singular(a: &ColMat) -> RightSingular {
    let n = a.ncols();
    let mut work: Vec<Vec<C64>> = if a.rows() > n { qr_r(a) } else { a.cols.clone() };
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    one_sided_jacobi(&mut work, &mut v);
    let sigmas = work.iter().map(|c| vnorm(c)).collect();
    RightSingular { sigmas, vectors: v }
}

/// Orthonormal basis of `{y : a y = 0}` using the relative cutoff
/// `σ ≤ cutoff · max(1, σ_max)`.
pub fn null_space(a: &ColMat, cutoff: f64) -> Vec<Vec<C64>> {
    let rs = right_singular(a);
    let thresh = cutoff * rs.max().max(1.0);
    rs.sigmas
        .iter()
        .zip(rs.vectors)
        .filter(|(s, _)| **s <= thresh)
        .map(|(_, v)| v)
        .collect()
}

/// Householder QR; returns the columns of the `n × n` upper-triangular `R`.
fn qr_r(a: &ColMat) -> Vec<Vec<C64>> {
    let m = a.rows();
    let n = a.ncols();
    let mut cols = a.cols.clone();
    for k in 0..n.min(m) {
        let x: Vec<C64> = cols[k][k..].to_vec();
        let xnorm = vnorm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vn = vnorm(&v);
        if vn == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        for col in cols.iter_mut().skip(k) {
            let tail = &mut col[k..];
            let d = vdot(&v, tail) * 2.0;
            for (t, vi) in tail.iter_mut().zip(&v) {
                *t -= vi * d;
            }
        }
    }
    cols.into_iter()
        .enumerate()
        .map(|(j, c)| {
            let mut r = vec![ZERO; n];
            let len = (j.min(n - 1).min(m.saturating_sub(1)) + 1).min(c.len());
            r[..len].copy_from_slice(&c[..len]);
            r
        })
        .collect()
}

fn one_sided_jacobi(a: &mut [Vec<C64>], v: &mut [Vec<C64>]) {
    let n = a.len();
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = a[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = vdot(&a[p], &a[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + zeta.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                // columns p, q·conj(phase) are real-correlated; rotate them
                rotate(a, p, q, c, s, phase);
                rotate(v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }
}

fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let (lo, hi) = cols.split_at_mut(q);
    let cp = &mut lo[p];
    let cq = &mut hi[0];
    let ph = phase.conj();
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * ph;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = (xp * s + yq * c) * phase;
    }
}

/// Solves `A X = B` for Hermitian positive-definite `A` (columns of `B`).
pub fn hpd_solve(a: &CMatrix, b: &[Vec<C64>]) -> Result<Vec<Vec<C64>>> {
    let n = a.dim();
    let mut l = CMatrix::zeros(n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 {
            return Err(Error::NotInvertible { sigma_min: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(b.iter()
        .map(|rhs| {
            let mut y = rhs.clone();
            for i in 0..n {
                for k in 0..i {
                    let t = l[(i, k)] * y[k];
                    y[i] -= t;
                }
                y[i] /= l[(i, i)];
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    let t = l[(k, i)].conj() * y[k];
                    y[i] -= t;
                }
                y[i] /= l[(i, i)];
            }
            y
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::random::{random_matrix, rng};

    fn to_colmat(m: &CMatrix) -> ColMat {
        let n = m.dim();
        ColMat::from_columns(n, (0..n).map(|j| (0..n).map(|i| m[(i, j)]).collect()).collect())
    }

    #[test]
    fn singular_values_match_eigenvalues_of_gram() {
        let m = random_matrix(5, &mut rng(3));
        let rs = right_singular(&to_colmat(&m));
        let mut s = rs.sigmas.clone();
        s.sort_by(f64::total_cmp);
        let eig = crate::mat::hermitian_eigen(&(&m.adjoint() * &m));
        for (a, b) in s.iter().zip(&eig.values) {
            assert!((a * a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn null_space_of_rank_deficient_tall_matrix() {
        // columns: e1, e2, e1 + e2 in C^6 → one-dimensional kernel spanned by (1, 1, -1)
        let mut cols = vec![vec![ZERO; 6]; 3];
        cols[0][0] = C64::new(1.0, 0.0);
        cols[1][1] = C64::new(0.0, 1.0);
        cols[2][0] = C64::new(1.0, 0.0);
        cols[2][1] = C64::new(0.0, 1.0);
        let ns = null_space(&ColMat::from_columns(6, cols), 1e-10);
        assert_eq!(ns.len(), 1);
        let v = &ns[0];
        assert!((v[0] - v[1]).norm() < 1e-12);
        assert!((v[0] + v[2]).norm() < 1e-12);
    }

    #[test]
    fn cholesky_solves_hpd_system() {
        let m = random_matrix(4, &mut rng(9));
        let a = &(&m.adjoint() * &m) + &CMatrix::identity(4);
        let b = vec![vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0), C64::new(3.0, 0.0), C64::new(0.5, 0.5)]];
        let x = hpd_solve(&a, &b).unwrap();
        let ax = a.apply(&x[0]);
        for (l, r) in ax.iter().zip(&b[0]) {
            assert!((l - r).norm() < 1e-12);
        }
    }
}
