//! Cyclic complex Jacobi eigensolver for Hermitian matrices.

use alloc::vec::Vec;

#[allow(unused_imports)] // float math is inherent once std is linked
use num_traits::Float;

use super::{CMatrix, C64, ZERO};

const MAX_SWEEPS: usize = 80;

/// Spectral decomposition `A = V diag(values) V*`, eigenvalues ascending,
/// eigenvectors stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `V diag(f(λ)) V*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.vectors.dim();
        let fx: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        CMatrix::from_fn(n, |i, j| {
            let mut acc = ZERO;
            for k in 0..n {
                if fx[k] != ZERO {
                    acc += v[(i, k)] * fx[k] * v[(j, k)].conj();
                }
            }
            acc
        })
    }

    /// Sum of the spectral projections for eigenvalues in `[lo, hi]`.
    pub fn spectral_projection(&self, lo: f64, hi: f64) -> CMatrix {
        self.apply_fn(|x| if x >= lo && x <= hi { C64::new(1.0, 0.0) } else { ZERO })
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &CMatrix) -> HermitianEigen {
    let n = a.dim();
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = m.hs_norm();
    if scale == 0.0 || n <= 1 {
        return finish(m, v);
    }
    let skip = 1e-22 * scale;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g <= skip {
                    continue;
                }
                let phase = apq / g;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = phase.conj() * (-s);
                let gqq = phase.conj() * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * gpp + akq * gqp;
                    m[(k, q)] = akp * gpq + akq * gqq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                    m[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)].im = 0.0;
                m[(q, q)].im = 0.0;
            }
        }
    }
    finish(m, v)
}

fn finish(m: CMatrix, v: CMatrix) -> HermitianEigen {
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    HermitianEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::random::{random_hermitian, rng};
    use proptest::prelude::*;

    fn reconstruct(e: &HermitianEigen) -> CMatrix {
        e.apply_fn(|x| C64::new(x, 0.0))
    }

    #[test]
    fn diagonal_input_is_sorted() {
        let a = CMatrix::from_real_diag(&[3.0, -1.0, 2.0]);
        let e = hermitian_eigen(&a);
        assert_eq!(e.values, alloc::vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_y_has_eigenvalues_pm_one() {
        let y = CMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, -1.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => ZERO,
        });
        let e = hermitian_eigen(&y);
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        assert!((&reconstruct(&e) - &y).max_abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn decomposition_reconstructs(seed in any::<u64>(), n in 1usize..9) {
            let a = random_hermitian(n, &mut rng(seed));
            let e = hermitian_eigen(&a);
            prop_assert!((&reconstruct(&e) - &a).max_abs() < 1e-12);
            prop_assert!(e.vectors.unitary_residual() < 1e-12);
            for w in e.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }
    }
}
