//! Small dense linear-algebra kernels: LU solves for the implicit
//! integrator stages and a Jacobi eigenvalue sweep for Hermitian
//! positivity checks. Sizes are tiny (mean-field dimension 10, density
//! matrices at most 81), so simple textbook algorithms are appropriate.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense LU factorization with partial pivoting.
pub struct Lu {
    factors: Vec<f64>,
    pivots: Vec<usize>,
    n: usize,
}

impl Lu {
    /// Factorizes a row-major n×n matrix.
    pub fn factorize(mut a: Vec<f64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut max = a[k * n + k].abs();
            for i in (k + 1)..n {
                let v = a[i * n + k].abs();
                if v > max {
                    max = v;
                    p = i;
                }
            }
            if max == 0.0 || !max.is_finite() {
                return Err(Error::Integration {
                    t_last: f64::NAN,
                    reason: "singular or non-finite stage matrix".into(),
                });
            }
            pivots[k] = p;
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            let inv = 1.0 / a[k * n + k];
            for i in (k + 1)..n {
                let m = a[i * n + k] * inv;
                a[i * n + k] = m;
                for j in (k + 1)..n {
                    a[i * n + j] -= m * a[k * n + j];
                }
            }
        }
        Ok(Self {
            factors: a,
            pivots,
            n,
        })
    }

    /// Solves A x = b in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.pivots[k]);
        }
        for i in 1..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.factors[i * n + j] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in (i + 1)..n {
                s -= self.factors[i * n + j] * b[j];
            }
            b[i] = s / self.factors[i * n + i];
        }
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Convergence is quadratic; two-sided rotations preserve Hermiticity, so
/// the diagonal converges to the real spectrum. Used for the density-matrix
/// positivity checks (dimension ≤ 81).
pub fn hermitian_eigenvalues(a: &Array2<Complex64>) -> Vec<f64> {
    hermitian_eigensystem(a).0
}

/// Eigenvalues and orthonormal eigenvectors (as matrix columns) of a
/// Hermitian matrix, by the same Jacobi sweep with accumulated rotations.
pub fn hermitian_eigensystem(a: &Array2<Complex64>) -> (Vec<f64>, Array2<Complex64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut vecs = Array2::<Complex64>::eye(n);
    let scale: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    let tol = 1e-14 * scale;

    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() <= tol / (n as f64) {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // Complex Jacobi rotation zeroing m[(p, q)]: diagonalize the
                // 2x2 Hermitian block [[app, apq], [apq*, aqq]].
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let cs = Complex64::new(c, 0.0);
                let sn = phase * s;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * cs - mkq * sn.conj();
                    m[(k, q)] = mkp * sn + mkq * cs;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * cs - mqk * sn;
                    m[(q, k)] = mpk * sn.conj() + mqk * cs;
                }
                for k in 0..n {
                    let vkp = vecs[(k, p)];
                    let vkq = vecs[(k, q)];
                    vecs[(k, p)] = vkp * cs - vkq * sn.conj();
                    vecs[(k, q)] = vkp * sn + vkq * cs;
                }
            }
        }
    }
    ((0..n).map(|i| m[(i, i)].re).collect(), vecs)
}
