//! Cyclic Jacobi diagonalization of Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot with a diagonal unitary
//! and then applies the classical real Jacobi rotation, so the same routine
//! handles real-symmetric and complex-Hermitian input.

use alloc::vec::Vec;

use crate::linalg::{C64, ComplexMatrix};
use crate::math::sqrt;

const MAX_SWEEPS: usize = 64;

pub(crate) struct Eigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

/// Diagonalizes a Hermitian matrix. Hermiticity is the caller's contract;
/// only the upper triangle's pivots drive the rotations.
pub(crate) fn hermitian_eigen(h: &ComplexMatrix) -> Eigen {
    let n = h.dim();
    let mut a: Vec<C64> = h.as_slice().to_vec();
    let mut v = ComplexMatrix::identity(n).into_vec();

    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let target = 1e-32 * scale.max(1e-300);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q].norm_sqr();
            }
        }
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let ph = apq / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                let cph = ph.conj();

                // A <- A G
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * cph * s;
                    a[k * n + q] = akp * s + akq * cph * c;
                }
                // A <- G^dagger A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * ph * s;
                    a[q * n + k] = apk * s + aqk * ph * c;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p] = C64::new(app - t * mag, 0.0);
                a[q * n + q] = C64::new(aqq + t * mag, 0.0);

                // V <- V G
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c - vkq * cph * s;
                    v[k * n + q] = vkp * s + vkq * cph * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |r, c| v[r * n + order[c]]);
    Eigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        // small LCG; only needs to be deterministic
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(next(), 0.0);
            for j in (i + 1)..n {
                let z = C64::new(next(), next());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn reconstructs_random_hermitian() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (16, 4), (33, 5)] {
            let h = random_hermitian(n, seed);
            let e = hermitian_eigen(&h);
            let d = ComplexMatrix::diagonal(&e.values.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
            let back = e.vectors.matmul(&d).matmul(&e.vectors.adjoint());
            assert!(back.max_abs_diff(&h) < 1e-12, "n={n}");
            let gram = e.vectors.adjoint().matmul(&e.vectors);
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let h = ComplexMatrix::identity(6).scale(C64::new(2.5, 0.0));
        let e = hermitian_eigen(&h);
        assert!(e.values.iter().all(|&x| (x - 2.5).abs() < 1e-15));
    }
}
