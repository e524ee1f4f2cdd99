//! Nonlocal characterization of two-qubit gates and pure-state entanglement.
//!
//! Weyl coordinates use the convention `U ~ exp(i/2 (c1 XX + c2 YY + c3 ZZ))`
//! up to local unitaries, folded into `pi - c2 >= c1 >= c2 >= c3 >= 0`.
//! On the chamber base (`c3 = 0`) the representative with `c1 <= pi/2` is
//! returned.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::eigen::hermitian_eigen;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector, Unitary, C64, ZERO};
use crate::math::{atan2, cos, rem_euclid, sin, sqrt};
use crate::optimize::{job_rng, nelder_mead, uniform_point, NelderMeadConfig};

/// Boundary slack for chamber and polyhedron membership tests.
const BOUNDARY_TOL: f64 = 1e-9;

/// Default number of restarts for [`max_concurrence`].
pub const DEFAULT_CONCURRENCE_RESTARTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylPoint {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl WeylPoint {
    pub fn as_array(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    pub fn in_chamber(&self, tol: f64) -> bool {
        PI - self.c2 >= self.c1 - tol && self.c1 >= self.c2 - tol && self.c2 >= self.c3 - tol && self.c3 >= -tol
    }

    pub fn max_abs_diff(&self, other: &WeylPoint) -> f64 {
        (self.c1 - other.c1).abs().max((self.c2 - other.c2).abs()).max((self.c3 - other.c3).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MakhlinInvariants {
    pub g1: C64,
    pub g2: f64,
}

fn require_two_qubit(u: &Unitary) -> Result<()> {
    if u.dim() != 4 {
        return Err(Error::Dimension { expected: 4, found: u.dim() });
    }
    let defect = u.matrix().unitarity_defect();
    if defect > u.tolerance().max(crate::DEFAULT_TOLERANCE) {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

fn magic_basis() -> ComplexMatrix {
    let h = 1.0 / sqrt(2.0);
    let (o, z, i) = (C64::new(h, 0.0), ZERO, C64::new(0.0, h));
    ComplexMatrix::from_vec(4, alloc::vec![o, z, z, i, z, i, o, z, z, i, -o, z, o, z, z, -i]).unwrap()
}

/// `U_B^T U_B` with `U_B` the gate in the magic basis.
fn magic_gram(u: &ComplexMatrix) -> ComplexMatrix {
    let q = magic_basis();
    let ub = q.adjoint().matmul(u).matmul(&q);
    ub.transpose().matmul(&ub)
}

/// Eigenvalues of a symmetric unitary matrix.
fn symmetric_unitary_spectrum(m: &ComplexMatrix) -> [C64; 4] {
    // Re M and Im M are commuting real-symmetric matrices; a generic real
    // combination shares their eigenvectors.
    let kappa = 0.618_033_988_749_894_9;
    let a = ComplexMatrix::from_fn(4, |r, c| {
        let s = (m[(r, c)] + m[(c, r)]) * 0.5;
        C64::new(s.re + kappa * s.im, 0.0)
    });
    let o = hermitian_eigen(&a).vectors;
    let d = o.transpose().matmul(m).matmul(&o);
    let mut out = [ZERO; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        let z = d[(k, k)];
        *slot = z / z.norm();
    }
    out
}

fn fold(c: [f64; 3]) -> WeylPoint {
    let mut a = [0.0; 3];
    let mut flips = 0;
    for k in 0..3 {
        let mut x = rem_euclid(c[k] / 2.0, FRAC_PI_2);
        if x > FRAC_PI_4 {
            x = FRAC_PI_2 - x;
            flips += 1;
        }
        a[k] = x;
    }
    a.sort_by(|x, y| y.total_cmp(x));
    if a[2].abs() < 1e-12 {
        a[2] = 0.0;
    } else if flips % 2 == 1 {
        a[2] = -a[2];
    }
    if a[2] < 0.0 && (a[0] - FRAC_PI_4).abs() < 1e-12 {
        a[2] = -a[2];
    }
    if a[2] >= 0.0 {
        WeylPoint { c1: 2.0 * a[0], c2: 2.0 * a[1], c3: 2.0 * a[2] }
    } else {
        WeylPoint { c1: PI - 2.0 * a[0], c2: 2.0 * a[1], c3: -2.0 * a[2] }
    }
}

/// Canonical Weyl-chamber coordinates.
pub fn weyl_coordinates(u: &Unitary) -> Result<WeylPoint> {
    require_two_qubit(u)?;
    let det = u.matrix().det();
    let m = magic_gram(u.matrix()).scale(C64::from_polar(1.0, -atan2(det.im, det.re) / 2.0));
    let lambda = symmetric_unitary_spectrum(&m);
    let theta: Vec<f64> = lambda.iter().map(|z| atan2(z.im, z.re) / 2.0).collect();
    Ok(fold([theta[0] + theta[2], theta[1] + theta[2], theta[0] + theta[1]]))
}

/// Makhlin's local invariants computed in the magic basis.
pub fn makhlin_invariants(u: &Unitary) -> Result<MakhlinInvariants> {
    require_two_qubit(u)?;
    let m = magic_gram(u.matrix());
    let det = u.matrix().det();
    let tr = m.trace();
    let tr2 = m.matmul(&m).trace();
    let g1 = tr * tr / (det * 16.0);
    let g2 = (tr * tr - tr2) / (det * 4.0);
    Ok(MakhlinInvariants { g1, g2: g2.re })
}

fn sq(x: f64) -> f64 {
    x * x
}

/// Makhlin invariants of the canonical gate at a Weyl point.
pub fn makhlin_from_weyl(p: &WeylPoint) -> MakhlinInvariants {
    let (c1, c2, c3) = (p.c1, p.c2, p.c3);
    let cc = sq(cos(c1)) * sq(cos(c2)) * sq(cos(c3));
    let ss = sq(sin(c1)) * sq(sin(c2)) * sq(sin(c3));
    let g1 = C64::new(cc - ss, sin(2.0 * c1) * sin(2.0 * c2) * sin(2.0 * c3) / 4.0);
    let g2 = 4.0 * cc - 4.0 * ss - cos(2.0 * c1) * cos(2.0 * c2) * cos(2.0 * c3);
    MakhlinInvariants { g1, g2 }
}

/// Membership of a chamber point in the perfect-entangler polyhedron.
pub fn weyl_point_is_perfect_entangler(p: &WeylPoint) -> bool {
    p.c1 + p.c2 >= FRAC_PI_2 - BOUNDARY_TOL
        && p.c1 - p.c2 <= FRAC_PI_2 + BOUNDARY_TOL
        && p.c2 + p.c3 <= FRAC_PI_2 + BOUNDARY_TOL
}

/// Whether some product state is mapped to a maximally entangled state.
pub fn is_perfect_entangler(u: &Unitary) -> Result<bool> {
    Ok(weyl_point_is_perfect_entangler(&weyl_coordinates(u)?))
}

/// Independent criterion: the convex hull of the eigenvalues of
/// `U_B^T U_B` (global phase removed) contains the origin.
pub fn spectrum_hull_contains_origin(u: &Unitary) -> Result<bool> {
    require_two_qubit(u)?;
    let det = u.matrix().det();
    let m = magic_gram(u.matrix()).scale(C64::from_polar(1.0, -atan2(det.im, det.re) / 2.0));
    let mut angles: Vec<f64> = symmetric_unitary_spectrum(&m).iter().map(|z| atan2(z.im, z.re)).collect();
    angles.sort_by(|a, b| a.total_cmp(b));
    let mut gap = angles[0] + 2.0 * PI - angles[3];
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    Ok(gap <= PI + BOUNDARY_TOL)
}

fn require_normalized(s: &StateVector) -> Result<()> {
    let n = s.norm();
    if (n - 1.0).abs() > crate::DEFAULT_TOLERANCE {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

/// Pure-state concurrence `2 |a d - b c|`.
pub fn concurrence(s: &StateVector) -> Result<f64> {
    if s.dim() != 4 {
        return Err(Error::Dimension { expected: 4, found: s.dim() });
    }
    require_normalized(s)?;
    let a = s.amplitudes();
    Ok((2.0 * (a[0] * a[3] - a[1] * a[2]).norm()).min(1.0))
}

fn bloch_state(theta: f64, phi: f64) -> [C64; 2] {
    [C64::new(cos(theta / 2.0), 0.0), C64::from_polar(sin(theta / 2.0), phi)]
}

fn product_concurrence(u: &ComplexMatrix, p: &[f64]) -> f64 {
    let a = bloch_state(p[0], p[1]);
    let b = bloch_state(p[2], p[3]);
    let input = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
    let out = u.apply(&input);
    2.0 * (out[0] * out[3] - out[1] * out[2]).norm()
}

/// Largest concurrence reachable from product inputs, by multistart local
/// search over the two Bloch spheres. Restart `k` uses the same stream for
/// any `restarts > k`, so the result is monotone in `restarts`.
pub fn max_concurrence(u: &Unitary, restarts: usize) -> Result<f64> {
    require_two_qubit(u)?;
    if restarts == 0 {
        return Err(Error::InvalidConfig("restarts must be positive".into()));
    }
    let m = u.matrix();
    let cfg = NelderMeadConfig { f_tol: 1e-15, x_tol: 1e-10, max_iterations: 5_000, ..Default::default() };
    let mut best: f64 = 0.0;
    for k in 0..restarts {
        let x0 = uniform_point(&mut job_rng(0x636f_6e63, k as u64), 4, -PI, PI);
        let r = nelder_mead(|p| -product_concurrence(m, p), &x0, &cfg);
        best = best.max(-r.f);
    }
    Ok(best.clamp(0.0, 1.0))
}

/// `|<a|b>|^2`.
pub fn state_fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    require_normalized(a)?;
    require_normalized(b)?;
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Frobenius norm of `a - b`, optionally minimized over a global phase on `b`.
pub fn operator_error(a: &Unitary, b: &Unitary, phase_free: bool) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension { expected: a.dim(), found: b.dim() });
    }
    Ok(matrix_error(a.matrix(), b.matrix(), phase_free))
}

pub(crate) fn matrix_error(a: &ComplexMatrix, b: &ComplexMatrix, phase_free: bool) -> f64 {
    let phase = if phase_free {
        let ov = b.inner(a);
        if ov.norm() > 0.0 {
            ov / ov.norm()
        } else {
            C64::new(1.0, 0.0)
        }
    } else {
        C64::new(1.0, 0.0)
    };
    sqrt(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y * phase).norm_sqr()).sum())
}
