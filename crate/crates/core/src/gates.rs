//! Standard one-, two- and three-qubit gates.

use crate::linalg::{ComplexMatrix, Unitary, C64, ONE, ZERO};
use crate::math::{cos, sin};

/// `exp(-i theta sigma_x / 2)`.
pub fn rx(theta: f64) -> ComplexMatrix {
    let (c, s) = (cos(theta / 2.0), sin(theta / 2.0));
    ComplexMatrix::from_vec(2, alloc::vec![C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)])
        .unwrap()
}

/// `exp(-i theta sigma_y / 2)`.
pub fn ry(theta: f64) -> ComplexMatrix {
    let (c, s) = (cos(theta / 2.0), sin(theta / 2.0));
    ComplexMatrix::from_real(2, &[c, -s, s, c])
}

/// `exp(-i theta sigma_z / 2)`.
pub fn rz(theta: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[C64::from_polar(1.0, -theta / 2.0), C64::from_polar(1.0, theta / 2.0)])
}

pub fn cnot() -> Unitary {
    Unitary::new_unchecked(ComplexMatrix::from_real(
        4,
        &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.],
    ))
}

pub fn swap() -> Unitary {
    Unitary::new_unchecked(ComplexMatrix::from_real(
        4,
        &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.],
    ))
}

/// `exp(i pi/8 (XX + YY + ZZ))` up to phase: the square root of SWAP at
/// Weyl point `(pi/4, pi/4, pi/4)`. Its adjoint is the other square root.
pub fn sqrt_swap() -> Unitary {
    let p = C64::new(0.5, -0.5);
    let m = C64::new(0.5, 0.5);
    let mut u = ComplexMatrix::identity(4);
    u[(1, 1)] = p;
    u[(2, 2)] = p;
    u[(1, 2)] = m;
    u[(2, 1)] = m;
    Unitary::new_unchecked(u)
}

/// `exp(i (pi/2 XX + pi/4 YY) / 2)`.
pub fn b_gate() -> Unitary {
    let pi = core::f64::consts::PI;
    let (c1, s1) = (cos(pi / 8.0), sin(pi / 8.0));
    let (c3, s3) = (cos(3.0 * pi / 8.0), sin(3.0 * pi / 8.0));
    let mut u = ComplexMatrix::zeros(4);
    u[(0, 0)] = C64::new(c1, 0.0);
    u[(3, 3)] = C64::new(c1, 0.0);
    u[(0, 3)] = C64::new(0.0, s1);
    u[(3, 0)] = C64::new(0.0, s1);
    u[(1, 1)] = C64::new(c3, 0.0);
    u[(2, 2)] = C64::new(c3, 0.0);
    u[(1, 2)] = C64::new(0.0, s3);
    u[(2, 1)] = C64::new(0.0, s3);
    Unitary::new_unchecked(u)
}

pub fn toffoli() -> Unitary {
    let mut u = ComplexMatrix::identity(8);
    u[(6, 6)] = ZERO;
    u[(7, 7)] = ZERO;
    u[(6, 7)] = ONE;
    u[(7, 6)] = ONE;
    Unitary::new_unchecked(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{herm_exp, kron, pauli};
    use core::f64::consts::PI;

    #[test]
    fn b_gate_matches_exponential() {
        let xx = kron(&pauli(0), &pauli(0)).unwrap();
        let yy = kron(&pauli(1), &pauli(1)).unwrap();
        let h = xx.scale(C64::new(-PI / 4.0, 0.0)).add(&yy.scale(C64::new(-PI / 8.0, 0.0)));
        let u = herm_exp(&h, 1.0).unwrap();
        assert!(u.matrix().approx_eq(b_gate().matrix(), 1e-14));
    }

    #[test]
    fn sqrt_swap_matches_exponential() {
        let xx = kron(&pauli(0), &pauli(0)).unwrap();
        let yy = kron(&pauli(1), &pauli(1)).unwrap();
        let zz = kron(&pauli(2), &pauli(2)).unwrap();
        let h = xx.add(&yy).add(&zz).scale(C64::new(-PI / 8.0, 0.0));
        let u = herm_exp(&h, 1.0).unwrap();
        assert!(u.matrix().max_abs_diff_up_to_phase(sqrt_swap().matrix()) < 1e-14);
    }

    #[test]
    fn sqrt_swap_squares_to_swap() {
        let s = sqrt_swap();
        assert!(s.matrix().matmul(s.matrix()).approx_eq(swap().matrix(), 1e-15));
    }

    #[test]
    fn rotations_match_exponentials() {
        for (k, r) in [rx as fn(f64) -> ComplexMatrix, ry, rz].into_iter().enumerate() {
            let e = herm_exp(&pauli(k).scale(C64::new(0.5, 0.0)), 0.83).unwrap();
            assert!(e.matrix().approx_eq(&r(0.83), 1e-14));
        }
    }
}
