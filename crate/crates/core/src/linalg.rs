//! Dense complex linear algebra on the small Hilbert spaces used here
//! (at most 2^10 dimensions).
//!
//! Basis convention: the first label of a [`QubitOrdering`] is the most
//! significant bit of the computational-basis index. Ancillas are stored last
//! so a mediated gate factorizes literally as `kron(gate, I2)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::eigen::hermitian_eigen;
use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::DEFAULT_TOLERANCE;

pub use num_complex::Complex64 as C64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Largest dimension accepted anywhere in the crate.
pub const MAX_DIM: usize = 1 << 10;

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from rows, rejecting ragged or non-finite input.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Domain("empty matrix".into()));
        }
        if dim > MAX_DIM {
            return Err(Error::Domain(format!("dimension {dim} exceeds {MAX_DIM}")));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::NotSquare { rows: dim, row: i, len: row.len() });
            }
            data.extend(row);
        }
        let m = Self { dim, data };
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    /// Row-major flat constructor.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Dimension { expected: dim * dim, found: data.len() });
        }
        let m = Self { dim, data };
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    /// Real matrix literal, mostly for tests and constants.
    pub fn from_real(dim: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self { dim, data: entries.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.data.chunks(self.dim)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (d, &b) in dst.iter_mut().zip(brow) {
                    *d += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension { expected: self.dim, found: other.dim });
        }
        Ok(self.matmul(other))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        self.rows().map(|row| row.iter().zip(v).map(|(&a, &b)| a * b).sum()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)])
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * z).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `Tr(self^dagger other)` without forming the product.
    pub fn inner(&self, other: &Self) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of the elementwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    /// `min_phi max|self - e^{i phi} other|`, with the phase taken from the
    /// trace overlap.
    pub fn max_abs_diff_up_to_phase(&self, other: &Self) -> f64 {
        let ov = other.inner(self);
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
        self.max_abs_diff(&other.scale(phase))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.dim);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn det(&self) -> C64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
                .unwrap();
            let p = a[pivot * n + col];
            if p.norm() == 0.0 {
                return ZERO;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            det *= p;
            for r in (col + 1)..n {
                let f = a[r * n + col] / p;
                if f == ZERO {
                    continue;
                }
                for k in col..n {
                    let v = a[col * n + k];
                    a[r * n + k] -= f * v;
                }
            }
        }
        det
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

/// Kronecker product `a (x) b`; `a` acts on the more significant bits.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a.dim * b.dim;
    if dim > MAX_DIM {
        return Err(Error::Domain(format!("kron dimension {dim} exceeds {MAX_DIM}")));
    }
    Ok(ComplexMatrix::from_fn(dim, |r, c| a[(r / b.dim, c / b.dim)] * b[(r % b.dim, c % b.dim)]))
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::identity(1);
    for f in factors {
        out = kron(&out, f)?;
    }
    Ok(out)
}

/// Unitary operator with the tolerance it was validated against.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    matrix: ComplexMatrix,
    tolerance: f64,
}

impl Unitary {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tolerance: f64) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = matrix.unitarity_defect();
        if defect > tolerance {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { matrix, tolerance })
    }

    /// Skips validation; for products of already-validated unitaries.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix, tolerance: DEFAULT_TOLERANCE }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new_unchecked(ComplexMatrix::identity(dim))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn compose(&self, then: &Unitary) -> Unitary {
        Unitary::new_unchecked(then.matrix.matmul(&self.matrix))
    }

    pub fn mul(&self, other: &Unitary) -> Unitary {
        Unitary::new_unchecked(self.matrix.matmul(&other.matrix))
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary::new_unchecked(self.matrix.adjoint())
    }

    pub fn kron(&self, other: &Unitary) -> Result<Unitary> {
        Ok(Unitary::new_unchecked(kron(&self.matrix, &other.matrix)?))
    }

    pub fn pow(&self, k: u32) -> Unitary {
        Unitary::new_unchecked(self.matrix.pow(k))
    }

    pub fn scale_phase(&self, phase: C64) -> Unitary {
        Unitary::new_unchecked(self.matrix.scale(phase))
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: state.dim() });
        }
        Ok(StateVector { amps: self.matrix.apply(&state.amps) })
    }
}

/// Normalized pure state on `log2(dim)` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(amps.len()));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = sqrt(amps.iter().map(|z| z.norm_sqr()).sum());
        if (norm - 1.0).abs() > DEFAULT_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amps })
    }

    /// Normalizes `amps` first; rejects the zero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let norm = sqrt(amps.iter().map(|z| z.norm_sqr()).sum());
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(amps.into_iter().map(|z| z / norm).collect())
    }

    pub fn basis(n_spins: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_spins];
        amps[index] = ONE;
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_spins(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.amps.iter().map(|z| z.norm_sqr()).sum())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn kron(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { amps }
    }

    /// `|self><self|`.
    pub fn density(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), |r, c| self.amps[r] * self.amps[c].conj())
    }

    pub fn scale_phase(&self, phase: C64) -> StateVector {
        StateVector { amps: self.amps.iter().map(|z| z * phase).collect() }
    }
}

/// Spin labels in tensor order. When an ancilla is present it is last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitOrdering {
    labels: Vec<u32>,
    ancilla: Option<u32>,
}

impl QubitOrdering {
    /// Qubits only, listed in ascending label order.
    pub fn qubits(labels: &[u32]) -> Result<Self> {
        Self::build(labels, None)
    }

    /// Qubits in ascending label order followed by the ancilla.
    pub fn with_ancilla(qubits: &[u32], ancilla: u32) -> Result<Self> {
        Self::build(qubits, Some(ancilla))
    }

    fn build(qubits: &[u32], ancilla: Option<u32>) -> Result<Self> {
        if qubits.is_empty() && ancilla.is_none() {
            return Err(Error::InvalidOrdering("no spins".into()));
        }
        if qubits.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidOrdering(format!("qubit labels must be strictly ascending: {qubits:?}")));
        }
        if let Some(a) = ancilla {
            if qubits.contains(&a) {
                return Err(Error::InvalidOrdering(format!("ancilla label {a} repeats a qubit label")));
            }
        }
        let mut labels = qubits.to_vec();
        labels.extend(ancilla);
        if labels.len() > 10 {
            return Err(Error::InvalidOrdering(format!("{} spins exceeds the supported 10", labels.len())));
        }
        Ok(Self { labels, ancilla })
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn qubit_labels(&self) -> &[u32] {
        match self.ancilla {
            Some(_) => &self.labels[..self.labels.len() - 1],
            None => &self.labels,
        }
    }

    pub fn ancilla(&self) -> Option<u32> {
        self.ancilla
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn position(&self, label: u32) -> Result<usize> {
        self.labels.iter().position(|&l| l == label).ok_or(Error::UnknownLabel(label))
    }

    /// Bit shift of a label inside a basis index (first label = MSB).
    pub fn bit(&self, label: u32) -> Result<usize> {
        Ok(self.labels.len() - 1 - self.position(label)?)
    }
}

/// Eigendecomposition of a Hermitian operator, reusable for many times `t`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    values: Vec<f64>,
    vectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        let defect = h.hermiticity_defect();
        if defect > DEFAULT_TOLERANCE {
            return Err(Error::NotHermitian(defect));
        }
        let e = hermitian_eigen(h);
        Ok(Self { values: e.values, vectors: e.vectors })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    /// `exp(-i h t)`.
    pub fn evolve(&self, t: f64) -> Unitary {
        let n = self.values.len();
        let phases: Vec<C64> = self.values.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
        let mut vd = self.vectors.clone();
        for r in 0..n {
            for c in 0..n {
                vd[(r, c)] *= phases[c];
            }
        }
        Unitary::new_unchecked(vd.matmul(&self.vectors.adjoint()))
    }
}

/// `exp(-i h t)` for Hermitian `h` via its spectral decomposition.
pub fn herm_exp(h: &ComplexMatrix, t: f64) -> Result<Unitary> {
    Ok(SpectralDecomposition::new(h)?.evolve(t))
}

/// Permutation operator exchanging spins `i` and `j`.
pub fn transposition(ordering: &QubitOrdering, i: u32, j: u32) -> Result<Unitary> {
    let bi = ordering.bit(i)?;
    let bj = ordering.bit(j)?;
    if bi == bj {
        return Err(Error::Domain(format!("transposition needs two distinct labels, got {i} twice")));
    }
    let dim = ordering.dim();
    let mut m = ComplexMatrix::zeros(dim);
    for idx in 0..dim {
        let a = (idx >> bi) & 1;
        let b = (idx >> bj) & 1;
        let swapped = (idx & !(1 << bi) & !(1 << bj)) | (b << bi) | (a << bj);
        m[(swapped, idx)] = ONE;
    }
    Ok(Unitary::new_unchecked(m))
}

/// Reduces an operator on `ordering` to the labels in `keep`, tracing out the
/// rest. Kept labels appear in their `ordering` order.
pub fn partial_trace(rho: &ComplexMatrix, ordering: &QubitOrdering, keep: &[u32]) -> Result<ComplexMatrix> {
    if keep.is_empty() {
        return Err(Error::Domain("partial trace needs at least one kept label".into()));
    }
    if rho.dim() != ordering.dim() {
        return Err(Error::Dimension { expected: ordering.dim(), found: rho.dim() });
    }
    let mut kept_bits = Vec::new();
    for &label in ordering.labels() {
        if keep.contains(&label) {
            kept_bits.push(ordering.bit(label)?);
        }
    }
    for &k in keep {
        ordering.position(k)?;
    }
    let traced_bits: Vec<usize> = ordering
        .labels()
        .iter()
        .map(|&l| ordering.bit(l).unwrap())
        .filter(|b| !kept_bits.contains(b))
        .collect();

    let nk = kept_bits.len();
    let out_dim = 1 << nk;
    let spread = |sub: usize, bits: &[usize]| -> usize {
        bits.iter().enumerate().fold(0, |acc, (k, &b)| acc | (((sub >> (bits.len() - 1 - k)) & 1) << b))
    };
    let mut out = ComplexMatrix::zeros(out_dim);
    for r in 0..out_dim {
        let rbase = spread(r, &kept_bits);
        for c in 0..out_dim {
            let cbase = spread(c, &kept_bits);
            let mut acc = ZERO;
            for e in 0..(1usize << traced_bits.len()) {
                let env = spread(e, &traced_bits);
                acc += rho[(rbase | env, cbase | env)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Reduced density matrix of a pure state.
pub fn reduced_density(state: &StateVector, ordering: &QubitOrdering, keep: &[u32]) -> Result<ComplexMatrix> {
    partial_trace(&state.density(), ordering, keep)
}

/// Pauli matrices, in the order X, Y, Z.
pub fn pauli(which: usize) -> ComplexMatrix {
    match which {
        0 => ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]),
        1 => ComplexMatrix::from_vec(2, vec![ZERO, -I, I, ZERO]).unwrap(),
        2 => ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]),
        _ => panic!("pauli index {which} out of range"),
    }
}

/// Applies a `2^k x 2^k` operator to the given bit positions of a state
/// amplitude vector in place. `bits[0]` is the most significant bit of the
/// operator's own index.
pub(crate) fn apply_on_bits(amps: &mut [C64], bits: &[usize], op: &ComplexMatrix) {
    let k = bits.len();
    let sub = 1usize << k;
    debug_assert_eq!(op.dim(), sub);
    let mask: usize = bits.iter().fold(0, |m, &b| m | (1 << b));
    let offsets: Vec<usize> = (0..sub)
        .map(|s| bits.iter().enumerate().fold(0, |acc, (j, &b)| acc | (((s >> (k - 1 - j)) & 1) << b)))
        .collect();
    let mut buf = vec![ZERO; sub];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (s, &off) in offsets.iter().enumerate() {
            buf[s] = amps[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let row = &op.as_slice()[r * sub..(r + 1) * sub];
            amps[base | off] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), ComplexMatrix::identity(4));
        let zi = kron(&pauli(2), &i2).unwrap();
        assert_eq!(zi, ComplexMatrix::diagonal(&[ONE, ONE, -ONE, -ONE]));
    }

    #[test]
    fn kron_xx_flips_00_to_11() {
        let xx = kron(&pauli(0), &pauli(0)).unwrap();
        // brute force: column 0 of XX is |11>
        let out = xx.apply(&[ONE, ZERO, ZERO, ZERO]);
        assert_eq!(out, vec![ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = ComplexMatrix::from_rows(vec![vec![ONE, ZERO], vec![ONE]]).unwrap_err();
        assert!(matches!(err, Error::NotSquare { .. }));
        let err = ComplexMatrix::from_rows(vec![vec![ONE, ZERO, ZERO], vec![ONE, ZERO, ZERO]]).unwrap_err();
        assert!(matches!(err, Error::NotSquare { .. }));
        let err = ComplexMatrix::from_rows(vec![vec![c(f64::NAN, 0.0)]]).unwrap_err();
        assert_eq!(err, Error::NonFinite);
    }

    #[test]
    fn herm_exp_at_zero_is_identity() {
        let h = kron(&pauli(0), &pauli(1)).unwrap().add(&kron(&pauli(1), &pauli(0)).unwrap());
        let u = herm_exp(&h, 0.0).unwrap();
        assert!(u.matrix().approx_eq(&ComplexMatrix::identity(4), 1e-14));
    }

    #[test]
    fn herm_exp_full_rotation_gives_minus_identity() {
        let h = pauli(2).scale(c(0.5, 0.0));
        let u = herm_exp(&h, 2.0 * PI).unwrap();
        assert!(u.matrix().approx_eq(&ComplexMatrix::identity(2).scale(-ONE), 1e-14));
    }

    #[test]
    fn herm_exp_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(herm_exp(&m, 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn swap_on_two_spins() {
        let ord = QubitOrdering::qubits(&[1, 2]).unwrap();
        let p = transposition(&ord, 1, 2).unwrap();
        let swap = ComplexMatrix::from_real(4, &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.]);
        assert_eq!(p.matrix(), &swap);
        assert!(matches!(transposition(&ord, 1, 7), Err(Error::UnknownLabel(7))));
        assert!(transposition(&ord, 1, 1).is_err());
    }

    #[test]
    fn ordering_validation() {
        assert!(QubitOrdering::qubits(&[2, 1]).is_err());
        assert!(QubitOrdering::with_ancilla(&[1, 2], 2).is_err());
        let o = QubitOrdering::with_ancilla(&[1, 3], 2).unwrap();
        assert_eq!(o.labels(), &[1, 3, 2]);
        assert_eq!(o.qubit_labels(), &[1, 3]);
        assert_eq!(o.bit(1).unwrap(), 2);
        assert_eq!(o.bit(2).unwrap(), 0);
    }

    #[test]
    fn partial_trace_cases() {
        let ord = QubitOrdering::qubits(&[1, 2]).unwrap();
        let s00 = StateVector::basis(2, 0);
        let r = reduced_density(&s00, &ord, &[1]).unwrap();
        assert!(r.approx_eq(&ComplexMatrix::diagonal(&[ONE, ZERO]), 1e-15));

        let h = 1.0 / 2f64.sqrt();
        let singlet = StateVector::new(vec![ZERO, c(h, 0.0), c(-h, 0.0), ZERO]).unwrap();
        let r = reduced_density(&singlet, &ord, &[1]).unwrap();
        assert!(r.approx_eq(&ComplexMatrix::identity(2).scale(c(0.5, 0.0)), 1e-15));
        let r = reduced_density(&singlet, &ord, &[2]).unwrap();
        assert!(r.approx_eq(&ComplexMatrix::identity(2).scale(c(0.5, 0.0)), 1e-15));

        assert!(partial_trace(&s00.density(), &ord, &[]).is_err());
        assert!(matches!(partial_trace(&s00.density(), &ord, &[9]), Err(Error::UnknownLabel(9))));
    }

    #[test]
    fn partial_trace_keeps_product_factor() {
        // |0>(x)(a|0>+b|1>)(x)|1> keeping the middle spin
        let ord = QubitOrdering::qubits(&[1, 2, 3]).unwrap();
        let mid = StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let s = StateVector::basis(1, 0).kron(&mid).kron(&StateVector::basis(1, 1));
        let r = reduced_density(&s, &ord, &[2]).unwrap();
        assert!(r.approx_eq(&mid.density(), 1e-15));
        let r = reduced_density(&s, &ord, &[1, 3]).unwrap();
        assert!(r.approx_eq(&StateVector::basis(2, 1).density(), 1e-15));
    }

    #[test]
    fn determinant_matches_closed_forms() {
        let m = ComplexMatrix::from_vec(2, vec![c(1.0, 2.0), c(3.0, 0.0), c(0.0, -1.0), c(2.0, 1.0)]).unwrap();
        let expect = c(1.0, 2.0) * c(2.0, 1.0) - c(3.0, 0.0) * c(0.0, -1.0);
        assert!((m.det() - expect).norm() < 1e-14);
        // a qubit swap exchanges 2^(n-2) pairs of basis states
        let two = QubitOrdering::qubits(&[1, 2]).unwrap();
        assert!((transposition(&two, 1, 2).unwrap().matrix().det() + ONE).norm() < 1e-14);
        let three = QubitOrdering::qubits(&[1, 2, 3]).unwrap();
        assert!((transposition(&three, 1, 3).unwrap().matrix().det() - ONE).norm() < 1e-14);
    }

    #[test]
    fn apply_on_bits_matches_kron() {
        // operator on spins (3, 1) of a 3-spin register, spin 3 as the operator MSB
        let op = kron(&pauli(0), &pauli(1)).unwrap();
        let mut amps: Vec<C64> = (0..8).map(|k| c(k as f64, (k * k) as f64 * 0.1)).collect();
        let full = {
            // build the full operator by explicit index mapping
            ComplexMatrix::from_fn(8, |r, col| {
                let same = (r >> 1) & 1 == (col >> 1) & 1;
                if !same {
                    return ZERO;
                }
                let rs = ((r & 1) << 1) | (r >> 2);
                let cs = ((col & 1) << 1) | (col >> 2);
                op[(rs, cs)]
            })
        };
        let expect = full.apply(&amps);
        apply_on_bits(&mut amps, &[0, 2], &op);
        for (a, b) in amps.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
