//! Heisenberg exchange dynamics around a single ancilla spin and detection of
//! the times at which the evolution factorizes as `gate (x) I_ancilla`.
//!
//! Spin labels: qubits are `1..=N`, the ancilla is `0` and is stored last.
//! For the linear geometry the two outer spins are qubits 1 and 2.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::linalg::{transposition, ComplexMatrix, QubitOrdering, SpectralDecomposition, Unitary, C64, ONE, ZERO};
use crate::math::{atan2, cos, sin, sqrt};

/// Ancilla label used by every geometry.
pub const ANCILLA: u32 = 0;

/// Max-norm tolerance for accepting a factorization window.
pub const FACTORIZATION_TOLERANCE: f64 = 1e-9;

/// Default number of grid points for period scans.
pub const DEFAULT_SCAN_GRID: usize = 2048;

const MAX_STAR: usize = 9;
const MAX_TAG_POWER: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Qubit - ancilla - qubit.
    Linear3,
    /// `N` qubits each coupled only to the ancilla.
    Star(usize),
}

/// Coupling graph: every qubit couples only to the ancilla.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinGeometry {
    topology: Topology,
    ordering: QubitOrdering,
    couplings: Vec<f64>,
}

impl SpinGeometry {
    /// Linear chain with `j1` on qubit 1 and `j2` on qubit 2.
    pub fn linear3(j1: f64, j2: f64) -> Result<Self> {
        Self::build(Topology::Linear3, vec![j1, j2])
    }

    /// Star with `n` qubits and equal coupling `j`.
    pub fn star(n: usize, j: f64) -> Result<Self> {
        Self::build(Topology::Star(n), vec![j; n])
    }

    /// Star with one coupling per qubit, in label order.
    pub fn star_with(couplings: &[f64]) -> Result<Self> {
        Self::build(Topology::Star(couplings.len()), couplings.to_vec())
    }

    /// Parses `linear-3` or `star-N`.
    pub fn from_name(name: &str, j: f64) -> Result<Self> {
        if name == "linear-3" {
            return Self::linear3(j, j);
        }
        if let Some(n) = name.strip_prefix("star-") {
            if let Ok(n) = n.parse::<usize>() {
                return Self::star(n, j);
            }
        }
        Err(Error::InvalidGeometry(format!("unknown geometry `{name}` (expected linear-3 or star-N)")))
    }

    fn build(topology: Topology, couplings: Vec<f64>) -> Result<Self> {
        let n = couplings.len();
        if n == 0 {
            return Err(Error::InvalidGeometry("no qubits coupled to the ancilla".into()));
        }
        if n > MAX_STAR {
            return Err(Error::InvalidGeometry(format!("{n} qubits exceeds the supported {MAX_STAR}")));
        }
        if let Some(j) = couplings.iter().find(|j| !(j.is_finite() && **j > 0.0)) {
            return Err(Error::InvalidGeometry(format!("couplings must be finite and positive, got {j}")));
        }
        let labels: Vec<u32> = (1..=n as u32).collect();
        let ordering = QubitOrdering::with_ancilla(&labels, ANCILLA)?;
        Ok(Self { topology, ordering, couplings })
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn ordering(&self) -> &QubitOrdering {
        &self.ordering
    }

    /// Coupling of qubit `k + 1` to the ancilla.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn n_qubits(&self) -> usize {
        self.couplings.len()
    }

    pub fn has_equal_couplings(&self) -> bool {
        let j0 = self.couplings[0];
        self.couplings.iter().all(|&j| (j - j0).abs() <= 1e-12 * j0)
    }

    pub fn name(&self) -> String {
        match self.topology {
            Topology::Linear3 => "linear-3".into(),
            Topology::Star(n) => format!("star-{n}"),
        }
    }

    /// Name of the first nontrivial mediated gate of this geometry.
    pub fn gate_name(&self) -> String {
        format!("U{}", self.n_qubits())
    }
}

/// `H = sum_k J_k s_k . s_c` with `s = sigma / 2`.
pub fn build_hamiltonian(g: &SpinGeometry) -> ComplexMatrix {
    // s_i . s_j = (2 p_ij - I) / 4
    let dim = g.ordering.dim();
    let mut h = ComplexMatrix::zeros(dim);
    let mut shift = 0.0;
    for (k, &j) in g.couplings.iter().enumerate() {
        let p = transposition(&g.ordering, k as u32 + 1, ANCILLA).expect("labels come from the geometry");
        h = h.add(&p.matrix().scale(C64::new(j / 2.0, 0.0)));
        shift += j / 4.0;
    }
    h.sub(&ComplexMatrix::identity(dim).scale(C64::new(shift, 0.0)))
}

/// Total `S_z` on every spin of `ordering`.
pub fn total_sz(ordering: &QubitOrdering) -> ComplexMatrix {
    let n = ordering.len();
    ComplexMatrix::from_fn(ordering.dim(), |r, c| {
        if r != c {
            return ZERO;
        }
        let ones = r.count_ones() as f64;
        C64::new((n as f64 - 2.0 * ones) / 2.0, 0.0)
    })
}

/// Total spin `S^2` on every spin of `ordering`.
pub fn total_s_squared(ordering: &QubitOrdering) -> ComplexMatrix {
    let n = ordering.len();
    let dim = ordering.dim();
    let labels = ordering.labels();
    let mut s2 = ComplexMatrix::identity(dim).scale(C64::new(0.75 * n as f64, 0.0));
    for a in 0..n {
        for b in (a + 1)..n {
            let p = transposition(ordering, labels[a], labels[b]).expect("labels come from the ordering");
            // 2 s_a . s_b = p - I/2
            s2 = s2.add(&p.matrix().sub(&ComplexMatrix::identity(dim).scale(C64::new(0.5, 0.0))));
        }
    }
    s2
}

/// `exp(-i H t)` for the geometry.
pub fn evolve(g: &SpinGeometry, t: f64) -> Result<Unitary> {
    Ok(SpectralDecomposition::new(&build_hamiltonian(g))?.evolve(t))
}

/// The six S3 permutation operators on the linear chain, in the order
/// `[I, p12, p13, p23, p231, p312]`.
///
/// Spin numbering follows the chain: 1 and 3 are the outer spins, 2 the
/// ancilla. In crate labels that is (1, 0, 2).
pub fn s3_operators() -> [Unitary; 6] {
    let ord = QubitOrdering::with_ancilla(&[1, 2], ANCILLA).expect("static ordering");
    let p12 = transposition(&ord, 1, ANCILLA).unwrap();
    let p23 = transposition(&ord, ANCILLA, 2).unwrap();
    let p13 = transposition(&ord, 1, 2).unwrap();
    let p231 = p23.mul(&p12);
    let p312 = p12.mul(&p23);
    [Unitary::identity(8), p12, p13, p23, p231, p312]
}

/// Closed-form evolution of the linear chain with `J_a = j_ratio * j_b` on the
/// first qubit and `J_b` on the second.
pub fn closed_form_u(j_ratio: f64, j_b: f64, t: f64) -> Result<Unitary> {
    if j_b == 0.0 || !j_b.is_finite() {
        return Err(Error::Domain(format!("J_b must be finite and nonzero, got {j_b}")));
    }
    if !j_ratio.is_finite() || !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let j = j_ratio;
    let s = sqrt(1.0 - j + j * j);
    let x = j_b * t * (1.0 + j) / 2.0;
    let y = j_b * t * s / 2.0;
    let (cx, sx, cy, sy) = (cos(x), sin(x), cos(y), sin(y));
    let minus_i = C64::new(0.0, -1.0);

    let c_id = C64::new(cx + 2.0 * cy, 0.0);
    let c_cyc = C64::new(cx - cy, 0.0);
    let c12 = minus_i * (sx + (2.0 * j - 1.0) / s * sy);
    let c13 = minus_i * (sx - (1.0 + j) / s * sy);
    let c23 = minus_i * (sx + (2.0 - j) / s * sy);

    let [id, p12, p13, p23, p231, p312] = s3_operators();
    let sum = id
        .matrix()
        .scale(c_id)
        .add(&p231.matrix().scale(c_cyc))
        .add(&p312.matrix().scale(c_cyc))
        .add(&p12.matrix().scale(c12))
        .add(&p13.matrix().scale(c13))
        .add(&p23.matrix().scale(c23));
    let pre = C64::from_polar(1.0, j_b * t * (1.0 + j) / 4.0) / 3.0;
    Unitary::new(sum.scale(pre))
}

/// One step of the S3 coefficient recursion on `v = [f, c, e, a, b, d]`.
pub fn s3_recursion_step<T>(j: T, v: [T; 6]) -> [T; 6]
where
    T: Copy + Add<Output = T> + Mul<Output = T>,
{
    let [f, c, e, a, b, d] = v;
    [j * c + e, j * f + a, f + j * b, c + j * d, j * e + d, j * a + b]
}

/// Closed-form S3 coefficients of `Q^n`, ordered `[f, c, e, a, b, d]`.
pub fn s3_closed_form(j: f64, n: u32) -> [f64; 6] {
    let p = libm::pow(1.0 + j, n as f64);
    let q = 1.0 - j + j * j;
    if n.is_multiple_of(2) {
        let r = libm::pow(q, (n / 2) as f64);
        let ab = (p - r) / 3.0;
        [(p + 2.0 * r) / 3.0, 0.0, 0.0, ab, ab, 0.0]
    } else {
        let r = libm::pow(q, ((n - 1) / 2) as f64);
        let c = (p + (2.0 * j - 1.0) * r) / 3.0;
        let d = (p - (1.0 + j) * r) / 3.0;
        let e = (p + (2.0 - j) * r) / 3.0;
        [0.0, c, e, 0.0, 0.0, d]
    }
}

/// Integer version of [`s3_closed_form`]; `None` on overflow or if a
/// coefficient is not divisible by three.
pub fn s3_closed_form_exact(j: i64, n: u32) -> Option<[i128; 6]> {
    let j = j as i128;
    let p = (1 + j).checked_pow(n)?;
    let q = 1 - j + j * j;
    let third = |x: i128| if x % 3 == 0 { Some(x / 3) } else { None };
    if n.is_multiple_of(2) {
        let r = q.checked_pow(n / 2)?;
        let ab = third(p.checked_sub(r)?)?;
        Some([third(p.checked_add(r.checked_mul(2)?)?)?, 0, 0, ab, ab, 0])
    } else {
        let r = q.checked_pow((n - 1) / 2)?;
        let c = third(p.checked_add((2 * j - 1).checked_mul(r)?)?)?;
        let d = third(p.checked_sub((1 + j).checked_mul(r)?)?)?;
        let e = third(p.checked_add((2 - j).checked_mul(r)?)?)?;
        Some([0, c, e, 0, 0, d])
    }
}

/// Outcome of testing `U ~ phase * (gate (x) I_ancilla)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationResult {
    pub factorizes: bool,
    /// Determinant-one qubit gate, present when `factorizes`.
    pub qubit_gate: Option<Unitary>,
    /// `max |U - block (x) I|` for the best block.
    pub residual: f64,
    pub global_phase: C64,
}

impl FactorizationResult {
    /// `global_phase * qubit_gate`, i.e. the literal qubit block of `U`.
    pub fn block(&self) -> Option<ComplexMatrix> {
        self.qubit_gate.as_ref().map(|g| g.matrix().scale(self.global_phase))
    }
}

/// Frobenius-nearest `block (x) I` for an ancilla stored as the last bit.
fn ancilla_block(u: &ComplexMatrix) -> ComplexMatrix {
    let half = u.dim() / 2;
    ComplexMatrix::from_fn(half, |r, c| (u[(2 * r, 2 * c)] + u[(2 * r + 1, 2 * c + 1)]) * 0.5)
}

fn product_residual(u: &ComplexMatrix, block: &ComplexMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..u.dim() {
        for c in 0..u.dim() {
            let expect = if r % 2 == c % 2 { block[(r / 2, c / 2)] } else { ZERO };
            worst = worst.max((u[(r, c)] - expect).norm());
        }
    }
    worst
}

/// Tests whether `u` acts trivially on the ancilla of `ordering`.
pub fn detect_factorization(u: &Unitary, ordering: &QubitOrdering, tolerance: f64) -> Result<FactorizationResult> {
    if ordering.ancilla().is_none() {
        return Err(Error::InvalidOrdering("factorization needs an ancilla".into()));
    }
    if u.dim() != ordering.dim() {
        return Err(Error::Dimension { expected: ordering.dim(), found: u.dim() });
    }
    let block = ancilla_block(u.matrix());
    let residual = product_residual(u.matrix(), &block);
    let det = block.det();
    let phase = if det.norm() > 0.0 {
        C64::from_polar(1.0, atan2(det.im, det.re) / block.dim() as f64)
    } else {
        ONE
    };
    let factorizes = residual <= tolerance;
    let qubit_gate = factorizes.then(|| Unitary::new_unchecked(block.scale(phase.conj())));
    Ok(FactorizationResult { factorizes, qubit_gate, residual, global_phase: phase })
}

/// Smooth screening function whose zeros are exactly the factorization
/// times: `r(t)^2 = sum_sigma ||[U(t), I (x) sigma]||_F^2`.
struct CommutatorProfile {
    /// (eigenvalue gap, weight)
    groups: Vec<(f64, f64)>,
}

impl CommutatorProfile {
    fn new(spec: &SpectralDecomposition) -> Self {
        let v = spec.eigenvectors();
        let vals = spec.eigenvalues();
        let n = vals.len();
        let mut weight = vec![0.0; n * n];
        for which in 0..3 {
            // ancilla operator on the last bit
            let w = v.adjoint().matmul(&ancilla_pauli(n, which)).matmul(v);
            for (acc, z) in weight.iter_mut().zip(w.as_slice()) {
                *acc += z.norm_sqr();
            }
        }
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let gap = (vals[j] - vals[i]).abs();
                let w = 2.0 * weight[i * n + j];
                if gap > 1e-12 && w > 1e-24 {
                    pairs.push((gap, w));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut groups: Vec<(f64, f64)> = Vec::new();
        for (gap, w) in pairs {
            match groups.last_mut() {
                Some(last) if (gap - last.0).abs() <= 1e-10 * gap.max(1.0) => last.1 += w,
                _ => groups.push((gap, w)),
            }
        }
        Self { groups }
    }

    fn eval(&self, t: f64) -> f64 {
        let s: f64 = self
            .groups
            .iter()
            .map(|&(gap, w)| {
                let h = sin(gap * t / 2.0);
                4.0 * w * h * h
            })
            .sum();
        sqrt(s)
    }
}

fn ancilla_pauli(dim: usize, which: usize) -> ComplexMatrix {
    let p = crate::linalg::pauli(which);
    ComplexMatrix::from_fn(dim, |r, c| if r / 2 == c / 2 { p[(r % 2, c % 2)] } else { ZERO })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let inv_phi = (sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a).abs() <= rel_tol * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// A time at which the evolution factorizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanWindow {
    pub t: f64,
    pub residual: f64,
    /// Literal qubit block of `U(t)`, global phase included.
    pub gate: Unitary,
}

impl ScanWindow {
    /// True when the block is a multiple of the identity.
    pub fn is_trivial(&self, tol: f64) -> bool {
        let g = self.gate.matrix();
        let s = g[(0, 0)];
        g.max_abs_diff(&ComplexMatrix::identity(g.dim()).scale(s)) <= tol
    }
}

/// Finds every factorization time in `(0, t_max]` for any couplings.
///
/// Grid minima of the screening function are refined by golden-section
/// search and then confirmed with the exact residual.
pub fn scan_windows(g: &SpinGeometry, t_max: f64, grid: usize, tolerance: f64) -> Result<Vec<ScanWindow>> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::Domain(format!("t_max must be positive, got {t_max}")));
    }
    if grid < 3 {
        return Err(Error::Domain(format!("grid needs at least 3 points, got {grid}")));
    }
    let spec = SpectralDecomposition::new(&build_hamiltonian(g))?;
    let profile = CommutatorProfile::new(&spec);
    let dt = t_max / grid as f64;
    let samples: Vec<f64> = (0..=grid).map(|k| profile.eval(k as f64 * dt)).collect();

    let mut windows: Vec<ScanWindow> = Vec::new();
    for k in 1..=grid {
        let left = samples[k - 1];
        let here = samples[k];
        let right = if k < grid { samples[k + 1] } else { f64::INFINITY };
        if k == 1 && here >= right {
            continue;
        }
        if !(here <= left && here <= right) || here == left {
            continue;
        }
        let a = (k - 1) as f64 * dt;
        let b = if k < grid { (k + 1) as f64 * dt } else { t_max };
        let t = golden_section(|t| profile.eval(t), a, b, 1e-12).min(t_max);
        let u = spec.evolve(t);
        let fac = detect_factorization(&u, g.ordering(), tolerance)?;
        if let Some(block) = fac.block() {
            if windows.last().is_some_and(|w| (w.t - t).abs() <= 1e-8 * t_max) {
                continue;
            }
            windows.push(ScanWindow { t, residual: fac.residual, gate: Unitary::new_unchecked(block) });
        }
    }
    Ok(windows)
}

/// One factorization time of an equal-coupling geometry, tagged relative to
/// the first nontrivial gate `M` as `s * M^k` with `s` in `{1, -1, i, -i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodMember {
    /// `t / base_period`.
    pub multiple: f64,
    pub t: f64,
    pub residual: f64,
    pub tag: String,
    pub gate: Unitary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatePeriodFamily {
    pub geometry: String,
    pub coupling: f64,
    /// Earliest factorization time found.
    pub base_period: f64,
    pub members: Vec<PeriodMember>,
}

impl GatePeriodFamily {
    /// First member that is not a multiple of the identity.
    pub fn first_nontrivial(&self) -> Option<&PeriodMember> {
        self.members.iter().find(|m| !is_identity_tag(&m.tag))
    }
}

/// True for tags of the form `s*I`.
pub fn is_identity_tag(tag: &str) -> bool {
    matches!(tag, "I" | "-I" | "iI" | "-iI")
}

/// Writes `gate` as `s * base^k`, smallest `k` first.
pub fn tag_gate(gate: &ComplexMatrix, base: Option<(&ComplexMatrix, &str)>, tol: f64) -> String {
    let phases = [(ONE, ""), (-ONE, "-"), (C64::new(0.0, 1.0), "i"), (C64::new(0.0, -1.0), "-i")];
    let dim = gate.dim();
    let max_k = if base.is_some() { MAX_TAG_POWER } else { 0 };
    let mut power = ComplexMatrix::identity(dim);
    for k in 0..=max_k {
        for (s, prefix) in phases {
            if gate.max_abs_diff(&power.scale(s)) <= tol {
                return match (k, base) {
                    (0, _) => format!("{prefix}I"),
                    (1, Some((_, name))) => format!("{prefix}{name}"),
                    (_, Some((_, name))) => format!("{prefix}{name}^{k}"),
                    _ => unreachable!(),
                };
            }
        }
        if let Some((m, _)) = base {
            power = power.matmul(m);
        }
    }
    String::from("other")
}

/// Scans an equal-coupling geometry and tags each factorization window.
pub fn scan_mediated_gates(g: &SpinGeometry, t_max: f64, grid: usize) -> Result<GatePeriodFamily> {
    if !g.has_equal_couplings() {
        return Err(Error::Domain(format!(
            "couplings {:?} are unequal; a nontrivial mediated gate requires equal couplings \
             (for the linear chain J_a = J_b is the unique solution)",
            g.couplings()
        )));
    }
    let windows = scan_windows(g, t_max, grid, FACTORIZATION_TOLERANCE)?;
    let tag_tol = 1e-7;
    let base = windows.iter().find(|w| !w.is_trivial(tag_tol)).map(|w| w.gate.matrix().clone());
    let name = g.gate_name();
    let base_period = windows.first().map_or(0.0, |w| w.t);
    let members = windows
        .into_iter()
        .map(|w| PeriodMember {
            multiple: w.t / base_period,
            t: w.t,
            residual: w.residual,
            tag: tag_gate(w.gate.matrix(), base.as_ref().map(|m| (m, name.as_str())), tag_tol),
            gate: w.gate,
        })
        .collect();
    Ok(GatePeriodFamily { geometry: g.name(), coupling: g.couplings()[0], base_period, members })
}

/// First nontrivial mediated gate of an equal-coupling star with `n` qubits
/// (unit coupling). `n = 2` is the linear chain.
pub fn star_gate(n: usize) -> Result<Unitary> {
    let g = SpinGeometry::star(n, 1.0)?;
    let family = scan_mediated_gates(&g, 4.0 * PI, DEFAULT_SCAN_GRID)?;
    family
        .first_nontrivial()
        .map(|m| m.gate.clone())
        .ok_or_else(|| Error::Domain(format!("no nontrivial mediated gate for star-{n} up to t = 4 pi")))
}

/// The closed-form mediated gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MediatedGate {
    U2,
    U3,
    U2Squared,
    U3Cubed,
}

impl MediatedGate {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "U2" | "u2" => Ok(Self::U2),
            "U3" | "u3" => Ok(Self::U3),
            "U2^2" | "U2_sq" | "u2_sq" => Ok(Self::U2Squared),
            "U3^3" | "U3_cubed" | "u3_cubed" => Ok(Self::U3Cubed),
            _ => Err(Error::Unknown { kind: "mediated gate", name: name.into() }),
        }
    }
}

/// `e^{-ik pi/3} (cos(k pi/3) I - i sin(k pi/3) SWAP)` for k = 1, 2.
fn u2_power(k: u32) -> ComplexMatrix {
    let r3 = sqrt(3.0);
    // (I coefficient, SWAP coefficient)
    let (a, b) = match k {
        1 => (C64::new(0.25, -r3 / 4.0), C64::new(-0.75, -r3 / 4.0)),
        _ => (C64::new(0.25, r3 / 4.0), C64::new(-0.75, r3 / 4.0)),
    };
    let swap = [[1., 0., 0., 0.], [0., 0., 1., 0.], [0., 1., 0., 0.], [0., 0., 0., 1.]];
    ComplexMatrix::from_fn(4, |r, c| {
        let id = if r == c { a } else { ZERO };
        id + b * swap[r][c]
    })
}

fn u3_matrix() -> ComplexMatrix {
    let (d, o) = (-1.0 / 3.0, 2.0 / 3.0);
    let rows: [[f64; 8]; 8] = [
        [1., 0., 0., 0., 0., 0., 0., 0.],
        [0., d, o, 0., o, 0., 0., 0.],
        [0., o, d, 0., o, 0., 0., 0.],
        [0., 0., 0., d, 0., o, o, 0.],
        [0., o, o, 0., d, 0., 0., 0.],
        [0., 0., 0., o, 0., d, o, 0.],
        [0., 0., 0., o, 0., o, d, 0.],
        [0., 0., 0., 0., 0., 0., 0., 1.],
    ];
    ComplexMatrix::from_fn(8, |r, c| C64::new(0.0, rows[r][c]))
}

/// Closed-form matrix of a mediated gate.
pub fn mediated_gate_constant(tag: MediatedGate) -> Unitary {
    let m = match tag {
        MediatedGate::U2 => u2_power(1),
        MediatedGate::U2Squared => u2_power(2),
        MediatedGate::U3 => u3_matrix(),
        MediatedGate::U3Cubed => u3_matrix().scale(-ONE),
    };
    Unitary::new_unchecked(m)
}

/// Trace fidelity of the linear-chain gate when `J_2 = J_1 (1 + delta)`,
/// evaluated at the unperturbed period `4 pi / 3`.
pub fn detuning_fidelity(delta: f64) -> Result<f64> {
    if !(delta.abs() <= 1.0) {
        return Err(Error::Domain(format!("|delta| must be at most 1, got {delta}")));
    }
    let period = 4.0 * PI / 3.0;
    let u0 = evolve(&SpinGeometry::linear3(1.0, 1.0)?, period)?;
    let ud = evolve(&SpinGeometry::linear3(1.0, 1.0 + delta)?, period)?;
    Ok(ud.matrix().inner(u0.matrix()).norm() / u0.dim() as f64)
}

/// Sampled infidelity curve and its fitted `1 - F ~ k delta^2` coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessSweep {
    /// `(delta, 1 - F)`.
    pub samples: Vec<(f64, f64)>,
    pub coefficient: f64,
}

/// Least-squares `y = k x^2` through the origin.
pub fn fit_quadratic_through_origin(samples: &[(f64, f64)]) -> f64 {
    let num: f64 = samples.iter().map(|&(x, y)| x * x * y).sum();
    let den: f64 = samples.iter().map(|&(x, _)| x * x * x * x).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Evaluates `points` equally spaced detunings in `[0, delta_max]`.
pub fn robustness_sweep(delta_max: f64, points: usize) -> Result<RobustnessSweep> {
    if !(delta_max > 0.0 && delta_max <= 1.0) {
        return Err(Error::Domain(format!("delta_max must lie in (0, 1], got {delta_max}")));
    }
    if points < 2 {
        return Err(Error::Domain("robustness sweep needs at least 2 points".into()));
    }
    let mut samples = Vec::with_capacity(points);
    for k in 0..points {
        let d = delta_max * k as f64 / (points - 1) as f64;
        samples.push((d, 1.0 - detuning_fidelity(d)?));
    }
    let coefficient = fit_quadratic_through_origin(&samples);
    Ok(RobustnessSweep { samples, coefficient })
}

/// Two-qubit protocols compared in the bus-scaling report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Bell,
    Cnot,
    SqrtSwap,
    Swap,
    BGate,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [Self::Bell, Self::Cnot, Self::SqrtSwap, Self::Swap, Self::BGate];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bell => "bell",
            Self::Cnot => "cnot",
            Self::SqrtSwap => "sqrtswap",
            Self::Swap => "swap",
            Self::BGate => "bgate",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Unknown { kind: "protocol", name: name.into() })
    }

    /// (mediated depth, pairwise depth) with a single ancilla between the qubits.
    pub fn reference_depths(self) -> (u32, u32) {
        match self {
            Self::Bell => (2, 4),
            Self::Cnot => (4, 4),
            Self::SqrtSwap => (4, 3),
            Self::Swap => (5, 3),
            Self::BGate => (5, 5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRecord {
    pub bus_length: u32,
    pub protocol: Protocol,
    pub mediated_depth: u32,
    /// Gate time relative to a single-spin ancilla, from `J* ~ J / sqrt(N)`.
    pub mediated_time_factor: f64,
    /// Nearest-neighbour exchange gates, moving one qubit across the bus and
    /// back with a SWAP chain.
    pub pairwise_depth: u32,
}

/// Depth and time scaling for a bus of `n` spins (odd).
pub fn scaling_report(n: u32, protocol: Protocol) -> Result<ScalingRecord> {
    if n.is_multiple_of(2) {
        return Err(Error::Domain(format!("bus length must be odd, got {n}")));
    }
    let (mediated, pairwise) = protocol.reference_depths();
    Ok(ScalingRecord {
        bus_length: n,
        protocol,
        mediated_depth: mediated,
        mediated_time_factor: sqrt(n as f64),
        pairwise_depth: pairwise + 2 * (n - 1),
    })
}
