//! Dense pure and mixed states.
//!
//! Ordering: qubit 0 is the most significant bit of the amplitude index, so
//! `|q0 q1 ... q(n-1)>` sits at index `q0·2^(n-1) + ... + q(n-1)`. The first
//! factor of a tensor product occupies the low qubit indices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QpError, Result};

pub type Complex = Complex64;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);

/// Tolerance for algebraic identities (normalization, hermiticity, unitarity).
pub const ALGEBRAIC_TOL: f64 = 1e-9;

/// Born probabilities this close to 0 or 1 are snapped to the exact value.
pub(crate) const SNAP_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<Complex>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOp {
    n_qubits: usize,
    /// Row-major `2^n x 2^n`.
    m: Vec<Complex>,
}

fn dim_of(n_qubits: usize) -> usize {
    1usize << n_qubits
}

fn check_index(index: usize, n_qubits: usize) -> Result<()> {
    if index < n_qubits {
        Ok(())
    } else {
        Err(QpError::IndexOutOfRange { index, n_qubits })
    }
}

pub(crate) fn bit_pos(n_qubits: usize, q: usize) -> usize {
    n_qubits - 1 - q
}

impl PureState {
    pub fn new(n_qubits: usize, amps: Vec<Complex>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(QpError::InvalidState("a register needs at least one qubit".into()));
        }
        if amps.len() != dim_of(n_qubits) {
            return Err(QpError::InvalidState(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                n_qubits
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QpError::InvalidState("non-finite amplitude".into()));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QpError::InvalidState(format!("squared norm {norm}")));
        }
        Ok(Self { n_qubits, amps })
    }

    /// `c1|0> + c2|1>`.
    pub fn qubit(c1: Complex, c2: Complex) -> Result<Self> {
        Self::new(1, vec![c1, c2])
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        assert!(n_qubits > 0 && index < dim_of(n_qubits));
        let mut amps = vec![ZERO; dim_of(n_qubits)];
        amps[index] = ONE;
        Self { n_qubits, amps }
    }

    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub(crate) fn from_raw(n_qubits: usize, amps: Vec<Complex>) -> Self {
        debug_assert_eq!(amps.len(), dim_of(n_qubits));
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex> {
        if self.n_qubits != other.n_qubits {
            return Err(QpError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// The orthogonal single-qubit state `(-c2*, c1*)`.
    pub fn orthogonal(&self) -> Result<PureState> {
        if self.n_qubits != 1 {
            return Err(QpError::DimensionMismatch(self.n_qubits, 1));
        }
        Ok(Self::from_raw(1, vec![-self.amps[1].conj(), self.amps[0].conj()]))
    }

    pub fn to_density(&self) -> DensityOp {
        let d = self.amps.len();
        let mut m = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                m[r * d + c] = self.amps[r] * self.amps[c].conj();
            }
        }
        DensityOp { n_qubits: self.n_qubits, m }
    }
}

impl DensityOp {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(n_qubits: usize, matrix: Vec<Complex>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(QpError::InvalidState("a register needs at least one qubit".into()));
        }
        let d = dim_of(n_qubits);
        if matrix.len() != d * d {
            return Err(QpError::InvalidState(format!(
                "{} entries for a {d}x{d} matrix",
                matrix.len()
            )));
        }
        let rho = Self { n_qubits, m: matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(n_qubits: usize, m: Vec<Complex>) -> Self {
        debug_assert_eq!(m.len(), dim_of(n_qubits) * dim_of(n_qubits));
        Self { n_qubits, m }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = dim_of(n_qubits);
        let mut m = vec![ZERO; d * d];
        for i in 0..d {
            m[i * d + i] = Complex::new(1.0 / d as f64, 0.0);
        }
        Self { n_qubits, m }
    }

    /// Diagonal density operator from real weights (must sum to 1).
    pub fn diagonal(n_qubits: usize, weights: &[f64]) -> Result<Self> {
        let d = dim_of(n_qubits);
        if weights.len() != d {
            return Err(QpError::InvalidState(format!("{} weights for dimension {d}", weights.len())));
        }
        let mut m = vec![ZERO; d * d];
        for (i, w) in weights.iter().enumerate() {
            m[i * d + i] = Complex::new(*w, 0.0);
        }
        Self::new(n_qubits, m)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        dim_of(self.n_qubits)
    }

    pub fn matrix(&self) -> &[Complex] {
        &self.m
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.m[row * self.dim() + col]
    }

    pub fn trace(&self) -> f64 {
        let d = self.dim();
        (0..d).map(|i| self.m[i * d + i].re).sum()
    }

    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.m.iter().map(|x| x.norm_sqr()).sum()
    }

    /// `<psi|rho|psi>`.
    pub fn expectation(&self, psi: &PureState) -> Result<f64> {
        if psi.n_qubits != self.n_qubits {
            return Err(QpError::DimensionMismatch(self.n_qubits, psi.n_qubits));
        }
        let d = self.dim();
        let a = &psi.amps;
        let mut acc = ZERO;
        for r in 0..d {
            if a[r] == ZERO {
                continue;
            }
            let row: Complex = (0..d).map(|c| self.m[r * d + c] * a[c]).sum();
            acc += a[r].conj() * row;
        }
        Ok(acc.re)
    }

    /// Largest entrywise deviation from `self = self†`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                err = err.max((self.m[r * d + c] - self.m[c * d + r].conj()).norm());
            }
        }
        err
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.to_matrix().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QpError::InvalidState("non-finite entry".into()));
        }
        let herm = self.hermiticity_error();
        if herm > ALGEBRAIC_TOL {
            return Err(QpError::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QpError::InvalidState(format!("trace {tr}")));
        }
        let min_ev = self.eigenvalues()[0];
        if min_ev < -ALGEBRAIC_TOL {
            return Err(QpError::InvalidState(format!("negative eigenvalue {min_ev:.3e}")));
        }
        Ok(())
    }

    pub(crate) fn to_matrix(&self) -> DMatrix<Complex> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.m)
    }

    /// Largest entrywise distance to another operator of the same size.
    pub fn max_abs_diff(&self, other: &DensityOp) -> f64 {
        assert_eq!(self.n_qubits, other.n_qubits);
        self.m
            .iter()
            .zip(&other.m)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `w·self + (1-w)·other`.
    pub fn mix(&self, other: &DensityOp, w: f64) -> Result<DensityOp> {
        if self.n_qubits != other.n_qubits {
            return Err(QpError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        let m = self
            .m
            .iter()
            .zip(&other.m)
            .map(|(a, b)| a * w + b * (1.0 - w))
            .collect();
        Ok(Self::from_raw(self.n_qubits, m))
    }

    pub(crate) fn scaled(&self, s: f64) -> DensityOp {
        Self::from_raw(self.n_qubits, self.m.iter().map(|x| x * s).collect())
    }

    pub(crate) fn add_assign(&mut self, other: &DensityOp) {
        for (a, b) in self.m.iter_mut().zip(&other.m) {
            *a += b;
        }
    }

    /// Reduced state on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOp> {
        if keep.is_empty() {
            return Err(QpError::EmptyKeep);
        }
        for (i, &q) in keep.iter().enumerate() {
            check_index(q, self.n_qubits)?;
            if keep[..i].contains(&q) {
                return Err(QpError::DuplicateTarget(q));
            }
        }
        let n = self.n_qubits;
        let d = self.dim();
        let k = keep.len();
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let spread = |local: usize, qubits: &[usize]| -> usize {
            let len = qubits.len();
            qubits.iter().enumerate().fold(0, |acc, (i, &q)| {
                if local >> (len - 1 - i) & 1 == 1 {
                    acc | 1 << bit_pos(n, q)
                } else {
                    acc
                }
            })
        };
        let kd = 1usize << k;
        let kept_off: Vec<usize> = (0..kd).map(|j| spread(j, keep)).collect();
        let traced_off: Vec<usize> = (0..1usize << traced.len()).map(|j| spread(j, &traced)).collect();
        let mut out = vec![ZERO; kd * kd];
        for r in 0..kd {
            for c in 0..kd {
                let mut acc = ZERO;
                for &t in &traced_off {
                    acc += self.m[(kept_off[r] | t) * d + (kept_off[c] | t)];
                }
                out[r * kd + c] = acc;
            }
        }
        Ok(Self::from_raw(k, out))
    }

    /// Conjugation by a local Kraus set: `sum_k K rho K†` on `targets`.
    pub fn apply_kraus(&self, kraus: &[Vec<Complex>], targets: &[usize]) -> Result<DensityOp> {
        validate_targets(targets, self.n_qubits)?;
        let mut acc = Self::from_raw(self.n_qubits, vec![ZERO; self.m.len()]);
        for k in kraus {
            if k.len() != dim_of(targets.len()) * dim_of(targets.len()) {
                return Err(QpError::ArityMismatch {
                    expected: targets.len(),
                    got: k.len(),
                });
            }
            let mut term = self.m.clone();
            conjugate_local(&mut term, self.n_qubits, k, targets);
            for (a, b) in acc.m.iter_mut().zip(term) {
                *a += b;
            }
        }
        Ok(acc)
    }
}

pub(crate) fn validate_targets(targets: &[usize], n_qubits: usize) -> Result<()> {
    for (i, &q) in targets.iter().enumerate() {
        check_index(q, n_qubits)?;
        if targets[..i].contains(&q) {
            return Err(QpError::DuplicateTarget(q));
        }
    }
    Ok(())
}

/// Index offsets of the `2^k` local basis states, and all base indices with
/// the target bits cleared.
fn local_layout(n_qubits: usize, targets: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let k = targets.len();
    let offsets: Vec<usize> = (0..1usize << k)
        .map(|j| {
            targets.iter().enumerate().fold(0, |acc, (i, &q)| {
                if j >> (k - 1 - i) & 1 == 1 {
                    acc | 1 << bit_pos(n_qubits, q)
                } else {
                    acc
                }
            })
        })
        .collect();
    let mask: usize = targets.iter().map(|&q| 1usize << bit_pos(n_qubits, q)).sum();
    let bases = (0..dim_of(n_qubits)).filter(|i| i & mask == 0).collect();
    (offsets, bases)
}

/// `v[start + i*stride] <- sum_j M[i][j] v[start + j*stride]` on every local block.
fn apply_strided(
    data: &mut [Complex],
    start: usize,
    stride: usize,
    offsets: &[usize],
    bases: &[usize],
    matrix: &[Complex],
    conj: bool,
) {
    let ld = offsets.len();
    let mut buf = vec![ZERO; ld];
    for &b in bases {
        for (j, off) in offsets.iter().enumerate() {
            buf[j] = data[start + (b | off) * stride];
        }
        for (i, off) in offsets.iter().enumerate() {
            let row = &matrix[i * ld..(i + 1) * ld];
            let v: Complex = if conj {
                row.iter().zip(&buf).map(|(m, x)| m.conj() * x).sum()
            } else {
                row.iter().zip(&buf).map(|(m, x)| m * x).sum()
            };
            data[start + (b | off) * stride] = v;
        }
    }
}

pub(crate) fn apply_local_vector(amps: &mut [Complex], n_qubits: usize, matrix: &[Complex], targets: &[usize]) {
    let (offsets, bases) = local_layout(n_qubits, targets);
    apply_strided(amps, 0, 1, &offsets, &bases, matrix, false);
}

/// `rho <- M rho M†` for a local operator `M`.
pub(crate) fn conjugate_local(m: &mut [Complex], n_qubits: usize, matrix: &[Complex], targets: &[usize]) {
    let d = dim_of(n_qubits);
    let (offsets, bases) = local_layout(n_qubits, targets);
    // M acting on each column
    for c in 0..d {
        apply_strided(m, c, d, &offsets, &bases, matrix, false);
    }
    // (rho M†)_{r,c} = sum_k rho_{r,k} conj(M_{c,k}): conj(M) acting on each row
    for r in 0..d {
        apply_strided(m, r * d, 1, &offsets, &bases, matrix, true);
    }
}

/// Borrowed view over either state kind, for mixed-kind operations.
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a PureState),
    Mixed(&'a DensityOp),
}

impl<'a> From<&'a PureState> for StateRef<'a> {
    fn from(s: &'a PureState) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityOp> for StateRef<'a> {
    fn from(s: &'a DensityOp) -> Self {
        StateRef::Mixed(s)
    }
}

impl StateRef<'_> {
    pub fn n_qubits(&self) -> usize {
        match self {
            StateRef::Pure(p) => p.n_qubits,
            StateRef::Mixed(m) => m.n_qubits,
        }
    }
}

/// Squared-overlap fidelity.
///
/// Pure/pure gives `|<a|b>|^2`, pure/mixed gives `<a|rho|a>`, and mixed/mixed
/// uses Uhlmann's `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, so all three forms
/// agree on pure inputs.
pub fn fidelity<'a, 'b>(a: impl Into<StateRef<'a>>, b: impl Into<StateRef<'b>>) -> Result<f64> {
    let (a, b) = (a.into(), b.into());
    if a.n_qubits() != b.n_qubits() {
        return Err(QpError::DimensionMismatch(a.n_qubits(), b.n_qubits()));
    }
    let f = match (a, b) {
        (StateRef::Pure(x), StateRef::Pure(y)) => x.inner(y)?.norm_sqr(),
        (StateRef::Pure(x), StateRef::Mixed(r)) | (StateRef::Mixed(r), StateRef::Pure(x)) => r.expectation(x)?,
        (StateRef::Mixed(r), StateRef::Mixed(s)) => uhlmann(r, s),
    };
    Ok(f.clamp(0.0, 1.0))
}

fn uhlmann(rho: &DensityOp, sigma: &DensityOp) -> f64 {
    let eig = rho.to_matrix().symmetric_eigen();
    let sqrt_vals = eig.eigenvalues.map(|l| Complex::new(l.max(0.0).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    let sqrt_rho = v * DMatrix::from_diagonal(&sqrt_vals) * v.adjoint();
    let inner = &sqrt_rho * sigma.to_matrix() * &sqrt_rho;
    // symmetrize against round-off before the Hermitian solver
    let inner = (&inner + inner.adjoint()) * Complex::new(0.5, 0.0);
    let tr: f64 = inner.symmetric_eigenvalues().iter().map(|l| l.max(0.0).sqrt()).sum();
    tr * tr
}

pub(crate) fn snap_probability(p: f64) -> f64 {
    if p < SNAP_TOL {
        0.0
    } else if p > 1.0 - SNAP_TOL {
        1.0
    } else {
        p
    }
}
