use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as Complex;

use super::state::{ALGEBRAIC_TOL, ONE, ZERO};
use crate::error::{QpError, Result};

/// A unitary on 1, 2 or 3 qubits. The first target is the most significant
/// bit of the gate's local index.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    arity: usize,
    matrix: Vec<Complex>,
}

fn r(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

impl Gate {
    pub fn new(arity: usize, matrix: Vec<Complex>) -> Result<Self> {
        if !(1..=3).contains(&arity) {
            return Err(QpError::ArityMismatch { expected: 3, got: arity });
        }
        let d = 1 << arity;
        if matrix.len() != d * d {
            return Err(QpError::InvalidState(format!("{} entries for a {d}x{d} gate", matrix.len())));
        }
        let gate = Self { arity, matrix };
        let dev = gate.unitarity_error();
        if dev > ALGEBRAIC_TOL {
            return Err(QpError::NotUnitary(dev));
        }
        Ok(gate)
    }

    fn permutation(arity: usize, perm: impl Fn(usize) -> usize) -> Self {
        let d = 1 << arity;
        let mut matrix = vec![ZERO; d * d];
        for col in 0..d {
            matrix[perm(col) * d + col] = ONE;
        }
        Self { arity, matrix }
    }

    pub fn identity(arity: usize) -> Self {
        Self::permutation(arity, |i| i)
    }

    pub fn hadamard() -> Self {
        let h = r(FRAC_1_SQRT_2);
        Self {
            arity: 1,
            matrix: vec![h, h, h, -h],
        }
    }

    pub fn pauli_x() -> Self {
        Self::permutation(1, |i| i ^ 1)
    }

    pub fn pauli_y() -> Self {
        Self {
            arity: 1,
            matrix: vec![ZERO, Complex::new(0.0, -1.0), Complex::new(0.0, 1.0), ZERO],
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            arity: 1,
            matrix: vec![ONE, ZERO, ZERO, -ONE],
        }
    }

    /// Phase gate `diag(1, i)`.
    pub fn s() -> Self {
        Self {
            arity: 1,
            matrix: vec![ONE, ZERO, ZERO, Complex::new(0.0, 1.0)],
        }
    }

    /// General single-qubit rotation
    /// `[[cos(t/2), -e^{il} sin(t/2)], [e^{ip} sin(t/2), e^{i(p+l)} cos(t/2)]]`.
    pub fn u3(theta: f64, phi: f64, lambda: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self {
            arity: 1,
            matrix: vec![
                r(c),
                -Complex::from_polar(s, lambda),
                Complex::from_polar(s, phi),
                Complex::from_polar(c, phi + lambda),
            ],
        }
    }

    pub fn swap() -> Self {
        Self::permutation(2, |i| (i >> 1) | ((i & 1) << 1))
    }

    /// Controlled-SWAP (Fredkin): targets are `[control, a, b]`; `a` and `b`
    /// are exchanged when the control is `|1>`.
    pub fn fredkin() -> Self {
        Self::permutation(3, |i| if i & 0b100 != 0 { 0b100 | (i & 1) << 1 | (i >> 1 & 1) } else { i })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrix(&self) -> &[Complex] {
        &self.matrix
    }

    pub fn dagger(&self) -> Self {
        let d = 1 << self.arity;
        let mut matrix = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                matrix[j * d + i] = self.matrix[i * d + j].conj();
            }
        }
        Self { arity: self.arity, matrix }
    }

    /// Largest entrywise deviation of `U U†` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let d = 1 << self.arity;
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let v: Complex = (0..d)
                    .map(|k| self.matrix[i * d + k] * self.matrix[j * d + k].conj())
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                err = err.max((v - want).norm());
            }
        }
        err
    }
}
