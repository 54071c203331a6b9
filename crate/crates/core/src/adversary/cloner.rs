//! 1 -> 2 universal cloning machines as explicit 2 -> 8 isometries.
//!
//! Output qubit order is `(kept clone, forwarded clone, ancilla)`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{check_range, QpError, Result};
use crate::qcore::{fidelity, Complex, DensityOp, PureState};

/// Joint cloner output and the fidelities of its two clones to the input.
#[derive(Clone, Debug)]
pub struct CloneOutput {
    pub joint: DensityOp,
    /// Fidelity of the clone Eve keeps.
    pub f_clone: f64,
    /// Fidelity of the clone returned to its owner.
    pub f_forwarded: f64,
}

impl CloneOutput {
    pub fn kept_marginal(&self) -> DensityOp {
        self.joint.partial_trace(&[0]).expect("3-qubit joint")
    }

    pub fn forwarded_marginal(&self) -> DensityOp {
        self.joint.partial_trace(&[1]).expect("3-qubit joint")
    }
}

/// A cloning isometry: column `j` is the image of `|j>`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cloner {
    columns: [[Complex; 8]; 2],
}

fn r(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

impl Cloner {
    /// Symmetric machine:
    /// `|0> -> sqrt(2/3)|00>|1> + sqrt(1/3)|Psi+>|0>`,
    /// `|1> -> sqrt(2/3)|11>|0> + sqrt(1/3)|Psi+>|1>`.
    pub fn symmetric() -> Self {
        let big = r((2.0f64 / 3.0).sqrt());
        let small = r((1.0f64 / 6.0).sqrt());
        let mut c = [[Complex::default(); 8]; 2];
        c[0][0b001] = big;
        c[0][0b010] = small;
        c[0][0b100] = small;
        c[1][0b110] = big;
        c[1][0b011] = small;
        c[1][0b101] = small;
        Self { columns: c }
    }

    /// Asymmetric family `a |j>_fwd |Phi+>_(kept,anc) + b |j>_kept |Phi+>_(fwd,anc)`
    /// with `a^2 + ab + b^2 = 1` and `t = b / (a + b)`.
    ///
    /// `t = 0` forwards the input untouched; `t = 1/2` is the symmetric point.
    pub fn asymmetric(t: f64) -> Result<Self> {
        let (a, b) = asymmetric_weights(t)?;
        let h = FRAC_1_SQRT_2;
        let mut c = [[Complex::default(); 8]; 2];
        for (j, col) in c.iter_mut().enumerate() {
            for k in 0..2 {
                // |k>_kept |j>_fwd |k>_anc
                col[4 * k + 2 * j + k] += r(a * h);
                // |j>_kept |k>_fwd |k>_anc
                col[4 * j + 2 * k + k] += r(b * h);
            }
        }
        Ok(Self { columns: c })
    }

    /// `V rho V†` for a single-qubit input.
    pub fn apply(&self, input: &DensityOp) -> Result<DensityOp> {
        if input.n_qubits() != 1 {
            return Err(QpError::DimensionMismatch(input.n_qubits(), 1));
        }
        let mut m = vec![Complex::default(); 64];
        for i in 0..2 {
            for j in 0..2 {
                let w = input.get(i, j);
                if w == Complex::default() {
                    continue;
                }
                let (ci, cj) = (&self.columns[i], &self.columns[j]);
                for row in 0..8 {
                    if ci[row] == Complex::default() {
                        continue;
                    }
                    let left = w * ci[row];
                    for col in 0..8 {
                        m[row * 8 + col] += left * cj[col].conj();
                    }
                }
            }
        }
        Ok(DensityOp::from_raw(3, m))
    }

    /// Run the machine on a pure input and report both clone fidelities.
    pub fn clone_state(&self, input: &PureState) -> Result<CloneOutput> {
        if input.n_qubits() != 1 {
            return Err(QpError::DimensionMismatch(input.n_qubits(), 1));
        }
        if (input.norm_sqr() - 1.0).abs() > 1e-9 {
            return Err(QpError::InvalidState("cloner input is not normalized".into()));
        }
        let joint = self.apply(&input.to_density())?;
        let f_clone = fidelity(input, &joint.partial_trace(&[0])?)?;
        let f_forwarded = fidelity(input, &joint.partial_trace(&[1])?)?;
        Ok(CloneOutput {
            joint,
            f_clone,
            f_forwarded,
        })
    }
}

/// `(a, b)` with `a^2 + ab + b^2 = 1` and `b / (a + b) = t`.
pub fn asymmetric_weights(t: f64) -> Result<(f64, f64)> {
    check_range("asymmetry", t, 0.0, 1.0, "[0, 1]")?;
    let s = 1.0 / (1.0 - t + t * t).sqrt();
    Ok(((1.0 - t) * s, t * s))
}

/// Closed-form clone fidelities `(f_clone, f_forwarded) = (1 - a^2/2, 1 - b^2/2)`.
pub fn asymmetric_fidelities(t: f64) -> Result<(f64, f64)> {
    let (a, b) = asymmetric_weights(t)?;
    Ok((1.0 - a * a / 2.0, 1.0 - b * b / 2.0))
}

pub fn symmetric_uqcm(input: &PureState) -> Result<CloneOutput> {
    Cloner::symmetric().clone_state(input)
}

pub fn asymmetric_uqcm(input: &PureState, asymmetry: f64) -> Result<CloneOutput> {
    Cloner::asymmetric(asymmetry)?.clone_state(input)
}
