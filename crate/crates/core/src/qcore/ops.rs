//! Gate application, measurement and composition, shared by both state kinds.

use std::f64::consts::PI;

use super::gate::Gate;
use super::rng::SimRng;
use super::state::{
    apply_local_vector, bit_pos, conjugate_local, snap_probability, validate_targets, Complex, DensityOp,
    PureState, ZERO,
};
use crate::error::{QpError, Result};

/// Result of a projective computational-basis measurement on one qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement<S> {
    pub outcome: u8,
    pub post_state: S,
    /// Born probability of the sampled outcome.
    pub probability: f64,
}

pub trait QuantumState: Clone + Sized {
    fn n_qubits(&self) -> usize;

    fn apply_gate(&self, gate: &Gate, targets: &[usize]) -> Result<Self>;

    /// Exact `(p0, p1)` for qubit `index`; values within 1e-13 of 0 or 1 are
    /// snapped so that certain outcomes are exactly certain.
    fn measure_probabilities(&self, index: usize) -> Result<(f64, f64)>;

    /// Condition on `outcome` at `index`. Returns the branch probability and
    /// the renormalized post-measurement state.
    fn project(&self, index: usize, outcome: u8) -> Result<(f64, Self)>;

    fn tensor(&self, other: &Self) -> Self;

    fn measure_qubit(&self, index: usize, rng: &mut SimRng) -> Result<Measurement<Self>> {
        let (p0, _) = self.measure_probabilities(index)?;
        // p0 is snapped, so a zero-probability branch can never be drawn
        let outcome = if rng.uniform() < p0 { 0 } else { 1 };
        let (probability, post_state) = self.project(index, outcome)?;
        Ok(Measurement {
            outcome,
            post_state,
            probability,
        })
    }
}

fn check_gate_targets(gate: &Gate, targets: &[usize], n_qubits: usize) -> Result<()> {
    if targets.len() != gate.arity() {
        return Err(QpError::ArityMismatch {
            expected: gate.arity(),
            got: targets.len(),
        });
    }
    validate_targets(targets, n_qubits)
}

fn check_outcome(outcome: u8) -> Result<()> {
    if outcome > 1 {
        return Err(QpError::InvalidState(format!("outcome {outcome} is not a bit")));
    }
    Ok(())
}

impl QuantumState for PureState {
    fn n_qubits(&self) -> usize {
        PureState::n_qubits(self)
    }

    fn apply_gate(&self, gate: &Gate, targets: &[usize]) -> Result<Self> {
        check_gate_targets(gate, targets, self.n_qubits())?;
        let mut amps = self.amplitudes().to_vec();
        apply_local_vector(&mut amps, self.n_qubits(), gate.matrix(), targets);
        Ok(PureState::from_raw(self.n_qubits(), amps))
    }

    fn measure_probabilities(&self, index: usize) -> Result<(f64, f64)> {
        validate_targets(&[index], self.n_qubits())?;
        let bit = 1 << bit_pos(self.n_qubits(), index);
        let p1: f64 = self
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let p1 = snap_probability(p1);
        Ok((1.0 - p1, p1))
    }

    fn project(&self, index: usize, outcome: u8) -> Result<(f64, Self)> {
        check_outcome(outcome)?;
        let (p0, p1) = self.measure_probabilities(index)?;
        let p = if outcome == 0 { p0 } else { p1 };
        if p == 0.0 {
            return Err(QpError::ZeroProbabilityBranch { outcome });
        }
        let bit = 1 << bit_pos(self.n_qubits(), index);
        let keep_set = if outcome == 0 { 0 } else { bit };
        let norm: f64 = self
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == keep_set)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let amps = self
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| if i & bit == keep_set { a / norm } else { ZERO })
            .collect();
        Ok((p, PureState::from_raw(self.n_qubits(), amps)))
    }

    fn tensor(&self, other: &Self) -> Self {
        let amps = self
            .amplitudes()
            .iter()
            .flat_map(|a| other.amplitudes().iter().map(move |b| a * b))
            .collect();
        PureState::from_raw(self.n_qubits() + other.n_qubits(), amps)
    }
}

impl QuantumState for DensityOp {
    fn n_qubits(&self) -> usize {
        DensityOp::n_qubits(self)
    }

    fn apply_gate(&self, gate: &Gate, targets: &[usize]) -> Result<Self> {
        check_gate_targets(gate, targets, self.n_qubits())?;
        let mut m = self.matrix().to_vec();
        conjugate_local(&mut m, self.n_qubits(), gate.matrix(), targets);
        Ok(DensityOp::from_raw(self.n_qubits(), m))
    }

    fn measure_probabilities(&self, index: usize) -> Result<(f64, f64)> {
        validate_targets(&[index], self.n_qubits())?;
        let d = self.dim();
        let bit = 1 << bit_pos(self.n_qubits(), index);
        let (mut p0, mut p1) = (0.0, 0.0);
        for i in 0..d {
            let w = self.get(i, i).re;
            if i & bit == 0 {
                p0 += w;
            } else {
                p1 += w;
            }
        }
        let p1 = snap_probability(p1 / (p0 + p1));
        Ok((1.0 - p1, p1))
    }

    fn project(&self, index: usize, outcome: u8) -> Result<(f64, Self)> {
        check_outcome(outcome)?;
        let (p0, p1) = self.measure_probabilities(index)?;
        let p = if outcome == 0 { p0 } else { p1 };
        if p == 0.0 {
            return Err(QpError::ZeroProbabilityBranch { outcome });
        }
        let d = self.dim();
        let bit = 1 << bit_pos(self.n_qubits(), index);
        let keep_set = if outcome == 0 { 0 } else { bit };
        let mut m = vec![ZERO; d * d];
        let mut tr = 0.0;
        for r in (0..d).filter(|r| r & bit == keep_set) {
            tr += self.get(r, r).re;
            for c in (0..d).filter(|c| c & bit == keep_set) {
                m[r * d + c] = self.get(r, c);
            }
        }
        m.iter_mut().for_each(|x| *x /= tr);
        Ok((p, DensityOp::from_raw(self.n_qubits(), m)))
    }

    fn tensor(&self, other: &Self) -> Self {
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut m = vec![ZERO; d * d];
        for ar in 0..da {
            for ac in 0..da {
                let a = self.get(ar, ac);
                if a == ZERO {
                    continue;
                }
                for br in 0..db {
                    for bc in 0..db {
                        m[(ar * db + br) * d + ac * db + bc] = a * other.get(br, bc);
                    }
                }
            }
        }
        DensityOp::from_raw(self.n_qubits() + other.n_qubits(), m)
    }
}

pub fn apply_gate<S: QuantumState>(state: &S, gate: &Gate, targets: &[usize]) -> Result<S> {
    state.apply_gate(gate, targets)
}

pub fn measure_qubit<S: QuantumState>(state: &S, index: usize, rng: &mut SimRng) -> Result<Measurement<S>> {
    state.measure_qubit(index, rng)
}

pub fn measure_probabilities<S: QuantumState>(state: &S, index: usize) -> Result<(f64, f64)> {
    state.measure_probabilities(index)
}

/// `a ⊗ b`, with `a` on the lower qubit indices.
pub fn tensor<S: QuantumState>(a: &S, b: &S) -> S {
    a.tensor(b)
}

pub fn partial_trace(rho: &DensityOp, keep: &[usize]) -> Result<DensityOp> {
    rho.partial_trace(keep)
}

/// Haar-random qubit `cos(t/2)|0> + e^{il} sin(t/2)|1>` with `cos t` uniform on
/// `[-1, 1]` and `l` uniform on `[0, 2pi)`. The global phase makes `c1` real
/// and nonnegative.
pub fn haar_random_qubit(rng: &mut SimRng) -> PureState {
    let cos_theta = 2.0 * rng.uniform() - 1.0;
    let lambda = 2.0 * PI * rng.uniform();
    // half-angle identities avoid an acos
    let c1 = ((1.0 + cos_theta) / 2.0).sqrt();
    let s = ((1.0 - cos_theta) / 2.0).sqrt();
    PureState::from_raw(1, vec![Complex::new(c1, 0.0), Complex::from_polar(s, lambda)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::fidelity;

    fn bell() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(2, vec![Complex::new(s, 0.0), ZERO, ZERO, Complex::new(s, 0.0)]).unwrap()
    }

    #[test]
    fn hadamard_on_zero() {
        let plus = PureState::zero(1).apply_gate(&Gate::hadamard(), &[0]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for a in plus.amplitudes() {
            assert!((a - Complex::new(s, 0.0)).norm() < 1e-15);
        }
        let minus = PureState::basis(1, 1).apply_gate(&Gate::hadamard(), &[0]).unwrap();
        assert!((minus.amplitudes()[1] + Complex::new(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gate_target_errors() {
        let s = PureState::zero(2);
        assert!(matches!(
            s.apply_gate(&Gate::hadamard(), &[2]),
            Err(QpError::IndexOutOfRange { index: 2, n_qubits: 2 })
        ));
        assert!(matches!(
            s.apply_gate(&Gate::swap(), &[0]),
            Err(QpError::ArityMismatch { expected: 2, got: 1 })
        ));
        assert!(matches!(s.apply_gate(&Gate::swap(), &[1, 1]), Err(QpError::DuplicateTarget(1))));
        assert!(s.measure_probabilities(5).is_err());
    }

    #[test]
    fn gate_on_second_qubit_uses_msb_ordering() {
        // X on qubit 1 of |00> gives |01> = index 1
        let s = PureState::zero(2).apply_gate(&Gate::pauli_x(), &[1]).unwrap();
        assert_eq!(s, PureState::basis(2, 1));
    }

    #[test]
    fn fredkin_with_active_control_swaps_registers() {
        let phi = PureState::qubit(Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)).unwrap();
        let psi = PureState::basis(1, 1);
        let reg = PureState::basis(1, 1).tensor(&phi).tensor(&psi);
        let out = reg.apply_gate(&Gate::fredkin(), &[0, 1, 2]).unwrap();
        let want = PureState::basis(1, 1).tensor(&psi).tensor(&phi);
        assert!((fidelity(&out, &want).unwrap() - 1.0).abs() < 1e-12);
        // inactive control: identity
        let reg0 = PureState::zero(1).tensor(&phi).tensor(&psi);
        assert_eq!(reg0.apply_gate(&Gate::fredkin(), &[0, 1, 2]).unwrap(), reg0);
    }

    #[test]
    fn tensor_basis_ordering() {
        let s = PureState::zero(1).tensor(&PureState::basis(1, 1));
        assert_eq!(s, PureState::basis(2, 1));
        let a = DensityOp::diagonal(1, &[0.3, 0.7]).unwrap();
        let b = DensityOp::maximally_mixed(2);
        assert!((a.tensor(&b).trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_reduces_to_factor() {
        let phi = PureState::qubit(Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)).unwrap();
        let psi = PureState::qubit(Complex::new(0.28, 0.0), Complex::new(0.96, 0.0)).unwrap();
        let joint = phi.tensor(&psi).to_density();
        let first = joint.partial_trace(&[0]).unwrap();
        assert!(first.max_abs_diff(&phi.to_density()) < 1e-12);
        assert!((first.purity() - 1.0).abs() < 1e-9);
        let second = joint.partial_trace(&[1]).unwrap();
        assert!(second.max_abs_diff(&psi.to_density()) < 1e-12);
    }

    #[test]
    fn bell_marginals_are_maximally_mixed() {
        let rho = bell().to_density();
        for q in 0..2 {
            let m = rho.partial_trace(&[q]).unwrap();
            assert!(m.max_abs_diff(&DensityOp::maximally_mixed(1)) < 1e-12);
        }
    }

    #[test]
    fn measuring_definite_qubit_is_deterministic() {
        let phi = PureState::qubit(Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)).unwrap();
        let s = PureState::zero(1).tensor(&phi);
        let mut rng = SimRng::new(3);
        for _ in 0..50 {
            let m = s.measure_qubit(0, &mut rng).unwrap();
            assert_eq!(m.outcome, 0);
            assert_eq!(m.probability, 1.0);
            assert!((fidelity(&m.post_state, &s).unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.project(0, 1), Err(QpError::ZeroProbabilityBranch { outcome: 1 }));
    }

    #[test]
    fn maximally_mixed_probabilities() {
        let (p0, p1) = DensityOp::maximally_mixed(1).measure_probabilities(0).unwrap();
        assert_eq!((p0, p1), (0.5, 0.5));
    }

    #[test]
    fn density_projection_matches_pure_projection() {
        let s = bell();
        let (p, post) = s.project(1, 1).unwrap();
        let (pd, post_d) = s.to_density().project(1, 1).unwrap();
        assert!((p - pd).abs() < 1e-12);
        assert!(post.to_density().max_abs_diff(&post_d) < 1e-12);
        assert!((post_d.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_draws_are_normalized_with_real_first_amplitude() {
        let mut rng = SimRng::new(11);
        for _ in 0..1000 {
            let q = haar_random_qubit(&mut rng);
            assert!((q.norm_sqr() - 1.0).abs() < 1e-12);
            assert!(q.amplitudes()[0].im == 0.0 && q.amplitudes()[0].re >= 0.0);
        }
    }
}
