//! Single-qubit noise maps, applied to one qubit of any register.

use std::fmt;
use std::str::FromStr;

use super::state::{Complex, DensityOp, ONE, ZERO};
use crate::error::{check_range, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    Ideal,
    /// `rho -> (1-p) rho + p I/2`
    Depolarizing,
    /// `rho -> (1-p) rho + p Z rho Z`
    Dephasing,
    /// Decay `|1> -> |0>` with probability `p`.
    AmplitudeDamping,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::Ideal,
        NoiseKind::Depolarizing,
        NoiseKind::Dephasing,
        NoiseKind::AmplitudeDamping,
    ];

    pub fn label(self) -> &'static str {
        match self {
            NoiseKind::Ideal => "ideal",
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::Dephasing => "dephasing",
            NoiseKind::AmplitudeDamping => "amplitude_damping",
        }
    }

    /// Kraus operators (row-major 2x2) for strength `p`.
    pub fn kraus(self, p: f64) -> Result<Vec<Vec<Complex>>> {
        check_range("noise_strength", p, 0.0, 1.0, "[0, 1]")?;
        let r = |x: f64| Complex::new(x, 0.0);
        let ops = match self {
            NoiseKind::Ideal => vec![vec![ONE, ZERO, ZERO, ONE]],
            NoiseKind::Depolarizing => {
                // (1-p) rho + p I/2 = (1 - 3p/4) rho + (p/4)(X rho X + Y rho Y + Z rho Z)
                let a = r((1.0 - 0.75 * p).sqrt());
                let b = (p / 4.0).sqrt();
                vec![
                    vec![a, ZERO, ZERO, a],
                    vec![ZERO, r(b), r(b), ZERO],
                    vec![ZERO, Complex::new(0.0, -b), Complex::new(0.0, b), ZERO],
                    vec![r(b), ZERO, ZERO, r(-b)],
                ]
            }
            NoiseKind::Dephasing => {
                let a = r((1.0 - p).sqrt());
                let b = p.sqrt();
                vec![vec![a, ZERO, ZERO, a], vec![r(b), ZERO, ZERO, r(-b)]]
            }
            NoiseKind::AmplitudeDamping => vec![
                vec![ONE, ZERO, ZERO, r((1.0 - p).sqrt())],
                vec![ZERO, r(p.sqrt()), ZERO, ZERO],
            ],
        };
        Ok(ops)
    }

    pub fn apply(self, rho: &DensityOp, p: f64, target: usize) -> Result<DensityOp> {
        if self == NoiseKind::Ideal || p == 0.0 {
            // still range-check the inputs
            check_range("noise_strength", p, 0.0, 1.0, "[0, 1]")?;
            rho.partial_trace(&[target])?;
            return Ok(rho.clone());
        }
        rho.apply_kraus(&self.kraus(p)?, &[target])
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| format!("unknown noise kind '{s}' (expected ideal, depolarizing, dephasing, amplitude_damping)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::ops::QuantumState;
    use crate::qcore::state::{fidelity, PureState};

    fn completeness(kind: NoiseKind, p: f64) -> f64 {
        // sum K†K = I
        let ops = kind.kraus(p).unwrap();
        let mut acc = [ZERO; 4];
        for k in &ops {
            for i in 0..2 {
                for j in 0..2 {
                    acc[i * 2 + j] += (0..2).map(|m| k[m * 2 + i].conj() * k[m * 2 + j]).sum::<Complex>();
                }
            }
        }
        let id = [ONE, ZERO, ZERO, ONE];
        acc.iter().zip(id).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn kraus_sets_are_trace_preserving() {
        for kind in NoiseKind::ALL {
            for p in [0.0, 0.1, 0.5, 1.0] {
                assert!(completeness(kind, p) < 1e-12, "{kind} {p}");
            }
        }
    }

    #[test]
    fn depolarizing_matches_closed_form() {
        let phi = PureState::qubit(Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)).unwrap().to_density();
        let p = 0.3;
        let out = NoiseKind::Depolarizing.apply(&phi, p, 0).unwrap();
        let want = phi.mix(&DensityOp::maximally_mixed(1), 1.0 - p).unwrap();
        assert!(out.max_abs_diff(&want) < 1e-12);
        let full = NoiseKind::Depolarizing.apply(&phi, 1.0, 0).unwrap();
        assert!(full.max_abs_diff(&DensityOp::maximally_mixed(1)) < 1e-12);
    }

    #[test]
    fn dephasing_kills_coherence_at_half() {
        let plus = PureState::zero(1).apply_gate(&crate::qcore::gate::Gate::hadamard(), &[0]).unwrap();
        let out = NoiseKind::Dephasing.apply(&plus.to_density(), 0.5, 0).unwrap();
        assert!(out.max_abs_diff(&DensityOp::maximally_mixed(1)) < 1e-12);
    }

    #[test]
    fn amplitude_damping_decays_excited_state() {
        let one = PureState::basis(1, 1).to_density();
        let out = NoiseKind::AmplitudeDamping.apply(&one, 0.25, 0).unwrap();
        assert!((out.get(0, 0).re - 0.25).abs() < 1e-12);
        assert!((fidelity(&PureState::basis(1, 1), &out).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn acts_only_on_target_qubit() {
        let joint = PureState::zero(1).tensor(&PureState::basis(1, 1)).to_density();
        let out = NoiseKind::Depolarizing.apply(&joint, 1.0, 1).unwrap();
        let q0 = out.partial_trace(&[0]).unwrap();
        assert!(q0.max_abs_diff(&PureState::zero(1).to_density()) < 1e-12);
        assert!(out.partial_trace(&[1]).unwrap().max_abs_diff(&DensityOp::maximally_mixed(1)) < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_strength() {
        let rho = DensityOp::maximally_mixed(1);
        assert!(NoiseKind::Depolarizing.apply(&rho, 1.5, 0).is_err());
        assert!(NoiseKind::Ideal.apply(&rho, -0.1, 0).is_err());
    }

    #[test]
    fn labels_round_trip() {
        for k in NoiseKind::ALL {
            assert_eq!(k.label().parse::<NoiseKind>().unwrap(), k);
        }
        assert!("thermal".parse::<NoiseKind>().is_err());
    }
}
