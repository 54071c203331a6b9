//! Eve's strategies: universal cloning, random guessing, intercept-resend.
//!
//! Two success metrics are reported side by side. The fidelity metric counts
//! a qubit as accepted with probability equal to its fidelity to the
//! password; the operational metric samples the actual SWAP-test outcomes of
//! the correlated `(clone, returned)` pair. For a fidelity-`F` clone a SWAP
//! test passes with `(1 + F)/2`, so the two metrics differ.

mod attack;
mod cloner;
pub mod oracle;

pub use attack::{
    joint_outcome_probabilities, cloning_success_bound, run_attack, strike_qubit, swap_test_povm, AttackScenario,
    AttackTally, AttackTrialResult, CloningTap, IntegrityMode, Metric, StrikePoint, Strategy,
};
pub use cloner::{asymmetric_fidelities, asymmetric_uqcm, asymmetric_weights, symmetric_uqcm, CloneOutput, Cloner};
