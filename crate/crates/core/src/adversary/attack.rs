//! Attack scenarios and their Monte Carlo execution.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::cloner::Cloner;
use crate::error::{check_range, QpError, Result};
use crate::protocol::{
    regenerate, setup_account, swap_test_branches, AcceptancePolicy, Channel, Interceptor, QubitDescription,
};
use crate::qcore::{fidelity, haar_random_qubit, Complex, DensityOp, Gate, PureState, QuantumState, SimRng};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    UqcmSymmetric,
    /// `asymmetry` in `[0, 1]`; 0 leaves the victim's qubit untouched.
    UqcmAsymmetric { asymmetry: f64 },
    /// Eve submits a Haar-random qubit and never touches the password.
    RandomGuess,
    /// Eve measures in a random Z or X basis and keeps and forwards the
    /// resulting eigenstate.
    InterceptResend,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrikePoint {
    AliceStation,
    InTransit,
    BobServer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    /// Per-qubit acceptance drawn with probability equal to the fidelity.
    Fidelity,
    /// Exact SWAP-test statistics of the joint (clone, returned) state.
    Operational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegrityMode {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackScenario {
    pub strategy: Strategy,
    pub strike_point: StrikePoint,
    pub n_qubits: usize,
    pub trials: usize,
    pub metric: Metric,
    pub channel: Channel,
    pub policy: AcceptancePolicy,
    pub integrity: IntegrityMode,
}

impl AttackScenario {
    /// Ideal channel, strict policy, exact integrity check.
    pub fn new(strategy: Strategy, strike_point: StrikePoint, n_qubits: usize, trials: usize, metric: Metric) -> Self {
        Self {
            strategy,
            strike_point,
            n_qubits,
            trials,
            metric,
            channel: Channel::ideal(),
            policy: AcceptancePolicy::strict(),
            integrity: IntegrityMode::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 1 {
            return Err(QpError::OutOfRange {
                name: "n_qubits",
                value: self.n_qubits as f64,
                range: ">= 1",
            });
        }
        if self.trials < 1 {
            return Err(QpError::OutOfRange {
                name: "trials",
                value: self.trials as f64,
                range: ">= 1",
            });
        }
        if let Strategy::UqcmAsymmetric { asymmetry } = self.strategy {
            check_range("asymmetry", asymmetry, 0.0, 1.0, "[0, 1]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AttackTrialResult {
    /// Alice's next verification passes.
    pub alice_survives: bool,
    /// Bob accepts Eve's submission.
    pub clone_accepted: bool,
    /// Alice's verification failed or Bob's integrity check fired.
    pub eve_detected: bool,
    /// Bob-server strikes only.
    pub integrity_fired: Option<bool>,
}

impl AttackTrialResult {
    /// Eve holds an accepted password and nobody noticed.
    pub fn eve_succeeds(&self) -> bool {
        self.clone_accepted && !self.eve_detected
    }
}

/// What Eve does to one qubit: input state in, joint `(kept, forwarded)` out.
pub fn strike_qubit(strategy: &Strategy, input: &DensityOp, rng: &mut SimRng) -> Result<DensityOp> {
    match *strategy {
        Strategy::UqcmSymmetric => Cloner::symmetric().apply(input)?.partial_trace(&[0, 1]),
        Strategy::UqcmAsymmetric { asymmetry } => Cloner::asymmetric(asymmetry)?.apply(input)?.partial_trace(&[0, 1]),
        Strategy::RandomGuess => Ok(haar_random_qubit(rng).to_density().tensor(input)),
        Strategy::InterceptResend => {
            let z_basis = rng.bernoulli(0.5);
            let mut joint: Option<DensityOp> = None;
            for k in 0..2 {
                let mut e = PureState::basis(1, k);
                if !z_basis {
                    e = e.apply_gate(&Gate::hadamard(), &[0])?;
                }
                let p = input.expectation(&e)?;
                let term = e.tensor(&e).to_density().scaled(p);
                match joint.as_mut() {
                    Some(j) => j.add_assign(&term),
                    None => joint = Some(term),
                }
            }
            Ok(joint.expect("two outcomes"))
        }
    }
}

/// Channel hook that runs Eve's strike on every passing qubit, keeps her
/// half and lets the other half continue to Bob.
pub struct CloningTap {
    pub strategy: Strategy,
    pub kept: Vec<DensityOp>,
}

impl CloningTap {
    pub fn new(strategy: Strategy) -> Self {
        Self {
            strategy,
            kept: Vec::new(),
        }
    }
}

impl Interceptor for CloningTap {
    fn intercept(&mut self, _index: usize, qubit: &DensityOp, rng: &mut SimRng) -> Result<DensityOp> {
        let joint = strike_qubit(&self.strategy, qubit, rng)?;
        self.kept.push(joint.partial_trace(&[0])?);
        joint.partial_trace(&[1])
    }
}

/// Outcome-0 POVM element of a SWAP test against `reference`, reconstructed
/// from the circuit by probing it with `|0>, |1>, |+>, |+i>`.
pub fn swap_test_povm(reference: &DensityOp) -> Result<[Complex; 4]> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let probes = [
        PureState::basis(1, 0),
        PureState::basis(1, 1),
        PureState::qubit(Complex::new(h, 0.0), Complex::new(h, 0.0))?,
        PureState::qubit(Complex::new(h, 0.0), Complex::new(0.0, h))?,
    ];
    let mut p = [0.0; 4];
    for (slot, probe) in p.iter_mut().zip(&probes) {
        *slot = swap_test_branches(&reference.tensor(&probe.to_density()), 0, 1)?.p0;
    }
    let mid = (p[0] + p[1]) / 2.0;
    let off = Complex::new(p[2] - mid, mid - p[3]);
    Ok([Complex::new(p[0], 0.0), off, off.conj(), Complex::new(p[1], 0.0)])
}

/// `P(first test = e, second test = a)` for the two qubits of `joint`, with
/// outcome-0 POVM elements `first` and `second`. Indexed `[e][a]`.
pub fn joint_outcome_probabilities(joint: &DensityOp, first: &[Complex; 4], second: &[Complex; 4]) -> [[f64; 2]; 2] {
    let complement = |m: &[Complex; 4]| [Complex::new(1.0, 0.0) - m[0], -m[1], -m[2], Complex::new(1.0, 0.0) - m[3]];
    let firsts = [*first, complement(first)];
    let seconds = [*second, complement(second)];
    let mut out = [[0.0; 2]; 2];
    for (e, x) in firsts.iter().enumerate() {
        for (a, y) in seconds.iter().enumerate() {
            // tr[(X ⊗ Y) rho] = sum X_ij Y_kl rho_(jl),(ik)
            let mut acc = Complex::default();
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            acc += x[i * 2 + j] * y[k * 2 + l] * joint.get(j * 2 + l, i * 2 + k);
                        }
                    }
                }
            }
            out[e][a] = acc.re.max(0.0);
        }
    }
    out
}

/// One password position at the moment of verification.
struct QubitRound {
    /// `(eve's submission, alice's submission)` as received by Bob.
    joint: DensityOp,
    eve_ref: DensityOp,
    alice_ref: DensityOp,
    eve_lost: bool,
    alice_lost: bool,
}

impl QubitRound {
    fn resolve(&self, metric: Metric, rng: &mut SimRng) -> Result<(bool, bool)> {
        let (eve_pass, alice_pass) = match metric {
            Metric::Fidelity => {
                let fe = fidelity(&self.eve_ref, &self.joint.partial_trace(&[0])?)?;
                let fa = fidelity(&self.alice_ref, &self.joint.partial_trace(&[1])?)?;
                (rng.bernoulli(fe), rng.bernoulli(fa))
            }
            Metric::Operational => {
                let eve_povm = swap_test_povm(&self.eve_ref)?;
                let alice_povm = if self.alice_ref == self.eve_ref {
                    eve_povm
                } else {
                    swap_test_povm(&self.alice_ref)?
                };
                let p = joint_outcome_probabilities(&self.joint, &eve_povm, &alice_povm);
                let u = rng.uniform() * (p[0][0] + p[0][1] + p[1][0] + p[1][1]);
                if u < p[0][0] {
                    (true, true)
                } else if u < p[0][0] + p[0][1] {
                    (true, false)
                } else if u < p[0][0] + p[0][1] + p[1][0] {
                    (false, true)
                } else {
                    (false, false)
                }
            }
        };
        Ok((eve_pass && !self.eve_lost, alice_pass && !self.alice_lost))
    }
}

fn lose(channel: &Channel, rng: &mut SimRng) -> bool {
    channel.loss_probability() > 0.0 && rng.bernoulli(channel.loss_probability())
}

/// Send qubit `target` of `joint` through the channel; lost qubits become
/// maximally mixed.
fn send(channel: &Channel, joint: DensityOp, target: usize, rng: &mut SimRng) -> Result<(DensityOp, bool)> {
    if lose(channel, rng) {
        let other = joint.partial_trace(&[1 - target])?;
        let mm = DensityOp::maximally_mixed(1);
        let replaced = if target == 0 { mm.tensor(&other) } else { other.tensor(&mm) };
        return Ok((replaced, true));
    }
    Ok((channel.apply_noise(&joint, target)?, false))
}

/// Honest submission of a fresh description through the channel.
fn honest_submission(channel: &Channel, d: &QubitDescription, rng: &mut SimRng) -> Result<(DensityOp, bool)> {
    if lose(channel, rng) {
        return Ok((DensityOp::maximally_mixed(1), true));
    }
    Ok((channel.apply_noise(&d.density(), 0)?, false))
}

/// Condition the kept half of `joint` on the outcome of projecting the
/// forwarded half onto `target` (`pass`) or its complement.
fn condition_on_check(joint: &DensityOp, target: &PureState, pass: bool) -> Result<DensityOp> {
    let proj = if pass { target.clone() } else { target.orthogonal()? };
    // rotate so that `proj` is |0>, then project the forwarded qubit
    let (c1, c2) = (proj.amplitudes()[0], proj.amplitudes()[1]);
    let u = Gate::new(1, vec![c1.conj(), c2.conj(), -c2, c1])?;
    let rotated = joint.apply_gate(&u, &[1])?;
    rotated.project(1, 0)?.1.partial_trace(&[0])
}

fn run_trial(scenario: &AttackScenario, rng: &mut SimRng) -> Result<AttackTrialResult> {
    let ch = &scenario.channel;
    let (record, _alice) = setup_account(scenario.n_qubits, rng)?;
    let descs = record.descriptions();
    let mut rounds = Vec::with_capacity(scenario.n_qubits);
    let mut integrity_fired = None;

    match scenario.strike_point {
        StrikePoint::AliceStation => {
            for d in descs {
                let joint = strike_qubit(&scenario.strategy, &d.density(), rng)?;
                let (joint, eve_lost) = send(ch, joint, 0, rng)?;
                let (joint, alice_lost) = send(ch, joint, 1, rng)?;
                let r = d.density();
                rounds.push(QubitRound {
                    joint,
                    eve_ref: r.clone(),
                    alice_ref: r,
                    eve_lost,
                    alice_lost,
                });
            }
        }
        StrikePoint::InTransit => {
            for d in descs {
                // Alice's submission is hit after channel noise; the forwarded
                // half completes her verification, the kept half is sent later.
                let (sent, alice_lost) = honest_submission(ch, d, rng)?;
                let joint = strike_qubit(&scenario.strategy, &sent, rng)?;
                let (joint, eve_lost) = send(ch, joint, 0, rng)?;
                let r = d.density();
                rounds.push(QubitRound {
                    joint,
                    eve_ref: r.clone(),
                    alice_ref: r,
                    eve_lost,
                    alice_lost,
                });
            }
        }
        StrikePoint::BobServer => {
            let mut kept = Vec::with_capacity(descs.len());
            let mut fired = false;
            for d in descs {
                let joint = strike_qubit(&scenario.strategy, &d.density(), rng)?;
                let target = d.state();
                let f = fidelity(&target, &joint.partial_trace(&[1])?)?;
                let pass = match scenario.integrity {
                    IntegrityMode::Exact => f >= 1.0 - 1e-9,
                    IntegrityMode::Sampled => rng.bernoulli(f),
                };
                fired |= !pass;
                kept.push(match scenario.integrity {
                    IntegrityMode::Exact => joint.partial_trace(&[0])?,
                    IntegrityMode::Sampled => condition_on_check(&joint, &target, pass)?,
                });
            }
            integrity_fired = Some(fired);
            // a fired check makes Bob reissue; Eve's copy then faces the new password
            let active = if fired { regenerate(&record, rng)?.0 } else { record.clone() };
            for (clone, d) in kept.into_iter().zip(active.descriptions()) {
                let (eve_sub, eve_lost) = {
                    let placeholder = DensityOp::maximally_mixed(1);
                    let (j, lost) = send(ch, clone.tensor(&placeholder), 0, rng)?;
                    (j.partial_trace(&[0])?, lost)
                };
                let (alice_sub, alice_lost) = honest_submission(ch, d, rng)?;
                let r = d.density();
                rounds.push(QubitRound {
                    joint: eve_sub.tensor(&alice_sub),
                    eve_ref: r.clone(),
                    alice_ref: r,
                    eve_lost,
                    alice_lost,
                });
            }
        }
    }

    let n = scenario.n_qubits;
    let (mut eve_passes, mut alice_passes) = (0, 0);
    for round in &rounds {
        let (e, a) = round.resolve(scenario.metric, rng)?;
        eve_passes += usize::from(e);
        alice_passes += usize::from(a);
    }
    let alice_survives = scenario.policy.accepts(alice_passes, n);
    Ok(AttackTrialResult {
        alice_survives,
        clone_accepted: scenario.policy.accepts(eve_passes, n),
        eve_detected: !alice_survives || integrity_fired == Some(true),
        integrity_fired,
    })
}

/// Run every trial of `scenario` on its own child stream of `rng`.
pub fn run_attack(scenario: &AttackScenario, rng: &SimRng) -> Result<Vec<AttackTrialResult>> {
    scenario.validate()?;
    (0..scenario.trials)
        .into_par_iter()
        .map(|t| run_trial(scenario, &mut rng.fork(t as u64)))
        .collect()
}

/// Counts over a batch of trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AttackTally {
    pub trials: usize,
    pub successes: usize,
    pub clone_accepted: usize,
    pub alice_survived: usize,
    pub detected: usize,
    pub integrity_fired: usize,
}

impl AttackTally {
    pub fn from_results(results: &[AttackTrialResult]) -> Self {
        results.iter().fold(Self::default(), |mut t, r| {
            t.trials += 1;
            t.successes += usize::from(r.eve_succeeds());
            t.clone_accepted += usize::from(r.clone_accepted);
            t.alice_survived += usize::from(r.alice_survives);
            t.detected += usize::from(r.eve_detected);
            t.integrity_fired += usize::from(r.integrity_fired == Some(true));
            t
        })
    }
}

/// Eve's success ceiling `(5/6)^(2N)` against the symmetric cloner.
pub fn cloning_success_bound(n_qubits: usize) -> Result<f64> {
    if n_qubits < 1 {
        return Err(QpError::OutOfRange {
            name: "n_qubits",
            value: n_qubits as f64,
            range: ">= 1",
        });
    }
    Ok((25.0f64 / 36.0).powi(n_qubits as i32))
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::UqcmSymmetric => "uqcm_symmetric",
            Strategy::UqcmAsymmetric { .. } => "uqcm_asymmetric",
            Strategy::RandomGuess => "random_guess",
            Strategy::InterceptResend => "intercept_resend",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::UqcmAsymmetric { asymmetry } => write!(f, "uqcm_asymmetric({asymmetry})"),
            other => f.write_str(other.label()),
        }
    }
}

impl StrikePoint {
    pub fn label(&self) -> &'static str {
        match self {
            StrikePoint::AliceStation => "alice_station",
            StrikePoint::InTransit => "in_transit",
            StrikePoint::BobServer => "bob_server",
        }
    }
}

impl fmt::Display for StrikePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for StrikePoint {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "alice_station" => Ok(StrikePoint::AliceStation),
            "in_transit" => Ok(StrikePoint::InTransit),
            "bob_server" => Ok(StrikePoint::BobServer),
            other => Err(format!(
                "unknown strike point '{other}' (expected alice_station, in_transit, bob_server)"
            )),
        }
    }
}

impl Metric {
    pub fn label(&self) -> &'static str {
        match self {
            Metric::Fidelity => "fidelity",
            Metric::Operational => "operational",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fidelity" | "fidelity_metric" => Ok(Metric::Fidelity),
            "operational" | "operational_metric" => Ok(Metric::Operational),
            other => Err(format!("unknown metric '{other}' (expected fidelity, operational)")),
        }
    }
}
