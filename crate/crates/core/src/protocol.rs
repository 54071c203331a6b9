//! Account setup, password transmission and SWAP-test verification.
//!
//! Bob keeps a classical description of every password qubit. That is what
//! lets him hold a perfect copy without violating no-cloning, re-prepare his
//! register after every test, and audit it against an offline reference.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_range, QpError, Result};
use crate::qcore::{fidelity, haar_random_qubit, Complex, DensityOp, Gate, NoiseKind, PureState, QuantumState, SimRng};

/// Bob's classical record of one password qubit, `c1|0> + c2|1>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitDescription {
    pub c1: Complex,
    pub c2: Complex,
}

impl QubitDescription {
    pub fn from_state(state: &PureState) -> Result<Self> {
        if state.n_qubits() != 1 {
            return Err(QpError::DimensionMismatch(state.n_qubits(), 1));
        }
        let a = state.amplitudes();
        Ok(Self { c1: a[0], c2: a[1] })
    }

    pub fn state(&self) -> PureState {
        PureState::qubit(self.c1, self.c2).expect("descriptions are normalized")
    }

    pub fn density(&self) -> DensityOp {
        self.state().to_density()
    }
}

/// Opaque account handle; carries no information about the password.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AccountId(pub u64);

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "acct-{:016x}", self.0)
    }
}

/// Bob's side of an account.
#[derive(Clone, Debug, PartialEq)]
pub struct PasswordRecord {
    account_id: AccountId,
    descriptions: Vec<QubitDescription>,
    stored_copy: Vec<DensityOp>,
    offline_copy: Vec<QubitDescription>,
}

impl PasswordRecord {
    fn fresh(account_id: AccountId, descriptions: Vec<QubitDescription>) -> Self {
        Self {
            account_id,
            stored_copy: descriptions.iter().map(QubitDescription::density).collect(),
            offline_copy: descriptions.clone(),
            descriptions,
        }
    }

    pub fn account_id(&self) -> AccountId {
        self.account_id
    }

    pub fn len(&self) -> usize {
        self.descriptions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptions.is_empty()
    }

    pub fn descriptions(&self) -> &[QubitDescription] {
        &self.descriptions
    }

    /// The online quantum register Bob verifies against.
    pub fn stored_copy(&self) -> &[DensityOp] {
        &self.stored_copy
    }

    pub fn offline_copy(&self) -> &[QubitDescription] {
        &self.offline_copy
    }

    /// Copy of the record with one stored qubit replaced (tampering, decay).
    pub fn with_stored_qubit(&self, index: usize, rho: DensityOp) -> Result<Self> {
        if index >= self.len() {
            return Err(QpError::IndexOutOfRange {
                index,
                n_qubits: self.len(),
            });
        }
        if rho.n_qubits() != 1 {
            return Err(QpError::DimensionMismatch(rho.n_qubits(), 1));
        }
        let mut out = self.clone();
        out.stored_copy[index] = rho;
        Ok(out)
    }

    /// Re-prepare the online register from the descriptions.
    pub fn refreshed(&self) -> Self {
        Self::fresh(self.account_id, self.descriptions.clone())
    }
}

/// Alice's side: one single-qubit state per password position.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumPassword {
    qubits: Vec<DensityOp>,
    lost: Vec<usize>,
}

impl QuantumPassword {
    pub fn new(qubits: Vec<DensityOp>) -> Result<Self> {
        if let Some(q) = qubits.iter().find(|q| q.n_qubits() != 1) {
            return Err(QpError::DimensionMismatch(q.n_qubits(), 1));
        }
        Ok(Self { qubits, lost: Vec::new() })
    }

    pub fn from_pure(states: &[PureState]) -> Result<Self> {
        Self::new(states.iter().map(PureState::to_density).collect())
    }

    pub fn qubits(&self) -> &[DensityOp] {
        &self.qubits
    }

    /// Positions lost in the last transmission.
    pub fn lost(&self) -> &[usize] {
        &self.lost
    }

    pub fn is_lost(&self, index: usize) -> bool {
        self.lost.contains(&index)
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }
}

/// A noisy, lossy quantum channel between Alice and Bob.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Channel {
    noise_kind: NoiseKind,
    noise_strength: f64,
    loss_probability: f64,
}

impl Default for Channel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl Channel {
    pub fn ideal() -> Self {
        Self {
            noise_kind: NoiseKind::Ideal,
            noise_strength: 0.0,
            loss_probability: 0.0,
        }
    }

    pub fn new(noise_kind: NoiseKind, noise_strength: f64, loss_probability: f64) -> Result<Self> {
        check_range("noise_strength", noise_strength, 0.0, 1.0, "[0, 1]")?;
        check_range("loss_probability", loss_probability, 0.0, 1.0, "[0, 1]")?;
        Ok(Self {
            noise_kind,
            noise_strength,
            loss_probability,
        })
    }

    pub fn noise_kind(&self) -> NoiseKind {
        self.noise_kind
    }

    pub fn noise_strength(&self) -> f64 {
        self.noise_strength
    }

    pub fn loss_probability(&self) -> f64 {
        self.loss_probability
    }

    /// Noise map on qubit `target` of any register (no loss).
    pub fn apply_noise(&self, rho: &DensityOp, target: usize) -> Result<DensityOp> {
        self.noise_kind.apply(rho, self.noise_strength, target)
    }
}

/// Hook run on every transmitted qubit after channel noise.
pub trait Interceptor {
    fn intercept(&mut self, index: usize, qubit: &DensityOp, rng: &mut SimRng) -> Result<DensityOp>;
}

/// Send a password through `channel`.
///
/// Each qubit is independently lost with the channel's loss probability
/// (replaced by the maximally mixed state and listed in the returned
/// indices); surviving qubits go through the noise map.
pub fn transmit(password: &QuantumPassword, channel: &Channel, rng: &mut SimRng) -> Result<(QuantumPassword, Vec<usize>)> {
    transmit_inner(password, channel, None, rng)
}

pub fn transmit_intercepted(
    password: &QuantumPassword,
    channel: &Channel,
    interceptor: &mut dyn Interceptor,
    rng: &mut SimRng,
) -> Result<(QuantumPassword, Vec<usize>)> {
    transmit_inner(password, channel, Some(interceptor), rng)
}

fn transmit_inner(
    password: &QuantumPassword,
    channel: &Channel,
    mut interceptor: Option<&mut dyn Interceptor>,
    rng: &mut SimRng,
) -> Result<(QuantumPassword, Vec<usize>)> {
    let mut qubits = Vec::with_capacity(password.len());
    let mut lost = Vec::new();
    for (i, q) in password.qubits.iter().enumerate() {
        let mut out = if channel.loss_probability > 0.0 && rng.bernoulli(channel.loss_probability) {
            lost.push(i);
            DensityOp::maximally_mixed(1)
        } else {
            channel.apply_noise(q, 0)?
        };
        if let Some(hook) = interceptor.as_deref_mut() {
            out = hook.intercept(i, &out, rng)?;
        }
        qubits.push(out);
    }
    Ok((
        QuantumPassword {
            qubits,
            lost: lost.clone(),
        },
        lost,
    ))
}

/// Bob's acceptance rule over per-qubit SWAP-test outcomes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcceptancePolicy {
    threshold_fraction: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyMode {
    Strict,
    Threshold,
}

impl Default for AcceptancePolicy {
    fn default() -> Self {
        Self::strict()
    }
}

impl AcceptancePolicy {
    /// Every qubit must return outcome 0.
    pub fn strict() -> Self {
        Self { threshold_fraction: 1.0 }
    }

    /// At least `fraction` of the qubits must return outcome 0. A fraction
    /// of exactly 1 is the strict policy.
    pub fn threshold(fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(QpError::OutOfRange {
                name: "threshold_fraction",
                value: fraction,
                range: "(0, 1]",
            });
        }
        Ok(Self {
            threshold_fraction: fraction,
        })
    }

    pub fn mode(&self) -> PolicyMode {
        if self.threshold_fraction == 1.0 {
            PolicyMode::Strict
        } else {
            PolicyMode::Threshold
        }
    }

    pub fn threshold_fraction(&self) -> f64 {
        self.threshold_fraction
    }

    /// Minimum number of passing qubits out of `n`.
    pub fn required_passes(&self, n: usize) -> usize {
        ((self.threshold_fraction * n as f64) - 1e-9).ceil().max(0.0) as usize
    }

    pub fn accepts(&self, passes: usize, n: usize) -> bool {
        passes >= self.required_passes(n)
    }

    /// Exact acceptance probability for independent per-qubit pass
    /// probabilities (Poisson-binomial tail).
    pub fn acceptance_probability(&self, pass_probs: &[f64]) -> f64 {
        let n = pass_probs.len();
        let need = self.required_passes(n);
        if need == n {
            return pass_probs.iter().product();
        }
        // dist[k] = P(k passes so far)
        let mut dist = vec![0.0; n + 1];
        dist[0] = 1.0;
        for (i, &p) in pass_probs.iter().enumerate() {
            for k in (0..=i + 1).rev() {
                let stay = dist[k] * (1.0 - p);
                let up = if k > 0 { dist[k - 1] * p } else { 0.0 };
                dist[k] = stay + up;
            }
        }
        dist[need..].iter().sum::<f64>().clamp(0.0, 1.0)
    }
}

impl FromStr for PolicyMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "strict" => Ok(PolicyMode::Strict),
            "threshold" => Ok(PolicyMode::Threshold),
            other => Err(format!("unknown policy mode '{other}' (expected strict, threshold)")),
        }
    }
}

/// Both branches of a SWAP test on two single-qubit registers of a larger
/// state. Post states have the ancilla removed; a zero-probability branch
/// has no post state.
#[derive(Clone, Debug)]
pub struct SwapTestBranches {
    pub p0: f64,
    pub p1: f64,
    pub post0: Option<DensityOp>,
    pub post1: Option<DensityOp>,
}

/// Ancilla `|0>`, Hadamard, controlled-SWAP of qubits `a` and `b`, Hadamard,
/// then both measurement branches of the ancilla, computed exactly.
pub fn swap_test_branches(state: &DensityOp, a: usize, b: usize) -> Result<SwapTestBranches> {
    let n = state.n_qubits();
    for q in [a, b] {
        if q >= n {
            return Err(QpError::IndexOutOfRange { index: q, n_qubits: n });
        }
    }
    if a == b {
        return Err(QpError::DuplicateTarget(a));
    }
    let reg = PureState::zero(1).to_density().tensor(state);
    let h = Gate::hadamard();
    let reg = reg
        .apply_gate(&h, &[0])?
        .apply_gate(&Gate::fredkin(), &[0, a + 1, b + 1])?
        .apply_gate(&h, &[0])?;
    let (p0, p1) = reg.measure_probabilities(0)?;
    let rest: Vec<usize> = (1..=n).collect();
    let branch = |outcome: u8, p: f64| -> Result<Option<DensityOp>> {
        if p == 0.0 {
            return Ok(None);
        }
        let (_, post) = reg.project(0, outcome)?;
        Ok(Some(post.partial_trace(&rest)?))
    };
    Ok(SwapTestBranches {
        post0: branch(0, p0)?,
        post1: branch(1, p1)?,
        p0,
        p1,
    })
}

#[derive(Clone, Debug)]
pub struct SwapTestOutcome {
    pub outcome: u8,
    /// Joint state of the `(phi, psi)` registers after the measurement.
    pub post_joint: DensityOp,
    pub p0: f64,
}

/// SWAP test between two single-qubit states with a sampled ancilla outcome.
/// For pure inputs `p0 = (1 + |<phi|psi>|^2) / 2`.
pub fn swap_test_pair(phi: &DensityOp, psi: &DensityOp, rng: &mut SimRng) -> Result<SwapTestOutcome> {
    for q in [phi, psi] {
        if q.n_qubits() != 1 {
            return Err(QpError::DimensionMismatch(q.n_qubits(), 1));
        }
    }
    let br = swap_test_branches(&phi.tensor(psi), 0, 1)?;
    let outcome = if rng.uniform() < br.p0 { 0 } else { 1 };
    let post_joint = if outcome == 0 { br.post0 } else { br.post1 }.expect("sampled branch has nonzero probability");
    Ok(SwapTestOutcome {
        outcome,
        post_joint,
        p0: br.p0,
    })
}

#[derive(Clone, Debug)]
pub struct VerificationResult {
    pub accepted: bool,
    /// Ancilla outcome per qubit; lost qubits are recorded as 1.
    pub per_qubit_outcomes: Vec<u8>,
    /// Exact acceptance probability under the policy, before sampling.
    pub p_accept_analytic: f64,
    pub per_qubit_p0: Vec<f64>,
    pub post_alice: QuantumPassword,
    pub post_bob: PasswordRecord,
}

/// Bob's verification of a submitted password against his stored copy.
///
/// After an outcome-0 test on non-identical inputs the two registers are
/// entangled. Bob discards his and re-prepares from the descriptions; Alice
/// gets back the reduced state of her register.
pub fn verify(
    record: &PasswordRecord,
    submitted: &QuantumPassword,
    policy: &AcceptancePolicy,
    rng: &mut SimRng,
) -> Result<VerificationResult> {
    if record.len() != submitted.len() {
        return Err(QpError::LengthMismatch {
            record: record.len(),
            submitted: submitted.len(),
        });
    }
    let n = record.len();
    let mut outcomes = Vec::with_capacity(n);
    let mut p0s = Vec::with_capacity(n);
    let mut returned = Vec::with_capacity(n);
    for (i, (stored, sub)) in record.stored_copy.iter().zip(&submitted.qubits).enumerate() {
        if submitted.is_lost(i) {
            outcomes.push(1);
            p0s.push(0.0);
            returned.push(sub.clone());
            continue;
        }
        let t = swap_test_pair(stored, sub, rng)?;
        outcomes.push(t.outcome);
        p0s.push(t.p0);
        returned.push(t.post_joint.partial_trace(&[1])?);
    }
    let passes = outcomes.iter().filter(|&&o| o == 0).count();
    Ok(VerificationResult {
        accepted: policy.accepts(passes, n),
        per_qubit_outcomes: outcomes,
        p_accept_analytic: policy.acceptance_probability(&p0s),
        per_qubit_p0: p0s,
        post_alice: QuantumPassword {
            qubits: returned,
            lost: submitted.lost.clone(),
        },
        post_bob: record.refreshed(),
    })
}

/// New account with `n_qubits` Haar-random password qubits. Issuance is
/// noiseless: Alice's copy equals Bob's descriptions exactly.
pub fn setup_account(n_qubits: usize, rng: &mut SimRng) -> Result<(PasswordRecord, QuantumPassword)> {
    if n_qubits < 1 {
        return Err(QpError::OutOfRange {
            name: "n_qubits",
            value: n_qubits as f64,
            range: ">= 1",
        });
    }
    let descriptions = draw_descriptions(n_qubits, rng);
    let id = AccountId(rand::RngCore::next_u64(rng));
    issue(PasswordRecord::fresh(id, descriptions))
}

/// Fresh password for an existing account; all old descriptions are dropped.
pub fn regenerate(record: &PasswordRecord, rng: &mut SimRng) -> Result<(PasswordRecord, QuantumPassword)> {
    let descriptions = draw_descriptions(record.len(), rng);
    issue(PasswordRecord::fresh(record.account_id, descriptions))
}

fn draw_descriptions(n: usize, rng: &mut SimRng) -> Vec<QubitDescription> {
    (0..n)
        .map(|_| QubitDescription::from_state(&haar_random_qubit(rng)).expect("single qubit"))
        .collect()
}

fn issue(record: PasswordRecord) -> Result<(PasswordRecord, QuantumPassword)> {
    let alice = QuantumPassword::new(record.descriptions.iter().map(QubitDescription::density).collect())?;
    Ok((record, alice))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrityReport {
    pub intact: bool,
    pub per_qubit_fidelity: Vec<f64>,
}

/// Exact comparison of the online register with the offline descriptions.
/// Intact iff every fidelity is at least `1 - 1e-9`.
pub fn bob_integrity_check(record: &PasswordRecord) -> IntegrityReport {
    let per_qubit_fidelity: Vec<f64> = record
        .stored_copy
        .iter()
        .zip(&record.offline_copy)
        .map(|(rho, d)| fidelity(&d.state(), rho).expect("single-qubit states"))
        .collect();
    IntegrityReport {
        intact: per_qubit_fidelity.iter().all(|&f| f >= 1.0 - 1e-9),
        per_qubit_fidelity,
    }
}

/// Sampled variant: each stored qubit is measured in the basis
/// `{|d>, |d_perp>}` of its description; any `d_perp` outcome flags tampering.
/// The returned record holds the post-measurement register.
pub fn bob_integrity_check_sampled(record: &PasswordRecord, rng: &mut SimRng) -> (IntegrityReport, PasswordRecord) {
    let exact = bob_integrity_check(record);
    let mut out = record.clone();
    let mut intact = true;
    for (i, &f) in exact.per_qubit_fidelity.iter().enumerate() {
        let d = &record.offline_copy[i];
        if rng.bernoulli(f) {
            out.stored_copy[i] = d.density();
        } else {
            intact = false;
            out.stored_copy[i] = d.state().orthogonal().expect("single qubit").to_density();
        }
    }
    (
        IntegrityReport {
            intact,
            per_qubit_fidelity: exact.per_qubit_fidelity,
        },
        out,
    )
}
