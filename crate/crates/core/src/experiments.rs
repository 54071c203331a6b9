//! Seeded numerical studies: success versus password length, minimal length
//! for a detection target, and the noise/threshold tradeoff.

use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::adversary::{oracle, cloning_success_bound, run_attack, AttackScenario, AttackTally, Metric, StrikePoint, Strategy};
use crate::error::{check_range, QpError, Result};
use crate::protocol::{setup_account, transmit, verify, AcceptancePolicy, Channel};
use crate::qcore::{NoiseKind, SimRng};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

pub const MAX_SWEEP_QUBITS: usize = 20;
pub const MIN_SWEEP_TRIALS: usize = 1000;
pub const DEFAULT_TRIALS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Point estimate with a 95% Wilson score interval.
pub fn estimate_with_ci(successes: usize, trials: usize) -> Result<Estimate> {
    if trials < 1 || successes > trials {
        return Err(QpError::OutOfRange {
            name: "successes",
            value: successes as f64,
            range: "0 <= successes <= trials, trials >= 1",
        });
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let ci_low = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let ci_high = if successes == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    Ok(Estimate {
        estimate: p,
        ci_low,
        ci_high,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n_qubits: usize,
    pub metric: Metric,
    pub trials: usize,
    pub successes: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub analytic: f64,
}

impl SweepRow {
    pub fn covers_analytic(&self) -> bool {
        self.ci_low <= self.analytic && self.analytic <= self.ci_high
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Fraction of rows whose CI contains the analytic value.
    pub fn coverage(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.covers_analytic()).count() as f64 / self.rows.len() as f64
    }
}

/// Exact single-qubit success of the symmetric cloner under `metric`.
pub fn per_qubit_success(metric: Metric) -> f64 {
    static OPERATIONAL: OnceLock<f64> = OnceLock::new();
    match metric {
        Metric::Fidelity => 25.0 / 36.0,
        Metric::Operational => *OPERATIONAL.get_or_init(oracle::symmetric_operational_success),
    }
}

/// Analytic N-qubit success: `(5/6)^(2N)` for the fidelity metric, the
/// brute-force single-qubit probability to the N-th power otherwise.
pub fn analytic_success(n_qubits: usize, metric: Metric) -> Result<f64> {
    match metric {
        Metric::Fidelity => cloning_success_bound(n_qubits),
        Metric::Operational => {
            cloning_success_bound(n_qubits)?;
            Ok(per_qubit_success(metric).powi(n_qubits as i32))
        }
    }
}

fn point_rng(seed: u64, n: usize, metric: Metric) -> SimRng {
    SimRng::new(seed).fork_named(&format!("sweep/{}/{n}", metric.label()))
}

/// Symmetric-cloner attack at Alice's station for every N in `n_min..=n_max`.
pub fn sweep_password_length(n_min: usize, n_max: usize, trials: usize, metric: Metric, seed: u64) -> Result<SweepTable> {
    if !(1 <= n_min && n_min <= n_max && n_max <= MAX_SWEEP_QUBITS) {
        return Err(QpError::OutOfRange {
            name: "n_qubits range",
            value: n_max as f64,
            range: "1 <= min <= max <= 20",
        });
    }
    if trials < MIN_SWEEP_TRIALS {
        return Err(QpError::OutOfRange {
            name: "trials",
            value: trials as f64,
            range: ">= 1000",
        });
    }
    let rows = (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let scenario = AttackScenario::new(Strategy::UqcmSymmetric, StrikePoint::AliceStation, n, trials, metric);
            let tally = AttackTally::from_results(&run_attack(&scenario, &point_rng(seed, n, metric))?);
            let est = estimate_with_ci(tally.successes, trials)?;
            Ok(SweepRow {
                n_qubits: n,
                metric,
                trials,
                successes: tally.successes,
                estimate: est.estimate,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
                analytic: analytic_success(n, metric)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows })
}

/// Smallest N whose analytic Eve success is at most `1 - target_detection`.
pub fn min_length_for_detection(target_detection: f64, metric: Metric) -> Result<usize> {
    if !(target_detection > 0.0 && target_detection < 1.0) {
        return Err(QpError::OutOfRange {
            name: "target_detection",
            value: target_detection,
            range: "(0, 1)",
        });
    }
    let per_qubit = per_qubit_success(metric);
    let allowed = 1.0 - target_detection;
    let mut n = 1;
    let mut p = per_qubit;
    while p > allowed {
        n += 1;
        p *= per_qubit;
    }
    Ok(n)
}

/// Check of the claim "13 qubits give at least 99.9% detection" against the
/// `(5/6)^(2N)` bound it is supposed to follow from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionClaimCheck {
    pub claimed_n: usize,
    pub claimed_detection: f64,
    pub detection_at_claimed_n: f64,
    pub n_required_for_claim: usize,
    pub n_for_99_percent: usize,
}

impl DetectionClaimCheck {
    pub fn evaluate() -> Result<Self> {
        let claimed_n = 13;
        let claimed_detection = 0.999;
        Ok(Self {
            claimed_n,
            claimed_detection,
            detection_at_claimed_n: 1.0 - cloning_success_bound(claimed_n)?,
            n_required_for_claim: min_length_for_detection(claimed_detection, Metric::Fidelity)?,
            n_for_99_percent: min_length_for_detection(0.99, Metric::Fidelity)?,
        })
    }

    pub fn holds(&self) -> bool {
        self.detection_at_claimed_n >= self.claimed_detection
    }
}

impl fmt::Display for DetectionClaimCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds() {
            write!(
                f,
                "detection check: N={} reaches {:.3}% detection, claim of {:.1}% holds",
                self.claimed_n,
                100.0 * self.detection_at_claimed_n,
                100.0 * self.claimed_detection
            )
        } else {
            write!(
                f,
                "DISCREPANCY: the claim that N={} qubits give >= {:.1}% detection is NOT reproduced; \
                 (5/6)^(2N) gives {:.3}% at N={}, {:.1}% needs N={}; N={} is the 99% threshold",
                self.claimed_n,
                100.0 * self.claimed_detection,
                100.0 * self.detection_at_claimed_n,
                self.claimed_n,
                100.0 * self.claimed_detection,
                self.n_required_for_claim,
                self.n_for_99_percent
            )
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTradeoffRow {
    pub noise_strength: f64,
    pub threshold_fraction: f64,
    /// Usability: honest Alice accepted through the noisy channel.
    pub honest_accept_rate: f64,
    /// Security: symmetric-cloner operational attack succeeds.
    pub eve_success_rate: f64,
    pub trials: usize,
}

fn honest_accept_count(n_qubits: usize, trials: usize, channel: &Channel, policy: &AcceptancePolicy, rng: &SimRng) -> Result<usize> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng.fork(t as u64);
            let (bob, alice) = setup_account(n_qubits, &mut r)?;
            let (sent, _) = transmit(&alice, channel, &mut r)?;
            Ok(usize::from(verify(&bob, &sent, policy, &mut r)?.accepted))
        })
        .sum()
}

/// Grid over noise levels and acceptance thresholds for one noise kind.
pub fn noise_tradeoff_sweep(
    noise_kind: NoiseKind,
    noise_levels: &[f64],
    thresholds: &[f64],
    n_qubits: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<NoiseTradeoffRow>> {
    if n_qubits < 1 || trials < 1 {
        return Err(QpError::OutOfRange {
            name: "n_qubits/trials",
            value: n_qubits.min(trials) as f64,
            range: ">= 1",
        });
    }
    for &p in noise_levels {
        check_range("noise_strength", p, 0.0, 1.0, "[0, 1]")?;
    }
    for &t in thresholds {
        AcceptancePolicy::threshold(t)?;
    }
    let master = SimRng::new(seed);
    let mut rows = Vec::with_capacity(noise_levels.len() * thresholds.len());
    for &level in noise_levels {
        let channel = Channel::new(noise_kind, level, 0.0)?;
        for &threshold in thresholds {
            let policy = AcceptancePolicy::threshold(threshold)?;
            let key = format!("noise/{}/{:016x}/{:016x}", noise_kind.label(), level.to_bits(), threshold.to_bits());
            let honest = honest_accept_count(n_qubits, trials, &channel, &policy, &master.fork_named(&format!("{key}/honest")))?;
            let mut scenario = AttackScenario::new(
                Strategy::UqcmSymmetric,
                StrikePoint::AliceStation,
                n_qubits,
                trials,
                Metric::Operational,
            );
            scenario.channel = channel;
            scenario.policy = policy;
            let eve = AttackTally::from_results(&run_attack(&scenario, &master.fork_named(&format!("{key}/eve")))?);
            rows.push(NoiseTradeoffRow {
                noise_strength: level,
                threshold_fraction: threshold,
                honest_accept_rate: honest as f64 / trials as f64,
                eve_success_rate: eve.successes as f64 / trials as f64,
                trials,
            });
        }
    }
    Ok(rows)
}
