//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::process::Command;
use std::time::Instant;

use qupass_core::adversary::{
    asymmetric_fidelities, oracle, run_attack, symmetric_uqcm, AttackScenario, AttackTally, Metric, StrikePoint,
    Strategy,
};
use qupass_core::experiments::{
    estimate_with_ci, min_length_for_detection, noise_tradeoff_sweep, per_qubit_success, sweep_password_length,
    DetectionClaimCheck,
};
use qupass_core::protocol::{setup_account, swap_test_branches, verify, AcceptancePolicy};
use qupass_core::{fidelity, haar_random_qubit, Gate, NoiseKind, PureState, QuantumState, SimRng};

const SEED: u64 = 20_261_015;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Ancilla outcome of one SWAP-test circuit run on pure inputs.
fn swap_circuit_shot(phi: &PureState, psi: &PureState, rng: &mut SimRng) -> u8 {
    let reg = PureState::zero(1).tensor(phi).tensor(psi);
    let reg = reg
        .apply_gate(&Gate::hadamard(), &[0])
        .and_then(|r| r.apply_gate(&Gate::fredkin(), &[0, 1, 2]))
        .and_then(|r| r.apply_gate(&Gate::hadamard(), &[0]))
        .expect("valid circuit");
    reg.measure_qubit(0, rng).expect("valid qubit").outcome
}

fn c1_swap_test_statistics() -> Outcome {
    let mut rng = SimRng::new(SEED).fork_named("c1");
    let shots = 10_000;
    let mut worst: f64 = 0.0;
    for pair in 0..1000 {
        let phi = haar_random_qubit(&mut rng);
        let psi = haar_random_qubit(&mut rng);
        let p1 = 0.5 * (1.0 - fidelity(&phi, &psi).map_err(|e| e.to_string())?);
        let ones = (0..shots).filter(|_| swap_circuit_shot(&phi, &psi, &mut rng) == 1).count();
        let z = (ones as f64 / shots as f64 - p1).abs() / sigma(p1, shots);
        worst = worst.max(z);
        ensure(z <= 4.0, format!("pair {pair}: {ones}/{shots} ones vs p1 = {p1:.6} ({z:.2} se)"))?;
    }
    let mut identical = 0;
    for _ in 0..100 {
        let phi = haar_random_qubit(&mut rng);
        let joint = phi.to_density().tensor(&phi.to_density());
        let b = swap_test_branches(&joint, 0, 1).map_err(|e| e.to_string())?;
        ensure(b.p1 == 0.0 && b.p0 == 1.0, format!("identical pair gave P(1) = {:e}", b.p1))?;
        identical += usize::from((0..100).all(|_| swap_circuit_shot(&phi, &phi, &mut rng) == 0));
    }
    ensure(identical == 100, "identical pair produced outcome 1")?;
    Ok(format!("1000 pairs x 10^4 shots, worst deviation {worst:.2} se; identical pairs P(1) = 0"))
}

fn c2_reusability() -> Outcome {
    let mut rng = SimRng::new(SEED).fork_named("c2");
    let (mut bob, mut alice) = setup_account(13, &mut rng).map_err(|e| e.to_string())?;
    let descs = bob.descriptions().to_vec();
    for round in 1..=100 {
        let r = verify(&bob, &alice, &AcceptancePolicy::strict(), &mut rng).map_err(|e| e.to_string())?;
        ensure(r.accepted && r.p_accept_analytic == 1.0, format!("round {round}: p_accept {}", r.p_accept_analytic))?;
        alice = r.post_alice;
        bob = r.post_bob;
    }
    let mut worst: f64 = 0.0;
    for ((d, a), s) in descs.iter().zip(alice.qubits()).zip(bob.stored_copy()) {
        for q in [a, s] {
            worst = worst.max(1.0 - fidelity(&d.state(), q).map_err(|e| e.to_string())?);
        }
    }
    ensure(worst <= 1e-9, format!("fidelity drift {worst:e}"))?;
    Ok(format!("100 rounds at N=13 accepted with p = 1, max fidelity drift {worst:.1e}"))
}

fn c3_cloner_fidelity() -> Outcome {
    let mut rng = SimRng::new(SEED).fork_named("c3");
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let phi = haar_random_qubit(&mut rng);
        let out = symmetric_uqcm(&phi).map_err(|e| e.to_string())?;
        let perp = phi.orthogonal().map_err(|e| e.to_string())?;
        let want = phi.to_density().mix(&perp.to_density(), 5.0 / 6.0).map_err(|e| e.to_string())?;
        for m in [out.kept_marginal(), out.forwarded_marginal()] {
            worst = worst.max(m.max_abs_diff(&want));
            worst = worst.max((fidelity(&phi, &m).map_err(|e| e.to_string())? - 5.0 / 6.0).abs());
        }
    }
    ensure(worst <= 1e-9, format!("max deviation {worst:e}"))?;
    Ok(format!("1000 Haar inputs, both marginals (5/6, 1/6) mixtures, max deviation {worst:.1e}"))
}

fn attack_tally(strategy: Strategy, n: usize, trials: usize, metric: Metric, label: &str) -> Result<AttackTally, String> {
    let s = AttackScenario::new(strategy, StrikePoint::AliceStation, n, trials, metric);
    let rng = SimRng::new(SEED).fork_named(label);
    Ok(AttackTally::from_results(&run_attack(&s, &rng).map_err(|e| e.to_string())?))
}

fn c4_headline_number() -> Outcome {
    let t = attack_tally(Strategy::UqcmSymmetric, 1, 100_000, Metric::Fidelity, "c4")?;
    let e = estimate_with_ci(t.successes, t.trials).map_err(|e| e.to_string())?;
    let p = 25.0 / 36.0;
    ensure(e.ci_low <= p && p <= e.ci_high, format!("{:.6} [{:.6}, {:.6}] misses {p:.6}", e.estimate, e.ci_low, e.ci_high))?;
    Ok(format!("N=1, 10^5 trials: {:.6} [{:.6}, {:.6}] contains 25/36", e.estimate, e.ci_low, e.ci_high))
}

fn c5_length_sweep() -> Outcome {
    let t = sweep_password_length(1, 15, 100_000, Metric::Fidelity, SEED).map_err(|e| e.to_string())?;
    let missed: Vec<usize> = t.rows.iter().filter(|r| !r.covers_analytic()).map(|r| r.n_qubits).collect();
    let cov = t.coverage();
    ensure(cov >= 0.93, format!("coverage {:.3} < 0.93, analytic outside CI at N = {missed:?}", cov))?;
    Ok(format!("N=1..15, 10^5 trials each: {}/15 rows cover (5/6)^(2N), misses at N = {missed:?}", t.rows.len() - missed.len()))
}

fn c6_detection_threshold() -> Outcome {
    let n99 = min_length_for_detection(0.99, Metric::Fidelity).map_err(|e| e.to_string())?;
    ensure(n99 == 13, format!("99% threshold at N={n99}"))?;
    let check = DetectionClaimCheck::evaluate().map_err(|e| e.to_string())?;
    ensure(!check.holds() && check.n_required_for_claim == 19, format!("{check:?}"))?;
    let csv = std::env::temp_dir().join(format!("qupass-acc-c6-{}.csv", std::process::id()));
    let o = Command::new(env!("CARGO_BIN_EXE_qupass"))
        .args(["sweep", "--min", "1", "--max", "2", "--trials", "1000", "--out"])
        .arg(&csv)
        .output()
        .map_err(|e| e.to_string())?;
    let _ = std::fs::remove_file(&csv);
    let report = String::from_utf8_lossy(&o.stdout);
    let line = report.lines().find(|l| l.starts_with("DISCREPANCY")).ok_or("report lacks a DISCREPANCY line")?;
    ensure(line.contains("N=19") && line.contains("NOT reproduced"), line.to_string())?;
    Ok(format!("99% needs N=13; 99.9% needs N=19; report flags it: \"{}...\"", &line[..60.min(line.len())]))
}

fn c7_operational_metric() -> Outcome {
    let trials = 100_000;
    let p = oracle::symmetric_operational_success();
    let t = attack_tally(Strategy::UqcmSymmetric, 1, trials, Metric::Operational, "c7")?;
    let rate = t.successes as f64 / trials as f64;
    let z = (rate - p).abs() / sigma(p, trials);
    ensure(z <= 3.0, format!("operational {rate:.6} vs oracle {p:.6} ({z:.2} sigma)"))?;
    let f = per_qubit_success(Metric::Fidelity);
    let tf = attack_tally(Strategy::UqcmSymmetric, 1, trials, Metric::Fidelity, "c7/fidelity")?;
    let rate_f = tf.successes as f64 / trials as f64;
    ensure(p >= f && rate > rate_f, format!("ordering violated: operational {rate:.6}, fidelity {rate_f:.6}"))?;
    Ok(format!("operational {rate:.6} vs oracle {p:.6} ({z:.2} sigma) > fidelity metric {rate_f:.6}"))
}

fn c8_asymmetric_tradeoff() -> Outcome {
    let steps = 100_000;
    let mut best = (0.0f64, 0.0f64);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let (fc, ff) = asymmetric_fidelities(t).map_err(|e| e.to_string())?;
        ensure(fc * ff <= 5.0 / 6.0, format!("t={t}: product {}", fc * ff))?;
        if fc * ff > best.0 {
            best = (fc * ff, t);
        }
    }
    ensure((best.0 - 25.0 / 36.0).abs() <= 1e-9, format!("max product {} at t={}", best.0, best.1))?;
    Ok(format!("10^5-point sweep: product <= 5/6 everywhere, max {:.12} at t={}", best.0, best.1))
}

fn c9_noise_tradeoff() -> Outcome {
    for kind in NoiseKind::ALL {
        let rows = noise_tradeoff_sweep(kind, &[0.0], &[1.0], 13, 2000, SEED).map_err(|e| e.to_string())?;
        ensure(rows[0].honest_accept_rate == 1.0, format!("{kind}: honest rate {} at zero noise", rows[0].honest_accept_rate))?;
    }
    let trials = 10_000;
    let thresholds = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    let rows = noise_tradeoff_sweep(NoiseKind::Depolarizing, &[0.0, 0.1], &thresholds, 10, trials, SEED)
        .map_err(|e| e.to_string())?;
    for w in rows.windows(2).filter(|w| w[0].noise_strength == w[1].noise_strength) {
        let (a, b) = (w[0].eve_success_rate, w[1].eve_success_rate);
        let slack = 3.0 * (sigma(a, trials).powi(2) + sigma(b, trials).powi(2)).sqrt();
        ensure(b <= a + slack, format!("eve rate rises from {a} to {b} at noise {}", w[0].noise_strength))?;
    }
    let mut notes = Vec::new();
    for p in [0.1, 0.3, 0.6] {
        let n = 40_000;
        let r = noise_tradeoff_sweep(NoiseKind::Depolarizing, &[p], &[1.0], 1, n, SEED).map_err(|e| e.to_string())?;
        let want = 1.0 - p / 4.0;
        let z = (r[0].honest_accept_rate - want).abs() / sigma(want, n);
        ensure(z <= 3.0, format!("p={p}: pass {} vs {want} ({z:.2} sigma)", r[0].honest_accept_rate))?;
        notes.push(format!("{:.4}", r[0].honest_accept_rate));
    }
    Ok(format!(
        "zero noise accepts honest Alice exactly; eve rate nonincreasing over 6 thresholds; depolarizing pass {} vs 1-p/4",
        notes.join("/")
    ))
}

fn c10_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("qupass-acc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let ini = dir.join("scenario.ini");
    std::fs::write(
        &ini,
        "[password]\nn_qubits = 3\n[attack]\nstrategy = uqcm_asymmetric\nasymmetry = 0.4\nstrike_point = in_transit\n\
         metric = operational\n[channel]\nnoise_kind = dephasing\nnoise_strength = 0.05\n[run]\ntrials = 5000\nseed = 3\n",
    )
    .map_err(|e| e.to_string())?;
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let commands: Vec<Vec<String>> = vec![
        vec!["demo".into(), "--qubits".into(), "8".into(), "--rounds".into(), "4".into(), "--seed".into(), "5".into()],
        vec!["attack".into(), "--config".into(), p("scenario.ini"), "--csv".into(), p("attack.csv")],
        vec!["attack".into(), "--strike-point".into(), "bob_server".into(), "--trials".into(), "2000".into(), "--seed".into(), "6".into()],
        vec!["sweep".into(), "--max".into(), "6".into(), "--trials".into(), "3000".into(), "--seed".into(), "7".into(), "--out".into(), p("sweep.csv")],
        vec!["sweep".into(), "--max".into(), "4".into(), "--trials".into(), "1000".into(), "--metric".into(), "operational".into()],
        vec!["noise".into(), "--levels".into(), "0,0.1".into(), "--thresholds".into(), "0.8,1".into(), "--qubits".into(), "6".into(), "--trials".into(), "1000".into(), "--seed".into(), "8".into(), "--out".into(), p("noise.csv")],
    ];
    let run = |args: &[String]| -> Result<Vec<u8>, String> {
        let o = Command::new(env!("CARGO_BIN_EXE_qupass"))
            .args(args)
            .env_remove("QUPASS_SEED")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), format!("{args:?} exited {:?}", o.status.code()))?;
        let mut bytes = o.stdout;
        for f in ["attack.csv", "sweep.csv", "noise.csv"] {
            if args.iter().any(|a| a.ends_with(f)) {
                bytes.extend(std::fs::read(dir.join(f)).map_err(|e| e.to_string())?);
            }
        }
        Ok(bytes)
    };
    for args in &commands {
        let (a, b) = (run(args)?, run(args)?);
        ensure(a == b, format!("{} output differs between runs", args[0]))?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} CLI invocations byte-identical across reruns (stdout and CSV files)", commands.len()))
}

fn main() {
    let criteria: [Check; 10] = [
        ("swap-test statistics", c1_swap_test_statistics),
        ("password reusability", c2_reusability),
        ("cloner fidelity 5/6", c3_cloner_fidelity),
        ("N=1 attack near 25/36", c4_headline_number),
        ("exponential decay sweep N=1..15", c5_length_sweep),
        ("detection threshold and flagged claim", c6_detection_threshold),
        ("operational metric vs oracle", c7_operational_metric),
        ("asymmetric cloner tradeoff", c8_asymmetric_tradeoff),
        ("noise tradeoff properties", c9_noise_tradeoff),
        ("CLI determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
