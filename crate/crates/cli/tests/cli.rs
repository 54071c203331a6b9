use std::path::Path;
use std::process::{Command, Output};

use qupass_cli::table::{read_noise, read_sweep, rounded_sweep, write_sweep};

fn qupass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qupass"))
        .args(args)
        .env_remove("QUPASS_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Value after `prefix` up to the next space.
fn number_after(text: &str, prefix: &str) -> f64 {
    let start = text.find(prefix).unwrap_or_else(|| panic!("{prefix:?} not in {text}")) + prefix.len();
    text[start..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn demo_accepts_every_round() {
    let o = qupass(&["demo", "--qubits", "13", "--rounds", "5", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.matches(": accept").count(), 5);
    assert!(out.contains("password unchanged"));
    assert_eq!(out, stdout(&qupass(&["demo", "--qubits", "13", "--rounds", "5", "--seed", "4"])));
}

#[test]
fn demo_rejects_zero_qubits() {
    let o = qupass(&["demo", "--qubits", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage: qupass demo"), "{}", stderr(&o));
}

#[test]
fn seed_env_is_a_fallback() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_qupass"));
        c.args(["demo", "--qubits", "2", "--rounds", "1"]).env_remove("QUPASS_SEED");
        if let Some(e) = env {
            c.env("QUPASS_SEED", e);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        stdout(&c.output().unwrap())
    };
    assert!(run(Some("11"), None).contains("seed 11"));
    assert!(run(Some("11"), Some("12")).contains("seed 12"));
    assert!(run(None, None).contains("seed 0"));
    assert_eq!(run(Some("11"), None), run(None, Some("11")));
}

#[test]
fn attack_headline_number() {
    let o = qupass(&["attack", "--qubits", "1", "--trials", "100000", "--metric", "fidelity", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let est = number_after(&out, "eve success: ");
    assert!((est - 25.0 / 36.0).abs() < 0.006, "{out}");
    assert!(out.contains("bound (5/6)^(2N): 0.694444"));
    assert!(out.contains("detection rate: "));
    assert!(out.contains("DISCREPANCY"));
}

#[test]
fn attack_random_guess() {
    let o = qupass(&[
        "attack", "--strategy", "random_guess", "--qubits", "4", "--metric", "operational", "--trials", "100000",
    ]);
    let est = number_after(&stdout(&o), "eve success: ");
    assert!((est - 0.316_406_25).abs() < 0.006, "{est}");
}

#[test]
fn attack_on_bob_server_reports_integrity_check() {
    let o = qupass(&["attack", "--strike-point", "bob_server", "--qubits", "3", "--trials", "500"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("integrity check fired: 1 (500 of 500)"));
}

#[test]
fn attack_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.ini");
    std::fs::write(
        &cfg,
        "[password]\nn_qubits = 2\n[attack]\nstrategy = uqcm_asymmetric\nasymmetry = 0.3\n\
         metric = operational\n[run]\ntrials = 3000\nseed = 9\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let csv = dir.path().join("a.csv");
    let o = qupass(&["attack", "--config", c, "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("strategy=uqcm_asymmetric(0.3)") && out.contains("n_qubits=2") && out.contains("seed=9"), "{out}");
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("strategy,asymmetry,strike_point"));
    assert!(table.lines().nth(1).unwrap().starts_with("uqcm_asymmetric,0.3,alice_station,operational,2,3000,9,"));

    let o = qupass(&["attack", "--config", c, "--n-qubits", "5", "--seed", "10"]);
    assert!(stdout(&o).contains("n_qubits=5") && stdout(&o).contains("seed=10"));
}

#[test]
fn attack_config_errors_name_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[password]\nn_qubits = 2\n[attack]\nflavour = 1\n", "attack.flavour", "line 4"),
        ("[channel]\nnoise_kind = depolarizing\nnoise_strength = 2\n", "channel.noise_strength", "line 3"),
        ("[attack]\nmetric = vibes\n", "attack.metric", "line 2"),
        ("[run]\n\n\ntrials = 0\n", "run.trials", "line 4"),
    ];
    for (i, (text, key, line)) in cases.iter().enumerate() {
        let p = dir.path().join(format!("bad{i}.ini"));
        std::fs::write(&p, text).unwrap();
        let o = qupass(&["attack", "--config", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = stderr(&o);
        assert!(err.contains(key) && err.contains(line), "{err}");
    }
    let o = qupass(&["attack", "--loss-probability=-0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("channel.loss_probability") && stderr(&o).contains("command line"));
}

#[test]
fn sweep_writes_expected_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let p = path.to_str().unwrap();
    let o = qupass(&["sweep", "--min", "1", "--max", "15", "--metric", "fidelity", "--trials", "2000", "--seed", "3", "--out", p]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let bytes = std::fs::read(&path).unwrap();
    let t = read_sweep(bytes.as_slice()).unwrap();
    assert_eq!(t.rows.len(), 15);
    assert_eq!(t.rows[0].analytic, 0.694444);
    assert!(stdout(&o).contains("min N for 99% detection: 13; for 99.9%: 19"));

    // round trip: re-encoding the parsed table gives the same bytes
    let mut again = Vec::new();
    write_sweep(&mut again, &t).unwrap();
    assert_eq!(again, bytes);
    assert_eq!(rounded_sweep(&t), t);

    qupass(&["sweep", "--min", "1", "--max", "15", "--metric", "fidelity", "--trials", "2000", "--seed", "3", "--out", p]);
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
}

#[test]
fn operational_sweep_uses_oracle_column() {
    let o = qupass(&["sweep", "--min", "1", "--max", "3", "--metric", "operational", "--trials", "1000"]);
    let t = read_sweep(o.stdout.as_slice()).unwrap();
    assert_eq!(t.rows.iter().map(|r| r.analytic).collect::<Vec<_>>(), vec![0.833333, 0.694444, 0.578704]);
}

#[test]
fn sweep_failures() {
    assert_eq!(qupass(&["sweep", "--trials", "1000", "--out", "/nonexistent-dir/x.csv"]).status.code(), Some(1));
    assert_eq!(qupass(&["sweep", "--min", "0"]).status.code(), Some(2));
    assert_eq!(qupass(&["sweep", "--max", "21"]).status.code(), Some(2));
    assert_eq!(qupass(&["sweep", "--trials", "10"]).status.code(), Some(2));
    assert_eq!(qupass(&["sweep", "--metric", "nope"]).status.code(), Some(2));
}

#[test]
fn noise_grid() {
    let o = qupass(&["noise", "--levels", "0", "--thresholds", "1.0", "--qubits", "5", "--trials", "300"]);
    let rows = read_noise(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].honest_accept_rate, 1.0);

    let o = qupass(&["noise", "--levels", "0,0.1,0.2", "--thresholds", "0.5,0.75,1", "--qubits", "4", "--trials", "200"]);
    assert_eq!(read_noise(o.stdout.as_slice()).unwrap().len(), 9);

    // aggregate honest acceptance at N=4, strict: 0.975^4
    let o = qupass(&["noise", "--kind", "depolarizing", "--levels", "0.1", "--thresholds", "1", "--qubits", "4", "--trials", "20000"]);
    let r = &read_noise(o.stdout.as_slice()).unwrap()[0];
    let want = 0.975f64.powi(4);
    assert!((r.honest_accept_rate - want).abs() < 4.0 * (want * (1.0 - want) / 20000.0).sqrt(), "{}", r.honest_accept_rate);
}

#[test]
fn noise_validation() {
    assert_eq!(qupass(&["noise", "--levels", "1.5"]).status.code(), Some(2));
    assert_eq!(qupass(&["noise", "--thresholds", "0"]).status.code(), Some(2));
    assert_eq!(qupass(&["noise", "--kind", "bitflip"]).status.code(), Some(2));
    assert_eq!(qupass(&["noise", "--qubits", "0"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.csv");
    let o = qupass(&["noise", "--levels", "0", "--thresholds", "1", "--trials", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(Path::new(&out).exists());
}
