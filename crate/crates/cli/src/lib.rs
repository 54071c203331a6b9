//! `qupass` command-line front end.
//!
//! Four subcommands: `demo`, `attack`, `sweep` and `noise`. Reports go to
//! stdout, tables to CSV. Exit codes: 0 success, 1 runtime or I/O failure,
//! 2 usage or validation error.

pub mod config;
pub mod table;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qupass_core::adversary::{cloning_success_bound, run_attack, AttackTally, Metric, StrikePoint, Strategy};
use qupass_core::experiments::{
    analytic_success, estimate_with_ci, min_length_for_detection, noise_tradeoff_sweep, per_qubit_success,
    sweep_password_length, DetectionClaimCheck,
};
use qupass_core::protocol::{setup_account, verify, AcceptancePolicy};
use qupass_core::{fidelity, NoiseKind, QpError, SimRng};

use config::{parse_seed, ConfigError, Origin, RawConfig, ScenarioConfig};
use table::fmt6;

pub const SEED_ENV: &str = "QUPASS_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid argument: {0}")]
    Invalid(#[from] QpError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("csv: {0}")]
    Csv(String),
    #[error("invalid argument: {0}")]
    BadArgs(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::Config(_) | CliError::Invalid(_) | CliError::BadArgs(_) => 2,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Failed(_) => 1,
        }
    }
}

fn stdout_err(e: io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

#[derive(Debug, Parser)]
#[command(name = "qupass", version, about = "Quantum password authentication simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Set up an account and run honest verification rounds.
    Demo(DemoArgs),
    /// Monte Carlo estimate of one attack scenario.
    Attack(Box<AttackArgs>),
    /// Eve's success against password length, as CSV.
    Sweep(SweepArgs),
    /// Honest acceptance and Eve's success over noise levels and thresholds, as CSV.
    Noise(NoiseArgs),
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 13, value_parser = clap::value_parser!(u64).range(1..))]
    pub qubits: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub rounds: u64,
    /// Defaults to $QUPASS_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Every flag mirrors a `section.key` of the scenario file and overrides it.
#[derive(Debug, Args)]
pub struct AttackArgs {
    /// Scenario file (INI sections password, attack, channel, policy, run).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write a one-row CSV summary here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long = "n-qubits", visible_alias = "qubits")]
    pub n_qubits: Option<String>,
    /// uqcm_symmetric, uqcm_asymmetric, random_guess, intercept_resend
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub asymmetry: Option<String>,
    /// alice_station, in_transit, bob_server
    #[arg(long = "strike-point")]
    pub strike_point: Option<String>,
    /// fidelity, operational
    #[arg(long)]
    pub metric: Option<String>,
    /// ideal, depolarizing, dephasing, amplitude_damping
    #[arg(long = "noise-kind")]
    pub noise_kind: Option<String>,
    #[arg(long = "noise-strength")]
    pub noise_strength: Option<String>,
    #[arg(long = "loss-probability")]
    pub loss_probability: Option<String>,
    /// strict, threshold
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long = "threshold-fraction")]
    pub threshold_fraction: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1)]
    pub min: usize,
    #[arg(long, default_value_t = 15)]
    pub max: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value = "fidelity")]
    pub metric: Metric,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV destination; without it the table goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long, default_value = "depolarizing")]
    pub kind: NoiseKind,
    #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1")]
    pub levels: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,1")]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value_t = 13)]
    pub qubits: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Flag, then `fallback` (a scenario file value), then `$QUPASS_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>, fallback: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag.or(fallback) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => parse_seed(v.trim()).map_err(|message| {
            CliError::Config(ConfigError {
                origin: Origin::Env(SEED_ENV),
                key: "run.seed".into(),
                message,
            })
        }),
        Err(_) => Ok(0),
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    match cli.command {
        Command::Demo(a) => cmd_demo(&a, out),
        Command::Attack(a) => cmd_attack(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Noise(a) => cmd_noise(&a, out),
    }
}

/// Run and map the outcome to a process exit code, printing errors.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(args.clone(), &mut out) {
        Ok(()) => 0,
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            if e.use_stderr() {
                eprintln!("\n{}", usage_for(&args));
            }
            e.exit_code()
        }
        Err(e) => {
            let _ = out.flush();
            eprintln!("qupass: {e}");
            e.exit_code()
        }
    }
}

/// Usage text of the subcommand named in `args`, or of the whole tool.
fn usage_for(args: &[OsString]) -> clap::builder::StyledStr {
    let mut cmd = <Cli as clap::CommandFactory>::command();
    cmd.build();
    let name = args.iter().skip(1).find_map(|a| {
        let a = a.to_str()?;
        cmd.get_subcommands().find(|s| s.get_name() == a).map(|s| s.get_name().to_string())
    });
    match name {
        Some(n) => cmd.find_subcommand_mut(&n).expect("listed above").render_usage(),
        None => cmd.render_usage(),
    }
}

pub fn cmd_demo(a: &DemoArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let seed = resolve_seed(a.seed, None)?;
    let mut rng = SimRng::new(seed);
    let (mut bob, mut alice) = setup_account(a.qubits as usize, &mut rng)?;
    let policy = AcceptancePolicy::strict();
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(stdout_err);
    w(out, format!("account {}: {} qubits, seed {seed}", bob.account_id(), a.qubits))?;
    let mut all_accepted = true;
    for round in 1..=a.rounds {
        let r = verify(&bob, &alice, &policy, &mut rng)?;
        all_accepted &= r.accepted;
        let outcomes: String = r.per_qubit_outcomes.iter().map(|o| char::from(b'0' + o)).collect();
        w(
            out,
            format!(
                "round {round}: {} (ancillas {outcomes}, p_accept {})",
                if r.accepted { "accept" } else { "reject" },
                fmt6(r.p_accept_analytic)
            ),
        )?;
        alice = r.post_alice;
        bob = r.post_bob;
    }
    let mut min_alice: f64 = 1.0;
    let mut min_bob: f64 = 1.0;
    for ((d, q), s) in bob.descriptions().iter().zip(alice.qubits()).zip(bob.stored_copy()) {
        min_alice = min_alice.min(fidelity(&d.state(), q)?);
        min_bob = min_bob.min(fidelity(&d.state(), s)?);
    }
    let unchanged = min_alice >= 1.0 - 1e-9 && min_bob >= 1.0 - 1e-9;
    w(
        out,
        format!(
            "password {}: min fidelity alice {}, bob {}",
            if unchanged { "unchanged" } else { "CHANGED" },
            fmt6(min_alice),
            fmt6(min_bob)
        ),
    )?;
    if all_accepted && unchanged {
        Ok(())
    } else {
        Err(CliError::Failed("honest verification did not accept every round".into()))
    }
}

fn raw_config(a: &AttackArgs) -> Result<RawConfig, CliError> {
    let mut raw = match &a.config {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    let flags = [
        ("password.n_qubits", &a.n_qubits),
        ("attack.strategy", &a.strategy),
        ("attack.asymmetry", &a.asymmetry),
        ("attack.strike_point", &a.strike_point),
        ("attack.metric", &a.metric),
        ("channel.noise_kind", &a.noise_kind),
        ("channel.noise_strength", &a.noise_strength),
        ("channel.loss_probability", &a.loss_probability),
        ("policy.mode", &a.mode),
        ("policy.threshold_fraction", &a.threshold_fraction),
        ("run.trials", &a.trials),
        ("run.seed", &a.seed),
    ];
    for (key, v) in flags {
        if let Some(v) = v {
            raw.set(key, v.clone(), Origin::Flag);
        }
    }
    Ok(raw)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    }
}

fn policy_label(p: &AcceptancePolicy) -> String {
    if *p == AcceptancePolicy::strict() {
        "strict".into()
    } else {
        format!("threshold {}", fmt6(p.threshold_fraction()))
    }
}

pub fn cmd_attack(a: &AttackArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg: ScenarioConfig = raw_config(a)?.resolve()?;
    let seed = resolve_seed(None, cfg.seed)?;
    let scenario = cfg.scenario();
    scenario.validate()?;
    let mut csv_out = a.csv.as_deref().map(create).transpose()?;

    let tally = AttackTally::from_results(&run_attack(&scenario, &SimRng::new(seed))?);
    let est = estimate_with_ci(tally.successes, tally.trials)?;
    let bound = cloning_success_bound(cfg.n_qubits)?;
    let frac = |k: usize| fmt6(k as f64 / tally.trials as f64);

    let mut lines = vec![
        format!(
            "scenario: strategy={} strike_point={} metric={} n_qubits={} trials={} seed={seed}",
            cfg.strategy, cfg.strike_point, cfg.metric, cfg.n_qubits, cfg.trials
        ),
        format!(
            "channel: noise={} strength={} loss={}; policy: {}",
            cfg.channel.noise_kind(),
            fmt6(cfg.channel.noise_strength()),
            fmt6(cfg.channel.loss_probability()),
            policy_label(&cfg.policy)
        ),
        format!(
            "eve success: {} (95% CI {} .. {}), {} of {}",
            fmt6(est.estimate),
            fmt6(est.ci_low),
            fmt6(est.ci_high),
            tally.successes,
            tally.trials
        ),
        format!("bound (5/6)^(2N): {}", fmt6(bound)),
    ];
    if cfg.metric == Metric::Operational && cfg.strategy == Strategy::UqcmSymmetric {
        lines.push(format!(
            "operational analytic (oracle)^N: {}",
            fmt6(analytic_success(cfg.n_qubits, Metric::Operational)?)
        ));
    }
    lines.push(format!("detection rate: {} ({} of {})", frac(tally.detected), tally.detected, tally.trials));
    lines.push(format!("clone accepted: {}", frac(tally.clone_accepted)));
    lines.push(format!("alice next login accepted: {}", frac(tally.alice_survived)));
    if cfg.strike_point == StrikePoint::BobServer {
        lines.push(format!(
            "integrity check fired: {} ({} of {}); password regenerated each time",
            frac(tally.integrity_fired),
            tally.integrity_fired,
            tally.trials
        ));
    }
    lines.push(DetectionClaimCheck::evaluate()?.to_string());
    for l in lines {
        writeln!(out, "{l}").map_err(stdout_err)?;
    }

    if let (Some(w), Some(path)) = (csv_out.as_mut(), a.csv.as_deref()) {
        let asym = match cfg.strategy {
            Strategy::UqcmAsymmetric { asymmetry } => fmt6(asymmetry),
            _ => String::new(),
        };
        let mut c = csv::Writer::from_writer(w);
        c.write_record([
            "strategy",
            "asymmetry",
            "strike_point",
            "metric",
            "n_qubits",
            "trials",
            "seed",
            "successes",
            "estimate",
            "ci_low",
            "ci_high",
            "bound",
            "detected",
            "alice_survived",
            "integrity_fired",
        ])
        .map_err(|e| CliError::Csv(e.to_string()))?;
        c.write_record([
            cfg.strategy.label().to_string(),
            asym,
            cfg.strike_point.label().to_string(),
            cfg.metric.label().to_string(),
            cfg.n_qubits.to_string(),
            cfg.trials.to_string(),
            seed.to_string(),
            tally.successes.to_string(),
            fmt6(est.estimate),
            fmt6(est.ci_low),
            fmt6(est.ci_high),
            fmt6(bound),
            tally.detected.to_string(),
            tally.alice_survived.to_string(),
            tally.integrity_fired.to_string(),
        ])
        .map_err(|e| CliError::Csv(e.to_string()))?;
        c.flush().map_err(io_at(path))?;
    }
    Ok(())
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let seed = resolve_seed(a.seed, None)?;
    // validate before touching the output file
    if !(1 <= a.min && a.min <= a.max && a.max <= qupass_core::experiments::MAX_SWEEP_QUBITS) {
        return Err(QpError::OutOfRange {
            name: "--min/--max",
            value: a.max as f64,
            range: "1 <= min <= max <= 20",
        }
        .into());
    }
    if a.trials < qupass_core::experiments::MIN_SWEEP_TRIALS {
        return Err(QpError::OutOfRange {
            name: "--trials",
            value: a.trials as f64,
            range: ">= 1000",
        }
        .into());
    }
    let file = a.out.as_deref().map(create).transpose()?;
    let t = sweep_password_length(a.min, a.max, a.trials, a.metric, seed)?;
    match (file, a.out.as_deref()) {
        (Some(mut f), Some(path)) => {
            table::write_sweep(&mut f, &t)?;
            f.flush().map_err(io_at(path))?;
            let covered = t.rows.iter().filter(|r| r.covers_analytic()).count();
            let lines = [
                format!(
                    "sweep: metric={} N={}..{} trials={} seed={seed}",
                    a.metric, a.min, a.max, a.trials
                ),
                format!("per-qubit success: {}", fmt6(per_qubit_success(a.metric))),
                format!("analytic inside 95% CI: {covered} of {} rows", t.rows.len()),
                format!(
                    "min N for 99% detection: {}; for 99.9%: {}",
                    min_length_for_detection(0.99, a.metric)?,
                    min_length_for_detection(0.999, a.metric)?
                ),
                DetectionClaimCheck::evaluate()?.to_string(),
                format!("wrote {} rows to {}", t.rows.len(), path.display()),
            ];
            for l in lines {
                writeln!(out, "{l}").map_err(stdout_err)?;
            }
        }
        _ => table::write_sweep(&mut *out, &t)?,
    }
    Ok(())
}

pub fn cmd_noise(a: &NoiseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let seed = resolve_seed(a.seed, None)?;
    if a.levels.is_empty() || a.thresholds.is_empty() {
        return Err(CliError::BadArgs("need at least one level and one threshold".into()));
    }
    // validate before touching the output file
    if a.qubits < 1 || a.trials < 1 {
        return Err(QpError::OutOfRange {
            name: "--qubits/--trials",
            value: a.qubits.min(a.trials) as f64,
            range: ">= 1",
        }
        .into());
    }
    for &p in &a.levels {
        qupass_core::protocol::Channel::new(a.kind, p, 0.0)?;
    }
    for &t in &a.thresholds {
        AcceptancePolicy::threshold(t)?;
    }
    let file = a.out.as_deref().map(create).transpose()?;
    let rows = noise_tradeoff_sweep(a.kind, &a.levels, &a.thresholds, a.qubits, a.trials, seed)?;
    match (file, a.out.as_deref()) {
        (Some(mut f), Some(path)) => {
            table::write_noise(&mut f, &rows)?;
            f.flush().map_err(io_at(path))?;
            writeln!(
                out,
                "noise: kind={} N={} trials={} seed={seed}\nwrote {} rows to {}",
                a.kind,
                a.qubits,
                a.trials,
                rows.len(),
                path.display()
            )
            .map_err(stdout_err)?;
        }
        _ => table::write_noise(&mut *out, &rows)?,
    }
    Ok(())
}
