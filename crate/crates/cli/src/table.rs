//! CSV encoding of sweep and noise tables.
//!
//! Probabilities are written with 6 significant digits, counts exactly.
//! Reading a file back yields the table with its probabilities rounded the
//! same way, so write -> read -> write is byte-stable.

use std::io::{Read, Write};

use qupass_core::adversary::Metric;
use qupass_core::experiments::{NoiseTradeoffRow, SweepRow, SweepTable};

use crate::CliError;

pub const SWEEP_HEADER: [&str; 8] = ["n_qubits", "metric", "trials", "successes", "estimate", "ci_low", "ci_high", "analytic"];
pub const NOISE_HEADER: [&str; 5] = ["noise", "threshold", "honest_accept", "eve_success", "trials"];

/// Round to 6 significant digits.
pub fn round6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

/// `x` with 6 significant digits, in plain decimal notation.
pub fn fmt6(x: f64) -> String {
    round6(x).to_string()
}

pub fn rounded_sweep(t: &SweepTable) -> SweepTable {
    SweepTable {
        rows: t
            .rows
            .iter()
            .map(|r| SweepRow {
                estimate: round6(r.estimate),
                ci_low: round6(r.ci_low),
                ci_high: round6(r.ci_high),
                analytic: round6(r.analytic),
                ..r.clone()
            })
            .collect(),
    }
}

pub fn rounded_noise(rows: &[NoiseTradeoffRow]) -> Vec<NoiseTradeoffRow> {
    rows.iter()
        .map(|r| NoiseTradeoffRow {
            noise_strength: round6(r.noise_strength),
            threshold_fraction: round6(r.threshold_fraction),
            honest_accept_rate: round6(r.honest_accept_rate),
            eve_success_rate: round6(r.eve_success_rate),
            trials: r.trials,
        })
        .collect()
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Csv(e.to_string())
}

pub fn write_sweep<W: Write>(out: W, t: &SweepTable) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for r in &t.rows {
        w.write_record([
            r.n_qubits.to_string(),
            r.metric.label().to_string(),
            r.trials.to_string(),
            r.successes.to_string(),
            fmt6(r.estimate),
            fmt6(r.ci_low),
            fmt6(r.ci_high),
            fmt6(r.analytic),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Csv(e.to_string()))
}

pub fn write_noise<W: Write>(out: W, rows: &[NoiseTradeoffRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(NOISE_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            fmt6(r.noise_strength),
            fmt6(r.threshold_fraction),
            fmt6(r.honest_accept_rate),
            fmt6(r.eve_success_rate),
            r.trials.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Csv(e.to_string()))
}

fn check_header(r: &mut csv::Reader<impl Read>, want: &[&str]) -> Result<(), CliError> {
    let got = r.headers().map_err(csv_err)?;
    if got.iter().ne(want.iter().copied()) {
        return Err(CliError::Csv(format!("unexpected header {:?}", got.iter().collect::<Vec<_>>())));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str) -> Result<T, CliError> {
    let line = rec.position().map_or(0, |p| p.line());
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| CliError::Csv(format!("line {line}: bad {name} value {:?}", rec.get(i))))
}

pub fn read_sweep<R: Read>(input: R) -> Result<SweepTable, CliError> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &SWEEP_HEADER)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        rows.push(SweepRow {
            n_qubits: field(&rec, 0, "n_qubits")?,
            metric: field::<Metric>(&rec, 1, "metric")?,
            trials: field(&rec, 2, "trials")?,
            successes: field(&rec, 3, "successes")?,
            estimate: field(&rec, 4, "estimate")?,
            ci_low: field(&rec, 5, "ci_low")?,
            ci_high: field(&rec, 6, "ci_high")?,
            analytic: field(&rec, 7, "analytic")?,
        });
    }
    Ok(SweepTable { rows })
}

pub fn read_noise<R: Read>(input: R) -> Result<Vec<NoiseTradeoffRow>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &NOISE_HEADER)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        rows.push(NoiseTradeoffRow {
            noise_strength: field(&rec, 0, "noise")?,
            threshold_fraction: field(&rec, 1, "threshold")?,
            honest_accept_rate: field(&rec, 2, "honest_accept")?,
            eve_success_rate: field(&rec, 3, "eve_success")?,
            trials: field(&rec, 4, "trials")?,
        });
    }
    Ok(rows)
}
