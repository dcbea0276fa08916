//! File formats: sequence JSON, sweep and scaling CSV, and the key-value
//! configuration format.

use crate::analysis::{ScalingResult, SweepResult};
use crate::error::{Error, Result};
use crate::su2::{ErrorModel, Pulse};
use crate::ts::{Family, PulseSequence};
use crate::Config;
use serde_json::Value;
use std::fs;
use std::path::Path;

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a sequence as JSON with a fixed key order and full-precision
/// floats.
pub fn sequence_to_json(seq: &PulseSequence) -> String {
    let mut s = String::new();
    s.push_str("{\n");
    s.push_str(&format!("  \"family\": \"{}\",\n", seq.family));
    s.push_str(&format!("  \"model\": \"{}\",\n", seq.model));
    s.push_str(&format!("  \"order\": {},\n", seq.order));
    s.push_str(&format!(
        "  \"target\": {{ \"phi\": {}, \"theta\": {} }},\n",
        fmt_f(seq.target.phi),
        fmt_f(seq.target.theta)
    ));
    s.push_str("  \"pulses\": [\n");
    for (i, p) in seq.pulses.iter().enumerate() {
        let sep = if i + 1 == seq.pulses.len() { "" } else { "," };
        s.push_str(&format!(
            "    {{ \"phi\": {}, \"theta\": {} }}{sep}\n",
            fmt_f(p.phi),
            fmt_f(p.theta)
        ));
    }
    s.push_str("  ],\n");
    s.push_str("  \"meta\": {\n");
    s.push_str(&format!("    \"pulse_count\": {},\n", seq.pulse_count()));
    s.push_str(&format!(
        "    \"two_pi_equivalents\": {},\n",
        fmt_f(seq.two_pi_equivalents())
    ));
    s.push_str(&format!("    \"narrowband\": {},\n", seq.narrowband));
    s.push_str(&format!("    \"label\": \"{}\"\n", seq.label));
    s.push_str("  }\n");
    s.push_str("}\n");
    s
}

/// Writes a sequence to a JSON file.
pub fn save_sequence(seq: &PulseSequence, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, sequence_to_json(seq))?;
    Ok(())
}

fn get_f64(v: &Value, key: &str) -> Result<f64> {
    v.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Parse(format!("missing or non-numeric field '{key}'")))
}

/// Rebuilds a sequence from JSON and re-runs its verification checks.
pub fn sequence_from_json(text: &str) -> Result<PulseSequence> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let family: Family = v
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("missing field 'family'".into()))?
        .parse()?;
    let model = match v.get("model").and_then(Value::as_str) {
        Some(m) => m.parse()?,
        None if family == Family::Corpse => ErrorModel::Detuning,
        None => ErrorModel::Amplitude,
    };
    let order = v
        .get("order")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("missing or non-integer field 'order'".into()))?
        as usize;
    let target_v = v
        .get("target")
        .ok_or_else(|| Error::Parse("missing field 'target'".into()))?;
    let target = Pulse::new(get_f64(target_v, "phi")?, get_f64(target_v, "theta")?);
    let pulses_v = v
        .get("pulses")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing or non-array field 'pulses'".into()))?;
    let mut pulses = Vec::with_capacity(pulses_v.len());
    for p in pulses_v {
        pulses.push(Pulse::new(get_f64(p, "phi")?, get_f64(p, "theta")?));
    }
    let meta = v.get("meta");
    let narrowband = meta
        .and_then(|m| m.get("narrowband"))
        .and_then(Value::as_bool)
        .unwrap_or(family == Family::N);
    let label = meta
        .and_then(|m| m.get("label"))
        .and_then(Value::as_str)
        .map(str::to_owned)
        .unwrap_or_else(|| format!("{family}{order}"));
    let seq = PulseSequence { family, model, order, target, pulses, narrowband, label };
    seq.check()?;
    Ok(seq)
}

/// Reads and verifies a sequence from a JSON file.
pub fn load_sequence(path: impl AsRef<Path>) -> Result<PulseSequence> {
    sequence_from_json(&fs::read_to_string(path)?)
}

/// Renders a sweep as CSV: one epsilon column followed by one column per
/// sequence, newline-terminated with LF endings.
pub fn sweep_to_csv(r: &SweepResult) -> Result<String> {
    if !r.epsilons.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput(
            "sweep epsilons must be strictly increasing".into(),
        ));
    }
    if r.values.len() != r.epsilons.len() {
        return Err(Error::InvalidInput("sweep shape mismatch".into()));
    }
    let mut s = String::from("epsilon");
    for l in &r.labels {
        s.push(',');
        s.push_str(l);
    }
    s.push('\n');
    for (e, row) in r.epsilons.iter().zip(&r.values) {
        s.push_str(&format!("{e:.12e}"));
        for v in row {
            s.push_str(&format!(",{v:.12e}"));
        }
        s.push('\n');
    }
    Ok(s)
}

/// Writes a sweep to a CSV file.
pub fn save_sweep_csv(r: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, sweep_to_csv(r)?)?;
    Ok(())
}

/// Renders a scaling study as a two-column CSV of order and pulse count.
pub fn scaling_to_csv(r: &ScalingResult) -> String {
    let mut s = String::from("n,count\n");
    for (n, c) in r.orders.iter().zip(&r.pulse_counts) {
        s.push_str(&format!("{n},{c}\n"));
    }
    s
}

/// Writes a scaling study to a CSV file.
pub fn save_scaling_csv(r: &ScalingResult, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, scaling_to_csv(r))?;
    Ok(())
}

/// Parses `KEY = VALUE` configuration text; `#` starts a comment and
/// unknown keys are rejected.
pub fn config_from_str(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected KEY=VALUE", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| Error::Parse(format!("line {}: bad {what} '{value}'", lineno + 1));
        match key {
            "tol_defect" => cfg.tol_defect = value.parse().map_err(|_| bad("float"))?,
            "sn_cap" => cfg.sn_cap = value.parse().map_err(|_| bad("integer"))?,
            "unx_cap" => cfg.unx_cap = value.parse().map_err(|_| bad("integer"))?,
            "detuning_cap" => cfg.detuning_cap = value.parse().map_err(|_| bad("integer"))?,
            "eps_start" => cfg.eps_start = value.parse().map_err(|_| bad("float"))?,
            "eps_stop" => cfg.eps_stop = value.parse().map_err(|_| bad("float"))?,
            "points" => cfg.points = value.parse().map_err(|_| bad("integer"))?,
            other => {
                return Err(Error::Parse(format!(
                    "line {}: unknown key '{other}'",
                    lineno + 1
                )))
            }
        }
    }
    Ok(cfg)
}

/// Reads a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    config_from_str(&fs::read_to_string(path)?)
}
