//! Numeric figures of merit: pointwise error metrics, parallel sweeps over
//! error grids, log-log order fits, and pulse-cost scaling studies.

use crate::error::{Error, Result};
use crate::sk::{make_sb_cfg, make_sk_cfg, sk_step_cfg};
use crate::su2::{distance, execute_sequence, fidelity, ideal_rotation, ErrorModel};
use crate::ts::{Family, PulseSequence};
use crate::Config;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Pointwise figure of merit comparing an executed sequence to its target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Global-phase-free operator distance.
    Trace,
    /// One minus the absolute half-trace overlap.
    Infidelity,
    /// Survival probability of the first basis state under mismatch.
    Signal,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Metric::Trace => "trace",
            Metric::Infidelity => "infidelity",
            Metric::Signal => "signal",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Metric> {
        match s {
            "trace" => Ok(Metric::Trace),
            "infidelity" => Ok(Metric::Infidelity),
            "signal" => Ok(Metric::Signal),
            other => Err(Error::Parse(format!("unknown metric '{other}'"))),
        }
    }
}

/// Evaluates one sequence at one error value under the given model.
pub fn evaluate(seq: &PulseSequence, model: ErrorModel, value: f64, metric: Metric) -> f64 {
    let ideal = ideal_rotation(seq.target);
    let actual = execute_sequence(&seq.pulses, model, value).expect("sequences are nonempty");
    match metric {
        Metric::Trace => distance(&actual, &ideal),
        Metric::Infidelity => 1.0 - fidelity(&actual, &ideal),
        Metric::Signal => {
            let m = actual.matrix().adjoint() * ideal.matrix();
            m[(0, 0)].norm_sqr()
        }
    }
}

/// A metric evaluated for several sequences over a common error grid.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub labels: Vec<String>,
    pub epsilons: Vec<f64>,
    /// One row per grid point, one column per sequence.
    pub values: Vec<Vec<f64>>,
    pub metric: Metric,
}

/// Evaluates the metric for every sequence at every grid point. Rows are
/// computed in parallel; the output is identical for any worker count.
pub fn sweep(
    seqs: &[PulseSequence],
    model: ErrorModel,
    grid: &[f64],
    metric: Metric,
) -> Result<SweepResult> {
    if seqs.is_empty() || grid.is_empty() {
        return Err(Error::InvalidInput("empty sweep request".into()));
    }
    let values: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&e| seqs.iter().map(|s| evaluate(s, model, e, metric)).collect())
        .collect();
    Ok(SweepResult {
        labels: seqs.iter().map(|s| s.label.clone()).collect(),
        epsilons: grid.to_vec(),
        values,
        metric,
    })
}

/// Logarithmically spaced grid with exact endpoints.
pub fn log_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > start && points >= 2) {
        return Err(Error::InvalidInput(format!(
            "bad grid: start {start}, stop {stop}, points {points}"
        )));
    }
    let (a, b) = (start.ln(), stop.ln());
    Ok((0..points)
        .map(|i| {
            if i == 0 {
                start
            } else if i == points - 1 {
                stop
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect())
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (slope, (sy - slope * sx) / n)
}

/// Fits the log-log slope of the trace-distance error against the error
/// value, using grid points inside the scaling window.
pub fn fit_order(seq: &PulseSequence, model: ErrorModel, grid: &[f64]) -> Result<f64> {
    fit_order_metric(seq, model, grid, Metric::Trace)
}

/// As `fit_order` for an arbitrary metric's deviation from its ideal value.
pub fn fit_order_metric(
    seq: &PulseSequence,
    model: ErrorModel,
    grid: &[f64],
    metric: Metric,
) -> Result<f64> {
    let window: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&e| (1e-3..=0.3).contains(&e))
        .collect();
    if window.len() < 8 {
        return Err(Error::InvalidInput(
            "order fit needs at least 8 grid points inside [1e-3, 0.3]".into(),
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for e in window {
        let v = evaluate(seq, model, e, metric);
        let dev = match metric {
            Metric::Signal => (1.0 - v).abs(),
            _ => v,
        };
        if dev > 1e-13 {
            xs.push(e.ln());
            ys.push(dev.ln());
        }
    }
    if xs.len() < 4 {
        return Err(Error::BelowNoiseFloor);
    }
    Ok(linear_fit(&xs, &ys).0)
}

/// Full-turn overhead of a sequence relative to its bare target.
pub fn count_two_pi(seq: &PulseSequence) -> f64 {
    seq.two_pi_equivalents()
}

/// Pulse-cost growth of a ladder family across orders.
#[derive(Clone, Debug)]
pub struct ScalingResult {
    pub family: Family,
    pub orders: Vec<usize>,
    pub pulse_counts: Vec<usize>,
    /// Log-log slope of count against order, fitted over orders >= 4.
    pub fitted_exponent: f64,
}

/// Builds one ladder family order by order and fits how the pulse count
/// grows with the compensation order.
pub fn scaling_study(family: Family, n_max: usize, theta: f64) -> Result<ScalingResult> {
    scaling_study_cfg(family, n_max, theta, &Config::default())
}

/// As `scaling_study`, with limits taken from a configuration.
pub fn scaling_study_cfg(
    family: Family,
    n_max: usize,
    theta: f64,
    cfg: &Config,
) -> Result<ScalingResult> {
    if n_max > 16 {
        return Err(Error::InvalidInput("scaling studies stop at order 16".into()));
    }
    let start = match family {
        Family::Sk => 2,
        Family::Sb => 5,
        other => {
            return Err(Error::InvalidInput(format!(
                "scaling studies cover the ladder families, not {other}"
            )))
        }
    };
    if n_max < start {
        return Err(Error::InvalidInput(format!(
            "scaling for this family starts at order {start}"
        )));
    }
    let mut seq = match family {
        Family::Sk => make_sk_cfg(start, theta, cfg)?,
        _ => make_sb_cfg(start, theta, cfg)?,
    };
    let mut orders = vec![seq.order];
    let mut pulse_counts = vec![seq.pulse_count()];
    while seq.order < n_max {
        seq = sk_step_cfg(&seq, cfg)?;
        orders.push(seq.order);
        pulse_counts.push(seq.pulse_count());
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&n, &c) in orders.iter().zip(&pulse_counts) {
        if n >= 4 {
            xs.push((n as f64).ln());
            ys.push((c as f64).ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::InvalidInput(
            "scaling fit needs at least two orders past 3".into(),
        ));
    }
    let (slope, _) = linear_fit(&xs, &ys);
    Ok(ScalingResult { family, orders, pulse_counts, fitted_exponent: slope })
}
