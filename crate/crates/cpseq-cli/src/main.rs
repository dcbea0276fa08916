//! Command-line front end: synthesize verified sequences to JSON, evaluate
//! and sweep error metrics, fit compensation orders, print series
//! coefficients, and run pulse-cost scaling studies.

use clap::{Parser, Subcommand};
use cpseq::analysis::{
    evaluate, fit_order_metric, log_grid, scaling_study_cfg, sweep, Metric,
};
use cpseq::detuning::{make_corpse, make_detuning_corrected_cfg};
use cpseq::io::{
    load_config, load_sequence, save_scaling_csv, save_sequence, sweep_to_csv,
};
use cpseq::series::{sequence_series, verify_order_with_tol};
use cpseq::sk::{make_sb_cfg, make_sk_cfg};
use cpseq::su2::{frobenius, ideal_rotation, pauli_decompose, ErrorModel, Pulse};
use cpseq::ts::{
    make_broadband_cfg, make_narrowband_cfg, make_passband_cfg, wimperis, Family, PulseSequence,
};
use cpseq::Config;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cpseq", version, about = "Composite pulse synthesis and analysis")]
struct Cli {
    /// Optional KEY=VALUE configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Reserved for future stochastic features; accepted and unused.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct a verified sequence, print its order report, and write JSON.
    Synth {
        /// P, B, N, SK, SB, PB1, BB1, NB1, or CORPSE.
        #[arg(long)]
        family: String,
        /// Compensation order; P/B/N take even orders, aliases take none.
        #[arg(long)]
        order: Option<usize>,
        /// Target rotation angle in radians.
        #[arg(long)]
        theta: f64,
        /// Target rotation-axis phase in radians.
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        /// Output JSON path; omitted means report-only.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one metric of a sequence file at one error value.
    Eval {
        /// Sequence JSON file.
        #[arg(long)]
        seq: PathBuf,
        /// amplitude or detuning; defaults to the file's model.
        #[arg(long)]
        model: Option<String>,
        /// Error value to evaluate at.
        #[arg(long)]
        value: f64,
        /// trace, infidelity, or signal.
        #[arg(long, default_value = "trace")]
        metric: String,
    },
    /// Evaluate a metric for several constructed sequences over an error grid.
    Sweep {
        /// Comma-separated family names.
        #[arg(long, value_delimiter = ',')]
        families: Vec<String>,
        /// Comma-separated orders: one per family, or one for all.
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
        /// Target rotation angle in radians.
        #[arg(long, default_value_t = PI)]
        theta: f64,
        /// amplitude or detuning.
        #[arg(long, default_value = "amplitude")]
        model: String,
        /// Grid start; defaults from configuration.
        #[arg(long)]
        eps_start: Option<f64>,
        /// Grid stop; defaults from configuration.
        #[arg(long)]
        eps_stop: Option<f64>,
        /// Grid size; defaults from configuration.
        #[arg(long)]
        points: Option<usize>,
        /// Logarithmic spacing (the default when no explicit grid is given).
        #[arg(long)]
        log: bool,
        /// trace, infidelity, or signal.
        #[arg(long, default_value = "trace")]
        metric: String,
        /// Output CSV path; omitted prints to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; output bytes are identical for any value.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Fit the log-log error slope of a sequence file.
    Orderfit {
        /// Sequence JSON file.
        #[arg(long)]
        seq: PathBuf,
        /// amplitude or detuning; defaults to the file's model.
        #[arg(long)]
        model: Option<String>,
        /// trace, infidelity, or signal.
        #[arg(long, default_value = "trace")]
        metric: String,
    },
    /// Print series coefficients of a sequence file with Pauli decompositions.
    Series {
        /// Sequence JSON file.
        #[arg(long)]
        seq: PathBuf,
        /// Highest order to expand to.
        #[arg(long)]
        degree: usize,
        /// amplitude or detuning; defaults to the file's model.
        #[arg(long)]
        model: Option<String>,
    },
    /// Record how ladder pulse counts grow with order and fit the exponent.
    Scaling {
        /// SK or SB.
        #[arg(long)]
        family: String,
        /// Highest order to build.
        #[arg(long)]
        max_order: usize,
        /// Target rotation angle in radians.
        #[arg(long, default_value_t = PI)]
        theta: f64,
        /// Output CSV path for the order/count table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

fn flag_err(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

fn build_err(e: cpseq::Error) -> Failure {
    Failure { code: 3, msg: e.to_string() }
}

fn file_err(e: cpseq::Error) -> Failure {
    Failure { code: 4, msg: e.to_string() }
}

fn main() -> ExitCode {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(path) => load_config(path).map_err(|e| flag_err(e.to_string()))?,
        None => Config::default(),
    };
    match cli.cmd {
        Cmd::Synth { family, order, theta, phi, out } => {
            cmd_synth(&family, order, theta, phi, out.as_deref(), &cfg)
        }
        Cmd::Eval { seq, model, value, metric } => cmd_eval(&seq, model.as_deref(), value, &metric),
        Cmd::Sweep {
            families,
            orders,
            theta,
            model,
            eps_start,
            eps_stop,
            points,
            log,
            metric,
            out,
            jobs,
        } => cmd_sweep(
            &families, &orders, theta, &model, eps_start, eps_stop, points, log, &metric,
            out.as_deref(), jobs, &cfg,
        ),
        Cmd::Orderfit { seq, model, metric } => cmd_orderfit(&seq, model.as_deref(), &metric, &cfg),
        Cmd::Series { seq, degree, model } => cmd_series(&seq, degree, model.as_deref()),
        Cmd::Scaling { family, max_order, theta, out } => {
            cmd_scaling(&family, max_order, theta, out.as_deref(), &cfg)
        }
    }
}

fn parse_model(s: &str) -> Result<ErrorModel, Failure> {
    s.parse().map_err(|_| flag_err(format!("unknown model '{s}'")))
}

fn parse_metric(s: &str) -> Result<Metric, Failure> {
    s.parse().map_err(|_| flag_err(format!("unknown metric '{s}'")))
}

fn build_sequence(
    family: &str,
    order: Option<usize>,
    theta: f64,
    cfg: &Config,
) -> Result<PulseSequence, Failure> {
    let need = || order.ok_or_else(|| flag_err(format!("--order is required for family {family}")));
    match family {
        "P" | "B" | "N" => {
            let n = need()?;
            if n % 2 != 0 {
                return Err(flag_err(format!("family {family} takes an even --order")));
            }
            if family == "B" && n == 0 {
                return Err(flag_err("family B orders start at 2"));
            }
            let j = n / 2;
            let built = match family {
                "P" => make_passband_cfg(j, theta, cfg),
                "B" => make_broadband_cfg(j, theta, cfg),
                _ => make_narrowband_cfg(j, theta, cfg),
            };
            built.map_err(build_err)
        }
        "SK" => {
            let n = need()?;
            if n == 0 {
                return Err(flag_err("family SK orders start at 1"));
            }
            make_sk_cfg(n, theta, cfg).map_err(build_err)
        }
        "SB" => {
            let n = need()?;
            if n < 5 {
                return Err(flag_err("family SB orders start at 5"));
            }
            make_sb_cfg(n, theta, cfg).map_err(build_err)
        }
        "PB1" | "BB1" | "NB1" => {
            if order.is_some() {
                return Err(flag_err(format!("{family} fixes its own order; drop --order")));
            }
            wimperis(family.parse().map_err(|e: cpseq::Error| flag_err(e.to_string()))?, theta)
                .map_err(build_err)
        }
        "CORPSE" => {
            let n = need()?;
            match n {
                0 => Err(flag_err("family CORPSE orders start at 1")),
                1 => make_corpse(theta).map_err(build_err),
                _ => make_detuning_corrected_cfg(n, theta, cfg).map_err(build_err),
            }
        }
        other => Err(flag_err(format!("unknown family '{other}'"))),
    }
}

fn sequence_tolerance(seq: &PulseSequence, cfg: &Config) -> f64 {
    cfg.tol_defect * frobenius(&ideal_rotation(seq.target).matrix()).max(1.0)
}

fn print_order_report(seq: &PulseSequence, cfg: &Config) -> Result<(), Failure> {
    let target = ideal_rotation(seq.target);
    let tol = sequence_tolerance(seq, cfg);
    let report = verify_order_with_tol(&seq.pulses, seq.model, &target, seq.order, tol)
        .map_err(build_err)?;
    println!(
        "{} (model {}): {} pulses, claimed order {}, two-pi overhead {:.12e}",
        seq.label,
        seq.model,
        seq.pulse_count(),
        seq.order,
        seq.two_pi_equivalents()
    );
    for (k, norm) in report.low_coefficient_norms.iter().enumerate() {
        println!("|C_{}| = {:.12e}", k + 1, norm);
    }
    println!("|C_{}| = {:.12e}", seq.order + 1, report.next_coefficient_norm);
    if report.passed {
        println!("verified to order {} (tolerance {:.12e})", seq.order, report.tolerance);
    } else {
        return Err(Failure { code: 3, msg: format!("order {} not verified", seq.order) });
    }
    if report.exceeds_claimed_order {
        println!("next coefficient also vanishes; the sequence beats its claim");
    }
    Ok(())
}

fn cmd_synth(
    family: &str,
    order: Option<usize>,
    theta: f64,
    phi: f64,
    out: Option<&std::path::Path>,
    cfg: &Config,
) -> Result<(), Failure> {
    let mut seq = build_sequence(family, order, theta, cfg)?;
    if phi != 0.0 {
        for p in &mut seq.pulses {
            *p = Pulse::new(p.phi + phi, p.theta);
        }
        seq.target = Pulse::new(seq.target.phi + phi, seq.target.theta);
        seq.check().map_err(build_err)?;
    }
    print_order_report(&seq, cfg)?;
    if let Some(path) = out {
        save_sequence(&seq, path).map_err(build_err)?;
    }
    Ok(())
}

fn cmd_eval(
    path: &std::path::Path,
    model: Option<&str>,
    value: f64,
    metric: &str,
) -> Result<(), Failure> {
    let seq = load_sequence(path).map_err(file_err)?;
    let model = match model {
        Some(m) => parse_model(m)?,
        None => seq.model,
    };
    let metric = parse_metric(metric)?;
    println!("{:.12e}", evaluate(&seq, model, value, metric));
    Ok(())
}

fn linear_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>, Failure> {
    if !(stop > start && points >= 2) {
        return Err(flag_err(format!(
            "bad grid: start {start}, stop {stop}, points {points}"
        )));
    }
    Ok((0..points)
        .map(|i| {
            if i == points - 1 {
                stop
            } else {
                start + (stop - start) * i as f64 / (points - 1) as f64
            }
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    families: &[String],
    orders: &[usize],
    theta: f64,
    model: &str,
    eps_start: Option<f64>,
    eps_stop: Option<f64>,
    points: Option<usize>,
    log: bool,
    metric: &str,
    out: Option<&std::path::Path>,
    jobs: Option<usize>,
    cfg: &Config,
) -> Result<(), Failure> {
    if families.is_empty() {
        return Err(flag_err("--families must name at least one family"));
    }
    let orders: Vec<usize> = match orders.len() {
        0 => return Err(flag_err("--orders must give at least one order")),
        1 => vec![orders[0]; families.len()],
        n if n == families.len() => orders.to_vec(),
        _ => return Err(flag_err("--orders must give one order, or one per family")),
    };
    let model = parse_model(model)?;
    let metric = parse_metric(metric)?;
    let explicit = eps_start.is_some() || eps_stop.is_some() || points.is_some();
    let start = eps_start.unwrap_or(cfg.eps_start);
    let stop = eps_stop.unwrap_or(cfg.eps_stop);
    let n = points.unwrap_or(cfg.points);
    let grid = if log || !explicit {
        log_grid(start, stop, n).map_err(|e| flag_err(e.to_string()))?
    } else {
        linear_grid(start, stop, n)?
    };
    let mut seqs = Vec::new();
    for (family, &order) in families.iter().zip(&orders) {
        seqs.push(build_sequence(family, Some(order), theta, cfg)?);
    }
    let result = match jobs {
        Some(0) => return Err(flag_err("--jobs must be at least 1")),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Failure { code: 3, msg: e.to_string() })?
            .install(|| sweep(&seqs, model, &grid, metric)),
        None => sweep(&seqs, model, &grid, metric),
    }
    .map_err(build_err)?;
    let csv = sweep_to_csv(&result).map_err(build_err)?;
    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| Failure { code: 3, msg: e.to_string() })?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_orderfit(
    path: &std::path::Path,
    model: Option<&str>,
    metric: &str,
    cfg: &Config,
) -> Result<(), Failure> {
    let seq = load_sequence(path).map_err(file_err)?;
    let model = match model {
        Some(m) => parse_model(m)?,
        None => seq.model,
    };
    let metric = parse_metric(metric)?;
    let grid = log_grid(cfg.eps_start, cfg.eps_stop, cfg.points).map_err(build_err)?;
    let slope = fit_order_metric(&seq, model, &grid, metric).map_err(build_err)?;
    println!("{slope:.12e}");
    Ok(())
}

fn fmt_c(z: Complex64) -> String {
    format!("{:+.12e}{:+.12e}i", z.re, z.im)
}

fn cmd_series(path: &std::path::Path, degree: usize, model: Option<&str>) -> Result<(), Failure> {
    let seq = load_sequence(path).map_err(file_err)?;
    let model = match model {
        Some(m) => parse_model(m)?,
        None => seq.model,
    };
    let s = sequence_series(&seq.pulses, model, degree).map_err(build_err)?;
    for k in 0..=degree {
        let c = s.coeff(k);
        let p = pauli_decompose(&c);
        println!("C_{k}: norm {:.12e}", s.coeff_norm(k));
        println!("  [ {}  {} ]", fmt_c(c[(0, 0)]), fmt_c(c[(0, 1)]));
        println!("  [ {}  {} ]", fmt_c(c[(1, 0)]), fmt_c(c[(1, 1)]));
        println!(
            "  pauli: I={} X={} Y={} Z={}",
            fmt_c(p.a_i),
            fmt_c(p.a_x),
            fmt_c(p.a_y),
            fmt_c(p.a_z)
        );
    }
    Ok(())
}

fn cmd_scaling(
    family: &str,
    max_order: usize,
    theta: f64,
    out: Option<&std::path::Path>,
    cfg: &Config,
) -> Result<(), Failure> {
    let family: Family = family
        .parse()
        .map_err(|e: cpseq::Error| flag_err(e.to_string()))?;
    if !matches!(family, Family::Sk | Family::Sb) {
        return Err(flag_err("scaling studies cover the SK and SB families"));
    }
    if max_order > 16 {
        return Err(flag_err("--max-order stops at 16"));
    }
    let result = scaling_study_cfg(family, max_order, theta, cfg).map_err(build_err)?;
    if let Some(path) = out {
        save_scaling_csv(&result, path).map_err(build_err)?;
    }
    println!("{:.12e}", result.fitted_exponent);
    Ok(())
}
