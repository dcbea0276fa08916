//! Off-resonance compensation: the three-pulse base sequence, single-axis
//! dial words at orders one through four, and the correction ladder that
//! stacks them into higher-order sequences.

use crate::error::{Error, Result};
use crate::series::{defect_tolerance, sequence_series};
use crate::sk::{Axis, AxisBlock};
use crate::su2::{ideal_rotation, pauli_decompose, ErrorModel, Pulse};
use crate::ts::{check_theta, Family, PulseSequence};
use crate::Config;
use nalgebra::Matrix2;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Three same-axis pulses whose first-order detuning response cancels while
/// the target rotation is produced exactly.
pub fn make_corpse(theta: f64) -> Result<PulseSequence> {
    check_theta(theta)?;
    let k1 = ((theta / 2.0).sin() / 2.0).asin();
    let pulses = vec![
        Pulse::new(0.0, 2.0 * PI + theta / 2.0 - k1),
        Pulse::new(PI, 2.0 * PI - 2.0 * k1),
        Pulse::new(0.0, theta / 2.0 - k1),
    ];
    let target = Pulse::new(0.0, theta);
    let s = sequence_series(&pulses, ErrorModel::Detuning, 1)?;
    if s.coeff_norm(1) >= defect_tolerance(&ideal_rotation(target)) {
        return Err(Error::BaseNotCompensating);
    }
    PulseSequence::verified(
        Family::Corpse,
        ErrorModel::Detuning,
        1,
        target,
        pulses,
        false,
        "CORPSE".into(),
    )
}

/// Symmetric same-axis triplet used as a Z generator block under detuning;
/// its first-order coefficient is `-2 i sin(theta/2) Z`.
pub fn detuning_u1z(theta: f64) -> Result<AxisBlock> {
    check_theta(theta)?;
    let pulses = vec![
        Pulse::new(0.0, theta / 2.0),
        Pulse::new(0.0, -theta),
        Pulse::new(0.0, theta / 2.0),
    ];
    let block = AxisBlock {
        axis: Axis::Z,
        level: 1,
        amplitude: 4.0 * (theta / 2.0).sin(),
        sign: 1,
        model: ErrorModel::Detuning,
        pulses,
    };
    block.verify()?;
    Ok(block)
}

fn t_negate(pl: &[Pulse]) -> Vec<Pulse> {
    pl.iter().map(|p| Pulse::new(-p.phi, -p.theta)).collect()
}

fn t_rz(psi: f64, pl: &[Pulse]) -> Vec<Pulse> {
    pl.iter().map(|p| Pulse::new(p.phi + psi, p.theta)).collect()
}

fn t_rz_pi(pl: &[Pulse]) -> Vec<Pulse> {
    t_rz(PI, pl)
}

fn repeat(pl: &[Pulse], n: usize) -> Vec<Pulse> {
    let mut out = Vec::with_capacity(pl.len() * n);
    for _ in 0..n {
        out.extend_from_slice(pl);
    }
    out
}

fn bounce(phi: f64, al: f64) -> Vec<Pulse> {
    vec![Pulse::new(phi, -al), Pulse::new(phi, al)]
}

fn p1(mu: f64, g: f64) -> Result<Vec<Pulse>> {
    if g.abs() > 4.0 {
        return Err(Error::SolveFailed(format!(
            "in-plane dial amplitude {g:.3} out of range"
        )));
    }
    let phi = mu + PI / 2.0 + if g < 0.0 { PI } else { 0.0 };
    let al = (1.0 - g.abs() / 2.0).acos();
    let mut out = bounce(phi, al);
    out.extend(bounce(phi, 2.0 * PI - al));
    Ok(out)
}

fn q1(g: f64) -> Result<Vec<Pulse>> {
    if g.abs() > 2.0 {
        return Err(Error::SolveFailed(format!(
            "z dial amplitude {g:.3} out of range"
        )));
    }
    let x = (g.abs() / 2.0).asin();
    let al = if g > 0.0 { x } else { PI + x };
    let mut out = bounce(0.0, al);
    out.extend(bounce(PI, al));
    Ok(out)
}

fn vx2(a: f64, b: f64) -> Result<Vec<Pulse>> {
    let mut w = p1(PI / 2.0, a)?;
    w.extend(q1(b)?);
    w.extend(p1(PI / 2.0, -a)?);
    w.extend(q1(-b)?);
    Ok(w)
}

fn vz2(a: f64, b: f64) -> Result<Vec<Pulse>> {
    let mut w = p1(0.0, a)?;
    w.extend(p1(PI / 2.0, b)?);
    w.extend(p1(0.0, -a)?);
    w.extend(p1(PI / 2.0, -b)?);
    Ok(w)
}

fn fourfold(w: &[Pulse]) -> Vec<Pulse> {
    let mut out = w.to_vec();
    out.extend(t_negate(w));
    out.extend(t_rz_pi(w));
    out.extend(t_negate(&t_rz_pi(w)));
    out
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo * fhi > 0.0 {
        return Err(Error::SolveFailed(format!(
            "no sign change: f({lo:.3})={flo:.3e}, f({hi:.3})={fhi:.3e}"
        )));
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() < 1e-13 || hi - lo < 1e-15 {
            return Ok(mid);
        }
        if flo * fm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn comps(c: &Matrix2<Complex64>, c0: &Matrix2<Complex64>) -> [f64; 3] {
    let g = (c * c0.adjoint()).map(|e| e * Complex64::new(0.0, 1.0));
    let gh = (g + g.adjoint()).map(|e| e / 2.0);
    pauli_decompose(&gh).real_xyz()
}

fn level_component(pl: &[Pulse], k: usize, axis: usize) -> Result<f64> {
    let s = sequence_series(pl, ErrorModel::Detuning, k)?;
    Ok(comps(&s.coeff(k), &Matrix2::identity())[axis])
}

fn dial2(axis: usize, g: f64) -> Result<Vec<Pulse>> {
    let tmax = 1.4;
    if g.abs() < 1e-13 {
        return Ok(Vec::new());
    }
    if axis == 1 {
        return Ok(t_rz(PI / 2.0, &dial2(0, g)?));
    }
    let word = |t: f64| if axis == 0 { vx2(t, t) } else { vz2(t, t) };
    let amp = |t: f64| level_component(&word(t)?, 2, axis);
    let cap = amp(tmax)?.abs();
    let n_rep = ((g.abs() / (0.9 * cap)).ceil()).max(1.0) as usize;
    let gi = g / n_rep as f64;
    let sref = amp(0.7)?.signum();
    let t = bisect(|t| Ok(amp(t)? - sref * gi.abs()), 1e-8, tmax)?;
    let mut w = word(t)?;
    if gi.signum() != sref {
        w = if axis == 0 { t_rz_pi(&w) } else { t_negate(&w) };
    }
    Ok(repeat(&w, n_rep))
}

fn z3word(t: f64) -> Result<Vec<Pulse>> {
    Ok(fourfold(&vx2(t, t)?))
}

fn dial3z(g: f64) -> Result<Vec<Pulse>> {
    let (lo, hi) = (0.2, 1.7);
    if g.abs() < 1e-13 {
        return Ok(Vec::new());
    }
    let alo = level_component(&z3word(lo)?, 3, 2)?;
    let ahi = level_component(&z3word(hi)?, 3, 2)?;
    let (mn, mx) = (alo.min(ahi), alo.max(ahi));
    let mut n_rep = 1usize;
    loop {
        let gi = g / n_rep as f64;
        if mn * 0.95 < gi && gi < mx * 0.95 {
            break;
        }
        n_rep += 1;
        if n_rep > 100_000 {
            return Err(Error::SolveFailed(format!(
                "z dial target {g:.3e} outside reachable window [{mn:.3e}, {mx:.3e}]"
            )));
        }
    }
    let gi = g / n_rep as f64;
    let t = bisect(|t| Ok(level_component(&z3word(t)?, 3, 2)? - gi), lo, hi)?;
    Ok(repeat(&z3word(t)?, n_rep))
}

fn u3(a: f64, b: f64) -> Result<Vec<Pulse>> {
    let zb = dial2(2, b)?;
    let mut w = p1(PI / 2.0, a)?;
    w.extend_from_slice(&zb);
    w.extend(p1(PI / 2.0, -a)?);
    w.extend(t_negate(&zb));
    Ok(w)
}

fn x3sym(t: f64) -> Result<Vec<Pulse>> {
    let lam = 1.5;
    let w = u3(t, lam * t)?;
    let mut out = w.clone();
    out.extend(t_negate(&w));
    Ok(out)
}

fn dial3x(g: f64) -> Result<Vec<Pulse>> {
    let (lo, hi) = (0.1, 2.0);
    if g.abs() < 1e-13 {
        return Ok(Vec::new());
    }
    let amp = |t: f64| level_component(&x3sym(t)?, 3, 0);
    let sref = amp(1.5)?.signum();
    let cap = amp(hi)?.abs() * 0.95;
    let n_rep = ((g.abs() / cap).ceil()).max(1.0) as usize;
    let gi = g.abs() / n_rep as f64;
    let t = bisect(|t| Ok(amp(t)? - sref * gi), lo, hi)?;
    let mut w = repeat(&x3sym(t)?, n_rep);
    if g.signum() != sref {
        w = t_rz_pi(&w);
    }
    let s = sequence_series(&w, ErrorModel::Detuning, 3)?;
    let cz = comps(&s.coeff(3), &Matrix2::identity())[2];
    w.extend(dial3z(-cz)?);
    Ok(w)
}

fn dial3(axis: usize, g: f64) -> Result<Vec<Pulse>> {
    match axis {
        0 => dial3x(g),
        1 => Ok(t_rz(PI / 2.0, &dial3x(g)?)),
        _ => dial3z(g),
    }
}

fn z4child(a: f64, b: f64) -> Result<Vec<Pulse>> {
    let xb = dial3x(b)?;
    let mut w = p1(PI / 2.0, a)?;
    w.extend_from_slice(&xb);
    w.extend(p1(PI / 2.0, -a)?);
    w.extend(t_rz_pi(&xb));
    let s = sequence_series(&w, ErrorModel::Detuning, 3)?;
    let z3 = comps(&s.coeff(3), &Matrix2::identity())[2];
    if z3.abs() > 1e-12 {
        w.extend(dial3z(-z3)?);
    }
    Ok(w)
}

fn x4child(a: f64, b: f64) -> Result<Vec<Pulse>> {
    let zb = dial3z(b)?;
    let zbm = dial3z(-b)?;
    let mut w = p1(PI / 2.0, a)?;
    w.extend_from_slice(&zb);
    w.extend(p1(PI / 2.0, -a)?);
    w.extend_from_slice(&zbm);
    let s = sequence_series(&w, ErrorModel::Detuning, 3)?;
    let z3 = comps(&s.coeff(3), &Matrix2::identity())[2];
    if z3.abs() > 1e-12 {
        w.extend(dial3z(-z3)?);
    }
    Ok(w)
}

fn z4word(t: f64) -> Result<Vec<Pulse>> {
    let w = z4child(t, 4.0 * t)?;
    let mut out = w.clone();
    out.extend(t_rz_pi(&w));
    Ok(out)
}

fn x4word(t: f64) -> Result<Vec<Pulse>> {
    let w = x4child(t, 4.0 * t)?;
    let mut out = w.clone();
    out.extend(t_negate(&t_rz_pi(&w)));
    Ok(out)
}

fn dial4(axis: usize, g: f64) -> Result<Vec<Pulse>> {
    if g.abs() < 1e-13 {
        return Ok(Vec::new());
    }
    if axis == 1 {
        return Ok(t_rz(PI / 2.0, &dial4(0, g)?));
    }
    let word = |t: f64| if axis == 0 { x4word(t) } else { z4word(t) };
    let amp = |t: f64| level_component(&word(t)?, 4, axis);
    let a1 = amp(1.5)?;
    let sref = a1.signum();
    let n_rep = ((g.abs() / (0.95 * a1.abs())).ceil()).max(1.0) as usize;
    let gi = g.abs() / n_rep as f64;
    let t = bisect(|t| Ok(amp(t)? - sref * gi), 0.05, 1.5)?;
    let mut w = repeat(&word(t)?, n_rep);
    if g.signum() != sref {
        w = if axis == 0 { t_rz_pi(&w) } else { t_negate(&w) };
    }
    Ok(w)
}

/// Corrects the three-pulse base to the requested detuning order by
/// measuring each level's residual generator and appending per-axis dial
/// words that cancel it.
pub fn make_detuning_corrected(n: usize, theta: f64) -> Result<PulseSequence> {
    make_detuning_corrected_cfg(n, theta, &Config::default())
}

/// As `make_detuning_corrected`, with the order cap taken from a
/// configuration.
pub fn make_detuning_corrected_cfg(n: usize, theta: f64, cfg: &Config) -> Result<PulseSequence> {
    if n < 2 {
        return Err(Error::InvalidInput(
            "corrected orders start at 2; use the base sequence for order 1".into(),
        ));
    }
    if n > cfg.detuning_cap {
        return Err(Error::RecursionCap { level: n, cap: cfg.detuning_cap });
    }
    let base = make_corpse(theta)?;
    let mut pulses = base.pulses.clone();
    let c0 = sequence_series(&pulses, ErrorModel::Detuning, 0)?.coeff(0);
    for lvl in 2..=n {
        let s = sequence_series(&pulses, ErrorModel::Detuning, lvl)?;
        let g = comps(&s.coeff(lvl), &c0);
        for (ax, gax) in g.iter().enumerate() {
            if gax.abs() > 1e-12 {
                let dial = match lvl {
                    2 => dial2(ax, -gax)?,
                    3 => dial3(ax, -gax)?,
                    _ => dial4(ax, -gax)?,
                };
                pulses.extend(dial);
            }
        }
    }
    PulseSequence::verified(
        Family::Corpse,
        ErrorModel::Detuning,
        n,
        base.target,
        pulses,
        false,
        format!("CORPSE{n}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn base_sequence_cancels_first_order() {
        for theta in [PI / 3.0, PI / 2.0, PI] {
            let seq = make_corpse(theta).unwrap();
            assert_eq!(seq.order, 1);
            assert_eq!(seq.pulse_count(), 3);
            let s = sequence_series(&seq.pulses, ErrorModel::Detuning, 1).unwrap();
            assert!(s.coeff_norm(1) < 1e-9);
        }
    }

    #[test]
    fn base_sequence_angles_are_frozen() {
        let seq = make_corpse(PI / 2.0).unwrap();
        let k1 = 0.36136712390670780559;
        assert_abs_diff_eq!(seq.pulses[0].theta, 2.0 * PI + PI / 4.0 - k1, epsilon = 1e-15);
        assert_abs_diff_eq!(seq.pulses[1].theta, 2.0 * PI - 2.0 * k1, epsilon = 1e-15);
        assert_abs_diff_eq!(seq.pulses[2].theta, PI / 4.0 - k1, epsilon = 1e-15);
        assert_abs_diff_eq!(seq.pulses[1].phi, PI);
    }

    #[test]
    fn triplet_block_follows_half_angle_sine() {
        for theta in [PI / 3.0, PI / 2.0, PI] {
            let b = detuning_u1z(theta).unwrap();
            assert_abs_diff_eq!(b.amplitude, 4.0 * (theta / 2.0).sin(), epsilon = 1e-15);
            let s = sequence_series(&b.pulses, ErrorModel::Detuning, 1).unwrap();
            let g = comps(&s.coeff(1), &Matrix2::identity());
            assert_abs_diff_eq!(g[2], 2.0 * (theta / 2.0).sin(), epsilon = 1e-12);
            assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-12);
        }
        let g = comps(
            &sequence_series(&detuning_u1z(PI).unwrap().pulses, ErrorModel::Detuning, 1)
                .unwrap()
                .coeff(1),
            &Matrix2::identity(),
        );
        assert!((g[2] - PI).abs() > 0.1);
    }

    #[test]
    fn second_order_dials_round_trip() {
        for (axis, g) in [(0usize, 1.0), (1, -0.5), (2, 2.0)] {
            let w = dial2(axis, g).unwrap();
            let s = sequence_series(&w, ErrorModel::Detuning, 2).unwrap();
            assert!(s.coeff_norm(1) < 1e-10, "axis {axis}");
            let c = comps(&s.coeff(2), &Matrix2::identity());
            for ax in 0..3 {
                let want = if ax == axis { g } else { 0.0 };
                assert_abs_diff_eq!(c[ax], want, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn third_order_dials_round_trip() {
        for (axis, g) in [(0usize, 1.5), (2, -1.0)] {
            let w = dial3(axis, g).unwrap();
            let s = sequence_series(&w, ErrorModel::Detuning, 3).unwrap();
            assert!(s.coeff_norm(1) < 1e-9);
            assert!(s.coeff_norm(2) < 1e-9);
            let c = comps(&s.coeff(3), &Matrix2::identity());
            for ax in 0..3 {
                let want = if ax == axis { g } else { 0.0 };
                assert_abs_diff_eq!(c[ax], want, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn fourth_order_dial_rounds_trip() {
        let w = dial4(2, 1.0).unwrap();
        let s = sequence_series(&w, ErrorModel::Detuning, 4).unwrap();
        for k in 1..=3 {
            assert!(s.coeff_norm(k) < 1e-9, "k={k}");
        }
        let c = comps(&s.coeff(4), &Matrix2::identity());
        assert_abs_diff_eq!(c[2], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(c[0], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn corrected_sequences_reach_requested_orders() {
        let c2 = make_detuning_corrected(2, PI / 2.0).unwrap();
        assert_eq!(c2.order, 2);
        assert_eq!(c2.label, "CORPSE2");
        let c3 = make_detuning_corrected(3, PI / 2.0).unwrap();
        assert_eq!(c3.order, 3);
        let s = sequence_series(&c3.pulses, ErrorModel::Detuning, 4).unwrap();
        for k in 1..=3 {
            assert!(s.coeff_norm(k) < 1e-9, "k={k}: {}", s.coeff_norm(k));
        }
    }

    #[test]
    fn invalid_requests_are_rejected() {
        assert!(make_detuning_corrected(1, PI / 2.0).is_err());
        assert!(matches!(
            make_detuning_corrected(5, PI / 2.0),
            Err(Error::RecursionCap { level: 5, cap: 4 })
        ));
        assert!(make_corpse(0.0).is_err());
        assert!(make_corpse(7.0).is_err());
    }
}
