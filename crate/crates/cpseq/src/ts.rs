//! Product-formula sequence families: passband Pn, broadband Bn, narrowband
//! Nn, and their single-stage aliases PB1/BB1/NB1.

use crate::error::{Error, Result};
use crate::series::verify_order;
use crate::su2::{distance, execute_sequence, ideal_rotation, ErrorModel, Pulse};
use crate::Config;
use std::f64::consts::PI;

/// Which constructor produced a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Passband product-formula sequence.
    P,
    /// Broadband product-formula sequence.
    B,
    /// Narrowband product-formula sequence.
    N,
    /// Commutator-ladder sequence built from a bare pulse.
    Sk,
    /// Commutator-ladder sequence built from a broadband base.
    Sb,
    /// Sequence loaded from a file rather than synthesized.
    Raw,
    /// Off-resonance compensating sequence and its ladder extensions.
    Corpse,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::P => "P",
            Family::B => "B",
            Family::N => "N",
            Family::Sk => "SK",
            Family::Sb => "SB",
            Family::Raw => "RAW",
            Family::Corpse => "CORPSE",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        match s {
            "P" => Ok(Family::P),
            "B" => Ok(Family::B),
            "N" => Ok(Family::N),
            "SK" => Ok(Family::Sk),
            "SB" => Ok(Family::Sb),
            "RAW" => Ok(Family::Raw),
            "CORPSE" => Ok(Family::Corpse),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }
}

/// The single-stage sequence aliases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wimperis {
    /// Passband alias, equal to the j = 1 passband sequence.
    Pb1,
    /// Broadband alias, equal to the j = 1 broadband sequence.
    Bb1,
    /// Narrowband alias, equal to the j = 1 narrowband sequence.
    Nb1,
}

impl std::str::FromStr for Wimperis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Wimperis> {
        match s {
            "PB1" => Ok(Wimperis::Pb1),
            "BB1" => Ok(Wimperis::Bb1),
            "NB1" => Ok(Wimperis::Nb1),
            other => Err(Error::Parse(format!("unknown sequence name {other:?}"))),
        }
    }
}

/// A synthesized composite rotation: target, pulse list, and the claimed
/// compensation order, verified at construction.
#[derive(Clone, Debug)]
pub struct PulseSequence {
    pub family: Family,
    /// Error model the order claim refers to.
    pub model: ErrorModel,
    /// Claimed compensation order.
    pub order: usize,
    /// The rotation the sequence implements.
    pub target: Pulse,
    /// Execution-ordered pulse list; the first entry acts first.
    pub pulses: Vec<Pulse>,
    /// True for sequences built to shrink, not widen, the working window.
    pub narrowband: bool,
    /// Short display name used for sweep columns and reports.
    pub label: String,
}

impl PulseSequence {
    /// Builds a sequence and checks both construction invariants: the
    /// error-free execution reproduces the target up to sign, and the series
    /// oracle confirms the claimed order.
    pub(crate) fn verified(
        family: Family,
        model: ErrorModel,
        order: usize,
        target: Pulse,
        pulses: Vec<Pulse>,
        narrowband: bool,
        label: String,
    ) -> Result<PulseSequence> {
        let seq = PulseSequence { family, model, order, target, pulses, narrowband, label };
        seq.check()?;
        Ok(seq)
    }

    /// Re-runs the construction invariants; used on loaded files.
    pub fn check(&self) -> Result<()> {
        let ideal = ideal_rotation(self.target);
        let at_zero = execute_sequence(&self.pulses, self.model, 0.0)?;
        let d = distance(&at_zero, &ideal);
        if d >= 1e-12 {
            return Err(Error::NotAtTarget(d));
        }
        let rep = verify_order(&self.pulses, self.model, &ideal, self.order)?;
        if !rep.passed {
            return Err(Error::OrderVerification(format!(
                "{}: claimed order {} but a lower coefficient survives (norms {:?})",
                self.label, self.order, rep.low_coefficient_norms
            )));
        }
        Ok(())
    }

    pub fn pulse_count(&self) -> usize {
        self.pulses.len()
    }

    /// Total corrective rotation angle beyond the target itself, in units of
    /// full turns.
    pub fn two_pi_equivalents(&self) -> f64 {
        let total: f64 = self.pulses.iter().map(|p| p.theta.abs()).sum();
        ((total - self.target.theta.abs()) / (2.0 * PI)).max(0.0)
    }
}

/// The three-pulse building block `(phi1, m pi), (phi2, 2m pi), (phi1, m pi)`.
pub fn s1(phi1: f64, phi2: f64, m: i64) -> Vec<Pulse> {
    let mp = m as f64 * PI;
    vec![
        Pulse::new(phi1, mp),
        Pulse::new(phi2, 2.0 * mp),
        Pulse::new(phi1, mp),
    ]
}

/// Signed triplet scales of the level-`n` recursion: level `n` repeats the
/// level `n-1` word 4^(n-1) times on each side of a middle copy at scale -2m.
fn leaf_scales(n: usize, m: i64, cap: usize) -> Result<Vec<i64>> {
    if n == 0 || n > cap {
        return Err(Error::RecursionCap { level: n, cap });
    }
    if n == 1 {
        return Ok(vec![m]);
    }
    let side_once = leaf_scales(n - 1, m, cap)?;
    let mid = leaf_scales(n - 1, -2 * m, cap)?;
    let reps = 4usize.pow(n as u32 - 2) * 4;
    let mut out = Vec::with_capacity(side_once.len() * 2 * reps + mid.len());
    for _ in 0..reps {
        out.extend_from_slice(&side_once);
    }
    out.extend_from_slice(&mid);
    for _ in 0..reps {
        out.extend_from_slice(&side_once);
    }
    Ok(out)
}

/// Recursive symmetrized product word, expanded to its pulse list.
pub fn sn(n: usize, phi1: f64, phi2: f64, m: i64) -> Result<Vec<Pulse>> {
    sn_cfg(n, phi1, phi2, m, &Config::default())
}

/// As `sn`, with the recursion cap taken from a configuration.
pub fn sn_cfg(n: usize, phi1: f64, phi2: f64, m: i64, cfg: &Config) -> Result<Vec<Pulse>> {
    let scales = leaf_scales(n, m, cfg.sn_cap)?;
    let mut out = Vec::with_capacity(scales.len() * 3);
    for s in scales {
        out.extend(s1(phi1, phi2, s));
    }
    Ok(out)
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 2.0 * PI) {
        return Err(Error::InvalidInput(format!(
            "target angle {theta} outside (0, 2pi]"
        )));
    }
    Ok(())
}

/// The phase-formula scale factors: 1, 6, 180, ...
fn phase_factor(j: usize) -> f64 {
    let mut f = 1.0f64;
    for i in 2..=j {
        f *= 2f64.powi(2 * i as i32 - 1) - 2.0;
    }
    f
}

fn corrective_phase(j: usize, theta: f64) -> Result<f64> {
    let arg = -theta / (8.0 * PI * phase_factor(j));
    if arg.abs() > 1.0 {
        return Err(Error::PhaseUnsolvable(arg));
    }
    Ok(arg.acos())
}

/// Passband sequence of order `2j`; `j = 0` is the bare pulse.
pub fn make_passband(j: usize, theta: f64) -> Result<PulseSequence> {
    make_passband_cfg(j, theta, &Config::default())
}

/// As `make_passband`, with limits taken from a configuration.
pub fn make_passband_cfg(j: usize, theta: f64, cfg: &Config) -> Result<PulseSequence> {
    check_theta(theta)?;
    let target = Pulse::new(0.0, theta);
    let mut pulses = vec![target];
    if j > 0 {
        let phi = corrective_phase(j, theta)?;
        pulses.extend(sn_cfg(j, phi, -phi, 2, cfg)?);
    }
    PulseSequence::verified(
        Family::P,
        ErrorModel::Amplitude,
        2 * j,
        target,
        pulses,
        false,
        format!("P{}", 2 * j),
    )
}

/// Broadband sequence of order `2j`: the passband word with each triplet
/// rebuilt at half scale and a doubled phase cosine.
pub fn make_broadband(j: usize, theta: f64) -> Result<PulseSequence> {
    make_broadband_cfg(j, theta, &Config::default())
}

/// As `make_broadband`, with limits taken from a configuration.
pub fn make_broadband_cfg(j: usize, theta: f64, cfg: &Config) -> Result<PulseSequence> {
    check_theta(theta)?;
    if j == 0 {
        return Err(Error::InvalidInput("broadband order must be at least 2".into()));
    }
    let target = Pulse::new(0.0, theta);
    let phi = corrective_phase(j, theta)?;
    let arg_b = 2.0 * phi.cos();
    if arg_b.abs() > 1.0 {
        return Err(Error::PhaseUnsolvable(arg_b));
    }
    let phi_b = arg_b.acos();
    let mut pulses = vec![target];
    for s in leaf_scales(j, 2, cfg.sn_cap)? {
        let half = s / 2;
        let parity = (half.unsigned_abs() % 2) as f64;
        pulses.extend(s1(phi_b, -phi_b + 4.0 * phi_b * parity, half));
    }
    PulseSequence::verified(
        Family::B,
        ErrorModel::Amplitude,
        2 * j,
        target,
        pulses,
        false,
        format!("B{}", 2 * j),
    )
}

/// Narrowband sequence derived from the passband word by halving every
/// corrective angle; carries no compensation-order claim.
pub fn make_narrowband(j: usize, theta: f64) -> Result<PulseSequence> {
    make_narrowband_cfg(j, theta, &Config::default())
}

/// As `make_narrowband`, with limits taken from a configuration.
pub fn make_narrowband_cfg(j: usize, theta: f64, cfg: &Config) -> Result<PulseSequence> {
    let base = make_passband_cfg(j, theta, cfg)?;
    let mut pulses = vec![base.target];
    for p in &base.pulses[1..] {
        pulses.push(Pulse::new(p.phi, p.theta / 2.0));
    }
    PulseSequence::verified(
        Family::N,
        ErrorModel::Amplitude,
        0,
        base.target,
        pulses,
        true,
        format!("N{}", 2 * j),
    )
}

/// The single-stage aliases: each returns its `j = 1` family constructor.
pub fn wimperis(name: Wimperis, theta: f64) -> Result<PulseSequence> {
    match name {
        Wimperis::Pb1 => make_passband(1, theta),
        Wimperis::Bb1 => make_broadband(1, theta),
        Wimperis::Nb1 => make_narrowband(1, theta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{execute_sequence, fidelity, imperfect_rotation};
    use approx::assert_abs_diff_eq;

    #[test]
    fn triplet_expansion() {
        let phi = 0.9;
        let t = s1(phi, -phi, 2);
        assert_eq!(t.len(), 3);
        assert_abs_diff_eq!(t[0].theta, 2.0 * PI);
        assert_abs_diff_eq!(t[1].theta, 4.0 * PI);
        assert_abs_diff_eq!(t[1].phi, -phi);
        let t = s1(phi, 3.0 * phi, 1);
        assert_abs_diff_eq!(t[0].theta, PI);
        assert_abs_diff_eq!(t[1].phi, 3.0 * phi);
        let t = s1(phi, -phi, -4);
        assert_abs_diff_eq!(t[0].theta, -4.0 * PI);
        assert_abs_diff_eq!(t[1].theta, -8.0 * PI);
    }

    #[test]
    fn recursion_counts_and_shape() {
        assert_eq!(sn(1, 0.3, -0.3, 2).unwrap().len(), 3);
        assert_eq!(sn(2, 0.3, -0.3, 2).unwrap().len(), 27);
        assert_eq!(sn(3, 0.3, -0.3, 2).unwrap().len(), 891);
        let w = sn(2, 0.3, -0.3, 2).unwrap();
        let side = sn(1, 0.3, -0.3, 2).unwrap();
        let mid = sn(1, 0.3, -0.3, -4).unwrap();
        let mut want = Vec::new();
        for _ in 0..4 {
            want.extend_from_slice(&side);
        }
        want.extend_from_slice(&mid);
        for _ in 0..4 {
            want.extend_from_slice(&side);
        }
        assert_eq!(w, want);
        assert!(matches!(sn(7, 0.1, -0.1, 2), Err(Error::RecursionCap { level: 7, cap: 6 })));
    }

    #[test]
    fn phase_factors_and_angles() {
        assert_abs_diff_eq!(phase_factor(1), 1.0);
        assert_abs_diff_eq!(phase_factor(2), 6.0);
        assert_abs_diff_eq!(phase_factor(3), 180.0);
        let phi = corrective_phase(1, PI).unwrap();
        assert_abs_diff_eq!(phi, (-0.125f64).acos(), epsilon = 1e-15);
        assert_abs_diff_eq!(phi, 1.6961241579629620161, epsilon = 1e-15);
    }

    #[test]
    fn passband_shapes() {
        let p0 = make_passband(0, 1.0).unwrap();
        assert_eq!(p0.pulse_count(), 1);
        assert_eq!(p0.order, 0);
        assert_abs_diff_eq!(p0.two_pi_equivalents(), 0.0);
        let p2 = make_passband(1, PI).unwrap();
        assert_eq!(p2.pulse_count(), 4);
        assert_eq!(p2.order, 2);
        assert_abs_diff_eq!(p2.two_pi_equivalents(), 4.0, epsilon = 1e-12);
        let p4 = make_passband(2, PI).unwrap();
        assert_eq!(p4.pulse_count(), 28);
        assert_eq!(p4.order, 4);
    }

    #[test]
    fn broadband_single_stage_is_explicit() {
        let b2 = make_broadband(1, PI).unwrap();
        assert_eq!(b2.pulse_count(), 4);
        let phi_b = (-0.25f64).acos();
        assert_abs_diff_eq!(phi_b, 1.8234765819369752727, epsilon = 1e-15);
        let want = [
            (0.0, PI),
            (phi_b, PI),
            (3.0 * phi_b, 2.0 * PI),
            (phi_b, PI),
        ];
        for (p, (phi, theta)) in b2.pulses.iter().zip(want) {
            assert_abs_diff_eq!(p.phi, phi, epsilon = 1e-15);
            assert_abs_diff_eq!(p.theta, theta, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(b2.two_pi_equivalents(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn narrowband_halves_corrective_angles() {
        let n2 = make_narrowband(1, PI).unwrap();
        let phi = (-0.125f64).acos();
        assert_eq!(n2.order, 0);
        assert!(n2.narrowband);
        let want = [(0.0, PI), (phi, PI), (-phi, 2.0 * PI), (phi, PI)];
        for (p, (f, t)) in n2.pulses.iter().zip(want) {
            assert_abs_diff_eq!(p.phi, f, epsilon = 1e-15);
            assert_abs_diff_eq!(p.theta, t, epsilon = 1e-15);
        }
        let ideal = ideal_rotation(n2.target);
        let at0 = execute_sequence(&n2.pulses, ErrorModel::Amplitude, 0.0).unwrap();
        assert!(distance(&at0, &ideal) < 1e-13);
    }

    #[test]
    fn aliases_match_their_constructors() {
        for theta in [PI / 3.0, PI / 2.0, PI] {
            for (name, j_builder) in [
                (Wimperis::Pb1, make_passband(1, theta).unwrap()),
                (Wimperis::Bb1, make_broadband(1, theta).unwrap()),
                (Wimperis::Nb1, make_narrowband(1, theta).unwrap()),
            ] {
                let alias = wimperis(name, theta).unwrap();
                assert_eq!(alias.pulses.len(), j_builder.pulses.len());
                for (a, b) in alias.pulses.iter().zip(&j_builder.pulses) {
                    assert_abs_diff_eq!(a.phi, b.phi, epsilon = 1e-12);
                    assert_abs_diff_eq!(a.theta, b.theta, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn orders_verify_for_small_stages() {
        for theta in [PI / 3.0, PI] {
            for j in 1..=2 {
                let p = make_passband(j, theta).unwrap();
                assert_eq!(p.order, 2 * j);
                let b = make_broadband(j, theta).unwrap();
                assert_eq!(b.order, 2 * j);
            }
        }
    }

    #[test]
    fn corrective_angles_are_pi_multiples() {
        for seq in [
            make_passband(2, PI / 2.0).unwrap(),
            make_broadband(2, PI / 2.0).unwrap(),
            make_narrowband(1, PI / 2.0).unwrap(),
        ] {
            for p in &seq.pulses[1..] {
                let ratio = p.theta / (PI / 2.0);
                assert!(
                    (ratio - ratio.round()).abs() < 1e-12,
                    "{} corrective angle {} is not a half-pi multiple",
                    seq.label,
                    p.theta
                );
            }
        }
        for p in &make_passband(2, PI).unwrap().pulses[1..] {
            let ratio = p.theta / PI;
            assert!((ratio - ratio.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn broadband_beats_passband_at_moderate_error() {
        let ideal = ideal_rotation(Pulse::new(0.0, PI));
        let eps = 0.2;
        let b2 = make_broadband(1, PI).unwrap();
        let p2 = make_passband(1, PI).unwrap();
        let eb = distance(&execute_sequence(&b2.pulses, ErrorModel::Amplitude, eps).unwrap(), &ideal);
        let ep = distance(&execute_sequence(&p2.pulses, ErrorModel::Amplitude, eps).unwrap(), &ideal);
        assert!(eb <= ep, "broadband {eb} vs passband {ep}");
    }

    #[test]
    fn narrowband_suppresses_large_error_response() {
        let theta = PI;
        let n2 = make_narrowband(1, theta).unwrap();
        let ideal = ideal_rotation(Pulse::new(0.0, theta));
        for i in 0..7 {
            let eps = 0.2 + 0.05 * i as f64;
            let u_n = execute_sequence(&n2.pulses, ErrorModel::Amplitude, eps).unwrap();
            let u_p = imperfect_rotation(Pulse::new(0.0, theta), ErrorModel::Amplitude, eps);
            let sig = |u: &crate::su2::Unitary2| {
                let m = u.matrix().adjoint() * ideal.matrix();
                m[(0, 0)].norm_sqr()
            };
            assert!(sig(&u_n) < sig(&u_p), "eps={eps}");
        }
    }

    #[test]
    fn invalid_targets_are_rejected() {
        assert!(make_passband(1, 0.0).is_err());
        assert!(make_passband(1, -1.0).is_err());
        assert!(make_passband(1, 2.0 * PI + 0.1).is_err());
        assert!(make_broadband(0, PI).is_err());
    }

    #[test]
    fn family_names_round_trip() {
        for f in [Family::P, Family::B, Family::N, Family::Sk, Family::Sb, Family::Raw, Family::Corpse] {
            let s = f.to_string();
            assert_eq!(s.parse::<Family>().unwrap(), f);
        }
        assert!("Q".parse::<Family>().is_err());
        assert_eq!("BB1".parse::<Wimperis>().unwrap(), Wimperis::Bb1);
    }

    #[test]
    fn loaded_check_catches_wrong_order_claim() {
        let mut seq = make_passband(1, PI).unwrap();
        seq.order = 3;
        assert!(matches!(seq.check(), Err(Error::OrderVerification(_))));
        let good = make_passband(1, PI).unwrap();
        assert!(good.check().is_ok());
        assert!((fidelity(
            &execute_sequence(&good.pulses, ErrorModel::Amplitude, 0.0).unwrap(),
            &ideal_rotation(good.target)
        ) - 1.0)
            .abs()
            < 1e-12);
    }
}
