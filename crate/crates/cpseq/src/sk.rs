//! Commutator-ladder synthesis: single-axis correction blocks, planar
//! conjugation of defects, and the order-by-order sequence builders.

use crate::error::{Error, Result};
use crate::series::{defect_tolerance, leading_defect, sequence_series, DefectTerm};
use crate::su2::{frobenius, pauli_decompose, pauli_matrices, ErrorModel, Pulse, Unitary2};
use crate::ts::{make_broadband_cfg, make_passband_cfg, Family, PulseSequence};
use crate::Config;
use nalgebra::Matrix2;
use num_complex::Complex64;
use std::f64::consts::PI;

/// A Pauli axis label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// The corresponding Pauli matrix.
    pub fn matrix(self) -> Matrix2<Complex64> {
        let p = pauli_matrices();
        match self {
            Axis::X => p[1],
            Axis::Y => p[2],
            Axis::Z => p[3],
        }
    }

}

/// A pulse list whose error expansion is a pure single-axis generator at one
/// order: `I - i sign |a|^k (axis Pauli)/2 eps^k + O(eps^{k+1})`.
#[derive(Clone, Debug)]
pub struct AxisBlock {
    pub axis: Axis,
    /// The order `k` at which the generator appears.
    pub level: usize,
    /// The amplitude `a` of the generator.
    pub amplitude: f64,
    /// Generator sign, `+1` or `-1`.
    pub sign: i8,
    /// The error model the block compensates under.
    pub model: ErrorModel,
    pub pulses: Vec<Pulse>,
}

impl AxisBlock {
    /// Checks the block contract against the series oracle.
    pub fn verify(&self) -> Result<()> {
        if self.pulses.is_empty() {
            if self.amplitude == 0.0 {
                return Ok(());
            }
            return Err(Error::Construction("empty block with nonzero amplitude".into()));
        }
        let s = sequence_series(&self.pulses, self.model, self.level + 1)?;
        if frobenius(&(s.coeff(0) - Matrix2::identity())) >= 1e-12 {
            return Err(Error::Construction(format!(
                "axis block at level {} does not start at the identity",
                self.level
            )));
        }
        let scale = self.sign as f64 * self.amplitude.abs().powi(self.level as i32) / 2.0;
        let want = self
            .axis
            .matrix()
            .map(|e| e * Complex64::new(0.0, -scale));
        let tol = defect_tolerance(&Unitary2::identity()).max(1e-9 * frobenius(&want));
        for k in 1..self.level {
            let nk = s.coeff_norm(k);
            if nk >= tol {
                return Err(Error::Construction(format!(
                    "axis block at level {} has surviving coefficient {nk:.3e} at order {k}",
                    self.level
                )));
            }
        }
        let diff = frobenius(&(s.coeff(self.level) - want));
        if diff > 1e-8 * frobenius(&want) + 1e-12 {
            return Err(Error::Construction(format!(
                "axis block generator off by {diff:.3e} at level {}",
                self.level
            )));
        }
        Ok(())
    }

    fn checked(self) -> Result<AxisBlock> {
        self.verify()?;
        Ok(self)
    }
}

fn invert(pulses: &[Pulse]) -> Vec<Pulse> {
    pulses
        .iter()
        .rev()
        .map(|p| Pulse::new(p.phi, -p.theta))
        .collect()
}

fn shift_phases(pulses: &[Pulse], psi: f64) -> Vec<Pulse> {
    pulses.iter().map(|p| Pulse::new(p.phi + psi, p.theta)).collect()
}

fn conjugate_to_z(pulses: &[Pulse]) -> Vec<Pulse> {
    let mut out = Vec::with_capacity(pulses.len() + 2);
    out.push(Pulse::new(PI / 2.0, PI / 2.0));
    out.extend_from_slice(pulses);
    out.push(Pulse::new(PI / 2.0, -PI / 2.0));
    out
}

fn u1x_pulses(a: f64, sign: i8) -> Vec<Pulse> {
    if a == 0.0 {
        return Vec::new();
    }
    let k = (a.abs() / (4.0 * PI)).ceil().max(1.0);
    let phi = (a.abs() / (4.0 * PI * k)).acos();
    let pl = vec![Pulse::new(-phi, 2.0 * PI * k), Pulse::new(phi, 2.0 * PI * k)];
    if sign < 0 {
        invert(&pl)
    } else {
        pl
    }
}

fn unx_pulses(n: usize, a: f64, sign: i8, cap: usize) -> Result<Vec<Pulse>> {
    if n == 0 || n > cap {
        return Err(Error::RecursionCap { level: n, cap });
    }
    if n == 1 {
        return Ok(u1x_pulses(a, sign));
    }
    let ny = n / 2;
    let nz = n - ny;
    let ya = shift_phases(&unx_pulses(ny, a, 1, cap)?, PI / 2.0);
    let za = conjugate_to_z(&unx_pulses(nz, a, 1, cap)?);
    let mut pl = invert(&za);
    pl.extend(invert(&ya));
    pl.extend_from_slice(&za);
    pl.extend_from_slice(&ya);
    Ok(if sign < 0 { invert(&pl) } else { pl })
}

/// First-order X correction block: two full-turn pulses at opposed phases
/// chosen so their error rotations add along x.
pub fn u1x(a: f64, sign: i8) -> Result<AxisBlock> {
    AxisBlock {
        axis: Axis::X,
        level: 1,
        amplitude: a,
        sign,
        model: ErrorModel::Amplitude,
        pulses: u1x_pulses(a, sign),
    }
    .checked()
}

/// Moves an X block to the Y axis (phase shift) or Z axis (conjugation by a
/// quarter-turn about y).
pub fn axis_shift(b: &AxisBlock, to_axis: Axis) -> Result<AxisBlock> {
    if b.axis != Axis::X {
        return Err(Error::InvalidInput("axis shift expects an X block".into()));
    }
    let pulses = match to_axis {
        Axis::X => b.pulses.clone(),
        Axis::Y => shift_phases(&b.pulses, PI / 2.0),
        Axis::Z => conjugate_to_z(&b.pulses),
    };
    AxisBlock {
        axis: to_axis,
        level: b.level,
        amplitude: b.amplitude,
        sign: b.sign,
        model: b.model,
        pulses,
    }
    .checked()
}

/// Level-`n` X correction block built by recursive group commutators of
/// half-level Y and Z blocks.
pub fn unx(n: usize, a: f64, sign: i8) -> Result<AxisBlock> {
    unx_cfg(n, a, sign, &Config::default())
}

/// As `unx`, with the recursion cap taken from a configuration.
pub fn unx_cfg(n: usize, a: f64, sign: i8, cfg: &Config) -> Result<AxisBlock> {
    AxisBlock {
        axis: Axis::X,
        level: n,
        amplitude: a,
        sign,
        model: ErrorModel::Amplitude,
        pulses: unx_pulses(n, a, sign, cfg.unx_cap)?,
    }
    .checked()
}

/// A single planar rotation that turns a defect direction onto the x axis.
#[derive(Clone, Copy, Debug)]
pub struct PlanarConjugator {
    /// Axis azimuth of the rotation.
    pub phi_c: f64,
    /// Rotation angle.
    pub beta: f64,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl PlanarConjugator {
    /// Solves for the planar rotation taking the direction of `-a` to `+x`,
    /// then verifies it; `a` must be Hermitian and traceless.
    pub fn build_for(a: &Matrix2<Complex64>) -> Result<PlanarConjugator> {
        let av = pauli_decompose(a).real_xyz();
        let norm = (av[0] * av[0] + av[1] * av[1] + av[2] * av[2]).sqrt();
        if norm < 1e-300 {
            return Ok(PlanarConjugator { phi_c: PI / 2.0, beta: 0.0 });
        }
        let v = [-av[0] / norm, -av[1] / norm, -av[2] / norm];
        let phi_c = if v[1].abs() > 1e-14 || (1.0 - v[0]).abs() > 1e-14 {
            (1.0 - v[0]).atan2(v[1])
        } else {
            PI / 2.0
        };
        let n = [phi_c.cos(), phi_c.sin(), 0.0];
        let vn = dot(v, n);
        let v_perp = [v[0] - vn * n[0], v[1] - vn * n[1], v[2] - vn * n[2]];
        let x_perp = [1.0 - n[0] * n[0], -n[0] * n[1], -n[0] * n[2]];
        let beta = dot(n, cross(v_perp, x_perp)).atan2(dot(v_perp, x_perp));
        let c = PlanarConjugator { phi_c, beta };
        let unit = a.map(|e| e / norm);
        let r = c.residual_for(&unit);
        if r >= 1e-10 {
            return Err(Error::ConjugatorVerification(r));
        }
        Ok(c)
    }

    /// Deviation of the conjugated `-a` from its norm times the X Pauli.
    pub fn residual_for(&self, a: &Matrix2<Complex64>) -> f64 {
        let av = pauli_decompose(a).real_xyz();
        let norm = (av[0] * av[0] + av[1] * av[1] + av[2] * av[2]).sqrt();
        let r = crate::su2::rotation_matrix(self.phi_c, self.beta);
        let rotated = r * a.map(|e| -e) * r.adjoint();
        let want = pauli_matrices()[1].map(|e| e * Complex64::new(norm, 0.0));
        frobenius(&(rotated - want))
    }

    /// The conjugation realized as pulses around a correction block.
    fn wrap(&self, inner: &[Pulse]) -> Vec<Pulse> {
        let mut out = Vec::with_capacity(inner.len() + 2);
        out.push(Pulse::new(self.phi_c, self.beta));
        out.extend_from_slice(inner);
        out.push(Pulse::new(self.phi_c, -self.beta));
        out
    }
}

fn pauli_vec_of(m: &Matrix2<Complex64>) -> [f64; 3] {
    pauli_decompose(m).real_xyz()
}

fn step_family(f: Family) -> Family {
    match f {
        Family::B | Family::Sb => Family::Sb,
        Family::Corpse => Family::Corpse,
        _ => Family::Sk,
    }
}

/// One ladder step: extracts the leading defect of an order-`m` sequence and
/// appends a conjugated level-`m+1` correction block, raising the order by
/// one. An already-vanishing defect bumps the order for free.
pub fn sk_step(current: &PulseSequence) -> Result<PulseSequence> {
    sk_step_cfg(current, &Config::default())
}

/// As `sk_step`, with limits taken from a configuration.
pub fn sk_step_cfg(current: &PulseSequence, cfg: &Config) -> Result<PulseSequence> {
    let k = current.order + 1;
    let target = crate::su2::ideal_rotation(current.target);
    let s = sequence_series(&current.pulses, current.model, k + 1)?;
    let defect = leading_defect(&s, &target)?;
    let family = step_family(current.family);
    let label = format!("{}{}", family, k);
    let free = |d: &Option<DefectTerm>| match d {
        None => true,
        Some(t) => t.order > k,
    };
    if free(&defect) {
        return PulseSequence::verified(
            family,
            current.model,
            k,
            current.target,
            current.pulses.clone(),
            current.narrowband,
            label,
        );
    }
    let defect = defect.unwrap();
    if defect.order != k {
        return Err(Error::OrderVerification(format!(
            "defect at order {} found while correcting order {k}",
            defect.order
        )));
    }
    let conj = PlanarConjugator::build_for(&defect.a_matrix)?;
    let amplitude = defect.norm.powf(1.0 / k as f64);
    let gv = pauli_vec_of(&defect.generator);
    let mut corr = conj.wrap(&unx_cfg(k, amplitude, 1, cfg)?.pulses);
    let sc = sequence_series(&corr, current.model, k)?;
    let gc = (sc.coeff(k) * sc.coeff(0).adjoint()).map(|e| e * Complex64::new(0.0, 1.0));
    let gch = (gc + gc.adjoint()).map(|e| e / 2.0);
    let gvc = pauli_vec_of(&gch);
    let plus = (0..3).map(|i| (gvc[i] + gv[i]).powi(2)).sum::<f64>();
    let minus = (0..3).map(|i| (gvc[i] - gv[i]).powi(2)).sum::<f64>();
    if plus > minus {
        corr = conj.wrap(&unx_cfg(k, amplitude, -1, cfg)?.pulses);
    }
    let mut pulses = current.pulses.clone();
    pulses.extend(corr);
    PulseSequence::verified(
        family,
        current.model,
        k,
        current.target,
        pulses,
        current.narrowband,
        label,
    )
}

/// Order-`n` sequence built by `n` ladder steps from the bare pulse.
pub fn make_sk(n: usize, theta: f64) -> Result<PulseSequence> {
    make_sk_cfg(n, theta, &Config::default())
}

/// As `make_sk`, with limits taken from a configuration.
pub fn make_sk_cfg(n: usize, theta: f64, cfg: &Config) -> Result<PulseSequence> {
    if n == 0 {
        return Err(Error::InvalidInput("ladder order must be at least 1".into()));
    }
    let mut seq = make_passband_cfg(0, theta, cfg)?;
    while seq.order < n {
        seq = sk_step_cfg(&seq, cfg)?;
    }
    seq.family = Family::Sk;
    seq.label = format!("SK{n}");
    Ok(seq)
}

/// Order-`n` sequence built by ladder steps from the order-4 broadband base.
pub fn make_sb(n: usize, theta: f64) -> Result<PulseSequence> {
    make_sb_cfg(n, theta, &Config::default())
}

/// As `make_sb`, with limits taken from a configuration.
pub fn make_sb_cfg(n: usize, theta: f64, cfg: &Config) -> Result<PulseSequence> {
    if n < 5 {
        return Err(Error::InvalidInput(
            "broadband-based ladder orders start at 5".into(),
        ));
    }
    let mut seq = make_broadband_cfg(2, theta, cfg)?;
    while seq.order < n {
        seq = sk_step_cfg(&seq, cfg)?;
    }
    seq.family = Family::Sb;
    seq.label = format!("SB{n}");
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{distance, execute_sequence, ideal_rotation};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn first_order_block_shapes() {
        let b = u1x(PI, 1).unwrap();
        assert_eq!(b.pulses.len(), 2);
        assert_abs_diff_eq!(b.pulses[0].theta, 2.0 * PI);
        assert_abs_diff_eq!(b.pulses[1].theta, 2.0 * PI);
        let b = u1x(6.0 * PI, 1).unwrap();
        assert_abs_diff_eq!(b.pulses[0].theta, 4.0 * PI);
        let empty = u1x(0.0, 1).unwrap();
        assert!(empty.pulses.is_empty());
    }

    #[test]
    fn opposite_signs_cancel() {
        let mut pl = u1x_pulses(2.0, 1);
        pl.extend(u1x_pulses(2.0, -1));
        let s = sequence_series(&pl, ErrorModel::Amplitude, 2).unwrap();
        assert!(s.coeff_norm(1) < 1e-12);
        assert!(s.coeff_norm(2) < 1e-12);
        let mut pl = unx_pulses(3, 1.3, -1, 12).unwrap();
        pl.extend(unx_pulses(3, 1.3, 1, 12).unwrap());
        let s = sequence_series(&pl, ErrorModel::Amplitude, 3).unwrap();
        for k in 1..=3 {
            assert!(s.coeff_norm(k) < 1e-12, "k={k}");
        }
    }

    #[test]
    fn axis_shift_moves_the_generator() {
        let b = u1x(1.7, 1).unwrap();
        let y = axis_shift(&b, Axis::Y).unwrap();
        assert_eq!(y.pulses.len(), b.pulses.len());
        assert_eq!(y.axis, Axis::Y);
        let z = axis_shift(&b, Axis::Z).unwrap();
        assert_eq!(z.pulses.len(), b.pulses.len() + 2);
        assert_eq!(z.axis, Axis::Z);
        assert!(axis_shift(&y, Axis::Z).is_err());
    }

    #[test]
    fn commutator_blocks_verify_through_level_four() {
        for n in 1..=4 {
            for a in [0.5, 1.0, PI] {
                let b = unx(n, a, 1).unwrap();
                assert_eq!(b.level, n);
                b.verify().unwrap();
            }
        }
        assert!(matches!(unx(13, 1.0, 1), Err(Error::RecursionCap { level: 13, cap: 12 })));
    }

    #[test]
    fn conjugator_degenerate_directions() {
        let p = pauli_matrices();
        let a = p[1].map(|e| e * Complex64::new(-2.0, 0.0));
        let c = PlanarConjugator::build_for(&a).unwrap();
        assert_abs_diff_eq!(c.beta, 0.0, epsilon = 1e-14);
        let a = p[1].map(|e| e * Complex64::new(2.0, 0.0));
        let c = PlanarConjugator::build_for(&a).unwrap();
        assert_abs_diff_eq!(c.phi_c, PI / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.beta.abs(), PI, epsilon = 1e-14);
    }

    #[test]
    fn conjugator_random_directions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = pauli_matrices();
        for _ in 0..1000 {
            let v: [f64; 3] = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            let scale = rng.random_range(0.1..3.0);
            let a = (p[1].map(|e| e * Complex64::new(v[0], 0.0))
                + p[2].map(|e| e * Complex64::new(v[1], 0.0))
                + p[3].map(|e| e * Complex64::new(v[2], 0.0)))
            .map(|e| e * Complex64::new(scale, 0.0));
            let c = PlanarConjugator::build_for(&a).unwrap();
            assert!(c.residual_for(&a) < 1e-10);
        }
    }

    #[test]
    fn conjugation_pair_is_exactly_inverse() {
        for eps in [-0.4, 0.0, 0.3] {
            let u = execute_sequence(
                &[Pulse::new(0.8, 1.9), Pulse::new(0.8, -1.9)],
                ErrorModel::Amplitude,
                eps,
            )
            .unwrap();
            assert!(distance(&u, &Unitary2::identity()) < 1e-14);
        }
    }

    #[test]
    fn ladder_reaches_order_three() {
        let seq = make_sk(3, PI / 2.0).unwrap();
        assert_eq!(seq.order, 3);
        assert_eq!(seq.label, "SK3");
        let s = sequence_series(&seq.pulses, ErrorModel::Amplitude, 4).unwrap();
        for k in 1..=3 {
            assert!(s.coeff_norm(k) < 1e-9, "k={k}: {}", s.coeff_norm(k));
        }
        assert!(s.coeff_norm(4) > 1e-9);
        let ideal = ideal_rotation(seq.target);
        let at0 = execute_sequence(&seq.pulses, ErrorModel::Amplitude, 0.0).unwrap();
        assert!(distance(&at0, &ideal) < 1e-12);
    }

    #[test]
    fn ladder_pulse_counts_are_frozen() {
        for (n, want) in [(1usize, 5usize), (2, 19), (3, 53)] {
            let seq = make_sk(n, PI).unwrap();
            assert_eq!(seq.pulse_count(), want, "order {n}");
        }
    }

    #[test]
    fn broadband_based_ladder() {
        let b4 = make_broadband(2, PI).unwrap();
        let sb5 = make_sb(5, PI).unwrap();
        assert_eq!(sb5.order, 5);
        assert_eq!(sb5.family, Family::Sb);
        assert_eq!(&sb5.pulses[..b4.pulses.len()], &b4.pulses[..]);
        assert!(make_sb(4, PI).is_err());
    }

    use crate::ts::make_broadband;

    #[test]
    fn first_ladder_step_matches_block_correction() {
        let base = make_passband_cfg(0, PI / 2.0, &Config::default()).unwrap();
        let sk1 = sk_step(&base).unwrap();
        assert_eq!(sk1.order, 1);
        assert_eq!(sk1.pulse_count(), 5);
        let s = sequence_series(&sk1.pulses, ErrorModel::Amplitude, 2).unwrap();
        assert!(s.coeff_norm(1) < 1e-9);
        assert!(s.coeff_norm(2) > 1e-9);
    }
}
