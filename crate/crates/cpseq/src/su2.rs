//! Ideal and imperfect single-qubit rotations, error models, and the
//! distance/fidelity metrics used to compare them.

use crate::error::{Error, Result};
use nalgebra::Matrix2;
use num_complex::Complex64;

/// Entrywise tolerance for the unitarity and determinant invariants.
pub const UNITARY_TOL: f64 = 1e-12;

/// A single hard pulse: a rotation about an axis in the x-y plane.
///
/// `phi` is the axis azimuth measured from x toward y; `theta` is the signed
/// rotation angle and may exceed a full turn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub phi: f64,
    pub theta: f64,
}

impl Pulse {
    /// Creates a pulse; both angles must be finite.
    pub fn new(phi: f64, theta: f64) -> Pulse {
        assert!(phi.is_finite() && theta.is_finite(), "pulse angles must be finite");
        Pulse { phi, theta }
    }
}

/// Which systematic control error a simulation applies.
///
/// The error magnitude is passed separately wherever a model is used, so one
/// sequence can be evaluated across a whole range of error values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorModel {
    /// Pulse-length (amplitude) miscalibration: every angle is scaled by `1 + value`.
    Amplitude,
    /// Static frequency offset: a Z component of relative strength `value`
    /// joins the generator of every pulse.
    Detuning,
}

impl std::fmt::Display for ErrorModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ErrorModel::Amplitude => write!(f, "amplitude"),
            ErrorModel::Detuning => write!(f, "detuning"),
        }
    }
}

impl std::str::FromStr for ErrorModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<ErrorModel> {
        match s {
            "amplitude" => Ok(ErrorModel::Amplitude),
            "detuning" => Ok(ErrorModel::Detuning),
            other => Err(Error::Parse(format!("unknown error model {other:?}"))),
        }
    }
}

/// A 2x2 unitary normalized to unit determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2 {
    m: Matrix2<Complex64>,
}

impl Unitary2 {
    /// Wraps a matrix after checking unitarity and renormalizing the
    /// determinant to 1 by the principal square root of its phase.
    pub fn new(m: Matrix2<Complex64>) -> Result<Unitary2> {
        let r = unitarity_residual(&m);
        if r > UNITARY_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not unitary (residual {r:.3e})"
            )));
        }
        Ok(Unitary2::from_unitary_unchecked(m))
    }

    /// Wraps a matrix already known to be unitary, renormalizing the determinant.
    pub(crate) fn from_unitary_unchecked(m: Matrix2<Complex64>) -> Unitary2 {
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let s = det.sqrt();
        Unitary2 { m: m.map(|e| e / s) }
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.m
    }

    pub fn identity() -> Unitary2 {
        Unitary2 { m: Matrix2::identity() }
    }

    /// Largest entrywise deviation of the adjoint-product from the identity.
    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.m)
    }

    /// Absolute deviation of the determinant from 1.
    pub fn det_residual(&self) -> f64 {
        let det = self.m[(0, 0)] * self.m[(1, 1)] - self.m[(0, 1)] * self.m[(1, 0)];
        (det - Complex64::new(1.0, 0.0)).norm()
    }
}

impl std::ops::Mul for &Unitary2 {
    type Output = Unitary2;
    fn mul(self, o: &Unitary2) -> Unitary2 {
        Unitary2::from_unitary_unchecked(self.m * o.m)
    }
}

/// Coefficients of a 2x2 matrix in the basis {I, X, Y, Z}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliVector {
    pub a_i: Complex64,
    pub a_x: Complex64,
    pub a_y: Complex64,
    pub a_z: Complex64,
}

impl PauliVector {
    /// Rebuilds the matrix `a_i I + a_x X + a_y Y + a_z Z`.
    pub fn recompose(&self) -> Matrix2<Complex64> {
        let p = pauli_matrices();
        p[0].map(|e| e * self.a_i)
            + p[1].map(|e| e * self.a_x)
            + p[2].map(|e| e * self.a_y)
            + p[3].map(|e| e * self.a_z)
    }

    /// Real parts of the X, Y, Z coefficients.
    pub fn real_xyz(&self) -> [f64; 3] {
        [self.a_x.re, self.a_y.re, self.a_z.re]
    }
}

/// The basis {I, X, Y, Z} as concrete matrices.
pub fn pauli_matrices() -> [Matrix2<Complex64>; 4] {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        Matrix2::new(l, o, o, l),
        Matrix2::new(o, l, l, o),
        Matrix2::new(o, -i, i, o),
        Matrix2::new(l, o, o, -l),
    ]
}

/// Frobenius norm of a 2x2 complex matrix.
pub fn frobenius(m: &Matrix2<Complex64>) -> f64 {
    m.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
}

fn unitarity_residual(m: &Matrix2<Complex64>) -> f64 {
    let p = m.adjoint() * m;
    let d = p - Matrix2::identity();
    d.iter().fold(0.0f64, |a, e| a.max(e.norm()))
}

/// Closed form of the exact rotation matrix about the in-plane axis `phi`.
pub(crate) fn rotation_matrix(phi: f64, theta: f64) -> Matrix2<Complex64> {
    let (s, c) = (theta / 2.0).sin_cos();
    let (sp, cp) = phi.sin_cos();
    let eip = Complex64::new(cp, sp);
    let mis = Complex64::new(0.0, -s);
    Matrix2::new(
        Complex64::new(c, 0.0),
        mis * eip.conj(),
        mis * eip,
        Complex64::new(c, 0.0),
    )
}

/// The matrix a pulse produces under an error model, without the wrapper type.
pub(crate) fn pulse_matrix(p: Pulse, m: ErrorModel, value: f64) -> Matrix2<Complex64> {
    match m {
        ErrorModel::Amplitude => rotation_matrix(p.phi, p.theta * (1.0 + value)),
        ErrorModel::Detuning => {
            if p.theta.abs() < 1e-300 {
                return Matrix2::identity();
            }
            let a = p.theta / 2.0;
            let gz = a.abs() * value;
            let h = a.hypot(gz);
            let (sh, ch) = h.sin_cos();
            let (sp, cp) = p.phi.sin_cos();
            let (nx, ny, nz) = (a * cp / h, a * sp / h, gz / h);
            let zc = Complex64::new(0.0, -sh * nz);
            let xy = Complex64::new(-sh * ny, -sh * nx);
            Matrix2::new(
                Complex64::new(ch, 0.0) + zc,
                xy,
                -xy.conj(),
                Complex64::new(ch, 0.0) - zc,
            )
        }
    }
}

/// The perfect rotation a pulse is meant to implement.
pub fn ideal_rotation(p: Pulse) -> Unitary2 {
    Unitary2 { m: rotation_matrix(p.phi, p.theta) }
}

/// The rotation actually produced under a systematic error of the given size.
pub fn imperfect_rotation(p: Pulse, m: ErrorModel, value: f64) -> Unitary2 {
    Unitary2 { m: pulse_matrix(p, m, value) }
}

/// Frobenius distance between unitaries, minimized over the global sign.
pub fn distance(u: &Unitary2, v: &Unitary2) -> f64 {
    let a = frobenius(&(u.m - v.m));
    let b = frobenius(&(u.m + v.m));
    a.min(b)
}

/// Overlap `|trace(v' u)| / 2`; 1 exactly when the unitaries agree up to phase.
pub fn fidelity(u: &Unitary2, v: &Unitary2) -> f64 {
    let t = (v.m.adjoint() * u.m).trace();
    t.norm() / 2.0
}

/// Coefficients of a matrix in the Pauli basis, `a_P = trace(P a) / 2`.
pub fn pauli_decompose(a: &Matrix2<Complex64>) -> PauliVector {
    let p = pauli_matrices();
    let coef = |pm: &Matrix2<Complex64>| (pm.adjoint() * a).trace() / 2.0;
    PauliVector {
        a_i: coef(&p[0]),
        a_x: coef(&p[1]),
        a_y: coef(&p[2]),
        a_z: coef(&p[3]),
    }
}

/// Product matrix of a pulse list under an error model; the first pulse acts first.
pub(crate) fn sequence_matrix(pulses: &[Pulse], m: ErrorModel, value: f64) -> Matrix2<Complex64> {
    let mut u = Matrix2::identity();
    for p in pulses {
        u = pulse_matrix(*p, m, value) * u;
    }
    u
}

/// Executes a pulse list under an error model; the first pulse acts first.
pub fn execute_sequence(pulses: &[Pulse], m: ErrorModel, value: f64) -> Result<Unitary2> {
    if pulses.is_empty() {
        return Err(Error::InvalidInput("pulse list is empty".into()));
    }
    Ok(Unitary2 { m: sequence_matrix(pulses, m, value) })
}
