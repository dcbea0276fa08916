//! Truncated power series in the error parameter with 2x2 matrix
//! coefficients: the exact oracle for compensation order and for extracting
//! leading defect terms.

use crate::dd::{sincos, Cdd, Dd, Mat2dd};
use crate::error::{Error, Result};
use crate::su2::{distance, frobenius, pauli_decompose, ErrorModel, Pulse, Unitary2};
use nalgebra::Matrix2;
use num_complex::Complex64;

/// Largest polynomial degree the engine will carry.
pub const DEGREE_CAP: usize = 64;

/// A matrix-valued polynomial `U(x) = sum C_k x^k + O(x^{N+1})` in the error
/// parameter, with coefficients held in double-double precision.
#[derive(Clone, Debug)]
pub struct MatrixSeries {
    degree: usize,
    coeffs: Vec<Mat2dd>,
}

impl MatrixSeries {
    /// The series of the constant identity family.
    pub fn identity(degree: usize) -> MatrixSeries {
        let mut coeffs = vec![Mat2dd::ZERO; degree + 1];
        coeffs[0] = Mat2dd::identity();
        MatrixSeries { degree, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient `C_k` collapsed to working precision.
    pub fn coeff(&self, k: usize) -> Matrix2<Complex64> {
        self.coeffs[k].to_matrix2()
    }

    /// Frobenius norm of coefficient `C_k`.
    pub fn coeff_norm(&self, k: usize) -> f64 {
        self.coeffs[k].frob()
    }

    /// Largest coefficient norm in the series; rounding noise in any
    /// coefficient is bounded by this magnitude times the input precision,
    /// so vanishing checks scale their tolerance by it.
    pub fn growth(&self) -> f64 {
        (0..=self.degree).map(|k| self.coeff_norm(k)).fold(1.0, f64::max)
    }

    /// Term-wise adjoint; for series of a unitary family this is the series
    /// of the inverse family.
    pub fn adjoint(&self) -> MatrixSeries {
        MatrixSeries {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c.adjoint()).collect(),
        }
    }

    /// Evaluates the polynomial at a concrete error value.
    pub fn evaluate(&self, x: f64) -> Matrix2<Complex64> {
        let mut acc = Mat2dd::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc.scale(Dd::from(x)).add(c);
        }
        acc.to_matrix2()
    }

    /// Largest deviation from the order-by-order unitarity identity
    /// `sum_{i+j=k} C_i' C_j = [k = 0] I` over all `k <= N`.
    pub fn unitarity_order_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..=self.degree {
            let mut s = Mat2dd::ZERO;
            for i in 0..=k {
                s = s.add(&self.coeffs[i].adjoint().mul(&self.coeffs[k - i]));
            }
            if k == 0 {
                s = s.add(&Mat2dd::identity().scale(Dd::from(-1.0)));
            }
            worst = worst.max(s.frob());
        }
        worst
    }
}

/// The first coefficient of a series that fails to vanish, expressed as a
/// Hermitian traceless generator.
#[derive(Clone, Debug)]
pub struct DefectTerm {
    /// Order of the first surviving error term.
    pub order: usize,
    /// Left generator `G_n`, the Hermitian part of `i C_n C_0'`.
    pub generator: Matrix2<Complex64>,
    /// `A_n = 2 G_n`.
    pub a_matrix: Matrix2<Complex64>,
    /// Euclidean norm of the Pauli components of `A_n`.
    pub norm: f64,
}

fn check_degree(degree: usize) -> Result<()> {
    if degree > DEGREE_CAP {
        return Err(Error::DegreeOverflow { degree, cap: DEGREE_CAP });
    }
    Ok(())
}

/// Double-double closed form of `R_phi(theta)`.
fn rotation_dd(phi: f64, theta: f64) -> Mat2dd {
    let (s, c) = sincos(theta / 2.0);
    let (sp, cp) = sincos(phi);
    Mat2dd {
        e: [
            [Cdd::real(c), Cdd::new(-(s * sp), -(s * cp))],
            [Cdd::new(s * sp, -(s * cp)), Cdd::real(c)],
        ],
    }
}

/// Double-double `sigma_phi = cos(phi) X + sin(phi) Y`.
fn sigma_phi_dd(phi: f64) -> Mat2dd {
    let (sp, cp) = sincos(phi);
    Mat2dd {
        e: [
            [Cdd::ZERO, Cdd::new(cp, -sp)],
            [Cdd::new(cp, sp), Cdd::ZERO],
        ],
    }
}

fn amplitude_pulse_series(p: Pulse, degree: usize) -> Vec<Mat2dd> {
    let r = rotation_dd(p.phi, p.theta);
    let half = Dd::from(p.theta / 2.0);
    let mut g = sigma_phi_dd(p.phi);
    for row in g.e.iter_mut() {
        for v in row.iter_mut() {
            *v = v.scale(half).mul_neg_i();
        }
    }
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(r);
    for k in 1..=degree {
        let prev = coeffs[k - 1];
        coeffs.push(prev.mul(&g).scale(Dd::ONE / Dd::from(k as f64)));
    }
    coeffs
}

fn jet_mul(a: &[Dd], b: &[Dd]) -> Vec<Dd> {
    let n = a.len();
    let mut c = vec![Dd::ZERO; n];
    for i in 0..n {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..n - i {
            c[i + j] = c[i + j] + a[i] * b[j];
        }
    }
    c
}

fn jet_div(a: &[Dd], b: &[Dd]) -> Vec<Dd> {
    let n = a.len();
    let mut q = vec![Dd::ZERO; n];
    for k in 0..n {
        let mut acc = a[k];
        for i in 1..=k {
            acc = acc - b[i] * q[k - i];
        }
        q[k] = acc / b[0];
    }
    q
}

/// Series of `exp(-i((theta/2) sigma_phi + |theta/2| delta Z))` in `delta`.
fn detuning_pulse_series(p: Pulse, degree: usize) -> Vec<Mat2dd> {
    let n = degree + 1;
    if p.theta.abs() < 1e-300 {
        let mut coeffs = vec![Mat2dd::ZERO; n];
        coeffs[0] = Mat2dd::identity();
        return coeffs;
    }
    let a = p.theta / 2.0;
    let h0 = a.abs();

    // sqrt(1 + delta^2) as a jet: binomial series in delta^2.
    let mut sj = vec![Dd::ZERO; n];
    let mut bc = Dd::ONE;
    let mut m = 0usize;
    while 2 * m < n {
        sj[2 * m] = bc;
        bc = bc * (Dd::from(0.5) - Dd::from(m as f64)) / Dd::from((m + 1) as f64);
        m += 1;
    }

    // h = h0 sqrt(1 + delta^2); split off the constant part, h = h0 + dlt,
    // where dlt has valuation 2, so cos(dlt)/sin(dlt) truncate after N terms.
    let h: Vec<Dd> = sj.iter().map(|&v| v * h0).collect();
    let mut dlt = h.clone();
    dlt[0] = Dd::ZERO;

    let mut cosd = vec![Dd::ZERO; n];
    let mut sind = vec![Dd::ZERO; n];
    cosd[0] = Dd::ONE;
    let mut pw = vec![Dd::ZERO; n];
    pw[0] = Dd::ONE;
    let mut fact = Dd::ONE;
    for k in 1..=degree {
        pw = jet_mul(&pw, &dlt);
        fact = fact * Dd::from(k as f64);
        let term: Vec<Dd> = pw.iter().map(|&v| v / fact).collect();
        match k % 4 {
            0 => {
                for (c, t) in cosd.iter_mut().zip(&term) {
                    *c = *c + *t;
                }
            }
            1 => {
                for (s, t) in sind.iter_mut().zip(&term) {
                    *s = *s + *t;
                }
            }
            2 => {
                for (c, t) in cosd.iter_mut().zip(&term) {
                    *c = *c - *t;
                }
            }
            _ => {
                for (s, t) in sind.iter_mut().zip(&term) {
                    *s = *s - *t;
                }
            }
        }
    }

    let (sh0, ch0) = sincos(h0);
    let cosh_j: Vec<Dd> = cosd
        .iter()
        .zip(&sind)
        .map(|(&c, &s)| ch0 * c - sh0 * s)
        .collect();
    let sinh_j: Vec<Dd> = cosd
        .iter()
        .zip(&sind)
        .map(|(&c, &s)| sh0 * c + ch0 * s)
        .collect();
    let sinc = jet_div(&sinh_j, &h);
    let sigma = sigma_phi_dd(p.phi);
    let ad = Dd::from(a);
    let h0d = Dd::from(h0);

    let mut coeffs = Vec::with_capacity(n);
    for k in 0..n {
        let mut c = Mat2dd::identity().scale(cosh_j[k]);
        c = c.add(&sigma.scale_c(Cdd::real(sinc[k] * ad).mul_neg_i()));
        let sincd = if k == 0 { Dd::ZERO } else { sinc[k - 1] };
        let zc = Cdd::real(sincd * h0d).mul_neg_i();
        c.e[0][0] = c.e[0][0] + zc;
        c.e[1][1] = c.e[1][1] - zc;
        coeffs.push(c);
    }
    coeffs
}

/// Error expansion of a single imperfect pulse to the requested degree.
pub fn pulse_series(p: Pulse, m: ErrorModel, degree: usize) -> Result<MatrixSeries> {
    check_degree(degree)?;
    let coeffs = match m {
        ErrorModel::Amplitude => amplitude_pulse_series(p, degree),
        ErrorModel::Detuning => detuning_pulse_series(p, degree),
    };
    Ok(MatrixSeries { degree, coeffs })
}

/// Cauchy product of two series of equal degree, truncated at that degree.
pub fn series_multiply(a: &MatrixSeries, b: &MatrixSeries) -> Result<MatrixSeries> {
    if a.degree != b.degree {
        return Err(Error::DegreeMismatch(a.degree, b.degree));
    }
    let n = a.degree;
    let mut coeffs = vec![Mat2dd::ZERO; n + 1];
    for i in 0..=n {
        let ai = &a.coeffs[i];
        for j in 0..=n - i {
            coeffs[i + j] = coeffs[i + j].add(&ai.mul(&b.coeffs[j]));
        }
    }
    Ok(MatrixSeries { degree: n, coeffs })
}

/// Error expansion of an executed pulse list; the first pulse acts first.
pub fn sequence_series(pulses: &[Pulse], m: ErrorModel, degree: usize) -> Result<MatrixSeries> {
    if pulses.is_empty() {
        return Err(Error::InvalidInput("pulse list is empty".into()));
    }
    check_degree(degree)?;
    let mut acc = MatrixSeries::identity(degree);
    for p in pulses {
        let ps = pulse_series(*p, m, degree)?;
        acc = series_multiply(&ps, &acc)?;
    }
    Ok(acc)
}

/// Default coefficient tolerance for a given target.
pub fn defect_tolerance(target: &Unitary2) -> f64 {
    1e-9 * frobenius(target.matrix()).max(1.0)
}

fn herm_split(m: &Matrix2<Complex64>) -> (Matrix2<Complex64>, f64) {
    let h = (m + m.adjoint()).map(|e| e / 2.0);
    let r = frobenius(&(m - h));
    (h, r)
}

fn defect_at(s: &MatrixSeries, n: usize) -> Result<DefectTerm> {
    let c0 = s.coeff(0);
    let g = (s.coeff(n) * c0.adjoint()).map(|e| e * Complex64::new(0.0, 1.0));
    let scale = frobenius(&g).max(1.0);
    let (gh, anti) = herm_split(&g);
    if anti >= 1e-9 * scale {
        return Err(Error::DefectExtraction(format!(
            "generator at order {n} has anti-Hermitian residue {anti:.3e}"
        )));
    }
    let tr = gh.trace().norm();
    if tr >= 1e-10 * scale {
        return Err(Error::DefectExtraction(format!(
            "generator at order {n} has trace {tr:.3e}"
        )));
    }
    let a_matrix = gh.map(|e| e * 2.0);
    let [ax, ay, az] = pauli_decompose(&a_matrix).real_xyz();
    let norm = (ax * ax + ay * ay + az * az).sqrt();
    Ok(DefectTerm { order: n, generator: gh, a_matrix, norm })
}

/// Finds the first order at which a series deviates from its target, or
/// `None` when the series is defect-free through its whole degree.
pub fn leading_defect(s: &MatrixSeries, target: &Unitary2) -> Result<Option<DefectTerm>> {
    leading_defect_with_tol(s, target, defect_tolerance(target))
}

/// As `leading_defect`, with an explicit coefficient tolerance.
pub fn leading_defect_with_tol(
    s: &MatrixSeries,
    target: &Unitary2,
    tol: f64,
) -> Result<Option<DefectTerm>> {
    let c0 = Unitary2::new(s.coeff(0))?;
    let d = distance(&c0, target);
    if d >= 1e-12 {
        return Err(Error::NotAtTarget(d));
    }
    let tol = tol * s.growth();
    for n in 1..=s.degree() {
        if s.coeff_norm(n) > tol {
            return Ok(Some(defect_at(s, n)?));
        }
    }
    Ok(None)
}

/// Outcome of checking a claimed compensation order against the series oracle.
#[derive(Clone, Debug)]
pub struct OrderReport {
    /// The order that was claimed.
    pub claimed_order: usize,
    /// True when every coefficient through the claimed order vanishes.
    pub passed: bool,
    /// Frobenius norms of coefficients `C_1 ... C_n`.
    pub low_coefficient_norms: Vec<f64>,
    /// Frobenius norm of coefficient `C_{n+1}`.
    pub next_coefficient_norm: f64,
    /// True when `C_{n+1}` also vanishes, so the sequence beats its claim.
    pub exceeds_claimed_order: bool,
    /// Coefficient tolerance the check used.
    pub tolerance: f64,
}

/// Checks that a pulse list matches its target through the claimed order:
/// the series must start at the target and keep every coefficient from 1
/// through the claimed order below tolerance.
pub fn verify_order(
    pulses: &[Pulse],
    m: ErrorModel,
    target: &Unitary2,
    claimed_order: usize,
) -> Result<OrderReport> {
    verify_order_with_tol(pulses, m, target, claimed_order, defect_tolerance(target))
}

/// As `verify_order`, with an explicit coefficient tolerance.
pub fn verify_order_with_tol(
    pulses: &[Pulse],
    m: ErrorModel,
    target: &Unitary2,
    claimed_order: usize,
    tol: f64,
) -> Result<OrderReport> {
    let s = sequence_series(pulses, m, claimed_order + 1)?;
    let c0 = Unitary2::new(s.coeff(0))?;
    let d = distance(&c0, target);
    if d >= 1e-12 {
        return Err(Error::NotAtTarget(d));
    }
    let tol = tol * s.growth();
    let low_coefficient_norms: Vec<f64> = (1..=claimed_order).map(|k| s.coeff_norm(k)).collect();
    let next_coefficient_norm = s.coeff_norm(claimed_order + 1);
    let lows_ok = low_coefficient_norms.iter().all(|&v| v < tol);
    let exceeds_claimed_order = lows_ok && next_coefficient_norm < tol;
    Ok(OrderReport {
        claimed_order,
        passed: lows_ok,
        low_coefficient_norms,
        next_coefficient_norm,
        exceeds_claimed_order,
        tolerance: tol,
    })
}
