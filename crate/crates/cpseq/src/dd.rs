//! Double-double arithmetic: ~32-digit reals, complex numbers, and 2x2 complex
//! matrices built from unevaluated pairs of `f64`s.
//!
//! The truncated-series engine multiplies hundreds of matrix coefficients whose
//! intermediate magnitudes exceed the final residuals by factors up to ~1e6;
//! plain `f64` then leaves only ~1e-10 of headroom against the 1e-9 tolerances.
//! Carrying ~1e-32 per operation keeps every order check far from the noise.

use nalgebra::Matrix2;
use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Error-free sum: returns `(s, e)` with `s = fl(a+b)` and `a+b = s+e` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Error-free sum assuming `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Error-free product via fused multiply-add.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// A double-double real: the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    /// Builds a normalized value from an unevaluated pair.
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (h, l) = quick_two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    /// Exact product of two `f64`s.
    #[inline]
    pub fn from_prod(a: f64, b: f64) -> Dd {
        let (h, l) = two_prod(a, b);
        Dd { hi: h, lo: l }
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Nearest-integer rounding of the leading component.
    #[inline]
    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }

    #[inline]
    pub fn sqr(self) -> Dd {
        self * self
    }
}

impl From<f64> for Dd {
    #[inline]
    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }
}

impl From<i64> for Dd {
    #[inline]
    fn from(x: i64) -> Dd {
        // Up to 2^53 the conversion is exact; larger integers split in two.
        let hi = x as f64;
        let lo = (x - hi as i64) as f64;
        Dd::new(hi, lo)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (h, l) = quick_two_sum(s1, s2 + t2);
        Dd { hi: h, lo: l }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, o: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, o);
        let (h, l) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi: h, lo: l }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, o: f64) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + self.hi * o.lo + self.lo * o.hi;
        let (h, l) = quick_two_sum(p1, p2);
        Dd { hi: h, lo: l }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, o: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, o);
        let (h, l) = quick_two_sum(p1, p2 + self.lo * o);
        Dd { hi: h, lo: l }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Dd::new(h, l) + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, o: f64) -> Dd {
        self / Dd::from(o)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Dd) -> Option<std::cmp::Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(std::cmp::Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            other => other,
        }
    }
}

// Three-double split of pi/2 for argument reduction, and 2/pi.
const PIO2_1: f64 = 1.5707963267948966;
const PIO2_2: f64 = 6.123233995736766e-17;
const PIO2_3: f64 = -1.4973849048591698e-33;
const FRAC_2_PI: f64 = 0.6366197723675814;

/// Taylor sine/cosine on a reduced argument `|r| <~ pi/4`.
fn sincos_reduced(r: Dd) -> (Dd, Dd) {
    let r2 = r.sqr();
    let mut s = r;
    let mut t = r;
    let mut n = 1i64;
    loop {
        t = t * r2 / Dd::from(((2 * n) * (2 * n + 1)) as f64);
        t = -t;
        s = s + t;
        n += 1;
        if t.hi.abs() < 1e-35 || n > 24 {
            break;
        }
    }
    let mut c = Dd::ONE;
    let mut t = Dd::ONE;
    let mut n = 1i64;
    loop {
        t = t * r2 / Dd::from(((2 * n - 1) * (2 * n)) as f64);
        t = -t;
        c = c + t;
        n += 1;
        if t.hi.abs() < 1e-35 || n > 24 {
            break;
        }
    }
    (s, c)
}

/// Double-double sine and cosine of an exactly represented `f64` argument.
pub fn sincos(x: f64) -> (Dd, Dd) {
    let kf = (x * FRAC_2_PI).round();
    let r = Dd::from(x)
        - Dd::from_prod(kf, PIO2_1)
        - Dd::from_prod(kf, PIO2_2)
        - Dd::from_prod(kf, PIO2_3);
    let (s, c) = sincos_reduced(r);
    match (kf as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// A double-double complex number.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: Cdd = Cdd { re: Dd::ONE, im: Dd::ZERO };

    #[inline]
    pub fn new(re: Dd, im: Dd) -> Cdd {
        Cdd { re, im }
    }

    #[inline]
    pub fn real(x: Dd) -> Cdd {
        Cdd { re: x, im: Dd::ZERO }
    }

    #[inline]
    pub fn conj(self) -> Cdd {
        Cdd { re: self.re, im: -self.im }
    }

    /// Multiplication by `-i`.
    #[inline]
    pub fn mul_neg_i(self) -> Cdd {
        Cdd { re: self.im, im: -self.re }
    }

    #[inline]
    pub fn scale(self, s: Dd) -> Cdd {
        Cdd { re: self.re * s, im: self.im * s }
    }

    #[inline]
    pub fn norm_sqr(self) -> Dd {
        self.re.sqr() + self.im.sqr()
    }

    #[inline]
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for Cdd {
    type Output = Cdd;
    #[inline]
    fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    #[inline]
    fn sub(self, o: Cdd) -> Cdd {
        Cdd { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Neg for Cdd {
    type Output = Cdd;
    #[inline]
    fn neg(self) -> Cdd {
        Cdd { re: -self.re, im: -self.im }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    #[inline]
    fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

/// A 2x2 double-double complex matrix, row-major.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat2dd {
    pub e: [[Cdd; 2]; 2],
}

impl Mat2dd {
    pub const ZERO: Mat2dd = Mat2dd { e: [[Cdd::ZERO; 2]; 2] };

    pub fn identity() -> Mat2dd {
        let mut m = Mat2dd::ZERO;
        m.e[0][0] = Cdd::ONE;
        m.e[1][1] = Cdd::ONE;
        m
    }

    pub fn mul(&self, o: &Mat2dd) -> Mat2dd {
        let mut r = Mat2dd::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                r.e[i][j] = self.e[i][0] * o.e[0][j] + self.e[i][1] * o.e[1][j];
            }
        }
        r
    }

    pub fn add(&self, o: &Mat2dd) -> Mat2dd {
        let mut r = Mat2dd::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                r.e[i][j] = self.e[i][j] + o.e[i][j];
            }
        }
        r
    }

    pub fn scale(&self, s: Dd) -> Mat2dd {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.e[i][j] = r.e[i][j].scale(s);
            }
        }
        r
    }

    pub fn scale_c(&self, s: Cdd) -> Mat2dd {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.e[i][j] = r.e[i][j] * s;
            }
        }
        r
    }

    pub fn adjoint(&self) -> Mat2dd {
        let mut r = Mat2dd::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                r.e[i][j] = self.e[j][i].conj();
            }
        }
        r
    }

    /// Frobenius norm, collapsed to `f64`.
    pub fn frob(&self) -> f64 {
        let mut s = Dd::ZERO;
        for row in &self.e {
            for v in row {
                s = s + v.norm_sqr();
            }
        }
        s.to_f64().sqrt()
    }

    pub fn to_matrix2(&self) -> Matrix2<Complex64> {
        Matrix2::new(
            self.e[0][0].to_c64(),
            self.e[0][1].to_c64(),
            self.e[1][0].to_c64(),
            self.e[1][1].to_c64(),
        )
    }

    pub fn from_matrix2(m: &Matrix2<Complex64>) -> Mat2dd {
        let mut r = Mat2dd::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                r.e[i][j] = Cdd::new(Dd::from(m[(i, j)].re), Dd::from(m[(i, j)].im));
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, hi: f64, lo: f64) -> bool {
        (a - Dd::new(hi, lo)).abs().to_f64() < 1e-30
    }

    #[test]
    fn two_sum_and_prod_are_error_free() {
        let (s, e) = two_sum(1e16, 1.0);
        assert_eq!(s, 1e16);
        assert_eq!(e, 1.0);
        let (p, e) = two_prod(1.1, 1.3);
        assert_eq!(p, 1.1 * 1.3);
        assert!(e.abs() < 1e-16);
    }

    #[test]
    fn arithmetic_round_trips() {
        let a = Dd::from(1.7) + Dd::from(3e-20);
        let b = Dd::from(-0.3) + Dd::from(1e-21);
        let q = a / b;
        let back = q * b;
        assert!((back - a).abs().to_f64() < 1e-31);
        assert!(((a + b) - b - a).abs().to_f64() < 1e-31);
    }

    #[test]
    fn trig_matches_high_precision_references() {
        // Reference pairs computed at 60-digit precision from the exact f64 inputs.
        let cases: &[(f64, (f64, f64), (f64, f64))] = &[
            (0.5, (0.479425538604203, -5.103969860556013e-18), (0.8775825618903728, -4.2623149864279997e-17)),
            (1.0, (0.8414709848078965, 1.776845092935536e-18), (0.5403023058681398, -4.760954612604417e-17)),
            (2.0, (0.9092974268256817, -1.4020906557816256e-17), (-0.4161468365471424, 1.990596398957495e-17)),
            (-3.7, (0.5298361409084934, -3.8748971130134504e-17), (-0.848100031710408, -2.256633708779134e-17)),
            (10.5, (-0.87969575997167, -5.4243203936702253e-17), (-0.4755369279959925, -2.6679686221851937e-17)),
            (100.25, (-0.2772828564548513, -1.361336774720287e-17), (0.9607883312760612, -2.1441388741342008e-17)),
            (12.3456789, (-0.2189046130977952, 6.511944091288979e-18), (0.9757462633105518, -5.353527011059402e-17)),
            (18.84955592153876, (-7.347880794884119e-16, -3.1335187718003137e-32), (1.0, -2.6995676087913437e-31)),
        ];
        for &(x, (sh, sl), (ch, cl)) in cases {
            let (s, c) = sincos(x);
            assert!(close(s, sh, sl), "sin({x}) = {s:?}");
            assert!(close(c, ch, cl), "cos({x}) = {c:?}");
        }
    }

    #[test]
    fn trig_pythagorean_identity() {
        for i in 0..200 {
            let x = -40.0 + 0.4017 * i as f64;
            let (s, c) = sincos(x);
            let r = (s.sqr() + c.sqr() - Dd::ONE).abs().to_f64();
            assert!(r < 1e-30, "identity residual {r:.2e} at x={x}");
        }
    }

    #[test]
    fn complex_and_matrix_algebra() {
        let i = Cdd::new(Dd::ZERO, Dd::ONE);
        assert_eq!((i * i).re.to_f64(), -1.0);
        let x = Mat2dd {
            e: [[Cdd::ZERO, Cdd::ONE], [Cdd::ONE, Cdd::ZERO]],
        };
        let xx = x.mul(&x);
        assert_eq!(xx.to_matrix2(), Matrix2::identity());
        assert!((x.frob() - std::f64::consts::SQRT_2).abs() < 1e-15);
        let a = x.scale_c(i).adjoint();
        assert_eq!(a.e[0][1].im.to_f64(), -1.0);
    }
}
