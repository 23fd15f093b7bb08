//! Floating-point scalars for sampled fields.
//!
//! Grid fields are generic over [`Real`]. Plain `f64` is the default; the
//! [`DoubleDouble`] type carries roughly 32 significant digits and is what
//! convergence measurements need, because two applications of a
//! third-derivative stencil amplify sampling roundoff by about `h^-6`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::ToPrimitive;

use crate::exact::Rational;

/// Scalar arithmetic needed by the grid backend.
pub trait Real:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    /// Unit roundoff of the representation.
    const EPSILON: f64;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(v: f64) -> Self;
    /// Nearest representable value (to within the unit roundoff).
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn exp(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;

    fn powi(self, mut n: u32) -> Self {
        let mut base = self;
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base *= base;
            n >>= 1;
        }
        acc
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON / 2.0;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
}

/// Unevaluated sum `hi + lo` of two binary64 values with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

const LN2: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn renormalized(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    /// Multiplication by a power of two, exact barring over/underflow.
    fn scale_pow2(self, p: f64) -> Self {
        Self {
            hi: self.hi * p,
            lo: self.lo * p,
        }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Self::renormalized(p, e + self.lo * b)
    }

    fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, f) = two_sum(self.hi, -p);
        let q2 = (s + (f - e + self.lo)) / b;
        Self::renormalized(q1, q2)
    }

    /// `exp(self) - 1` for `|self|` well below one.
    fn expm1_small(self) -> Self {
        let mut term = self;
        let mut sum = self;
        let mut n = 1.0;
        while n < 40.0 {
            n += 1.0;
            term = (term * self).div_f64(n);
            sum += term;
            if term.hi.abs() <= 1e-36 * sum.hi.abs() {
                break;
            }
        }
        sum
    }
}

impl From<f64> for DoubleDouble {
    fn from(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::renormalized(s, e + f)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        Self::renormalized(p, e + (self.hi * rhs.lo + self.lo * rhs.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs.mul_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs.mul_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 } + Self::from(q3)
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for DoubleDouble {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Real for DoubleDouble {
    const EPSILON: f64 = 4.93e-32;

    fn zero() -> Self {
        Self::from(0.0)
    }
    fn one() -> Self {
        Self::from(1.0)
    }
    fn from_f64(v: f64) -> Self {
        Self::from(v)
    }
    fn from_rational(r: &Rational) -> Self {
        let hi = r.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() || hi == 0.0 {
            return Self::from(hi);
        }
        let rest = r - Rational::from_float(hi).expect("finite");
        Self::renormalized(hi, rest.to_f64().unwrap_or(0.0))
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn exp(self) -> Self {
        if self.hi > 709.78 {
            return Self::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::zero();
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2.mul_f64(k);
        // |r| <= ln2/2; shrink by 2^-10 so the Taylor series converges in a few terms
        let mut m = r.scale_pow2(1.0 / 1024.0).expm1_small();
        for _ in 0..10 {
            // expm1(2z) = 2 expm1(z) + expm1(z)^2
            m = m.scale_pow2(2.0) + m * m;
        }
        let e = m + Self::one();
        // split the power so 2^k never overflows on its own
        let k = k as i32;
        let half = k / 2;
        e.scale_pow2(2f64.powi(half)).scale_pow2(2f64.powi(k - half))
    }

    fn sinh(self) -> Self {
        if self.hi.abs() < 0.5 {
            let x2 = self * self;
            let mut term = self;
            let mut sum = self;
            let mut n = 1.0;
            while n < 60.0 {
                term = (term * x2).div_f64((n + 1.0) * (n + 2.0));
                n += 2.0;
                sum += term;
                if term.hi.abs() <= 1e-36 * sum.hi.abs() {
                    break;
                }
            }
            return sum;
        }
        let e = self.exp();
        (e - Self::one() / e).scale_pow2(0.5)
    }

    fn cosh(self) -> Self {
        let e = self.exp();
        (e + Self::one() / e).scale_pow2(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(got: DoubleDouble, hi: f64, lo: f64, rel: f64) {
        let want = DoubleDouble::new(hi, lo);
        let err = (got - want).abs().to_f64() / hi.abs();
        assert!(err < rel, "got {got}, want {want}, rel err {err:e}");
    }

    // reference pairs from a 50-digit evaluation
    #[test]
    fn transcendental_functions_carry_double_double_precision() {
        let cases = [
            ("exp", 0.001, 1.0010005001667084, -4.290842058948394e-17),
            ("exp", 0.3, 1.3498588075760032, -9.447314673432387e-17),
            ("exp", 1.0, std::f64::consts::E, 1.4456468917292502e-16),
            ("exp", -2.5, 0.0820849986238988, -4.8047346661059284e-18),
            ("exp", 6.0, 403.4287934927351, 1.2359628024450387e-14),
            ("sinh", 0.001, 0.001000000166666675, -3.571742859983052e-20),
            ("sinh", 0.3, 0.3045202934471426, 9.177343117072388e-18),
            ("sinh", 1.0, 1.1752011936438014, 7.849672142285669e-17),
            ("sinh", -2.5, -6.0502044810397875, 1.5266669624477375e-16),
            ("sinh", 6.0, 201.71315737027922, 8.575934656268528e-15),
            ("cosh", 0.001, 1.0000005000000416, 7.443797190204747e-17),
            ("cosh", 0.3, 1.0453385141288605, 7.371812611119388e-18),
            ("cosh", 1.0, 1.5430806348152437, 6.606796775006833e-17),
            ("cosh", -2.5, 6.132289479663686, 3.560067179782552e-16),
            ("cosh", 6.0, 201.7156361224559, 3.783693368181859e-15),
        ];
        for (f, x, hi, lo) in cases {
            let x = DoubleDouble::from(x);
            let got = match f {
                "exp" => x.exp(),
                "sinh" => x.sinh(),
                _ => x.cosh(),
            };
            close(got, hi, lo, 1e-30);
        }
    }

    #[test]
    fn division_and_rational_conversion() {
        let third = DoubleDouble::one() / DoubleDouble::from(3.0);
        close(third, 0.3333333333333333, 1.850371707708594e-17, 1e-31);
        let r = Rational::new(1.into(), 3.into());
        close(
            DoubleDouble::from_rational(&r),
            0.3333333333333333,
            1.850371707708594e-17,
            1e-31,
        );
        assert_eq!(
            DoubleDouble::from_rational(&Rational::from_integer(0.into())).to_f64(),
            0.0
        );
    }

    #[test]
    fn sinh_is_odd_and_exact_at_zero() {
        let z = DoubleDouble::zero();
        assert_eq!(z.sinh().to_f64(), 0.0);
        assert_eq!(z.cosh().to_f64(), 1.0);
        let x = DoubleDouble::from(0.7);
        assert_eq!((-x).sinh(), -(x.sinh()));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = DoubleDouble::from(1.1);
        let mut acc = DoubleDouble::one();
        for _ in 0..7 {
            acc *= x;
        }
        close(x.powi(7), acc.hi, acc.lo, 1e-31);
        assert_eq!(2.0f64.powi(10), Real::powi(2.0f64, 10));
    }
}
