//! Exact arithmetic: rationals and polynomials in `sinh θ`, `cosh θ` with
//! `θ = μ (x + y)`.
//!
//! A [`HyperPoly`] is kept in canonical form: every monomial carries at most
//! one factor of `sinh θ`, higher powers being rewritten with
//! `sinh²θ = cosh²θ − 1`. Two canonical values are equal exactly when they
//! represent the same function, so symbolic results can be compared with `==`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::real::Real;
use crate::{Axis, Error, Result};

/// Arbitrary-precision rational, always stored in lowest terms.
pub type Rational = BigRational;

/// Shorthand for `num / den`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// The exact rational value of a finite binary64 number.
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

/// Parses `"3/2"`, `"-4"`, `"0.125"` or `"1e-5"` into an exact rational.
///
/// Decimal notation is read exactly, so `"1e-5"` is `1/100000` rather than
/// the nearest binary64 value.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("0{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(digits);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, scale.unsigned_abs() as usize));
    }
    Some(if negative { -value } else { value })
}

/// `sinh^sinh θ · cosh^cosh θ`. Canonical values only store `sinh <= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub sinh: u32,
    pub cosh: u32,
}

impl Monomial {
    pub const fn new(sinh: u32, cosh: u32) -> Self {
        Self { sinh, cosh }
    }
}

/// Canonical polynomial in `sinh θ` and `cosh θ`, `θ = μ (x + y)`.
#[derive(Clone, Debug)]
pub struct HyperPoly {
    mu: Rational,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for HyperPoly {
    fn eq(&self, other: &Self) -> bool {
        if self.terms.is_empty() && other.terms.is_empty() {
            return true;
        }
        self.mu == other.mu && self.terms == other.terms
    }
}

impl Eq for HyperPoly {}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

impl HyperPoly {
    /// The zero polynomial; compatible with every argument scale.
    pub fn zero() -> Self {
        Self {
            mu: Rational::zero(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(mu: Rational, value: Rational) -> Self {
        Self::normalize(mu, [(0, 0, value)])
    }

    /// `coeff · sinh θ`.
    pub fn sinh(mu: Rational, coeff: Rational) -> Self {
        Self::normalize(mu, [(1, 0, coeff)])
    }

    /// `coeff · cosh^power θ`.
    pub fn cosh_pow(mu: Rational, power: u32, coeff: Rational) -> Self {
        Self::normalize(mu, [(0, power, coeff)])
    }

    /// Builds a canonical value from raw `(sinh exponent, cosh exponent,
    /// coefficient)` triples. Exponents may be arbitrary; like terms are
    /// merged and zero coefficients dropped.
    pub fn normalize<I>(mu: Rational, raw: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, Rational)>,
    {
        let mut terms: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (s, c, coeff) in raw {
            if coeff.is_zero() {
                continue;
            }
            // s^(2m + r) c^j = s^r (c^2 - 1)^m c^j
            let m = s / 2;
            let r = s % 2;
            for l in 0..=m {
                let sign = if (m - l) % 2 == 0 { 1 } else { -1 };
                let factor = Rational::from_integer(binomial(m, l) * sign);
                let key = Monomial::new(r, c + 2 * l);
                *terms.entry(key).or_insert_with(Rational::zero) += &coeff * factor;
            }
        }
        terms.retain(|_, v| !v.is_zero());
        Self { mu, terms }
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, &Rational)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn coefficient(&self, sinh: u32, cosh: u32) -> Rational {
        self.terms
            .get(&Monomial::new(sinh, cosh))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total degree `sinh + cosh` over the stored terms.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.sinh + m.cosh).max()
    }

    /// Highest power of `cosh θ` among stored terms.
    pub fn max_cosh_power(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.cosh).max()
    }

    fn common_mu(&self, other: &Self) -> Result<Rational> {
        if self.is_zero() {
            return Ok(other.mu.clone());
        }
        if other.is_zero() || self.mu == other.mu {
            return Ok(self.mu.clone());
        }
        Err(Error::ScaleMismatch {
            left: Box::new(self.mu.clone()),
            right: Box::new(other.mu.clone()),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let mu = self.common_mu(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(*m).or_insert_with(Rational::zero) += c;
        }
        terms.retain(|_, v| !v.is_zero());
        Ok(Self { mu, terms })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self {
                mu: self.mu.clone(),
                terms: BTreeMap::new(),
            };
        }
        Self {
            mu: self.mu.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, c * factor)).collect(),
        }
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let mu = self.common_mu(other)?;
        let raw = self.terms.iter().flat_map(|(a, ca)| {
            other
                .terms
                .iter()
                .map(move |(b, cb)| (a.sinh + b.sinh, a.cosh + b.cosh, ca * cb))
        });
        Ok(Self::normalize(mu, raw))
    }

    /// `self^n`, `n >= 1`, by binary exponentiation.
    pub fn pow(&self, n: u32) -> Self {
        assert!(n >= 1, "HyperPoly::pow requires n >= 1");
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        let mut n = n;
        loop {
            if n & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.checked_mul(&base).expect("same scale"),
                });
            }
            n >>= 1;
            if n == 0 {
                break;
            }
            base = base.checked_mul(&base).expect("same scale");
        }
        acc.expect("n >= 1")
    }

    /// Partial derivative in `x` or `y`. Both act through `θ = μ (x + y)`,
    /// so the result does not depend on the axis.
    pub fn diff(&self, _axis: Axis) -> Self {
        let raw = self.terms.iter().flat_map(|(m, c)| {
            let scaled = c * &self.mu;
            let mut out = Vec::with_capacity(2);
            // d(s^i c^j) = i s^(i-1) c^(j+1) + j s^(i+1) c^(j-1)
            if m.sinh > 0 {
                out.push((m.sinh - 1, m.cosh + 1, &scaled * Rational::from_integer(m.sinh.into())));
            }
            if m.cosh > 0 {
                out.push((m.sinh + 1, m.cosh - 1, &scaled * Rational::from_integer(m.cosh.into())));
            }
            out
        });
        Self::normalize(self.mu.clone(), raw)
    }

    pub fn diff_n(&self, axis: Axis, order: u32) -> Self {
        (0..order).fold(self.clone(), |p, _| p.diff(axis))
    }

    /// Binary64 evaluation at `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.evaluator::<f64>().eval_theta(self.theta_f64(x, y))
    }

    fn theta_f64(&self, x: f64, y: f64) -> f64 {
        self.mu.to_f64().unwrap_or(f64::NAN) * (x + y)
    }

    /// Precomputes coefficients in `T` for repeated evaluation.
    pub fn evaluator<T: Real>(&self) -> HyperEval<T> {
        let top = self.max_cosh_power().unwrap_or(0) as usize;
        let mut even = vec![T::zero(); top + 1];
        let mut odd = vec![T::zero(); top + 1];
        for (m, c) in &self.terms {
            let slot = if m.sinh == 0 { &mut even } else { &mut odd };
            slot[m.cosh as usize] = T::from_rational(c);
        }
        HyperEval {
            mu: T::from_rational(&self.mu),
            even,
            odd,
        }
    }

    /// Coefficients over their least common denominator:
    /// `(denominator, [(monomial, numerator)])`.
    pub fn common_denominator(&self) -> (BigInt, Vec<(Monomial, BigInt)>) {
        let den = self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let nums = self
            .terms
            .iter()
            .map(|(m, c)| (*m, c.numer() * (&den / c.denom())))
            .collect();
        (den, nums)
    }
}

impl fmt::Display for HyperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            write!(f, "{}", c.abs())?;
            if m.sinh == 1 {
                write!(f, "*s")?;
            }
            match m.cosh {
                0 => {}
                1 => write!(f, "*c")?,
                p => write!(f, "*c^{p}")?,
            }
        }
        write!(f, "  [theta = {}*(x+y)]", self.mu)
    }
}

/// A [`HyperPoly`] with coefficients converted to `T`.
#[derive(Clone, Debug)]
pub struct HyperEval<T> {
    mu: T,
    even: Vec<T>,
    odd: Vec<T>,
}

impl<T: Real> HyperEval<T> {
    pub fn eval(&self, x: T, y: T) -> T {
        self.eval_theta(self.mu * (x + y))
    }

    fn eval_theta(&self, theta: T) -> T {
        let c = theta.cosh();
        let horner = |coeffs: &[T]| coeffs.iter().rev().fold(T::zero(), |acc, &a| acc * c + a);
        let even = horner(&self.even);
        if self.odd.iter().all(|v| *v == T::zero()) {
            return even;
        }
        even + theta.sinh() * horner(&self.odd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hp(mu: Rational, raw: &[(u32, u32, i64, i64)]) -> HyperPoly {
        HyperPoly::normalize(mu, raw.iter().map(|&(s, c, n, d)| (s, c, rat(n, d))))
    }

    fn one() -> Rational {
        rat(1, 1)
    }

    #[test]
    fn normalization_reduces_sinh_powers() {
        assert_eq!(hp(one(), &[(2, 0, 1, 1)]), hp(one(), &[(0, 2, 1, 1), (0, 0, -1, 1)]));
        assert_eq!(hp(one(), &[(3, 0, 1, 1)]), hp(one(), &[(1, 2, 1, 1), (1, 0, -1, 1)]));
        assert_eq!(hp(one(), &[(2, 2, 1, 1)]), hp(one(), &[(0, 4, 1, 1), (0, 2, -1, 1)]));
        let p = hp(one(), &[(5, 3, 7, 2), (4, 0, -1, 3)]);
        assert!(p.terms().all(|(m, _)| m.sinh <= 1));
        let raw: Vec<_> = p.terms().map(|(m, c)| (m.sinh, m.cosh, c.clone())).collect();
        assert_eq!(HyperPoly::normalize(one(), raw), p);
    }

    #[test]
    fn addition_examples() {
        let c2 = hp(one(), &[(0, 2, 1, 1)]);
        assert!(c2.checked_add(&c2.neg()).unwrap().is_zero());
        let s = hp(one(), &[(1, 0, 1, 1)]);
        assert_eq!(s.checked_add(&s).unwrap(), hp(one(), &[(1, 0, 2, 1)]));
        let lhs = hp(one(), &[(0, 2, 1, 1), (0, 0, -1, 1)]);
        let s2 = hp(one(), &[(2, 0, 1, 1)]);
        assert_eq!(lhs.checked_add(&s2).unwrap(), hp(one(), &[(0, 2, 2, 1), (0, 0, -2, 1)]));
    }

    #[test]
    fn scale_mismatch_is_rejected_but_zero_is_compatible() {
        let a = hp(one(), &[(1, 0, 1, 1)]);
        let b = hp(rat(1, 6), &[(1, 0, 1, 1)]);
        assert!(matches!(a.checked_add(&b), Err(Error::ScaleMismatch { .. })));
        assert!(matches!(a.checked_mul(&b), Err(Error::ScaleMismatch { .. })));
        assert_eq!(a.checked_add(&HyperPoly::zero()).unwrap(), a);
        assert!(b.checked_mul(&HyperPoly::zero()).unwrap().is_zero());
    }

    #[test]
    fn multiplication_examples() {
        let c = hp(one(), &[(0, 1, 1, 1)]);
        let s = hp(one(), &[(1, 0, 1, 1)]);
        let sc = hp(one(), &[(1, 1, 1, 1)]);
        assert_eq!(c.checked_mul(&c).unwrap(), hp(one(), &[(0, 2, 1, 1)]));
        assert_eq!(s.checked_mul(&s).unwrap(), hp(one(), &[(0, 2, 1, 1), (0, 0, -1, 1)]));
        assert_eq!(sc.checked_mul(&sc).unwrap(), hp(one(), &[(0, 4, 1, 1), (0, 2, -1, 1)]));
    }

    #[test]
    fn power_examples() {
        let c = hp(one(), &[(0, 1, 1, 1)]);
        assert_eq!(c.pow(1), c);
        let s = hp(one(), &[(1, 0, 1, 1)]);
        assert_eq!(s.pow(2), hp(one(), &[(0, 2, 1, 1), (0, 0, -1, 1)]));
        // brute force: three multiplications then normalization of the raw product
        let p = hp(one(), &[(1, 0, 3, 2)]);
        let brute = HyperPoly::normalize(one(), [(3, 0, rat(27, 8))]);
        assert_eq!(p.pow(3), brute);
        assert_eq!(brute, hp(one(), &[(1, 2, 27, 8), (1, 0, -27, 8)]));
    }

    #[test]
    fn differentiation_examples() {
        let lam = rat(7, 1000);
        let u0 = HyperPoly::sinh(rat(1, 6), rat(3, 2) * &lam);
        assert_eq!(u0.diff(Axis::X), HyperPoly::cosh_pow(rat(1, 6), 1, &lam / rat(4, 1)));
        assert!(HyperPoly::constant(one(), rat(5, 1)).diff(Axis::Y).is_zero());
        // f = c^4: f' = 4 c^3 s, f'' = 12 c^2 s^2 + 4 c^4, f''' = 64 c^3 s - 24 c s
        let c4 = hp(one(), &[(0, 4, 1, 1)]);
        assert_eq!(c4.diff_n(Axis::X, 3), hp(one(), &[(1, 3, 64, 1), (1, 1, -24, 1)]));
    }

    #[test]
    fn differentiation_matches_central_differences() {
        let p = hp(rat(1, 2), &[(1, 3, 5, 3), (0, 2, -7, 4), (0, 0, 1, 1)]);
        let dp = p.diff(Axis::X);
        let h = 1e-5;
        for &(x, y) in &[(0.3, -0.1), (1.0, 0.5), (-1.5, 0.2)] {
            let fd = (p.eval(x + h, y) - p.eval(x - h, y)) / (2.0 * h);
            let exact = dp.eval(x, y);
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
        }
    }

    #[test]
    fn evaluation_examples() {
        let lam = rat(1, 100000);
        let u0 = HyperPoly::sinh(rat(1, 6), rat(3, 2) * &lam);
        assert_eq!(u0.eval(0.0, 0.0), 0.0);
        assert!((u0.eval(0.0, 0.5) - 1.251447262e-6).abs() < 5e-16);
        let v0 = HyperPoly::cosh_pow(one(), 2, rat(-4, 3) * &lam);
        assert!((v0.eval(0.0, 0.5) / -1.695387e-5 - 1.0).abs() < 5e-7);
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("3/2"), Some(rat(3, 2)));
        assert_eq!(parse_rational("-4/3"), Some(rat(-4, 3)));
        assert_eq!(parse_rational("1e-5"), Some(rat(1, 100000)));
        assert_eq!(parse_rational("0.00001"), Some(rat(1, 100000)));
        assert_eq!(parse_rational("1.25E2"), Some(rat(125, 1)));
        assert_eq!(parse_rational(" 7 "), Some(rat(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn common_denominator_keeps_a_shared_base() {
        let p = hp(
            one(),
            &[(1, 8, 93534345, 4096), (1, 6, -198626022, 4096), (1, 0, 1179946, 4096)],
        );
        let (den, nums) = p.common_denominator();
        assert_eq!(den, BigInt::from(4096));
        let got: Vec<i64> = nums.iter().map(|(_, n)| n.to_i64().unwrap()).collect();
        assert_eq!(got, vec![1179946, -198626022, 93534345]);
    }

    fn arb_poly() -> impl Strategy<Value = HyperPoly> {
        prop::collection::vec((0u32..4, 0u32..5, -20i64..20, 1i64..7), 0..6)
            .prop_map(|raw| HyperPoly::normalize(rat(1, 3), raw.into_iter().map(|(s, c, n, d)| (s, c, rat(n, d)))))
    }

    proptest! {
        #[test]
        fn ring_axioms(p in arb_poly(), q in arb_poly(), r in arb_poly()) {
            prop_assert_eq!(p.checked_add(&q).unwrap(), q.checked_add(&p).unwrap());
            prop_assert_eq!(p.checked_mul(&q).unwrap(), q.checked_mul(&p).unwrap());
            prop_assert_eq!(
                p.checked_add(&q).unwrap().checked_add(&r).unwrap(),
                p.checked_add(&q.checked_add(&r).unwrap()).unwrap()
            );
            prop_assert_eq!(
                p.checked_mul(&q).unwrap().checked_mul(&r).unwrap(),
                p.checked_mul(&q.checked_mul(&r).unwrap()).unwrap()
            );
            prop_assert_eq!(
                p.checked_mul(&q.checked_add(&r).unwrap()).unwrap(),
                p.checked_mul(&q).unwrap().checked_add(&p.checked_mul(&r).unwrap()).unwrap()
            );
        }

        #[test]
        fn normalization_is_idempotent(p in arb_poly()) {
            let raw: Vec<_> = p.terms().map(|(m, c)| (m.sinh, m.cosh, c.clone())).collect();
            prop_assert_eq!(HyperPoly::normalize(p.mu().clone(), raw), p);
        }

        #[test]
        fn leibniz_rule(p in arb_poly(), q in arb_poly()) {
            let lhs = p.checked_mul(&q).unwrap().diff(Axis::X);
            let rhs = p.diff(Axis::X).checked_mul(&q).unwrap()
                .checked_add(&p.checked_mul(&q.diff(Axis::X)).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(p.diff(Axis::X), p.diff(Axis::Y));
        }

        #[test]
        fn pow_is_repeated_multiplication(p in arb_poly(), n in 1u32..5) {
            let mut acc = p.clone();
            for _ in 1..n {
                acc = acc.checked_mul(&p).unwrap();
            }
            prop_assert_eq!(p.pow(n), acc);
        }

        #[test]
        fn derivative_agrees_with_finite_differences(p in arb_poly(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let h = 1e-5;
            let fd = (p.eval(x + h, y) - p.eval(x - h, y)) / (2.0 * h);
            let exact = p.diff(Axis::X).eval(x, y);
            // scale by the size of the terms so cancellation does not dominate
            let size: f64 = p.terms().map(|(_, c)| c.to_f64().unwrap().abs()).sum::<f64>().max(1.0) * 10.0;
            prop_assert!((fd - exact).abs() <= 1e-6 * size, "fd {} exact {}", fd, exact);
        }
    }
}
