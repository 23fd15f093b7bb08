//! Reduced differential transform recursion for
//! `u_t + a (u^n)_x + b (u^n)_xxx + k (u^n)_yyx = 0`.
//!
//! The solution is carried as its Taylor coefficients in `t`,
//! `u(x, y, t) = Σ U_k(x, y) t^k`. Starting from `U_0 = u(x, y, 0)`, each step
//! appends
//!
//! ```text
//! U_{k+1} = -N_k / (k + 1),
//! N_k     = a ∂x P_k + b ∂x³ P_k + k ∂y²∂x P_k,
//! P_k     = [t^k] (Σ_j U_j t^j)^n.
//! ```
//!
//! The classic advective form `a u u_x` is the `n = 2` member with the
//! advection coefficient halved: `a u u_x = (a/2) (u²)_x`.

use num_traits::{One, Signed};

use crate::algebra::{Axis, BackendKind, ExactBackend, FieldAlgebra};
use crate::exact::{rat, HyperPoly, Rational};
use crate::{Error, Result};

/// Coefficients of a ZK(n,n) equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdeSpec {
    advection: Rational,
    dispersion_x: Rational,
    dispersion_y: Rational,
    power: u32,
}

impl PdeSpec {
    /// `advection` multiplies `(u^n)_x`, `dispersion_x` multiplies
    /// `(u^n)_xxx` and `dispersion_y` multiplies `(u^n)_yyx`. Both dispersion
    /// coefficients must be positive and `power >= 2`.
    pub fn new(advection: Rational, dispersion_x: Rational, dispersion_y: Rational, power: u32) -> Result<Self> {
        if power < 2 {
            return Err(Error::InvalidSpec(format!(
                "nonlinearity exponent must be >= 2, got {power}"
            )));
        }
        if !dispersion_x.is_positive() {
            return Err(Error::InvalidSpec(format!(
                "x-dispersion must be positive, got {dispersion_x}"
            )));
        }
        if !dispersion_y.is_positive() {
            return Err(Error::InvalidSpec(format!(
                "y-dispersion must be positive, got {dispersion_y}"
            )));
        }
        Ok(Self {
            advection,
            dispersion_x,
            dispersion_y,
            power,
        })
    }

    /// `u_t + (u³)_x + 2 (u³)_xxx + 2 (u³)_yyx = 0`
    pub fn zk33() -> Self {
        Self::new(rat(1, 1), rat(2, 1), rat(2, 1), 3).expect("valid")
    }

    /// `u_t + (u²)_x + (1/8) (u²)_xxx + (1/8) (u²)_yyx = 0`
    pub fn zk22() -> Self {
        Self::new(rat(1, 1), rat(1, 8), rat(1, 8), 2).expect("valid")
    }

    pub fn advection(&self) -> &Rational {
        &self.advection
    }

    pub fn dispersion_x(&self) -> &Rational {
        &self.dispersion_x
    }

    pub fn dispersion_y(&self) -> &Rational {
        &self.dispersion_y
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    /// `a ∂x f + b ∂x³ f + k ∂y²∂x f`.
    pub fn apply_operator<A: FieldAlgebra>(&self, backend: &A, f: &A::Value) -> Result<A::Value> {
        let dx = backend.diff(f, Axis::X, 1)?;
        let dxxx = backend.diff(f, Axis::X, 3)?;
        let dyyx = backend.diff(&backend.diff(f, Axis::Y, 2)?, Axis::X, 1)?;
        let mut acc = backend.scale(&dx, &self.advection)?;
        acc = backend.add(&acc, &backend.scale(&dxxx, &self.dispersion_x)?)?;
        backend.add(&acc, &backend.scale(&dyyx, &self.dispersion_y)?)
    }
}

/// `u(x, y, 0)` together with the amplitude it was built from.
#[derive(Clone, Debug)]
pub struct InitialCondition<V> {
    pub value: V,
    pub amplitude: Option<Rational>,
}

impl<V> InitialCondition<V> {
    pub fn new(value: V) -> Self {
        Self { value, amplitude: None }
    }

    pub fn with_amplitude(value: V, amplitude: Rational) -> Self {
        Self {
            value,
            amplitude: Some(amplitude),
        }
    }
}

impl InitialCondition<HyperPoly> {
    /// `coeff · λ · sinh(μ (x + y))`
    pub fn sinh(coeff: Rational, amplitude: Rational, mu: Rational) -> Self {
        Self::with_amplitude(HyperPoly::sinh(mu, coeff * &amplitude), amplitude)
    }

    /// `coeff · λ · cosh^power(μ (x + y))`
    pub fn cosh_pow(coeff: Rational, amplitude: Rational, mu: Rational, power: u32) -> Self {
        Self::with_amplitude(HyperPoly::cosh_pow(mu, power, coeff * &amplitude), amplitude)
    }
}

/// Truncated `t`-series `U_0 .. U_K` of a solution.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSolution<V> {
    spec: PdeSpec,
    coeffs: Vec<V>,
    backend: BackendKind,
}

impl<V: Clone> SeriesSolution<V> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn spec(&self) -> &PdeSpec {
        &self.spec
    }

    pub fn backend(&self) -> BackendKind {
        self.backend
    }

    pub fn coeffs(&self) -> &[V] {
        &self.coeffs
    }

    pub fn coefficient(&self, k: usize) -> Result<&V> {
        self.coeffs.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            order: self.order(),
        })
    }

    /// Copy with `U_k` replaced; used to inject faults into verification.
    pub fn with_coefficient(&self, k: usize, value: V) -> Result<Self> {
        self.coefficient(k)?;
        let mut out = self.clone();
        out.coeffs[k] = value;
        Ok(out)
    }

    /// Copy keeping `U_0 .. U_order`.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        self.coefficient(order)?;
        let mut out = self.clone();
        out.coeffs.truncate(order + 1);
        Ok(out)
    }
}

pub fn transform_initial<A: FieldAlgebra>(
    backend: &A,
    spec: &PdeSpec,
    ic: &InitialCondition<A::Value>,
) -> SeriesSolution<A::Value> {
    SeriesSolution {
        spec: spec.clone(),
        coeffs: vec![ic.value.clone()],
        backend: backend.kind(),
    }
}

/// `[t^k] (Σ_j U_j t^j)^n` by `n - 1` truncated Cauchy products.
pub fn series_power_coefficient<A: FieldAlgebra>(
    backend: &A,
    series: &SeriesSolution<A::Value>,
    n: u32,
    k: usize,
) -> Result<A::Value> {
    assert!(n >= 1, "power must be at least 1");
    series.coefficient(k)?;
    let u = &series.coeffs[..=k];
    let mut acc = u.to_vec();
    for _ in 1..n {
        acc = (0..=k)
            .map(|m| {
                (0..=m).try_fold(backend.zero(), |sum, j| {
                    backend.add(&sum, &backend.mul(&acc[j], &u[m - j])?)
                })
            })
            .collect::<Result<_>>()?;
    }
    Ok(acc.swap_remove(k))
}

/// `N_k`, the `t^k` coefficient of the nonlinear operator applied to the series.
pub fn nonlinear_coefficient<A: FieldAlgebra>(
    backend: &A,
    spec: &PdeSpec,
    series: &SeriesSolution<A::Value>,
    k: usize,
) -> Result<A::Value> {
    let p = series_power_coefficient(backend, series, spec.power, k)?;
    spec.apply_operator(backend, &p)
}

/// Appends `U_{K+1} = -N_K / (K + 1)`.
pub fn rdtm_step<A: FieldAlgebra>(backend: &A, series: &SeriesSolution<A::Value>) -> Result<SeriesSolution<A::Value>> {
    let k = series.order();
    let n_k = nonlinear_coefficient(backend, &series.spec, series, k)?;
    let next = backend.scale(&n_k, &(-Rational::one() / Rational::from_integer((k + 1).into())))?;
    let mut out = series.clone();
    out.coeffs.push(next);
    Ok(out)
}

pub fn solve<A: FieldAlgebra>(
    backend: &A,
    spec: &PdeSpec,
    ic: &InitialCondition<A::Value>,
    order: usize,
) -> Result<SeriesSolution<A::Value>> {
    let mut series = transform_initial(backend, spec, ic);
    for _ in 0..order {
        series = rdtm_step(backend, &series)?;
    }
    Ok(series)
}

/// `Σ U_k(x, y) t^k`, Horner in `t`.
pub fn evaluate<A: FieldAlgebra>(
    backend: &A,
    series: &SeriesSolution<A::Value>,
    x: f64,
    y: f64,
    t: f64,
) -> Result<f64> {
    series
        .coeffs
        .iter()
        .rev()
        .try_fold(0.0, |acc, u| Ok(acc * t + backend.eval(u, x, y)?))
}

/// `Σ_{k=from}^{K} U_k(x, y) t^k`, the contribution of the higher-order terms.
pub fn evaluate_tail<A: FieldAlgebra>(
    backend: &A,
    series: &SeriesSolution<A::Value>,
    from: usize,
    x: f64,
    y: f64,
    t: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for (k, u) in series.coeffs.iter().enumerate().skip(from) {
        total += backend.eval(u, x, y)? * t.powi(k as i32);
    }
    Ok(total)
}

/// Exact-backend shortcut.
pub fn solve_exact(
    spec: &PdeSpec,
    ic: &InitialCondition<HyperPoly>,
    order: usize,
) -> Result<SeriesSolution<HyperPoly>> {
    solve(&ExactBackend, spec, ic, order)
}

/// Sum of the series at a rational time, as a single closed-form field.
pub fn sum_at_time(series: &SeriesSolution<HyperPoly>, t: &Rational) -> Result<HyperPoly> {
    let mut acc = HyperPoly::zero();
    for u in series.coeffs.iter().rev() {
        acc = acc.scale(t).checked_add(u)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn zk22_ic(lambda: Rational) -> InitialCondition<HyperPoly> {
        InitialCondition::cosh_pow(rat(-4, 3), lambda, rat(1, 1), 2)
    }

    fn zk33_ic(lambda: Rational) -> InitialCondition<HyperPoly> {
        InitialCondition::sinh(rat(3, 2), lambda, rat(1, 6))
    }

    fn poly(mu: Rational, scale: Rational, raw: &[(u32, u32, i64)]) -> HyperPoly {
        HyperPoly::normalize(mu, raw.iter().map(|&(s, c, n)| (s, c, &scale * rat(n, 1))))
    }

    #[test]
    fn spec_validation() {
        assert!(PdeSpec::new(rat(1, 1), rat(1, 1), rat(1, 1), 1).is_err());
        assert!(PdeSpec::new(rat(1, 1), rat(0, 1), rat(1, 1), 2).is_err());
        assert!(PdeSpec::new(rat(1, 1), rat(1, 1), rat(-1, 1), 2).is_err());
        assert!(PdeSpec::new(rat(0, 1), rat(1, 1), rat(1, 1), 2).is_ok());
    }

    #[test]
    fn initial_transform_copies_the_initial_condition() {
        let ic = zk33_ic(rat(1, 1));
        let s = transform_initial(&ExactBackend, &PdeSpec::zk33(), &ic);
        assert_eq!(s.order(), 0);
        assert_eq!(s.coeffs()[0], ic.value);
        let zero = InitialCondition::new(HyperPoly::zero());
        assert!(transform_initial(&ExactBackend, &PdeSpec::zk22(), &zero).coeffs()[0].is_zero());
    }

    #[test]
    fn power_coefficient_small_cases() {
        let b = ExactBackend;
        let spec = PdeSpec::zk33();
        let s = solve(&b, &spec, &zk33_ic(rat(1, 1)), 2).unwrap();
        let u = s.coeffs();
        assert_eq!(series_power_coefficient(&b, &s, 2, 0).unwrap(), u[0].pow(2));
        let two_u0u1 = u[0].checked_mul(&u[1]).unwrap().scale(&rat(2, 1));
        assert_eq!(series_power_coefficient(&b, &s, 2, 1).unwrap(), two_u0u1);
        // triples summing to 2: (2,0,0)x3 and (1,1,0)x3
        let expect = u[0]
            .pow(2)
            .checked_mul(&u[2])
            .unwrap()
            .scale(&rat(3, 1))
            .checked_add(&u[0].checked_mul(&u[1].pow(2)).unwrap().scale(&rat(3, 1)))
            .unwrap();
        assert_eq!(series_power_coefficient(&b, &s, 3, 2).unwrap(), expect);
        assert!(matches!(
            series_power_coefficient(&b, &s, 2, 3),
            Err(Error::IndexOutOfRange { index: 3, order: 2 })
        ));
    }

    #[test]
    fn first_nonlinear_term_for_zk22() {
        let lambda = rat(3, 7);
        let s = transform_initial(&ExactBackend, &PdeSpec::zk22(), &zk22_ic(lambda.clone()));
        let n0 = nonlinear_coefficient(&ExactBackend, &PdeSpec::zk22(), &s, 0).unwrap();
        // 2 (16/9) λ² c s (10 c² - 3)
        let scale = rat(32, 9) * &lambda * &lambda;
        assert_eq!(n0, poly(rat(1, 1), scale, &[(1, 3, 10), (1, 1, -3)]));
    }

    #[test]
    fn nonlinear_term_of_zero_series_vanishes() {
        let s = solve(
            &ExactBackend,
            &PdeSpec::zk33(),
            &InitialCondition::new(HyperPoly::zero()),
            3,
        )
        .unwrap();
        for k in 0..=3 {
            assert!(nonlinear_coefficient(&ExactBackend, &PdeSpec::zk33(), &s, k)
                .unwrap()
                .is_zero());
        }
    }

    #[test]
    fn second_nonlinear_term_for_zk33() {
        let b = ExactBackend;
        let spec = PdeSpec::zk33();
        let s = solve(&b, &spec, &zk33_ic(rat(1, 1)), 1).unwrap();
        let u = s.coeffs();
        let inner = u[0].pow(2).checked_mul(&u[1]).unwrap().scale(&rat(3, 1));
        let expect = inner
            .diff(Axis::X)
            .checked_add(&inner.diff_n(Axis::X, 3).scale(&rat(2, 1)))
            .unwrap()
            .checked_add(&inner.diff_n(Axis::Y, 2).diff(Axis::X).scale(&rat(2, 1)))
            .unwrap();
        assert_eq!(nonlinear_coefficient(&b, &spec, &s, 1).unwrap(), expect);
    }

    #[test]
    fn first_step_examples() {
        let lambda = rat(2, 5);
        let s = rdtm_step(
            &ExactBackend,
            &transform_initial(&ExactBackend, &PdeSpec::zk22(), &zk22_ic(lambda.clone())),
        )
        .unwrap();
        let l2 = &lambda * &lambda;
        assert_eq!(
            s.coeffs()[1],
            poly(rat(1, 1), rat(-32, 9) * l2, &[(1, 3, 10), (1, 1, -3)])
        );

        let s = rdtm_step(
            &ExactBackend,
            &transform_initial(&ExactBackend, &PdeSpec::zk33(), &zk33_ic(lambda.clone())),
        )
        .unwrap();
        let l3 = &lambda * &lambda * &lambda;
        assert_eq!(
            s.coeffs()[1],
            poly(rat(1, 6), rat(-3, 8) * l3, &[(0, 3, 9), (0, 1, -8)])
        );

        let z = InitialCondition::new(HyperPoly::zero());
        assert!(
            rdtm_step(&ExactBackend, &transform_initial(&ExactBackend, &PdeSpec::zk33(), &z))
                .unwrap()
                .coeffs()[1]
                .is_zero()
        );
    }

    #[test]
    fn prefix_stability() {
        let a = solve_exact(&PdeSpec::zk33(), &zk33_ic(rat(1, 1)), 3).unwrap();
        let b = solve_exact(&PdeSpec::zk33(), &zk33_ic(rat(1, 1)), 4).unwrap();
        assert_eq!(b.truncated(3).unwrap(), a);
    }

    #[test]
    fn evaluation_examples() {
        let lambda = rat(1, 100000);
        let s = solve_exact(&PdeSpec::zk33(), &zk33_ic(lambda.clone()), 4).unwrap();
        let v = evaluate(&ExactBackend, &s, 0.0, 0.0, 0.001).unwrap();
        assert!((v / -0.375e-18 - 1.0).abs() < 1e-12, "{v:e}");
        assert_eq!(
            evaluate(&ExactBackend, &s, 0.3, 0.2, 0.0).unwrap(),
            s.coeffs()[0].eval(0.3, 0.2)
        );

        let s = solve_exact(&PdeSpec::zk22(), &zk22_ic(lambda), 4).unwrap();
        let v = evaluate(&ExactBackend, &s, 0.0, 0.0, 0.001).unwrap();
        assert!((v / -1.333333333e-5 - 1.0).abs() < 5e-10, "{v:e}");
    }

    #[test]
    fn translation_along_the_level_lines() {
        let s = solve_exact(&PdeSpec::zk22(), &zk22_ic(rat(1, 1000)), 3).unwrap();
        for &d in &[0.25, -0.5, 1.0] {
            let a = evaluate(&ExactBackend, &s, 0.5, 0.5, 0.01).unwrap();
            let b = evaluate(&ExactBackend, &s, 0.5 + d, 0.5 - d, 0.01).unwrap();
            assert!((a - b).abs() <= 1e-15 * a.abs());
        }
    }

    #[test]
    fn series_sum_at_rational_time() {
        let s = solve_exact(&PdeSpec::zk22(), &zk22_ic(rat(1, 10)), 2).unwrap();
        let t = rat(1, 4);
        let field = sum_at_time(&s, &t).unwrap();
        let direct = evaluate(&ExactBackend, &s, 0.2, 0.1, 0.25).unwrap();
        assert!((field.eval(0.2, 0.1) - direct).abs() < 1e-12 * direct.abs());
        assert!(sum_at_time(&s, &Rational::zero()).unwrap() == s.coeffs()[0]);
    }
}
