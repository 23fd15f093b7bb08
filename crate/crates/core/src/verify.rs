//! Independent checks on computed series.
//!
//! Nothing here reuses the Cauchy-product path of [`crate::series`]: the
//! nonlinear coefficients are rebuilt by enumerating index tuples, residuals
//! are formed from those, and the grid backend is compared against the
//! closed forms node by node.

use num_traits::{One, Zero};

use crate::algebra::{ExactBackend, FieldAlgebra, FieldNorm};
use crate::exact::{rat, rational_from_f64, HyperPoly, Rational};
use crate::grid::{EvalMode, GridField};
use crate::real::Real;
use crate::series::{self, InitialCondition, PdeSpec, SeriesSolution};
use crate::{Error, Result};

fn for_each_tuple(
    n: u32,
    k: usize,
    max: usize,
    prefix: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if prefix.len() as u32 == n {
        if prefix.iter().sum::<usize>() == k {
            visit(prefix)?;
        }
        return Ok(());
    }
    let used: usize = prefix.iter().sum();
    for i in 0..=max.min(k - used) {
        prefix.push(i);
        for_each_tuple(n, k, max, prefix, visit)?;
        prefix.pop();
    }
    Ok(())
}

/// `Σ_{i_1 + … + i_n = k} U_{i_1} ⋯ U_{i_n}`, summed over every ordered tuple.
pub fn brute_force_power_coefficient<A: FieldAlgebra>(
    backend: &A,
    series: &SeriesSolution<A::Value>,
    n: u32,
    k: usize,
) -> Result<A::Value> {
    assert!(n >= 1);
    series.coefficient(k)?;
    let u = series.coeffs();
    let mut total = backend.zero();
    for_each_tuple(n, k, k, &mut Vec::with_capacity(n as usize), &mut |idx| {
        let mut prod = u[idx[0]].clone();
        for &i in &idx[1..] {
            prod = backend.mul(&prod, &u[i])?;
        }
        total = backend.add(&total, &prod)?;
        Ok(())
    })?;
    Ok(total)
}

/// Series residual coefficients `R_k = (k+1) U_{k+1} + N_k`, `k < K`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub order: usize,
    pub norms: Vec<FieldNorm>,
    /// Per-coefficient roundoff allowance for sampled backends.
    pub bounds: Vec<f64>,
}

impl ResidualReport {
    /// Exact backend: which coefficients vanish identically.
    pub fn exact_zero_flags(&self) -> Vec<bool> {
        self.norms
            .iter()
            .map(|n| matches!(n, FieldNorm::Exact { is_zero: true }))
            .collect()
    }

    /// Every coefficient is zero (exact) or below its allowance (sampled).
    pub fn passes(&self) -> bool {
        self.norms.iter().zip(&self.bounds).all(|(n, b)| match n {
            FieldNorm::Exact { is_zero } => *is_zero,
            FieldNorm::Sampled { max_abs } => *max_abs <= *b,
        })
    }
}

/// Residual fields `R_0 .. R_{K-1}`, with `N_k` from the brute-force expansion.
pub fn residual_coefficients<A: FieldAlgebra>(
    backend: &A,
    spec: &PdeSpec,
    series: &SeriesSolution<A::Value>,
) -> Result<Vec<(A::Value, A::Value)>> {
    let u = series.coeffs();
    (0..series.order())
        .map(|k| {
            let p = brute_force_power_coefficient(backend, series, spec.power(), k)?;
            let n_k = spec.apply_operator(backend, &p)?;
            let lhs = backend.scale(&u[k + 1], &Rational::from_integer((k + 1).into()))?;
            Ok((backend.add(&lhs, &n_k)?, n_k))
        })
        .collect()
}

/// Allowance for a sampled residual: the two sides agree up to roundoff in
/// the summation order of the products.
const SAMPLED_RESIDUAL_FACTOR: f64 = 1e4;

pub fn residual_series<A: FieldAlgebra>(
    backend: &A,
    spec: &PdeSpec,
    series: &SeriesSolution<A::Value>,
    unit_roundoff: f64,
) -> Result<ResidualReport> {
    let coeffs = residual_coefficients(backend, spec, series)?;
    let mut norms = Vec::with_capacity(coeffs.len());
    let mut bounds = Vec::with_capacity(coeffs.len());
    for (r, n_k) in &coeffs {
        norms.push(backend.norm(r));
        let scale = match backend.norm(n_k) {
            FieldNorm::Sampled { max_abs } => max_abs,
            FieldNorm::Exact { .. } => 0.0,
        };
        bounds.push(SAMPLED_RESIDUAL_FACTOR * unit_roundoff * scale);
    }
    Ok(ResidualReport {
        order: series.order(),
        norms,
        bounds,
    })
}

/// Exact-backend residual check.
pub fn residual_series_exact(spec: &PdeSpec, series: &SeriesSolution<HyperPoly>) -> Result<ResidualReport> {
    residual_series(&ExactBackend, spec, series, 0.0)
}

/// How `∂t ũ` is formed in [`pointwise_residual`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeDerivative {
    /// Differentiate the `t`-polynomial exactly.
    Exact,
    /// Central difference with the given step, still in exact arithmetic.
    Central(f64),
}

/// `|∂t ũ + a (ũⁿ)_x + b (ũⁿ)_xxx + k (ũⁿ)_yyx|` at `(x, y, t)`.
///
/// The binary64 inputs `t` and the step are converted exactly to rationals,
/// so the only rounding is the final evaluation at `(x, y)`.
pub fn pointwise_residual(
    spec: &PdeSpec,
    series: &SeriesSolution<HyperPoly>,
    x: f64,
    y: f64,
    t: f64,
    time_derivative: TimeDerivative,
) -> Result<f64> {
    let t_exact = rational_from_f64(t).ok_or_else(|| Error::Invariant(format!("non-finite time {t}")))?;
    let u = series::sum_at_time(series, &t_exact)?;
    let dudt = match time_derivative {
        TimeDerivative::Exact => {
            let mut acc = HyperPoly::zero();
            for (k, c) in series.coeffs().iter().enumerate().skip(1).rev() {
                acc = acc
                    .scale(&t_exact)
                    .checked_add(&c.scale(&Rational::from_integer(k.into())))?;
            }
            acc
        }
        TimeDerivative::Central(h) => {
            let h = rational_from_f64(h)
                .filter(|h| !h.is_zero())
                .ok_or_else(|| Error::Invariant(format!("bad time step {h}")))?;
            let plus = series::sum_at_time(series, &(&t_exact + &h))?;
            let minus = series::sum_at_time(series, &(&t_exact - &h))?;
            plus.checked_sub(&minus)?.scale(&(Rational::one() / (rat(2, 1) * h)))
        }
    };
    let spatial = if u.is_zero() {
        HyperPoly::zero()
    } else {
        spec.apply_operator(&ExactBackend, &u.pow(spec.power()))?
    };
    Ok(dudt.checked_add(&spatial)?.eval(x, y).abs())
}

/// Largest `|U_k^exact − U_k^grid|` over `k` and the query points, evaluated
/// in the grid's scalar type. Node queries compare at the node's own
/// coordinates.
pub fn cross_validate<T: Real>(
    exact: &SeriesSolution<HyperPoly>,
    grid: &SeriesSolution<GridField<T>>,
    points: &[(f64, f64)],
) -> Result<f64> {
    Ok(cross_validate_by_order(exact, grid, points)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Per-coefficient version of [`cross_validate`].
pub fn cross_validate_by_order<T: Real>(
    exact: &SeriesSolution<HyperPoly>,
    grid: &SeriesSolution<GridField<T>>,
    points: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let order = exact.order().min(grid.order());
    (0..=order)
        .map(|k| {
            let field = &grid.coeffs()[k];
            let closed = exact.coeffs()[k].evaluator::<T>();
            let g = field.grid();
            let mut worst = 0.0f64;
            for &(x, y) in points {
                let (v, mode) = field.eval(x, y)?;
                let want = match mode {
                    EvalMode::Node => {
                        let i = ((x - g.x(0)) / g.dx()).round() as usize;
                        let j = ((y - g.y(0)) / g.dy()).round() as usize;
                        let (nx, ny) = g.node::<T>(i, j);
                        closed.eval(nx, ny)
                    }
                    EvalMode::Bilinear => closed.eval(T::from_f64(x), T::from_f64(y)),
                };
                worst = worst.max((v - want).abs().to_f64());
            }
            Ok(worst)
        })
        .collect()
}

/// Largest `|exact − sampled|` over valid-interior nodes inside `[lo, hi]²`.
/// Fails if no such node exists.
pub fn max_error_in_box<T: Real>(exact: &HyperPoly, field: &GridField<T>, lo: f64, hi: f64) -> Result<f64> {
    let g = field.grid();
    let closed = exact.evaluator::<T>();
    let slack = 1e-9 * g.dx().max(g.dy());
    let mut worst = 0.0f64;
    let mut covered = 0usize;
    for i in 0..g.nx() {
        for j in 0..g.ny() {
            let (x, y) = (g.x(i), g.y(j));
            if !field.in_interior(i, j) || x < lo - slack || x > hi + slack || y < lo - slack || y > hi + slack {
                continue;
            }
            let v = field.value(i, j)?;
            let (nx, ny) = g.node::<T>(i, j);
            worst = worst.max((v - closed.eval(nx, ny)).abs().to_f64());
            covered += 1;
        }
    }
    if covered == 0 {
        return Err(Error::OutOfRegion { x: lo, y: hi });
    }
    Ok(worst)
}

/// Whether every node inside `[lo, hi]²` lies in the valid interior.
pub fn interior_covers_box<T: Real>(field: &GridField<T>, lo: f64, hi: f64) -> bool {
    let g = field.grid();
    let slack = 1e-9 * g.dx().max(g.dy());
    let mut any = false;
    for i in 0..g.nx() {
        for j in 0..g.ny() {
            let (x, y) = (g.x(i), g.y(j));
            if x >= lo - slack && x <= hi + slack && y >= lo - slack && y <= hi + slack {
                if !field.in_interior(i, j) {
                    return false;
                }
                any = true;
            }
        }
    }
    any
}

/// Observed order from errors at spacings `h` and `h / 2`.
pub fn observed_order(coarse_error: f64, fine_error: f64) -> f64 {
    (coarse_error / fine_error).log2()
}

/// One line of a reproduction table.
#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub lambda: f64,
    pub x: f64,
    pub y: f64,
    pub t: f64,
    /// `ũ_K(x, y, t)`.
    pub rdtm_value: f64,
    /// `|ũ_{K+2} − ũ_K|`.
    pub self_error: f64,
}

/// Evaluates `ũ_K` and its self-convergence error at each `(x, y, t)`.
pub fn table_rows(
    spec: &PdeSpec,
    ic: &InitialCondition<HyperPoly>,
    order: usize,
    points: &[(f64, f64, f64)],
) -> Result<Vec<TableRow>> {
    let extended = series::solve_exact(spec, ic, order + 2)?;
    let lambda = ic.amplitude.as_ref().map_or(f64::NAN, f64::from_rational);
    table_rows_from(&ExactBackend, &extended, order, lambda, points)
}

/// [`table_rows`] for an already solved series of order at least `order + 2`.
pub fn table_rows_from<A: FieldAlgebra>(
    backend: &A,
    extended: &SeriesSolution<A::Value>,
    order: usize,
    lambda: f64,
    points: &[(f64, f64, f64)],
) -> Result<Vec<TableRow>> {
    if extended.order() < order + 2 {
        return Err(Error::IndexOutOfRange {
            index: order + 2,
            order: extended.order(),
        });
    }
    let extended = extended.truncated(order + 2)?;
    let truncated = extended.truncated(order)?;
    points
        .iter()
        .map(|&(x, y, t)| {
            let rdtm_value = series::evaluate(backend, &truncated, x, y, t)?;
            let tail = series::evaluate_tail(backend, &extended, order + 1, x, y, t)?;
            Ok(TableRow {
                lambda,
                x,
                y,
                t,
                rdtm_value,
                self_error: tail.abs(),
            })
        })
        .collect()
}

/// Adds `delta` to one stored coefficient of `poly`: its first term, or a
/// constant term on scale `mu` when `poly` is zero.
pub fn perturb_coefficient(poly: &HyperPoly, mu: &Rational, delta: &Rational) -> HyperPoly {
    let bump = match poly.terms().next() {
        Some((m, _)) => HyperPoly::normalize(poly.mu().clone(), [(m.sinh, m.cosh, delta.clone())]),
        None => HyperPoly::constant(mu.clone(), delta.clone()),
    };
    poly.checked_add(&bump).expect("same scale")
}

/// The two worked examples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Example {
    /// ZK(3,3) with `u(x, y, 0) = (3/2) λ sinh((x + y)/6)`.
    Zk33,
    /// ZK(2,2) with `u(x, y, 0) = −(4/3) λ cosh²(x + y)`.
    Zk22,
}

/// Amplitude, time and `(x, y)` lattice of the published tables.
pub const TABLE_LAMBDA: f64 = 1e-5;
pub const TABLE_TIME: f64 = 1e-3;
pub const TABLE_ORDER: usize = 4;
pub const TABLE_POINTS: [(f64, f64); 9] = [
    (0.0, 0.0),
    (0.0, 0.5),
    (0.0, 1.0),
    (0.5, 0.0),
    (0.5, 0.5),
    (0.5, 1.0),
    (1.0, 0.0),
    (1.0, 0.5),
    (1.0, 1.0),
];

/// A published reference value for one table point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PublishedValue {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    /// The printed value is off by a power of ten from its own initial
    /// condition; only its significant digits are comparable.
    pub exponent_misprint: bool,
}

const fn pv(x: f64, y: f64, value: f64) -> PublishedValue {
    PublishedValue {
        x,
        y,
        value,
        exponent_misprint: false,
    }
}

const ZK33_PUBLISHED: [PublishedValue; 9] = [
    pv(0.0, 0.0, -0.375000000e-18),
    pv(0.0, 0.5, 0.1251447262e-5),
    pv(0.0, 1.0, 0.2511590160e-5),
    pv(0.5, 0.0, 0.1251447262e-5),
    pv(0.5, 0.5, 0.2511590160e-5),
    pv(0.5, 1.0, 0.3789184752e-5),
    pv(1.0, 0.0, 0.2511590160e-5),
    pv(1.0, 0.5, 0.3789184752e-5),
    pv(1.0, 1.0, 0.5093108360e-5),
];

const ZK22_PUBLISHED: [PublishedValue; 9] = [
    pv(0.0, 0.0, -0.00001333333333),
    pv(0.0, 0.5, -0.00001695387292),
    pv(0.0, 1.0, -0.00003174798469),
    pv(0.5, 0.0, -0.00001695387292),
    pv(0.5, 0.5, -0.00003174798469),
    pv(0.5, 1.0, -0.00007378450649),
    pv(1.0, 0.0, -0.00003174798469),
    pv(1.0, 0.5, -0.00007378450649),
    PublishedValue {
        x: 1.0,
        y: 1.0,
        value: -0.00001887222243,
        exponent_misprint: true,
    },
];

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Example::Zk33 => "zk33",
            Example::Zk22 => "zk22",
        }
    }

    pub fn spec(self) -> PdeSpec {
        match self {
            Example::Zk33 => PdeSpec::zk33(),
            Example::Zk22 => PdeSpec::zk22(),
        }
    }

    pub fn initial_condition(self, lambda: Rational) -> InitialCondition<HyperPoly> {
        match self {
            Example::Zk33 => InitialCondition::sinh(rat(3, 2), lambda, rat(1, 6)),
            Example::Zk22 => InitialCondition::cosh_pow(rat(-4, 3), lambda, rat(1, 1), 2),
        }
    }

    pub fn published(self) -> &'static [PublishedValue] {
        match self {
            Example::Zk33 => &ZK33_PUBLISHED,
            Example::Zk22 => &ZK22_PUBLISHED,
        }
    }
}

/// Recomputes a published table: `λ = 1e-5`, `t = 1e-3`, `K = 4`.
pub fn reproduce_table(example: Example) -> Result<Vec<TableRow>> {
    let ic = example.initial_condition(rat(1, 100_000));
    let points: Vec<_> = TABLE_POINTS.iter().map(|&(x, y)| (x, y, TABLE_TIME)).collect();
    table_rows(&example.spec(), &ic, TABLE_ORDER, &points)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Agreement {
    /// Same value to the requested significant digits.
    Match,
    /// Same significant digits, different decimal exponent, on a row known
    /// to be misprinted.
    MantissaOnly,
    Mismatch,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowCheck {
    pub x: f64,
    pub y: f64,
    pub computed: f64,
    pub published: f64,
    pub agreement: Agreement,
}

fn mantissa(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    v / 10f64.powi(v.abs().log10().floor() as i32)
}

fn same_digits(a: f64, b: f64, digits: i32) -> bool {
    (a - b).abs() <= 0.5 * 10f64.powi(1 - digits) * b.abs()
}

/// Compares computed rows against published values to `digits` significant digits.
pub fn compare_published(rows: &[TableRow], published: &[PublishedValue], digits: i32) -> Vec<RowCheck> {
    rows.iter()
        .zip(published)
        .map(|(row, p)| {
            let agreement = if same_digits(row.rdtm_value, p.value, digits) {
                Agreement::Match
            } else if p.exponent_misprint && same_digits(mantissa(row.rdtm_value), mantissa(p.value), digits) {
                Agreement::MantissaOnly
            } else {
                Agreement::Mismatch
            };
            RowCheck {
                x: row.x,
                y: row.y,
                computed: row.rdtm_value,
                published: p.value,
                agreement,
            }
        })
        .collect()
}
