//! Sampled fields on a uniform 2-D grid with centered finite differences.
//!
//! Derivatives are only valid where the whole stencil fits inside the data,
//! so every field tracks how many boundary layers along each axis no longer
//! hold meaningful values. Each derivative grows the margin along its axis
//! by the stencil radius; pointwise operations take the larger margin of
//! their operands. Reads inside the margin are rejected.

use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::algebra::{Axis, BackendKind, FieldAlgebra, FieldNorm};
use crate::exact::Rational;
use crate::real::Real;
use crate::{Error, Result};

/// Uniform node lattice `(x0 + i dx, y0 + j dy)`, `0 <= i < nx`, `0 <= j < ny`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    nx: usize,
    ny: usize,
}

impl Grid {
    pub fn new(x0: f64, y0: f64, dx: f64, dy: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(dx > 0.0 && dy > 0.0) || !dx.is_finite() || !dy.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "spacings must be positive, got ({dx}, {dy})"
            )));
        }
        if !x0.is_finite() || !y0.is_finite() {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3x3 nodes, got {nx}x{ny}")));
        }
        Ok(Self { x0, y0, dx, dy, nx, ny })
    }

    /// `points x points` nodes covering `[min, max]²`.
    pub fn square(min: f64, max: f64, points: usize) -> Result<Self> {
        if max.is_nan() || min.is_nan() || max <= min || points < 3 {
            return Err(Error::InvalidGrid(format!(
                "bad square grid [{min}, {max}] with {points} points"
            )));
        }
        let h = (max - min) / (points - 1) as f64;
        Self::new(min, min, h, h, points, points)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    /// Node coordinates carried in `T`, so wider types see the exact node
    /// `x0 + i·dx` rather than its binary64 rounding.
    pub fn node<T: Real>(&self, i: usize, j: usize) -> (T, T) {
        let x = T::from_f64(self.x0) + T::from_f64(self.dx) * T::from_f64(i as f64);
        let y = T::from_f64(self.y0) + T::from_f64(self.dy) * T::from_f64(j as f64);
        (x, y)
    }

    fn axis_len(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
        }
    }
}

/// Weights of a centered finite-difference stencil on offsets `-radius ..= radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub derivative: u32,
    pub accuracy: u32,
    pub radius: usize,
    pub weights: Vec<Rational>,
}

impl Stencil {
    pub fn offsets(&self) -> impl Iterator<Item = i64> + '_ {
        let r = self.radius as i64;
        -r..=r
    }
}

/// Centered stencil for the `derivative`-th derivative with truncation error
/// `O(h^accuracy)`, from an exact solve of the moment conditions
/// `Σ_j w_j j^m = m! δ_{m,derivative}`, `m = 0 ..= 2r`.
pub fn stencil_coefficients(derivative: u32, accuracy: u32) -> Result<Stencil> {
    if !(1..=3).contains(&derivative) || !matches!(accuracy, 2 | 4 | 6 | 8) {
        return Err(Error::UnsupportedStencil { derivative, accuracy });
    }
    let radius = ((derivative - 1) / 2 + accuracy / 2) as usize;
    let size = 2 * radius + 1;
    let offsets: Vec<Rational> = (-(radius as i64)..=radius as i64)
        .map(|o| Rational::from_integer(o.into()))
        .collect();

    // augmented Vandermonde system, row m: Σ_j o_j^m w_j = m! δ_{m,d}
    let mut rows: Vec<Vec<Rational>> = (0..size)
        .map(|m| {
            let mut row: Vec<Rational> = offsets.iter().map(|o| num_traits::pow(o.clone(), m)).collect();
            let rhs = if m as u32 == derivative {
                (1..=derivative).fold(Rational::one(), |acc, i| acc * Rational::from_integer(i.into()))
            } else {
                Rational::zero()
            };
            row.push(rhs);
            row
        })
        .collect();

    for col in 0..size {
        let pivot = (col..size)
            .find(|&r| !rows[r][col].is_zero())
            .expect("Vandermonde matrix on distinct nodes is nonsingular");
        rows.swap(col, pivot);
        let inv = Rational::one() / &rows[col][col];
        for v in rows[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= &factor * p;
            }
        }
    }
    let weights = rows.into_iter().map(|mut row| row.pop().expect("rhs")).collect();
    Ok(Stencil {
        derivative,
        accuracy,
        radius,
        weights,
    })
}

/// How [`GridField::eval`] produced its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// The query coincided with a node.
    Node,
    /// Bilinear interpolation between the four surrounding nodes.
    Bilinear,
}

/// Queries within this fraction of a spacing snap to the node.
const NODE_SNAP: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct GridField<T> {
    grid: Arc<Grid>,
    values: Vec<T>,
    margin_x: usize,
    margin_y: usize,
}

pub fn field_from_function<T, F>(grid: &Arc<Grid>, f: F) -> GridField<T>
where
    T: Real,
    F: Fn(T, T) -> T + Sync,
{
    let ny = grid.ny;
    let mut values = vec![T::zero(); grid.nx * ny];
    values.par_chunks_mut(ny).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            let (x, y) = grid.node::<T>(i, j);
            *v = f(x, y);
        }
    });
    GridField {
        grid: Arc::clone(grid),
        values,
        margin_x: 0,
        margin_y: 0,
    }
}

impl<T: Real> GridField<T> {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![T::zero(); grid.nx * grid.ny],
            margin_x: 0,
            margin_y: 0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Invalid boundary layers, `(along x, along y)`.
    pub fn margins(&self) -> (usize, usize) {
        (self.margin_x, self.margin_y)
    }

    /// The larger of the two axis margins.
    pub fn margin(&self) -> usize {
        self.margin_x.max(self.margin_y)
    }

    pub fn value(&self, i: usize, j: usize) -> Result<T> {
        if !self.in_interior(i, j) {
            return Err(Error::OutOfRegion {
                x: self.grid.x(i),
                y: self.grid.y(j),
            });
        }
        Ok(self.values[i * self.grid.ny + j])
    }

    pub fn in_interior(&self, i: usize, j: usize) -> bool {
        let g = &self.grid;
        i >= self.margin_x && i + self.margin_x < g.nx && j >= self.margin_y && j + self.margin_y < g.ny
    }

    /// Node indices of the valid interior.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let g = &self.grid;
        let (mx, my) = (self.margin_x, self.margin_y);
        (mx..g.nx.saturating_sub(mx)).flat_map(move |i| (my..g.ny.saturating_sub(my)).map(move |j| (i, j)))
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(T, T) -> T + Sync) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(&a, &b)| op(a, b))
            .collect();
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values,
            margin_x: self.margin_x.max(other.margin_x),
            margin_y: self.margin_y.max(other.margin_y),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.par_iter().map(|&v| v * factor).collect(),
            margin_x: self.margin_x,
            margin_y: self.margin_y,
        }
    }

    /// Applies a 1-D stencil along `axis`; `weights` already include the
    /// `h^-d` factor.
    pub fn apply_stencil(&self, axis: Axis, radius: usize, weights: &[T]) -> Result<Self> {
        let g = &self.grid;
        let (mut mx, mut my) = (self.margin_x, self.margin_y);
        match axis {
            Axis::X => mx += radius,
            Axis::Y => my += radius,
        }
        if 2 * mx >= g.nx || 2 * my >= g.ny {
            return Err(Error::DomainExhausted {
                margin_x: mx,
                margin_y: my,
                nx: g.nx,
                ny: g.ny,
            });
        }
        let n = g.axis_len(axis);
        let ny = g.ny;
        let src = &self.values;
        let mut out = vec![T::zero(); src.len()];
        out.par_chunks_mut(ny).enumerate().for_each(|(i, row)| match axis {
            Axis::X => {
                if i < radius || i + radius >= n {
                    return;
                }
                for (j, v) in row.iter_mut().enumerate() {
                    let mut acc = T::zero();
                    for (o, w) in weights.iter().enumerate() {
                        acc += *w * src[(i + o - radius) * ny + j];
                    }
                    *v = acc;
                }
            }
            Axis::Y => {
                let line = &src[i * ny..(i + 1) * ny];
                for j in radius..n.saturating_sub(radius) {
                    let mut acc = T::zero();
                    for (o, w) in weights.iter().enumerate() {
                        acc += *w * line[j + o - radius];
                    }
                    row[j] = acc;
                }
            }
        });
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values: out,
            margin_x: mx,
            margin_y: my,
        })
    }

    /// Derivative of order `derivative` along `axis` with a stencil of the
    /// given accuracy order.
    pub fn diff(&self, axis: Axis, derivative: u32, accuracy: u32) -> Result<Self> {
        let stencil = stencil_coefficients(derivative, accuracy)?;
        let h = match axis {
            Axis::X => self.grid.dx,
            Axis::Y => self.grid.dy,
        };
        let weights = scaled_weights::<T>(&stencil, h);
        self.apply_stencil(axis, stencil.radius, &weights)
    }

    fn locate_axis(coord: f64, origin: f64, h: f64, n: usize, margin: usize) -> Option<(usize, T)> {
        let f = (coord - origin) / h;
        let nearest = f.round();
        let lo = margin as f64;
        let hi = (n - 1 - margin) as f64;
        if (f - nearest).abs() <= NODE_SNAP {
            return (nearest >= lo && nearest <= hi).then(|| (nearest as usize, T::zero()));
        }
        let base = f.floor();
        if base < lo || base + 1.0 > hi {
            return None;
        }
        Some((base as usize, T::from_f64(f - base)))
    }

    /// Value at `(x, y)`: the node value when the query sits on a node,
    /// bilinear interpolation otherwise.
    pub fn eval(&self, x: f64, y: f64) -> Result<(T, EvalMode)> {
        let g = &self.grid;
        let (i, fx) = Self::locate_axis(x, g.x0, g.dx, g.nx, self.margin_x).ok_or(Error::OutOfRegion { x, y })?;
        let (j, fy) = Self::locate_axis(y, g.y0, g.dy, g.ny, self.margin_y).ok_or(Error::OutOfRegion { x, y })?;
        let at = |i: usize, j: usize| self.values[i * g.ny + j];
        let zero = T::zero();
        if fx == zero && fy == zero {
            return Ok((at(i, j), EvalMode::Node));
        }
        let one = T::one();
        let (i1, j1) = (if fx == zero { i } else { i + 1 }, if fy == zero { j } else { j + 1 });
        let v = (one - fx) * (one - fy) * at(i, j)
            + fx * (one - fy) * at(i1, j)
            + (one - fx) * fy * at(i, j1)
            + fx * fy * at(i1, j1);
        Ok((v, EvalMode::Bilinear))
    }

    /// Largest magnitude over the valid interior.
    pub fn max_abs(&self) -> f64 {
        self.interior()
            .map(|(i, j)| self.values[i * self.grid.ny + j].abs().to_f64())
            .fold(0.0, f64::max)
    }

    /// `(min, max)` over the valid interior.
    pub fn range(&self) -> (f64, f64) {
        self.interior()
            .map(|(i, j)| self.values[i * self.grid.ny + j].to_f64())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

fn scaled_weights<T: Real>(stencil: &Stencil, h: f64) -> Vec<T> {
    let inv = (T::one() / T::from_f64(h)).powi(stencil.derivative);
    stencil.weights.iter().map(|w| T::from_rational(w) * inv).collect()
}

/// [`FieldAlgebra`] over [`GridField`] on one fixed grid.
#[derive(Clone, Debug)]
pub struct GridBackend<T> {
    grid: Arc<Grid>,
    accuracy: u32,
    // indexed by derivative order - 1, then by axis
    stencils: Vec<(usize, [Vec<T>; 2])>,
}

impl<T: Real> GridBackend<T> {
    pub fn new(grid: Arc<Grid>, accuracy: u32) -> Result<Self> {
        let stencils = (1..=3)
            .map(|d| {
                let s = stencil_coefficients(d, accuracy)?;
                Ok((s.radius, [scaled_weights(&s, grid.dx), scaled_weights(&s, grid.dy)]))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            grid,
            accuracy,
            stencils,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn accuracy(&self) -> u32 {
        self.accuracy
    }

    /// Stencil radius used for a derivative of the given order.
    pub fn radius(&self, derivative: u32) -> usize {
        self.stencils[derivative as usize - 1].0
    }

    pub fn sample<F>(&self, f: F) -> GridField<T>
    where
        F: Fn(T, T) -> T + Sync,
    {
        field_from_function(&self.grid, f)
    }
}

impl<T: Real> FieldAlgebra for GridBackend<T> {
    type Value = GridField<T>;

    fn kind(&self) -> BackendKind {
        BackendKind::Grid
    }

    fn zero(&self) -> GridField<T> {
        GridField::zeros(&self.grid)
    }

    fn add(&self, a: &GridField<T>, b: &GridField<T>) -> Result<GridField<T>> {
        a.checked_add(b)
    }

    fn scale(&self, a: &GridField<T>, factor: &Rational) -> Result<GridField<T>> {
        Ok(a.scale(T::from_rational(factor)))
    }

    fn mul(&self, a: &GridField<T>, b: &GridField<T>) -> Result<GridField<T>> {
        a.checked_mul(b)
    }

    fn diff(&self, a: &GridField<T>, axis: Axis, order: u32) -> Result<GridField<T>> {
        if !(1..=3).contains(&order) {
            return Err(Error::UnsupportedStencil {
                derivative: order,
                accuracy: self.accuracy,
            });
        }
        if a.grid() != &self.grid && **a.grid() != *self.grid {
            return Err(Error::GridMismatch);
        }
        let (radius, weights) = &self.stencils[order as usize - 1];
        let w = match axis {
            Axis::X => &weights[0],
            Axis::Y => &weights[1],
        };
        a.apply_stencil(axis, *radius, w)
    }

    fn eval(&self, a: &GridField<T>, x: f64, y: f64) -> Result<f64> {
        Ok(a.eval(x, y)?.0.to_f64())
    }

    fn norm(&self, a: &GridField<T>) -> FieldNorm {
        FieldNorm::Sampled { max_abs: a.max_abs() }
    }
}
