use thiserror::Error;

use crate::exact::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument scale mismatch: {left} vs {right}")]
    ScaleMismatch { left: Box<Rational>, right: Box<Rational> },

    #[error("coefficient index {index} out of range for a series of order {order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("grid interior exhausted: margin ({margin_x}, {margin_y}) on a {nx}x{ny} grid")]
    DomainExhausted {
        margin_x: usize,
        margin_y: usize,
        nx: usize,
        ny: usize,
    },

    #[error("point ({x}, {y}) lies outside the valid interior")]
    OutOfRegion { x: f64, y: f64 },

    #[error("unsupported stencil: derivative order {derivative}, accuracy order {accuracy}")]
    UnsupportedStencil { derivative: u32, accuracy: u32 },

    #[error("invalid PDE specification: {0}")]
    InvalidSpec(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invariant violated: {0}")]
    Invariant(String),
}
