//! Cosine-basis representation of no-flux fields on `(0, π)^d`.
//!
//! Samples live on the midpoint grid `xⱼ = π(j + ½)/n`, on which the family
//! `e_q(x) = Π cos(qᵢ xᵢ)`, `0 ≤ qᵢ < n`, is discretely orthogonal. All
//! multi-dimensional arrays are row-major with the last axis contiguous;
//! coefficient arrays use the same layout indexed by `q`.

mod modal;
mod transform;
mod turf;

use std::f64::consts::PI;
use std::io::{self, Write};
use std::marker::PhantomData;

use thiserror::Error;

use crate::csv::{self, Cell};
use crate::linear_analysis::ModeIndex;

pub use modal::{eigen_decompose, linear_propagate, recompose, EigenCoordinates, ModeSpectrum};
pub use transform::{analyze, synthesize, AxisOp, Transform};
pub(crate) use transform::{truncate, zero_pad};
pub use turf::{read_snapshot, write_snapshot, TURF_MAGIC, TURF_VERSION};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("grid needs d in 1..=3 and n a power of two >= 4, got d = {d}, n = {n}")]
    InvalidGrid { d: usize, n: usize },
    #[error("array length {found} does not match grid size {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("eigenbasis of mode {q} is degenerate (det = {det:e})")]
    DegenerateBasis { q: String, det: f64 },
    #[error("spectrum covers q² <= {available} but the grid needs {needed}")]
    SpectrumTooSmall { needed: usize, available: usize },
    #[error("snapshot: {0}")]
    BadSnapshot(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Uniform midpoint grid on `(0, π)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    d: usize,
    n: usize,
}

impl Grid {
    pub fn new(d: usize, n: usize) -> Result<Self, SpectralError> {
        if !(1..=3).contains(&d) || n < 4 || !n.is_power_of_two() {
            return Err(SpectralError::InvalidGrid { d, n });
        }
        Ok(Self { d, n })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `π(j + ½)/n`
    pub fn node(&self, j: usize) -> f64 {
        PI * (j as f64 + 0.5) / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Same dimension, `m` points per axis.
    pub fn with_n(&self, m: usize) -> Result<Self, SpectralError> {
        Self::new(self.d, m)
    }

    /// Multi-index of a flat position.
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for axis in (0..self.d).rev() {
            idx[axis] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.d).fold(0, |acc, &i| acc * self.n + i)
    }

    /// `Σ qᵢ²` at a flat coefficient position.
    pub fn q2(&self, flat: usize) -> usize {
        self.unravel(flat)[..self.d].iter().map(|q| q * q).sum()
    }

    pub fn mode_index(&self, flat: usize) -> ModeIndex {
        ModeIndex::new(self.unravel(flat)[..self.d].to_vec()).expect("grid dimension is valid")
    }

    /// Largest `q²` representable, `d (n - 1)²`.
    pub fn max_q2(&self) -> usize {
        self.d * (self.n - 1) * (self.n - 1)
    }

    /// Coordinates of node `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)[..self.d].iter().map(|&j| self.node(j)).collect()
    }
}

/// Parseval weight `Π (π if qᵢ = 0 else π/2)` of a cosine mode.
pub fn mode_weight(q: &[usize]) -> f64 {
    q.iter().map(|&qi| if qi == 0 { PI } else { PI / 2.0 }).product()
}

/// Marker for grid samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Nodal;
/// Marker for cosine coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modal;

/// A two-component array on a grid, either samples or coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<K> {
    grid: Grid,
    u: Vec<f64>,
    v: Vec<f64>,
    _kind: PhantomData<K>,
}

pub type GridValues = Field<Nodal>;
pub type Coefficients = Field<Modal>;

impl<K: Clone> Field<K> {
    pub fn zeros(grid: Grid) -> Self {
        let len = grid.len();
        Self {
            grid,
            u: vec![0.0; len],
            v: vec![0.0; len],
            _kind: PhantomData,
        }
    }

    pub fn from_parts(grid: Grid, u: Vec<f64>, v: Vec<f64>) -> Result<Self, SpectralError> {
        for found in [u.len(), v.len()] {
            if found != grid.len() {
                return Err(SpectralError::LengthMismatch {
                    expected: grid.len(),
                    found,
                });
            }
        }
        Ok(Self {
            grid,
            u,
            v,
            _kind: PhantomData,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn u_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    pub fn v_mut(&mut self) -> &mut [f64] {
        &mut self.v
    }

    pub fn components_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.u, &mut self.v)
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.u, self.v)
    }

    pub fn get(&self, flat: usize) -> [f64; 2] {
        [self.u[flat], self.v[flat]]
    }

    pub fn set(&mut self, flat: usize, w: [f64; 2]) {
        self.u[flat] = w[0];
        self.v[flat] = w[1];
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|x| a * x)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            u: self.u.iter().map(|&x| f(x)).collect(),
            v: self.v.iter().map(|&x| f(x)).collect(),
            _kind: PhantomData,
        }
    }

    /// `self += a · other`
    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<(), SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        for (x, y) in self.u.iter_mut().zip(&other.u) {
            *x += a * y;
        }
        for (x, y) in self.v.iter_mut().zip(&other.v) {
            *x += a * y;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SpectralError> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }
}

impl Field<Nodal> {
    /// Samples `f(x)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> [f64; 2]) -> Self {
        let mut out = Self::zeros(grid);
        for flat in 0..grid.len() {
            out.set(flat, f(&grid.point(flat)));
        }
        out
    }

    /// Midpoint quadrature `((π/n)^d Σ (u² + v²))^½`, exact for resolved
    /// cosine fields.
    pub fn quadrature_l2(&self) -> f64 {
        let cell = (PI / self.grid.n as f64).powi(self.grid.d as i32);
        let sum: f64 = self.u.iter().chain(&self.v).map(|x| x * x).sum();
        (cell * sum).sqrt()
    }

    /// Spatial means of `u` and `v`.
    pub fn means(&self) -> [f64; 2] {
        let len = self.u.len() as f64;
        [
            self.u.iter().sum::<f64>() / len,
            self.v.iter().sum::<f64>() / len,
        ]
    }
}

impl Field<Modal> {
    /// Coefficient pair of mode `q`.
    pub fn mode(&self, q: &[usize]) -> [f64; 2] {
        self.get(self.grid.ravel(q))
    }

    pub fn set_mode(&mut self, q: &[usize], w: [f64; 2]) {
        let flat = self.grid.ravel(q);
        self.set(flat, w);
    }

    fn weighted_norm(&self, weight: impl Fn(&[usize], usize) -> f64) -> f64 {
        let d = self.grid.d;
        let sum: f64 = (0..self.grid.len())
            .filter(|&i| self.u[i] != 0.0 || self.v[i] != 0.0)
            .map(|i| {
                let q = self.grid.unravel(i);
                let q2 = self.grid.q2(i);
                weight(&q[..d], q2) * (self.u[i] * self.u[i] + self.v[i] * self.v[i])
            })
            .sum();
        sum.sqrt()
    }

    /// L² norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.weighted_norm(|q, _| mode_weight(q))
    }

    /// H² norm with weight `μ_q (1 + q² + q⁴)`.
    pub fn h2_norm(&self) -> f64 {
        self.weighted_norm(|q, q2| {
            let k = q2 as f64;
            mode_weight(q) * (1.0 + k + k * k)
        })
    }

    /// Fraction of `Σ μ_q |w_q|²` carried by modes with some `qᵢ ≥ cut`.
    pub fn energy_fraction_above(&self, cut: usize) -> f64 {
        let d = self.grid.d;
        let total = self.l2_norm().powi(2);
        if total == 0.0 {
            return 0.0;
        }
        let high: f64 = (0..self.grid.len())
            .filter(|&i| self.grid.unravel(i)[..d].iter().any(|&q| q >= cut))
            .map(|i| {
                let q = self.grid.unravel(i);
                mode_weight(&q[..d]) * (self.u[i] * self.u[i] + self.v[i] * self.v[i])
            })
            .sum();
        high / total
    }

    /// Largest component index carrying a nonzero coefficient.
    pub fn band(&self) -> usize {
        (0..self.grid.len())
            .filter(|&i| self.u[i] != 0.0 || self.v[i] != 0.0)
            .map(|i| self.grid.unravel(i)[..self.grid.d].iter().copied().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Columns: `q1[,q2,q3],u_q,v_q`; every mode, flat order.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let d = self.grid.d;
        let mut names: Vec<String> = (1..=d).map(|i| format!("q{i}")).collect();
        names.extend(["u_q".to_string(), "v_q".to_string()]);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        csv::write_header(out, &refs)?;
        for i in 0..self.grid.len() {
            let q = self.grid.unravel(i);
            let mut row: Vec<Cell> = q[..d].iter().map(|&x| Cell::from(x)).collect();
            row.push(self.u[i].into());
            row.push(self.v[i].into());
            csv::write_row(out, &row)?;
        }
        Ok(())
    }
}

/// A perturbation field held both as samples and as coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    values: GridValues,
    coeffs: Coefficients,
}

impl SpectralField {
    pub fn from_values(values: GridValues, transform: &Transform) -> Self {
        let coeffs = transform.analyze(&values);
        Self { values, coeffs }
    }

    pub fn from_coeffs(coeffs: Coefficients, transform: &Transform) -> Self {
        let values = transform.synthesize(&coeffs);
        Self { values, coeffs }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: GridValues::zeros(grid),
            coeffs: Coefficients::zeros(grid),
        }
    }

    pub fn grid(&self) -> Grid {
        self.coeffs.grid()
    }

    pub fn values(&self) -> &GridValues {
        &self.values
    }

    pub fn coeffs(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Coefficients {
        self.coeffs
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.l2_norm()
    }

    pub fn h2_norm(&self) -> f64 {
        self.coeffs.h2_norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.max_abs()
    }
}
