//! Even extension of a no-flux field to the periodic box.

use crate::spectral::{AxisOp, Coefficients, SpectralField, Transform};

/// Samples on `2n` periodic midpoints per axis, `xⱼ = π(j + ½)/n`, covering
/// `(0, 2π) ≅ (-π, π)`. Reflection `x ↦ -x` maps node `j` to `2n - 1 - j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedField {
    d: usize,
    len: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl ExtendedField {
    /// Evaluates the cosine series on the extended grid. Mode `q` is placed
    /// at index `2q` of a length-`2n` cosine synthesis.
    pub fn from_coeffs(coeffs: &Coefficients, transform: &Transform) -> Self {
        let grid = coeffs.grid();
        let (d, n) = (grid.dim(), grid.n());
        let len = 2 * n;
        let total = len.pow(d as u32);
        let mut u = vec![0.0; total];
        let mut v = vec![0.0; total];
        for flat in 0..grid.len() {
            let idx = grid.unravel(flat);
            let target = idx[..d].iter().fold(0, |acc, &q| acc * len + 2 * q);
            u[target] = coeffs.u()[flat];
            v[target] = coeffs.v()[flat];
        }
        let ops = vec![AxisOp::CosSynthesis; d];
        transform.apply(&mut u, d, len, &ops);
        transform.apply(&mut v, d, len, &ops);
        Self { d, len, u, v }
    }

    pub fn from_field(field: &SpectralField, transform: &Transform) -> Self {
        Self::from_coeffs(field.coeffs(), transform)
    }

    /// Adds `f(x)` at every extended node; used to build non-even fixtures.
    pub fn add_fn(&mut self, f: impl Fn(&[f64]) -> [f64; 2]) {
        let h = std::f64::consts::PI / (self.len / 2) as f64;
        for flat in 0..self.u.len() {
            let x = self.point(flat, h);
            let [a, b] = f(&x);
            self.u[flat] += a;
            self.v[flat] += b;
        }
    }

    fn index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.d];
        let mut rest = flat;
        for axis in (0..self.d).rev() {
            idx[axis] = rest % self.len;
            rest /= self.len;
        }
        idx
    }

    fn point(&self, flat: usize, h: f64) -> Vec<f64> {
        self.index(flat).iter().map(|&j| h * (j as f64 + 0.5)).collect()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// `max |w(x) - w(Rᵢ x)|` over nodes, components and axis reflections.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for axis in 0..self.d {
            let stride = self.len.pow((self.d - 1 - axis) as u32);
            for flat in 0..self.u.len() {
                let j = self.index(flat)[axis];
                let partner = flat - j * stride + (self.len - 1 - j) * stride;
                worst = worst
                    .max((self.u[flat] - self.u[partner]).abs())
                    .max((self.v[flat] - self.v[partner]).abs());
            }
        }
        worst
    }
}

/// Maximum deviation from evenness of `state`'s periodic extension.
pub fn evenness_check(state: &SpectralField, transform: &Transform) -> f64 {
    ExtendedField::from_field(state, transform).asymmetry()
}
