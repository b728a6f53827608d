//! Per-mode eigen-coordinates and the exact linear propagator.

use crate::kinetics::Linearization;
use crate::linear_analysis::{dispersion_eigen, AnalysisError, ModeEigen};

use super::{Coefficients, Grid, SpectralError};

/// Threshold on `|det[b₁, b₂]|` below which a mode basis is rejected.
const BASIS_DET_MIN: f64 = 1e-14;

/// Eigen-structure of every mode block up to a cutoff, indexed by `q²`.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    lin: Linearization,
    entries: Vec<ModeEigen>,
}

impl ModeSpectrum {
    pub fn new(lin: Linearization, max_q2: usize) -> Result<Self, AnalysisError> {
        let entries = (0..=max_q2)
            .map(|k| dispersion_eigen(&lin, k as f64))
            .collect::<Result<_, _>>()?;
        Ok(Self { lin, entries })
    }

    /// Covers every mode representable on `grid`.
    pub fn for_grid(lin: Linearization, grid: Grid) -> Result<Self, AnalysisError> {
        Self::new(lin, grid.max_q2())
    }

    pub fn linearization(&self) -> &Linearization {
        &self.lin
    }

    pub fn max_q2(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn eigen(&self, q2: usize) -> &ModeEigen {
        &self.entries[q2]
    }

    fn check(&self, grid: Grid) -> Result<(), SpectralError> {
        if grid.max_q2() > self.max_q2() {
            return Err(SpectralError::SpectrumTooSmall {
                needed: grid.max_q2(),
                available: self.max_q2(),
            });
        }
        Ok(())
    }

    /// The 2×2 matrix `e^{M(q²) t}`, assembled column by column from the
    /// eigen-coordinate propagator.
    pub fn propagator(&self, q2: usize, t: f64) -> [[f64; 2]; 2] {
        let e = self.eigen(q2);
        let c0 = propagate_mode(e, decompose_mode(e, [1.0, 0.0]).expect("classified basis"), t);
        let c1 = propagate_mode(e, decompose_mode(e, [0.0, 1.0]).expect("classified basis"), t);
        [[c0[0], c1[0]], [c0[1], c1[1]]]
    }
}

/// Coordinates of each coefficient pair in its mode's eigenbasis:
/// `(w⁻, w⁺)`, `(w, w')` or `(w^Re, w^Im)` depending on the class.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCoordinates {
    grid: Grid,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl EigenCoordinates {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn pair(&self, flat: usize) -> [f64; 2] {
        [self.first[flat], self.second[flat]]
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            first: self.first.iter().map(|x| a * x).collect(),
            second: self.second.iter().map(|x| a * x).collect(),
        }
    }
}

fn decompose_mode(e: &ModeEigen, w: [f64; 2]) -> Result<[f64; 2], f64> {
    let (b1, b2) = e.basis();
    let det = b1[0] * b2[1] - b1[1] * b2[0];
    if det.abs() < BASIS_DET_MIN || !det.is_finite() {
        return Err(det);
    }
    Ok([
        (w[0] * b2[1] - w[1] * b2[0]) / det,
        (b1[0] * w[1] - b1[1] * w[0]) / det,
    ])
}

fn combine(a: f64, x: [f64; 2], b: f64, y: [f64; 2]) -> [f64; 2] {
    [a * x[0] + b * y[0], a * x[1] + b * y[1]]
}

fn propagate_mode(e: &ModeEigen, [a, b]: [f64; 2], t: f64) -> [f64; 2] {
    match *e {
        ModeEigen::Generic {
            lambda_minus,
            lambda_plus,
            r_minus,
            r_plus,
        } => combine(
            a * (lambda_minus * t).exp(),
            r_minus,
            b * (lambda_plus * t).exp(),
            r_plus,
        ),
        ModeEigen::Defective { lambda, r, r_prime } => {
            let g = (lambda * t).exp();
            combine(g * (a + b * t), r, g * b, r_prime)
        }
        ModeEigen::Complex { re, im, r_re, r_im } => {
            let g = (re * t).exp();
            let (s, c) = (im * t).sin_cos();
            let x = combine(c, r_re, -s, r_im);
            let y = combine(s, r_re, c, r_im);
            combine(g * a, x, g * b, y)
        }
    }
}

/// Solves each mode's 2×2 system in the basis appropriate to its class.
pub fn eigen_decompose(coeffs: &Coefficients, spectrum: &ModeSpectrum) -> Result<EigenCoordinates, SpectralError> {
    let grid = coeffs.grid();
    spectrum.check(grid)?;
    let mut first = vec![0.0; grid.len()];
    let mut second = vec![0.0; grid.len()];
    for flat in 0..grid.len() {
        let w = coeffs.get(flat);
        if w == [0.0, 0.0] {
            continue;
        }
        let [a, b] = decompose_mode(spectrum.eigen(grid.q2(flat)), w).map_err(|det| {
            SpectralError::DegenerateBasis {
                q: grid.mode_index(flat).to_string(),
                det,
            }
        })?;
        first[flat] = a;
        second[flat] = b;
    }
    Ok(EigenCoordinates { grid, first, second })
}

/// Inverse of [`eigen_decompose`].
pub fn recompose(coords: &EigenCoordinates, spectrum: &ModeSpectrum) -> Coefficients {
    linear_propagate(coords, spectrum, 0.0)
}

/// Coefficients of `e^{Lt} w` from the eigen-coordinates of `w`.
pub fn linear_propagate(coords: &EigenCoordinates, spectrum: &ModeSpectrum, t: f64) -> Coefficients {
    let grid = coords.grid;
    let mut out = Coefficients::zeros(grid);
    for flat in 0..grid.len() {
        let ab = coords.pair(flat);
        if ab == [0.0, 0.0] {
            continue;
        }
        let e = spectrum.eigen(grid.q2(flat));
        out.set(flat, propagate_mode(e, ab, t));
    }
    out
}
