//! Pseudospectral evaluation of the remainder `N(w) = L_full(w) - L(w)`.

use crate::kinetics::{Linearization, ReactionSystem};
use crate::spectral::{AxisOp, Coefficients, Grid, GridValues, Transform};

use crate::spectral::{truncate, zero_pad};

/// Remainder `∇·((D - D̄)∇w) + (F(W̄ + w) - A w)` in coefficient space.
///
/// Products are formed on a grid of `m` points per axis (`m = 2n` when
/// dealiasing) and truncated back to the `n^d` band.
pub(crate) struct Remainder<'a> {
    pub system: &'a ReactionSystem,
    pub lin: Linearization,
    pub transform: &'a Transform,
    pub grid: Grid,
    pub m: usize,
}

impl Remainder<'_> {
    fn ops(&self, sine_axis: Option<usize>, synth: bool) -> Vec<AxisOp> {
        (0..self.grid.dim())
            .map(|axis| match (Some(axis) == sine_axis, synth) {
                (true, true) => AxisOp::SinSynthesis,
                (true, false) => AxisOp::SinAnalysis,
                (false, true) => AxisOp::CosSynthesis,
                (false, false) => AxisOp::CosAnalysis,
            })
            .collect()
    }

    /// Samples of `w` on the fine grid.
    pub fn fine_values(&self, w: &Coefficients) -> (Vec<f64>, Vec<f64>) {
        let (d, n, m) = (self.grid.dim(), self.grid.n(), self.m);
        let ops = self.ops(None, true);
        let mut u = zero_pad(w.u(), d, n, m);
        let mut v = zero_pad(w.v(), d, n, m);
        self.transform.apply(&mut u, d, m, &ops);
        self.transform.apply(&mut v, d, m, &ops);
        (u, v)
    }

    pub fn evaluate(&self, w: &Coefficients) -> Coefficients {
        let (d, n, m) = (self.grid.dim(), self.grid.n(), self.m);
        let (u, v) = self.fine_values(w);
        let (ubar, vbar) = self.system.steady_state();
        let lin = &self.lin;

        let mut ru = Vec::with_capacity(u.len());
        let mut rv = Vec::with_capacity(u.len());
        for (&x, &y) in u.iter().zip(&v) {
            let (uu, vv) = (ubar + x, vbar + y);
            ru.push(self.system.f(uu, vv) - (lin.a11 * x + lin.a12 * y));
            rv.push(self.system.g(uu, vv) - (lin.a21 * x + lin.a22 * y));
        }
        let cos_analysis = self.ops(None, false);
        self.transform.apply(&mut ru, d, m, &cos_analysis);
        self.transform.apply(&mut rv, d, m, &cos_analysis);

        if !self.system.has_constant_diffusion() {
            let excess1: Vec<f64> = u
                .iter()
                .zip(&v)
                .map(|(&x, &y)| self.system.d1(ubar + x, vbar + y) - lin.d1bar)
                .collect();
            let excess2: Vec<f64> = u
                .iter()
                .zip(&v)
                .map(|(&x, &y)| self.system.d2(ubar + x, vbar + y) - lin.d2bar)
                .collect();
            let wu = zero_pad(w.u(), d, n, m);
            let wv = zero_pad(w.v(), d, n, m);
            for axis in 0..d {
                self.add_divergence(&wu, &excess1, axis, &mut ru);
                self.add_divergence(&wv, &excess2, axis, &mut rv);
            }
        }

        let out_u = truncate(&ru, d, m, n);
        let out_v = truncate(&rv, d, m, n);
        Coefficients::from_parts(self.grid, out_u, out_v).expect("band size")
    }

    /// `acc += ∂ᵢ(excess · ∂ᵢ w)` for one component, all in padded layout.
    fn add_divergence(&self, w: &[f64], excess: &[f64], axis: usize, acc: &mut [f64]) {
        let (d, m) = (self.grid.dim(), self.m);
        let fine = Grid::new(d, m).expect("padded grid");
        let stride = m.pow((d - 1 - axis) as u32);

        // ∂ᵢ cos(k x) = -k sin(k x); sine slot k - 1 holds mode k
        let mut grad = vec![0.0; w.len()];
        for (flat, g) in grad.iter_mut().enumerate() {
            let k = fine.unravel(flat)[axis] + 1;
            if k < m {
                *g = -(k as f64) * w[flat + stride];
            }
        }
        self.transform.apply(&mut grad, d, m, &self.ops(Some(axis), true));
        for (g, e) in grad.iter_mut().zip(excess) {
            *g *= e;
        }
        self.transform.apply(&mut grad, d, m, &self.ops(Some(axis), false));
        // ∂ᵢ sin(k x) = k cos(k x)
        for (flat, a) in acc.iter_mut().enumerate() {
            let k = fine.unravel(flat)[axis];
            if k > 0 {
                *a += k as f64 * grad[flat - stride];
            }
        }
    }
}

/// Samples of a coefficient field on a finer grid of `m` points per axis.
pub fn upsample(w: &Coefficients, m: usize, transform: &Transform) -> GridValues {
    let grid = w.grid();
    let (d, n) = (grid.dim(), grid.n());
    let ops = vec![AxisOp::CosSynthesis; d];
    let mut u = zero_pad(w.u(), d, n, m);
    let mut v = zero_pad(w.v(), d, n, m);
    transform.apply(&mut u, d, m, &ops);
    transform.apply(&mut v, d, m, &ops);
    GridValues::from_parts(grid.with_n(m).expect("fine grid"), u, v).expect("lengths")
}
