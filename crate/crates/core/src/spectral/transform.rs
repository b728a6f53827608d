//! Separable cosine/sine transforms on midpoint grids.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use rustdct::{DctPlanner, TransformType2And3};

use super::{Coefficients, Grid, GridValues};

/// Minimum array size before line batches are spread over the thread pool.
const PAR_THRESHOLD: usize = 1 << 14;

/// One-dimensional transform applied along a single axis.
///
/// Sine arrays are shifted by one: index `k` holds the mode `sin((k+1)x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisOp {
    /// samples → cosine coefficients
    CosAnalysis,
    /// cosine coefficients → samples
    CosSynthesis,
    /// samples → sine coefficients
    SinAnalysis,
    /// sine coefficients → samples
    SinSynthesis,
}

type Plan = Arc<dyn TransformType2And3<f64>>;

/// Planned transforms for lengths `n` and `2n`.
#[derive(Clone)]
pub struct Transform {
    n: usize,
    plans: BTreeMap<usize, Plan>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform")
            .field("n", &self.n)
            .field("lengths", &self.plans.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Transform {
    pub fn new(n: usize) -> Self {
        let mut planner = DctPlanner::new();
        let plans = [n, 2 * n]
            .into_iter()
            .map(|len| (len, planner.plan_dct2(len)))
            .collect();
        Self { n, plans }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn plan(&self, len: usize) -> &Plan {
        self.plans
            .get(&len)
            .unwrap_or_else(|| panic!("no transform planned for length {len}"))
    }

    /// Applies `ops[axis]` along every axis of a `len^d` array.
    pub fn apply(&self, data: &mut [f64], d: usize, len: usize, ops: &[AxisOp]) {
        debug_assert_eq!(ops.len(), d);
        for (axis, &op) in ops.iter().enumerate() {
            self.apply_axis(data, d, len, axis, op);
        }
    }

    pub fn apply_axis(&self, data: &mut [f64], d: usize, len: usize, axis: usize, op: AxisOp) {
        debug_assert_eq!(data.len(), len.pow(d as u32));
        let plan = self.plan(len);
        let stride = len.pow((d - 1 - axis) as u32);
        if stride == 1 {
            run_lines(plan, data, len, op);
            return;
        }
        let lines = data.len() / len;
        let mut buf = vec![0.0; data.len()];
        for line in 0..lines {
            let base = (line / stride) * stride * len + line % stride;
            for k in 0..len {
                buf[line * len + k] = data[base + k * stride];
            }
        }
        run_lines(plan, &mut buf, len, op);
        for line in 0..lines {
            let base = (line / stride) * stride * len + line % stride;
            for k in 0..len {
                data[base + k * stride] = buf[line * len + k];
            }
        }
    }

    /// Cosine coefficients `w_q = (Π c_{qᵢ}/n) Σⱼ f(xⱼ) e_q(xⱼ)`.
    pub fn analyze(&self, values: &GridValues) -> Coefficients {
        let grid = values.grid();
        let ops = vec![AxisOp::CosAnalysis; grid.dim()];
        let (mut u, mut v) = values.clone().into_parts();
        self.apply(&mut u, grid.dim(), grid.n(), &ops);
        self.apply(&mut v, grid.dim(), grid.n(), &ops);
        Coefficients::from_parts(grid, u, v).expect("lengths preserved")
    }

    /// Samples of `Σ_q w_q e_q` at the grid nodes.
    pub fn synthesize(&self, coeffs: &Coefficients) -> GridValues {
        let grid = coeffs.grid();
        let ops = vec![AxisOp::CosSynthesis; grid.dim()];
        let (mut u, mut v) = coeffs.clone().into_parts();
        self.apply(&mut u, grid.dim(), grid.n(), &ops);
        self.apply(&mut v, grid.dim(), grid.n(), &ops);
        GridValues::from_parts(grid, u, v).expect("lengths preserved")
    }
}

fn run_lines(plan: &Plan, data: &mut [f64], len: usize, op: AxisOp) {
    let scratch_len = plan.get_scratch_len();
    if data.len() >= PAR_THRESHOLD {
        data.par_chunks_mut(len)
            .for_each_init(|| vec![0.0; scratch_len], |scratch, line| process(plan, line, scratch, op));
    } else {
        let mut scratch = vec![0.0; scratch_len];
        for line in data.chunks_mut(len) {
            process(plan, line, &mut scratch, op);
        }
    }
}

fn process(plan: &Plan, line: &mut [f64], scratch: &mut [f64], op: AxisOp) {
    let len = line.len();
    let inv = 1.0 / len as f64;
    match op {
        AxisOp::CosAnalysis => {
            plan.process_dct2_with_scratch(line, scratch);
            line[0] *= inv;
            line[1..].iter_mut().for_each(|x| *x *= 2.0 * inv);
        }
        AxisOp::CosSynthesis => {
            line[0] *= 2.0;
            plan.process_dct3_with_scratch(line, scratch);
        }
        AxisOp::SinAnalysis => {
            plan.process_dst2_with_scratch(line, scratch);
            line[..len - 1].iter_mut().for_each(|x| *x *= 2.0 * inv);
            line[len - 1] *= inv;
        }
        AxisOp::SinSynthesis => {
            line[len - 1] *= 2.0;
            plan.process_dst3_with_scratch(line, scratch);
        }
    }
}

/// Copies a `n^d` array into the low corner of a zeroed `m^d` array.
pub(crate) fn zero_pad(src: &[f64], d: usize, n: usize, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m.pow(d as u32)];
    let small = Grid::new(d, n).expect("valid grid");
    for (flat, &x) in src.iter().enumerate() {
        let idx = small.unravel(flat);
        let target = idx[..d].iter().fold(0, |acc, &i| acc * m + i);
        out[target] = x;
    }
    out
}

/// Keeps the low `n^d` corner of an `m^d` array.
pub(crate) fn truncate(src: &[f64], d: usize, m: usize, n: usize) -> Vec<f64> {
    let small = Grid::new(d, n).expect("valid grid");
    (0..small.len())
        .map(|flat| {
            let idx = small.unravel(flat);
            src[idx[..d].iter().fold(0, |acc, &i| acc * m + i)]
        })
        .collect()
}

/// [`Transform::analyze`] with a freshly planned transform.
pub fn analyze(values: &GridValues) -> Coefficients {
    Transform::new(values.grid().n()).analyze(values)
}

/// [`Transform::synthesize`] with a freshly planned transform.
pub fn synthesize(coeffs: &Coefficients) -> GridValues {
    Transform::new(coeffs.grid().n()).synthesize(coeffs)
}
