//! Time integration of the full perturbation system
//!
//! ```text
//! ∂w/∂t = ∇·(D(W̄ + w)∇w) + F(W̄ + w) = L(w) + N(w),   L(w) = D̄∇²w + A w
//! ```
//!
//! in cosine-coefficient space. `L` is diagonal in `q` up to a 2×2 block
//! and is handled per mode; `N` is evaluated pseudospectrally on a padded
//! grid.

mod evenness;
mod nonlinear;
mod schemes;

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csv::{self, Cell};
use crate::kinetics::{Linearization, ReactionSystem};
use crate::linear_analysis::growing_mode_summary;
use crate::spectral::{Coefficients, Grid, SpectralError, SpectralField, Transform};

pub use evenness::{evenness_check, ExtendedField};
pub use nonlinear::upsample;

use nonlinear::Remainder;
use schemes::{mat_vec, Kernel, Mat2};

/// Fraction of `‖w‖²` in the top third of the band that triggers a warning.
pub const BLOCKING_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Crank–Nicolson on `L`, second-order Adams–Bashforth on `N`.
    #[default]
    ImexCnAb2,
    ExplicitRk4,
    /// Exponential integrator: exact `e^{Lh}`, second-order in `N`.
    Etd2,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::ImexCnAb2 => "imex_cn_ab2",
            Scheme::ExplicitRk4 => "explicit_rk4",
            Scheme::Etd2 => "etd2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Nonlinear,
    /// `N ≡ 0`: evolves by `L` alone.
    LinearOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub mode: Mode,
    pub snapshot_stride: usize,
    pub dealias: bool,
}

impl SimulationConfig {
    /// Default scheme and mode, every step snapshotted, dealiasing on.
    pub fn new(grid: Grid, dt: f64, t_end: f64) -> Self {
        Self {
            grid,
            dt,
            t_end,
            scheme: Scheme::default(),
            mode: Mode::default(),
            snapshot_stride: 1,
            dealias: true,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(SimError::InvalidConfig(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.snapshot_stride == 0 {
            return Err(SimError::InvalidConfig("snapshot_stride must be >= 1".into()));
        }
        Ok(())
    }

    /// `ceil(t_end / dt)` steps of equal length ending exactly at `t_end`.
    pub fn step_count(&self) -> usize {
        if self.t_end == 0.0 {
            0
        } else {
            ((self.t_end / self.dt - 1e-9).ceil() as usize).max(1)
        }
    }
}

/// Conditions that end a run early.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Halt {
    ValidityExceeded { t: f64, max_abs: f64, eta: f64 },
    NonFinite { t: f64 },
}

impl fmt::Display for Halt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Halt::ValidityExceeded { t, max_abs, eta } => {
                write!(f, "validity radius exceeded at t = {t}: max |w| = {max_abs} > eta = {eta}")
            }
            Halt::NonFinite { t } => write!(f, "non-finite state at t = {t}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("time step {dt} exceeds the stability limit {dt_max}")]
    StepTooLarge { dt: f64, dt_max: f64 },
    #[error("validity radius exceeded at t = {t}: max |w| = {max_abs} > eta = {eta}")]
    ValidityExceeded { t: f64, max_abs: f64, eta: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl From<Halt> for SimError {
    fn from(h: Halt) -> Self {
        match h {
            Halt::ValidityExceeded { t, max_abs, eta } => SimError::ValidityExceeded { t, max_abs, eta },
            Halt::NonFinite { t } => SimError::NonFinite { t },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub field: SpectralField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub t: f64,
    pub l2: f64,
    pub h2: f64,
    pub max_abs: f64,
    /// L² norm of the maximal-growth modes, when those are defined.
    pub dominant: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<Diagnostic>,
    pub halt: Option<Halt>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a trajectory holds the initial state")
    }

    pub fn completed(&self) -> bool {
        self.halt.is_none()
    }

    /// Columns `t,l2,h2,max_abs,dominant_amplitude`.
    pub fn write_diagnostics_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        csv::write_header(out, &["t", "l2", "h2", "max_abs", "dominant_amplitude"])?;
        for d in &self.diagnostics {
            csv::write_row(
                out,
                &[d.t.into(), d.l2.into(), d.h2.into(), d.max_abs.into(), Cell::from(d.dominant)],
            )?;
        }
        Ok(())
    }
}

/// A configured integrator. Keeps the multistep history between calls.
pub struct Simulator<'a> {
    system: &'a ReactionSystem,
    lin: Linearization,
    cfg: SimulationConfig,
    transform: Transform,
    q2: Vec<usize>,
    h: f64,
    steps: usize,
    kernel: Kernel,
    prev: Option<Coefficients>,
    dominant: Option<Vec<usize>>,
}

impl<'a> Simulator<'a> {
    pub fn new(system: &'a ReactionSystem, lin: &Linearization, cfg: &SimulationConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let steps = cfg.step_count();
        let h = if steps == 0 { cfg.dt } else { cfg.t_end / steps as f64 };
        Ok(Self::with_step(system, lin, cfg, h, steps))
    }

    fn with_step(system: &'a ReactionSystem, lin: &Linearization, cfg: &SimulationConfig, h: f64, steps: usize) -> Self {
        let grid = cfg.grid;
        let max_q2 = grid.max_q2();
        let kernel = match cfg.scheme {
            Scheme::ImexCnAb2 => Kernel::imex(lin, max_q2, h),
            Scheme::Etd2 => Kernel::etd2(lin, max_q2, h),
            Scheme::ExplicitRk4 => Kernel::rk4(lin, max_q2),
        };
        let dominant = growing_mode_summary(lin, grid.dim()).ok().map(|s| {
            s.omega_max
                .iter()
                .filter(|q| q.components().iter().all(|&c| c < grid.n()))
                .map(|q| grid.ravel(q.components()))
                .collect()
        });
        Self {
            system,
            lin: *lin,
            cfg: cfg.clone(),
            transform: Transform::new(grid.n()),
            q2: (0..grid.len()).map(|i| grid.q2(i)).collect(),
            h,
            steps,
            kernel,
            prev: None,
            dominant,
        }
    }

    /// Effective step length `t_end / steps`.
    pub fn dt(&self) -> f64 {
        self.h
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    /// Forgets the multistep history; the next step is a starter step.
    pub fn reset(&mut self) {
        self.prev = None;
    }

    fn remainder_op(&self) -> Remainder<'_> {
        let n = self.cfg.grid.n();
        Remainder {
            system: self.system,
            lin: self.lin,
            transform: &self.transform,
            grid: self.cfg.grid,
            m: if self.cfg.dealias { 2 * n } else { n },
        }
    }

    /// `N(w)`; identically zero in linear-only mode.
    pub fn remainder(&self, w: &Coefficients) -> Coefficients {
        match self.cfg.mode {
            Mode::LinearOnly => Coefficients::zeros(w.grid()),
            Mode::Nonlinear => self.remainder_op().evaluate(w),
        }
    }

    /// Stability limit `0.5 / |λ_stiff|` at state `w`. The stiff rate is the
    /// explicit remainder's (diffusion excess times the top wavenumber plus
    /// the kinetic Jacobian excess), and for the explicit scheme also the
    /// fastest rate of `L` over the band.
    pub fn dt_max(&self, w: &Coefficients) -> f64 {
        let grid = self.cfg.grid;
        let q2max = grid.max_q2() as f64;
        let mut stiff = 0.0f64;
        if self.cfg.mode == Mode::Nonlinear {
            let (u, v) = self.remainder_op().fine_values(w);
            let (ubar, vbar) = self.system.steady_state();
            let a = [[self.lin.a11, self.lin.a12], [self.lin.a21, self.lin.a22]];
            for (&x, &y) in u.iter().zip(&v) {
                let (uu, vv) = (ubar + x, vbar + y);
                let diff = if self.system.has_constant_diffusion() {
                    0.0
                } else {
                    (self.system.d1(uu, vv) - self.lin.d1bar)
                        .abs()
                        .max((self.system.d2(uu, vv) - self.lin.d2bar).abs())
                };
                let j = self.system.partials(uu, vv);
                let jac = (0..2)
                    .map(|r| (j[r][0] - a[r][0]).abs() + (j[r][1] - a[r][1]).abs())
                    .fold(0.0, f64::max);
                stiff = stiff.max(diff * q2max + jac);
            }
        }
        if self.cfg.scheme == Scheme::ExplicitRk4 {
            let fastest = (0..=grid.max_q2())
                .map(|k| spectral_radius(&self.lin.mode_matrix(k as f64)))
                .fold(0.0, f64::max);
            stiff += fastest;
        }
        if stiff > 0.0 {
            0.5 / stiff
        } else {
            f64::INFINITY
        }
    }

    fn apply(&self, mats: &[Mat2], w: &Coefficients, out: &mut Coefficients, weight: f64) {
        let (ou, ov) = out.components_mut();
        for (flat, &k) in self.q2.iter().enumerate() {
            let x = [w.u()[flat], w.v()[flat]];
            if x == [0.0, 0.0] {
                continue;
            }
            let y = mat_vec(&mats[k], x);
            ou[flat] += weight * y[0];
            ov[flat] += weight * y[1];
        }
    }

    fn rhs(&self, w: &Coefficients, m: &[Mat2]) -> Coefficients {
        let mut out = self.remainder(w);
        self.apply(m, w, &mut out, 1.0);
        out
    }

    fn advance(&mut self, w: &Coefficients) -> Coefficients {
        let grid = w.grid();
        let mut out = Coefficients::zeros(grid);
        match &self.kernel {
            Kernel::Imex { p, q } => {
                self.apply(p, w, &mut out, 1.0);
                if self.cfg.mode == Mode::Nonlinear {
                    let nn = self.remainder(w);
                    let forcing = match &self.prev {
                        None => nn.clone(),
                        Some(prev) => {
                            let mut f = nn.scaled(1.5);
                            f.axpy(-0.5, prev).expect("same grid");
                            f
                        }
                    };
                    self.apply(q, &forcing, &mut out, 1.0);
                    self.prev = Some(nn);
                }
            }
            Kernel::Etd2 { e, f1, f2 } => {
                self.apply(e, w, &mut out, 1.0);
                if self.cfg.mode == Mode::Nonlinear {
                    let nn = self.remainder(w);
                    self.apply(f1, &nn, &mut out, 1.0);
                    if let Some(prev) = &self.prev {
                        let diff = nn.sub(prev).expect("same grid");
                        self.apply(f2, &diff, &mut out, 1.0);
                    }
                    self.prev = Some(nn);
                }
            }
            Kernel::Rk4 { m } => {
                let h = self.h;
                let k1 = self.rhs(w, m);
                let mut s = w.clone();
                s.axpy(0.5 * h, &k1).expect("same grid");
                let k2 = self.rhs(&s, m);
                let mut s = w.clone();
                s.axpy(0.5 * h, &k2).expect("same grid");
                let k3 = self.rhs(&s, m);
                let mut s = w.clone();
                s.axpy(h, &k3).expect("same grid");
                let k4 = self.rhs(&s, m);
                out = w.clone();
                for (k, c) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
                    out.axpy(h * c / 6.0, k).expect("same grid");
                }
            }
        }
        out
    }

    fn check(&self, state: &SpectralField, t: f64) -> Result<(), Halt> {
        if !state.coeffs().is_finite() || !state.values().is_finite() {
            return Err(Halt::NonFinite { t });
        }
        let max_abs = state.max_abs();
        let eta = self.system.eta();
        if max_abs > eta {
            return Err(Halt::ValidityExceeded { t, max_abs, eta });
        }
        Ok(())
    }

    /// Advances `state` by one step of length [`Self::dt`].
    pub fn step(&mut self, state: &SpectralField) -> Result<SpectralField, SimError> {
        self.check(state, f64::NAN)?;
        let next = self.advance(state.coeffs());
        let next = SpectralField::from_coeffs(next, &self.transform);
        if !next.coeffs().is_finite() || !next.values().is_finite() {
            return Err(SimError::NonFinite { t: f64::NAN });
        }
        Ok(next)
    }

    fn diagnostic(&self, t: f64, field: &SpectralField) -> Diagnostic {
        let dominant = self.dominant.as_ref().map(|flats| {
            let mut part = Coefficients::zeros(field.grid());
            for &f in flats {
                part.set(f, field.coeffs().get(f));
            }
            part.l2_norm()
        });
        Diagnostic {
            t,
            l2: field.l2_norm(),
            h2: field.h2_norm(),
            max_abs: field.max_abs(),
            dominant,
        }
    }

    /// Integrates from `initial` to `t_end`. Validity and finiteness
    /// failures end the run early with `halt` set; the trajectory keeps
    /// every state up to the last acceptable one.
    pub fn run(&mut self, initial: &SpectralField) -> Result<Trajectory, SimError> {
        if initial.grid() != self.cfg.grid {
            return Err(SpectralError::GridMismatch.into());
        }
        let dt_max = self.dt_max(initial.coeffs());
        if self.h > dt_max {
            return Err(SimError::StepTooLarge { dt: self.h, dt_max });
        }
        self.reset();
        let cut = (2 * self.cfg.grid.n()).div_ceil(3);
        let mut traj = Trajectory {
            dt: self.h,
            snapshots: vec![Snapshot {
                step: 0,
                t: 0.0,
                field: initial.clone(),
            }],
            diagnostics: vec![self.diagnostic(0.0, initial)],
            halt: None,
            warnings: Vec::new(),
        };
        if let Err(h) = self.check(initial, 0.0) {
            traj.halt = Some(h);
            return Ok(traj);
        }
        let mut state = initial.clone();
        let mut blocked = false;
        for step in 1..=self.steps {
            let t = if step == self.steps { self.cfg.t_end } else { step as f64 * self.h };
            let next = SpectralField::from_coeffs(self.advance(state.coeffs()), &self.transform);
            if let Err(h) = self.check(&next, t) {
                log::warn!("{}: {h}", self.system.name());
                traj.halt = Some(h);
                break;
            }
            traj.diagnostics.push(self.diagnostic(t, &next));
            if step % self.cfg.snapshot_stride == 0 || step == self.steps {
                let frac = next.coeffs().energy_fraction_above(cut);
                if frac > BLOCKING_FRACTION && !blocked {
                    blocked = true;
                    let msg = format!(
                        "possible spectral blocking at t = {t}: {:.2}% of the energy in modes q_i >= {cut}",
                        100.0 * frac
                    );
                    log::warn!("{msg}");
                    traj.warnings.push(msg);
                }
                traj.snapshots.push(Snapshot {
                    step,
                    t,
                    field: next.clone(),
                });
            }
            state = next;
        }
        Ok(traj)
    }
}

fn spectral_radius(m: &Mat2) -> f64 {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = 0.25 * tr * tr - det;
    if disc >= 0.0 {
        (0.5 * tr).abs() + disc.sqrt()
    } else {
        det.abs().sqrt()
    }
}

/// One starter step of length `cfg.dt` from `state`.
pub fn step(
    state: &SpectralField,
    lin: &Linearization,
    system: &ReactionSystem,
    cfg: &SimulationConfig,
) -> Result<SpectralField, SimError> {
    cfg.validate()?;
    Simulator::with_step(system, lin, cfg, cfg.dt, 1).step(state)
}

/// Integrates `initial` to `cfg.t_end`.
pub fn run(
    initial: &SpectralField,
    lin: &Linearization,
    system: &ReactionSystem,
    cfg: &SimulationConfig,
) -> Result<Trajectory, SimError> {
    Simulator::new(system, lin, cfg)?.run(initial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{eigen_decompose, linear_propagate, ModeSpectrum};

    fn benchmark() -> (ReactionSystem, Linearization) {
        let sys = ReactionSystem::new("linear", |u, v| u - 2.0 * v, |u, v| 3.0 * u - 4.0 * v)
            .with_constant_diffusion(0.5, 20.0);
        let lin = Linearization::new([[1.0, -2.0], [3.0, -4.0]], 0.5, 20.0);
        (sys, lin)
    }

    fn single_mode(grid: Grid, q: &[usize], w: [f64; 2]) -> SpectralField {
        let mut c = Coefficients::zeros(grid);
        c.set_mode(q, w);
        SpectralField::from_coeffs(c, &Transform::new(grid.n()))
    }

    #[test]
    fn divergence_term_matches_closed_form() {
        // f = g = 0, D1 = 1 + U²: N_u = ∂x(u² ∂x u) for u = a cos x
        let sys = ReactionSystem::new("pure", |_, _| 0.0, |_, _| 0.0)
            .with_diffusion(|u, _| 1.0 + u * u, |_, _| 1.0);
        let lin = Linearization::new([[0.0; 2]; 2], 1.0, 1.0);
        let grid = Grid::new(1, 16).unwrap();
        let a = 0.3;
        let state = single_mode(grid, &[1], [a, 0.0]);
        let cfg = SimulationConfig::new(grid, 1e-3, 1.0);
        let sim = Simulator::new(&sys, &lin, &cfg).unwrap();
        let n = sim.remainder(state.coeffs());
        let a3 = a * a * a;
        for q in 0..16 {
            let expect = match q {
                1 => -a3 / 4.0,
                3 => -3.0 * a3 / 4.0,
                _ => 0.0,
            };
            assert!((n.mode(&[q])[0] - expect).abs() < 1e-15, "q = {q}");
            assert!(n.mode(&[q])[1].abs() < 1e-15);
        }
    }

    #[test]
    fn reaction_remainder_of_cubic() {
        // f = u - 2v - u³: remainder -u³ for u = a cos x is -a³(3 cos x + cos 3x)/4
        let sys = ReactionSystem::new("cubic", |u, v| u - 2.0 * v - u * u * u, |u, v| 3.0 * u - 4.0 * v)
            .with_constant_diffusion(0.5, 20.0);
        let lin = Linearization::new([[1.0, -2.0], [3.0, -4.0]], 0.5, 20.0);
        let grid = Grid::new(1, 8).unwrap();
        let a = 0.2;
        let state = single_mode(grid, &[1], [a, 0.0]);
        let sim = Simulator::new(&sys, &lin, &SimulationConfig::new(grid, 1e-2, 1.0)).unwrap();
        let n = sim.remainder(state.coeffs());
        assert!((n.mode(&[1])[0] + 0.75 * a * a * a).abs() < 1e-16);
        assert!((n.mode(&[3])[0] + 0.25 * a * a * a).abs() < 1e-16);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let (sys, lin) = benchmark();
        let grid = Grid::new(1, 16).unwrap();
        let out = step(&SpectralField::zeros(grid), &lin, &sys, &SimulationConfig::new(grid, 0.01, 0.01)).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn t_end_zero_keeps_initial_state() {
        let (sys, lin) = benchmark();
        let grid = Grid::new(1, 16).unwrap();
        let init = single_mode(grid, &[1], [1e-3, 0.0]);
        let traj = run(&init, &lin, &sys, &SimulationConfig::new(grid, 0.01, 0.0)).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.snapshots[0].field, init);
    }

    #[test]
    fn etd2_linear_only_is_exact() {
        let (sys, lin) = benchmark();
        let grid = Grid::new(1, 16).unwrap();
        let mut c = Coefficients::zeros(grid);
        c.set_mode(&[0], [1e-3, -2e-3]);
        c.set_mode(&[1], [1e-3, 5e-4]);
        c.set_mode(&[2], [-1e-3, 1e-3]);
        let init = SpectralField::from_coeffs(c.clone(), &Transform::new(16));
        let cfg = SimulationConfig::new(grid, 0.05, 2.0)
            .with_scheme(Scheme::Etd2)
            .with_mode(Mode::LinearOnly);
        let traj = run(&init, &lin, &sys, &cfg).unwrap();
        let spec = ModeSpectrum::for_grid(lin, grid).unwrap();
        let exact = linear_propagate(&eigen_decompose(&c, &spec).unwrap(), &spec, 2.0);
        let err = traj.last().field.coeffs().sub(&exact).unwrap().l2_norm();
        assert!(err <= 1e-13 * exact.l2_norm(), "err = {err}");
    }

    #[test]
    fn validity_radius_halts_run() {
        let (sys, lin) = benchmark();
        let sys = sys.with_eta(1e-3);
        let grid = Grid::new(1, 16).unwrap();
        let init = single_mode(grid, &[1], [9e-4, 9e-4 * 0.1237]);
        let traj = run(&init, &lin, &sys, &SimulationConfig::new(grid, 0.01, 5.0)).unwrap();
        assert!(matches!(traj.halt, Some(Halt::ValidityExceeded { .. })));
        assert!(traj.last().field.max_abs() <= 1e-3);
    }

    #[test]
    fn explicit_scheme_step_limit() {
        let (sys, lin) = benchmark();
        let grid = Grid::new(1, 64).unwrap();
        let cfg = SimulationConfig::new(grid, 1e-3, 1.0).with_scheme(Scheme::ExplicitRk4);
        let err = run(&SpectralField::zeros(grid), &lin, &sys, &cfg).unwrap_err();
        assert!(matches!(err, SimError::StepTooLarge { .. }));
    }

    #[test]
    fn sine_fixture_breaks_evenness() {
        let grid = Grid::new(1, 16).unwrap();
        let t = Transform::new(16);
        let field = single_mode(grid, &[3], [1.0, -0.5]);
        assert!(evenness_check(&field, &t) < 1e-13);
        let mut ext = ExtendedField::from_field(&field, &t);
        ext.add_fn(|x| [0.1 * x[0].sin(), 0.0]);
        assert!(ext.asymmetry() > 0.1);
    }

    #[test]
    fn step_counts() {
        let grid = Grid::new(1, 8).unwrap();
        assert_eq!(SimulationConfig::new(grid, 0.1, 1.0).step_count(), 10);
        assert_eq!(SimulationConfig::new(grid, 0.3, 1.0).step_count(), 4);
        assert_eq!(SimulationConfig::new(grid, 0.1, 0.0).step_count(), 0);
        assert!(SimulationConfig::new(grid, 0.0, 1.0).validate().is_err());
    }
}
