//! Reaction kinetics, homogeneous steady states and linearization.
//!
//! A [`ReactionSystem`] bundles the two reaction rates `f(U, V)`, `g(U, V)`,
//! the two diffusivities `D1(U, V)`, `D2(U, V)` and a homogeneous steady
//! state `(Ū, V̄)`. [`linearize`] produces the Jacobian of the kinetics and
//! the frozen diffusivities at that state, which is all the linear theory
//! needs.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Residual bound `max(|f|, |g|)` accepted as a steady state.
pub const STEADY_STATE_TOL: f64 = 1e-12;
/// Newton iteration cap in [`find_steady_state`].
pub const NEWTON_MAX_ITER: usize = 100;
/// Relative agreement required between analytic and numeric partials.
pub const DERIVATIVE_REL_TOL: f64 = 1e-5;
/// Default validity radius for the perturbation sup-norm.
pub const DEFAULT_ETA: f64 = 0.5;

const MAX_HALVINGS: usize = 40;

pub type RateFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Closed-form partials `[[f_u, f_v], [g_u, g_v]]`.
pub type JacobianFn = Arc<dyn Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticsError {
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Jacobian of the kinetics is singular at ({0}, {1})")]
    SingularJacobian(f64, f64),
    #[error("analytic partial {entry} = {analytic} disagrees with central difference {numeric}")]
    DerivativeMismatch {
        entry: &'static str,
        analytic: f64,
        numeric: f64,
    },
    #[error("({u}, {v}) is not a steady state: max(|f|, |g|) = {residual:e}")]
    NotSteady { u: f64, v: f64, residual: f64 },
    #[error("diffusivities must be positive at the steady state, got D1 = {d1}, D2 = {d2}")]
    NonPositiveDiffusion { d1: f64, d2: f64 },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("model `{model}` has no parameter `{name}`")]
    UnknownParameter { model: String, name: String },
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Closed-form partials, cross-checked against central differences.
    #[default]
    Analytic,
    /// Central differences only.
    Numeric,
}

/// A 2-species reaction-diffusion model around a homogeneous steady state.
///
/// Immutable once built; cloning shares the underlying closures.
#[derive(Clone)]
pub struct ReactionSystem {
    name: String,
    f: RateFn,
    g: RateFn,
    d1: RateFn,
    d2: RateFn,
    jacobian: Option<JacobianFn>,
    derivative_mode: DerivativeMode,
    constant_diffusion: bool,
    steady_state: (f64, f64),
    eta: f64,
}

impl fmt::Debug for ReactionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReactionSystem")
            .field("name", &self.name)
            .field("steady_state", &self.steady_state)
            .field("derivative_mode", &self.derivative_mode)
            .field("constant_diffusion", &self.constant_diffusion)
            .field("eta", &self.eta)
            .finish_non_exhaustive()
    }
}

impl ReactionSystem {
    /// New system with unit constant diffusivities, numeric derivatives and
    /// steady state at the origin. Use the builder methods to refine it.
    pub fn new<F, G>(name: impl Into<String>, f: F, g: G) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            f: Arc::new(f),
            g: Arc::new(g),
            d1: Arc::new(|_, _| 1.0),
            d2: Arc::new(|_, _| 1.0),
            jacobian: None,
            derivative_mode: DerivativeMode::Numeric,
            constant_diffusion: true,
            steady_state: (0.0, 0.0),
            eta: DEFAULT_ETA,
        }
    }

    pub fn with_constant_diffusion(mut self, d1: f64, d2: f64) -> Self {
        self.d1 = Arc::new(move |_, _| d1);
        self.d2 = Arc::new(move |_, _| d2);
        self.constant_diffusion = true;
        self
    }

    /// State-dependent diffusivities `D1(U, V)`, `D2(U, V)`.
    pub fn with_diffusion<A, B>(mut self, d1: A, d2: B) -> Self
    where
        A: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.d1 = Arc::new(d1);
        self.d2 = Arc::new(d2);
        self.constant_diffusion = false;
        self
    }

    /// Supplies closed-form partials and switches to analytic mode.
    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self.derivative_mode = DerivativeMode::Analytic;
        self
    }

    /// Selects the derivative mode. Analytic mode without closed-form
    /// partials falls back to numeric.
    pub fn with_derivative_mode(mut self, mode: DerivativeMode) -> Self {
        self.derivative_mode = match mode {
            DerivativeMode::Analytic if self.jacobian.is_some() => DerivativeMode::Analytic,
            _ => DerivativeMode::Numeric,
        };
        self
    }

    /// Sets the steady state without checking it; see [`Self::validate`].
    pub fn with_steady_state(mut self, u: f64, v: f64) -> Self {
        self.steady_state = (u, v);
        self
    }

    /// Runs [`find_steady_state`] from `guess` and stores the root.
    pub fn locate_steady_state(self, guess: (f64, f64)) -> Result<Self, KineticsError> {
        let root = find_steady_state(&self, guess)?;
        Ok(self.with_steady_state(root.0, root.1))
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn steady_state(&self) -> (f64, f64) {
        self.steady_state
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.derivative_mode
    }

    /// True when `D1`, `D2` do not depend on the state.
    pub fn has_constant_diffusion(&self) -> bool {
        self.constant_diffusion
    }

    #[inline]
    pub fn f(&self, u: f64, v: f64) -> f64 {
        (self.f)(u, v)
    }

    #[inline]
    pub fn g(&self, u: f64, v: f64) -> f64 {
        (self.g)(u, v)
    }

    #[inline]
    pub fn d1(&self, u: f64, v: f64) -> f64 {
        (self.d1)(u, v)
    }

    #[inline]
    pub fn d2(&self, u: f64, v: f64) -> f64 {
        (self.d2)(u, v)
    }

    /// `max(|f|, |g|)` at `(u, v)`.
    pub fn residual(&self, u: f64, v: f64) -> f64 {
        self.f(u, v).abs().max(self.g(u, v).abs())
    }

    /// Partials of `(f, g)` at `(u, v)` in the configured derivative mode.
    pub fn partials(&self, u: f64, v: f64) -> [[f64; 2]; 2] {
        match (&self.jacobian, self.derivative_mode) {
            (Some(jac), DerivativeMode::Analytic) => jac(u, v),
            _ => numeric_partials(self, u, v),
        }
    }

    /// Checks the steady-state residual and positivity of the diffusivities.
    pub fn validate(&self) -> Result<(), KineticsError> {
        let (u, v) = self.steady_state;
        let residual = self.residual(u, v);
        if !(residual <= STEADY_STATE_TOL) {
            return Err(KineticsError::NotSteady { u, v, residual });
        }
        let (d1, d2) = (self.d1(u, v), self.d2(u, v));
        if !(d1 > 0.0 && d2 > 0.0) {
            return Err(KineticsError::NonPositiveDiffusion { d1, d2 });
        }
        Ok(())
    }
}

/// Jacobian `A` of the kinetics and frozen diffusivities at the steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Linearization {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub d1bar: f64,
    pub d2bar: f64,
}

impl Linearization {
    pub fn new(a: [[f64; 2]; 2], d1bar: f64, d2bar: f64) -> Self {
        Self {
            a11: a[0][0],
            a12: a[0][1],
            a21: a[1][0],
            a22: a[1][1],
            d1bar,
            d2bar,
        }
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    /// `A - k diag(D̄1, D̄2)`, row-major.
    pub fn mode_matrix(&self, k: f64) -> [[f64; 2]; 2] {
        [
            [self.a11 - self.d1bar * k, self.a12],
            [self.a21, self.a22 - self.d2bar * k],
        ]
    }
}

fn diff_step(x: f64) -> f64 {
    1e-6_f64.max(1e-6 * x.abs())
}

fn numeric_partials(sys: &ReactionSystem, u: f64, v: f64) -> [[f64; 2]; 2] {
    let hu = diff_step(u);
    let hv = diff_step(v);
    let du = |func: &dyn Fn(f64, f64) -> f64| (func(u + hu, v) - func(u - hu, v)) / (2.0 * hu);
    let dv = |func: &dyn Fn(f64, f64) -> f64| (func(u, v + hv) - func(u, v - hv)) / (2.0 * hv);
    let f = |a, b| sys.f(a, b);
    let g = |a, b| sys.g(a, b);
    [[du(&f), dv(&f)], [du(&g), dv(&g)]]
}

/// Damped Newton iteration on `(f, g) = 0` starting from `guess`.
///
/// Full Newton steps are halved until the residual decreases. Where the
/// Jacobian is numerically singular the step falls back to a regularized
/// least-squares direction; if that direction vanishes while the residual
/// does not, the iteration stalls and reports `NoConvergence`.
pub fn find_steady_state(
    system: &ReactionSystem,
    guess: (f64, f64),
) -> Result<(f64, f64), KineticsError> {
    if !(guess.0.is_finite() && guess.1.is_finite()) {
        return Err(KineticsError::InvalidParameter {
            name: "guess".into(),
            reason: "steady-state guess must be finite".into(),
        });
    }
    let (mut u, mut v) = guess;
    let merit = |u: f64, v: f64| {
        let (f, g) = (system.f(u, v), system.g(u, v));
        f * f + g * g
    };
    for iter in 0..NEWTON_MAX_ITER {
        let (f, g) = (system.f(u, v), system.g(u, v));
        let residual = f.abs().max(g.abs());
        if residual <= STEADY_STATE_TOL {
            return Ok((u, v));
        }
        if !residual.is_finite() {
            return Err(KineticsError::NoConvergence {
                iterations: iter,
                residual,
            });
        }
        let j = system.partials(u, v);
        let flat = [j[0][0], j[0][1], j[1][0], j[1][1]];
        if flat.iter().any(|x| !x.is_finite()) || flat.iter().all(|&x| x == 0.0) {
            return Err(KineticsError::SingularJacobian(u, v));
        }
        let scale = flat.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let (su, sv) = if det.abs() > 1e-14 * scale * scale {
            (
                -(j[1][1] * f - j[0][1] * g) / det,
                -(-j[1][0] * f + j[0][0] * g) / det,
            )
        } else {
            // (JᵀJ + μI) s = -Jᵀ F
            let mu = 1e-8 * scale * scale;
            let jtj = [
                [j[0][0] * j[0][0] + j[1][0] * j[1][0] + mu, j[0][0] * j[0][1] + j[1][0] * j[1][1]],
                [j[0][1] * j[0][0] + j[1][1] * j[1][0], j[0][1] * j[0][1] + j[1][1] * j[1][1] + mu],
            ];
            let rhs = [-(j[0][0] * f + j[1][0] * g), -(j[0][1] * f + j[1][1] * g)];
            let d = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
            (
                (jtj[1][1] * rhs[0] - jtj[0][1] * rhs[1]) / d,
                (-jtj[1][0] * rhs[0] + jtj[0][0] * rhs[1]) / d,
            )
        };
        if !(su.is_finite() && sv.is_finite()) || (su == 0.0 && sv == 0.0) {
            return Err(KineticsError::NoConvergence {
                iterations: iter,
                residual,
            });
        }
        let current = f * f + g * g;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let (nu, nv) = (u + alpha * su, v + alpha * sv);
            if merit(nu, nv) < current {
                u = nu;
                v = nv;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(KineticsError::NoConvergence {
                iterations: iter,
                residual,
            });
        }
    }
    let residual = system.residual(u, v);
    if residual <= STEADY_STATE_TOL {
        Ok((u, v))
    } else {
        Err(KineticsError::NoConvergence {
            iterations: NEWTON_MAX_ITER,
            residual,
        })
    }
}

/// Jacobian and frozen diffusivities at the system's steady state.
///
/// In analytic mode the closed-form partials are returned after a
/// cross-check against central differences.
pub fn linearize(system: &ReactionSystem) -> Result<Linearization, KineticsError> {
    system.validate()?;
    let (u, v) = system.steady_state();
    let numeric = numeric_partials(system, u, v);
    let a = match (&system.jacobian, system.derivative_mode) {
        (Some(jac), DerivativeMode::Analytic) => {
            let analytic = jac(u, v);
            check_partials(&analytic, &numeric)?;
            analytic
        }
        _ => numeric,
    };
    Ok(Linearization::new(a, system.d1(u, v), system.d2(u, v)))
}

fn check_partials(analytic: &[[f64; 2]; 2], numeric: &[[f64; 2]; 2]) -> Result<(), KineticsError> {
    const NAMES: [[&str; 2]; 2] = [["f_u", "f_v"], ["g_u", "g_v"]];
    // entries that vanish analytically are compared against the Jacobian scale
    let scale = analytic
        .iter()
        .flatten()
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    for i in 0..2 {
        for j in 0..2 {
            let (a, n) = (analytic[i][j], numeric[i][j]);
            let reference = a.abs().max(n.abs()).max(scale * 1e-3).max(f64::MIN_POSITIVE);
            if !((a - n).abs() <= DERIVATIVE_REL_TOL * reference) {
                return Err(KineticsError::DerivativeMismatch {
                    entry: NAMES[i][j],
                    analytic: a,
                    numeric: n,
                });
            }
        }
    }
    Ok(())
}

/// Names accepted by [`builtin`].
pub const BUILTIN_MODELS: [&str; 5] = [
    "linear",
    "cubic",
    "schnakenberg",
    "gierer_meinhardt",
    "brusselator",
];

struct Params<'a> {
    model: &'a str,
    given: &'a BTreeMap<String, f64>,
    defaults: &'static [(&'static str, f64)],
}

impl Params<'_> {
    fn check(&self) -> Result<(), KineticsError> {
        for (name, value) in self.given {
            if !self.defaults.iter().any(|(k, _)| k == name) {
                return Err(KineticsError::UnknownParameter {
                    model: self.model.to_string(),
                    name: name.clone(),
                });
            }
            if !value.is_finite() {
                return Err(KineticsError::InvalidParameter {
                    name: name.clone(),
                    reason: "must be finite".into(),
                });
            }
        }
        Ok(())
    }

    fn get(&self, name: &str) -> f64 {
        self.given.get(name).copied().unwrap_or_else(|| {
            self.defaults
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .expect("parameter listed in defaults")
        })
    }
}

const DIFFUSION_DEFAULTS: [(&str, f64); 2] = [("d1_quad", 0.0), ("d2_quad", 0.0)];
const LINEAR_DEFAULTS: &[(&str, f64)] = &[
    ("a11", 1.0),
    ("a12", -2.0),
    ("a21", 3.0),
    ("a22", -4.0),
    ("d1", 0.5),
    ("d2", 20.0),
    DIFFUSION_DEFAULTS[0],
    DIFFUSION_DEFAULTS[1],
];
const CUBIC_DEFAULTS: &[(&str, f64)] = &[
    ("a11", 1.0),
    ("a12", -2.0),
    ("a21", 3.0),
    ("a22", -4.0),
    ("cubic", 1.0),
    ("d1", 0.5),
    ("d2", 20.0),
    DIFFUSION_DEFAULTS[0],
    DIFFUSION_DEFAULTS[1],
];
const SCHNAKENBERG_DEFAULTS: &[(&str, f64)] = &[
    ("a", 0.1),
    ("b", 0.9),
    ("d1", 1.0),
    ("d2", 40.0),
    DIFFUSION_DEFAULTS[0],
    DIFFUSION_DEFAULTS[1],
];
const GIERER_MEINHARDT_DEFAULTS: &[(&str, f64)] = &[
    ("a", 0.1),
    ("b", 1.0),
    ("d1", 0.1),
    ("d2", 10.0),
    DIFFUSION_DEFAULTS[0],
    DIFFUSION_DEFAULTS[1],
];
const BRUSSELATOR_DEFAULTS: &[(&str, f64)] = &[
    ("a", 1.5),
    ("b", 2.5),
    ("d1", 1.0),
    ("d2", 10.0),
    DIFFUSION_DEFAULTS[0],
    DIFFUSION_DEFAULTS[1],
];

/// Parameter names and default values of a built-in model.
pub fn builtin_defaults(name: &str) -> Option<&'static [(&'static str, f64)]> {
    Some(match name {
        "linear" => LINEAR_DEFAULTS,
        "cubic" => CUBIC_DEFAULTS,
        "schnakenberg" => SCHNAKENBERG_DEFAULTS,
        "gierer_meinhardt" => GIERER_MEINHARDT_DEFAULTS,
        "brusselator" => BRUSSELATOR_DEFAULTS,
        _ => return None,
    })
}

/// Default Newton starting point of a built-in model.
pub fn builtin_guess(name: &str, params: &BTreeMap<String, f64>) -> Option<(f64, f64)> {
    let defaults = builtin_defaults(name)?;
    let p = Params {
        model: name,
        given: params,
        defaults,
    };
    Some(match name {
        "linear" | "cubic" => (0.0, 0.0),
        "schnakenberg" => (1.0, 1.0),
        "gierer_meinhardt" => {
            let u = (p.get("a") + 1.0) / p.get("b");
            (u * 1.1, u * u * 0.9)
        }
        "brusselator" => (p.get("a") * 1.1, p.get("b") / p.get("a") * 0.9),
        _ => unreachable!(),
    })
}

/// Builds a built-in model. The steady state is left at the default guess;
/// call [`ReactionSystem::locate_steady_state`] to solve for it.
///
/// Every built-in accepts `d1`, `d2` and the optional `d1_quad`, `d2_quad`,
/// giving `Di(U, V) = di (1 + di_quad U²)`.
///
/// * `linear`: `f = a11 U + a12 V`, `g = a21 U + a22 V`
/// * `cubic`: the linear model with `- cubic U³` added to `f`
/// * `schnakenberg`: `f = a - U + U²V`, `g = b - U²V`
/// * `gierer_meinhardt`: `f = a - bU + U²/V`, `g = U² - V`
/// * `brusselator`: `f = a - (b+1)U + U²V`, `g = bU - U²V`
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<ReactionSystem, KineticsError> {
    let defaults = builtin_defaults(name).ok_or_else(|| KineticsError::UnknownModel(name.into()))?;
    let p = Params {
        model: name,
        given: params,
        defaults,
    };
    p.check()?;
    let system = match name {
        "linear" => {
            let (a11, a12, a21, a22) = (p.get("a11"), p.get("a12"), p.get("a21"), p.get("a22"));
            ReactionSystem::new(
                name,
                move |u, v| a11 * u + a12 * v,
                move |u, v| a21 * u + a22 * v,
            )
            .with_jacobian(move |_, _| [[a11, a12], [a21, a22]])
        }
        "cubic" => {
            let (a11, a12, a21, a22) = (p.get("a11"), p.get("a12"), p.get("a21"), p.get("a22"));
            let c = p.get("cubic");
            ReactionSystem::new(
                name,
                move |u, v| a11 * u + a12 * v - c * u * u * u,
                move |u, v| a21 * u + a22 * v,
            )
            .with_jacobian(move |u, _| [[a11 - 3.0 * c * u * u, a12], [a21, a22]])
        }
        "schnakenberg" => {
            let (a, b) = (p.get("a"), p.get("b"));
            ReactionSystem::new(
                name,
                move |u, v| a - u + u * u * v,
                move |u, v| b - u * u * v,
            )
            .with_jacobian(|u, v| [[-1.0 + 2.0 * u * v, u * u], [-2.0 * u * v, -u * u]])
        }
        "gierer_meinhardt" => {
            let (a, b) = (p.get("a"), p.get("b"));
            if b <= 0.0 {
                return Err(KineticsError::InvalidParameter {
                    name: "b".into(),
                    reason: "must be positive".into(),
                });
            }
            ReactionSystem::new(
                name,
                move |u, v| a - b * u + u * u / v,
                |u, v| u * u - v,
            )
            .with_jacobian(move |u, v| [[-b + 2.0 * u / v, -u * u / (v * v)], [2.0 * u, -1.0]])
        }
        "brusselator" => {
            let (a, b) = (p.get("a"), p.get("b"));
            ReactionSystem::new(
                name,
                move |u, v| a - (b + 1.0) * u + u * u * v,
                move |u, v| b * u - u * u * v,
            )
            .with_jacobian(move |u, v| [[-(b + 1.0) + 2.0 * u * v, u * u], [b - 2.0 * u * v, -u * u]])
        }
        _ => unreachable!(),
    };
    let (d1, d2) = (p.get("d1"), p.get("d2"));
    let (c1, c2) = (p.get("d1_quad"), p.get("d2_quad"));
    let system = if c1 == 0.0 && c2 == 0.0 {
        system.with_constant_diffusion(d1, d2)
    } else {
        system.with_diffusion(move |u, _| d1 * (1.0 + c1 * u * u), move |u, _| d2 * (1.0 + c2 * u * u))
    };
    let guess = builtin_guess(name, params).expect("builtin has a guess");
    Ok(system.with_steady_state(guess.0, guess.1))
}

/// Built-in model with its steady state solved from the default guess.
pub fn builtin_at_steady_state(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<ReactionSystem, KineticsError> {
    let system = builtin(name, params)?;
    let guess = system.steady_state();
    system.locate_steady_state(guess)
}
