//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion.

use std::collections::BTreeMap;
use std::error::Error;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use turing_lab::config::{ProfileKind, RunConfig};
use turing_lab::kinetics::{builtin_at_steady_state, linearize, Linearization, ReactionSystem};
use turing_lab::linear_analysis::{
    dispersion_eigen, growing_mode_summary, has_turing_instability, rest_state_stable, ModeClass, ModeIndex,
};
use turing_lab::simulator::{evenness_check, Mode, Scheme, SimulationConfig, Simulator};
use turing_lab::spectral::{eigen_decompose, linear_propagate, Coefficients, Grid, ModeSpectrum, SpectralField, Transform};
use turing_lab::verification::{
    bootstrap_constant_c2, growth_bound_fit, random_profile, run_theorem_experiment, scaling_study,
    transient_constant, verdict_line, DeviationReport, ExperimentSpec, GrowthFit, RATIO_SPREAD_MAX,
};

type Outcome = Result<(bool, String), Box<dyn Error>>;

const DISPERSION_TOL: f64 = 1e-10;
const LAMBDA_MAX: f64 = 0.252604;
const NU_D1: f64 = 1.252604;
const BENCHMARK_TOL: f64 = 1e-5;
const PROPAGATOR_REL_TOL: f64 = 1e-6;
const MIN_ORDER: f64 = 1.9;
const GROWTH_STABILITY: f64 = 0.01;
const TRANSIENT_SLACK: f64 = 1e-6;
const ROUND_TRIP_TOL: f64 = 1e-12;
const PARSEVAL_TOL: f64 = 1e-10;
const FIXED_POINT_TOL: f64 = 1e-14;
const MASS_TOL: f64 = 1e-12;
const EVENNESS_TOL: f64 = 1e-11;
const C2_EXPECTED: f64 = 5.6953;
const C2_TOL: f64 = 1e-4;

fn benchmark() -> Linearization {
    Linearization::new([[1.0, -2.0], [3.0, -4.0]], 0.5, 20.0)
}

fn dense_eigen(m: [[f64; 2]; 2]) -> (f64, f64, f64) {
    let ev = Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]).complex_eigenvalues();
    let (a, b) = (ev[0].re, ev[1].re);
    (a.max(b), a.min(b), ev[0].im.abs())
}

/// System with an exact double root at `k0`, built from dyadic rationals.
fn defective_system(rng: &mut ChaCha8Rng) -> (Linearization, f64, f64) {
    loop {
        let k0 = rng.random_range(0..=50) as f64;
        let d1 = rng.random_range(1..=16) as f64 / 8.0;
        let d2 = rng.random_range(1..=16) as f64 / 8.0;
        let s = rng.random_range(-8..=8) as f64 / 4.0;
        let m22 = rng.random_range(-24..=24) as f64 / 8.0;
        let m11 = m22 + 2.0 * s;
        let m12 = if rng.random_bool(0.5) { 1.0 } else { -1.0 } * 2f64.powi(rng.random_range(-2..=2));
        let m21 = -s * s / m12;
        let lin = Linearization::new([[m11 + d1 * k0, m12], [m21, m22 + d2 * k0]], d1, d2);
        if rest_state_stable(&lin) {
            return (lin, k0, 0.5 * (m11 + m22));
        }
    }
}

fn random_system(rng: &mut ChaCha8Rng) -> Linearization {
    loop {
        let mut x = || rng.random_range(-3.0..3.0);
        let a = [[x(), x()], [x(), x()]];
        let lin = Linearization::new(a, rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
        if rest_state_stable(&lin) && lin.a12.abs() > 1e-3 {
            return lin;
        }
    }
}

fn dispersion_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst = 0.0f64;
    let mut counts = [0usize; 3];
    let mut tally = |c: ModeClass| {
        counts[match c {
            ModeClass::Generic => 0,
            ModeClass::Defective => 1,
            ModeClass::Complex => 2,
        }] += 1
    };
    for i in 0..1000 {
        let (lin, special) = if i % 4 == 0 {
            let (lin, k0, root) = defective_system(&mut rng);
            (lin, Some((k0, root)))
        } else {
            (random_system(&mut rng), None)
        };
        let mut ks: Vec<f64> = (0..=50).map(f64::from).collect();
        if special.is_none() {
            ks.extend((0..20).map(|_| rng.random_range(0.0..50.0)));
        }
        for k in ks {
            let e = dispersion_eigen(&lin, k)?;
            tally(e.class());
            let (plus, minus, im) = match special {
                Some((k0, root)) if k == k0 => (root, root, 0.0),
                _ => dense_eigen(lin.mode_matrix(k)),
            };
            worst = worst
                .max((e.re_plus() - plus).abs())
                .max((e.re_minus() - minus).abs())
                .max((e.im() - im).abs());
        }
    }
    let all_classes = counts.iter().all(|&c| c > 0);
    Ok((
        worst <= DISPERSION_TOL && all_classes,
        format!(
            "1000 systems, max |error| = {worst:.2e} (tol {DISPERSION_TOL:e}); generic/defective/complex = {}/{}/{}",
            counts[0], counts[1], counts[2]
        ),
    ))
}

fn benchmark_analysis() -> Outcome {
    let lin = benchmark();
    let w = has_turing_instability(&lin, 1)?;
    let s1 = growing_mode_summary(&lin, 1)?;
    let s2 = growing_mode_summary(&lin, 2)?;
    let omega1 = vec![ModeIndex::new(vec![1])?];
    let omega2 = vec![ModeIndex::new(vec![0, 1])?, ModeIndex::new(vec![1, 0])?];
    let pass = w.unstable
        && w.witness == vec![1]
        && (s1.lambda_max - LAMBDA_MAX).abs() <= BENCHMARK_TOL
        && (s2.lambda_max - LAMBDA_MAX).abs() <= BENCHMARK_TOL
        && s1.omega_max == omega1
        && s2.omega_max == omega2
        && (s1.nu - NU_D1).abs() <= BENCHMARK_TOL;
    let show = |v: &[ModeIndex]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
    Ok((
        pass,
        format!(
            "witness {:?}, lambda_max = {:.6}, Omega_max d=1 {{{}}}, d=2 {{{}}}, nu(d=1) = {:.6}",
            w.witness,
            s1.lambda_max,
            show(&s1.omega_max),
            show(&s2.omega_max),
            s1.nu
        ),
    ))
}

fn propagator_consistency() -> Outcome {
    let sys = builtin_at_steady_state("cubic", &BTreeMap::new())?;
    let lin = linearize(&sys)?;
    let grid = Grid::new(1, 64)?;
    let w0 = small_field(grid, 4, 3, 0.1)?;
    let spectrum = ModeSpectrum::for_grid(lin, grid)?;
    let exact = linear_propagate(&eigen_decompose(w0.coeffs(), &spectrum)?, &spectrum, 5.0);
    let rel_error = |dt: f64| -> Result<f64, Box<dyn Error>> {
        let cfg = SimulationConfig::new(grid, dt, 5.0)
            .with_scheme(Scheme::ImexCnAb2)
            .with_mode(Mode::LinearOnly)
            .with_stride(usize::MAX);
        let traj = Simulator::new(&sys, &lin, &cfg)?.run(&w0)?;
        Ok(traj.last().field.coeffs().sub(&exact)?.l2_norm() / exact.l2_norm())
    };
    let errs = [rel_error(4e-3)?, rel_error(2e-3)?, rel_error(1e-3)?];
    let orders = [(errs[0] / errs[1]).log2(), (errs[1] / errs[2]).log2()];
    let order = orders[0].min(orders[1]);
    Ok((
        errs[2] <= PROPAGATOR_REL_TOL && order >= MIN_ORDER,
        format!(
            "relative L2 error at dt = 1e-3: {:.3e} (tol {PROPAGATOR_REL_TOL:e}); orders {:.3}, {:.3} (min {MIN_ORDER})",
            errs[2], orders[0], orders[1]
        ),
    ))
}

fn growth_bound() -> Outcome {
    let lin = benchmark();
    let c100 = growth_bound_fit(&lin, 1, &GrowthFit::new(100, 42))?;
    let c200 = growth_bound_fit(&lin, 1, &GrowthFit::new(200, 42))?;
    let change = (c200 / c100 - 1.0).abs();
    Ok((
        c100.is_finite() && c200.is_finite() && c100 >= 1.0 && change <= GROWTH_STABILITY,
        format!("C1(100) = {c100:.6}, C1(200) = {c200:.6}, relative change {change:.2e} (max {GROWTH_STABILITY})"),
    ))
}

struct TheoremRuns {
    main: DeviationReport,
    linear: DeviationReport,
    pure: DeviationReport,
    c_nu: f64,
}

fn theorem_runs() -> Result<TheoremRuns, Box<dyn Error>> {
    let mut cfg = RunConfig::default();
    cfg.model.name = Some("cubic".into());
    let system = cfg.build_system()?;
    let lin = linearize(&system)?;
    let summary = growing_mode_summary(&lin, 1)?;
    let sim = cfg.experiment_sim_config()?;
    let w_mixed = cfg.profile(ProfileKind::Mixed, Some(&summary))?;
    let w_pure = cfg.profile(ProfileKind::Pure, Some(&summary))?;
    let spec = |w0: SpectralField| ExperimentSpec::new(system.clone(), lin, w0);
    let main = run_theorem_experiment(&spec(w_mixed.clone()), &sim)?;
    let linear = run_theorem_experiment(&spec(w_mixed.clone()), &sim.clone().with_mode(Mode::LinearOnly))?;
    let pure = run_theorem_experiment(&spec(w_pure), &sim)?;
    let times: Vec<f64> = linear.runs.iter().flat_map(|r| r.samples.iter().map(|s| s.t)).collect();
    let c_nu = transient_constant(w_mixed.coeffs(), &lin, &summary, &times)?;
    Ok(TheoremRuns { main, linear, pure, c_nu })
}

fn deviation_scaling(runs: &TheoremRuns) -> Outcome {
    let study = scaling_study(&runs.main)?;
    let excess = runs.linear.transient_excess(runs.c_nu);
    let linear_ok = runs.linear.runs.iter().all(|r| r.completed()) && excess <= 1.0 + TRANSIENT_SLACK;
    let per: Vec<String> = study.per_delta.iter().map(|(d, m)| format!("{d:e}: {m:.5}")).collect();
    Ok((
        study.pass() && linear_ok,
        format!(
            "per-delta max ratio [{}], spread {:.3} (max {RATIO_SPREAD_MAX}); linear-only excess over C e^(-nu t) term {excess:.9}",
            per.join(", "),
            study.spread
        ),
    ))
}

fn nonlinear_instability(runs: &TheoremRuns) -> Outcome {
    let theta = runs.pure.theta;
    let finals: Vec<String> = runs
        .pure
        .runs
        .iter()
        .map(|r| format!("{:e}: {}", r.delta, r.final_l2.map_or("n/a".into(), |x| format!("{x:.5}"))))
        .collect();
    Ok((
        runs.pure.runs.iter().all(|r| r.escaped(theta)),
        format!("||w(T)|| >= theta/2 = {} for [{}]", 0.5 * theta, finals.join(", ")),
    ))
}

fn random_coefficients(grid: Grid, rng: &mut ChaCha8Rng) -> Coefficients {
    let mut c = Coefficients::zeros(grid);
    for f in 0..grid.len() {
        c.set(f, [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
    }
    c
}

fn small_field(grid: Grid, band: usize, seed: u64, amplitude: f64) -> Result<SpectralField, Box<dyn Error>> {
    let w = random_profile(grid, band, seed)?;
    Ok(SpectralField::from_coeffs(w.coeffs().scaled(amplitude), &Transform::new(grid.n())))
}

fn structural_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut round_trip, mut parseval) = (0.0f64, 0.0f64);
    for (d, n) in [(1, 64), (2, 32), (3, 16)] {
        let grid = Grid::new(d, n)?;
        let t = Transform::new(n);
        for _ in 0..5 {
            let c = random_coefficients(grid, &mut rng);
            let values = t.synthesize(&c);
            let back = t.analyze(&values);
            for (a, b) in back.u().iter().chain(back.v()).zip(c.u().iter().chain(c.v())) {
                round_trip = round_trip.max((a - b).abs());
            }
            let spectral = c.l2_norm();
            parseval = parseval.max((values.quadrature_l2() - spectral).abs() / spectral);
        }
    }

    let mut fixed = 0.0f64;
    for name in ["cubic", "brusselator"] {
        let sys = builtin_at_steady_state(name, &BTreeMap::new())?;
        let lin = linearize(&sys)?;
        let grid = Grid::new(1, 64)?;
        let cfg = SimulationConfig::new(grid, 0.01, 100.0).with_stride(usize::MAX);
        let traj = Simulator::new(&sys, &lin, &cfg)?.run(&SpectralField::zeros(grid))?;
        fixed = fixed.max(traj.last().field.max_abs());
    }

    let diffusion = ReactionSystem::new("diffusion", |_, _| 0.0, |_, _| 0.0)
        .with_diffusion(|u, _| 0.5 * (1.0 + u * u), |_, v| 2.0 * (1.0 + 0.5 * v * v));
    let lin = linearize(&diffusion)?;
    let grid = Grid::new(1, 64)?;
    let w0 = small_field(grid, 8, 1, 0.2)?;
    let cfg = SimulationConfig::new(grid, 1e-4, 0.1).with_stride(usize::MAX);
    let traj = Simulator::new(&diffusion, &lin, &cfg)?.run(&w0)?;
    let (before, after) = (w0.values().means(), traj.last().field.values().means());
    let mass = (before[0] - after[0]).abs().max((before[1] - after[1]).abs());

    let sys = builtin_at_steady_state("cubic", &BTreeMap::new())?;
    let lin = linearize(&sys)?;
    let grid = Grid::new(2, 32)?;
    let w0 = small_field(grid, 6, 2, 0.1)?;
    let cfg = SimulationConfig::new(grid, 0.01, 10.0).with_stride(usize::MAX);
    let mut sim = Simulator::new(&sys, &lin, &cfg)?;
    let steps = sim.steps();
    let traj = sim.run(&w0)?;
    let evenness = evenness_check(&traj.last().field, sim.transform());

    let pass = round_trip <= ROUND_TRIP_TOL
        && parseval <= PARSEVAL_TOL
        && fixed <= FIXED_POINT_TOL
        && traj.completed()
        && mass <= MASS_TOL
        && evenness <= EVENNESS_TOL;
    Ok((
        pass,
        format!(
            "round trip {round_trip:.1e}, Parseval {parseval:.1e}, fixed point after 1e4 steps {fixed:.1e}, \
             mass drift {mass:.1e}, evenness after {steps} steps {evenness:.1e}"
        ),
    ))
}

fn c2_diagnostic() -> Outcome {
    let c2 = bootstrap_constant_c2(&benchmark())?;
    Ok(((c2 - C2_EXPECTED).abs() <= C2_TOL, format!("C2 = {c2:.6} (expected {C2_EXPECTED} +- {C2_TOL})")))
}

fn report(index: usize, name: &str, budget: Option<f64>, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = run();
    let secs = start.elapsed().as_secs_f64();
    let in_time = budget.is_none_or(|b| secs <= b);
    let timing = match budget {
        Some(b) => format!(" [{secs:.2} s, budget {b} s]"),
        None => String::new(),
    };
    let (pass, detail) = match outcome {
        Ok((pass, detail)) => (pass && in_time, detail + &timing),
        Err(e) => (false, format!("error: {e}{timing}")),
    };
    println!("{}", verdict_line(&format!("{index}. {name}"), pass, &detail));
    pass
}

fn main() -> ExitCode {
    let mut passed = vec![
        report(1, "dispersion oracle equivalence", Some(5.0), dispersion_oracle),
        report(2, "benchmark linear analysis", Some(1.0), benchmark_analysis),
        report(3, "linear propagator consistency", Some(30.0), propagator_consistency),
        report(4, "growth bound constant", Some(10.0), growth_bound),
    ];

    let start = Instant::now();
    let runs = theorem_runs();
    let secs = start.elapsed().as_secs_f64();
    let runs = &runs;
    let shared = |f: fn(&TheoremRuns) -> Outcome| {
        move || match runs {
            Ok(r) => f(r).map(|(p, d)| (p && secs <= 600.0, format!("{d} [shared sweep {secs:.2} s, budget 600 s]"))),
            Err(e) => Err(e.to_string().into()),
        }
    };
    passed.push(report(5, "deviation scaling", None, shared(deviation_scaling)));
    passed.push(report(6, "nonlinear instability", None, shared(nonlinear_instability)));

    passed.push(report(7, "structural invariants", Some(60.0), structural_invariants));
    passed.push(report(8, "C2 diagnostic", None, c2_diagnostic));

    let n = passed.iter().filter(|&&p| p).count();
    println!("acceptance: {n}/{} criteria passed", passed.len());
    if n == passed.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
