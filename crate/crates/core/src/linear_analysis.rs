//! Dispersion relation, Turing criteria and growing-mode identification.
//!
//! For a cosine mode with wave index `q` the linearized operator acts on the
//! coefficient pair through the 2×2 block `M(q²) = A - q² diag(D̄1, D̄2)`.
//! Its eigenvalues are the two roots of the dispersion quadratic
//!
//! ```text
//! λ² - tr M λ + h(q²) = 0,    h(k) = (a11 - D̄1 k)(a22 - D̄2 k) - a12 a21
//! ```
//!
//! and every mode falls into one of three classes: two distinct real roots
//! (generic), a repeated real root with a Jordan chain (defective), or a
//! complex-conjugate pair.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::kinetics::Linearization;

/// Relative discriminant tolerance separating defective from generic/complex.
pub const DISC_REL_TOL: f64 = 1e-12;
/// Relative tolerance for membership in the maximal-growth set.
pub const LAMBDA_MAX_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("rest state is not stable without diffusion (tr A = {trace}, det A = {det})")]
    NotRestStable { trace: f64, det: f64 },
    #[error("equal diffusivities D̄1 = D̄2 = {0} cannot produce a diffusion-driven instability")]
    EqualDiffusivities(f64),
    #[error("f_v = 0: the eigenvector formula is undefined")]
    ZeroFv,
    #[error("dimension must be 1, 2 or 3, got {0}")]
    InvalidDimension(usize),
    #[error("no admissible wave index lies in the unstable band")]
    NoInstability,
    #[error("wavenumber squared must be a finite non-negative number, got {0}")]
    InvalidWavenumber(f64),
}

/// Multi-index of a cosine mode on `(0, π)^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    q: Vec<usize>,
    q2: usize,
}

impl ModeIndex {
    pub fn new(q: Vec<usize>) -> Result<Self, AnalysisError> {
        if !(1..=3).contains(&q.len()) {
            return Err(AnalysisError::InvalidDimension(q.len()));
        }
        let q2 = q.iter().map(|x| x * x).sum();
        Ok(Self { q, q2 })
    }

    pub fn components(&self) -> &[usize] {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// `Σ qᵢ²`.
    pub fn q2(&self) -> usize {
        self.q2
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, q) in self.q.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeClass {
    Generic,
    Defective,
    Complex,
}

impl ModeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeClass::Generic => "generic",
            ModeClass::Defective => "defective",
            ModeClass::Complex => "complex",
        }
    }
}

/// Eigen-structure of one mode block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeEigen {
    /// `λ₋ < λ₊` with eigenvectors `r± = [1, (λ± - m11)/m12]`.
    Generic {
        lambda_minus: f64,
        lambda_plus: f64,
        r_minus: [f64; 2],
        r_plus: [f64; 2],
    },
    /// Repeated root `λ`, eigenvector `r` and chain vector `r'` with
    /// `(M - λI) r' = r`.
    Defective {
        lambda: f64,
        r: [f64; 2],
        r_prime: [f64; 2],
    },
    /// `λ± = re ± i im` (`im > 0`), `r₊ = r_re + i r_im`.
    Complex {
        re: f64,
        im: f64,
        r_re: [f64; 2],
        r_im: [f64; 2],
    },
}

impl ModeEigen {
    pub fn class(&self) -> ModeClass {
        match self {
            ModeEigen::Generic { .. } => ModeClass::Generic,
            ModeEigen::Defective { .. } => ModeClass::Defective,
            ModeEigen::Complex { .. } => ModeClass::Complex,
        }
    }

    /// Real part of the larger root.
    pub fn re_plus(&self) -> f64 {
        match *self {
            ModeEigen::Generic { lambda_plus, .. } => lambda_plus,
            ModeEigen::Defective { lambda, .. } => lambda,
            ModeEigen::Complex { re, .. } => re,
        }
    }

    pub fn re_minus(&self) -> f64 {
        match *self {
            ModeEigen::Generic { lambda_minus, .. } => lambda_minus,
            ModeEigen::Defective { lambda, .. } => lambda,
            ModeEigen::Complex { re, .. } => re,
        }
    }

    /// Non-negative imaginary part (zero for real classes).
    pub fn im(&self) -> f64 {
        match *self {
            ModeEigen::Complex { im, .. } => im,
            _ => 0.0,
        }
    }

    /// The two real basis vectors used for the eigen-coordinate expansion:
    /// `(r₋, r₊)`, `(r, r')` or `(Re r, Im r)`.
    pub fn basis(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            ModeEigen::Generic {
                r_minus, r_plus, ..
            } => (r_minus, r_plus),
            ModeEigen::Defective { r, r_prime, .. } => (r, r_prime),
            ModeEigen::Complex { r_re, r_im, .. } => (r_re, r_im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignPattern {
    /// `(+, -; +, -)`
    ActivatorInhibitor,
    /// `(+, +; -, -)`
    PositiveFeedback,
    Other,
}

impl SignPattern {
    pub fn as_str(self) -> &'static str {
        match self {
            SignPattern::ActivatorInhibitor => "activator_inhibitor",
            SignPattern::PositiveFeedback => "positive_feedback",
            SignPattern::Other => "other",
        }
    }
}

/// `tr A < 0` and `det A > 0`.
pub fn rest_state_stable(lin: &Linearization) -> bool {
    lin.trace() < 0.0 && lin.det() > 0.0
}

/// `h(k) = (a11 - D̄1 k)(a22 - D̄2 k) - a12 a21`; negative means the mode
/// with `q² = k` has a positive growth rate.
pub fn turing_criterion_value(lin: &Linearization, k: f64) -> f64 {
    (lin.a11 - lin.d1bar * k) * (lin.a22 - lin.d2bar * k) - lin.a12 * lin.a21
}

pub fn classify_sign_pattern(lin: &Linearization) -> SignPattern {
    let s = [
        lin.a11 > 0.0,
        lin.a12 > 0.0,
        lin.a21 > 0.0,
        lin.a22 > 0.0,
    ];
    let nonzero = [lin.a11, lin.a12, lin.a21, lin.a22]
        .iter()
        .all(|x| *x != 0.0);
    match (nonzero, s) {
        (true, [true, false, true, false]) => SignPattern::ActivatorInhibitor,
        (true, [true, true, false, false]) => SignPattern::PositiveFeedback,
        _ => SignPattern::Other,
    }
}

/// Outcome of the diffusion-driven instability test.
#[derive(Debug, Clone, PartialEq)]
pub struct TuringWitness {
    pub unstable: bool,
    /// Real roots `(k₋, k₊)` of `h`, when they exist.
    pub interval: Option<(f64, f64)>,
    /// Admissible integers `q²` strictly inside the interval.
    pub witness: Vec<usize>,
    /// `f_u D̄2 + g_v D̄1 > 2 √(D̄1 D̄2) det A`
    pub range_printed_form: bool,
    /// `f_u D̄2 + g_v D̄1 > 2 √(D̄1 D̄2 det A)`
    pub range_standard_form: bool,
}

fn check_dim(d: usize) -> Result<(), AnalysisError> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(AnalysisError::InvalidDimension(d))
    }
}

/// Whether `m` is a sum of `d` squares of non-negative integers.
pub fn is_sum_of_squares(m: usize, d: usize) -> bool {
    fn rec(m: usize, d: usize) -> bool {
        if d == 0 {
            return m == 0;
        }
        let mut i = 0;
        while i * i <= m {
            if rec(m - i * i, d - 1) {
                return true;
            }
            i += 1;
        }
        false
    }
    rec(m, d)
}

/// Real roots of `h(k) = 0` in increasing order.
pub fn unstable_band(lin: &Linearization) -> Option<(f64, f64)> {
    let a = lin.d1bar * lin.d2bar;
    let b = -(lin.a11 * lin.d2bar + lin.a22 * lin.d1bar);
    let c = lin.det();
    let disc = b * b - 4.0 * a * c;
    if !(disc > 0.0) || a == 0.0 {
        return None;
    }
    let big = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if big == 0.0 { (0.0, 0.0) } else { (big / a, c / big) };
    Some((r1.min(r2), r1.max(r2)))
}

pub fn has_turing_instability(lin: &Linearization, d: usize) -> Result<TuringWitness, AnalysisError> {
    check_dim(d)?;
    if !rest_state_stable(lin) {
        return Err(AnalysisError::NotRestStable {
            trace: lin.trace(),
            det: lin.det(),
        });
    }
    if lin.d1bar == lin.d2bar {
        return Err(AnalysisError::EqualDiffusivities(lin.d1bar));
    }
    let lhs = lin.a11 * lin.d2bar + lin.a22 * lin.d1bar;
    let root = (lin.d1bar * lin.d2bar).sqrt();
    let range_printed_form = lhs > 2.0 * root * lin.det();
    let range_standard_form = lhs > 2.0 * (lin.d1bar * lin.d2bar * lin.det()).sqrt();

    let interval = unstable_band(lin);
    let witness = match interval {
        Some((lo, hi)) if hi > 0.0 => {
            let first = lo.max(0.0).floor() as usize;
            let last = hi.ceil() as usize;
            (first..=last)
                .filter(|&m| m >= 1 && (m as f64) > lo && (m as f64) < hi)
                .filter(|&m| is_sum_of_squares(m, d))
                .collect()
        }
        _ => Vec::new(),
    };
    Ok(TuringWitness {
        unstable: !witness.is_empty(),
        interval,
        witness,
        range_printed_form,
        range_standard_form,
    })
}

/// Eigen-structure of the block `A - k diag(D̄)`, `k = q²`.
///
/// Roots come from the cancellation-free quadratic formula; the class is
/// decided by the discriminant `(m11 - m22)² + 4 m12 m21` against
/// `DISC_REL_TOL · scale²`.
pub fn dispersion_eigen(lin: &Linearization, k: f64) -> Result<ModeEigen, AnalysisError> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(AnalysisError::InvalidWavenumber(k));
    }
    if lin.a12 == 0.0 {
        return Err(AnalysisError::ZeroFv);
    }
    let [[m11, m12], [m21, m22]] = lin.mode_matrix(k);
    let tr = m11 + m22;
    let det = turing_criterion_value(lin, k);
    let diff = m11 - m22;
    let disc = diff * diff + 4.0 * m12 * m21;
    let scale = tr.abs().max(det.abs().sqrt());
    let eps = DISC_REL_TOL * scale * scale;
    let second = |lambda: f64| (lambda - m11) / m12;

    if disc.abs() <= eps {
        let lambda = 0.5 * tr;
        Ok(ModeEigen::Defective {
            lambda,
            r: [1.0, second(lambda)],
            r_prime: [0.0, 1.0 / m12],
        })
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        let big = if tr >= 0.0 { 0.5 * (tr + sq) } else { 0.5 * (tr - sq) };
        let small = det / big;
        let (lambda_minus, lambda_plus) = if big > small { (small, big) } else { (big, small) };
        Ok(ModeEigen::Generic {
            lambda_minus,
            lambda_plus,
            r_minus: [1.0, second(lambda_minus)],
            r_plus: [1.0, second(lambda_plus)],
        })
    } else {
        let re = 0.5 * tr;
        let im = 0.5 * (-disc).sqrt();
        Ok(ModeEigen::Complex {
            re,
            im,
            r_re: [1.0, (re - m11) / m12],
            r_im: [0.0, im / m12],
        })
    }
}

pub fn dispersion_eigen_mode(lin: &Linearization, q: &ModeIndex) -> Result<ModeEigen, AnalysisError> {
    dispersion_eigen(lin, q.q2() as f64)
}

/// All wave indices in dimension `d` with `q² ≤ max_q2`, lexicographic order.
pub fn modes_up_to(d: usize, max_q2: usize) -> Vec<ModeIndex> {
    let top = (max_q2 as f64).sqrt().floor() as usize + 1;
    let mut out = Vec::new();
    let mut q = vec![0usize; d];
    loop {
        let q2: usize = q.iter().map(|x| x * x).sum();
        if q2 <= max_q2 {
            out.push(ModeIndex { q: q.clone(), q2 });
        }
        // odometer increment, last axis fastest
        let mut axis = d;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            q[axis] += 1;
            if q[axis] <= top {
                break;
            }
            q[axis] = 0;
        }
    }
}

/// Largest eigenvalue of the symmetric part of `M(k)`; bounds `Re λ` and
/// is strictly decreasing in `k` at rate at least `min(D̄1, D̄2)/2`.
fn log_norm(lin: &Linearization, k: f64) -> f64 {
    let [[m11, m12], [m21, m22]] = lin.mode_matrix(k);
    let diff = m11 - m22;
    let off = m12 + m21;
    0.5 * ((m11 + m22) + (diff * diff + off * off).sqrt())
}

#[derive(Debug, Clone)]
pub struct GrowingModeSummary {
    pub dim: usize,
    pub lambda_max: f64,
    pub omega_max: Vec<ModeIndex>,
    pub growing: Vec<ModeIndex>,
    /// `λ_max - max Re λ` over every root outside the `r₊` branch of `Ω_max`.
    pub nu: f64,
    /// Scan cutoff `ceil(k₊) + 1`.
    pub k_cut: usize,
    /// Largest `q²` visited while bounding the tail for `nu`.
    pub k_tail: usize,
    /// Every mode with `q² ≤ k_cut` and its eigen-structure.
    pub scanned: Vec<(ModeIndex, ModeEigen)>,
}

impl GrowingModeSummary {
    pub fn is_dominant(&self, q: &ModeIndex) -> bool {
        self.omega_max.binary_search(q).is_ok()
    }
}

/// Scans every mode up to `ceil(k₊) + 1`, where `k₊` is the upper root of
/// `h`. Beyond `k₊` both roots have negative real part, so the growing set
/// is complete. For the gap `ν` the scan continues until the logarithmic
/// norm of the mode block drops below the runner-up growth rate, which
/// bounds every mode further out.
pub fn growing_mode_summary(lin: &Linearization, d: usize) -> Result<GrowingModeSummary, AnalysisError> {
    let witness = has_turing_instability(lin, d)?;
    if !witness.unstable {
        return Err(AnalysisError::NoInstability);
    }
    let (_, k_plus) = witness.interval.expect("unstable implies a band");
    let k_cut = k_plus.ceil() as usize + 1;

    let scanned = modes_up_to(d, k_cut)
        .into_iter()
        .map(|q| dispersion_eigen_mode(lin, &q).map(|e| (q, e)))
        .collect::<Result<Vec<_>, _>>()?;

    let lambda_max = scanned
        .iter()
        .map(|(_, e)| e.re_plus())
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = LAMBDA_MAX_REL_TOL * lambda_max.abs();
    let in_max = |e: &ModeEigen| (e.re_plus() - lambda_max).abs() <= tol;

    let omega_max: Vec<ModeIndex> = scanned
        .iter()
        .filter(|(_, e)| in_max(e))
        .map(|(q, _)| q.clone())
        .collect();
    let growing: Vec<ModeIndex> = scanned
        .iter()
        .filter(|(_, e)| e.re_plus() > 0.0)
        .map(|(q, _)| q.clone())
        .collect();

    let mut runner_up = scanned
        .iter()
        .map(|(_, e)| if in_max(e) { e.re_minus() } else { e.re_plus() })
        .fold(f64::NEG_INFINITY, f64::max);

    let mut k_tail = k_cut;
    while log_norm(lin, k_tail as f64) > runner_up {
        k_tail += 1;
    }
    if k_tail > k_cut {
        for q in modes_up_to(d, k_tail) {
            if q.q2() > k_cut {
                let e = dispersion_eigen_mode(lin, &q)?;
                runner_up = runner_up.max(e.re_plus());
            }
        }
    }

    Ok(GrowingModeSummary {
        dim: d,
        lambda_max,
        omega_max,
        growing,
        nu: lambda_max - runner_up,
        k_cut,
        k_tail,
        scanned,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRow {
    pub k: f64,
    pub re_plus: f64,
    pub re_minus: f64,
    pub im: f64,
    pub class: ModeClass,
}

pub fn dispersion_curve(lin: &Linearization, k_grid: &[f64]) -> Result<Vec<DispersionRow>, AnalysisError> {
    k_grid
        .iter()
        .map(|&k| {
            let e = dispersion_eigen(lin, k)?;
            Ok(DispersionRow {
                k,
                re_plus: e.re_plus(),
                re_minus: e.re_minus(),
                im: e.im(),
                class: e.class(),
            })
        })
        .collect()
}

/// Orders modes by decreasing growth rate, ties broken lexicographically.
pub fn by_growth(a: &(ModeIndex, ModeEigen), b: &(ModeIndex, ModeEigen)) -> Ordering {
    b.1.re_plus()
        .total_cmp(&a.1.re_plus())
        .then_with(|| a.0.cmp(&b.0))
}
