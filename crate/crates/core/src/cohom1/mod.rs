//! Duality angles of cohomogeneity-one families.
//!
//! Three families carry a single nontrivial angle in middle-ish degree:
//! complements of a tubular neighbourhood in CPⁿ, their lens-space quotients
//! (disk bundles over CPⁿ⁻¹ with Euler number m), and complements of a
//! neighbourhood in the Grassmannian of oriented 2-planes. On each, the
//! Neumann and Dirichlet harmonic fields are `f(t) ηᵏ + g(t) α∧ηᵏ⁻¹∧τ`
//! for a radial coordinate t ∈ (0, π/2 − r], with f solving
//!
//! ```text
//!     f'' = (a tan t + cot t) f' + b tan²t f
//! ```
//!
//! and g fixed by closedness. The angle has a closed form; the numeric route
//! shoots the ODE backwards from t₀ = π/2 − r and integrates the L² pairings
//! with composite Gauss–Legendre quadrature.

pub mod ode;
pub mod quadrature;

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use ode::Tolerance;
use quadrature::{CompositeRule, ORDER};

const MODULE: &str = "cohom1";

/// Left end of the radial interval; the cot t singularity sits at 0.
pub const EPSILON: f64 = 1e-6;
pub const BASE_PANELS: usize = 64;
pub const MAX_PANELS: usize = 8192;
pub const QUADRATURE_TOL: f64 = 1e-11;
/// Smallest radius admitted in the exponent study.
pub const MIN_ASYMPTOTIC_R: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    CPn,
    Lens(u32),
    Grassmann,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::CPn => "cpn",
            Family::Lens(_) => "lens",
            Family::Grassmann => "grassmann",
        }
    }

    /// Euler number of the lens bundle, 1 for the other families.
    pub fn m(&self) -> u32 {
        match self {
            Family::Lens(m) => *m,
            _ => 1,
        }
    }

    /// Exponent e in `1 − cos θ ~ r^e` as r → 0.
    pub fn expected_exponent(&self, n: u32) -> f64 {
        match self {
            Family::Grassmann => n as f64,
            _ => 2.0 * n as f64,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyParams {
    pub family: Family,
    pub n: u32,
    pub k: u32,
    pub r: f64,
}

impl FamilyParams {
    pub fn new(family: Family, n: u32, k: u32, r: f64) -> Result<Self> {
        let p = FamilyParams { family, n, k, r };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::params(MODULE, format!("n must be at least 2, got {}", self.n)));
        }
        if self.k < 1 || self.k >= self.n {
            return Err(Error::params(
                MODULE,
                format!("k must lie in 1..={}, got {}", self.n - 1, self.k),
            ));
        }
        if !(self.r > 0.0 && self.r < FRAC_PI_2) {
            return Err(Error::params(
                MODULE,
                format!("r must lie in (0, pi/2), got {}", self.r),
            ));
        }
        if self.family.m() < 1 {
            return Err(Error::params(MODULE, "lens parameter m must be at least 1"));
        }
        Ok(())
    }

    /// Right end t₀ = π/2 − r of the radial interval.
    pub fn t0(&self) -> f64 {
        FRAC_PI_2 - self.r
    }

    /// Coefficients (a, b) of `f'' = (a tan t + cot t) f' + b tan²t f`.
    pub fn ode_coefficients(&self) -> (f64, f64) {
        let (n, k) = (self.n as f64, self.k as f64);
        match self.family {
            Family::Grassmann => (n - 2.0 * k + 1.0, k * (n - k)),
            _ => (2.0 * n - 4.0 * k + 1.0, 4.0 * k * (n - k)),
        }
    }

    /// g = closure · f'.
    pub fn closure(&self) -> f64 {
        match self.family {
            Family::Grassmann => -1.0,
            _ => 0.5,
        }
    }

    /// Exponents of cos t in the two terms of the L² weight.
    fn weight_exponents(&self) -> (i32, i32) {
        let (n, k) = (self.n as i32, self.k as i32);
        match self.family {
            Family::Grassmann => (n - 2 * k - 1, n - 2 * k + 1),
            _ => (2 * n - 4 * k - 1, 2 * n - 4 * k + 1),
        }
    }

    /// Power of sin r in the closed forms: sin²ⁿr or sinⁿr.
    fn sin_power(&self) -> i32 {
        match self.family {
            Family::Grassmann => self.n as i32,
            _ => 2 * self.n as i32,
        }
    }

    /// (s, 1 − s) with s the family's power of sin r, both to full relative precision.
    fn s_and_complement(&self) -> (f64, f64) {
        let e = self.sin_power() as f64;
        let s = (e * self.r.sin().ln()).exp();
        // sin r = cos δ with δ = π/2 − r, and ln cos δ = ln(1 − 2 sin²(δ/2)).
        let half = (0.5 * self.t0()).sin();
        let complement = -(e * (-2.0 * half * half).ln_1p()).exp_m1();
        (s, complement)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    ClosedForm,
    OdeQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleResult {
    pub cos_theta: f64,
    pub method: Method,
    pub params: FamilyParams,
    pub error_estimate: f64,
}

impl AngleResult {
    pub fn theta(&self) -> f64 {
        self.cos_theta.clamp(-1.0, 1.0).acos()
    }
}

/// Closed-form cos θ together with 1 − cos θ, each without cancellation.
fn closed_form_parts(params: &FamilyParams) -> (f64, f64) {
    let (n, k) = (params.n as f64, params.k as f64);
    let c = (n - 2.0 * k).powi(2) / (k * (n - k));
    let (s, one_minus_s) = params.s_and_complement();
    let x = (1.0 + s).powi(2) + c * s;
    let root = x.sqrt();
    let cos = one_minus_s / root;
    let one_minus_cos = s * (4.0 + c) / (root * (root + one_minus_s));
    (cos, one_minus_cos)
}

pub fn closed_form_angle(params: &FamilyParams) -> Result<AngleResult> {
    params.validate()?;
    let (cos, _) = closed_form_parts(params);
    Ok(AngleResult {
        cos_theta: cos,
        method: Method::ClosedForm,
        params: *params,
        error_estimate: 4.0 * f64::EPSILON,
    })
}

/// 1 − cos θ from the closed form, accurate even when it is far below machine epsilon.
pub fn closed_form_one_minus_cos(params: &FamilyParams) -> Result<f64> {
    params.validate()?;
    Ok(closed_form_parts(params).1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RadialRole {
    Neumann,
    Dirichlet,
}

/// Normalized radial profile sampled at the nodes of a composite quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub role: RadialRole,
    pub params: FamilyParams,
    /// Ascending sample points in [ε, t₀].
    pub grid: Vec<f64>,
    /// Quadrature weights paired with `grid`.
    pub weights: Vec<f64>,
    pub f_values: Vec<f64>,
    pub g_values: Vec<f64>,
    /// Factor that brought the shooting solution to unit L² norm.
    pub c: f64,
    /// Panels of the composite rule behind `grid`.
    pub panels: usize,
}

/// Shoot from t₀ towards ε and sample (f, f') at the rule's nodes, ascending.
fn shoot(params: &FamilyParams, role: RadialRole, rule: &CompositeRule) -> Result<(Vec<f64>, Vec<f64>)> {
    let (a, b) = params.ode_coefficients();
    let rhs = |t: f64, y: &[f64; 2]| {
        let tan = t.tan();
        [y[1], (a * tan + 1.0 / tan) * y[1] + b * tan * tan * y[0]]
    };
    let y0 = match role {
        RadialRole::Neumann => [1.0, 0.0],
        RadialRole::Dirichlet => [0.0, 1.0],
    };
    let targets: Vec<f64> = rule.nodes.iter().rev().copied().collect();
    let states = ode::integrate(rhs, params.t0(), y0, &targets, Tolerance::default())?;
    let f = states.iter().rev().map(|s| s[0]).collect();
    let df = states.iter().rev().map(|s| s[1]).collect();
    Ok((f, df))
}

fn unnormalized(params: &FamilyParams, role: RadialRole, panels: usize) -> Result<RadialSolution> {
    params.validate()?;
    let rule = CompositeRule::new(EPSILON, params.t0(), panels, ORDER);
    let (f, df) = shoot(params, role, &rule)?;
    let closure = params.closure();
    Ok(RadialSolution {
        role,
        params: *params,
        grid: rule.nodes,
        weights: rule.weights,
        f_values: f,
        g_values: df.iter().map(|d| closure * d).collect(),
        c: 1.0,
        panels,
    })
}

fn normalize(mut sol: RadialSolution) -> Result<RadialSolution> {
    let norm2 = weighted_l2(&sol.params, &sol, &sol)?;
    if !(norm2 > 0.0 && norm2.is_finite()) {
        return Err(Error::Quadrature { change: norm2 });
    }
    let sign = if sol.f_values[0] < 0.0 { -1.0 } else { 1.0 };
    let c = sign / norm2.sqrt();
    sol.f_values.iter_mut().for_each(|v| *v *= c);
    sol.g_values.iter_mut().for_each(|v| *v *= c);
    sol.c = c;
    Ok(sol)
}

/// Radial profile on a fixed number of quadrature panels, normalized to unit L² norm
/// with f positive near t = 0.
pub fn solve_radial_on(params: &FamilyParams, role: RadialRole, panels: usize) -> Result<RadialSolution> {
    normalize(unnormalized(params, role, panels)?)
}

/// Radial profile with the panel count doubled until the L² norm settles.
pub fn solve_radial(params: &FamilyParams, role: RadialRole) -> Result<RadialSolution> {
    let mut panels = BASE_PANELS;
    let first = unnormalized(params, role, panels)?;
    let mut prev_norm = weighted_l2(params, &first, &first)?;
    let mut change = f64::INFINITY;
    while panels < MAX_PANELS {
        panels *= 2;
        let next = unnormalized(params, role, panels)?;
        let norm = weighted_l2(params, &next, &next)?;
        change = (norm - prev_norm).abs() / norm.abs();
        if change <= QUADRATURE_TOL {
            return normalize(next);
        }
        prev_norm = norm;
    }
    Err(Error::Quadrature { change })
}

/// L² pairing of two radial profiles sampled on the same rule.
///
/// The integrand is `k sin t cosᵉ¹t f_A f_B + (1/(n−k)) cosᵉ²t / sin t · g_A g_B`.
/// Constants shared by every pairing are dropped, except the lens volume
/// factor 1/m, which is kept so that its cancellation is exercised.
pub fn weighted_l2(params: &FamilyParams, a: &RadialSolution, b: &RadialSolution) -> Result<f64> {
    if a.params != *params || b.params != *params {
        return Err(Error::params(MODULE, "radial solutions belong to different parameters"));
    }
    if a.grid != b.grid {
        return Err(Error::params(MODULE, "radial solutions are sampled on different grids"));
    }
    let (n, k) = (params.n as f64, params.k as f64);
    let (e1, e2) = params.weight_exponents();
    let volume = 1.0 / params.family.m() as f64;
    let sum: f64 = a
        .grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let (s, c) = t.sin_cos();
            let w = k * s * c.powi(e1) * a.f_values[i] * b.f_values[i]
                + c.powi(e2) / (s * (n - k)) * a.g_values[i] * b.g_values[i];
            a.weights[i] * w
        })
        .sum();
    Ok(volume * sum)
}

/// cos θ = ⟨ω_N, ω_D⟩ / (‖ω_N‖ ‖ω_D‖) from the shooting solutions, with the
/// panel count doubled until all three pairings settle.
pub fn numeric_angle(params: &FamilyParams) -> Result<AngleResult> {
    params.validate()?;
    let pairings = |panels: usize| -> Result<[f64; 3]> {
        let nsol = unnormalized(params, RadialRole::Neumann, panels)?;
        let dsol = unnormalized(params, RadialRole::Dirichlet, panels)?;
        Ok([
            weighted_l2(params, &nsol, &nsol)?,
            weighted_l2(params, &dsol, &dsol)?,
            weighted_l2(params, &nsol, &dsol)?,
        ])
    };
    let cosine = |p: &[f64; 3]| p[2].abs() / (p[0] * p[1]).sqrt();
    let mut panels = BASE_PANELS;
    let mut prev = pairings(panels)?;
    let mut change = f64::INFINITY;
    while panels < MAX_PANELS {
        panels *= 2;
        let next = pairings(panels)?;
        change = (0..3)
            .map(|i| (next[i] - prev[i]).abs() / next[i].abs())
            .fold(0.0, f64::max);
        let cos_change = (cosine(&next) - cosine(&prev)).abs();
        prev = next;
        if change <= QUADRATURE_TOL {
            return Ok(AngleResult {
                cos_theta: cosine(&prev),
                method: Method::OdeQuadrature,
                params: *params,
                error_estimate: cos_change.max(f64::EPSILON),
            });
        }
    }
    Err(Error::Quadrature { change })
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Small-r exponent study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub family: Family,
    pub n: u32,
    pub k: u32,
    /// Slope of log(1 − cos θ) against log r.
    pub slope: f64,
    pub expected: f64,
    pub rel_err: f64,
    /// Slope of log θ against log r.
    pub theta_slope: f64,
}

/// Log-log slope of 1 − cos θ (and of θ) against r over a grid of small radii.
pub fn asymptotic_exponent(family: Family, n: u32, k: u32, r_grid: &[f64]) -> Result<ExponentFit> {
    if r_grid.len() < 5 {
        return Err(Error::params(MODULE, "exponent fits need at least 5 radii"));
    }
    if r_grid.iter().any(|&r| !(r > 0.0 && r <= 0.1)) {
        return Err(Error::params(MODULE, "exponent radii must lie in (0, 0.1]"));
    }
    let mut logr = Vec::with_capacity(r_grid.len());
    let mut log_gap = Vec::with_capacity(r_grid.len());
    let mut log_theta = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        if r < MIN_ASYMPTOTIC_R {
            return Err(Error::Underflow { r });
        }
        let params = FamilyParams::new(family, n, k, r)?;
        let gap = closed_form_one_minus_cos(&params)?;
        if !(gap.is_normal() && gap > 0.0) {
            return Err(Error::Underflow { r });
        }
        logr.push(r.ln());
        log_gap.push(gap.ln());
        log_theta.push((2.0 * (0.5 * gap).sqrt().asin()).ln());
    }
    let slope = fit_slope(&logr, &log_gap);
    let expected = family.expected_exponent(n);
    Ok(ExponentFit {
        family,
        n,
        k,
        slope,
        expected,
        rel_err: (slope - expected).abs() / expected,
        theta_slope: fit_slope(&logr, &log_theta),
    })
}

/// Log-log slope of cos θ against π/2 − r for the given offsets from π/2.
pub fn closing_exponent(family: Family, n: u32, k: u32, offsets: &[f64]) -> Result<f64> {
    if offsets.len() < 2 {
        return Err(Error::params(MODULE, "closing fits need at least 2 offsets"));
    }
    let mut x = Vec::with_capacity(offsets.len());
    let mut y = Vec::with_capacity(offsets.len());
    for &delta in offsets {
        let params = FamilyParams::new(family, n, k, FRAC_PI_2 - delta)?;
        let cos = closed_form_angle(&params)?.cos_theta;
        if !(cos.is_normal() && cos > 0.0) {
            return Err(Error::Underflow { r: params.r });
        }
        x.push(delta.ln());
        y.push(cos.ln());
    }
    Ok(fit_slope(&x, &y))
}

/// Geometric grid of `count` points from `hi` down to `lo`.
pub fn geometric_grid(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    let ratio = (lo / hi).ln() / (count.max(2) - 1) as f64;
    (0..count).map(|i| hi * (ratio * i as f64).exp()).collect()
}

/// One row of the closed-form versus numeric sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub family: String,
    pub n: u32,
    pub k: u32,
    pub r: f64,
    pub m: u32,
    pub cos_theta_closed: f64,
    pub cos_theta_numeric: f64,
    pub abs_diff: f64,
}

pub fn sweep_row(params: &FamilyParams) -> Result<SweepRow> {
    let closed = closed_form_angle(params)?.cos_theta;
    let numeric = numeric_angle(params)?.cos_theta;
    Ok(SweepRow {
        family: params.family.name().to_string(),
        n: params.n,
        k: params.k,
        r: params.r,
        m: params.family.m(),
        cos_theta_closed: closed,
        cos_theta_numeric: numeric,
        abs_diff: (closed - numeric).abs(),
    })
}
