//! Integration engines for the force kernels: Bose-weighted frequency
//! integrals, oscillatory integrals partitioned at half periods, damped
//! evanescent wavevector integrals and Matsubara sums.
//!
//! All engines sit on one globally adaptive Gauss–Kronrod (7/15) core. Known
//! resonance frequencies can be passed as hints and become initial
//! breakpoints, so narrow Lorentzian peaks are never stepped over.

mod gauss_kronrod;
mod matsubara;

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{bose_occupation, thermal_frequency};

pub use matsubara::matsubara_sum;

/// Lower end of every Bose-weighted frequency integral, relative to its upper end.
pub const LOW_FREQUENCY_FRACTION: f64 = 1e-6;

/// Segment cap for the half-period partition of oscillatory integrals.
const MAX_SEGMENTS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("invalid quadrature settings: {0}")]
    InvalidSettings(String),
    #[error("Matsubara sum does not decay (stopped after {terms} terms, last term {last_term:e})")]
    Divergence { terms: usize, last_term: f64 },
}

/// Tolerances and truncation controls shared by all engines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSettings {
    /// Target relative accuracy.
    pub rel_tol: f64,
    /// Absolute accuracy floor, in the units of the integral (newtons for forces).
    pub abs_floor: f64,
    /// Frequency cutoff in units of k_B T/ħ; also the decay cutoff of e^{-q·scale}.
    pub bose_cutoff_x: f64,
    /// Bisection budget per adaptive integral.
    pub max_subdivisions: usize,
    /// A Matsubara sum stops once a term falls below this fraction of the partial sum.
    pub matsubara_tail_tol: f64,
    /// Hard cap on the number of Matsubara terms.
    pub matsubara_max_terms: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_floor: 1e-30,
            bose_cutoff_x: 60.0,
            max_subdivisions: 10_000,
            matsubara_tail_tol: 1e-9,
            matsubara_max_terms: 2_000_000,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(QuadratureError::InvalidSettings(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_floor >= 0.0) {
            return Err(QuadratureError::InvalidSettings(format!(
                "abs_floor must be non-negative, got {}",
                self.abs_floor
            )));
        }
        if !(self.bose_cutoff_x >= 20.0) {
            return Err(QuadratureError::InvalidSettings(format!(
                "bose_cutoff_x must be at least 20, got {}",
                self.bose_cutoff_x
            )));
        }
        if !(self.matsubara_tail_tol > 0.0) {
            return Err(QuadratureError::InvalidSettings(
                "matsubara_tail_tol must be positive".into(),
            ));
        }
        if self.matsubara_max_terms == 0 {
            return Err(QuadratureError::InvalidSettings(
                "matsubara_max_terms must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Settings for an integral nested inside another one: ten times tighter,
    /// relative only.
    pub fn inner(&self) -> Self {
        Self {
            rel_tol: self.rel_tol * 0.1,
            abs_floor: 0.0,
            ..*self
        }
    }
}

/// Value of an integral together with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult<V> {
    pub value: V,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl<V: QuadValue> IntegralResult<V> {
    pub fn zero() -> Self {
        Self {
            value: V::default(),
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error_estimate: self.error_estimate * factor.abs(),
            ..self
        }
    }

    /// Sum of two results; errors add, convergence is the conjunction.
    pub fn plus(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }

    pub fn minus(self, other: Self) -> Self {
        Self {
            value: self.value - other.value,
            ..self.plus(other)
        }
    }
}

/// Scalar types an engine can integrate.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn magnitude(self) -> f64;
    fn compensated_sum<I: Iterator<Item = Self>>(values: I) -> Self;
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    compensation: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }

    fn compensated_sum<I: Iterator<Item = Self>>(values: I) -> Self {
        let mut acc = Neumaier::default();
        values.for_each(|x| acc.add(x));
        acc.total()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }

    fn compensated_sum<I: Iterator<Item = Self>>(values: I) -> Self {
        let mut re = Neumaier::default();
        let mut im = Neumaier::default();
        for z in values {
            re.add(z.re);
            im.add(z.im);
        }
        Complex64::new(re.total(), im.total())
    }
}

fn merged_points(lower: f64, upper: f64, hints: &[f64]) -> Vec<f64> {
    let mut points = Vec::with_capacity(hints.len() + 2);
    points.push(lower);
    points.extend(hints.iter().copied().filter(|&h| h > lower && h < upper));
    points.push(upper);
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// Adaptive integral of `f` over [lower, upper] with optional interior breakpoints.
pub fn integrate<V, F>(
    f: F,
    lower: f64,
    upper: f64,
    hints: &[f64],
    settings: &QuadratureSettings,
) -> IntegralResult<V>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    if !(upper > lower) {
        return IntegralResult::zero();
    }
    let points = merged_points(lower, upper, hints);
    gauss_kronrod::adaptive(
        &f,
        &points,
        settings.rel_tol,
        settings.abs_floor,
        settings.max_subdivisions,
    )
}

/// Half-period breakpoints kπ/phase_scale inside (lower, upper).
pub fn half_period_points(phase_scale: f64, lower: f64, upper: f64) -> Vec<f64> {
    if !(phase_scale > 0.0) {
        return Vec::new();
    }
    let step = PI / phase_scale;
    let first = (lower / step).floor() as usize + 1;
    let last = (upper / step).ceil() as usize;
    let count = last.saturating_sub(first);
    let stride = count.div_ceil(MAX_SEGMENTS).max(1);
    (first..last)
        .step_by(stride)
        .map(|k| k as f64 * step)
        .filter(|&x| x > lower && x < upper)
        .collect()
}

/// Frequency band [ω_min, ω_max] of a Bose-weighted integral at `temperature`.
pub fn bose_band(temperature: f64, settings: &QuadratureSettings) -> (f64, f64) {
    let omega_max = settings.bose_cutoff_x * thermal_frequency(temperature);
    (LOW_FREQUENCY_FRACTION * omega_max, omega_max)
}

/// Mass of ∫₀^{ω_min} g, assuming g ∝ ω^p locally; returns (value, error, evaluations).
fn low_end_mass<V: QuadValue, G: Fn(f64) -> V>(g: &G, omega_min: f64) -> (V, f64, usize) {
    let g1 = g(omega_min);
    let m1 = g1.magnitude();
    if m1 == 0.0 || !m1.is_finite() {
        return (V::default(), 0.0, 1);
    }
    let m2 = g(0.5 * omega_min).magnitude();
    let m4 = g(0.25 * omega_min).magnitude();
    let p1 = (m1 / m2).log2();
    let p2 = (m2 / m4).log2();
    if p1.is_finite() && p2.is_finite() && p1 > -0.9 {
        let mass = g1 * (omega_min / (p1 + 1.0));
        let err = mass.magnitude() * (p1 - p2).abs() / (p1 + 1.0);
        (mass, err, 3)
    } else {
        // Not a regular power law at the origin; report rather than guess.
        let mass = g1 * omega_min;
        (mass, mass.magnitude(), 3)
    }
}

fn bose_points(temperature: f64, settings: &QuadratureSettings, hints: &[f64]) -> (f64, f64, Vec<f64>) {
    let (lo, hi) = bose_band(temperature, settings);
    let wt = thermal_frequency(temperature);
    let mut extra: Vec<f64> = [1.0, 4.0, 12.0].iter().map(|x| x * wt).collect();
    extra.extend_from_slice(hints);
    (lo, hi, extra)
}

/// ∫₀^∞ f(ω) n(ω,T) dω, evaluated on [ω_min, ω_max] with ω_max =
/// bose_cutoff_x·k_BT/ħ and ω_min = 10⁻⁶ ω_max. The omitted mass below ω_min
/// is added from a local power-law fit and counted in the error estimate.
/// T = 0 returns zero without evaluating `f`.
pub fn bose_weighted_integral<V, F>(
    f: F,
    temperature: f64,
    settings: &QuadratureSettings,
    hints: &[f64],
) -> IntegralResult<V>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    if temperature <= 0.0 {
        return IntegralResult::zero();
    }
    let g = |w: f64| f(w) * bose_occupation(w, temperature);
    let (lo, hi, extra) = bose_points(temperature, settings, hints);
    let main = integrate(g, lo, hi, &extra, settings);
    let (mass, mass_err, n) = low_end_mass(&g, lo);
    with_low_end(main, mass, mass_err, n, settings)
}

fn with_low_end<V: QuadValue>(
    main: IntegralResult<V>,
    mass: V,
    mass_err: f64,
    evaluations: usize,
    settings: &QuadratureSettings,
) -> IntegralResult<V> {
    let value = main.value + mass;
    let error_estimate = main.error_estimate + mass_err;
    IntegralResult {
        value,
        error_estimate,
        evaluations: main.evaluations + evaluations,
        converged: main.converged
            && error_estimate <= (settings.rel_tol * value.magnitude()).max(settings.abs_floor),
    }
}

/// ∫₀^∞ n(ω,T)·Re{g(ω) e^{i·phase_scale·ω}} dω on the Bose band, with the band
/// partitioned at half periods π/phase_scale.
pub fn bose_oscillatory_integral<F>(
    g: F,
    phase_scale: f64,
    temperature: f64,
    settings: &QuadratureSettings,
    hints: &[f64],
) -> IntegralResult<f64>
where
    F: Fn(f64) -> Complex64,
{
    if temperature <= 0.0 {
        return IntegralResult::zero();
    }
    let h = |w: f64| {
        bose_occupation(w, temperature) * (g(w) * Complex64::new(0.0, phase_scale * w).exp()).re
    };
    let (lo, hi, mut extra) = bose_points(temperature, settings, hints);
    extra.extend(half_period_points(phase_scale, lo, hi));
    let main = integrate(h, lo, hi, &extra, settings);
    let (mass, mass_err, n) = low_end_mass(&h, lo);
    with_low_end(main, mass, mass_err, n, settings)
}

/// ∫₀^{omega_max} g(ω) e^{i·phase_scale·ω} dω, split into half-period
/// segments of length π/phase_scale, each refined adaptively, and summed with
/// compensated accumulation.
pub fn oscillatory_tail_integral<F>(
    g: F,
    phase_scale: f64,
    omega_max: f64,
    settings: &QuadratureSettings,
    hints: &[f64],
) -> IntegralResult<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let h = |w: f64| g(w) * Complex64::new(0.0, phase_scale * w).exp();
    let mut points = half_period_points(phase_scale, 0.0, omega_max);
    points.extend_from_slice(hints);
    integrate(h, 0.0, omega_max, &points, settings)
}

/// Number of half-period segments the oscillatory engine uses on [0, omega_max].
pub fn half_period_segments(phase_scale: f64, omega_max: f64) -> usize {
    half_period_points(phase_scale, 0.0, omega_max).len() + 1
}

/// ∫₀^∞ h(q) dq for integrands carrying a damping factor e^{-q·q_scale},
/// truncated at q_max = bose_cutoff_x/q_scale.
pub fn evanescent_integral<V, F>(
    h: F,
    q_scale: f64,
    settings: &QuadratureSettings,
    hints: &[f64],
) -> IntegralResult<V>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    let q_max = settings.bose_cutoff_x / q_scale;
    let mut points = vec![1.0 / q_scale, 4.0 / q_scale];
    points.extend_from_slice(hints);
    integrate(h, 0.0, q_max, &points, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::thermal_frequency;

    #[test]
    fn bose_integral_of_omega() {
        let s = QuadratureSettings::default();
        let wt = thermal_frequency(300.0);
        let r = bose_weighted_integral(|w: f64| w, 300.0, &s, &[]);
        let exact = wt * wt * PI * PI / 6.0;
        assert!(r.converged);
        assert!(((r.value - exact) / exact).abs() < s.rel_tol, "{r:?}");
    }

    #[test]
    fn zero_temperature_short_circuit() {
        let calls = std::cell::Cell::new(0usize);
        let r = bose_weighted_integral(
            |w: f64| {
                calls.set(calls.get() + 1);
                w
            },
            0.0,
            &QuadratureSettings::default(),
            &[],
        );
        assert_eq!(r.value, 0.0);
        assert_eq!(r.evaluations, 0);
        assert_eq!(calls.get(), 0);
    }

    #[test]
    fn laplace_type_oscillatory_integral() {
        let s = QuadratureSettings {
            rel_tol: 1e-10,
            ..Default::default()
        };
        let omega = 2.0;
        let p = 7.0;
        let r = oscillatory_tail_integral(|w| Complex64::new((-w / omega).exp(), 0.0), p, 200.0, &s, &[]);
        let exact = 1.0 / Complex64::new(1.0 / omega, -p);
        assert!((r.value - exact).norm() < 1e-9 * exact.norm(), "{:?} vs {exact}", r.value);
    }

    #[test]
    fn vanishing_phase_is_plain_integral() {
        let s = QuadratureSettings::default();
        let r = oscillatory_tail_integral(|w| Complex64::new(w * w, 0.0), 0.0, 3.0, &s, &[]);
        assert!((r.value.re - 9.0).abs() < 1e-12 && r.value.im == 0.0);
        assert_eq!(half_period_segments(0.0, 3.0), 1);
    }

    #[test]
    fn gamma_function_evanescent_integral() {
        let d = 1e-6;
        let s = QuadratureSettings::default();
        let r = evanescent_integral(|q: f64| q * (-2.0 * d * q).exp(), 2.0 * d, &s, &[]);
        let exact = 1.0 / (2.0 * d).powi(2);
        assert!(((r.value - exact) / exact).abs() < 1e-9);
        let z: IntegralResult<f64> = evanescent_integral(|_| 0.0, 2.0 * d, &s, &[]);
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn settings_validation() {
        assert!(QuadratureSettings::default().validate().is_ok());
        let bad = QuadratureSettings {
            bose_cutoff_x: 10.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureSettings {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
