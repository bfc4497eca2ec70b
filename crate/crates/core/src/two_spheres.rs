//! Two spheres at center-to-center distance d, each at its own temperature,
//! in an environment at T_env.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::constants::{HBAR, C};
use crate::error::Error;
use crate::force::{bracket, coverage_warning, merged_hints, raw_settings, ForceBreakdown};
use crate::materials::{dipole_warnings, Polarization, SphereSpec};
use crate::quadrature::{
    bose_band, bose_weighted_integral, evanescent_integral, half_period_points, matsubara_sum,
    IntegralResult, QuadratureSettings,
};

/// d/max(R) below which the one-reflection dipole treatment is flagged.
pub const PROXIMITY_WARNING_RATIO: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSphereSystem {
    pub sphere1: SphereSpec,
    pub sphere2: SphereSpec,
    /// Center-to-center distance in metres.
    pub separation: f64,
    pub environment_temperature: f64,
}

impl TwoSphereSystem {
    pub fn new(
        sphere1: SphereSpec,
        sphere2: SphereSpec,
        separation: f64,
        environment_temperature: f64,
    ) -> Result<Self, Error> {
        let s = Self {
            sphere1,
            sphere2,
            separation,
            environment_temperature,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.sphere1.validate()?;
        self.sphere2.validate()?;
        if !(self.environment_temperature >= 0.0) || !self.environment_temperature.is_finite() {
            return Err(Error::InvalidSystem(format!(
                "environment temperature must be >= 0 K, got {}",
                self.environment_temperature
            )));
        }
        let contact = self.sphere1.radius + self.sphere2.radius;
        if !(self.separation > contact) || !self.separation.is_finite() {
            return Err(Error::InvalidSystem(format!(
                "separation {:e} m must exceed the sum of radii {contact:e} m",
                self.separation
            )));
        }
        Ok(())
    }

    pub fn with_separation(&self, separation: f64) -> Result<Self, Error> {
        let mut s = self.clone();
        s.separation = separation;
        s.validate()?;
        Ok(s)
    }

    /// The same arrangement with the sphere labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            sphere1: self.sphere2.clone(),
            sphere2: self.sphere1.clone(),
            ..self.clone()
        }
    }

    /// d/max(R).
    pub fn validity_ratio(&self) -> f64 {
        self.separation / self.sphere1.radius.max(self.sphere2.radius)
    }

    pub fn warnings(&self) -> Result<Vec<String>, Error> {
        let mut w = Vec::new();
        if self.validity_ratio() < PROXIMITY_WARNING_RATIO {
            w.push(format!(
                "d/max(R) = {:.2} < {PROXIMITY_WARNING_RATIO}: one-reflection dipole treatment unreliable",
                self.validity_ratio()
            ));
        }
        for (name, s) in [("sphere 1", &self.sphere1), ("sphere 2", &self.sphere2)] {
            for t in [s.temperature, self.environment_temperature] {
                w.extend(dipole_warnings(s, t)?.into_iter().map(|m| format!("{name}: {m}")));
                w.extend(coverage_warning(&s.dielectric, t, name));
            }
        }
        w.dedup();
        Ok(w)
    }

    fn hints(&self) -> Vec<f64> {
        merged_hints([&self.sphere1.dielectric, &self.sphere2.dielectric])
    }
}

fn re_sum(t: &crate::materials::DipoleT) -> f64 {
    t.n.re + t.m.re
}

/// F₁²(T): force on sphere 2 from radiation emitted by sphere 1 at
/// temperature T and scattered once by sphere 2. Zero at T = 0.
pub fn interaction_force(
    sys: &TwoSphereSystem,
    temperature: f64,
    settings: &QuadratureSettings,
) -> Result<IntegralResult<f64>, Error> {
    settings.validate()?;
    if temperature <= 0.0 {
        return Ok(IntegralResult::zero());
    }
    let d = sys.separation;
    let prefactor = -HBAR / (C * PI);
    let integrand = |w: f64| {
        let t1 = sys.sphere1.t_operators(w);
        let t2 = sys.sphere2.t_operators(w);
        let x = w * d / C;
        let (x2, x3) = (x * x, x * x * x);
        let x5 = x3 * x2;
        let x7 = x5 * x2;
        let same = t1.n.re * t2.n.im + t1.m.re * t2.m.im;
        let cross = re_sum(&t1) * (9.0 / x2 * re_sum(&t2) + (t2.n.im + t2.m.im) * (9.0 / x3 + 18.0 / x5));
        w * (cross + 81.0 / x7 * same)
    };
    let raw = bose_weighted_integral(
        integrand,
        temperature,
        &raw_settings(settings, prefactor),
        &sys.hints(),
    );
    Ok(raw.scaled(prefactor))
}

const SERIES_ORDER: usize = 40;
const SERIES_SWITCH: f64 = 1.0;

/// Laurent coefficients, x⁻⁷ … x^SERIES_ORDER, of the two self-force
/// brackets multiplied by e^{2ix}.
struct SelfBracketSeries {
    same: Vec<Complex64>,
    other: Vec<Complex64>,
}

fn same_bracket_raw() -> [(usize, Complex64); 6] {
    [
        (2, Complex64::new(9.0, 0.0)),
        (3, Complex64::new(0.0, 27.0)),
        (4, Complex64::new(-72.0, 0.0)),
        (5, Complex64::new(0.0, -144.0)),
        (6, Complex64::new(162.0, 0.0)),
        (7, Complex64::new(0.0, 81.0)),
    ]
}

fn other_bracket_raw() -> [(usize, Complex64); 4] {
    [
        (2, Complex64::new(-9.0, 0.0)),
        (3, Complex64::new(0.0, -27.0)),
        (4, Complex64::new(36.0, 0.0)),
        (5, Complex64::new(0.0, 18.0)),
    ]
}

fn laurent(terms: &[(usize, Complex64)]) -> Vec<Complex64> {
    // Coefficient of x^m is Σ_j a_j (2i)^{m+j}/(m+j)!, m ≥ −7.
    let n = SERIES_ORDER + 8;
    let mut exp_series = vec![Complex64::new(1.0, 0.0); n + 8];
    for k in 1..exp_series.len() {
        exp_series[k] = exp_series[k - 1] * Complex64::new(0.0, 2.0) / k as f64;
    }
    let mut out = Vec::with_capacity(n);
    for idx in 0..n {
        let m = idx as i64 - 7;
        let mut c = Complex64::new(0.0, 0.0);
        for &(j, a) in terms {
            let k = m + j as i64;
            if k >= 0 {
                c += a * exp_series[k as usize];
            }
        }
        // Negative powers cancel exactly where they vanish; drop the rounding residue.
        if m < 0 {
            if c.re.abs() < 1e-9 {
                c.re = 0.0;
            }
            if c.im.abs() < 1e-9 {
                c.im = 0.0;
            }
        }
        out.push(c);
    }
    out
}

fn series() -> &'static SelfBracketSeries {
    static S: OnceLock<SelfBracketSeries> = OnceLock::new();
    S.get_or_init(|| SelfBracketSeries {
        same: laurent(&same_bracket_raw()),
        other: laurent(&other_bracket_raw()),
    })
}

fn eval_series(coeffs: &[Complex64], x: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc / x.powi(7)
}

fn eval_direct(terms: &[(usize, Complex64)], x: f64) -> Complex64 {
    let poly: Complex64 = terms.iter().map(|&(j, a)| a / x.powi(j as i32)).sum();
    poly * Complex64::new(0.0, 2.0 * x).exp()
}

/// (S_same(x), S_other(x)): the coefficients of T₁^P and T₁^{P̄} in the
/// self-force bracket, including the phase e^{2ix}, x = ωd/c.
pub(crate) fn self_brackets(x: f64) -> (Complex64, Complex64) {
    if x < SERIES_SWITCH {
        let s = series();
        (eval_series(&s.same, x), eval_series(&s.other, x))
    } else {
        (eval_direct(&same_bracket_raw(), x), eval_direct(&other_bracket_raw(), x))
    }
}

/// F₂²(T): force on sphere 2 from its own emission at temperature T,
/// scattered back by sphere 1. Oscillates in d with period πc/ω₀ for a
/// resonance at ω₀. Zero at T = 0.
pub fn self_force(
    sys: &TwoSphereSystem,
    temperature: f64,
    settings: &QuadratureSettings,
) -> Result<IntegralResult<f64>, Error> {
    settings.validate()?;
    if temperature <= 0.0 {
        return Ok(IntegralResult::zero());
    }
    let d = sys.separation;
    let prefactor = HBAR / (C * PI);
    let integrand = |w: f64| {
        let t1 = sys.sphere1.t_operators(w);
        let t2 = sys.sphere2.t_operators(w);
        let (same, other) = self_brackets(w * d / C);
        Polarization::BOTH
            .iter()
            .map(|&p| {
                let re2 = t2.get(p).re;
                if re2 == 0.0 {
                    return 0.0;
                }
                re2 * (same * t1.get(p) + other * t1.get(p.other())).re
            })
            .sum::<f64>()
            * w
    };
    let (lo, hi) = bose_band(temperature, settings);
    let mut hints = sys.hints();
    hints.extend(half_period_points(2.0 * d / C, lo, hi));
    let raw = bose_weighted_integral(integrand, temperature, &raw_settings(settings, prefactor), &hints);
    Ok(raw.scaled(prefactor))
}

/// x-polynomial of the dipole–dipole free-energy derivative,
/// e^{−2x}(18 + 36x + 32x² + 16x³ + 6x⁴ + 2x⁵).
fn equilibrium_kernel(x: f64) -> f64 {
    (-2.0 * x).exp() * (18.0 + x * (36.0 + x * (32.0 + x * (16.0 + x * (6.0 + 2.0 * x)))))
}

/// Equilibrium Casimir–Polder force between the two spheres at temperature
/// T, from the Matsubara sum over the imaginary-frequency electric
/// polarizabilities,
/// F = (2k_BT/d⁷) Σ'ₙ α₁(iξₙ)α₂(iξₙ) e^{−2xₙ}(18 + 36xₙ + 32xₙ² + 16xₙ³ + 6xₙ⁴ + 2xₙ⁵),
/// xₙ = ξₙd/c. At T = 0 the sum becomes (ħ/πd⁷)∫dξ of the same kernel.
pub fn equilibrium_force(
    sys: &TwoSphereSystem,
    temperature: f64,
    settings: &QuadratureSettings,
) -> Result<IntegralResult<f64>, Error> {
    settings.validate()?;
    let d = sys.separation;
    let summand = |xi: f64| -> Result<f64, Error> {
        let a1 = sys.sphere1.alpha_imag_axis(xi)?;
        let a2 = sys.sphere2.alpha_imag_axis(xi)?;
        Ok(a1 * a2 * equilibrium_kernel(xi * d / C))
    };
    // Material errors surface through a side channel; the engines take plain f64.
    let failure = std::cell::RefCell::new(None);
    let g = |xi: f64| match summand(xi) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let result = if temperature > 0.0 {
        let prefactor = 2.0 / d.powi(7);
        matsubara_sum(g, temperature, &raw_settings(settings, prefactor))?.scaled(prefactor)
    } else {
        let prefactor = HBAR / (PI * d.powi(7));
        let mut hints: Vec<f64> = sys.sphere1.dielectric.resonances();
        hints.extend(sys.sphere2.dielectric.resonances());
        evanescent_integral(g, 2.0 * d / C, &raw_settings(settings, prefactor), &hints).scaled(prefactor)
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(result)
}

/// Total force on sphere 2:
/// F^eq(T_env) + [F₁²(T₁) − F₁²(T_env)] + [F₂²(T₂) − F₂²(T_env)].
pub fn total_force_on_sphere2(sys: &TwoSphereSystem, settings: &QuadratureSettings) -> Result<ForceBreakdown, Error> {
    let warnings = sys.warnings()?;
    let t_env = sys.environment_temperature;
    let eq = equilibrium_force(sys, t_env, settings)?;
    let inter = bracket(sys.sphere1.temperature, t_env, |t| interaction_force(sys, t, settings))?;
    let own = bracket(sys.sphere2.temperature, t_env, |t| self_force(sys, t, settings))?;
    Ok(ForceBreakdown::new(eq, inter, own, warnings))
}

/// Total force on sphere 1, the sphere-2 expression with labels exchanged.
pub fn total_force_on_sphere1(sys: &TwoSphereSystem, settings: &QuadratureSettings) -> Result<ForceBreakdown, Error> {
    total_force_on_sphere2(&sys.swapped(), settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_direct_near_switch() {
        for x in [0.6, 0.9, 0.999] {
            let s = series();
            let a = eval_series(&s.same, x);
            let b = eval_direct(&same_bracket_raw(), x);
            assert!((a - b).norm() < 1e-11 * b.norm(), "{x}: {a} {b}");
            let a = eval_series(&s.other, x);
            let b = eval_direct(&other_bracket_raw(), x);
            assert!((a - b).norm() < 1e-11 * b.norm(), "{x}: {a} {b}");
        }
    }

    #[test]
    fn small_argument_structure() {
        // Re S_same = −33/(5x²) + O(1); Im S_same = 81/x⁷ + 18/x⁵ + 9/x³ + O(1).
        let x = 1e-4;
        let (same, other) = self_brackets(x);
        assert!((same.re * x * x + 33.0 / 5.0).abs() < 1e-6);
        let im = 81.0 / x.powi(7) + 18.0 / x.powi(5) + 9.0 / x.powi(3);
        assert!(((same.im - im) / im).abs() < 1e-12);
        assert!((other.re * x * x + 3.0).abs() < 1e-6);
        assert!(((other.im - (18.0 / x.powi(5) + 9.0 / x.powi(3))) * x.powi(3)).abs() < 1e-6);
    }

    #[test]
    fn equilibrium_kernel_is_minus_derivative_of_energy_polynomial() {
        // d/dx[e^{−2x}(3 + 6x + 5x² + 2x³ + x⁴)]/x⁶ relation checked numerically.
        let energy = |x: f64| (-2.0 * x).exp() * (3.0 + 6.0 * x + 5.0 * x * x + 2.0 * x.powi(3) + x.powi(4)) / x.powi(6);
        for x in [0.3, 1.0, 2.5] {
            let h = 1e-6;
            let de = (energy(x + h) - energy(x - h)) / (2.0 * h);
            let k = equilibrium_kernel(x) / x.powi(7);
            assert!((de + k).abs() < 1e-6 * k.abs(), "{x}");
        }
    }
}
