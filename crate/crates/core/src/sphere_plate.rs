//! A sphere at center-to-surface distance d from a half-space plate.

use std::cell::{Cell, RefCell};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::{bose_occupation, thermal_frequency, HBAR, C};
use crate::error::Error;
use crate::force::{bracket, coverage_warning, merged_hints, raw_settings, ForceBreakdown, PlateSplit};
use crate::materials::{
    dipole_warnings, fresnel_evanescent, fresnel_propagating, PlateSpec, Polarization, SphereSpec,
};
use crate::quadrature::{
    bose_band, bose_weighted_integral, evanescent_integral, half_period_points, integrate,
    matsubara_sum, IntegralResult, QuadratureSettings,
};
use crate::two_spheres::PROXIMITY_WARNING_RATIO;

#[derive(Debug, Clone, PartialEq)]
pub struct SpherePlateSystem {
    pub sphere: SphereSpec,
    pub plate: PlateSpec,
    /// Sphere center to plate surface, in metres.
    pub separation: f64,
    pub environment_temperature: f64,
}

impl SpherePlateSystem {
    pub fn new(
        sphere: SphereSpec,
        plate: PlateSpec,
        separation: f64,
        environment_temperature: f64,
    ) -> Result<Self, Error> {
        let s = Self {
            sphere,
            plate,
            separation,
            environment_temperature,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.sphere.validate()?;
        self.plate.validate()?;
        if !(self.environment_temperature >= 0.0) || !self.environment_temperature.is_finite() {
            return Err(Error::InvalidSystem(format!(
                "environment temperature must be >= 0 K, got {}",
                self.environment_temperature
            )));
        }
        if !(self.separation > self.sphere.radius) || !self.separation.is_finite() {
            return Err(Error::InvalidSystem(format!(
                "separation {:e} m must exceed the sphere radius {:e} m",
                self.separation, self.sphere.radius
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

    /// d/R.
    pub fn validity_ratio(&self) -> f64 {
        self.separation / self.sphere.radius
    }

    pub fn warnings(&self) -> Result<Vec<String>, Error> {
        let mut w = Vec::new();
        if self.validity_ratio() < PROXIMITY_WARNING_RATIO {
            w.push(format!(
                "d/R = {:.2} < {PROXIMITY_WARNING_RATIO}: one-reflection dipole treatment unreliable",
                self.validity_ratio()
            ));
        }
        for t in [self.sphere.temperature, self.environment_temperature] {
            w.extend(dipole_warnings(&self.sphere, t)?.into_iter().map(|m| format!("sphere: {m}")));
            w.extend(coverage_warning(&self.sphere.dielectric, t, "sphere"));
        }
        for t in [self.plate.temperature, self.environment_temperature] {
            w.extend(coverage_warning(&self.plate.dielectric, t, "plate"));
        }
        w.dedup();
        Ok(w)
    }

    fn hints(&self) -> Vec<f64> {
        merged_hints([&self.sphere.dielectric, &self.plate.dielectric])
    }

    fn plate_eps(&self, omega: f64) -> Complex64 {
        self.plate.dielectric.eval(omega)
    }
}

/// Fresnel reflection of the plate at (ω, vacuum k_z) for both polarizations.
fn propagating_r(plate: &PlateSpec, eps: Complex64, omega: f64, kz: f64) -> [Complex64; 2] {
    Polarization::BOTH.map(|p| fresnel_propagating(eps, plate.mu, omega, kz, p))
}

fn evanescent_r(plate: &PlateSpec, eps: Complex64, omega: f64, q: f64) -> [Complex64; 2] {
    Polarization::BOTH.map(|p| fresnel_evanescent(eps, plate.mu, omega, q, p))
}

#[cfg(test)]
fn index(p: Polarization) -> usize {
    match p {
        Polarization::M => 0,
        Polarization::N => 1,
    }
}

/// Decay constant where the medium normal wavevector changes character,
/// √(Re(εμ) − 1)·ω/c, used as an inner breakpoint.
fn critical_q(plate: &PlateSpec, eps: Complex64, omega: f64) -> Vec<f64> {
    let s = (eps * plate.mu).re - 1.0;
    if s > 0.0 {
        vec![s.sqrt() * omega / C]
    } else {
        Vec::new()
    }
}

/// Far-field emissivity factor of the plate,
/// ∫₀¹ t dt Σ_P (1 − |r^P|²) with t = k_z c/ω.
pub fn propagating_fresnel_factor(
    plate: &PlateSpec,
    omega: f64,
    settings: &QuadratureSettings,
) -> IntegralResult<f64> {
    let eps = plate.dielectric.eval(omega);
    let inner = QuadratureSettings {
        abs_floor: 0.1 * settings.rel_tol,
        ..settings.inner()
    };
    integrate(
        |t: f64| {
            let r = propagating_r(plate, eps, omega, t * omega / C);
            t * r.iter().map(|r| 1.0 - r.norm_sqr()).sum::<f64>()
        },
        0.0,
        1.0,
        &[],
        &inner,
    )
}

/// ∫₀^∞ q dq e^{−2dq} Im[r^P(1 + 2q²c²/ω²) + r^{P̄}] for both P.
fn evanescent_source_kernel(sys: &SpherePlateSystem, omega: f64, settings: &QuadratureSettings) -> [f64; 2] {
    evanescent_kernel(sys, omega, settings, |z| z.im)
}

/// ∫₀^∞ q dq e^{−2dq} part[r^P(1 + 2q²c²/ω²) + r^{P̄}] for both P.
fn evanescent_kernel(
    sys: &SpherePlateSystem,
    omega: f64,
    settings: &QuadratureSettings,
    part: impl Fn(Complex64) -> f64,
) -> [f64; 2] {
    let d = sys.separation;
    let eps = sys.plate_eps(omega);
    let k0 = omega / C;
    let scale_q = 2.0 / (2.0 * d).powi(2) + 2.0 / (k0 * k0) * 6.0 / (2.0 * d).powi(4);
    let inner = QuadratureSettings {
        abs_floor: 0.1 * settings.rel_tol * scale_q,
        ..settings.inner()
    };
    let hints = critical_q(&sys.plate, eps, omega);
    let mut out = [0.0; 2];
    // Both polarizations share the reflection coefficients; integrate them together.
    let r = evanescent_integral(
        |q: f64| {
            let r = evanescent_r(&sys.plate, eps, omega, q);
            let w = q * (-2.0 * d * q).exp();
            let f = 1.0 + 2.0 * q * q / (k0 * k0);
            Complex64::new(w * part(r[0] * f + r[1]), w * part(r[1] * f + r[0]))
        },
        2.0 * d,
        &inner,
        &hints,
    );
    out[0] = r.value.re;
    out[1] = r.value.im;
    out
}

/// Plate-sourced force on the sphere at plate temperature T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlateSourceForce {
    /// d-independent far-field part.
    pub propagating: IntegralResult<f64>,
    /// Near-field part, decaying with d.
    pub evanescent: IntegralResult<f64>,
}

impl PlateSourceForce {
    pub fn total(&self) -> IntegralResult<f64> {
        self.propagating.plus(self.evanescent)
    }
}

/// F_p^s(T): force on the sphere from radiation emitted by the plate at
/// temperature T, split into propagating and evanescent waves.
pub fn plate_source_force(
    sys: &SpherePlateSystem,
    temperature: f64,
    settings: &QuadratureSettings,
) -> Result<PlateSourceForce, Error> {
    settings.validate()?;
    if temperature <= 0.0 {
        return Ok(PlateSourceForce {
            propagating: IntegralResult::zero(),
            evanescent: IntegralResult::zero(),
        });
    }
    let prefactor = 3.0 * HBAR / (2.0 * C * PI);
    let raw = raw_settings(settings, prefactor);
    let hints = sys.hints();
    let propagating = bose_weighted_integral(
        |w: f64| {
            let t = sys.sphere.t_operators(w);
            let re = t.n.re + t.m.re;
            if re == 0.0 {
                return 0.0;
            }
            w * re * propagating_fresnel_factor(&sys.plate, w, settings).value
        },
        temperature,
        &raw,
        &hints,
    );
    let evanescent = bose_weighted_integral(
        |w: f64| {
            let t = sys.sphere.t_operators(w);
            if t.n.im == 0.0 && t.m.im == 0.0 {
                return 0.0;
            }
            let k = evanescent_source_kernel(sys, w, settings);
            let c_over_w = C / w;
            w * 2.0 * c_over_w * c_over_w * (t.m.im * k[0] + t.n.im * k[1])
        },
        temperature,
        &raw,
        &hints,
    );
    Ok(PlateSourceForce {
        propagating: propagating.scaled(prefactor),
        evanescent: evanescent.scaled(prefactor),
    })
}

/// F_s^s(T): force on the sphere from its own emission at temperature T,
/// reflected by the plate. Oscillates in d; zero at T = 0.
pub fn sphere_self_force(
    sys: &SpherePlateSystem,
    temperature: f64,
    settings: &QuadratureSettings,
) -> Result<IntegralResult<f64>, Error> {
    settings.validate()?;
    if temperature <= 0.0 {
        return Ok(IntegralResult::zero());
    }
    let prefactor = -3.0 * HBAR * C / PI;
    let raw = raw_settings(settings, prefactor);
    let evanescent = bose_weighted_integral(
        |w: f64| {
            let t = sys.sphere.t_operators(w);
            let re = [t.m.re, t.n.re];
            if re == [0.0, 0.0] {
                return 0.0;
            }
            let ev = evanescent_kernel(sys, w, settings, |z| z.re);
            (re[0] * ev[0] + re[1] * ev[1]) / w
        },
        temperature,
        &raw,
        &sys.hints(),
    );
    let propagating = propagating_self_force_raw(sys, temperature, &raw);
    Ok(propagating.plus(evanescent).scaled(prefactor))
}

/// Propagating part of the self force without its prefactor,
/// ∫dω n Σ_P Re T^P/ω ∫₀^{ω/c} k_z dk_z Re{e^{2idk_z}[r^P(1 − 2k_z²c²/ω²) + r^{P̄}]},
/// integrated with k_z outside: the inner frequency integral does not depend
/// on d and does not oscillate, so the cost grows only linearly with d.
fn propagating_self_force_raw(
    sys: &SpherePlateSystem,
    temperature: f64,
    settings: &QuadratureSettings,
) -> IntegralResult<f64> {
    let d = sys.separation;
    let (_, omega_max) = bose_band(temperature, settings);
    let wt = thermal_frequency(temperature);
    let mut inner_hints = sys.hints();
    inner_hints.extend([1.0, 4.0, 12.0].map(|x| x * wt));
    let inner = settings.inner();
    let inner_converged = Cell::new(true);
    let spectral = |kz: f64| -> Complex64 {
        let h = integrate(
            |w: f64| {
                let t = sys.sphere.t_operators(w);
                let re = [t.m.re, t.n.re];
                if re == [0.0, 0.0] {
                    return Complex64::new(0.0, 0.0);
                }
                let eps = sys.plate_eps(w);
                let r = propagating_r(&sys.plate, eps, w, kz);
                let t2 = (kz * C / w).powi(2);
                let g = (re[0] * (r[0] * (1.0 - 2.0 * t2) + r[1]) + re[1] * (r[1] * (1.0 - 2.0 * t2) + r[0])) / w;
                g * bose_occupation(w, temperature)
            },
            kz * C,
            omega_max,
            &inner_hints,
            &inner,
        );
        if !h.converged {
            inner_converged.set(false);
        }
        h.value
    };
    let kz_max = omega_max / C;
    let mut hints: Vec<f64> = inner_hints.iter().map(|w| w / C).collect();
    hints.extend(half_period_points(2.0 * d, 0.0, kz_max));
    let mut out = integrate(
        |kz: f64| kz * (spectral(kz) * Complex64::new(0.0, 2.0 * d * kz).exp()).re,
        0.0,
        kz_max,
        &hints,
        settings,
    );
    out.converged &= inner_converged.get();
    out
}

/// Imaginary-frequency reflection coefficients (TM, TE) at decay constant
/// q ≥ ξ/c.
fn imaginary_axis_r(eps: f64, mu: f64, xi: f64, q: f64) -> (f64, f64) {
    let km = (q * q + (eps * mu - 1.0) * (xi / C).powi(2)).sqrt();
    ((eps * q - km) / (eps * q + km), (mu * q - km) / (mu * q + km))
}

/// Equilibrium Casimir–Polder force on the sphere at temperature T:
/// F = 2k_BT Σ'ₙ α(iξₙ) ∫_{ξₙ/c}^∞ q³ e^{−2qd}[2r_TM − ξₙ²/(q²c²)(r_TM + r_TE)] dq,
/// and (ħ/π)∫dξ of the same summand at T = 0. Electric dipole response of
/// the sphere only.
pub fn equilibrium_force(
    sys: &SpherePlateSystem,
    temperature: f64,
    settings: &QuadratureSettings,
) -> Result<IntegralResult<f64>, Error> {
    settings.validate()?;
    let d = sys.separation;
    let mu = sys.plate.mu.re;
    let inner = settings.inner();
    let summand = |xi: f64| -> Result<f64, Error> {
        let alpha = sys.sphere.alpha_imag_axis(xi)?;
        if alpha == 0.0 {
            return Ok(0.0);
        }
        let eps = sys.plate.dielectric.epsilon_imag_axis(xi)?;
        let q0 = xi / C;
        let scale = (-2.0 * q0 * d).exp();
        if scale == 0.0 {
            return Ok(0.0);
        }
        let r = evanescent_integral(
            |u: f64| {
                let q = q0 + u;
                let (tm, te) = imaginary_axis_r(eps, mu, xi, q);
                let ratio = if q > 0.0 { (q0 / q).powi(2) } else { 0.0 };
                q.powi(3) * (-2.0 * d * u).exp() * (2.0 * tm - ratio * (tm + te))
            },
            2.0 * d,
            &QuadratureSettings {
                abs_floor: 0.0,
                ..inner
            },
            &[],
        );
        Ok(alpha * scale * r.value)
    };
    let failure = RefCell::new(None);
    let g = |xi: f64| match summand(xi) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let result = if temperature > 0.0 {
        let prefactor = 2.0;
        matsubara_sum(g, temperature, &raw_settings(settings, prefactor))?.scaled(prefactor)
    } else {
        let prefactor = HBAR / PI;
        let mut hints = sys.sphere.dielectric.resonances();
        hints.extend(sys.plate.dielectric.resonances());
        evanescent_integral(g, 2.0 * d / C, &raw_settings(settings, prefactor), &hints).scaled(prefactor)
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(result)
}

/// Total force on the sphere:
/// F^eq(T_env) + [F_p(T_p) − F_p(T_env)] + [F_s(T_s) − F_s(T_env)],
/// with the plate-sourced bracket also reported by wave type.
pub fn total_force_on_sphere(sys: &SpherePlateSystem, settings: &QuadratureSettings) -> Result<ForceBreakdown, Error> {
    let warnings = sys.warnings()?;
    let t_env = sys.environment_temperature;
    let eq = equilibrium_force(sys, t_env, settings)?;
    let (pr, ev) = if sys.plate.temperature == t_env {
        (IntegralResult::zero(), IntegralResult::zero())
    } else {
        let hot = plate_source_force(sys, sys.plate.temperature, settings)?;
        let env = plate_source_force(sys, t_env, settings)?;
        (
            hot.propagating.minus(env.propagating),
            hot.evanescent.minus(env.evanescent),
        )
    };
    let own = bracket(sys.sphere.temperature, t_env, |t| sphere_self_force(sys, t, settings))?;
    let split = PlateSplit {
        propagating: pr.value,
        evanescent: ev.value,
    };
    Ok(ForceBreakdown::new(eq, pr.plus(ev), own, warnings).with_plate_split(split))
}

/// ∫₀^{ω/c} k_z dk_z Re{e^{2idk_z}[r^P(1 − 2k_z²c²/ω²) + r^{P̄}]} for both P.
#[cfg(test)]
fn propagating_self_kernel(sys: &SpherePlateSystem, omega: f64, settings: &QuadratureSettings) -> [f64; 2] {
    let d = sys.separation;
    let eps = sys.plate_eps(omega);
    let k0 = omega / C;
    let inner = QuadratureSettings {
        abs_floor: 0.1 * settings.rel_tol * k0 * k0,
        ..settings.inner()
    };
    let mut out = [0.0; 2];
    for p in Polarization::BOTH {
        let i = index(p);
        let r = crate::quadrature::oscillatory_tail_integral(
            |kz: f64| {
                let r = propagating_r(&sys.plate, eps, omega, kz);
                let t2 = (kz / k0).powi(2);
                (r[i] * (1.0 - 2.0 * t2) + r[1 - i]) * kz
            },
            2.0 * d,
            k0,
            &inner,
            &[],
        );
        out[i] = r.value.re;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{library, DielectricModel};

    #[test]
    fn swapped_order_matches_nested_propagating_self_force() {
        let m = library::sio2;
        let sys = SpherePlateSystem::new(
            SphereSpec::new(1e-6, m(), 300.0).unwrap(),
            PlateSpec::new(m(), 0.0).unwrap(),
            12e-6,
            0.0,
        )
        .unwrap();
        let s = QuadratureSettings {
            rel_tol: 1e-7,
            abs_floor: 0.0,
            ..Default::default()
        };
        let swapped = propagating_self_force_raw(&sys, 300.0, &s);
        let (lo, hi) = bose_band(300.0, &s);
        let mut hints = sys.hints();
        hints.extend(half_period_points(2.0 * sys.separation / C, lo, hi));
        let nested = bose_weighted_integral(
            |w: f64| {
                let t = sys.sphere.t_operators(w);
                let k = propagating_self_kernel(&sys, w, &s);
                (t.m.re * k[0] + t.n.re * k[1]) / w
            },
            300.0,
            &s,
            &hints,
        );
        assert!(swapped.converged && nested.converged);
        assert!(
            (swapped.value / nested.value - 1.0).abs() < 1e-6,
            "{:e} vs {:e}",
            swapped.value,
            nested.value
        );
    }

    #[test]
    fn imaginary_axis_static_reflection() {
        let (tm, te) = imaginary_axis_r(3.7, 1.0, 0.0, 1e5);
        assert!((tm - 2.7 / 4.7).abs() < 1e-15);
        assert_eq!(te, 0.0);
        let (tm, te) = imaginary_axis_r(1.0, 1.0, 1e14, 1e6);
        assert_eq!((tm, te), (0.0, 0.0));
    }

    #[test]
    fn fresnel_factor_limits() {
        let s = QuadratureSettings::default();
        let vacuum = PlateSpec::new(DielectricModel::constant(1.0), 0.0).unwrap();
        let f = propagating_fresnel_factor(&vacuum, 1e14, &s);
        assert!((f.value - 1.0).abs() < 1e-12);
        let mirror = PlateSpec::new(DielectricModel::constant(1e12), 0.0).unwrap();
        assert!(propagating_fresnel_factor(&mirror, 1e14, &s).value < 1e-4);
    }
}
