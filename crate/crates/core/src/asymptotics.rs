//! Closed-form limits of the force integrals, used as independent oracles
//! and for fast estimates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{thermal_wavelength, HBAR, C};
use crate::error::Error;
use crate::materials::{static_expansion, static_permittivity, StaticExpansion};
use crate::quadrature::QuadratureSettings;
use crate::sphere_plate::{self, SpherePlateSystem};
use crate::two_spheres::{self, TwoSphereSystem};

/// Default scale-separation factor standing in for "≫".
pub const DEFAULT_SEPARATION_RATIO: f64 = 30.0;

/// Frequency multiple of the lowest plate resonance at which the static
/// far-field Fresnel factor is taken.
pub const STATIC_FRESNEL_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Two-sphere interaction force, λ_T ≫ λ₀.
    TwoSphereLowT,
    /// Two-sphere self force, d ≫ λ_T ≫ {R, λ₀}.
    TwoSphereSelfLargeD,
    /// Two-sphere self force, λ_T ≫ {d, R, λ₀}.
    TwoSphereSelfHighLambdaT,
    /// Two-sphere equilibrium force, λ_T ≫ d ≫ {R, λ₀}.
    TwoSphereEqShort,
    /// Two-sphere equilibrium force, d ≫ {R, λ_T}.
    TwoSphereEqLong,
    /// Plate-sourced propagating force, λ_T ≫ {λ₀, R}.
    PlatePropLowT,
    /// Plate-sourced evanescent force, d ≫ λ_T ≫ {R, λ₀}.
    PlateEvanLargeD,
    /// Plate-sourced evanescent force, λ_T ≫ {d, R, λ₀}.
    PlateEvanHighLambdaT,
    /// Sphere self force in front of a plate, λ_T ≫ {d, R, λ₀}.
    PlateSelfHighLambdaT,
    /// Sphere–plate equilibrium force, λ_T ≫ d ≫ {R, λ₀}; needs Φ(ε₀).
    PlateEqShort,
    /// Sphere–plate equilibrium force, d ≫ {R, λ_T}.
    PlateEqLong,
}

impl Regime {
    pub const ALL: [Regime; 11] = [
        Regime::TwoSphereLowT,
        Regime::TwoSphereSelfLargeD,
        Regime::TwoSphereSelfHighLambdaT,
        Regime::TwoSphereEqShort,
        Regime::TwoSphereEqLong,
        Regime::PlatePropLowT,
        Regime::PlateEvanLargeD,
        Regime::PlateEvanHighLambdaT,
        Regime::PlateSelfHighLambdaT,
        Regime::PlateEqShort,
        Regime::PlateEqLong,
    ];

    pub fn is_two_sphere(self) -> bool {
        matches!(
            self,
            Regime::TwoSphereLowT
                | Regime::TwoSphereSelfLargeD
                | Regime::TwoSphereSelfHighLambdaT
                | Regime::TwoSphereEqShort
                | Regime::TwoSphereEqLong
        )
    }

    /// Power of d in the closed form (of the leading term for the
    /// interaction force).
    pub fn distance_exponent(self) -> i32 {
        match self {
            Regime::TwoSphereLowT => -2,
            Regime::TwoSphereSelfLargeD => -9,
            Regime::TwoSphereSelfHighLambdaT => -7,
            Regime::TwoSphereEqShort => -8,
            Regime::TwoSphereEqLong => -7,
            Regime::PlatePropLowT => 0,
            Regime::PlateEvanLargeD => -3,
            Regime::PlateEvanHighLambdaT => -4,
            Regime::PlateSelfHighLambdaT => -4,
            Regime::PlateEqShort => -5,
            Regime::PlateEqLong => -4,
        }
    }

    /// Checks the scale separations the closed form assumes. Each entry is
    /// (large scale, small scale) with large/small ≥ `ratio` required.
    pub fn validity(self, scales: &Scales, ratio: f64) -> Validity {
        let Scales {
            d,
            lambda_t,
            lambda_0,
            radius,
        } = *scales;
        let pairs: Vec<(&str, f64, f64)> = match self {
            Regime::TwoSphereLowT => vec![
                ("lambda_T/lambda_0", lambda_t, lambda_0),
                ("d/R", d, radius),
                ("lambda_T/R", lambda_t, radius),
            ],
            Regime::TwoSphereSelfLargeD | Regime::PlateEvanLargeD => vec![
                ("d/lambda_T", d, lambda_t),
                ("lambda_T/R", lambda_t, radius),
                ("lambda_T/lambda_0", lambda_t, lambda_0),
            ],
            Regime::TwoSphereSelfHighLambdaT | Regime::PlateEvanHighLambdaT | Regime::PlateSelfHighLambdaT => vec![
                ("lambda_T/d", lambda_t, d),
                ("lambda_T/lambda_0", lambda_t, lambda_0),
                ("d/R", d, radius),
            ],
            Regime::TwoSphereEqShort | Regime::PlateEqShort => vec![
                ("lambda_T/d", lambda_t, d),
                ("d/R", d, radius),
                ("d/lambda_0", d, lambda_0),
            ],
            Regime::TwoSphereEqLong | Regime::PlateEqLong => {
                vec![("d/lambda_T", d, lambda_t), ("d/R", d, radius)]
            }
            Regime::PlatePropLowT => vec![
                ("lambda_T/lambda_0", lambda_t, lambda_0),
                ("lambda_T/R", lambda_t, radius),
                ("d/R", d, radius),
            ],
        };
        let ratios: Vec<(String, f64)> = pairs
            .into_iter()
            .map(|(name, big, small)| (name.to_string(), if small > 0.0 { big / small } else { f64::INFINITY }))
            .collect();
        let violated = ratios
            .iter()
            .filter(|(_, r)| !(*r >= ratio))
            .map(|(n, r)| format!("{n} = {r:.3e} < {ratio}"))
            .collect();
        Validity { ratios, violated }
    }
}

/// Length scales entering the validity predicates, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scales {
    pub d: f64,
    pub lambda_t: f64,
    /// Longest resonance wavelength 2πc/ω_res among the bodies (0 if none).
    pub lambda_0: f64,
    /// Largest sphere radius.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validity {
    pub ratios: Vec<(String, f64)>,
    pub violated: Vec<String>,
}

impl Validity {
    pub fn holds(&self) -> bool {
        self.violated.is_empty()
    }
}

/// Low-frequency data of the bodies entering a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Bodies {
    TwoSpheres {
        first: StaticExpansion,
        second: StaticExpansion,
    },
    SpherePlate {
        sphere: StaticExpansion,
        /// Static permittivity of the plate.
        plate_eps0: f64,
        /// Loss length of the plate.
        plate_lambda_in: f64,
        /// ∫₀¹ t dt Σ_P(1 − |r^P|²) in the static limit.
        static_fresnel_factor: Option<f64>,
        /// External Φ(ε₀) of the short-distance equilibrium force.
        phi: Option<f64>,
    },
}

/// Closed-form force in newtons (positive = attraction) at separation d and
/// temperature T.
pub fn evaluate(regime: Regime, bodies: &Bodies, d: f64, temperature: f64) -> Result<f64, Error> {
    let hc = HBAR * C;
    let lt = thermal_wavelength(temperature);
    match (*bodies, regime.is_two_sphere()) {
        (Bodies::TwoSpheres { first, second }, true) => Ok(match regime {
            Regime::TwoSphereLowT => {
                let bracket = -32.0 * PI.powi(7) * second.lambda_in * second.alpha_i0 / (5.0 * lt)
                    + second.alpha0
                        * (32.0 * PI.powi(5) * lt / (21.0 * d)
                            + 8.0 * PI.powi(3) * lt.powi(3) / (5.0 * d.powi(3))
                            + 18.0 * PI * lt.powi(5) / d.powi(5));
                hc / (3.0 * d * d) * first.lambda_in * first.alpha_i0 / lt.powi(7) * bracket
            }
            Regime::TwoSphereSelfLargeD => {
                60.0 * hc / (PI * d.powi(9)) * second.lambda_in * second.alpha_i0 * first.alpha0
            }
            Regime::TwoSphereSelfHighLambdaT => {
                6.0 * PI * hc / (d.powi(7) * lt * lt) * second.lambda_in * second.alpha_i0 * first.alpha0
            }
            Regime::TwoSphereEqShort => 161.0 / (4.0 * PI) * hc / d.powi(8) * first.alpha0 * second.alpha0,
            Regime::TwoSphereEqLong => 18.0 * hc / (d.powi(7) * lt) * first.alpha0 * second.alpha0,
            _ => unreachable!(),
        }),
        (
            Bodies::SpherePlate {
                sphere,
                plate_eps0: e,
                plate_lambda_in,
                static_fresnel_factor,
                phi,
            },
            false,
        ) => {
            let static_r = (e - 1.0) / (e + 1.0);
            Ok(match regime {
                Regime::PlatePropLowT => {
                    let f = static_fresnel_factor.ok_or_else(|| {
                        Error::MissingParameter("static far-field Fresnel factor of the plate".into())
                    })?;
                    -8.0 * PI.powi(5) / 63.0 * hc / lt.powi(6) * f * sphere.lambda_in * sphere.alpha_i0
                }
                Regime::PlateEvanLargeD => {
                    // Re[(1 + ε₀)/√(ε₀ − 1)], zero for ε₀ < 1 where the root is imaginary.
                    let factor = if e > 1.0 { (1.0 + e) / (e - 1.0).sqrt() } else { 0.0 };
                    PI / 6.0 * hc / (lt * lt * d.powi(3)) * factor * sphere.alpha0
                }
                Regime::PlateEvanHighLambdaT => {
                    PI / 2.0 * hc * plate_lambda_in / (lt * lt * d.powi(4)) / (1.0 + e).powi(2) * sphere.alpha0
                }
                Regime::PlateSelfHighLambdaT => {
                    PI / 4.0 * hc / (lt * lt * d.powi(4)) * static_r * sphere.lambda_in * sphere.alpha_i0
                }
                Regime::PlateEqShort => {
                    let phi = phi.ok_or_else(|| {
                        Error::MissingParameter("Phi(eps0) for the short-distance sphere-plate equilibrium force".into())
                    })?;
                    3.0 / (2.0 * PI) * hc / d.powi(5) * static_r * sphere.alpha0 * phi
                }
                Regime::PlateEqLong => 3.0 * hc / (4.0 * d.powi(4) * lt) * static_r * sphere.alpha0,
                _ => unreachable!(),
            })
        }
        _ => Err(Error::InvalidSystem(format!(
            "regime {regime:?} does not apply to the given bodies"
        ))),
    }
}

/// Either geometry, for validation.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemRef<'a> {
    TwoSpheres(&'a TwoSphereSystem),
    SpherePlate(&'a SpherePlateSystem),
}

fn resonance_wavelength(models: &[&crate::materials::DielectricModel]) -> f64 {
    models
        .iter()
        .filter_map(|m| m.lowest_resonance())
        .map(crate::constants::wavelength_of)
        .fold(0.0, f64::max)
}

/// Temperature the regime's closed form refers to: the source body for
/// non-equilibrium terms, the environment for equilibrium terms.
fn regime_temperature(regime: Regime, system: &SystemRef) -> f64 {
    match (regime, system) {
        (Regime::TwoSphereLowT, SystemRef::TwoSpheres(s)) => s.sphere1.temperature,
        (Regime::TwoSphereSelfLargeD | Regime::TwoSphereSelfHighLambdaT, SystemRef::TwoSpheres(s)) => {
            s.sphere2.temperature
        }
        (_, SystemRef::TwoSpheres(s)) => s.environment_temperature,
        (
            Regime::PlatePropLowT | Regime::PlateEvanLargeD | Regime::PlateEvanHighLambdaT,
            SystemRef::SpherePlate(s),
        ) => s.plate.temperature,
        (Regime::PlateSelfHighLambdaT, SystemRef::SpherePlate(s)) => s.sphere.temperature,
        (_, SystemRef::SpherePlate(s)) => s.environment_temperature,
    }
}

/// Scales and static data of a system.
pub fn describe(system: &SystemRef, temperature: f64, phi: Option<f64>, settings: &QuadratureSettings) -> Result<(Scales, Bodies), Error> {
    match system {
        SystemRef::TwoSpheres(s) => Ok((
            Scales {
                d: s.separation,
                lambda_t: thermal_wavelength(temperature),
                lambda_0: resonance_wavelength(&[&s.sphere1.dielectric, &s.sphere2.dielectric]),
                radius: s.sphere1.radius.max(s.sphere2.radius),
            },
            Bodies::TwoSpheres {
                first: static_expansion(&s.sphere1)?,
                second: static_expansion(&s.sphere2)?,
            },
        )),
        SystemRef::SpherePlate(s) => {
            let (plate_eps0, plate_lambda_in) = static_permittivity(&s.plate.dielectric)?;
            let omega_static = STATIC_FRESNEL_FRACTION * s.plate.dielectric.lowest_resonance().unwrap_or(1.0);
            let f = sphere_plate::propagating_fresnel_factor(&s.plate, omega_static, settings).value;
            Ok((
                Scales {
                    d: s.separation,
                    lambda_t: thermal_wavelength(temperature),
                    lambda_0: resonance_wavelength(&[&s.sphere.dielectric, &s.plate.dielectric]),
                    radius: s.sphere.radius,
                },
                Bodies::SpherePlate {
                    sphere: static_expansion(&s.sphere)?,
                    plate_eps0,
                    plate_lambda_in,
                    static_fresnel_factor: Some(f),
                    phi,
                },
            ))
        }
    }
}

/// Full-integral value of the quantity a regime approximates:
/// (value, error estimate, converged).
pub fn numeric(regime: Regime, system: &SystemRef, settings: &QuadratureSettings) -> Result<(f64, f64, bool), Error> {
    let t = regime_temperature(regime, system);
    let r = match (regime, system) {
        (Regime::TwoSphereLowT, SystemRef::TwoSpheres(s)) => two_spheres::interaction_force(s, t, settings)?,
        (Regime::TwoSphereSelfLargeD | Regime::TwoSphereSelfHighLambdaT, SystemRef::TwoSpheres(s)) => {
            two_spheres::self_force(s, t, settings)?
        }
        (Regime::TwoSphereEqShort | Regime::TwoSphereEqLong, SystemRef::TwoSpheres(s)) => {
            two_spheres::equilibrium_force(s, t, settings)?
        }
        (Regime::PlatePropLowT, SystemRef::SpherePlate(s)) => {
            sphere_plate::plate_source_force(s, t, settings)?.propagating
        }
        (Regime::PlateEvanLargeD | Regime::PlateEvanHighLambdaT, SystemRef::SpherePlate(s)) => {
            sphere_plate::plate_source_force(s, t, settings)?.evanescent
        }
        (Regime::PlateSelfHighLambdaT, SystemRef::SpherePlate(s)) => sphere_plate::sphere_self_force(s, t, settings)?,
        (Regime::PlateEqShort | Regime::PlateEqLong, SystemRef::SpherePlate(s)) => {
            sphere_plate::equilibrium_force(s, t, settings)?
        }
        _ => {
            return Err(Error::InvalidSystem(format!(
                "regime {regime:?} does not apply to this geometry"
            )))
        }
    };
    Ok((r.value, r.error_estimate, r.converged))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub regime: Regime,
    pub temperature: f64,
    pub scales: Scales,
    pub numeric: f64,
    pub numeric_error_estimate: f64,
    pub converged: bool,
    pub closed_form: f64,
    pub rel_dev: f64,
    pub validity: Validity,
    pub warnings: Vec<String>,
}

/// Compares the full integral with the closed form. A violated validity
/// predicate is reported as a warning, not an error.
pub fn validate_against_numeric(
    regime: Regime,
    system: SystemRef,
    settings: &QuadratureSettings,
    separation_ratio: f64,
    phi: Option<f64>,
) -> Result<ValidationReport, Error> {
    let t = regime_temperature(regime, &system);
    let (scales, bodies) = describe(&system, t, phi, settings)?;
    let validity = regime.validity(&scales, separation_ratio);
    let closed_form = evaluate(regime, &bodies, scales.d, t)?;
    let (value, err, converged) = numeric(regime, &system, settings)?;
    let warnings = validity
        .violated
        .iter()
        .map(|v| format!("{regime:?} outside its regime: {v}"))
        .collect();
    Ok(ValidationReport {
        regime,
        temperature: t,
        scales,
        numeric: value,
        numeric_error_estimate: err,
        converged,
        closed_form,
        rel_dev: ((value - closed_form) / closed_form).abs(),
        validity,
        warnings,
    })
}

/// Local log-log slope dlnF/dlnd by central difference with relative step h.
pub fn log_slope(force: impl Fn(f64) -> Result<f64, Error>, d: f64, h: f64) -> Result<f64, Error> {
    let up = force(d * (1.0 + h))?;
    let down = force(d * (1.0 - h))?;
    Ok((up.abs().ln() - down.abs().ln()) / ((1.0 + h).ln() - (1.0 - h).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expansion(eps0: f64, lambda_in: f64, r: f64) -> StaticExpansion {
        StaticExpansion::from_eps0(eps0, lambda_in, r)
    }

    #[test]
    fn eq14_direct_arithmetic() {
        // λ_in,2·α_i0,2·α₀,₁ = 1e-55 m⁷ split as λ_in = 1e-7 m, α_i0 = 1e-18 m³, α₀ = 1e-30 m³.
        let first = StaticExpansion {
            eps0: 0.0,
            lambda_in: 0.0,
            alpha0: 1e-30,
            alpha_i0: 0.0,
        };
        let second = StaticExpansion {
            eps0: 0.0,
            lambda_in: 1e-7,
            alpha0: 0.0,
            alpha_i0: 1e-18,
        };
        let bodies = Bodies::TwoSpheres { first, second };
        let d = 1e-6;
        let lt = 763e-6;
        let t = crate::constants::temperature_for_thermal_wavelength(lt);
        let v = evaluate(Regime::TwoSphereSelfHighLambdaT, &bodies, d, t).unwrap();
        let expected = 6.0 * PI * HBAR * C * 1e-55 / (d.powi(7) * lt * lt);
        assert!(((v - expected) / expected).abs() < 1e-12);
        assert!((v / 1.023_643_919_170_445e-31 - 1.0).abs() < 1e-12, "{v:e}");
    }

    #[test]
    fn vanishing_statics_give_zero() {
        let zero = StaticExpansion {
            eps0: 1.0,
            lambda_in: 0.0,
            alpha0: 0.0,
            alpha_i0: 0.0,
        };
        let two = Bodies::TwoSpheres {
            first: zero,
            second: zero,
        };
        let plate = Bodies::SpherePlate {
            sphere: zero,
            plate_eps0: 3.7,
            plate_lambda_in: 0.0,
            static_fresnel_factor: Some(0.5),
            phi: Some(1.0),
        };
        for r in Regime::ALL {
            let b = if r.is_two_sphere() { &two } else { &plate };
            assert_eq!(evaluate(r, b, 1e-5, 300.0).unwrap(), 0.0, "{r:?}");
        }
    }

    #[test]
    fn crossover_ratio_of_large_d_and_high_lambda_t_forms() {
        let first = expansion(3.7, 1e-7, 1e-6);
        let second = expansion(3.7, 2e-7, 1e-6);
        let b = Bodies::TwoSpheres { first, second };
        let t = 300.0;
        let lt = thermal_wavelength(t);
        let large = evaluate(Regime::TwoSphereSelfLargeD, &b, lt, t).unwrap();
        let high = evaluate(Regime::TwoSphereSelfHighLambdaT, &b, lt, t).unwrap();
        // 60/(π d⁹) over 6π/(d⁷λ_T²) = 10/π² at d = λ_T.
        assert!((large / high - 10.0 / (PI * PI)).abs() < 1e-12);
    }

    #[test]
    fn printed_distance_exponents() {
        let first = expansion(3.7, 1e-7, 1e-6);
        let second = expansion(2.5, 3e-7, 1.5e-6);
        let two = Bodies::TwoSpheres { first, second };
        let plate = Bodies::SpherePlate {
            sphere: first,
            plate_eps0: 3.7,
            plate_lambda_in: 2e-7,
            static_fresnel_factor: Some(0.4),
            phi: Some(0.8),
        };
        for r in Regime::ALL {
            let b = if r.is_two_sphere() { &two } else { &plate };
            if r == Regime::TwoSphereLowT {
                continue;
            }
            let slope = log_slope(|d| evaluate(r, b, d, 300.0), 1e-5, 1e-3).unwrap();
            assert!((slope - r.distance_exponent() as f64).abs() < 1e-6, "{r:?}: {slope}");
        }
        // Interaction force: leading d⁻² term alone when α₀,₂ = 0.
        let lossy_only = Bodies::TwoSpheres {
            first,
            second: StaticExpansion { alpha0: 0.0, ..second },
        };
        let slope = log_slope(|d| evaluate(Regime::TwoSphereLowT, &lossy_only, d, 300.0), 1e-5, 1e-3).unwrap();
        assert!((slope + 2.0).abs() < 1e-6);
    }

    #[test]
    fn interaction_signs() {
        let first = expansion(3.7, 1e-7, 1e-6);
        let second = expansion(3.7, 1e-7, 1e-6);
        let lossy_only = Bodies::TwoSpheres {
            first,
            second: StaticExpansion { alpha0: 0.0, ..second },
        };
        let static_only = Bodies::TwoSpheres {
            first,
            second: StaticExpansion { lambda_in: 0.0, ..second },
        };
        assert!(evaluate(Regime::TwoSphereLowT, &lossy_only, 1e-4, 300.0).unwrap() < 0.0);
        assert!(evaluate(Regime::TwoSphereLowT, &static_only, 1e-4, 300.0).unwrap() > 0.0);
    }

    #[test]
    fn missing_phi_and_mismatched_geometry() {
        let e = expansion(3.7, 1e-7, 1e-6);
        let plate = Bodies::SpherePlate {
            sphere: e,
            plate_eps0: 3.7,
            plate_lambda_in: 1e-7,
            static_fresnel_factor: None,
            phi: None,
        };
        assert!(matches!(
            evaluate(Regime::PlateEqShort, &plate, 1e-5, 1.0),
            Err(Error::MissingParameter(_))
        ));
        assert!(evaluate(Regime::TwoSphereEqLong, &plate, 1e-5, 1.0).is_err());
    }

    #[test]
    fn validity_predicate() {
        let scales = Scales {
            d: 1e-3,
            lambda_t: 1e-5,
            lambda_0: 1e-7,
            radius: 1e-6,
        };
        assert!(Regime::TwoSphereEqLong.validity(&scales, 30.0).holds());
        let v = Regime::TwoSphereEqShort.validity(&scales, 30.0);
        assert!(!v.holds());
        assert!(v.violated[0].starts_with("lambda_T/d"));
    }
}
