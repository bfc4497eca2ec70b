//! Force-curve sweeps, equilibrium and self-propelled-pair detection, and
//! oscillation-wavelength estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::thermal_wavelength;
use crate::error::Error;
use crate::force::{axial_component, Body, ForceBreakdown};
use crate::quadrature::QuadratureSettings;
use crate::sphere_plate::{self, SpherePlateSystem};
use crate::two_spheres::{self, TwoSphereSystem};

/// Relative width in d to which roots are bisected.
pub const ROOT_REL_TOL: f64 = 1e-4;
pub const DEFAULT_GRID_POINTS: usize = 200;
/// Lower end of the default grid, in units of the largest radius.
pub const DEFAULT_GRID_MIN_RADII: f64 = 4.0;
/// Upper end of the default grid, in thermal wavelengths at the lowest
/// nonzero temperature.
pub const DEFAULT_GRID_MAX_THERMAL: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub enum System {
    TwoSpheres(TwoSphereSystem),
    SpherePlate(SpherePlateSystem),
}

impl System {
    pub fn separation(&self) -> f64 {
        match self {
            System::TwoSpheres(s) => s.separation,
            System::SpherePlate(s) => s.separation,
        }
    }

    pub fn with_separation(&self, d: f64) -> Result<Self, Error> {
        Ok(match self {
            System::TwoSpheres(s) => System::TwoSpheres(s.with_separation(d)?),
            System::SpherePlate(s) => System::SpherePlate(s.with_separation(d)?),
        })
    }

    pub fn max_radius(&self) -> f64 {
        match self {
            System::TwoSpheres(s) => s.sphere1.radius.max(s.sphere2.radius),
            System::SpherePlate(s) => s.sphere.radius,
        }
    }

    /// Closest allowed separation (exclusive).
    pub fn contact(&self) -> f64 {
        match self {
            System::TwoSpheres(s) => s.sphere1.radius + s.sphere2.radius,
            System::SpherePlate(s) => s.sphere.radius,
        }
    }

    pub fn temperatures(&self) -> Vec<f64> {
        match self {
            System::TwoSpheres(s) => vec![s.sphere1.temperature, s.sphere2.temperature, s.environment_temperature],
            System::SpherePlate(s) => vec![s.sphere.temperature, s.plate.temperature, s.environment_temperature],
        }
    }

    /// Forces on the first body (sphere 1; none for a plate) and on the
    /// second (sphere 2, or the sphere facing the plate).
    pub fn breakdowns(&self, settings: &QuadratureSettings) -> Result<(Option<ForceBreakdown>, ForceBreakdown), Error> {
        match self {
            System::TwoSpheres(s) => {
                let first = two_spheres::total_force_on_sphere1(s, settings)?;
                let second = two_spheres::total_force_on_sphere2(s, settings)?;
                Ok((Some(first), second))
            }
            System::SpherePlate(s) => Ok((None, sphere_plate::total_force_on_sphere(s, settings)?)),
        }
    }

    /// Total attraction-positive force on one body at separation d.
    pub fn total_force(&self, d: f64, body: Body, settings: &QuadratureSettings) -> Result<f64, Error> {
        let sys = self.with_separation(d)?;
        match (&sys, body) {
            (System::TwoSpheres(s), Body::First) => Ok(two_spheres::total_force_on_sphere1(s, settings)?.total),
            (System::TwoSpheres(s), Body::Second) => Ok(two_spheres::total_force_on_sphere2(s, settings)?.total),
            (System::SpherePlate(s), Body::Second) => Ok(sphere_plate::total_force_on_sphere(s, settings)?.total),
            (System::SpherePlate(_), Body::First) => Err(Error::InvalidSystem(
                "the force on the plate is not computed".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSample {
    pub d: f64,
    /// Force on sphere 1; absent for a plate.
    pub breakdown1: Option<ForceBreakdown>,
    /// Force on sphere 2, or on the sphere facing a plate.
    pub breakdown2: Option<ForceBreakdown>,
    /// Failure at this point, if any.
    pub error: Option<String>,
}

impl CurveSample {
    pub fn ok(&self) -> bool {
        self.error.is_none() && self.breakdown2.is_some()
    }

    pub fn converged(&self) -> bool {
        self.ok()
            && self.breakdown2.as_ref().is_some_and(|b| b.converged)
            && self.breakdown1.as_ref().is_none_or(|b| b.converged)
    }

    pub fn total(&self, body: Body) -> Option<f64> {
        match body {
            Body::First => self.breakdown1.as_ref().map(|b| b.total),
            Body::Second => self.breakdown2.as_ref().map(|b| b.total),
        }
    }
}

pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>, Error> {
    check_grid_ends(min, max, points)?;
    if !(min > 0.0) {
        return Err(Error::InvalidSystem("a logarithmic grid needs min > 0".into()));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let step = (max / min).ln() / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { max } else { min * (step * i as f64).exp() })
        .collect())
}

pub fn linear_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>, Error> {
    check_grid_ends(min, max, points)?;
    if points == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { max } else { min + step * i as f64 })
        .collect())
}

fn check_grid_ends(min: f64, max: f64, points: usize) -> Result<(), Error> {
    if points == 0 {
        return Err(Error::InvalidSystem("grid has no points".into()));
    }
    if !(min.is_finite() && max.is_finite()) || !(max > min || (points == 1 && max == min)) {
        return Err(Error::InvalidSystem(format!("bad grid range [{min:e}, {max:e}]")));
    }
    Ok(())
}

/// Logarithmic grid from 4 radii to 20 thermal wavelengths at the lowest
/// nonzero temperature.
pub fn default_grid(system: &System) -> Result<Vec<f64>, Error> {
    let t_min = system
        .temperatures()
        .into_iter()
        .filter(|t| *t > 0.0)
        .reduce(f64::min)
        .ok_or_else(|| Error::MissingParameter("all temperatures are zero; give the separation grid explicitly".into()))?;
    let min = DEFAULT_GRID_MIN_RADII * system.max_radius();
    let max = DEFAULT_GRID_MAX_THERMAL * thermal_wavelength(t_min);
    log_grid(min, max, DEFAULT_GRID_POINTS)
}

/// Evaluates both breakdowns on each grid point in parallel. Failures at a
/// point are stored in that sample.
pub fn force_curve(system: &System, grid: &[f64], settings: &QuadratureSettings) -> Result<Vec<CurveSample>, Error> {
    if grid.is_empty() {
        return Err(Error::InvalidSystem("empty separation grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSystem("separation grid must be strictly increasing".into()));
    }
    let contact = system.contact();
    if !(grid[0] > contact) {
        return Err(Error::InvalidSystem(format!(
            "grid starts at {:e} m, inside contact distance {contact:e} m",
            grid[0]
        )));
    }
    Ok(grid
        .par_iter()
        .map(|&d| {
            let result = system.with_separation(d).and_then(|s| s.breakdowns(settings)).and_then(|(b1, b2)| {
                let finite = |b: &ForceBreakdown| {
                    [b.equilibrium, b.interaction_from_other, b.self_emission, b.total]
                        .iter()
                        .all(|x| x.is_finite())
                };
                if finite(&b2) && b1.as_ref().is_none_or(finite) {
                    Ok((b1, b2))
                } else {
                    Err(Error::Analysis(format!("non-finite force at d = {d:e} m")))
                }
            });
            match result {
                Ok((b1, b2)) => CurveSample {
                    d,
                    breakdown1: b1,
                    breakdown2: Some(b2),
                    error: None,
                },
                Err(e) => CurveSample {
                    d,
                    breakdown1: None,
                    breakdown2: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumPoint {
    pub d_star: f64,
    pub stability: Stability,
    pub bracket: (f64, f64),
}

/// A root of a sampled function, refined by bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub bracket: (f64, f64),
    /// Function goes from negative to positive with increasing x.
    pub rising: bool,
}

/// Sign changes between consecutive finite, nonzero samples, each bisected
/// to relative width `rel_tol` with `eval`. A failed evaluation stops the
/// refinement of that root at the current bracket.
pub fn bracket_roots<E>(
    samples: &[(f64, f64)],
    rel_tol: f64,
    mut eval: impl FnMut(f64) -> Result<f64, E>,
) -> Vec<Root> {
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(_, f)| f.is_finite() && *f != 0.0)
        .collect();
    let mut roots = Vec::new();
    for w in usable.windows(2) {
        let ((mut lo, flo), (mut hi, fhi)) = (w[0], w[1]);
        if flo.signum() == fhi.signum() {
            continue;
        }
        let rising = flo < 0.0;
        while hi - lo > rel_tol * lo.abs().max(hi.abs()) {
            let mid = 0.5 * (lo + hi);
            let Ok(fm) = eval(mid) else { break };
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (fm < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(Root {
            x: 0.5 * (lo + hi),
            bracket: (lo, hi),
            rising,
        });
    }
    roots
}

/// Zeros of the total force on `body`. A zero where the force turns from
/// repulsive to attractive with increasing d is stable.
pub fn find_equilibria(
    system: &System,
    curve: &[CurveSample],
    body: Body,
    settings: &QuadratureSettings,
) -> Vec<EquilibriumPoint> {
    let samples: Vec<(f64, f64)> = curve.iter().filter_map(|s| Some((s.d, s.total(body)?))).collect();
    bracket_roots(&samples, ROOT_REL_TOL, |d| system.total_force(d, body, settings))
        .into_iter()
        .map(|r| EquilibriumPoint {
            d_star: r.x,
            stability: if r.rising { Stability::Stable } else { Stability::Unstable },
            bracket: r.bracket,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum MassModel {
    /// Solid spheres of equal density, m ∝ R³.
    SolidSpheres,
    Explicit { m1: f64, m2: f64 },
}

impl MassModel {
    pub fn masses(&self, system: &TwoSphereSystem) -> (f64, f64) {
        match *self {
            MassModel::SolidSpheres => (system.sphere1.radius.powi(3), system.sphere2.radius.powi(3)),
            MassModel::Explicit { m1, m2 } => (m1, m2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SppPoint {
    pub d_star: f64,
    pub stability: Stability,
    /// m₂/m₁.
    pub mass_ratio: f64,
    pub bracket: (f64, f64),
    /// Attraction-positive forces on spheres 1 and 2 at the root.
    pub force1: f64,
    pub force2: f64,
}

/// Separations where both spheres accelerate equally along the axis and in
/// the same, nonzero direction. Axial accelerations are a₁ = +F¹/m₁ and
/// a₂ = −F²/m₂; a root of a₂ − a₁ is stable if a₂ − a₁ decreases with d.
/// Roots where either force changes sign inside the final bracket are zero
/// force points, not pairs, and are dropped.
pub fn find_spp(
    system: &System,
    curve: &[CurveSample],
    masses: MassModel,
    settings: &QuadratureSettings,
) -> Result<Vec<SppPoint>, Error> {
    let System::TwoSpheres(two) = system else {
        return Err(Error::InvalidSystem("SPP requires two spheres".into()));
    };
    let (m1, m2) = masses.masses(two);
    if !(m1 > 0.0 && m2 > 0.0) {
        return Err(Error::InvalidSystem("masses must be positive".into()));
    }
    let relative = |f1: f64, f2: f64| axial_component(f2, Body::Second) / m2 - axial_component(f1, Body::First) / m1;
    let forces = |d: f64| -> Result<(f64, f64), Error> {
        let s = two.with_separation(d)?;
        Ok((
            two_spheres::total_force_on_sphere1(&s, settings)?.total,
            two_spheres::total_force_on_sphere2(&s, settings)?.total,
        ))
    };
    let samples: Vec<(f64, f64)> = curve
        .iter()
        .filter_map(|s| Some((s.d, relative(s.total(Body::First)?, s.total(Body::Second)?))))
        .collect();
    let roots = bracket_roots(&samples, ROOT_REL_TOL, |d| forces(d).map(|(f1, f2)| relative(f1, f2)));
    let mut out = Vec::new();
    for r in roots {
        let (lo1, lo2) = forces(r.bracket.0)?;
        let (hi1, hi2) = forces(r.bracket.1)?;
        if lo1.signum() != hi1.signum() || lo2.signum() != hi2.signum() || lo1 == 0.0 || lo2 == 0.0 {
            continue;
        }
        let (f1, f2) = forces(r.x)?;
        out.push(SppPoint {
            d_star: r.x,
            stability: if r.rising { Stability::Unstable } else { Stability::Stable },
            mass_ratio: m2 / m1,
            bracket: r.bracket,
            force1: f1,
            force2: f2,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationEstimate {
    /// Twice the mean spacing of consecutive zeros.
    pub wavelength: f64,
    /// Twice the standard deviation of the spacings.
    pub std_dev: f64,
    pub zeros: Vec<f64>,
}

pub const MIN_OSCILLATION_ZEROS: usize = 4;

/// Wavelength of an oscillating sampled function from its zero spacings;
/// zeros are located by linear interpolation between samples.
pub fn oscillation_wavelength(samples: &[(f64, f64)]) -> Result<OscillationEstimate, Error> {
    let zeros: Vec<f64> = samples
        .windows(2)
        .filter(|w| w[0].1.is_finite() && w[1].1.is_finite() && w[0].1 != 0.0 && w[0].1.signum() != w[1].1.signum())
        .map(|w| {
            let ((x0, f0), (x1, f1)) = (w[0], w[1]);
            x0 + (x1 - x0) * f0 / (f0 - f1)
        })
        .collect();
    if zeros.len() < MIN_OSCILLATION_ZEROS {
        return Err(Error::Analysis(format!(
            "{} zero crossings found, at least {MIN_OSCILLATION_ZEROS} needed",
            zeros.len()
        )));
    }
    let spacings: Vec<f64> = zeros.windows(2).map(|w| w[1] - w[0]).collect();
    let n = spacings.len() as f64;
    let mean = spacings.iter().sum::<f64>() / n;
    let var = spacings.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    Ok(OscillationEstimate {
        wavelength: 2.0 * mean,
        std_dev: 2.0 * var.sqrt(),
        zeros,
    })
}

/// Oscillation wavelength of the self-emission term on `body`.
pub fn self_term_oscillation(curve: &[CurveSample], body: Body) -> Result<OscillationEstimate, Error> {
    let samples: Vec<(f64, f64)> = curve
        .iter()
        .filter_map(|s| {
            let b = match body {
                Body::First => s.breakdown1.as_ref(),
                Body::Second => s.breakdown2.as_ref(),
            }?;
            Some((s.d, b.self_emission))
        })
        .collect();
    oscillation_wavelength(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;
    use std::f64::consts::PI;

    #[test]
    fn sine_roots_alternate() {
        let samples: Vec<(f64, f64)> = linear_grid(0.5, 20.0, 40).unwrap().into_iter().map(|x| (x, x.sin())).collect();
        let roots = bracket_roots(&samples, 1e-10, |x| Ok::<_, Infallible>(x.sin()));
        assert_eq!(roots.len(), 6);
        for (k, r) in roots.iter().enumerate() {
            assert!((r.x - PI * (k + 1) as f64).abs() < 1e-8);
            // sin falls through π, rises through 2π, ...
            assert_eq!(r.rising, k % 2 == 1);
        }
    }

    #[test]
    fn monotone_curve_has_no_roots() {
        let samples: Vec<(f64, f64)> = log_grid(1.0, 10.0, 30).unwrap().into_iter().map(|x| (x, 1.0 / x)).collect();
        assert!(bracket_roots(&samples, 1e-6, |x| Ok::<_, Infallible>(1.0 / x)).is_empty());
    }

    #[test]
    fn synthetic_oscillation_wavelength() {
        let k = 2.0 * PI / 4.75;
        let samples: Vec<(f64, f64)> = linear_grid(10.0, 60.0, 2000)
            .unwrap()
            .into_iter()
            .map(|x| (x, (k * x).cos() / x.powi(2)))
            .collect();
        let est = oscillation_wavelength(&samples).unwrap();
        assert!((est.wavelength / 4.75 - 1.0).abs() < 1e-3);
        assert!(est.std_dev < 1e-2);
    }

    #[test]
    fn too_few_zeros() {
        let samples: Vec<(f64, f64)> = linear_grid(0.0, 5.0, 50).unwrap().into_iter().map(|x| (x, x.cos())).collect();
        assert!(matches!(oscillation_wavelength(&samples), Err(Error::Analysis(_))));
    }

    #[test]
    fn grids() {
        let g = log_grid(1e-6, 1e-4, 3).unwrap();
        assert!((g[1] - 1e-5).abs() < 1e-18 && g[2] == 1e-4);
        assert_eq!(linear_grid(0.0, 1.0, 5).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(log_grid(1.0, 2.0, 0).is_err());
        assert!(log_grid(2.0, 1.0, 4).is_err());
    }
}
