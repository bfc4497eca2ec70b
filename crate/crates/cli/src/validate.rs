//! Closed-form limits checked against the full integrals.

use std::path::Path;

use neqforce::asymptotics::{log_slope, validate_against_numeric, Regime, SystemRef, DEFAULT_SEPARATION_RATIO};
use neqforce::constants::{temperature_for_thermal_wavelength, thermal_wavelength, wavelength_of};
use neqforce::materials::{DielectricModel, PlateSpec, SphereSpec};
use neqforce::quadrature::QuadratureSettings;
use neqforce::sphere_plate::{self, SpherePlateSystem};
use neqforce::two_spheres::TwoSphereSystem;
use serde::{Deserialize, Serialize};

use crate::config::{parse_json, resolve_material, MaterialRef, UM};
use crate::Failure;

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// |numeric/closed form − 1| ≤ tolerance.
    ClosedForm,
    /// |dlnF/dlnd − exponent| ≤ tolerance, for the equilibrium force.
    Slope,
}

/// The source temperature is given either directly or through λ_T; the other
/// bodies sit at 0 K, except for equilibrium regimes where everything is at T.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub id: String,
    pub regime: Regime,
    pub d_um: f64,
    #[serde(default)]
    pub lambda_t_um: Option<f64>,
    #[serde(default)]
    pub temperature_k: Option<f64>,
    pub radius_um: f64,
    pub tolerance: f64,
    #[serde(default = "closed_form")]
    pub check: Check,
    #[serde(default)]
    pub phi: Option<f64>,
}

fn closed_form() -> Check {
    Check::ClosedForm
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default)]
    pub material: Option<MaterialRef>,
    #[serde(default)]
    pub separation_ratio: Option<f64>,
    #[serde(default)]
    pub quadrature: Option<QuadratureSettings>,
    #[serde(default)]
    pub cases: Option<Vec<CaseConfig>>,
    #[serde(default)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub id: String,
    pub regime: Regime,
    pub check: Check,
    pub status: Status,
    pub d_m: f64,
    pub temperature_k: f64,
    pub lambda_t_m: f64,
    pub numeric: Option<f64>,
    pub expected: Option<f64>,
    /// Relative deviation for closed-form checks, absolute slope error for slope checks.
    pub deviation: Option<f64>,
    pub tolerance: f64,
    pub converged: Option<bool>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub separation_ratio: f64,
    pub rel_tol: f64,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub cases: Vec<CaseReport>,
}

impl ValidationSummary {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<22} {:<26} {:<8} {:>11} {:>11} {:>10} {:>8}\n",
            "id", "regime", "status", "numeric", "expected", "deviation", "tol"
        );
        let opt = |x: Option<f64>, w: usize| match x {
            Some(v) => format!("{v:>w$.4e}"),
            None => format!("{:>w$}", "-"),
        };
        for c in &self.cases {
            s.push_str(&format!(
                "{:<22} {:<26} {:<8} {} {} {} {:>8}\n",
                c.id,
                format!("{:?}", c.regime),
                format!("{:?}", c.status).to_lowercase(),
                opt(c.numeric, 11),
                opt(c.expected, 11),
                opt(c.deviation, 10),
                c.tolerance
            ));
        }
        s.push_str(&format!("{} passed, {} failed, {} skipped\n", self.passed, self.failed, self.skipped));
        s
    }
}

fn case(id: &str, regime: Regime, d: f64, lambda_t: Option<f64>, radius: f64, tolerance: f64) -> CaseConfig {
    CaseConfig {
        id: id.into(),
        regime,
        d_um: d / UM,
        lambda_t_um: lambda_t.map(|l| l / UM),
        temperature_k: None,
        radius_um: radius / UM,
        tolerance,
        check: Check::ClosedForm,
        phi: None,
    }
}

/// Default suite for a material with resonance wavelength `l0`: one point per
/// regime, placed well inside its scale separations.
pub fn default_cases(l0: f64) -> Vec<CaseConfig> {
    use Regime::*;
    let lt300 = thermal_wavelength(300.0);
    let lt = 100.0 * l0;
    let mut v = vec![
        case("interaction_near", TwoSphereLowT, 0.1 * lt, Some(lt), UM, 0.05),
        case("interaction_mid", TwoSphereLowT, lt, Some(lt), UM, 0.05),
        case("interaction_far", TwoSphereLowT, 10.0 * lt, Some(lt), UM, 0.05),
        case("sphere_self_far", TwoSphereSelfLargeD, 1000.0 * l0, Some(30.0 * l0), UM, 0.05),
        case("sphere_self_near", TwoSphereSelfHighLambdaT, 10.0 * UM, Some((300.0 * UM).max(30.0 * l0)), 0.3 * UM, 0.05),
        case("sphere_eq_short", TwoSphereEqShort, 30.0 * l0, Some(3000.0 * l0), UM, 0.02),
        case("sphere_eq_long", TwoSphereEqLong, 100.0 * lt300, Some(lt300), UM, 0.02),
        case("plate_propagating", PlatePropLowT, 10.0 * UM, Some(lt), 0.3 * UM, 0.05),
        // First correction to the large-d evanescent force is ≈ 1.8 λ_T/d.
        case("plate_evanescent_far", PlateEvanLargeD, 3000.0 * l0, Some(30.0 * l0), UM, 0.05),
        case("plate_evanescent_near", PlateEvanHighLambdaT, 3.0 * UM, Some((300.0 * UM).max(30.0 * l0)), 0.1 * UM, 0.05),
        case("plate_self_near", PlateSelfHighLambdaT, 3.0 * UM, Some((300.0 * UM).max(30.0 * l0)), 0.1 * UM, 0.05),
        case("plate_eq_long", PlateEqLong, 100.0 * lt300, Some(lt300), UM, 0.03),
    ];
    v.push(CaseConfig {
        check: Check::Slope,
        ..case("plate_eq_short_slope", PlateEqShort, 100.0 * l0, None, UM, 0.05)
    });
    v
}

enum Built {
    Two(TwoSphereSystem),
    Plate(SpherePlateSystem),
}

impl Built {
    fn as_ref(&self) -> SystemRef<'_> {
        match self {
            Built::Two(s) => SystemRef::TwoSpheres(s),
            Built::Plate(s) => SystemRef::SpherePlate(s),
        }
    }
}

fn build(regime: Regime, model: &DielectricModel, d: f64, t: f64, r: f64) -> Result<Built, neqforce::Error> {
    use Regime::*;
    let sphere = |temp: f64| SphereSpec::new(r, model.clone(), temp);
    let two = |t1: f64, t2: f64, env: f64| -> Result<Built, neqforce::Error> {
        Ok(Built::Two(TwoSphereSystem::new(sphere(t1)?, sphere(t2)?, d, env)?))
    };
    let plate = |ts: f64, tp: f64, env: f64| -> Result<Built, neqforce::Error> {
        Ok(Built::Plate(SpherePlateSystem::new(sphere(ts)?, PlateSpec::new(model.clone(), tp)?, d, env)?))
    };
    match regime {
        TwoSphereLowT => two(t, 0.0, 0.0),
        TwoSphereSelfLargeD | TwoSphereSelfHighLambdaT => two(0.0, t, 0.0),
        TwoSphereEqShort | TwoSphereEqLong => two(t, t, t),
        PlatePropLowT | PlateEvanLargeD | PlateEvanHighLambdaT => plate(0.0, t, 0.0),
        PlateSelfHighLambdaT => plate(t, 0.0, 0.0),
        PlateEqShort | PlateEqLong => plate(t, t, t),
    }
}

fn run_case(c: &CaseConfig, model: &DielectricModel, ratio: f64, settings: &QuadratureSettings) -> Result<CaseReport, Failure> {
    let field = |msg: String| Failure::config(format!("config field `cases[{}]`: {msg}", c.id));
    let t = match (c.temperature_k, c.lambda_t_um) {
        (Some(_), Some(_)) => return Err(field("give temperature_k or lambda_t_um, not both".into())),
        (Some(t), None) => t,
        (None, Some(l)) => temperature_for_thermal_wavelength(l * UM),
        (None, None) => 0.0,
    };
    let d = c.d_um * UM;
    let built = build(c.regime, model, d, t, c.radius_um * UM).map_err(|e| field(e.to_string()))?;
    let mut report = CaseReport {
        id: c.id.clone(),
        regime: c.regime,
        check: c.check,
        status: Status::Error,
        d_m: d,
        temperature_k: t,
        lambda_t_m: thermal_wavelength(t),
        numeric: None,
        expected: None,
        deviation: None,
        tolerance: c.tolerance,
        converged: None,
        warnings: Vec::new(),
    };
    match c.check {
        Check::ClosedForm => match validate_against_numeric(c.regime, built.as_ref(), settings, ratio, c.phi) {
            Ok(r) => {
                report.numeric = Some(r.numeric);
                report.expected = Some(r.closed_form);
                report.deviation = Some(r.rel_dev);
                report.converged = Some(r.converged);
                report.warnings = r.warnings;
                report.status = if !r.validity.holds() {
                    Status::Skipped
                } else if r.rel_dev <= c.tolerance {
                    Status::Pass
                } else {
                    Status::Fail
                };
            }
            Err(neqforce::Error::MissingParameter(m)) => return Err(field(format!("missing parameter: {m}"))),
            Err(e) => report.warnings.push(e.to_string()),
        },
        Check::Slope => {
            let Built::Plate(base) = &built else {
                return Err(field("slope checks are available for sphere-plate equilibrium regimes".into()));
            };
            if !matches!(c.regime, Regime::PlateEqShort | Regime::PlateEqLong) {
                return Err(field("slope checks are available for sphere-plate equilibrium regimes".into()));
            }
            let slope = log_slope(
                |x| Ok(sphere_plate::equilibrium_force(&base.with_separation(x)?, t, settings)?.value),
                d,
                0.01,
            );
            match slope {
                Ok(s) => {
                    let expected = c.regime.distance_exponent() as f64;
                    report.numeric = Some(s);
                    report.expected = Some(expected);
                    report.deviation = Some((s - expected).abs());
                    report.status = if (s - expected).abs() <= c.tolerance { Status::Pass } else { Status::Fail };
                }
                Err(e) => report.warnings.push(e.to_string()),
            }
        }
    }
    Ok(report)
}

pub fn run(config: Option<(ValidateConfig, &Path)>, rel_tol: Option<f64>) -> Result<ValidationSummary, Failure> {
    let (cfg, base_dir) = config.unwrap_or((ValidateConfig::default(), Path::new(".")));
    let model = match &cfg.material {
        Some(m) => resolve_material(m, None, base_dir, "material")?,
        None => neqforce::materials::library::single_lorentz(),
    };
    let mut settings = cfg.quadrature.unwrap_or(QuadratureSettings {
        abs_floor: 0.0,
        ..Default::default()
    });
    if let Some(r) = rel_tol {
        settings.rel_tol = r;
    }
    settings.validate().map_err(|e| Failure::config(format!("config field `quadrature`: {e}")))?;
    let ratio = cfg.separation_ratio.unwrap_or(DEFAULT_SEPARATION_RATIO);
    let cases = match cfg.cases {
        Some(c) => c,
        None => {
            let l0 = model
                .lowest_resonance()
                .map(wavelength_of)
                .ok_or_else(|| Failure::config("config field `material`: the default suite needs a resonant material"))?;
            default_cases(l0)
        }
    };
    let reports = cases
        .iter()
        .map(|c| run_case(c, &model, ratio, &settings))
        .collect::<Result<Vec<_>, Failure>>()?;
    for r in &reports {
        for w in &r.warnings {
            log::warn!("{}: {w}", r.id);
        }
    }
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    Ok(ValidationSummary {
        separation_ratio: ratio,
        rel_tol: settings.rel_tol,
        passed: count(Status::Pass),
        failed: count(Status::Fail) + count(Status::Error),
        skipped: count(Status::Skipped),
        cases: reports,
    })
}

pub fn parse(text: &str) -> Result<ValidateConfig, Failure> {
    parse_json(text)
}
