use std::collections::BTreeSet;
use std::io::Write;

use neqforce::analysis::{self, CurveSample, EquilibriumPoint, Stability, System};
use neqforce::quadrature::QuadratureSettings;
use neqforce::Body;
use serde::Serialize;

use crate::config::{Case, RunConfig};
use crate::Failure;

pub const UNITS_LINE: &str =
    "# units: d_m in metres, forces in newtons; sign convention: positive = attraction; F_eq, F_interaction and F_self refer to sphere 2 (two_spheres) or the sphere (sphere_plate)";
pub const CSV_HEADER: [&str; 7] = [
    "d_m",
    "F_total_1",
    "F_total_2",
    "F_eq",
    "F_interaction",
    "F_self",
    "convergence_flag",
];

pub struct CaseCurve<'a> {
    pub case: &'a Case,
    pub samples: Vec<CurveSample>,
}

impl CaseCurve<'_> {
    pub fn failed_points(&self) -> usize {
        self.samples.iter().filter(|s| !s.ok()).count()
    }
}

/// Evaluates every case on its grid. Grid and system errors are config errors;
/// failures at single points stay in the samples.
pub fn curves<'a>(config: &RunConfig, cases: &'a [Case], settings: &QuadratureSettings) -> Result<Vec<CaseCurve<'a>>, Failure> {
    cases
        .iter()
        .map(|case| {
            let grid = config.grid_for(&case.system)?;
            log::info!("case {}: {} separations", case.label, grid.len());
            let samples = analysis::force_curve(&case.system, &grid, settings)
                .map_err(|e| Failure::config(format!("config field `d_grid`: {e}")))?;
            let warnings: BTreeSet<&String> = samples
                .iter()
                .flat_map(|s| s.breakdown2.iter().chain(s.breakdown1.iter()))
                .flat_map(|b| &b.warnings)
                .collect();
            for w in warnings {
                log::warn!("case {}: {w}", case.label);
            }
            Ok(CaseCurve { case, samples })
        })
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:.10e}")
}

fn flag(s: &CurveSample) -> String {
    match &s.error {
        Some(e) => format!("failed: {e}"),
        None if s.converged() => "ok".into(),
        None => "unconverged".into(),
    }
}

pub fn write_csv(out: &mut dyn Write, curves: &[CaseCurve]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::numerical(format!("cannot write output: {e}"));
    writeln!(out, "{UNITS_LINE}").map_err(io)?;
    let mut first = true;
    for c in curves {
        if curves.len() > 1 {
            let temps: Vec<String> = c.case.temperatures.iter().map(|(k, t)| format!("{k}={t}")).collect();
            writeln!(out, "# case: {} ({})", c.case.label, temps.join(", ")).map_err(io)?;
        }
        let mut w = csv::WriterBuilder::new().from_writer(&mut *out);
        let csv_err = |e: csv::Error| Failure::numerical(format!("cannot write output: {e}"));
        if first {
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            first = false;
        }
        for s in &c.samples {
            let total1 = s.breakdown1.as_ref().map(|b| num(b.total)).unwrap_or_default();
            let (total2, eq, inter, selfe) = match &s.breakdown2 {
                Some(b) => (num(b.total), num(b.equilibrium), num(b.interaction_from_other), num(b.self_emission)),
                None => Default::default(),
            };
            w.write_record([num(s.d), total1, total2, eq, inter, selfe, flag(s)])
                .map_err(csv_err)?;
        }
        w.flush().map_err(io)?;
    }
    Ok(())
}

#[derive(Serialize)]
pub struct EquilibriumRow {
    pub d_star_m: f64,
    pub stability: Stability,
    pub bracket_m: (f64, f64),
}

impl From<EquilibriumPoint> for EquilibriumRow {
    fn from(p: EquilibriumPoint) -> Self {
        Self {
            d_star_m: p.d_star,
            stability: p.stability,
            bracket_m: p.bracket,
        }
    }
}

#[derive(Serialize)]
struct EquilibriaCase {
    label: String,
    temperatures_k: serde_json::Map<String, serde_json::Value>,
    /// Zeros of the force on sphere 2 or on the sphere facing the plate.
    equilibria: Vec<EquilibriumRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sphere1_equilibria: Option<Vec<EquilibriumRow>>,
    failed_points: usize,
}

#[derive(Serialize)]
struct Report<T> {
    geometry: &'static str,
    sign_convention: &'static str,
    units: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass_model: Option<analysis::MassModel>,
    cases: Vec<T>,
}

fn temperatures(case: &Case) -> serde_json::Map<String, serde_json::Value> {
    case.temperatures
        .iter()
        .map(|(k, t)| (k.to_string(), serde_json::Value::from(*t)))
        .collect()
}

pub fn equilibria_json(config: &RunConfig, curves: &[CaseCurve], settings: &QuadratureSettings) -> serde_json::Value {
    let cases = curves
        .iter()
        .map(|c| {
            let sys = &c.case.system;
            let rows = |body| {
                analysis::find_equilibria(sys, &c.samples, body, settings)
                    .into_iter()
                    .map(EquilibriumRow::from)
                    .collect::<Vec<_>>()
            };
            EquilibriaCase {
                label: c.case.label.clone(),
                temperatures_k: temperatures(c.case),
                equilibria: rows(Body::Second),
                sphere1_equilibria: matches!(sys, System::TwoSpheres(_)).then(|| rows(Body::First)),
                failed_points: c.failed_points(),
            }
        })
        .collect();
    serde_json::to_value(Report {
        geometry: config.geometry(),
        sign_convention: "positive = attraction",
        units: "SI (metres, newtons)",
        mass_model: None,
        cases,
    })
    .expect("serializable report")
}

#[derive(Serialize)]
struct SppRow {
    d_star_m: f64,
    stability: Stability,
    mass_ratio: f64,
    bracket_m: (f64, f64),
    force1_n: f64,
    force2_n: f64,
}

#[derive(Serialize)]
struct SppCase {
    label: String,
    temperatures_k: serde_json::Map<String, serde_json::Value>,
    spp: Vec<SppRow>,
    failed_points: usize,
}

pub fn spp_json(config: &RunConfig, curves: &[CaseCurve], settings: &QuadratureSettings) -> Result<serde_json::Value, Failure> {
    let masses = config.masses();
    let cases = curves
        .iter()
        .map(|c| {
            let points = analysis::find_spp(&c.case.system, &c.samples, masses, settings)
                .map_err(|e| Failure::numerical(e.to_string()))?;
            Ok(SppCase {
                label: c.case.label.clone(),
                temperatures_k: temperatures(c.case),
                spp: points
                    .into_iter()
                    .map(|p| SppRow {
                        d_star_m: p.d_star,
                        stability: p.stability,
                        mass_ratio: p.mass_ratio,
                        bracket_m: p.bracket,
                        force1_n: p.force1,
                        force2_n: p.force2,
                    })
                    .collect(),
                failed_points: c.failed_points(),
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(serde_json::to_value(Report {
        geometry: config.geometry(),
        sign_convention: "positive = attraction",
        units: "SI (metres, newtons, masses in kg or any common unit)",
        mass_model: Some(masses),
        cases,
    })
    .expect("serializable report"))
}
