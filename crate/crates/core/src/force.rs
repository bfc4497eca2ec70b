//! Force bookkeeping shared by both geometries.

use serde::Serialize;

use crate::constants::thermal_frequency;
use crate::materials::DielectricModel;
use crate::quadrature::{IntegralResult, QuadratureSettings};

/// The only sign convention used for scalar forces: positive values pull the
/// bodies together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignConvention {
    #[serde(rename = "positive = attraction")]
    AttractionPositive,
}

/// Plate-sourced force split into far-field and near-field waves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlateSplit {
    pub propagating: f64,
    pub evanescent: f64,
}

/// Force on one body: equilibrium part at the environment temperature plus
/// the two non-equilibrium brackets, F(T_source) − F(T_env).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceBreakdown {
    pub equilibrium: f64,
    pub interaction_from_other: f64,
    pub self_emission: f64,
    pub total: f64,
    convention: SignConvention,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plate_split: Option<PlateSplit>,
    pub error_estimate: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl ForceBreakdown {
    pub fn new(
        equilibrium: IntegralResult<f64>,
        interaction: IntegralResult<f64>,
        self_emission: IntegralResult<f64>,
        warnings: Vec<String>,
    ) -> Self {
        Self {
            equilibrium: equilibrium.value,
            interaction_from_other: interaction.value,
            self_emission: self_emission.value,
            total: equilibrium.value + interaction.value + self_emission.value,
            convention: SignConvention::AttractionPositive,
            plate_split: None,
            error_estimate: equilibrium.error_estimate
                + interaction.error_estimate
                + self_emission.error_estimate,
            converged: equilibrium.converged && interaction.converged && self_emission.converged,
            warnings,
        }
    }

    pub fn with_plate_split(mut self, split: PlateSplit) -> Self {
        self.plate_split = Some(split);
        self
    }

    pub fn convention(&self) -> SignConvention {
        self.convention
    }

    pub fn non_equilibrium(&self) -> f64 {
        self.interaction_from_other + self.self_emission
    }
}

/// Which end of the axis a body sits on. The axis points from the first body
/// (sphere 1) to the second (sphere 2, or the sphere facing a plate).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Body {
    First,
    Second,
}

/// Signed axial component of an attraction-positive force: attraction pulls
/// the first body along +axis and the second along −axis.
pub fn axial_component(attraction_positive: f64, body: Body) -> f64 {
    match body {
        Body::First => attraction_positive,
        Body::Second => -attraction_positive,
    }
}

/// F(T_source) − F(T_env), exactly zero when the temperatures coincide.
pub(crate) fn bracket<E>(
    t_source: f64,
    t_env: f64,
    mut force_at: impl FnMut(f64) -> Result<IntegralResult<f64>, E>,
) -> Result<IntegralResult<f64>, E> {
    if t_source == t_env {
        return Ok(IntegralResult::zero());
    }
    Ok(force_at(t_source)?.minus(force_at(t_env)?))
}

/// Settings for a raw integral that is multiplied by `prefactor` afterwards,
/// so the absolute floor stays in newtons.
pub(crate) fn raw_settings(settings: &QuadratureSettings, prefactor: f64) -> QuadratureSettings {
    QuadratureSettings {
        abs_floor: settings.abs_floor / prefactor.abs(),
        ..*settings
    }
}

/// Warns when tabulated data do not cover the thermally relevant band
/// [0.05, 20]·k_BT/ħ; outside its samples a table is held constant.
pub(crate) fn coverage_warning(model: &DielectricModel, temperature: f64, body: &str) -> Option<String> {
    if temperature <= 0.0 {
        return None;
    }
    let wt = thermal_frequency(temperature);
    let (lo, hi) = (0.05 * wt, 20.0 * wt);
    model.check_coverage(lo, hi).err().map(|e| {
        format!("{body}: thermal band at {temperature} K not covered by the data ({e}); values held constant outside")
    })
}

/// Union of breakpoint hints, sorted.
pub(crate) fn merged_hints<'a>(models: impl IntoIterator<Item = &'a DielectricModel>) -> Vec<f64> {
    let mut h: Vec<f64> = models.into_iter().flat_map(|m| m.spectral_hints()).collect();
    h.sort_by(f64::total_cmp);
    h.dedup();
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> IntegralResult<f64> {
        IntegralResult {
            value: v,
            error_estimate: 0.0,
            evaluations: 1,
            converged: true,
        }
    }

    #[test]
    fn total_is_sum_of_parts() {
        let b = ForceBreakdown::new(r(1.0), r(-0.25), r(0.5), vec![]);
        assert_eq!(b.total, 1.25);
        assert_eq!(b.convention(), SignConvention::AttractionPositive);
        let json = serde_json::to_string(&b).unwrap();
        assert!(json.contains("positive = attraction"));
    }

    #[test]
    fn axial_signs() {
        assert_eq!(axial_component(2.0, Body::First), 2.0);
        assert_eq!(axial_component(2.0, Body::Second), -2.0);
    }

    #[test]
    fn equal_temperatures_skip_evaluation() {
        let b = bracket::<()>(300.0, 300.0, |_| panic!("not evaluated")).unwrap();
        assert_eq!(b.value, 0.0);
        let b = bracket::<()>(300.0, 0.0, |t| Ok(r(t))).unwrap();
        assert_eq!(b.value, 300.0);
    }
}
