//! Run configuration: JSON in micrometres and kelvin, resolved into SI systems.

use std::path::{Path, PathBuf};

use neqforce::analysis::{self, MassModel, System};
use neqforce::materials::library::{self, MaterialDefinition};
use neqforce::materials::{DielectricModel, PlateSpec, SphereSpec};
use neqforce::quadrature::QuadratureSettings;
use neqforce::sphere_plate::SpherePlateSystem;
use neqforce::two_spheres::TwoSphereSystem;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::Failure;

/// Exact micrometre to metre factor.
pub const UM: f64 = 1e-6;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MaterialRef {
    Name(String),
    File { file: PathBuf },
    Inline(MaterialDefinition),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereConfig {
    pub material: MaterialRef,
    pub radius_um: f64,
    pub temperature_k: f64,
    /// ε̃(ω) = ε(s·ω) applied after the material is resolved.
    #[serde(default)]
    pub frequency_scale: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateConfig {
    pub material: MaterialRef,
    pub temperature_k: f64,
    #[serde(default)]
    pub frequency_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Lin,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min_um: f64,
    pub max_um: f64,
    pub points: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Log
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSphereCase {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub sphere1_k: Option<f64>,
    #[serde(default)]
    pub sphere2_k: Option<f64>,
    #[serde(default)]
    pub environment_k: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpherePlateCase {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub sphere_k: Option<f64>,
    #[serde(default)]
    pub plate_k: Option<f64>,
    #[serde(default)]
    pub environment_k: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSphereConfig {
    pub sphere1: SphereConfig,
    pub sphere2: SphereConfig,
    pub environment_temperature_k: f64,
    #[serde(default)]
    pub d_grid: Option<GridConfig>,
    #[serde(default)]
    pub quadrature: Option<QuadratureSettings>,
    #[serde(default)]
    pub masses: Option<MassModel>,
    #[serde(default)]
    pub temperature_cases: Option<Vec<TwoSphereCase>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpherePlateConfig {
    pub sphere: SphereConfig,
    pub plate: PlateConfig,
    pub environment_temperature_k: f64,
    #[serde(default)]
    pub d_grid: Option<GridConfig>,
    #[serde(default)]
    pub quadrature: Option<QuadratureSettings>,
    #[serde(default)]
    pub masses: Option<MassModel>,
    #[serde(default)]
    pub temperature_cases: Option<Vec<SpherePlateCase>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub enum RunConfig {
    TwoSpheres(TwoSphereConfig),
    SpherePlate(SpherePlateConfig),
}

/// Parses `text` into `T`, reporting the JSON path of the first offending field.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Failure::config(format!("config field `{path}`: {}", e.inner()))
    })
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Failure::config(format!("config is not valid JSON: {e}")))?;
        let map = value
            .as_object_mut()
            .ok_or_else(|| Failure::config("config field `.`: expected a JSON object"))?;
        let geometry = match map.remove("geometry") {
            Some(serde_json::Value::String(g)) => g,
            Some(_) => return Err(Failure::config("config field `geometry`: expected a string")),
            None => return Err(Failure::config("config field `geometry`: missing (two_spheres or sphere_plate)")),
        };
        let rest = value.to_string();
        match geometry.as_str() {
            "two_spheres" => Ok(Self::TwoSpheres(parse_json(&rest)?)),
            "sphere_plate" => Ok(Self::SpherePlate(parse_json(&rest)?)),
            other => Err(Failure::config(format!(
                "config field `geometry`: unknown geometry `{other}`, expected two_spheres or sphere_plate"
            ))),
        }
    }

    pub fn geometry(&self) -> &'static str {
        match self {
            Self::TwoSpheres(_) => "two_spheres",
            Self::SpherePlate(_) => "sphere_plate",
        }
    }

    pub fn quadrature(&self) -> QuadratureSettings {
        match self {
            Self::TwoSpheres(c) => c.quadrature,
            Self::SpherePlate(c) => c.quadrature,
        }
        .unwrap_or_default()
    }

    pub fn masses(&self) -> MassModel {
        match self {
            Self::TwoSpheres(c) => c.masses,
            Self::SpherePlate(c) => c.masses,
        }
        .unwrap_or(MassModel::SolidSpheres)
    }

    pub fn output(&self) -> Option<&Path> {
        match self {
            Self::TwoSpheres(c) => c.output.as_deref(),
            Self::SpherePlate(c) => c.output.as_deref(),
        }
    }

    fn grid(&self) -> Option<&GridConfig> {
        match self {
            Self::TwoSpheres(c) => c.d_grid.as_ref(),
            Self::SpherePlate(c) => c.d_grid.as_ref(),
        }
    }

    /// One resolved system per temperature case, placed at twice the contact
    /// distance; the grid supplies the separations.
    pub fn resolve(&self, base_dir: &Path) -> Result<Resolved, Failure> {
        let cases = match self {
            Self::TwoSpheres(c) => {
                let m1 = resolve_material(&c.sphere1.material, c.sphere1.frequency_scale, base_dir, "sphere1.material")?;
                let m2 = resolve_material(&c.sphere2.material, c.sphere2.frequency_scale, base_dir, "sphere2.material")?;
                let default_case = TwoSphereCase {
                    label: None,
                    sphere1_k: None,
                    sphere2_k: None,
                    environment_k: None,
                };
                let list = c.temperature_cases.clone().unwrap_or_else(|| vec![default_case]);
                if list.is_empty() {
                    return Err(Failure::config("config field `temperature_cases`: empty list"));
                }
                list.iter()
                    .map(|case| {
                        let t1 = case.sphere1_k.unwrap_or(c.sphere1.temperature_k);
                        let t2 = case.sphere2_k.unwrap_or(c.sphere2.temperature_k);
                        let env = case.environment_k.unwrap_or(c.environment_temperature_k);
                        let s1 = sphere(&c.sphere1, m1.clone(), t1, "sphere1")?;
                        let s2 = sphere(&c.sphere2, m2.clone(), t2, "sphere2")?;
                        let contact = s1.radius + s2.radius;
                        let sys = TwoSphereSystem::new(s1, s2, 2.0 * contact, env)
                            .map_err(|e| Failure::config(e.to_string()))?;
                        Ok(Case {
                            label: case.label.clone().unwrap_or_else(|| format!("T1={t1}K,T2={t2}K,T_env={env}K")),
                            temperatures: vec![("sphere1_k", t1), ("sphere2_k", t2), ("environment_k", env)],
                            system: System::TwoSpheres(sys),
                        })
                    })
                    .collect::<Result<Vec<_>, Failure>>()?
            }
            Self::SpherePlate(c) => {
                let ms = resolve_material(&c.sphere.material, c.sphere.frequency_scale, base_dir, "sphere.material")?;
                let mp = resolve_material(&c.plate.material, c.plate.frequency_scale, base_dir, "plate.material")?;
                let default_case = SpherePlateCase {
                    label: None,
                    sphere_k: None,
                    plate_k: None,
                    environment_k: None,
                };
                let list = c.temperature_cases.clone().unwrap_or_else(|| vec![default_case]);
                if list.is_empty() {
                    return Err(Failure::config("config field `temperature_cases`: empty list"));
                }
                list.iter()
                    .map(|case| {
                        let ts = case.sphere_k.unwrap_or(c.sphere.temperature_k);
                        let tp = case.plate_k.unwrap_or(c.plate.temperature_k);
                        let env = case.environment_k.unwrap_or(c.environment_temperature_k);
                        let s = sphere(&c.sphere, ms.clone(), ts, "sphere")?;
                        let p = PlateSpec::new(mp.clone(), tp)
                            .map_err(|e| Failure::config(format!("config field `plate`: {e}")))?;
                        let d0 = 2.0 * s.radius;
                        let sys = SpherePlateSystem::new(s, p, d0, env).map_err(|e| Failure::config(e.to_string()))?;
                        Ok(Case {
                            label: case.label.clone().unwrap_or_else(|| format!("T_s={ts}K,T_p={tp}K,T_env={env}K")),
                            temperatures: vec![("sphere_k", ts), ("plate_k", tp), ("environment_k", env)],
                            system: System::SpherePlate(sys),
                        })
                    })
                    .collect::<Result<Vec<_>, Failure>>()?
            }
        };
        Ok(Resolved { cases })
    }

    /// Separation grid in metres; the default grid depends on the case temperatures.
    pub fn grid_for(&self, system: &System) -> Result<Vec<f64>, Failure> {
        let grid = match self.grid() {
            Some(g) => {
                let (min, max) = (g.min_um * UM, g.max_um * UM);
                match g.spacing {
                    Spacing::Lin => analysis::linear_grid(min, max, g.points),
                    Spacing::Log => analysis::log_grid(min, max, g.points),
                }
            }
            None => analysis::default_grid(system),
        };
        grid.map_err(|e| Failure::config(format!("config field `d_grid`: {e}")))
    }
}

pub struct Case {
    pub label: String,
    pub temperatures: Vec<(&'static str, f64)>,
    pub system: System,
}

pub struct Resolved {
    pub cases: Vec<Case>,
}

fn sphere(cfg: &SphereConfig, model: DielectricModel, temperature: f64, field: &str) -> Result<SphereSpec, Failure> {
    SphereSpec::new(cfg.radius_um * UM, model, temperature)
        .map_err(|e| Failure::config(format!("config field `{field}`: {e}")))
}

/// Names are looked up in `NEQFORCE_MATERIALS_DIR`, then among the presets.
/// File paths and tabulated data files are relative to the config directory.
pub fn resolve_material(
    material: &MaterialRef,
    frequency_scale: Option<f64>,
    base_dir: &Path,
    field: &str,
) -> Result<DielectricModel, Failure> {
    let err = |e: neqforce::materials::MaterialError| Failure::config(format!("config field `{field}`: {e}"));
    let model = match material {
        MaterialRef::Name(name) => library::lookup_env(name).map_err(err)?,
        MaterialRef::File { file } => {
            let path = base_dir.join(file);
            let def = MaterialDefinition::from_file(&path).map_err(err)?;
            let dir = path.parent().unwrap_or(base_dir);
            def.to_model(Some(dir)).map_err(err)?
        }
        MaterialRef::Inline(def) => def.to_model(Some(base_dir)).map_err(err)?,
    };
    match frequency_scale {
        Some(s) => model
            .scale_frequency(s)
            .map_err(|e| Failure::config(format!("config field `{field}` frequency_scale: {e}"))),
        None => Ok(model),
    }
}
