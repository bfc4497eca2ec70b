//! Material definition files and the built-in presets.
//!
//! A definition is a JSON object `{name, type, ...}` with `type` one of
//! `lorentz`, `tabulated` or `constant`. Lorentz oscillators may be given
//! directly (`omega_res`, `strength`, `damping` in rad/s), by resonance
//! wavelength and static contribution (`wavelength_um`, `delta_eps`,
//! `relative_damping`), or as a phonon oscillator in wavenumbers
//! (`transverse_cm`, `longitudinal_cm`, `damping_cm`). Tabulated data are
//! inline `samples` or a three-column CSV `file` (omega_rad_s, eps_re, eps_im)
//! resolved relative to the definition file.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DielectricModel, LorentzSet, MaterialError, Oscillator, TabulatedPermittivity};
use crate::constants::{omega_of_wavelength, C};

/// Environment variable naming a directory of `<name>.json` definitions.
pub const MATERIALS_DIR_ENV: &str = "NEQFORCE_MATERIALS_DIR";

const BUILTIN: [(&str, &str); 3] = [
    ("sio2", include_str!("../../data/materials/sio2.json")),
    ("sic", include_str!("../../data/materials/sic.json")),
    ("single_lorentz", include_str!("../../data/materials/single_lorentz.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialDefinition {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(flatten)]
    pub kind: MaterialKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MaterialKind {
    Lorentz {
        eps_inf: f64,
        oscillators: Vec<OscillatorSpec>,
    },
    Tabulated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<Vec<(f64, f64, f64)>>,
    },
    Constant {
        eps_re: f64,
        #[serde(default)]
        eps_im: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OscillatorSpec {
    Direct(Oscillator),
    Wavelength {
        wavelength_um: f64,
        delta_eps: f64,
        relative_damping: f64,
    },
    Phonon {
        transverse_cm: f64,
        longitudinal_cm: f64,
        damping_cm: f64,
    },
}

fn wavenumber_to_omega(cm: f64) -> f64 {
    2.0 * PI * C * 100.0 * cm
}

impl OscillatorSpec {
    fn resolve(&self, eps_inf: f64) -> Oscillator {
        match *self {
            Self::Direct(o) => o,
            Self::Wavelength {
                wavelength_um,
                delta_eps,
                relative_damping,
            } => Oscillator::from_static_contribution(
                omega_of_wavelength(wavelength_um * 1e-6),
                delta_eps,
                relative_damping,
            ),
            Self::Phonon {
                transverse_cm,
                longitudinal_cm,
                damping_cm,
            } => {
                let wt = wavenumber_to_omega(transverse_cm);
                let wl = wavenumber_to_omega(longitudinal_cm);
                Oscillator {
                    omega_res: wt,
                    strength: eps_inf * (wl * wl - wt * wt),
                    damping: wavenumber_to_omega(damping_cm),
                }
            }
        }
    }
}

impl MaterialDefinition {
    pub fn from_json(text: &str) -> Result<Self, MaterialError> {
        serde_json::from_str(text).map_err(|e| MaterialError::Parse {
            what: "material definition".into(),
            message: e.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, MaterialError> {
        let text = std::fs::read_to_string(path).map_err(|source| MaterialError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            MaterialError::Parse { message, .. } => MaterialError::Parse {
                what: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    /// Builds the model; relative CSV paths are resolved against `base_dir`.
    pub fn to_model(&self, base_dir: Option<&Path>) -> Result<DielectricModel, MaterialError> {
        match &self.kind {
            MaterialKind::Lorentz {
                eps_inf,
                oscillators,
            } => {
                let osc = oscillators.iter().map(|o| o.resolve(*eps_inf)).collect();
                Ok(DielectricModel::Lorentz(LorentzSet::new(*eps_inf, osc)?))
            }
            MaterialKind::Tabulated { file, samples } => {
                let rows = match (file, samples) {
                    (Some(f), None) => {
                        let path = match base_dir {
                            Some(dir) if f.is_relative() => dir.join(f),
                            _ => f.clone(),
                        };
                        read_tabulated_csv(&path)?
                    }
                    (None, Some(s)) => s.clone(),
                    _ => {
                        return Err(MaterialError::Invalid(format!(
                            "tabulated material `{}` needs exactly one of `file` or `samples`",
                            self.name
                        )))
                    }
                };
                Ok(DielectricModel::Tabulated(TabulatedPermittivity::new(&rows)?))
            }
            MaterialKind::Constant { eps_re, eps_im } => {
                if !(*eps_im >= 0.0) || !eps_re.is_finite() {
                    return Err(MaterialError::Invalid(format!(
                        "constant material `{}` needs finite eps with eps_im >= 0",
                        self.name
                    )));
                }
                Ok(DielectricModel::Constant(Complex64::new(*eps_re, *eps_im)))
            }
        }
    }
}

/// Parses three-column CSV (omega_rad_s, eps_re, eps_im). Lines starting
/// with `#` and a non-numeric header row are skipped.
pub fn parse_tabulated_csv<R: std::io::Read>(
    reader: R,
    what: &str,
) -> Result<Vec<(f64, f64, f64)>, MaterialError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| MaterialError::Parse {
            what: what.into(),
            message: e.to_string(),
        })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if v.len() == 3 => rows.push((v[0], v[1], v[2])),
            Err(_) if i == 0 => continue,
            _ => {
                return Err(MaterialError::Parse {
                    what: what.into(),
                    message: format!("line {}: expected three numbers, got `{}`", i + 1, record.iter().collect::<Vec<_>>().join(",")),
                })
            }
        }
    }
    Ok(rows)
}

pub fn read_tabulated_csv(path: &Path) -> Result<Vec<(f64, f64, f64)>, MaterialError> {
    let file = std::fs::File::open(path).map_err(|source| MaterialError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_tabulated_csv(file, &path.display().to_string())
}

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

pub fn builtin(name: &str) -> Result<MaterialDefinition, MaterialError> {
    let (_, text) = BUILTIN
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .ok_or_else(|| MaterialError::NotFound(name.into()))?;
    MaterialDefinition::from_json(text)
}

/// Resolves a material by name: `<dir>/<name>.json` first when a directory is
/// given, then the built-in presets.
pub fn lookup(name: &str, dir: Option<&Path>) -> Result<DielectricModel, MaterialError> {
    if let Some(dir) = dir {
        let path = dir.join(format!("{name}.json"));
        if path.is_file() {
            return MaterialDefinition::from_file(&path)?.to_model(Some(dir));
        }
    }
    builtin(name)?.to_model(None)
}

/// [`lookup`] with the directory taken from `NEQFORCE_MATERIALS_DIR`.
pub fn lookup_env(name: &str) -> Result<DielectricModel, MaterialError> {
    let dir = std::env::var_os(MATERIALS_DIR_ENV).map(PathBuf::from);
    lookup(name, dir.as_deref())
}

/// Built-in SiO₂ surrogate.
pub fn sio2() -> DielectricModel {
    lookup("sio2", None).expect("built-in preset")
}

/// Built-in SiC phonon oscillator.
pub fn sic() -> DielectricModel {
    lookup("sic", None).expect("built-in preset")
}

/// Built-in single oscillator at 9.5 μm.
pub fn single_lorentz() -> DielectricModel {
    lookup("single_lorentz", None).expect("built-in preset")
}

/// Weak narrow oscillator at `omega_res`, ε∞ = 1; its polarizability peak
/// sits within a fraction of a percent of `omega_res`.
pub fn sharp_resonance(omega_res: f64) -> DielectricModel {
    DielectricModel::Lorentz(LorentzSet {
        eps_inf: 1.0,
        oscillators: vec![Oscillator::from_static_contribution(omega_res, 0.02, 0.005)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::wavelength_of;

    #[test]
    fn presets_load() {
        for name in builtin_names() {
            let m = lookup(name, None).unwrap();
            assert!(m.lowest_resonance().is_some(), "{name}");
        }
        let eps0 = sio2().epsilon(1e9).unwrap().re;
        assert!((eps0 - 3.7).abs() < 1e-6);
        let mut res = sio2().resonances();
        res.sort_by(f64::total_cmp);
        assert!((wavelength_of(res[1]) - 9.5e-6).abs() < 1e-12);
        assert!((wavelength_of(res[0]) - 22e-6).abs() < 1e-12);
    }

    #[test]
    fn sic_static_permittivity_follows_lyddane_sachs_teller() {
        let eps0 = sic().epsilon(1e6).unwrap().re;
        let expected = 6.7 * (969.0f64 / 793.0).powi(2);
        assert!((eps0 - expected).abs() < 1e-6);
    }

    #[test]
    fn unknown_material() {
        assert!(matches!(lookup("unobtainium", None), Err(MaterialError::NotFound(_))));
    }

    #[test]
    fn constant_and_inline_tabulated() {
        let def = MaterialDefinition::from_json(r#"{"name":"c","type":"constant","eps_re":4.0}"#).unwrap();
        assert_eq!(def.to_model(None).unwrap(), DielectricModel::constant(4.0));
        let def = MaterialDefinition::from_json(
            r#"{"name":"t","type":"tabulated","samples":[[1e13,3.0,0.1],[1e14,2.0,0.2]]}"#,
        )
        .unwrap();
        let m = def.to_model(None).unwrap();
        assert_eq!(m.valid_range(), (1e13, 1e14));
        let bad = MaterialDefinition::from_json(r#"{"name":"t","type":"tabulated"}"#).unwrap();
        assert!(bad.to_model(None).is_err());
        assert!(MaterialDefinition::from_json(r#"{"name":"x","type":"drude"}"#).is_err());
    }

    #[test]
    fn csv_with_header_and_comments() {
        let text = "# SiO2 sample\nomega_rad_s,eps_re,eps_im\n1e13, 3.0, 0.1\n\n2e13,2.9,0.2\n";
        let rows = parse_tabulated_csv(text.as_bytes(), "inline").unwrap();
        assert_eq!(rows, vec![(1e13, 3.0, 0.1), (2e13, 2.9, 0.2)]);
        assert!(parse_tabulated_csv("1,2\n".as_bytes(), "inline").is_err());
    }

    #[test]
    fn directory_lookup_with_relative_csv() {
        let dir = std::env::temp_dir().join(format!("neqforce-lib-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("data.csv"), "1e13,3,0.1\n1e14,2,0.3\n").unwrap();
        std::fs::write(
            dir.join("mine.json"),
            r#"{"name":"mine","type":"tabulated","file":"data.csv"}"#,
        )
        .unwrap();
        let m = lookup("mine", Some(&dir)).unwrap();
        assert_eq!(m.valid_range(), (1e13, 1e14));
        // Built-ins stay reachable through a directory without an override.
        assert!(lookup("sio2", Some(&dir)).is_ok());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
