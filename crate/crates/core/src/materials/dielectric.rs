//! Complex permittivity models ε(ω) on the real and imaginary frequency axes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MaterialError;
use crate::quadrature::{integrate, QuadratureSettings};

/// One Lorentz oscillator term strength/(ω_res² − ω² − i·damping·ω).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oscillator {
    /// Resonance (transverse optical) frequency in rad/s.
    pub omega_res: f64,
    /// Oscillator strength in (rad/s)²; the static contribution is strength/ω_res².
    pub strength: f64,
    /// Damping rate in rad/s.
    pub damping: f64,
}

impl Oscillator {
    /// Oscillator contributing `delta_eps` to the static permittivity, with
    /// damping given as a fraction of the resonance frequency.
    pub fn from_static_contribution(omega_res: f64, delta_eps: f64, relative_damping: f64) -> Self {
        Self {
            omega_res,
            strength: delta_eps * omega_res * omega_res,
            damping: relative_damping * omega_res,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorentzSet {
    pub eps_inf: f64,
    pub oscillators: Vec<Oscillator>,
}

impl LorentzSet {
    pub fn new(eps_inf: f64, oscillators: Vec<Oscillator>) -> Result<Self, MaterialError> {
        let set = Self {
            eps_inf,
            oscillators,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        if !(self.eps_inf >= 1.0) || !self.eps_inf.is_finite() {
            return Err(MaterialError::Invalid(format!(
                "eps_inf must be a finite value >= 1, got {}",
                self.eps_inf
            )));
        }
        for (i, osc) in self.oscillators.iter().enumerate() {
            let ok = osc.omega_res > 0.0
                && osc.strength >= 0.0
                && osc.damping >= 0.0
                && osc.omega_res.is_finite()
                && osc.strength.is_finite()
                && osc.damping.is_finite();
            if !ok {
                return Err(MaterialError::Invalid(format!(
                    "oscillator {i} needs omega_res > 0, strength >= 0, damping >= 0 (got {osc:?})"
                )));
            }
        }
        Ok(())
    }

    pub fn epsilon(&self, omega: f64) -> Complex64 {
        self.oscillators
            .iter()
            .fold(Complex64::new(self.eps_inf, 0.0), |acc, o| {
                acc + o.strength
                    / Complex64::new(o.omega_res * o.omega_res - omega * omega, -o.damping * omega)
            })
    }

    pub fn epsilon_imag_axis(&self, xi: f64) -> f64 {
        self.oscillators.iter().fold(self.eps_inf, |acc, o| {
            acc + o.strength / (o.omega_res * o.omega_res + xi * xi + o.damping * xi)
        })
    }

    pub fn static_permittivity(&self) -> f64 {
        self.epsilon_imag_axis(0.0)
    }
}

/// Sampled optical data, interpolated linearly in ln ω.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPermittivity {
    omega: Vec<f64>,
    eps: Vec<Complex64>,
}

impl TabulatedPermittivity {
    /// Samples as (ω in rad/s, Re ε, Im ε).
    pub fn new(samples: &[(f64, f64, f64)]) -> Result<Self, MaterialError> {
        if samples.len() < 2 {
            return Err(MaterialError::Invalid(
                "tabulated permittivity needs at least two samples".into(),
            ));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(MaterialError::Invalid(format!(
                    "omega grid must be strictly increasing (rows {i} and {})",
                    i + 1
                )));
            }
        }
        if let Some((i, s)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !(s.0 > 0.0) || !(s.2 >= 0.0) || !s.1.is_finite() || !s.2.is_finite())
        {
            return Err(MaterialError::Invalid(format!(
                "row {i} ({}, {}, {}) needs omega > 0 and finite eps with eps_im >= 0",
                s.0, s.1, s.2
            )));
        }
        Ok(Self {
            omega: samples.iter().map(|s| s.0).collect(),
            eps: samples.iter().map(|s| Complex64::new(s.1, s.2)).collect(),
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.omega.iter().copied().zip(self.eps.iter().copied())
    }

    fn interpolate(&self, omega: f64) -> Complex64 {
        let (lo, hi) = self.range();
        let w = omega.clamp(lo, hi);
        let j = self.omega.partition_point(|&x| x <= w).clamp(1, self.omega.len() - 1);
        let (w0, w1) = (self.omega[j - 1], self.omega[j]);
        let t = (w / w0).ln() / (w1 / w0).ln();
        self.eps[j - 1] * (1.0 - t) + self.eps[j] * t
    }

    pub fn epsilon(&self, omega: f64) -> Result<Complex64, MaterialError> {
        let (min, max) = self.range();
        if omega < min || omega > max {
            return Err(MaterialError::OutOfRange { omega, min, max });
        }
        Ok(self.interpolate(omega))
    }

    /// Frequencies where Im ε has a local maximum.
    fn peaks(&self) -> Vec<f64> {
        self.eps
            .windows(3)
            .enumerate()
            .filter(|(_, w)| w[1].im > w[0].im && w[1].im >= w[2].im)
            .map(|(i, _)| self.omega[i + 1])
            .collect()
    }

    /// Kramers–Kronig transform over the sampled band,
    /// ε(iξ) = 1 + (2/π)∫ ω Im ε(ω)/(ω² + ξ²) dω.
    pub fn epsilon_imag_axis(&self, xi: f64, settings: &QuadratureSettings) -> Result<f64, MaterialError> {
        let (lo, hi) = self.range();
        let r = integrate(
            |w: f64| w * self.interpolate(w).im / (w * w + xi * xi),
            lo,
            hi,
            &self.omega,
            settings,
        );
        if !r.converged {
            return Err(MaterialError::Quadrature {
                what: format!("Kramers-Kronig transform at xi = {xi:e}"),
                value: r.value,
                error_estimate: r.error_estimate,
            });
        }
        Ok(1.0 + 2.0 / PI * r.value)
    }
}

/// Permittivity model of a material.
#[derive(Debug, Clone, PartialEq)]
pub enum DielectricModel {
    Lorentz(LorentzSet),
    Tabulated(TabulatedPermittivity),
    Constant(Complex64),
    /// ε̃(ω) = ε_base(factor·ω): the base resonances move to ω_res/factor.
    Scaled {
        base: Box<DielectricModel>,
        factor: f64,
    },
}

impl DielectricModel {
    pub fn constant(eps: f64) -> Self {
        Self::Constant(Complex64::new(eps, 0.0))
    }

    /// Decorator ε̃(ω) = ε(s·ω). Nested scalings collapse into one factor.
    pub fn scale_frequency(self, factor: f64) -> Result<Self, MaterialError> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(MaterialError::Invalid(format!(
                "frequency scale factor must be positive, got {factor}"
            )));
        }
        Ok(match self {
            Self::Scaled { base, factor: f0 } => Self::Scaled {
                base,
                factor: f0 * factor,
            },
            other if factor == 1.0 => other,
            other => Self::Scaled {
                base: Box::new(other),
                factor,
            },
        })
    }

    /// Frequency band where the model may be evaluated.
    pub fn valid_range(&self) -> (f64, f64) {
        match self {
            Self::Tabulated(t) => t.range(),
            Self::Scaled { base, factor } => {
                let (lo, hi) = base.valid_range();
                (lo / factor, hi / factor)
            }
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Errors when [lo, hi] leaves the tabulated band.
    pub fn check_coverage(&self, lo: f64, hi: f64) -> Result<(), MaterialError> {
        let (min, max) = self.valid_range();
        if lo < min {
            return Err(MaterialError::OutOfRange { omega: lo, min, max });
        }
        if hi > max {
            return Err(MaterialError::OutOfRange { omega: hi, min, max });
        }
        Ok(())
    }

    pub fn epsilon(&self, omega: f64) -> Result<Complex64, MaterialError> {
        match self {
            Self::Lorentz(set) => Ok(set.epsilon(omega)),
            Self::Tabulated(t) => t.epsilon(omega),
            Self::Constant(eps) => Ok(*eps),
            Self::Scaled { base, factor } => base.epsilon(factor * omega),
        }
    }

    /// ε(ω) without range checks; tabulated data are clamped to their band.
    /// Callers check coverage first.
    pub(crate) fn eval(&self, omega: f64) -> Complex64 {
        match self {
            Self::Lorentz(set) => set.epsilon(omega),
            Self::Tabulated(t) => t.interpolate(omega),
            Self::Constant(eps) => *eps,
            Self::Scaled { base, factor } => base.eval(factor * omega),
        }
    }

    /// ε(iξ) ≥ 1 for passive media. Lorentz sets use the closed form,
    /// tabulated data the Kramers–Kronig transform of Im ε over the sampled
    /// band. A constant model is taken at its real part.
    pub fn epsilon_imag_axis(&self, xi: f64) -> Result<f64, MaterialError> {
        match self {
            Self::Lorentz(set) => Ok(set.epsilon_imag_axis(xi)),
            Self::Tabulated(t) => t.epsilon_imag_axis(xi, &kk_settings()),
            Self::Constant(eps) => Ok(eps.re),
            Self::Scaled { base, factor } => base.epsilon_imag_axis(factor * xi),
        }
    }

    /// Resonance frequencies, used as quadrature breakpoints.
    pub fn resonances(&self) -> Vec<f64> {
        match self {
            Self::Lorentz(set) => set.oscillators.iter().map(|o| o.omega_res).collect(),
            Self::Tabulated(t) => t.peaks(),
            Self::Constant(_) => Vec::new(),
            Self::Scaled { base, factor } => base.resonances().into_iter().map(|w| w / factor).collect(),
        }
    }

    pub fn lowest_resonance(&self) -> Option<f64> {
        self.resonances().into_iter().reduce(f64::min)
    }

    /// Quadrature breakpoints around the spectral peaks of Im ε, Im[(ε−1)/(ε+2)]
    /// (sphere polarizability) and Im[(ε−1)/(ε+1)] (surface mode), each peak
    /// bracketed at 1, 3 and 10 half-widths.
    pub fn spectral_hints(&self) -> Vec<f64> {
        let (lo, hi) = match self {
            Self::Constant(_) => return Vec::new(),
            Self::Tabulated(t) => t.range(),
            _ => {
                let res = self.resonances();
                let min = res.iter().copied().fold(f64::INFINITY, f64::min);
                let max = res.iter().copied().fold(0.0, f64::max);
                if !min.is_finite() {
                    return Vec::new();
                }
                let (vlo, vhi) = self.valid_range();
                ((0.05 * min).max(vlo), (20.0 * max).min(vhi))
            }
        };
        const N: usize = 20_000;
        let step = (hi / lo).ln() / (N - 1) as f64;
        let omega: Vec<f64> = (0..N).map(|i| lo * (i as f64 * step).exp()).collect();
        let eps: Vec<Complex64> = omega.iter().map(|&w| self.eval(w)).collect();
        let profiles: [Box<dyn Fn(Complex64) -> f64>; 3] = [
            Box::new(|e| e.im),
            Box::new(|e| ((e - 1.0) / (e + 2.0)).im),
            Box::new(|e| ((e - 1.0) / (e + 1.0)).im),
        ];
        let mut hints = Vec::new();
        for profile in &profiles {
            let v: Vec<f64> = eps.iter().map(|&e| profile(e)).collect();
            let top = v.iter().copied().fold(0.0, f64::max);
            for i in 1..N - 1 {
                if !(v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] > 1e-3 * top) {
                    continue;
                }
                let half = 0.5 * v[i];
                let left = (0..i).rev().find(|&j| v[j] < half).unwrap_or(0);
                let right = (i + 1..N).find(|&j| v[j] < half).unwrap_or(N - 1);
                let w = 0.5 * (omega[right] - omega[left]).max(omega[i + 1] - omega[i - 1]);
                for k in [-10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0] {
                    let x = omega[i] + k * w;
                    if x > 0.0 {
                        hints.push(x);
                    }
                }
            }
        }
        hints.sort_by(f64::total_cmp);
        hints.dedup();
        hints
    }
}

pub(crate) fn kk_settings() -> QuadratureSettings {
    QuadratureSettings {
        rel_tol: 1e-10,
        abs_floor: 0.0,
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> DielectricModel {
        DielectricModel::Lorentz(
            LorentzSet::new(
                1.0,
                vec![Oscillator {
                    omega_res: 1e14,
                    strength: 3e28,
                    damping: 1e12,
                }],
            )
            .unwrap(),
        )
    }

    #[test]
    fn constant_model() {
        let m = DielectricModel::Constant(Complex64::new(4.0, 0.0));
        assert_eq!(m.epsilon(3.3e13).unwrap(), Complex64::new(4.0, 0.0));
    }

    #[test]
    fn lorentz_static_and_high_frequency_limits() {
        let m = single();
        let e0 = m.epsilon(1e-3).unwrap();
        assert!((e0.re - 4.0).abs() < 1e-12);
        assert_eq!(m.epsilon_imag_axis(0.0).unwrap(), 4.0);
        assert!((m.epsilon_imag_axis(1e22).unwrap() - 1.0).abs() < 1e-10);
        assert!((m.epsilon(1e22).unwrap() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn lorentz_imaginary_axis_matches_kramers_kronig() {
        let m = single();
        let set = match &m {
            DielectricModel::Lorentz(s) => s.clone(),
            _ => unreachable!(),
        };
        let xi = 1e14;
        let closed = m.epsilon_imag_axis(xi).unwrap();
        assert!(closed > 1.0 && closed < 4.0);
        // Oracle: KK integral of the same model's Im ε, split at the resonance.
        let settings = kk_settings();
        let hints = [0.9e14, 0.99e14, 1e14, 1.01e14, 1.1e14, 1e15];
        let r = integrate(
            |w: f64| w * set.epsilon(w).im / (w * w + xi * xi),
            0.0,
            1e18,
            &hints,
            &settings,
        );
        let kk = 1.0 + 2.0 / PI * r.value;
        assert!((kk - closed).abs() < 1e-6, "kk {kk} closed {closed}");
    }

    #[test]
    fn tabulated_interpolation_and_range() {
        let t = TabulatedPermittivity::new(&[(1e13, 3.0, 0.1), (1e14, 2.0, 0.3), (1e15, 1.5, 0.0)]).unwrap();
        let m = DielectricModel::Tabulated(t);
        let mid = m.epsilon((1e13f64 * 1e14).sqrt()).unwrap();
        assert!((mid - Complex64::new(2.5, 0.2)).norm() < 1e-12);
        match m.epsilon(1e16) {
            Err(MaterialError::OutOfRange { max, .. }) => assert_eq!(max, 1e15),
            other => panic!("{other:?}"),
        }
        assert!(m.check_coverage(1e12, 1e14).is_err());
        assert_eq!(m.resonances(), vec![1e14]);
    }

    #[test]
    fn tabulated_rejects_bad_rows() {
        assert!(TabulatedPermittivity::new(&[(1e13, 3.0, 0.1), (1e13, 2.0, 0.3)]).is_err());
        assert!(TabulatedPermittivity::new(&[(1e13, 3.0, -0.1), (1e14, 2.0, 0.3)]).is_err());
    }

    #[test]
    fn tabulated_kramers_kronig_of_sampled_lorentz() {
        let m = single();
        let samples: Vec<(f64, f64, f64)> = (0..4001)
            .map(|i| {
                let w = 1e12 * 10f64.powf(i as f64 * 4.0 / 4000.0);
                let e = m.epsilon(w).unwrap();
                (w, e.re, e.im)
            })
            .collect();
        let t = DielectricModel::Tabulated(TabulatedPermittivity::new(&samples).unwrap());
        let xi = 5e13;
        let a = t.epsilon_imag_axis(xi).unwrap();
        let b = m.epsilon_imag_axis(xi).unwrap();
        assert!((a - b).abs() < 2e-3 * b, "{a} vs {b}");
    }

    #[test]
    fn frequency_scaling_moves_resonances() {
        let m = single().scale_frequency(1.17).unwrap();
        let w = 2.3e13;
        assert_eq!(m.epsilon(w).unwrap(), single().epsilon(1.17 * w).unwrap());
        assert!((m.resonances()[0] - 1e14 / 1.17).abs() < 1.0);
        let twice = m.scale_frequency(0.5).unwrap();
        match twice {
            DielectricModel::Scaled { factor, .. } => assert!((factor - 0.585).abs() < 1e-15),
            _ => panic!(),
        }
        assert!(single().scale_frequency(-1.0).is_err());
    }

    #[test]
    fn lorentz_validation() {
        assert!(LorentzSet::new(0.5, vec![]).is_err());
        assert!(LorentzSet::new(
            1.0,
            vec![Oscillator {
                omega_res: 1e14,
                strength: 1e28,
                damping: -1.0
            }]
        )
        .is_err());
    }

    #[test]
    fn spectral_hints_bracket_the_polarizability_peak() {
        // Narrow oscillator whose sphere resonance sits well above omega_res.
        let m = DielectricModel::Lorentz(
            LorentzSet::new(
                6.7,
                vec![Oscillator {
                    omega_res: 1.5e14,
                    strength: 6.7 * (1.82e14f64.powi(2) - 1.5e14f64.powi(2)),
                    damping: 9e11,
                }],
            )
            .unwrap(),
        );
        let hints = m.spectral_hints();
        // ε(ω) = −2 near ω² = ω_r² + S/(ε∞ + 2).
        let set = match &m {
            DielectricModel::Lorentz(s) => s,
            _ => unreachable!(),
        };
        let o = set.oscillators[0];
        let frohlich = (o.omega_res.powi(2) + o.strength / 8.7).sqrt();
        assert!(hints.iter().any(|h| (h - frohlich).abs() < 2.0 * o.damping), "{hints:?}");
        assert!(hints.iter().any(|h| (h - o.omega_res).abs() < 2.0 * o.damping));
        assert!(DielectricModel::constant(2.0).spectral_hints().is_empty());
    }
}
