//! Dipole polarizabilities, dipole T-operators and Fresnel coefficients.

use num_complex::Complex64;
use serde::Serialize;

use super::{DielectricModel, MaterialError};
use crate::constants::{thermal_peak_frequency, C};

/// Relative size |√ε|·Rω/c above which the dipole expansion is flagged.
pub const DIPOLE_VALIDITY_LIMIT: f64 = 0.3;
/// |T|²/|Re T| above which dropping terms quadratic in T is flagged.
pub const QUADRATIC_T_LIMIT: f64 = 0.3;
/// |ε| at the thermal peak above which a body counts as a conductor.
pub const CONDUCTOR_LIMIT: f64 = 1e3;

/// Field polarization: M (magnetic multipole, TE) or N (electric multipole, TM).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Polarization {
    M,
    N,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::M, Polarization::N];

    /// The opposite polarization P̄.
    pub fn other(self) -> Self {
        match self {
            Self::M => Self::N,
            Self::N => Self::M,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereSpec {
    /// Radius in metres.
    pub radius: f64,
    pub dielectric: DielectricModel,
    /// Relative permeability, frequency independent.
    pub mu: Complex64,
    /// Temperature in kelvin.
    pub temperature: f64,
}

impl SphereSpec {
    pub fn new(radius: f64, dielectric: DielectricModel, temperature: f64) -> Result<Self, MaterialError> {
        let s = Self {
            radius,
            dielectric,
            mu: Complex64::new(1.0, 0.0),
            temperature,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_mu(mut self, mu: Complex64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(MaterialError::Invalid(format!(
                "sphere radius must be positive, got {}",
                self.radius
            )));
        }
        check_temperature(self.temperature)?;
        check_mu(self.mu)
    }

    /// Electric dipole polarizability (ε−1)/(ε+2)·R³ without range checks.
    pub(crate) fn alpha(&self, omega: f64) -> Complex64 {
        alpha_from_eps(self.dielectric.eval(omega), self.radius)
    }

    /// Magnetic dipole polarizability (μ−1)/(μ+2)·R³.
    pub(crate) fn beta(&self) -> Complex64 {
        alpha_from_eps(self.mu, self.radius)
    }

    /// Dipole T-operators without range checks.
    pub(crate) fn t_operators(&self, omega: f64) -> DipoleT {
        let k = Complex64::new(0.0, 2.0 * (omega / C).powi(3) / 3.0);
        DipoleT {
            n: k * self.alpha(omega),
            m: k * self.beta(),
        }
    }

    /// α(iξ) from the imaginary-axis permittivity.
    pub fn alpha_imag_axis(&self, xi: f64) -> Result<f64, MaterialError> {
        let e = self.dielectric.epsilon_imag_axis(xi)?;
        Ok((e - 1.0) / (e + 2.0) * self.radius.powi(3))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateSpec {
    pub dielectric: DielectricModel,
    pub mu: Complex64,
    pub temperature: f64,
}

impl PlateSpec {
    pub fn new(dielectric: DielectricModel, temperature: f64) -> Result<Self, MaterialError> {
        let p = Self {
            dielectric,
            mu: Complex64::new(1.0, 0.0),
            temperature,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_mu(mut self, mu: Complex64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        check_temperature(self.temperature)?;
        check_mu(self.mu)
    }
}

fn check_temperature(t: f64) -> Result<(), MaterialError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(MaterialError::Invalid(format!(
            "temperature must be a finite value >= 0 K, got {t}"
        )));
    }
    Ok(())
}

fn check_mu(mu: Complex64) -> Result<(), MaterialError> {
    if !(mu.im >= 0.0) || !mu.re.is_finite() || !mu.im.is_finite() {
        return Err(MaterialError::Invalid(format!(
            "permeability must be finite with Im mu >= 0, got {mu}"
        )));
    }
    Ok(())
}

fn alpha_from_eps(eps: Complex64, radius: f64) -> Complex64 {
    (eps - 1.0) / (eps + 2.0) * radius.powi(3)
}

/// Low-frequency data of an insulator: ε(ω) ≈ ε₀ + iλ_in ω/c and
/// α(ω) ≈ α₀ + iα_i0 λ_in ω/c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticExpansion {
    pub eps0: f64,
    /// Loss length λ_in = c·dIm ε/dω at ω → 0, in metres.
    pub lambda_in: f64,
    /// Static polarizability in m³.
    pub alpha0: f64,
    /// 3R³/(ε₀+2)² in m³.
    pub alpha_i0: f64,
}

impl StaticExpansion {
    pub fn from_eps0(eps0: f64, lambda_in: f64, radius: f64) -> Self {
        let r3 = radius.powi(3);
        Self {
            eps0,
            lambda_in,
            alpha0: (eps0 - 1.0) / (eps0 + 2.0) * r3,
            alpha_i0: 3.0 * r3 / ((eps0 + 2.0) * (eps0 + 2.0)),
        }
    }
}

/// Static permittivity ε₀ and loss length λ_in of a model.
pub fn static_permittivity(model: &DielectricModel) -> Result<(f64, f64), MaterialError> {
    if let DielectricModel::Constant(eps) = model {
        if eps.im != 0.0 {
            return Err(MaterialError::UnsupportedMaterial(
                "a constant lossy permittivity has no finite static loss slope".into(),
            ));
        }
        check_static(*eps)?;
        return Ok((eps.re, 0.0));
    }
    if let DielectricModel::Tabulated(t) = model {
        // Lowest sample, assuming Im ε ∝ ω below it.
        let (w, e) = t.samples().next().expect("tabulated data hold two samples");
        check_static(e)?;
        return Ok((e.re, C * e.im / w));
    }
    let (lo, _) = model.valid_range();
    let reference = match model.lowest_resonance() {
        Some(w) => 1e-6 * w,
        None => lo.max(1.0),
    };
    let e0 = model.epsilon(reference)?;
    check_static(e0)?;

    // Central difference of Im ε, halving the step until it settles.
    let slope = |h: f64| -> Result<f64, MaterialError> {
        Ok((model.epsilon(reference + h)?.im - model.epsilon(reference - h)?.im) / (2.0 * h))
    };
    let mut h = 0.5 * reference;
    let mut prev = slope(h)?;
    for _ in 0..40 {
        h *= 0.5;
        let next = slope(h)?;
        let change = (next - prev).abs();
        prev = next;
        if change <= 1e-6 * next.abs() || change == 0.0 {
            break;
        }
    }
    Ok((e0.re, C * prev))
}

fn check_static(e: Complex64) -> Result<(), MaterialError> {
    if !e.re.is_finite() || !e.im.is_finite() || e.norm() > CONDUCTOR_LIMIT {
        return Err(MaterialError::UnsupportedMaterial(format!(
            "static permittivity {e} is conductor-like; the dipole expansion does not apply"
        )));
    }
    Ok(())
}

/// Low-frequency expansion coefficients of a sphere.
pub fn static_expansion(sphere: &SphereSpec) -> Result<StaticExpansion, MaterialError> {
    let (eps0, lambda_in) = static_permittivity(&sphere.dielectric)?;
    Ok(StaticExpansion::from_eps0(eps0, lambda_in, sphere.radius))
}

/// Electric dipole polarizability α(ω) = (ε−1)/(ε+2)·R³ in m³.
pub fn polarizability(sphere: &SphereSpec, omega: f64) -> Result<Complex64, MaterialError> {
    let eps = sphere.dielectric.epsilon(omega)?;
    if (eps + 2.0).norm() < 1e-12 {
        return Err(MaterialError::Pole { omega });
    }
    Ok(alpha_from_eps(eps, sphere.radius))
}

/// Magnetic dipole polarizability β = (μ−1)/(μ+2)·R³ in m³.
pub fn magnetic_polarizability(sphere: &SphereSpec) -> Result<Complex64, MaterialError> {
    if (sphere.mu + 2.0).norm() < 1e-12 {
        return Err(MaterialError::Pole { omega: f64::NAN });
    }
    Ok(sphere.beta())
}

/// Dipole-order T-operators of a sphere: T^N = i(2ω³/3c³)α, T^M = i(2ω³/3c³)β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleT {
    pub n: Complex64,
    pub m: Complex64,
}

impl DipoleT {
    pub fn get(&self, p: Polarization) -> Complex64 {
        match p {
            Polarization::N => self.n,
            Polarization::M => self.m,
        }
    }
}

pub fn dipole_t(sphere: &SphereSpec, omega: f64) -> Result<DipoleT, MaterialError> {
    polarizability(sphere, omega)?;
    magnetic_polarizability(sphere)?;
    Ok(sphere.t_operators(omega))
}

/// Validity checks of the dipole, one-reflection-linear treatment at the
/// thermal peak frequency; returns human-readable warnings.
pub fn dipole_warnings(sphere: &SphereSpec, temperature: f64) -> Result<Vec<String>, MaterialError> {
    let mut warnings = Vec::new();
    if temperature <= 0.0 {
        return Ok(warnings);
    }
    let omega = thermal_peak_frequency(temperature);
    let (lo, hi) = sphere.dielectric.valid_range();
    let eps = sphere.dielectric.epsilon(omega.clamp(lo, hi))?;
    if eps.norm() > CONDUCTOR_LIMIT {
        return Err(MaterialError::UnsupportedMaterial(format!(
            "|eps| = {:.3e} at the thermal peak {omega:.3e} rad/s exceeds {CONDUCTOR_LIMIT:e}",
            eps.norm()
        )));
    }
    let size = eps.sqrt().norm() * sphere.radius * omega / C;
    if size > DIPOLE_VALIDITY_LIMIT {
        warnings.push(format!(
            "dipole expansion strained: |sqrt(eps)|*R*omega/c = {size:.3} at T = {temperature} K"
        ));
    }
    let t = sphere.t_operators(omega);
    for (p, tp) in [("N", t.n), ("M", t.m)] {
        if tp.re != 0.0 && tp.norm_sqr() > QUADRATIC_T_LIMIT * tp.re.abs() {
            warnings.push(format!(
                "terms quadratic in T^{p} not negligible: |T|^2/|Re T| = {:.3} at T = {temperature} K",
                tp.norm_sqr() / tp.re.abs()
            ));
        }
    }
    Ok(warnings)
}

/// √z on the branch Im ≥ 0 (and Re ≥ 0 on the positive real axis), so
/// evanescent waves decay away from the interface.
pub fn branch_sqrt(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && s.re < 0.0) {
        -s
    } else {
        s
    }
}

/// Reflection coefficient from the vacuum and medium normal wavevectors.
pub(crate) fn reflection(
    eps: Complex64,
    mu: Complex64,
    kz_vacuum: Complex64,
    kz_medium: Complex64,
    polarization: Polarization,
) -> Complex64 {
    let w = match polarization {
        Polarization::M => mu,
        Polarization::N => eps,
    };
    (w * kz_vacuum - kz_medium) / (w * kz_vacuum + kz_medium)
}

/// Fresnel coefficient for given ε, μ: r^M = (μk_z − k_z')/(μk_z + k_z'),
/// k_z = √(ω²/c² − k⊥²), k_z' = √(εμω²/c² − k⊥²); r^N swaps μ for ε.
pub fn fresnel_coefficient(
    eps: Complex64,
    mu: Complex64,
    omega: f64,
    k_perp: f64,
    polarization: Polarization,
) -> Complex64 {
    let k0 = omega / C;
    let kz_vacuum = branch_sqrt(Complex64::new(k0 * k0 - k_perp * k_perp, 0.0));
    let kz_medium = branch_sqrt(eps * mu * (k0 * k0) - k_perp * k_perp);
    reflection(eps, mu, kz_vacuum, kz_medium, polarization)
}

/// Fresnel coefficient of a plate at (ω, k⊥).
pub fn fresnel(
    plate: &PlateSpec,
    omega: f64,
    k_perp: f64,
    polarization: Polarization,
) -> Result<Complex64, MaterialError> {
    let eps = plate.dielectric.epsilon(omega)?;
    Ok(fresnel_coefficient(eps, plate.mu, omega, k_perp, polarization))
}

/// Plate reflection parameterized by the evanescent decay constant q = √(k⊥² − ω²/c²).
pub(crate) fn fresnel_evanescent(
    eps: Complex64,
    mu: Complex64,
    omega: f64,
    q: f64,
    polarization: Polarization,
) -> Complex64 {
    let k0 = omega / C;
    let kz_medium = branch_sqrt((eps * mu - 1.0) * (k0 * k0) - q * q);
    reflection(eps, mu, Complex64::new(0.0, q), kz_medium, polarization)
}

/// Plate reflection parameterized by the real vacuum normal wavevector k_z ∈ [0, ω/c].
pub(crate) fn fresnel_propagating(
    eps: Complex64,
    mu: Complex64,
    omega: f64,
    kz: f64,
    polarization: Polarization,
) -> Complex64 {
    let k0 = omega / C;
    let kz_medium = branch_sqrt((eps * mu - 1.0) * (k0 * k0) + kz * kz);
    reflection(eps, mu, Complex64::new(kz, 0.0), kz_medium, polarization)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{LorentzSet, Oscillator};

    fn sphere(eps: Complex64, radius: f64) -> SphereSpec {
        SphereSpec::new(radius, DielectricModel::Constant(eps), 300.0).unwrap()
    }

    const UM: f64 = 1e-6;

    #[test]
    fn static_expansion_examples() {
        let s = sphere(Complex64::new(3.7, 0.0), UM);
        let e = static_expansion(&s).unwrap();
        assert!((e.alpha_i0 / UM.powi(3) - 0.092_336).abs() < 1e-6);
        assert!((e.alpha_i0 * (e.eps0 + 2.0).powi(2) - 3.0 * UM.powi(3)).abs() < 1e-15 * UM.powi(3));

        let e = static_expansion(&sphere(Complex64::new(4.0, 0.0), UM)).unwrap();
        assert!((e.alpha0 / UM.powi(3) - 0.5).abs() < 1e-15);

        let e = static_expansion(&sphere(Complex64::new(1.0, 0.0), UM)).unwrap();
        assert_eq!(e.alpha0, 0.0);
        assert!((e.alpha_i0 - UM.powi(3) / 3.0).abs() < 1e-30);
    }

    #[test]
    fn static_expansion_of_lorentz_matches_closed_form() {
        let osc = Oscillator {
            omega_res: 1e14,
            strength: 3e28,
            damping: 1e12,
        };
        let model = DielectricModel::Lorentz(LorentzSet::new(1.0, vec![osc]).unwrap());
        let s = SphereSpec::new(UM, model, 0.0).unwrap();
        let e = static_expansion(&s).unwrap();
        // Im ε ≈ S·γ·ω/ω_r⁴ at low frequency.
        let expected = C * osc.strength * osc.damping / osc.omega_res.powi(4);
        assert!((e.eps0 - 4.0).abs() < 1e-9);
        assert!(((e.lambda_in - expected) / expected).abs() < 1e-6);
    }

    #[test]
    fn conductor_like_static_limit_is_rejected() {
        let s = sphere(Complex64::new(1e5, 0.0), UM);
        assert!(matches!(static_expansion(&s), Err(MaterialError::UnsupportedMaterial(_))));
        let lossy = sphere(Complex64::new(3.0, 0.1), UM);
        assert!(static_expansion(&lossy).is_err());
    }

    #[test]
    fn polarizability_examples() {
        let a = polarizability(&sphere(Complex64::new(4.0, 0.0), UM), 1e14).unwrap();
        assert!((a / UM.powi(3) - 0.5).norm() < 1e-15);
        assert_eq!(polarizability(&sphere(Complex64::new(1.0, 0.0), UM), 1e14).unwrap(), Complex64::new(0.0, 0.0));

        let eps = Complex64::new(3.7, 0.1);
        let a = polarizability(&sphere(eps, UM), 1e14).unwrap();
        let im = 3.0 * UM.powi(3) * eps.im / (eps + 2.0).norm_sqr();
        assert!(a.im > 0.0);
        assert!((a.im - im).abs() < 1e-14 * im);

        let pole = sphere(Complex64::new(-2.0, 0.0), UM);
        assert!(matches!(polarizability(&pole, 1e14), Err(MaterialError::Pole { .. })));
    }

    #[test]
    fn dipole_t_examples() {
        let s = sphere(Complex64::new(3.7, 0.0), UM);
        let t = dipole_t(&s, 2e14).unwrap();
        assert_eq!(t.m, Complex64::new(0.0, 0.0));
        assert_eq!(t.n.re, 0.0);

        let eps = Complex64::new(3.7, 0.1);
        let s = sphere(eps, UM);
        let w = 2e14;
        let t = dipole_t(&s, w).unwrap();
        let k = 2.0 * (w / C).powi(3) / 3.0;
        let expected = -k * polarizability(&s, w).unwrap().im;
        assert!(t.n.re < 0.0);
        assert!((t.n.re - expected).abs() < 1e-15 * expected.abs());

        let big = sphere(eps, 2.0 * UM);
        let t2 = dipole_t(&big, w).unwrap();
        assert!((t2.n - t.n * 8.0).norm() <= 1e-15 * t2.n.norm());
    }

    #[test]
    fn fresnel_normal_incidence() {
        let w = 1e14;
        let eps = Complex64::new(4.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let rm = fresnel_coefficient(eps, one, w, 0.0, Polarization::M);
        let rn = fresnel_coefficient(eps, one, w, 0.0, Polarization::N);
        assert!((rm - Complex64::new(-1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((rn - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        let mirror = fresnel_coefficient(Complex64::new(1e8, 0.0), one, w, 0.0, Polarization::M);
        assert!((mirror + 1.0).norm() < 1e-3);
    }

    #[test]
    fn fresnel_evanescent_branch() {
        let w = 1e14;
        let k = 2.0 * w / C;
        let eps = Complex64::new(2.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let kz_m = branch_sqrt(eps * (w / C).powi(2) - k * k);
        assert!(kz_m.im >= 0.0);
        let r = fresnel_coefficient(eps, one, w, k, Polarization::M);
        assert!(r.re.is_finite() && r.im.is_finite());
        // Same value through the q parameterization.
        let q = (k * k - (w / C).powi(2)).sqrt();
        let r2 = fresnel_evanescent(eps, one, w, q, Polarization::M);
        assert!((r - r2).norm() < 1e-12);
        let swapped = fresnel_coefficient(one, eps, w, k, Polarization::N);
        assert_eq!(r, swapped);
    }

    #[test]
    fn branch_sqrt_signed_zero() {
        let z = Complex64::new(-4.0, -0.0);
        assert_eq!(branch_sqrt(z), Complex64::new(0.0, 2.0));
        assert_eq!(branch_sqrt(Complex64::new(9.0, 0.0)), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn validation_of_specs() {
        let m = DielectricModel::constant(2.0);
        assert!(SphereSpec::new(0.0, m.clone(), 1.0).is_err());
        assert!(SphereSpec::new(1e-6, m.clone(), -1.0).is_err());
        assert!(PlateSpec::new(m, f64::NAN).is_err());
    }
}
