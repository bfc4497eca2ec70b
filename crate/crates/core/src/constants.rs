//! Physical constants (CODATA 2018, exact SI where defined) and thermal scales.

/// Reduced Planck constant ħ in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum in m/s.
pub const C: f64 = 299_792_458.0;
/// Boltzmann constant in J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Position of the maximum of x³/(eˣ−1), the Wien peak of the spectral energy density.
pub const WIEN_PEAK_X: f64 = 2.821_439_372_122_079;

/// Bundle of the constants used by the force kernels, for callers that want
/// to carry them around as a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub k_b: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: HBAR,
            c: C,
            k_b: K_B,
        }
    }
}

impl PhysicalConstants {
    /// λ_T = ħc/(k_B T) in metres; infinite at T = 0.
    pub fn thermal_wavelength(&self, temperature: f64) -> f64 {
        self.hbar * self.c / (self.k_b * temperature)
    }
}

/// λ_T = ħc/(k_B T) in metres; infinite at T = 0.
pub fn thermal_wavelength(temperature: f64) -> f64 {
    HBAR * C / (K_B * temperature)
}

/// Inverse of [`thermal_wavelength`].
pub fn temperature_for_thermal_wavelength(lambda_t: f64) -> f64 {
    HBAR * C / (K_B * lambda_t)
}

/// k_B T/ħ in rad/s.
pub fn thermal_frequency(temperature: f64) -> f64 {
    K_B * temperature / HBAR
}

/// Angular frequency where the Planck energy density ω³n(ω) peaks.
pub fn thermal_peak_frequency(temperature: f64) -> f64 {
    WIEN_PEAK_X * thermal_frequency(temperature)
}

/// Bose–Einstein occupation n(ω, T) = 1/(e^{ħω/k_B T} − 1); zero at T = 0.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * temperature)).exp_m1()
}

/// Vacuum wavelength 2πc/ω.
pub fn wavelength_of(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * C / omega
}

/// Angular frequency 2πc/λ.
pub fn omega_of_wavelength(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI * C / lambda
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn room_temperature_thermal_wavelength() {
        let lt = thermal_wavelength(300.0);
        assert!((lt * 1e6 - 7.63).abs() < 0.01, "λ_T(300 K) = {} μm", lt * 1e6);
    }

    #[test]
    fn thermal_wavelength_round_trip() {
        let t = temperature_for_thermal_wavelength(thermal_wavelength(12.5));
        assert!((t - 12.5).abs() < 1e-12);
        assert_eq!(
            PhysicalConstants::default().thermal_wavelength(300.0),
            thermal_wavelength(300.0)
        );
    }

    #[test]
    fn bose_vanishes_at_zero_temperature() {
        assert_eq!(bose_occupation(1e14, 0.0), 0.0);
        let x: f64 = 2.0;
        let w = x * thermal_frequency(300.0);
        assert!((bose_occupation(w, 300.0) - 1.0 / (x.exp() - 1.0)).abs() < 1e-14);
    }
}
