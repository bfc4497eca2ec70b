use std::f64::consts::PI;

use super::{IntegralResult, Neumaier, QuadratureError, QuadratureSettings};
use crate::constants::{HBAR, K_B};

/// Consecutive non-decelerating growth steps that count as divergence.
const GROWTH_STEPS: usize = 5;

/// k_BT·[g(0)/2 + Σ_{n≥1} g(ξ_n)] with ξ_n = 2πn·k_BT/ħ.
///
/// Summation stops once a term drops below `matsubara_tail_tol` times the
/// partial sum while the terms decay; the geometric bound on the remainder
/// goes into the error estimate. Terms whose ratio stays ≥ 1 and does not
/// decrease for five consecutive n are treated as divergent. Polynomially
/// rising terms (ratio above one but falling) are allowed, since dipole kernels
/// rise before the exponential takes over; they are only stopped by
/// `matsubara_max_terms`.
pub fn matsubara_sum<F: Fn(f64) -> f64>(
    g: F,
    temperature: f64,
    settings: &QuadratureSettings,
) -> Result<IntegralResult<f64>, QuadratureError> {
    if !(temperature > 0.0) {
        return Err(QuadratureError::InvalidSettings(format!(
            "Matsubara sum needs a positive temperature, got {temperature}"
        )));
    }
    let kt = K_B * temperature;
    let spacing = 2.0 * PI * kt / HBAR;

    let mut sum = Neumaier::default();
    let first = 0.5 * g(0.0);
    sum.add(first);
    let mut abs_sum = first.abs();
    let mut prev_abs = first.abs();
    let mut prev_ratio = 0.0;
    let mut growth = 0;

    for n in 1..=settings.matsubara_max_terms {
        let term = g(n as f64 * spacing);
        sum.add(term);
        let a = term.abs();
        abs_sum += a;
        if !a.is_finite() {
            return Err(QuadratureError::Divergence {
                terms: n,
                last_term: term,
            });
        }
        let ratio = if prev_abs > 0.0 { a / prev_abs } else { f64::INFINITY };
        if prev_abs > 0.0 && ratio >= 1.0 && ratio >= prev_ratio * (1.0 - 1e-12) {
            growth += 1;
            if growth >= GROWTH_STEPS {
                return Err(QuadratureError::Divergence {
                    terms: n,
                    last_term: term,
                });
            }
        } else {
            growth = 0;
        }

        let partial = sum.total();
        if n >= 2 && a <= settings.matsubara_tail_tol * partial.abs() {
            let tail = if a == 0.0 && prev_abs == 0.0 {
                Some(0.0)
            } else if ratio < 1.0 {
                Some(a * ratio / (1.0 - ratio))
            } else {
                None
            };
            if let Some(tail) = tail {
                let value = kt * partial;
                let error_estimate = kt * (tail + 4.0 * f64::EPSILON * abs_sum);
                return Ok(IntegralResult {
                    value,
                    error_estimate,
                    evaluations: n + 1,
                    converged: error_estimate
                        <= (settings.rel_tol * value.abs()).max(settings.abs_floor),
                });
            }
        }
        if a == 0.0 && prev_abs == 0.0 && partial == 0.0 && n >= 2 {
            return Ok(IntegralResult {
                value: 0.0,
                error_estimate: 0.0,
                evaluations: n + 1,
                converged: true,
            });
        }
        prev_abs = a;
        prev_ratio = ratio;
    }
    Err(QuadratureError::Divergence {
        terms: settings.matsubara_max_terms,
        last_term: prev_abs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series() {
        let t = 300.0;
        let omega = K_B * t / HBAR;
        let s = QuadratureSettings::default();
        let r = matsubara_sum(|xi| (-xi / omega).exp(), t, &s).unwrap();
        let q = (-2.0 * PI).exp();
        let exact = K_B * t * (0.5 + q / (1.0 - q));
        assert!(((r.value - exact) / exact).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn zero_summand() {
        let r = matsubara_sum(|_| 0.0, 10.0, &QuadratureSettings::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn growing_terms_diverge() {
        let omega = K_B * 10.0 / HBAR;
        let err = matsubara_sum(|xi| (xi / omega).exp(), 10.0, &QuadratureSettings::default());
        assert!(matches!(err, Err(QuadratureError::Divergence { .. })));
    }

    #[test]
    fn polynomial_rise_before_decay_is_not_divergence() {
        // x⁵e^{-2x} with x_n = 0.01·n rises for ~250 terms.
        let t = 1.0;
        let spacing = 2.0 * PI * K_B * t / HBAR;
        let r = matsubara_sum(
            |xi| {
                let x = 0.01 * xi / spacing;
                x.powi(5) * (-2.0 * x).exp()
            },
            t,
            &QuadratureSettings::default(),
        )
        .unwrap();
        assert!(r.converged && r.value > 0.0);
    }

    #[test]
    fn rejects_zero_temperature() {
        assert!(matsubara_sum(|_| 1.0, 0.0, &QuadratureSettings::default()).is_err());
    }
}
