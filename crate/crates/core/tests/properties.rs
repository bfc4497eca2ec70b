use neqforce::analysis::{bracket_roots, oscillation_wavelength};
use neqforce::constants::{thermal_frequency, C};
use neqforce::materials::{
    dipole_t, fresnel_coefficient, library, polarizability, static_expansion, DielectricModel, LorentzSet,
    Oscillator, Polarization, SphereSpec,
};
use neqforce::quadrature::{bose_weighted_integral, integrate, QuadratureSettings};
use num_complex::Complex64;
use proptest::prelude::*;
use std::convert::Infallible;

fn complex(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn polarization() -> impl Strategy<Value = Polarization> {
    prop_oneof![Just(Polarization::M), Just(Polarization::N)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fresnel_swap_symmetry(
        omega in 1e12f64..1e15,
        k_ratio in 0.0f64..5.0,
        (er, ei, mr, mi) in (-10.0f64..20.0, 0.0f64..10.0, 0.5f64..5.0, 0.0f64..2.0),
        p in polarization(),
    ) {
        let (eps, mu) = (complex(er, ei), complex(mr, mi));
        let k = k_ratio * omega / C;
        let a = fresnel_coefficient(eps, mu, omega, k, p);
        let b = fresnel_coefficient(mu, eps, omega, k, p.other());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn propagating_reflection_is_bounded(
        omega in 1e12f64..1e15,
        k_ratio in 0.0f64..0.999,
        (er, ei) in (-10.0f64..20.0, 0.0f64..10.0),
        p in polarization(),
    ) {
        let r = fresnel_coefficient(complex(er, ei), complex(1.0, 0.0), omega, k_ratio * omega / C, p);
        prop_assert!(r.norm() <= 1.0 + 1e-12, "|r| = {}", r.norm());
    }

    #[test]
    fn reflection_continuous_at_light_line(
        omega in 1e12f64..1e15,
        (er, ei) in (1.5f64..6.0, 0.0f64..2.0),
        p in polarization(),
    ) {
        let eps = complex(er, ei);
        let mu = complex(1.0, 0.0);
        let k0 = omega / C;
        let below = fresnel_coefficient(eps, mu, omega, k0 * (1.0 - 1e-15), p);
        let above = fresnel_coefficient(eps, mu, omega, k0 * (1.0 + 1e-15), p);
        prop_assert!((below - above).norm() < 1e-6, "jump {}", (below - above).norm());
    }

    #[test]
    fn dipole_t_scales_as_cube_of_radius(
        omega in 1e12f64..1e15,
        radius in 1e-8f64..1e-5,
        (er, ei) in (1.0f64..20.0, 0.0f64..10.0),
    ) {
        let model = DielectricModel::Constant(complex(er, ei));
        let small = dipole_t(&SphereSpec::new(radius, model.clone(), 300.0).unwrap(), omega).unwrap();
        let big = dipole_t(&SphereSpec::new(2.0 * radius, model, 300.0).unwrap(), omega).unwrap();
        prop_assert_eq!(big.n, small.n * 8.0);
        prop_assert_eq!(big.m, small.m * 8.0);
    }

    #[test]
    fn builtin_materials_are_passive(log_omega in 11.0f64..16.0, which in 0usize..3) {
        let model = [library::sio2, library::sic, library::single_lorentz][which]();
        let omega = 10f64.powf(log_omega);
        let eps = model.epsilon(omega).unwrap();
        prop_assert!(eps.im >= 0.0);
        let alpha = polarizability(&SphereSpec::new(1e-6, model, 300.0).unwrap(), omega).unwrap();
        prop_assert!(alpha.im >= 0.0);
    }

    #[test]
    fn lorentz_imaginary_axis_is_real_and_decreasing(
        eps_inf in 1.0f64..5.0,
        wr in 1e13f64..1e15,
        strength in 0.1f64..10.0,
        damping in 0.001f64..0.3,
        xi in 0.0f64..1e16,
    ) {
        let model = DielectricModel::Lorentz(LorentzSet {
            eps_inf,
            oscillators: vec![Oscillator::from_static_contribution(wr, strength, damping)],
        });
        let here = model.epsilon_imag_axis(xi).unwrap();
        let further = model.epsilon_imag_axis(xi * 1.5 + 1e10).unwrap();
        prop_assert!(here >= 1.0 && further <= here);
    }

    #[test]
    fn static_expansion_identity(eps0_shift in 0.0f64..30.0, radius in 1e-8f64..1e-5) {
        let eps0 = 1.0 + eps0_shift;
        let sphere = SphereSpec::new(radius, DielectricModel::constant(eps0), 300.0).unwrap();
        let e = static_expansion(&sphere).unwrap();
        let r3 = radius.powi(3);
        prop_assert!((e.alpha_i0 * (e.eps0 + 2.0).powi(2) / (3.0 * r3) - 1.0).abs() < 1e-14);
        prop_assert!((e.alpha0 / ((eps0 - 1.0) / (eps0 + 2.0) * r3) - 1.0).abs() < 1e-14 || e.alpha0 == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadrature_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, w1 in 0.5f64..5.0, w2 in 0.5f64..5.0) {
        let s = QuadratureSettings { abs_floor: 0.0, ..Default::default() };
        let f = |x: f64| 1.0 / (1.0 + (x - w1).powi(2));
        let g = |x: f64| (-x / w2).exp() * x.sin();
        let lhs = integrate(|x| a * f(x) + b * g(x), 0.0, 10.0, &[], &s);
        let rf = integrate(f, 0.0, 10.0, &[], &s);
        let rg = integrate(g, 0.0, 10.0, &[], &s);
        let rhs = a * rf.value + b * rg.value;
        let bound = lhs.error_estimate + a.abs() * rf.error_estimate + b.abs() * rg.error_estimate;
        prop_assert!((lhs.value - rhs).abs() <= bound + 1e-14 * (a.abs() * rf.value.abs() + b.abs() * rg.value.abs()));
    }

    #[test]
    fn bose_cutoff_insensitivity(p in 1i32..4, peak in 0.5f64..8.0, temperature in 10.0f64..1000.0) {
        let wt = thermal_frequency(temperature);
        let wr = peak * wt;
        let f = |w: f64| w.powi(p) / (1.0 + ((w - wr) / (0.2 * wr)).powi(2));
        let s60 = QuadratureSettings::default();
        let s80 = QuadratureSettings { bose_cutoff_x: 80.0, ..s60 };
        let a = bose_weighted_integral(f, temperature, &s60, &[wr]);
        let b = bose_weighted_integral(f, temperature, &s80, &[wr]);
        prop_assert!(a.converged && b.converged);
        prop_assert!((a.value / b.value - 1.0).abs() < 10.0 * s60.rel_tol);
    }

    #[test]
    fn tightening_tolerance_stays_within_error_bounds(peak in 0.5f64..8.0, temperature in 10.0f64..1000.0) {
        let wt = thermal_frequency(temperature);
        let wr = peak * wt;
        let f = |w: f64| w / (1.0 + ((w - wr) / (0.05 * wr)).powi(2));
        let loose = QuadratureSettings { rel_tol: 1e-5, abs_floor: 0.0, ..Default::default() };
        let tight = QuadratureSettings { rel_tol: 5e-6, ..loose };
        let a = bose_weighted_integral(f, temperature, &loose, &[wr]);
        let b = bose_weighted_integral(f, temperature, &tight, &[wr]);
        prop_assert!((a.value - b.value).abs() <= a.error_estimate + b.error_estimate);
    }

    #[test]
    fn sign_changes_alternate(freq in 0.5f64..3.0, phase in 0.0f64..6.0) {
        let f = |x: f64| (freq * x + phase).sin();
        let samples: Vec<(f64, f64)> = (0..400).map(|i| { let x = 0.05 * i as f64; (x, f(x)) }).collect();
        let roots = bracket_roots(&samples, 1e-9, |x| Ok::<_, Infallible>(f(x)));
        prop_assert!(roots.len() >= 2);
        prop_assert!(roots.windows(2).all(|w| w[0].rising != w[1].rising));
        for r in &roots {
            prop_assert!(f(r.x).abs() < 1e-7);
        }
    }

    #[test]
    fn synthetic_wavelength_recovered(wavelength in 1.0f64..5.0) {
        let k = 2.0 * std::f64::consts::PI / wavelength;
        let samples: Vec<(f64, f64)> = (0..4000).map(|i| { let x = 10.0 + 0.01 * i as f64; (x, (k * x).cos() / x) }).collect();
        let est = oscillation_wavelength(&samples).unwrap();
        prop_assert!((est.wavelength / wavelength - 1.0).abs() < 0.01);
    }
}
