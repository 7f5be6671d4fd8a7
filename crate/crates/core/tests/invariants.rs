use hkbose::cli::parse_complex;
use hkbose::propagator::{matrix_element, Method};
use hkbose::wigner::{dyad_wigner, initial_wigner, twa_wigner, CoherentInitial};
use hkbose::{g_n, model, ModelParams, PrecisionConfig};
use num_complex::Complex64;
use proptest::prelude::*;

fn cfg() -> PrecisionConfig {
    PrecisionConfig { rel_tol: 1e-9, abs_tol: 1e-12, working_digits: 30, ..PrecisionConfig::default() }
}

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_is_conjugation_symmetric(n in 0u32..=8, tau in 0.01f64..2.0) {
        let plus = g_n(n, tau, &cfg()).unwrap().value;
        let minus = g_n(n, -tau, &cfg()).unwrap().value;
        prop_assert!((plus - minus.conj()).norm() < 1e-8);
    }

    #[test]
    fn kernel_never_exceeds_unit_modulus(n in 0u32..=10, tau in 0.0f64..3.0) {
        prop_assert!(g_n(n, tau, &cfg()).unwrap().value.norm() <= 1.0 + 1e-9);
    }

    #[test]
    fn harmonic_hk_is_a_pure_phase(n in 0u32..=10, t in 0.0f64..20.0, omega in 0.2f64..3.0) {
        let params = ModelParams::new(omega, 0.0).unwrap();
        let s = matrix_element(&params, Method::Hk, n, t, &cfg()).unwrap();
        let expected = Complex64::from_polar(1.0, -f64::from(n) * omega * t);
        prop_assert!((s.value - expected).norm() < 1e-9);
    }

    #[test]
    fn hk_and_exact_share_the_modulus_free_phase(n in 0u32..=10, t in 0.0f64..5.0, u in 0.0f64..0.2) {
        // the harmonic factor cancels in the ratio, leaving the radial kernel
        let params = ModelParams::new(1.0, u).unwrap();
        let hk = matrix_element(&params, Method::Hk, n, t, &cfg()).unwrap().value;
        let g = g_n(n, params.tau(t), &cfg()).unwrap().value;
        let harmonic = Complex64::from_polar(1.0, -f64::from(n) * t);
        prop_assert!((hk - g * harmonic).norm() < 1e-9);
    }

    #[test]
    fn dyad_wigner_is_hermitian(u in complex(2.0), v in complex(2.0), a in complex(3.0)) {
        let uv = dyad_wigner(u, v, a);
        let vu = dyad_wigner(v, u, a);
        prop_assert!((uv - vu.conj()).norm() < 1e-12 * (1.0 + uv.norm()));
        let diag = dyad_wigner(u, u, a);
        prop_assert!(diag.im.abs() < 1e-15 && diag.re >= 0.0);
    }

    #[test]
    fn coherent_series_matches_gaussian(z in complex(2.0), a in complex(3.5)) {
        let init = CoherentInitial::new(z);
        let state = init.number_state(init.poisson_cutoff(1e-20));
        prop_assert!((state.wigner(a) - initial_wigner(z, a)).abs() < 1e-8);
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn twa_field_is_non_negative(z in complex(2.5), a in complex(4.0), t in 0.0f64..40.0, u in 0.0f64..0.3) {
        let params = ModelParams::new(1.0, u).unwrap();
        prop_assert!(twa_wigner(z, &params, t, a) >= 0.0);
    }

    #[test]
    fn coherent_overlap_is_hermitian_and_bounded(u in complex(3.0), v in complex(3.0)) {
        let uv = model::coherent_overlap(u, v);
        prop_assert!((uv - model::coherent_overlap(v, u).conj()).norm() < 1e-14);
        prop_assert!(uv.norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn complex_text_round_trips(re in -1e3f64..1e3, im in -1e3f64..1e3) {
        let text = format!("{re}{im:+}j");
        prop_assert_eq!(parse_complex(&text).unwrap(), Complex64::new(re, im));
    }
}
