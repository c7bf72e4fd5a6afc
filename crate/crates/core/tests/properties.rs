//! Property tests over randomly drawn profiles and parameters.

use std::f64::consts::PI;

use mkdv_core::evolve::{build_chi, rhs, EvolveOptions, RhsMode};
use mkdv_core::fit::fit_power_law;
use mkdv_core::io::{fmt_f64, profile_from_str, profile_to_string, Config};
use mkdv_core::profile::{e_norm, reconstruct_physical};
use mkdv_core::scatter::r_func;
use mkdv_core::verify::classical_airy;
use mkdv_core::{airy_fock, spectral, GridSpec, Profile};
use num_complex::Complex64;
use proptest::prelude::*;

fn gaussian_mix(c: [(f64, f64); 2], centre: f64, width: f64) -> impl Fn(f64) -> Complex64 {
    move |p| {
        let a = Complex64::new(c[0].0, c[0].1) * (-(p / width).powi(2)).exp();
        let b = Complex64::new(c[1].0, c[1].1) * (-((p - centre) / width).powi(2)).exp();
        a + b
    }
}

fn coef() -> impl Strategy<Value = (f64, f64)> {
    (-1.0..1.0f64, -1.0..1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn airy_fock_real_part_is_scaled_classical_airy(z in -20.0..20.0f64) {
        let c = 3f64.powf(-1.0 / 3.0);
        let a = airy_fock(z).unwrap();
        prop_assert!((a.re - c * classical_airy(c * z).0).abs() < 1e-9);
    }

    #[test]
    fn e_norm_is_scale_invariant(c0 in coef(), c1 in coef(), k in 0usize..3, t in 0.5..4.0f64) {
        let lambda = [0.125, 1.0, 8.0][k];
        let f = gaussian_mix([c0, c1], 1.0, 0.7);
        let g = GridSpec::default().with_p_max(6.0).build().unwrap();
        let gl = std::sync::Arc::new(g.scaled(lambda));
        // u_λ(t,x) = λ u(λ³t, λx) has profile ũ(λ³t, p/λ)
        let u = Profile::from_fn(g, lambda.powi(3) * t, &f).unwrap();
        let ul = Profile::from_fn(gl, t, |p| f(p / lambda)).unwrap();
        let (a, b) = (e_norm(&u).unwrap().e_norm, e_norm(&ul).unwrap().e_norm);
        prop_assert!((a - b).abs() <= 1e-9 * a, "{} vs {}", a, b);
    }

    #[test]
    fn both_half_axes_agree_with_the_real_part_formula(c0 in coef(), c1 in coef(), t in 0.5..3.0f64) {
        let g = GridSpec::default().with_p_max(5.0).build().unwrap();
        let u = Profile::from_fn(g, t, gaussian_mix([c0, c1], 1.5, 0.5)).unwrap();
        let f = spectral::physical_field(&u, 0.0);
        let mid = f.values.len() / 2;
        let js = [mid - 200, mid - 13, mid, mid + 57];
        let x: Vec<f64> = js.iter().map(|&j| f.x(j)).collect();
        let r = reconstruct_physical(&u, &x).unwrap();
        for (k, &j) in js.iter().enumerate() {
            prop_assert!((f.values[j] - r.u[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn cutoff_weighted_l2_is_conserved_by_the_flow(c0 in coef(), c1 in coef(), t in 1.0..3.0f64) {
        // Re ∫ conj(ũ) ∂_t ũ / χ dp = 0 whatever χ is
        let cut = build_chi(1).unwrap();
        let g = GridSpec::default().with_p_max(5.0).build().unwrap();
        let f = gaussian_mix([c0, c1], 1.0, 0.6);
        let u = Profile::from_fn(g.clone(), t, |p| f(p) * 0.2).unwrap();
        let opts = EvolveOptions { cutoff: Some(cut.clone()), mode: RhsMode::Direct, ..Default::default() };
        let du = rhs(&u, &opts).unwrap();
        let mut flux = 0.0;
        let mut scale = 0.0;
        for k in 0..g.len() {
            let w = g.weights[k] / cut.chi(g.nodes[k]);
            flux += w * (u.values[k].conj() * du[k]).re;
            scale += w * u.values[k].norm() * du[k].norm();
        }
        prop_assert!(flux.abs() <= 1e-6 * scale + 1e-300, "{} of {}", flux, scale);
    }

    #[test]
    fn chi_lies_in_unit_interval(n in 1u32..5, s in 0.0..1.0f64) {
        let c = build_chi(n).unwrap();
        let p = s * (c.alpha_n + 3.0);
        let v = c.chi(p);
        prop_assert!((0.0..=1.0).contains(&v));
        if p <= n as f64 - 1.0 {
            prop_assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_power_laws_are_recovered(slope in -2.0..2.0f64, c in 0.1..10.0f64) {
        let pts: Vec<(f64, f64)> = (0..40).map(|k| {
            let x = 10f64.powf(k as f64 / 13.0);
            (x, c * x.powf(slope))
        }).collect();
        let f = fit_power_law(&pts, [1.0, 1e3]).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-10);
        prop_assert!((f.r_squared - 1.0).abs() < 1e-10);
    }

    #[test]
    fn r_func_matches_its_definition(y in 1e-3..1e6f64) {
        let direct = 2f64.ln() - y.asinh() + y.ln();
        prop_assert!((r_func(y) - direct).abs() < 1e-9);
        // 1/⟨s⟩ < 1/s, so ℛ < 0, and ℛ(y) ≈ -1/(4y²) once y is large
        prop_assert!(r_func(y) < 0.0);
        if y > 100.0 {
            prop_assert!((r_func(y) * 4.0 * y * y + 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn numbers_round_trip_through_text(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn profiles_round_trip_through_text(c0 in coef(), c1 in coef(), t in 0.1..10.0f64) {
        let g = GridSpec::default().with_p_max(4.0).build().unwrap();
        let u = Profile::from_fn(g, t, gaussian_mix([c0, c1], 2.0, 0.8)).unwrap();
        let v = profile_from_str(&profile_to_string(&u)).unwrap();
        prop_assert_eq!(v.time, u.time);
        prop_assert_eq!(&v.values, &u.values);
        prop_assert_eq!(&v.grid.nodes, &u.grid.nodes);
        prop_assert_eq!(v.limit_at_zero, u.limit_at_zero);
    }

    #[test]
    fn config_values_are_read_back(a in -1e6..1e6f64, n in 0u64..1000, key in "[a-z_]{1,12}") {
        let text = format!("# header\n{key} = {a}\nseed = {n}  # trailing\n");
        prop_assume!(key != "seed");
        let c = Config::parse(&text, &[]).unwrap();
        prop_assert_eq!(c.get_f64(&key).unwrap(), Some(a));
        prop_assert_eq!(c.get_u64("seed").unwrap(), Some(n));
        prop_assert_eq!(c.line(&key), Some(2));
    }
}

#[test]
fn self_similar_jump_value() {
    let z = Complex64::new(0.05, 3.0 * 0.02 / (2.0 * PI));
    assert!((z.im - 0.009549).abs() < 5e-7);
}
