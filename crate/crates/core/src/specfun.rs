//! The complex Airy–Fock function and half-line cubic-phase integrals.
//!
//! `Ai(z) = (1/π) ∫₀^∞ e^{ipz + ip³} dp`. Its real part is a rescaled classical
//! Airy function, `Re Ai(z) = 3^{-1/3} Ai(3^{-1/3} z)`.
//!
//! All integrals here are computed by running along the real axis only as far
//! as the last real saddle of the phase and then leaving on the ray of angle
//! π/6, where `e^{ip³}` decays like `e^{-s³}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;

pub type ComplexValue = Complex64;

const ORDER: usize = 16;
/// Phase (radians) allowed per 16-point panel.
const PANEL_PHASE: f64 = 3.0;
/// Stop the ray once the integrand has decayed by `e^{-DECAY}`.
const DECAY: f64 = 46.0;

/// `Ai(z) = (1/π) ∫₀^∞ e^{ipz+ip³} dp`.
///
/// ```
/// let a = mkdv_core::airy_fock(0.0).unwrap();
/// // Γ(4/3) e^{iπ/6} / π
/// assert!((a.re - 0.246_162_703_873_882_8).abs() < 1e-12 && (a.im - 0.142_122_103_346_032_4).abs() < 1e-12);
/// ```
pub fn airy_fock(z: f64) -> Result<ComplexValue> {
    check(z)?;
    Ok(cubic_phase_tail(z, 0.0, 0) / PI)
}

/// `Ai'(z) = (1/π) ∫₀^∞ ip e^{ipz+ip³} dp`.
pub fn airy_fock_deriv(z: f64) -> Result<ComplexValue> {
    check(z)?;
    Ok(cubic_phase_tail(z, 0.0, 1) / PI)
}

fn check(z: f64) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Airy-Fock argument must be finite, got {z}")))
    }
}

/// `∫_a^∞ (ip)^m e^{i(pz + p³)} dp` for `a ≥ 0`, `m ∈ {0, 1}`.
pub fn cubic_phase_tail(z: f64, a: f64, m: u32) -> ComplexValue {
    let a = a.max(0.0);
    // start of the ray: past the real saddle √(-z/3), with room to spare
    let b_min = if z >= -1.0 { 0.0 } else { (2.0 * (-z) / 3.0).sqrt() + 0.5 };
    let b = a.max(b_min);
    let pw = |p: Complex64| -> Complex64 {
        if m == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::i() * p
        }
    };
    let mut total = Complex64::new(0.0, 0.0);
    if b > a {
        let slope = z.abs() + 3.0 * b * b;
        let panels = ((b - a) * slope / PANEL_PHASE).ceil().max(1.0) as usize;
        total += quad::composite(a, b, panels, ORDER, |p| {
            let pc = Complex64::new(p, 0.0);
            pw(pc) * Complex64::from_polar(1.0, p * z + p * p * p)
        });
    }
    let dir = Complex64::from_polar(1.0, PI / 6.0);
    let phase = |r: f64| -> Complex64 {
        let p = Complex64::new(b, 0.0) + dir * r;
        p * z + p * p * p
    };
    let f = |r: f64| -> Complex64 {
        let p = Complex64::new(b, 0.0) + dir * r;
        pw(p) * (Complex64::i() * phase(r)).exp() * dir
    };
    // march along the ray with panels sized by the local phase speed
    let mut r = 0.0;
    let r_rule = quad::rule(ORDER);
    loop {
        let p = Complex64::new(b, 0.0) + dir * r;
        let speed = (z + 3.0 * p * p).norm().max(1.0);
        let h = (PANEL_PHASE / speed).min(0.5);
        total += r_rule.integrate(r, r + h, f);
        r += h;
        if phase(r).im > DECAY {
            break;
        }
    }
    total
}

/// `∫_a^∞ e^{ipx + ip³t} dp` for `t > 0`, via the unit-time kernel.
pub fn cubic_phase_tail_t(x: f64, t: f64, a: f64) -> ComplexValue {
    let s = t.cbrt();
    cubic_phase_tail(x / s, a * s, 0) / s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_origin_matches_rotated_closed_form() {
        // Γ(4/3) e^{iπ/6} / π
        let g43 = 0.892_979_511_569_249_2;
        let expect = Complex64::from_polar(g43 / PI, PI / 6.0);
        let a = airy_fock(0.0).unwrap();
        assert!((a - expect).norm() < 1e-13, "{a} vs {expect}");
    }

    #[test]
    fn derivative_at_origin() {
        // i e^{iπ/3} Γ(2/3) / (3π)
        let g23 = 1.354_117_939_426_400_4;
        let expect = Complex64::i() * Complex64::from_polar(g23 / (3.0 * PI), PI / 3.0);
        let d = airy_fock_deriv(0.0).unwrap();
        assert!((d - expect).norm() < 1e-13);
        assert!((d.re + 0.124427).abs() < 1e-6 && (d.im - 0.071838).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(airy_fock(f64::NAN).is_err());
        assert!(airy_fock_deriv(f64::INFINITY).is_err());
    }

    #[test]
    fn derivative_is_consistent_with_finite_difference() {
        for &z in &[-30.0, -7.5, -1.0, 0.3, 4.0] {
            let h = 1e-4;
            let fd = (airy_fock(z + h).unwrap() - airy_fock(z - h).unwrap()) / (2.0 * h);
            let d = airy_fock_deriv(z).unwrap();
            assert!((fd - d).norm() < 1e-6 * (1.0 + d.norm()), "z={z}");
        }
    }

    #[test]
    fn decays_monotonically_on_the_right() {
        let mut prev = f64::INFINITY;
        for k in 0..60 {
            let z = 2.0 + 0.8 * k as f64;
            let a = airy_fock(z).unwrap().norm();
            assert!(a < prev);
            prev = a;
        }
    }

    #[test]
    fn tail_splits_the_integral() {
        // ∫_0^∞ = ∫_0^a + ∫_a^∞
        let (z, a) = (-12.0, 3.3);
        let head: Complex64 = quad::composite(0.0, a, 400, 16, |p| Complex64::from_polar(1.0, p * z + p * p * p));
        let whole = cubic_phase_tail(z, 0.0, 0);
        let tail = cubic_phase_tail(z, a, 0);
        assert!((head + tail - whole).norm() < 1e-12);
    }

    #[test]
    fn time_scaled_tail() {
        let (x, t, a) = (-40.0, 2.5, 1.0);
        let head: Complex64 = quad::composite(0.0, a, 400, 16, |p| Complex64::from_polar(1.0, p * x + t * p * p * p));
        let whole = cubic_phase_tail_t(x, t, 0.0);
        assert!((head + cubic_phase_tail_t(x, t, a) - whole).norm() < 1e-12);
    }
}
