//! FFT route between a profile and physical space.
//!
//! `u(t,x)` is synthesized on a uniform grid from samples of `û = e^{itp³}ũ`
//! (trapezoid rule on [-P, P] with end corrections for the kinks at 0 and ±P),
//! cubed pointwise, and transformed back. The transform of `u³` is then read at
//! arbitrary frequencies with a Gaussian-regularized sinc kernel.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::profile::{Profile, TailModel};

/// Half-width (in samples) of the interpolation kernel.
const TAPS: i64 = 32;
/// Relative level below which the profile is treated as zero.
const SUPPORT_CUT: f64 = 1e-14;

/// `u(t, x_j)` on `x_j = x0 + j dx`.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
    pub time: f64,
    /// Frequency support used for the synthesis.
    pub support: f64,
}

impl PhysicalField {
    pub fn x(&self, j: usize) -> f64 {
        self.x0 + self.dx * j as f64
    }
}

/// Samples of `(u³)^(q)` at `q_m = m dq`, `m ≥ 0`.
#[derive(Debug, Clone)]
pub struct CubeSpectrum {
    pub dq: f64,
    pub values: Vec<Complex64>,
    pub time: f64,
    /// Energy of `u³` reaches the top of the resolved band.
    pub aliasing_warning: bool,
}

struct Plan {
    support: f64,
    m: usize,
    dp: f64,
    n: usize,
    dx: f64,
}

fn plan(u: &Profile, p_out: f64) -> Plan {
    let t = u.time;
    let support = match u.tail {
        TailModel::Truncated => u.effective_support(SUPPORT_CUT),
        TailModel::Frozen => u.grid.p_max,
    };
    let half = 3.0 * t * support * support + 100.0 + 30.0 * t.cbrt();
    let length = 2.0 * half;
    let m = (support * length / (2.0 * PI)).ceil().max(8.0) as usize;
    let dp = support / m as f64;
    let length = 2.0 * PI / dp;
    // band needed so that images of supp (u³)^ ⊂ [-3P, 3P] miss every kernel tap
    let band = 3.0 * support + p_out.abs() + (TAPS as f64 + 2.0) * dp;
    let need = (length * band / (2.0 * PI)).ceil() as usize;
    let n = need.max(2 * m + 2).next_power_of_two();
    Plan { support, m, dp, n, dx: length / n as f64 }
}

/// `u(t,·)` on the FFT grid of a plan sized for outputs up to `p_out`.
pub fn physical_field(u: &Profile, p_out: f64) -> PhysicalField {
    let pl = plan(u, p_out);
    synthesize(u, &pl)
}

fn synthesize(u: &Profile, pl: &Plan) -> PhysicalField {
    let (t, m, n, dp) = (u.time, pl.m, pl.n, pl.dp);
    let samples: Vec<Complex64> = (1..=m)
        .into_par_iter()
        .map(|k| {
            let p = k as f64 * dp;
            let w = if k == m { 0.5 } else { 1.0 };
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            u.value_at(p) * Complex64::from_polar(w * sign, t * p * p * p)
        })
        .collect();
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    a[0] = Complex64::new(u.limit_at_zero.re, 0.0);
    for (k, s) in samples.iter().enumerate() {
        a[k + 1] = *s;
        a[n - k - 1] = s.conj();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut a);

    // The trapezoid sum is the L-periodization of u. The kink at 0 gives u a slow
    // algebraic tail whose images are removed in closed form; the cut at ±P is
    // handled by Euler-Maclaurin terms.
    let g0 = u.derivatives_at_zero(3);
    let big = chain(&g0, 0.0, t, 0.0);
    let jumps0: Vec<Complex64> = (0..4)
        .map(|k| if k % 2 == 0 { big[k] - big[k].conj() } else { big[k] + big[k].conj() })
        .collect();
    let pp = pl.support;
    let gp = u.derivatives_at(pp, 3);
    let (c1, c3) = (dp * dp / 12.0 / (2.0 * PI), dp.powi(4) / 720.0 / (2.0 * PI));
    let length = n as f64 * pl.dx;
    let x0 = -(n as f64 / 2.0) * pl.dx;
    let values = a
        .par_iter()
        .enumerate()
        .map(|(j, v)| {
            let x = x0 + pl.dx * j as f64;
            let s = image_sums(x, length);
            // u(y) ~ (1/2π) Σ_k (-1)^{k+1} [G^(k)](0) / (iy)^{k+1} for the kink at 0
            let mut tail = Complex64::new(0.0, 0.0);
            let mut ipow = Complex64::i();
            for k in 0..4 {
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                tail += jumps0[k] * s[k] * sign / ipow;
                ipow *= Complex64::i();
            }
            let d = chain(&gp, x, t, pp);
            v.re * dp / (2.0 * PI) - tail.re / (2.0 * PI) - c1 * 2.0 * d[1].re + c3 * 2.0 * d[3].re
        })
        .collect();
    PhysicalField { x0, dx: pl.dx, values, time: t, support: pp }
}

/// Derivatives of order 0..=3 of `e^{i(px + tp³)} g(p)` from `g` and its first three derivatives.
fn chain(g: &[Complex64], x: f64, t: f64, p: f64) -> [Complex64; 4] {
    let i = Complex64::i();
    let e = Complex64::from_polar(1.0, p * x + t * p * p * p);
    let (f1, f2, f3) = (x + 3.0 * t * p * p, 6.0 * t * p, 6.0 * t);
    [
        e * g[0],
        e * (i * f1 * g[0] + g[1]),
        e * ((i * f2 - f1 * f1) * g[0] + 2.0 * i * f1 * g[1] + g[2]),
        e * ((i * f3 - 3.0 * f1 * f2 - i * f1 * f1 * f1) * g[0]
            + 3.0 * (i * f2 - f1 * f1) * g[1]
            + 3.0 * i * f1 * g[2]
            + g[3]),
    ]
}

/// `S_n(x) = Σ_{m≠0} (x + mL)^{-n}` for `n = 1..=4`.
fn image_sums(x: f64, length: f64) -> [f64; 4] {
    let a = PI / length;
    let z = a * x;
    if z.abs() < 0.05 {
        let (a2, a4, a6) = (a * a, a.powi(4), a.powi(6));
        return [
            -a2 * x / 3.0 - a4 * x.powi(3) / 45.0 - 2.0 * a6 * x.powi(5) / 945.0,
            a2 / 3.0 + a4 * x * x / 15.0 + 2.0 * a6 * x.powi(4) / 189.0,
            -a4 * x / 15.0 - 4.0 * a6 * x.powi(3) / 189.0,
            a4 / 45.0 + 4.0 * a6 * x * x / 189.0,
        ];
    }
    let c = 1.0 / z.tan();
    let q = 1.0 + c * c;
    [
        a * c - 1.0 / x,
        a * a * q - 1.0 / (x * x),
        a.powi(3) * c * q - 1.0 / x.powi(3),
        a.powi(4) * q * (1.0 + 3.0 * c * c) / 3.0 - 1.0 / x.powi(4),
    ]
}

/// `(u³)^` sampled finely enough to be read anywhere in `|q| ≤ p_out`.
pub fn cube_spectrum(u: &Profile, p_out: f64) -> Result<CubeSpectrum> {
    let pl = plan(u, p_out);
    let field = synthesize(u, &pl);
    let n = pl.n;
    let mut b = vec![Complex64::new(0.0, 0.0); 2 * n];
    for (j, v) in field.values.iter().enumerate() {
        b[j + n / 2] = Complex64::new(v * v * v, 0.0);
    }
    FftPlanner::new().plan_fft_forward(2 * n).process(&mut b);
    let dq = pl.dp / 2.0;
    let keep = ((p_out.abs() / dq).ceil() as usize + TAPS as usize + 2).min(n);
    let values: Vec<Complex64> = (0..=keep)
        .map(|m| b[m] * if m % 2 == 0 { field.dx } else { -field.dx })
        .collect();
    let peak = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let top = b[(n - n / 20)..=n].iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(CubeSpectrum { dq, values, time: u.time, aliasing_warning: top > 1e-10 * peak.max(f64::MIN_POSITIVE) })
}

impl CubeSpectrum {
    fn sample(&self, m: i64) -> Complex64 {
        let v = self.values.get(m.unsigned_abs() as usize).copied().unwrap_or_default();
        if m < 0 {
            v.conj()
        } else {
            v
        }
    }

    /// `(u³)^(q)` by Gaussian-regularized sinc interpolation.
    pub fn at(&self, q: f64) -> Complex64 {
        let s = q / self.dq;
        let j0 = s.round() as i64;
        let sigma2 = 2.0 * TAPS as f64 / PI;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in (j0 - TAPS)..=(j0 + TAPS) {
            let d = s - m as f64;
            let sinc = if d == 0.0 { 1.0 } else { (PI * d).sin() / (PI * d) };
            acc += self.sample(m) * (sinc * (-d * d / (2.0 * sigma2)).exp());
        }
        acc
    }

    /// `𝒩[u](p) = 4π² i p e^{-itp³} (u³)^(p)`.
    pub fn nonlinearity(&self, p: f64) -> Complex64 {
        let t = self.time;
        Complex64::new(0.0, 4.0 * PI * PI * p) * Complex64::from_polar(1.0, -t * p * p * p) * self.at(p)
    }
}

/// `𝒩[u]` at each `p` through physical space.
pub fn nonlinearity(u: &Profile, ps: &[f64]) -> Result<Vec<Complex64>> {
    if u.sup() == 0.0 || ps.is_empty() {
        return Ok(vec![Complex64::new(0.0, 0.0); ps.len()]);
    }
    let p_out = ps.iter().fold(0.0f64, |a, p| a.max(p.abs()));
    let spec = cube_spectrum(u, p_out)?;
    Ok(ps.par_iter().map(|&p| spec.nonlinearity(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn bump(p: f64) -> Complex64 {
        let s = p / 2.0;
        if s.abs() >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(1.0 - 0.3 * p * p, 0.4 * p) * (1.0 - s * s).powi(8)
    }

    #[test]
    fn synthesis_matches_pointwise_reconstruction() {
        let g = GridSpec::default().with_p_max(2.0).build().unwrap();
        let u = Profile::from_fn(g, 1.5, bump).unwrap();
        let f = physical_field(&u, 1.0);
        let mid = f.values.len() / 2;
        for j in [mid / 4, mid - 37, mid, mid + 11, mid + mid / 2] {
            let x = f.x(j);
            let r = u.half_line_integral(x).re / PI;
            assert!((f.values[j] - r).abs() < 1e-13, "x={x}: {} vs {r}", f.values[j]);
        }
    }

    #[test]
    fn end_corrections_handle_a_jump_at_zero() {
        // ũ = (1 + i/2) e^{-p²} has a jump at 0 after conjugate extension
        let g = GridSpec::default().with_p_max(8.0).build().unwrap();
        let u = Profile::from_fn(g, 1.0, |p| Complex64::new(1.0, 0.5) * (-p * p).exp()).unwrap();
        let f = physical_field(&u, 1.0);
        let mid = f.values.len() / 2;
        for j in [mid / 8, mid - mid / 8, mid, mid + mid / 3, 2 * mid - 2] {
            let r = u.half_line_integral(f.x(j)).re / PI;
            assert!((f.values[j] - r).abs() < 1e-11, "{} vs {r}", f.values[j]);
        }
    }

    #[test]
    fn cube_spectrum_of_a_gaussian_field() {
        let g = GridSpec::default().with_p_max(8.0).build().unwrap();
        let u = Profile::from_fn(g, 0.01, |p| Complex64::new((-p * p).exp(), 0.0)).unwrap();
        let spec = cube_spectrum(&u, 2.0).unwrap();
        let f = physical_field(&u, 2.0);
        for &q in &[0.0, 0.37, 1.2, -0.8] {
            let direct: Complex64 = f
                .values
                .iter()
                .enumerate()
                .map(|(j, v)| Complex64::from_polar(v * v * v * f.dx, -q * f.x(j)))
                .sum();
            assert!((spec.at(q) - direct).norm() < 1e-10, "q={q}");
        }
        assert!(!spec.aliasing_warning);
    }

    #[test]
    fn zero_profile_gives_zero() {
        let g = GridSpec::default().build().unwrap();
        let u = Profile::zeros(g, 2.0).unwrap();
        assert!(nonlinearity(&u, &[0.5, 1.0]).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn reflection_is_conjugation() {
        let g = GridSpec::default().with_p_max(2.0).build().unwrap();
        let u = Profile::from_fn(g, 0.7, bump).unwrap();
        let v = nonlinearity(&u, &[0.9, -0.9]).unwrap();
        assert!((v[0] - v[1].conj()).norm() < 1e-14 * v[0].norm().max(1e-300));
    }
}
