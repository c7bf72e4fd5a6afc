//! Profiles `ũ(t,·)` on a frequency grid, their norms, and physical-space reconstruction.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::quad;
use crate::specfun;

/// What the profile is taken to be beyond `p_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TailModel {
    /// Zero beyond the grid.
    #[default]
    Truncated,
    /// Continued by its value at `p_max` (profiles that do not decay).
    Frozen,
}

/// `ũ(t,p)` sampled at the nodes of a grid, with its one-sided limit at `0⁺`.
///
/// Negative frequencies are never stored: `ũ(t,-p) = conj ũ(t,p)`.
#[derive(Debug, Clone)]
pub struct Profile {
    pub grid: Arc<FrequencyGrid>,
    pub values: Vec<Complex64>,
    pub limit_at_zero: Complex64,
    pub time: f64,
    pub tail: TailModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub e_norm: f64,
    pub sup_part: f64,
    pub deriv_part: f64,
}

impl Profile {
    pub fn new(grid: Arc<FrequencyGrid>, values: Vec<Complex64>, limit_at_zero: Complex64, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidProfile(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if !(time > 0.0 && time.is_finite()) {
            return Err(Error::InvalidProfile(format!("time must be positive, got {time}")));
        }
        if values.iter().chain(std::iter::once(&limit_at_zero)).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidProfile("non-finite profile value".into()));
        }
        Ok(Profile { grid, values, limit_at_zero, time, tail: TailModel::Truncated })
    }

    /// Sample `f` at the nodes; `f(0.0)` supplies the limit at `0⁺`.
    pub fn from_fn(grid: Arc<FrequencyGrid>, time: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.nodes.iter().map(|&p| f(p)).collect();
        let lim = f(0.0);
        Profile::new(grid, values, lim, time)
    }

    pub fn zeros(grid: Arc<FrequencyGrid>, time: f64) -> Result<Self> {
        let n = grid.len();
        Profile::new(grid, vec![Complex64::new(0.0, 0.0); n], Complex64::new(0.0, 0.0), time)
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_time(&self, time: f64) -> Self {
        let mut p = self.clone();
        p.time = time;
        p
    }

    pub fn with_values(&self, values: Vec<Complex64>) -> Self {
        let mut p = self.clone();
        p.values = values;
        p
    }

    pub fn nodes(&self) -> &[f64] {
        &self.grid.nodes
    }

    /// Interpolated `ũ(t,p)` for any real `p`.
    ///
    /// Within a panel this is the panel's interpolating polynomial; the first
    /// panel also passes through the stored limit at `0⁺`. Negative arguments
    /// are read through conjugate symmetry, so nothing is interpolated across 0.
    pub fn value_at(&self, p: f64) -> Complex64 {
        if p < 0.0 {
            return self.value_at(-p).conj();
        }
        if p == 0.0 {
            return self.limit_at_zero;
        }
        if p > self.grid.p_max {
            return match self.tail {
                TailModel::Truncated => Complex64::new(0.0, 0.0),
                TailModel::Frozen => self.edge_value(),
            };
        }
        let k = self.grid.panel_of(p);
        self.panel_eval(k, self.grid.local(k, p))
    }

    /// One-sided derivative of the interpolant at `p ≥ 0` (right derivative at 0).
    pub fn deriv_at(&self, p: f64) -> Complex64 {
        self.derivatives_at(p, 1)[1]
    }

    /// `[ũ, ∂ũ, …, ∂^order ũ]` of the interpolant at `p ∈ [0, p_max]`, one-sided
    /// at panel edges (from the right at 0, from the left elsewhere).
    pub fn derivatives_at(&self, p: f64, order: usize) -> Vec<Complex64> {
        let p = p.clamp(0.0, self.grid.p_max);
        let k = self.grid.panel_of(if p == 0.0 { f64::MIN_POSITIVE } else { p });
        let pn = &self.grid.panels[k];
        let scale = 2.0 / (pn.b - pn.a);
        let s = self.grid.local(k, p);
        let basis = self.grid.basis();
        let m = self.grid.order;
        let vals = &self.values[pn.start..pn.start + m];
        let (nodes, bary, mut data): (&[f64], &[f64], Vec<Complex64>) = if k == 0 {
            let mut buf = Vec::with_capacity(m + 1);
            buf.push(self.limit_at_zero);
            buf.extend_from_slice(vals);
            (&basis.left_nodes, &basis.left_bary, buf)
        } else {
            (&basis.nodes, &basis.bary, vals.to_vec())
        };
        let mut out = Vec::with_capacity(order + 1);
        let mut factor = 1.0;
        for _ in 0..=order {
            out.push(quad::bary_eval(nodes, bary, &data, s) * factor);
            data = quad::differentiate_nodal(nodes, bary, &data);
            factor *= scale;
        }
        out
    }

    /// `[ũ, ∂ũ, …]` at `0⁺` from a geometric stencil reaching out to `0.1`.
    ///
    /// The panels next to 0 are far too narrow to differentiate on directly.
    pub fn derivatives_at_zero(&self, order: usize) -> Vec<Complex64> {
        let mut xs = vec![0.0];
        let mut fs = vec![self.limit_at_zero];
        let reach = 0.1f64.min(self.grid.p_max);
        for j in (0..7).rev() {
            let target = reach / 2f64.powi(j);
            let i = self.grid.nodes.partition_point(|&p| p < target).min(self.grid.len() - 1);
            if self.grid.nodes[i] > *xs.last().unwrap() {
                xs.push(self.grid.nodes[i]);
                fs.push(self.values[i]);
            }
        }
        (0..=order)
            .map(|k| {
                if k == 0 {
                    return self.limit_at_zero;
                }
                let w = quad::fd_weights(0.0, &xs, k);
                w.iter().zip(&fs).map(|(c, v)| v * c).sum()
            })
            .collect()
    }

    /// Value of the last panel's polynomial at `p_max`.
    pub fn edge_value(&self) -> Complex64 {
        let k = self.grid.panels.len() - 1;
        self.panel_eval(k, 1.0)
    }

    fn panel_eval(&self, k: usize, s: f64) -> Complex64 {
        let pn = &self.grid.panels[k];
        let m = self.grid.order;
        let basis = self.grid.basis();
        let vals = &self.values[pn.start..pn.start + m];
        if k == 0 {
            let mut buf = [Complex64::new(0.0, 0.0); 65];
            assert!(m < buf.len(), "panel order too large");
            buf[0] = self.limit_at_zero;
            buf[1..=m].copy_from_slice(vals);
            quad::bary_eval(&basis.left_nodes, &basis.left_bary, &buf[..=m], s)
        } else {
            quad::bary_eval(&basis.nodes, &basis.bary, vals, s)
        }
    }

    /// `∂_p ũ` at the nodes by finite differences (the limit at 0⁺ is not used,
    /// so nothing is differenced across the jump).
    pub fn nodal_derivative(&self) -> Vec<Complex64> {
        finite_difference(&self.grid.nodes, &self.values)
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(self.limit_at_zero.norm(), f64::max)
    }

    /// `∫₀^∞ |ũ|² w(p) dp` over the grid.
    pub fn weighted_l2(&self, weight: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .nodes
            .iter()
            .zip(&self.grid.weights)
            .zip(&self.values)
            .map(|((p, w), v)| w * v.norm_sqr() * weight(*p))
            .sum()
    }

    /// Smallest `P` such that `|ũ| ≤ rel·sup` on every node above `P`.
    pub fn effective_support(&self, rel: f64) -> f64 {
        if self.tail == TailModel::Frozen {
            return self.grid.p_max;
        }
        let cut = rel * self.sup();
        match self.values.iter().rposition(|v| v.norm() > cut) {
            None => self.grid.nodes[0],
            Some(i) => {
                let k = self.grid.panel_of(self.grid.nodes[i]);
                self.grid.panels[k].b
            }
        }
    }

    /// Half-line oscillatory integral `∫₀^{p_max} e^{ipx + ip³t} ũ(p) dp`
    /// (plus the frozen tail when the profile does not decay).
    pub fn half_line_integral(&self, x: f64) -> Complex64 {
        let t = self.time;
        let basis = self.grid.basis();
        let r16 = quad::rule(16);
        let m = self.grid.order;
        let mut total = Complex64::new(0.0, 0.0);
        let mut buf = vec![Complex64::new(0.0, 0.0); m + 1];
        for (k, pn) in self.grid.panels.iter().enumerate() {
            let vals = &self.values[pn.start..pn.start + m];
            let (nodes, bary, data): (&[f64], &[f64], &[Complex64]) = if k == 0 {
                buf[0] = self.limit_at_zero;
                buf[1..].copy_from_slice(vals);
                (&basis.left_nodes, &basis.left_bary, &buf)
            } else {
                (&basis.nodes, &basis.bary, vals)
            };
            let speed = (x + 3.0 * t * pn.a * pn.a).abs().max((x + 3.0 * t * pn.b * pn.b).abs());
            let n_sub = (((pn.b - pn.a) * speed) / 3.0).ceil().max(1.0) as usize;
            let h = 2.0 / n_sub as f64;
            for j in 0..n_sub {
                let (s0, s1) = (-1.0 + h * j as f64, -1.0 + h * (j + 1) as f64);
                total += r16.integrate(s0, s1, |s| {
                    let p = 0.5 * (pn.a + pn.b) + 0.5 * (pn.b - pn.a) * s;
                    quad::bary_eval(nodes, bary, data, s) * Complex64::from_polar(1.0, p * x + t * p * p * p)
                }) * (0.5 * (pn.b - pn.a));
            }
        }
        if self.tail == TailModel::Frozen {
            total += self.edge_value() * specfun::cubic_phase_tail_t(x, t, self.grid.p_max);
        }
        total
    }
}

/// Five-point differences on a non-uniform grid (centred in the interior,
/// shifted stencils at the two ends).
pub fn finite_difference(x: &[f64], f: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    if n < 2 {
        return vec![Complex64::new(0.0, 0.0); n];
    }
    let width = n.min(5);
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(width / 2).min(n - width);
            let w = quad::fd_weights(x[i], &x[lo..lo + width], 1);
            w.iter().zip(&f[lo..lo + width]).map(|(c, v)| v * c).sum()
        })
        .collect()
}

/// The scale-invariant norm `‖ũ‖_∞ + t^{-1/6} ‖∂_p ũ‖_{L²(0,∞)}`.
///
/// ```
/// use mkdv_core::{GridSpec, Profile};
/// use num_complex::Complex64;
/// let grid = GridSpec::default().build().unwrap();
/// let u = Profile::from_fn(grid, 1.0, |p| Complex64::new((-p * p).exp(), 0.0)).unwrap();
/// let n = mkdv_core::profile::e_norm(&u).unwrap();
/// assert!((n.e_norm - 1.79162).abs() < 1e-4);
/// ```
pub fn e_norm(u: &Profile) -> Result<NormReport> {
    if !(u.time > 0.0) {
        return Err(Error::Domain(format!("E(t) norm needs t > 0, got {}", u.time)));
    }
    let sup_part = u.sup();
    let d = u.nodal_derivative();
    let l2 = u.grid.weights.iter().zip(&d).map(|(w, v)| w * v.norm_sqr()).sum::<f64>().sqrt();
    let deriv_part = u.time.powf(-1.0 / 6.0) * l2;
    Ok(NormReport { e_norm: sup_part + deriv_part, sup_part, deriv_part })
}

/// `t^{ν/3-1/6} ‖∂_p w̃‖_{L²} + sup_p |p|^{-ν} ⟨p³t⟩^{ν/3-1/6} |w̃(p)|` for profiles vanishing at `0⁺`.
pub fn y_nu_norm(w: &Profile, nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 0.5) {
        return Err(Error::Domain(format!("nu must lie in (0, 1/2), got {nu}")));
    }
    let scale = w.sup().max(1e-300);
    if w.limit_at_zero.norm() > 1e-12 * scale.max(1.0) {
        return Err(Error::InvalidProfile(format!(
            "Y^nu norm needs a vanishing limit at 0+, got {}",
            w.limit_at_zero
        )));
    }
    let t = w.time;
    let e = nu / 3.0 - 1.0 / 6.0;
    let d = w.nodal_derivative();
    let l2 = w.grid.weights.iter().zip(&d).map(|(wt, v)| wt * v.norm_sqr()).sum::<f64>().sqrt();
    let sup = w
        .grid
        .nodes
        .iter()
        .zip(&w.values)
        .map(|(&p, v)| p.powf(-nu) * jap(p * p * p * t).powf(e) * v.norm())
        .fold(0.0, f64::max);
    Ok(t.powf(e) * l2 + sup)
}

/// Japanese bracket `⟨s⟩ = (1 + s²)^{1/2}`.
pub fn jap(s: f64) -> f64 {
    s.hypot(1.0)
}

/// Weights `a_k` with `a₀ = a₁ = 1` and `a_k ≤ α a_{2k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    pub alpha: f64,
    pub a: Vec<f64>,
    pub k_max: usize,
}

impl WeightSequence {
    pub fn new(alpha: f64, a: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0) || a.len() < 2 {
            return Err(Error::Domain("need alpha > 0 and at least a_0, a_1".into()));
        }
        if a[0] != 1.0 || a[1] != 1.0 || a.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Domain("need a_0 = a_1 = 1 and positive weights".into()));
        }
        let k_max = a.len() - 1;
        for k in 0..=(k_max.saturating_sub(1) / 2) {
            if 2 * k < k_max && a[k] > alpha * a[2 * k + 1] * (1.0 + 1e-12) {
                return Err(Error::Domain(format!("a_{k} > alpha a_{}", 2 * k + 1)));
            }
        }
        Ok(WeightSequence { alpha, a, k_max })
    }

    /// `a_k ≡ 1`, admissible for any `α ≥ 1`.
    pub fn constant(k_max: usize) -> Self {
        WeightSequence { alpha: 1.0, a: vec![1.0; k_max + 1], k_max }
    }
}

/// Samples of a real function on a uniform grid `x_j = x0 + j dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSamples {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RAlphaReport {
    pub value: f64,
    /// Index attaining the supremum.
    pub k_star: usize,
    /// The supremum sits at `k_max`, so truncation may hide larger terms.
    pub truncation_warning: bool,
}

/// `(sup_{k ≤ k_max} a_k ‖∂_x^k w‖²_{L²})^{1/2}` with spectral derivatives.
pub fn r_alpha_norm(w: &PhysicalSamples, seq: &WeightSequence) -> Result<RAlphaReport> {
    let n = w.values.len();
    if n < 2 || !(w.dx > 0.0) {
        return Err(Error::Domain("need at least two samples and dx > 0".into()));
    }
    let mut buf: Vec<Complex64> = w.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let freq = |m: usize| -> f64 {
        let k = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        2.0 * PI * k / (n as f64 * w.dx)
    };
    let mut best = (0.0f64, 0usize);
    for k in 0..=seq.k_max {
        let s: f64 = buf
            .iter()
            .enumerate()
            .map(|(m, c)| {
                let xi = if n.is_multiple_of(2) && m == n / 2 && k % 2 == 1 { 0.0 } else { freq(m) };
                c.norm_sqr() * xi.abs().powi(2 * k as i32)
            })
            .sum::<f64>()
            * w.dx
            / n as f64;
        let v = seq.a[k] * s;
        if k == 0 || v > best.0 {
            best = (v, k);
        }
    }
    Ok(RAlphaReport { value: best.0.sqrt(), k_star: best.1, truncation_warning: best.1 == seq.k_max && seq.k_max > 0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// `|ũ(p_max)|` exceeds `1e-6` of the sup while the tail is truncated.
    pub tail_warning: bool,
}

/// `u(t,x) = (1/π) Re ∫₀^∞ e^{ipx + ip³t} ũ(t,p) dp` at the given points.
pub fn reconstruct_physical(u: &Profile, x_nodes: &[f64]) -> Result<Reconstruction> {
    if x_nodes.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("non-finite x".into()));
    }
    let tail_warning = u.tail == TailModel::Truncated && u.edge_value().norm() > 1e-6 * u.sup();
    let values = x_nodes.par_iter().map(|&x| u.half_line_integral(x).re / PI).collect();
    Ok(Reconstruction { x: x_nodes.to_vec(), u: values, tail_warning })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryTerm {
    pub main: f64,
    pub residual: f64,
}

/// Leading Airy term `t^{-1/3} Re[Ai(x t^{-1/3}) ũ(t, √(-x/3t))]` and what is left of `u`.
pub fn airy_main_term(u: &Profile, x: f64) -> Result<AiryTerm> {
    let t = u.time;
    let s = t.cbrt();
    if !(x < -s) {
        return Err(Error::Domain(format!("Airy main term needs x < -t^(1/3), got x = {x}")));
    }
    let y = (-x / (3.0 * t)).sqrt();
    let ai = specfun::airy_fock(x / s)?;
    let main = (ai * u.value_at(y)).re / s;
    let full = u.half_line_integral(x).re / PI;
    Ok(AiryTerm { main, residual: full - main })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn gauss(p: f64) -> Complex64 {
        Complex64::new((-p * p).exp(), 0.0)
    }

    #[test]
    fn zero_profile_has_zero_norm() {
        let g = GridSpec::default().build().unwrap();
        let u = Profile::zeros(g, 1.0).unwrap();
        assert_eq!(e_norm(&u).unwrap().e_norm, 0.0);
    }

    #[test]
    fn gaussian_e_norm() {
        // 1 + (∫₀^∞ 4p² e^{-2p²} dp)^{1/2} = 1 + ((π/2)^{1/2}/2)^{1/2}
        let expect = 1.0 + ((PI / 2.0).sqrt() / 2.0).sqrt();
        let g = GridSpec::default().build().unwrap();
        let u = Profile::from_fn(g, 1.0, gauss).unwrap();
        let r = e_norm(&u).unwrap();
        assert!((r.e_norm - expect).abs() < 1e-4, "{} vs {expect}", r.e_norm);
        assert_eq!(r.e_norm, r.sup_part + r.deriv_part);
        assert!((expect - 1.79162).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_time() {
        let g = GridSpec::default().build().unwrap();
        assert!(Profile::zeros(g, 0.0).is_err());
    }

    #[test]
    fn interpolation_is_spectral_and_conjugate_symmetric() {
        let g = GridSpec::default().with_p_max(6.0).build().unwrap();
        let f = |p: f64| Complex64::new((-p * p).exp(), 0.3 * p * (-p * p).exp());
        let u = Profile::from_fn(g, 1.0, f).unwrap();
        for &p in &[1e-5, 3e-3, 0.17, 1.234, 4.9] {
            assert!((u.value_at(p) - f(p)).norm() < 1e-12, "p={p}");
            assert!((u.value_at(-p) - f(p).conj()).norm() < 1e-12);
        }
        assert_eq!(u.value_at(7.0), Complex64::new(0.0, 0.0));
        assert!((u.deriv_at(1.0) - Complex64::new(-2.0, 0.3 * (1.0 - 2.0)) * (-1.0f64).exp()).norm() < 1e-10);
    }

    #[test]
    fn limit_at_zero_matches_extrapolation() {
        let g = GridSpec::default().build().unwrap();
        let u = Profile::from_fn(g, 1.0, gauss).unwrap();
        let near = u.value_at(1e-9);
        assert!((near - u.limit_at_zero).norm() < 1e-10);
    }

    #[test]
    fn reconstruction_matches_refined_quadrature() {
        let g = GridSpec::default().with_p_max(8.0).build().unwrap();
        let u = Profile::from_fn(g, 1.0, gauss).unwrap();
        let got = reconstruct_physical(&u, &[0.0]).unwrap().u[0];
        // reference: plain composite rule with ten times the panel density
        let reference: Complex64 =
            quad::composite(0.0, 8.0, 2000, 16, |p| gauss(p) * Complex64::from_polar(1.0, p * p * p));
        assert!((got - reference.re / PI).abs() < 1e-8);
    }

    #[test]
    fn both_half_axes_agree_with_real_part_formula() {
        let g = GridSpec::default().with_p_max(6.0).build().unwrap();
        let f = |p: f64| Complex64::new((-p * p).exp(), 0.5 * p * (-p * p).exp());
        let u = Profile::from_fn(g, 2.0, f).unwrap();
        for &x in &[-7.0, -1.0, 0.5, 3.0] {
            let half = u.half_line_integral(x).re / PI;
            let full: Complex64 = quad::composite(-6.0, 6.0, 600, 16, |p| {
                u.value_at(p) * Complex64::from_polar(1.0, p * x + 2.0 * p * p * p)
            }) / (2.0 * PI);
            assert!(full.im.abs() < 1e-10);
            assert!((full.re - half).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_profile_reproduces_airy_fock() {
        let g = GridSpec::default().with_p_max(8.0).build().unwrap();
        let u = Profile::from_fn(g, 1.0, |_| Complex64::new(1.0, 0.0)).unwrap().with_tail(TailModel::Frozen);
        let term = airy_main_term(&u, -30.0).unwrap();
        let ai = specfun::airy_fock(-30.0).unwrap();
        assert!((term.main - ai.re).abs() < 1e-12);
        assert!(term.residual.abs() <= 0.5 * term.main.abs());
        assert!(term.residual.abs() < 1e-9);
    }

    #[test]
    fn airy_term_rejects_right_side() {
        let g = GridSpec::default().build().unwrap();
        let u = Profile::zeros(g, 8.0).unwrap();
        assert!(airy_main_term(&u, -1.5).is_err());
        let z = airy_main_term(&u, -5.0).unwrap();
        assert_eq!((z.main, z.residual), (0.0, 0.0));
    }

    #[test]
    fn y_nu_requires_vanishing_limit() {
        let g = GridSpec::default().build().unwrap();
        let u = Profile::from_fn(g.clone(), 1.0, gauss).unwrap();
        assert!(y_nu_norm(&u, 0.45).is_err());
        let z = Profile::zeros(g, 1.0).unwrap();
        assert_eq!(y_nu_norm(&z, 0.45).unwrap(), 0.0);
    }

    #[test]
    fn r_alpha_band_limited() {
        // Gaussian of width 10: spectrum inside |ξ| < 1, so with a_k = 1 the sup sits at k = 0
        let n = 4096;
        let dx = 0.25;
        let x0 = -(n as f64) * dx / 2.0;
        let values: Vec<f64> = (0..n).map(|j| (-((x0 + j as f64 * dx) / 10.0).powi(2)).exp()).collect();
        let w = PhysicalSamples { x0, dx, values };
        let r = r_alpha_norm(&w, &WeightSequence::constant(6)).unwrap();
        let direct = (w.values.iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
        assert_eq!(r.k_star, 0);
        assert!((r.value - direct).abs() < 1e-8);
        assert!(!r.truncation_warning);
    }

    #[test]
    fn weight_sequence_validation() {
        assert!(WeightSequence::new(2.0, vec![1.0, 1.0, 1.0, 0.5]).is_ok());
        assert!(WeightSequence::new(0.5, vec![1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(WeightSequence::new(1.0, vec![2.0, 1.0]).is_err());
    }
}
