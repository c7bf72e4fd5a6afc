//! The cubic nonlinearity `𝒩[u](t,p)` of the profile equation.
//!
//! In frequency variables
//! `𝒩 = ip ∬ e^{-it(p³ - p₁³ - p₂³ - p₃³)} ũ(p₁) ũ(p₂) ũ(p₃) dp₁ dp₂`, `p₃ = p - p₁ - p₂`,
//! which is `ip³ ∬ e^{itp³ Q(q)} ∏ ũ(pq_i) dq` after `p_i = p q_i`.
//! Three evaluations are provided: brute-force 2D quadrature, the route
//! through physical space (`4π² i p e^{-itp³} (u³)^(p)`), and the two leading
//! stationary-phase terms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{e_norm, jap, Profile, TailModel};
use crate::quad;
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q1: f64,
    pub q2: f64,
}

impl PhasePoint {
    pub fn new(q1: f64, q2: f64) -> Self {
        PhasePoint { q1, q2 }
    }

    pub fn q3(&self) -> f64 {
        1.0 - self.q1 - self.q2
    }
}

/// `Q = -(1 - q₁³ - q₂³ - q₃³)`.
pub fn phase_q(pt: PhasePoint) -> f64 {
    let q3 = pt.q3();
    -(1.0 - pt.q1.powi(3) - pt.q2.powi(3) - q3.powi(3))
}

/// `∇Q` in the free variables `(q₁, q₂)`.
pub fn phase_gradient(pt: PhasePoint) -> [f64; 2] {
    let q3 = pt.q3();
    [3.0 * (pt.q1 * pt.q1 - q3 * q3), 3.0 * (pt.q2 * pt.q2 - q3 * q3)]
}

/// The critical points of `Q`: the symmetric point and the three resonant triples.
pub fn stationary_points() -> Vec<PhasePoint> {
    vec![
        PhasePoint::new(1.0 / 3.0, 1.0 / 3.0),
        PhasePoint::new(1.0, 1.0),
        PhasePoint::new(-1.0, 1.0),
        PhasePoint::new(1.0, -1.0),
    ]
}

/// Knobs of the direct quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectOptions {
    /// Phase (radians) allowed across one Gauss panel.
    pub panel_phase: f64,
    /// Widest panel, to resolve the profile itself.
    pub max_width: f64,
    pub order: usize,
}

impl Default for DirectOptions {
    fn default() -> Self {
        DirectOptions { panel_phase: 3.0, max_width: 0.25, order: 16 }
    }
}

impl DirectOptions {
    /// Every panel split in `factor` pieces.
    pub fn refined(self, factor: f64) -> Self {
        DirectOptions { panel_phase: self.panel_phase / factor, max_width: self.max_width / factor, ..self }
    }
}

fn support(u: &Profile) -> Result<f64> {
    if u.tail == TailModel::Frozen {
        return Err(Error::UnboundedDomain(
            "direct quadrature needs a profile that vanishes beyond p_max".into(),
        ));
    }
    Ok(u.effective_support(1e-14))
}

fn panels(a: f64, b: f64, speed: f64, opts: &DirectOptions) -> usize {
    let by_phase = (speed * (b - a) / opts.panel_phase).ceil();
    let by_width = ((b - a) / opts.max_width).ceil();
    by_phase.max(by_width).max(1.0) as usize
}

/// Outer `p₁` breakpoints and panel counts for `p ≥ 0`.
fn outer_layout(p: f64, t: f64, big: f64, opts: &DirectOptions) -> Vec<(f64, f64, usize)> {
    let lo = (-big).max(p - 2.0 * big);
    let br = quad::breakpoints(lo, big, &[0.0, p / 3.0, p, -p]);
    br.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let far = |x: f64| x * x + ((p - x).abs() + big).powi(2);
            let speed = 3.0 * t * far(a).max(far(b));
            (a, b, panels(a, b, speed, opts))
        })
        .collect()
}

/// Inner `p₂` segments for fixed `p₁`.
fn inner_layout(p: f64, p1: f64, t: f64, big: f64, opts: &DirectOptions) -> Vec<(f64, f64, usize)> {
    let r = p - p1;
    let lo = (-big).max(r - big);
    let hi = big.min(r + big);
    if hi <= lo {
        return Vec::new();
    }
    let br = quad::breakpoints(lo, hi, &[0.0, r, r / 2.0, p, -p]);
    br.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            // dΦ/dp₂ = 3t (p - p₁)(2p₂ - (p - p₁)), linear in p₂
            let speed = 3.0 * t * r.abs() * (2.0 * a - r).abs().max((2.0 * b - r).abs());
            (a, b, panels(a, b, speed, opts))
        })
        .collect()
}

/// Number of integrand evaluations `eval_direct` would spend at `(p, t)`.
pub fn direct_cost(u: &Profile, p: f64, t: f64, opts: &DirectOptions) -> Result<usize> {
    let big = support(u)?;
    let p = p.abs();
    let r = quad::rule(opts.order);
    let mut total = 0usize;
    for (a, b, n) in outer_layout(p, t, big, opts) {
        let h = (b - a) / n as f64;
        for k in 0..n {
            for x in r.nodes.iter() {
                let p1 = a + h * (k as f64 + 0.5 * (x + 1.0));
                total += inner_layout(p, p1, t, big, opts).iter().map(|s| s.2).sum::<usize>() * opts.order;
            }
        }
    }
    Ok(total)
}

/// `𝒩[u](t,p)` by iterated Gauss–Legendre quadrature over `{|p_i| ≤ P}`.
///
/// Panels break at the lines through the stationary points and the kinks
/// of the profile at 0, and are sized by the local phase speed.
pub fn eval_direct(u: &Profile, p: f64) -> Result<Complex64> {
    eval_direct_with(u, p, &DirectOptions::default())
}

pub fn eval_direct_with(u: &Profile, p: f64, opts: &DirectOptions) -> Result<Complex64> {
    let big = support(u)?;
    if p < 0.0 {
        return eval_direct_with(u, -p, opts).map(|v| v.conj());
    }
    if p == 0.0 || u.sup() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let t = u.time;
    let rule = quad::rule(opts.order);
    let mut outer_nodes = Vec::new();
    for (a, b, n) in outer_layout(p, t, big, opts) {
        let h = (b - a) / n as f64;
        for k in 0..n {
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                outer_nodes.push((a + h * (k as f64 + 0.5 * (x + 1.0)), 0.5 * h * w));
            }
        }
    }
    let p3c = p * p * p;
    let total: Complex64 = outer_nodes
        .par_iter()
        .map(|&(p1, w1)| {
            let u1 = u.value_at(p1);
            if u1.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let base = p3c - p1 * p1 * p1;
            let mut inner = Complex64::new(0.0, 0.0);
            for (a, b, n) in inner_layout(p, p1, t, big, opts) {
                let h = (b - a) / n as f64;
                for k in 0..n {
                    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                        let p2 = a + h * (k as f64 + 0.5 * (x + 1.0));
                        let p3 = p - p1 - p2;
                        let phase = -t * (base - p2 * p2 * p2 - p3 * p3 * p3);
                        inner += u.value_at(p2) * u.value_at(p3) * Complex64::from_polar(0.5 * h * w, phase);
                    }
                }
            }
            u1 * inner * w1
        })
        .sum();
    Ok(Complex64::new(0.0, p) * total)
}

/// `𝒩[u](t,p)` through physical space.
pub fn eval_physical(u: &Profile, p: f64) -> Result<Complex64> {
    Ok(spectral::nonlinearity(u, &[p])?[0])
}

/// `(πp³/⟨p³t⟩)(i|ũ(p)|²ũ(p) - 3^{-1/2} e^{-8itp³/9} ũ(p/3)³)`.
///
/// Negative `p` is read through `𝒩(-p) = conj 𝒩(p)`.
pub fn eval_stationary_phase(u: &Profile, p: f64) -> Complex64 {
    if p < 0.0 {
        return eval_stationary_phase(u, -p).conj();
    }
    let t = u.time;
    let tau = p * p * p * t;
    let v = u.value_at(p);
    let w = u.value_at(p / 3.0);
    let pre = PI * p * p * p / jap(tau);
    let resonant = Complex64::i() * v.norm_sqr() * v;
    let symmetric = Complex64::from_polar(1.0 / 3f64.sqrt(), -8.0 * tau / 9.0) * w * w * w;
    (resonant - symmetric) * pre
}

/// How the `direct` column of a sample was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectRoute {
    Quadrature,
    /// The quadrature was over budget; the physical-space value stands in.
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinSample {
    pub p: f64,
    pub t: f64,
    pub tau: f64,
    pub direct: Complex64,
    pub physical: Complex64,
    pub stationary: Complex64,
    pub remainder: Complex64,
    pub route: DirectRoute,
    /// `E(t)` norm of the profile at this time.
    pub e_norm: f64,
    /// `p < 1e-3`: reported but not used in fits.
    pub small_p: bool,
}

impl NonlinSample {
    /// `p³ E³ τ^{-5/6} ⟨τ⟩^{-1/4}`.
    pub fn envelope(&self) -> f64 {
        remainder_envelope(self.p, self.t, self.e_norm)
    }
}

pub fn remainder_envelope(p: f64, t: f64, e: f64) -> f64 {
    let tau = p.abs().powi(3) * t;
    p.abs().powi(3) * e.powi(3) * tau.powf(-5.0 / 6.0) * jap(tau).powf(-0.25)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub direct: DirectOptions,
    /// Largest number of integrand evaluations spent on one direct value.
    pub direct_budget: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { direct: DirectOptions::default(), direct_budget: 40_000_000 }
    }
}

/// Evaluate the fixed profile `u` at each `(p, t)` by every route.
pub fn remainder_scan(u: &Profile, pairs: &[(f64, f64)], opts: &ScanOptions) -> Result<Vec<NonlinSample>> {
    support(u)?;
    pairs
        .iter()
        .map(|&(p, t)| {
            let ut = u.with_time(t);
            let physical = eval_physical(&ut, p)?;
            let (direct, route) = if direct_cost(&ut, p, t, &opts.direct)? <= opts.direct_budget {
                (eval_direct_with(&ut, p, &opts.direct)?, DirectRoute::Quadrature)
            } else {
                (physical, DirectRoute::Physical)
            };
            let stationary = eval_stationary_phase(&ut, p);
            Ok(NonlinSample {
                p,
                t,
                tau: p.abs().powi(3) * t,
                direct,
                physical,
                stationary,
                remainder: direct - stationary,
                route,
                e_norm: e_norm(&ut)?.e_norm,
                small_p: p.abs() < 1e-3,
            })
        })
        .collect()
}
