//! Time integration of `∂_t ũ = -(ε/4π²) 𝒩[u]` and its frequency-cutoff variant.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlin;
use crate::profile::{e_norm, Profile};
use crate::quad;
use crate::spectral;

/// Mollifier `ψ(s) = (315/256)(1 - s²)⁴` on [-1, 1].
fn psi(s: f64) -> f64 {
    let w = 1.0 - s * s;
    if w <= 0.0 {
        0.0
    } else {
        315.0 / 256.0 * w.powi(4)
    }
}

/// The cutoff `χ_n = (φ_n ∗ ψ)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub n: u32,
    pub alpha_n: f64,
    /// `|1 - ln(α_n/n)/n - e^{-α_n}|` at the returned root.
    pub residual: f64,
}

/// Build `χ_n`, locating `α_n` by bisection on `[n eⁿ - 1, n eⁿ]`.
///
/// ```
/// let c = mkdv_core::evolve::build_chi(1).unwrap();
/// assert!((c.alpha_n - 2.51).abs() < 0.02);
/// assert!((c.chi(0.0) - 1.0).abs() < 1e-12);
/// ```
pub fn build_chi(n: u32) -> Result<Cutoff> {
    if n == 0 {
        return Err(Error::Domain("cutoff index n must be at least 1".into()));
    }
    let nf = n as f64;
    let f = |a: f64| 1.0 - (a / nf).ln() / nf - (-a).exp();
    let (mut lo, mut hi) = (nf * nf.exp() - 1.0, nf * nf.exp());
    if !(f(lo) > 0.0 && f(hi) < 1e-14) {
        return Err(Error::Domain(format!("alpha_{n} not bracketed")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    let alpha_n = if f(lo).abs() < f(hi).abs() { lo } else { hi };
    Ok(Cutoff { n, alpha_n, residual: f(alpha_n).abs() })
}

impl Cutoff {
    /// `φ_n(p)` (even in `p`).
    pub fn phi(&self, p: f64) -> f64 {
        let p = p.abs();
        let n = self.n as f64;
        if p <= n {
            1.0
        } else if p <= self.alpha_n {
            1.0 - (p / n).ln() / n
        } else {
            (-p).exp()
        }
    }

    fn phi_deriv(&self, p: f64) -> f64 {
        let s = p.signum();
        let p = p.abs();
        let n = self.n as f64;
        if p <= n {
            0.0
        } else if p <= self.alpha_n {
            -s / (n * p)
        } else {
            -s * (-p).exp()
        }
    }

    fn mollify(&self, p: f64, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.n as f64;
        let a = self.alpha_n;
        let br = quad::breakpoints(-1.0, 1.0, &[p, p - n, p + n, p - a, p + a]);
        quad::piecewise(&br, 20, |_, _| 1, |s| f(p - s) * psi(s))
    }

    /// `(χ_n)^{1/2} = φ_n ∗ ψ`.
    pub fn sqrt_chi(&self, p: f64) -> f64 {
        self.mollify(p, |x| self.phi(x)).min(1.0)
    }

    pub fn chi(&self, p: f64) -> f64 {
        self.sqrt_chi(p).powi(2)
    }

    /// `(χ_n^{1/2})' = φ_n' ∗ ψ`.
    pub fn sqrt_chi_deriv(&self, p: f64) -> f64 {
        self.mollify(p, |x| self.phi_deriv(x))
    }

    /// `sup_p |p (χ_n^{1/2})'(p)|`, maximized over a logarithmic scan of the
    /// region where the derivative is non-zero, then refined by golden section.
    pub fn sup_p_dsqrt(&self) -> f64 {
        let n = self.n as f64;
        let lo = (n - 1.0).max(1e-3);
        let hi = self.alpha_n + 1.0;
        let g = |p: f64| (p * self.sqrt_chi_deriv(p)).abs();
        let m = 4000;
        let (mut best, mut arg) = (0.0, lo);
        for k in 0..=m {
            let p = lo * (hi / lo).powf(k as f64 / m as f64);
            let v = g(p);
            if v > best {
                best = v;
                arg = p;
            }
        }
        // local refinement around the best sample
        let r = (hi / lo).powf(1.0 / m as f64);
        let (mut a, mut b) = (arg / r, arg * r);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if g(c) > g(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best.max(g(0.5 * (a + b)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RhsMode {
    /// Full nonlinearity through physical space.
    Direct,
    /// Two-term stationary-phase form everywhere.
    Stationary,
    /// Direct for `p³t ≤ tau_star`, stationary phase above.
    Hybrid { tau_star: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub epsilon: f64,
    pub dt0: f64,
    pub growth: f64,
    /// Steps never exceed `dt_frac · t`.
    pub dt_frac: f64,
    pub t_end: f64,
    pub cutoff: Option<Cutoff>,
    pub mode: RhsMode,
    /// Every step is split into `2^refine` equal substeps.
    pub refine: u32,
    /// Times that must be hit exactly.
    pub snapshot_times: Vec<f64>,
    pub allow_backward: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            epsilon: 1.0,
            dt0: 0.05,
            growth: 1.1,
            dt_frac: 0.1,
            t_end: 10.0,
            cutoff: None,
            mode: RhsMode::Hybrid { tau_star: 5.0 },
            refine: 0,
            snapshot_times: Vec::new(),
            allow_backward: false,
        }
    }
}

impl EvolveOptions {
    fn validate(&self, t0: f64) -> Result<()> {
        if self.epsilon != 1.0 && self.epsilon != -1.0 {
            return Err(Error::Domain(format!("epsilon must be +1 or -1, got {}", self.epsilon)));
        }
        if !(self.dt0 > 0.0 && self.growth >= 1.0 && self.dt_frac > 0.0) {
            return Err(Error::Domain("need dt0 > 0, growth >= 1, dt_frac > 0".into()));
        }
        if let RhsMode::Hybrid { tau_star } = self.mode {
            if !(tau_star > 0.0) {
                return Err(Error::Domain("tau_star must be positive".into()));
            }
        }
        if !(self.t_end > t0) && !(self.allow_backward && self.t_end > 0.0 && self.t_end != t0) {
            return Err(Error::Domain(format!("t_end = {} must exceed the start time {t0}", self.t_end)));
        }
        Ok(())
    }
}

/// `∂_t ũ` at the nodes.
pub fn rhs(u: &Profile, opts: &EvolveOptions) -> Result<Vec<Complex64>> {
    rhs_with_chi(u, opts, None)
}

fn rhs_with_chi(u: &Profile, opts: &EvolveOptions, chi: Option<&[f64]>) -> Result<Vec<Complex64>> {
    let nodes = &u.grid.nodes;
    let t = u.time;
    let nl: Vec<Complex64> = match opts.mode {
        RhsMode::Direct => spectral::nonlinearity(u, nodes)?,
        RhsMode::Stationary => nodes.par_iter().map(|&p| nonlin::eval_stationary_phase(u, p)).collect(),
        RhsMode::Hybrid { tau_star } => {
            let split = nodes.partition_point(|&p| p * p * p * t <= tau_star);
            let mut out = spectral::nonlinearity(u, &nodes[..split])?;
            out.par_extend(nodes[split..].par_iter().map(|&p| nonlin::eval_stationary_phase(u, p)));
            out
        }
    };
    let c = -opts.epsilon / (4.0 * PI * PI);
    let owned;
    let chi = match (chi, &opts.cutoff) {
        (Some(c), _) => Some(c),
        (None, Some(cut)) => {
            owned = nodes.par_iter().map(|&p| cut.chi(p)).collect::<Vec<f64>>();
            Some(&owned[..])
        }
        (None, None) => None,
    };
    Ok(match chi {
        Some(w) => nl.iter().zip(w).map(|(v, x)| v * (c * x)).collect(),
        None => nl.iter().map(|v| v * c).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub e_norm: f64,
    pub i_norm: f64,
    /// `∫|ũ|² χ⁻¹ dp` (plain `L²` without a cutoff).
    pub weighted_l2: f64,
    pub sup_profile: f64,
    /// `max_p |∂_t ũ|`.
    pub sup_dt: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Profile>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub epsilon: f64,
    pub cutoff: Option<Cutoff>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    /// The snapshot whose time is closest to `t`.
    pub fn nearest(&self, t: f64) -> &Profile {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
            .expect("trajectory is never empty")
    }
}

#[derive(Debug, Clone)]
pub struct IReport {
    /// `Îu` at the nodes.
    pub values: Vec<Complex64>,
    /// `L²(0,∞)` norm over nodes with `p ≥ 1e-3`.
    pub l2: f64,
    /// Nodes below `1e-3`, where `1/p` amplifies errors.
    pub flagged: Vec<usize>,
}

/// `Îu = i e^{itp³} (∂_p ũ - (3t/p) ∂_t ũ)`.
pub fn vector_field_i(u: &Profile, du_dt: &[Complex64]) -> Result<IReport> {
    if du_dt.len() != u.values.len() {
        return Err(Error::InvalidProfile("derivative length does not match the grid".into()));
    }
    let t = u.time;
    let d = u.nodal_derivative();
    let mut flagged = Vec::new();
    let mut l2 = 0.0;
    let values = u
        .grid
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let v = Complex64::i() * Complex64::from_polar(1.0, t * p * p * p) * (d[i] - du_dt[i] * (3.0 * t / p));
            if p < 1e-3 {
                flagged.push(i);
            } else {
                l2 += u.grid.weights[i] * v.norm_sqr();
            }
            v
        })
        .collect();
    Ok(IReport { values, l2: l2.sqrt(), flagged })
}

fn weighted(u: &Profile, chi: Option<&[f64]>) -> f64 {
    match chi {
        Some(w) => u.grid.weights.iter().zip(&u.values).zip(w).map(|((g, v), x)| g * v.norm_sqr() / x).sum(),
        None => u.weighted_l2(|_| 1.0),
    }
}

fn diagnose(u: &Profile, k1: &[Complex64], chi: Option<&[f64]>) -> Result<StepDiagnostics> {
    Ok(StepDiagnostics {
        t: u.time,
        e_norm: e_norm(u)?.e_norm,
        i_norm: vector_field_i(u, k1)?.l2,
        weighted_l2: weighted(u, chi),
        sup_profile: u.sup(),
        sup_dt: k1.iter().map(|v| v.norm()).fold(0.0, f64::max),
    })
}

fn axpy(u: &Profile, h: f64, k: &[Complex64], time: f64) -> Profile {
    let mut v = u.clone();
    for (x, d) in v.values.iter_mut().zip(k) {
        *x += d * h;
    }
    v.time = time;
    v
}

/// Step sizes of the base schedule from `t0` to `t_end`, cut at snapshot times.
pub fn schedule(t0: f64, opts: &EvolveOptions) -> Vec<f64> {
    let dir = if opts.t_end >= t0 { 1.0 } else { -1.0 };
    let mut stops: Vec<f64> = opts
        .snapshot_times
        .iter()
        .copied()
        .filter(|&s| (s - t0) * dir > 0.0 && (opts.t_end - s) * dir > 0.0)
        .collect();
    stops.push(opts.t_end);
    stops.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    let mut times = vec![t0];
    let mut t = t0;
    let mut k = 0;
    for s in stops {
        while (s - t) * dir > 1e-12 * s.abs().max(1.0) {
            let h = (opts.dt0 * opts.growth.powi(k)).min(opts.dt_frac * t.abs());
            k += 1;
            t = if (s - t) * dir <= h * (1.0 + 1e-9) { s } else { t + dir * h };
            times.push(t);
        }
    }
    times
}

/// Classical RK4 over the base schedule, each step split into `2^refine` substeps.
///
/// The limit at `0⁺` is carried unchanged, since `𝒩` vanishes like `p` there.
pub fn integrate(u0: &Profile, opts: &EvolveOptions) -> Result<Trajectory> {
    opts.validate(u0.time)?;
    let chi: Option<Vec<f64>> = opts.cutoff.as_ref().map(|c| u0.grid.nodes.par_iter().map(|&p| c.chi(p)).collect());
    let chi_ref = chi.as_deref();
    let times = schedule(u0.time, opts);
    let sub = 1usize << opts.refine;
    let mut u = u0.clone();
    let mut snapshots = vec![u.clone()];
    let mut diagnostics = Vec::with_capacity(times.len());
    let mut k1 = rhs_with_chi(&u, opts, chi_ref)?;
    diagnostics.push(diagnose(&u, &k1, chi_ref)?);
    for w in times.windows(2) {
        let h = (w[1] - w[0]) / sub as f64;
        for j in 0..sub {
            let t = w[0] + h * j as f64;
            if j > 0 {
                k1 = rhs_with_chi(&u, opts, chi_ref)?;
            }
            let k2 = rhs_with_chi(&axpy(&u, 0.5 * h, &k1, t + 0.5 * h), opts, chi_ref)?;
            let k3 = rhs_with_chi(&axpy(&u, 0.5 * h, &k2, t + 0.5 * h), opts, chi_ref)?;
            let k4 = rhs_with_chi(&axpy(&u, h, &k3, t + h), opts, chi_ref)?;
            for (i, x) in u.values.iter_mut().enumerate() {
                *x += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
            }
            u.time = if j + 1 == sub { w[1] } else { t + h };
        }
        if u.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Instability { t: u.time, reason: "non-finite profile".into() });
        }
        k1 = rhs_with_chi(&u, opts, chi_ref)?;
        let d = diagnose(&u, &k1, chi_ref)?;
        let prev = diagnostics.last().map(|p: &StepDiagnostics| p.e_norm).unwrap_or(0.0);
        if prev > 0.0 && d.e_norm > 1.5 * prev {
            return Err(Error::Instability {
                t: u.time,
                reason: format!("E(t) norm jumped from {prev} to {} in one step", d.e_norm),
            });
        }
        diagnostics.push(d);
        snapshots.push(u.clone());
    }
    Ok(Trajectory { snapshots, diagnostics, epsilon: opts.epsilon, cutoff: opts.cutoff.clone() })
}

/// Largest relative deviation of `∫|ũ|² χ⁻¹` from its initial value.
pub fn weighted_l2_drift(traj: &Trajectory, cutoff: &Cutoff) -> f64 {
    let first = match traj.snapshots.first() {
        Some(s) => s,
        None => return 0.0,
    };
    let chi: Vec<f64> = first.grid.nodes.par_iter().map(|&p| cutoff.chi(p)).collect();
    let w0 = weighted(first, Some(&chi));
    if w0 == 0.0 {
        return 0.0;
    }
    traj.snapshots.iter().map(|s| ((weighted(s, Some(&chi)) - w0) / w0).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn alpha_one() {
        let c = build_chi(1).unwrap();
        assert!(c.alpha_n > std::f64::consts::E - 1.0 && c.alpha_n < std::f64::consts::E);
        assert!((c.alpha_n - 2.51).abs() < 0.02);
        assert!(c.residual <= 1e-12);
    }

    #[test]
    fn chi_shape() {
        let c = build_chi(2).unwrap();
        let mut prev = 1.0 + 1e-15;
        for k in 0..400 {
            let p = 0.05 * k as f64;
            let v = c.chi(p);
            assert!(v > 0.0 && v <= 1.0 + 1e-14 && v <= prev + 1e-14);
            assert!((v - c.chi(-p)).abs() < 1e-14);
            prev = v;
        }
        assert!((c.chi(0.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn chi_tends_to_one() {
        let vals: Vec<f64> = [1, 2, 4, 8].iter().map(|&n| build_chi(n).unwrap().chi(3.0)).collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-14));
        assert!((vals[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_difference() {
        let c = build_chi(2).unwrap();
        for &p in &[1.5, 2.7, 4.0, 7.9] {
            let h = 1e-5;
            let fd = (c.sqrt_chi(p + h) - c.sqrt_chi(p - h)) / (2.0 * h);
            assert!((fd - c.sqrt_chi_deriv(p)).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_data_stay_zero() {
        let g = GridSpec::default().with_p_max(4.0).build().unwrap();
        let u = Profile::zeros(g, 1.0).unwrap();
        let opts = EvolveOptions { t_end: 2.0, ..Default::default() };
        let tr = integrate(&u, &opts).unwrap();
        assert!(tr.snapshots.iter().all(|s| s.sup() == 0.0));
        let c = build_chi(1).unwrap();
        assert_eq!(weighted_l2_drift(&tr, &c), 0.0);
    }

    #[test]
    fn rhs_is_odd_in_epsilon() {
        let g = GridSpec::default().with_p_max(4.0).build().unwrap();
        let u = Profile::from_fn(g, 1.0, |p| Complex64::new(0.1 * (-p * p).exp(), 0.02 * p)).unwrap();
        let plus = rhs(&u, &EvolveOptions::default()).unwrap();
        let minus = rhs(&u, &EvolveOptions { epsilon: -1.0, ..Default::default() }).unwrap();
        assert!(plus.iter().zip(&minus).all(|(a, b)| (a + b).norm() == 0.0));
    }

    #[test]
    fn schedule_hits_requested_times() {
        let opts = EvolveOptions { t_end: 5.0, snapshot_times: vec![2.0, 3.3], ..Default::default() };
        let s = schedule(1.0, &opts);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        for t in [2.0, 3.3, 5.0] {
            assert!(s.contains(&t));
        }
    }

    #[test]
    fn backward_needs_flag() {
        let g = GridSpec::default().with_p_max(4.0).build().unwrap();
        let u = Profile::zeros(g, 2.0).unwrap();
        assert!(integrate(&u, &EvolveOptions { t_end: 1.0, ..Default::default() }).is_err());
        let back = EvolveOptions { t_end: 1.0, allow_backward: true, ..Default::default() };
        assert!(integrate(&u, &back).is_ok());
    }
}
