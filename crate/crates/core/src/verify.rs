//! Measurements behind the acceptance criteria, grouped into suites.
//!
//! Every check records its value, the bound it is held to and the window it was
//! measured on, so a report can be read without the code.

use std::f64::consts::{E, PI};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{self, build_chi, integrate, vector_field_i, weighted_l2_drift, EvolveOptions, RhsMode, Trajectory};
use crate::fit::{fit_binned_max, fit_power_law};
use crate::grid::{FrequencyGrid, GridSpec};
use crate::nonlin::{self, phase_gradient, phase_q, remainder_scan, stationary_points, ScanOptions};
use crate::profile::{e_norm, jap, reconstruct_physical, Profile};
use crate::scatter::{self, accumulate_phase, extract_u_infinity};
use crate::selfsim::{invariance_residual, solve_profile, solve_profile_with, SelfSimilarOptions, SelfSimilarProfile};
use crate::specfun::{airy_fock, airy_fock_deriv};
use crate::spectral;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub criterion: u32,
    pub name: String,
    pub value: f64,
    /// Human-readable bound, e.g. `<= -0.053`.
    pub bound: String,
    pub window: String,
    pub passed: bool,
}

impl Check {
    fn le(criterion: u32, name: &str, value: f64, bound: f64, window: &str) -> Self {
        Check { criterion, name: name.into(), value, bound: format!("<= {bound}"), window: window.into(), passed: value <= bound }
    }

    fn ge(criterion: u32, name: &str, value: f64, bound: f64, window: &str) -> Self {
        Check { criterion, name: name.into(), value, bound: format!(">= {bound}"), window: window.into(), passed: value >= bound }
    }

    fn within(criterion: u32, name: &str, value: f64, target: f64, tol: f64, window: &str) -> Self {
        Check {
            criterion,
            name: name.into(),
            value,
            bound: format!("{target} +/- {tol}"),
            window: window.into(),
            passed: (value - target).abs() <= tol,
        }
    }

    fn flag(criterion: u32, name: &str, ok: bool, window: &str) -> Self {
        Check {
            criterion,
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: "== 1".into(),
            window: window.into(),
            passed: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    Decay,
    Nonlin,
    Conservation,
    Scatter,
    Selfsim,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decay" => Ok(Suite::Decay),
            "nonlin" => Ok(Suite::Nonlin),
            "conservation" => Ok(Suite::Conservation),
            "scatter" => Ok(Suite::Scatter),
            "selfsim" => Ok(Suite::Selfsim),
            other => Err(Error::Domain(format!("unknown suite '{other}' (decay|nonlin|conservation|scatter|selfsim)"))),
        }
    }
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Decay => "decay",
            Suite::Nonlin => "nonlin",
            Suite::Conservation => "conservation",
            Suite::Scatter => "scatter",
            Suite::Selfsim => "selfsim",
        }
    }
}

pub fn run_suite(suite: Suite) -> Result<SuiteReport> {
    let start = Instant::now();
    let checks = match suite {
        Suite::Decay => {
            let mut c = airy_checks()?;
            c.extend(decay_checks()?);
            c
        }
        Suite::Nonlin => {
            let mut c = phase_checks();
            c.extend(oracle_checks()?);
            c.extend(remainder_checks()?);
            c
        }
        Suite::Conservation => {
            let mut c = conservation_checks()?;
            c.extend(cutoff_checks()?);
            let run = matched_run()?;
            c.extend(small_data_checks(&run)?);
            c
        }
        Suite::Scatter => {
            let run = matched_run()?;
            let mut c = fourier_checks(&run)?;
            c.extend(selfsimilar_scattering_checks(&run.selfsim)?);
            c.extend(physical_checks(&run)?);
            c.extend(y_nu_checks(&run)?);
            c
        }
        Suite::Selfsim => selfsim_checks()?,
    };
    Ok(SuiteReport { suite: suite.name().into(), checks, seconds: start.elapsed().as_secs_f64() })
}

// ---------------------------------------------------------------- Airy

/// Classical `(Ai(x), Ai'(x))`, computed independently of the Airy–Fock routines:
/// Taylor integration of `y'' = xy` from 0 for `x ≤ 0`, the Maclaurin series on
/// `(0, 6.5]`, and the asymptotic expansion beyond.
pub fn classical_airy(x: f64) -> (f64, f64) {
    const AI0: f64 = 0.355_028_053_887_817_2;
    const AIP0: f64 = -0.258_819_403_792_806_8;
    if x <= 0.0 {
        let steps = ((-x) / 0.25).ceil().max(1.0) as usize;
        let h = x / steps as f64;
        let (mut y, mut yp) = (AI0, AIP0);
        let mut x0: f64 = 0.0;
        for _ in 0..steps {
            // coefficients of y about x0: a_{n+2} (n+2)(n+1) = x0 a_n + a_{n-1}
            let mut a = [0.0f64; 40];
            a[0] = y;
            a[1] = yp;
            a[2] = x0 * a[0] / 2.0;
            for n in 1..38 {
                a[n + 2] = (x0 * a[n] + a[n - 1]) / ((n + 2) as f64 * (n + 1) as f64);
            }
            let (mut v, mut d) = (0.0, 0.0);
            for n in (0..40).rev() {
                v = v * h + a[n];
            }
            for n in (1..40).rev() {
                d = d * h + n as f64 * a[n];
            }
            y = v;
            yp = d;
            x0 += h;
        }
        (y, yp)
    } else if x <= 6.5 {
        // Ai = c1 f - c2 g with f = Σ 3^k (1/3)_k x^{3k}/(3k)!, g = Σ 3^k (2/3)_k x^{3k+1}/(3k+1)!
        let (mut f, mut g, mut fp, mut gp) = (0.0, 0.0, 0.0, 0.0);
        let mut tf = 1.0;
        let mut tg = x;
        let mut k = 0usize;
        while k < 200 {
            f += tf;
            g += tg;
            if k > 0 {
                fp += tf * (3 * k) as f64 / x;
            }
            gp += tg * (3 * k + 1) as f64 / x;
            let kk = k as f64;
            tf *= x * x * x / ((3.0 * kk + 2.0) * (3.0 * kk + 3.0));
            tg *= x * x * x / ((3.0 * kk + 3.0) * (3.0 * kk + 4.0));
            if tf.abs() < 1e-18 * f.abs() && tg.abs() < 1e-18 * g.abs() {
                break;
            }
            k += 1;
        }
        (AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp)
    } else {
        let zeta = 2.0 / 3.0 * x.powf(1.5);
        let (mut s, mut sp) = (0.0f64, 0.0f64);
        let (mut u, mut v) = (1.0f64, 1.0f64);
        let mut last = f64::INFINITY;
        for k in 0..40 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let (tu, tv) = (u / zeta.powi(k), v / zeta.powi(k));
            // stop at the smallest term
            if tu.abs() > last {
                break;
            }
            last = tu.abs();
            s += sign * tu;
            sp += sign * tv;
            let kf = k as f64 + 1.0;
            // u_k = (6k-5)(6k-3)(6k-1) / ((2k-1) 216 k) u_{k-1}, v_k = -(6k+1)/(6k-1) u_k
            let un = u * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
            v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * un;
            u = un;
        }
        let e = (-zeta).exp() / (2.0 * PI.sqrt());
        (e * x.powf(-0.25) * s, -e * x.powf(0.25) * sp)
    }
}

/// Criterion 1.
pub fn airy_checks() -> Result<Vec<Check>> {
    let c = 3f64.powf(-1.0 / 3.0);
    let zs: Vec<f64> = (0..=4000).map(|k| -20.0 + 40.0 * k as f64 / 4000.0).collect();
    let dev = zs
        .par_iter()
        .map(|&z| Ok((airy_fock(z)?.re - c * classical_airy(c * z).0).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    // plain regression of log|Ai_F| on log z; the endpoint term i/(πz) biases an envelope fit
    let pts: Vec<f64> = (0..4000).map(|k| 5.0 * 10f64.powf(k as f64 / 3999.0)).collect();
    let ai = pts.iter().map(|&z| Ok((z, airy_fock(-z)?.norm()))).collect::<Result<Vec<_>>>()?;
    let aip = pts.iter().map(|&z| Ok((z, airy_fock_deriv(-z)?.norm()))).collect::<Result<Vec<_>>>()?;
    let s1 = fit_power_law(&ai, [5.0, 50.0])?.slope;
    let s2 = fit_power_law(&aip, [5.0, 50.0])?.slope;
    Ok(vec![
        Check::le(1, "max |Re Ai_F(z) - 3^(-1/3) Ai(3^(-1/3) z)|", dev, 1e-9, "z in [-20, 20], 4001 points"),
        Check::within(1, "slope of |Ai_F(-z)|", s1, -0.25, 0.05, "z in [5, 50]"),
        Check::within(1, "slope of |Ai_F'(-z)|", s2, 0.25, 0.05, "z in [5, 50]"),
    ])
}

// ---------------------------------------------------------------- decay

/// `max |c_i/C - 1|` with `C` the geometric mean, the single constant fitted in log space.
fn log_spread(c: &[f64]) -> f64 {
    let g = (c.iter().map(|v| v.ln()).sum::<f64>() / c.len() as f64).exp();
    c.iter().map(|v| (v / g - 1.0).abs()).fold(0.0, f64::max)
}

fn taper(p: f64, a: f64, b: f64) -> f64 {
    if p <= a {
        1.0
    } else if p >= b {
        0.0
    } else {
        let s = (p - a) / (b - a);
        let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
        f(1.0 - s) / (f(1.0 - s) + f(s))
    }
}

/// Profile equal to 1 on `[0, 10]`, smoothly cut off on `[10, 14]`.
pub fn plateau_profile(t: f64) -> Result<Profile> {
    let g = GridSpec::default().with_p_max(16.0).build()?;
    Profile::from_fn(g, t, |p| Complex64::new(taper(p, 10.0, 14.0), 0.0))
}

/// A smooth complex test profile with a jump at 0.
pub fn smooth_profile(t: f64) -> Result<Profile> {
    let g = GridSpec::default().with_p_max(6.0).build()?;
    Profile::from_fn(g, t, |p| Complex64::new(1.0 - 0.3 * p, 0.5 + 0.2 * p) * (-(p / 2.0).powi(4)).exp())
}

pub fn decay_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    // left side: |u| ≲ t^{-1/3} ⟨z⟩^{-1/4}
    let u = plateau_profile(1.0)?;
    let z: Vec<f64> = (0..=3000).map(|k| -10.0 - 190.0 * k as f64 / 3000.0).collect();
    let r = reconstruct_physical(&u, &z)?;
    let pts: Vec<(f64, f64)> = z.iter().zip(&r.u).map(|(z, v)| (-z, v.abs())).collect();
    let s = fit_binned_max(&pts, [10.0, 200.0], 8.0)?.slope;
    out.push(Check::within(0, "decay slope of |u| for x < 0", s, -0.25, 0.05, "plateau profile, t = 1, -x in [10, 200]"));
    // right side: |u| ≲ t^{-1/3} ⟨z⟩^{-3/4}
    let mut pts = Vec::new();
    for t in [1.0, 8.0] {
        let u = smooth_profile(t)?;
        let s3 = t.cbrt();
        let z: Vec<f64> = (0..=400).map(|k| 10f64 * 10f64.powf(k as f64 / 400.0)).collect();
        let x: Vec<f64> = z.iter().map(|z| z * s3).collect();
        let r = reconstruct_physical(&u, &x)?;
        pts.extend(z.iter().zip(&r.u).map(|(z, v)| (*z, v.abs() * s3)));
    }
    let s = fit_binned_max(&pts, [10.0, 100.0], 8.0)?.slope;
    out.push(Check::le(0, "decay slope of |u| for x > 0", s, -0.75 + 0.1, "smooth profile, t in {1, 8}, x/t^(1/3) in [10, 100]"));
    // Airy residual: |u - main| ≲ t^{-1/3} ⟨z⟩^{-3/10}
    let mut pts = Vec::new();
    for t in [1.0, 8.0] {
        let u = smooth_profile(t)?;
        let s3 = t.cbrt();
        let z: Vec<f64> = (0..=600).map(|k| -10.0 * 20f64.powf(k as f64 / 600.0)).collect();
        for &zz in &z {
            let a = crate::profile::airy_main_term(&u, zz * s3)?;
            pts.push((-zz, a.residual.abs() * s3));
        }
    }
    let s = fit_binned_max(&pts, [10.0, 200.0], 8.0)?.slope;
    out.push(Check::le(0, "slope of the Airy residual", s, -0.3 + 0.05, "smooth profile, t in {1, 8}, -x/t^(1/3) in [10, 200]"));
    // L⁶ bound: ‖u(t)‖_6³ ≲ t^{-5/6} E³. The E norm of a fixed profile decays in t,
    // so the scale-free part ‖u‖_6³ t^{5/6} is reported next to the constant itself.
    let mut cs = Vec::new();
    let mut scaled = Vec::new();
    for t in [1.0, 8.0, 64.0] {
        let u = plateau_profile(t)?;
        let f = spectral::physical_field(&u, 0.0);
        let l6 = (f.values.iter().map(|v| v.powi(6)).sum::<f64>() * f.dx).sqrt();
        scaled.push(l6 * t.powf(5.0 / 6.0));
        cs.push(l6 * t.powf(5.0 / 6.0) / e_norm(&u)?.e_norm.powi(3));
    }
    out.push(Check::le(0, "L6 constant spread max|C(t)/C - 1|", log_spread(&cs), 0.2, "plateau profile, t in {1, 8, 64}"));
    out.push(Check::le(0, "spread of ||u||_6^3 t^(5/6)", log_spread(&scaled), 0.2, "plateau profile, t in {1, 8, 64}"));
    Ok(out)
}

// ---------------------------------------------------------------- nonlinearity

/// Compactly supported profile used by the nonlinearity checks.
pub fn bump_profile(t: f64) -> Result<Profile> {
    let g = GridSpec::default().with_p_max(2.0).build()?;
    Profile::from_fn(g, t, |p| {
        let s = p / 2.0;
        if s.abs() >= 1.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.8 - 0.2 * p * p, 0.3 * p) * (1.0 - s * s).powi(8)
        }
    })
}

pub fn phase_checks() -> Vec<Check> {
    let pts = stationary_points();
    let grad = pts.iter().map(|&q| phase_gradient(q).iter().map(|g| g.abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
    let vals: Vec<f64> = pts.iter().map(|&q| phase_q(q)).collect();
    let ok = pts.len() == 4 && vals.iter().filter(|v| (**v + 8.0 / 9.0).abs() < 1e-14).count() == 1 && vals.iter().filter(|v| v.abs() < 1e-14).count() == 3;
    vec![
        Check::le(3, "max |grad Q| at the stationary points", grad, 1e-14, "four points"),
        Check::flag(3, "phase values {-8/9, 0, 0, 0}", ok, "four points"),
    ]
}

/// The `(p, t)` pairs of criterion 2.
pub fn oracle_pairs() -> Vec<(f64, f64)> {
    let ps = [0.3, 0.7, 1.1, 1.5, 1.9];
    let ts = [0.5, 1.0, 2.0, 4.0];
    ps.iter().flat_map(|&p| ts.iter().map(move |&t| (p, t))).collect()
}

/// Criterion 2.
pub fn oracle_checks() -> Result<Vec<Check>> {
    let u = bump_profile(1.0)?;
    let rel = oracle_pairs()
        .par_iter()
        .map(|&(p, t)| {
            let ut = u.with_time(t);
            let d = nonlin::eval_direct(&ut, p)?;
            let f = nonlin::eval_physical(&ut, p)?;
            Ok((d - f).norm() / f.norm().max(1e-300))
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = rel.iter().copied().fold(0.0, f64::max);
    Ok(vec![Check::le(2, "max relative |direct - physical|", worst, 1e-4, "bump profile, 20 (p, t) pairs, p in [0.3, 1.9], t in [0.5, 4]")])
}

/// `(p, t)` grid of criterion 3: five frequencies times 24 log-spaced `τ ∈ [0.01, 10⁴]`.
pub fn remainder_pairs() -> Vec<(f64, f64)> {
    let ps = [0.8, 1.0, 1.2, 1.4, 1.6];
    let mut out = Vec::new();
    for &p in &ps {
        for k in 0..24 {
            let tau = 0.01 * 1e6f64.powf(k as f64 / 23.0);
            out.push((p, tau / (p * p * p)));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderSummary {
    pub constant: f64,
    /// Largest ratio on the held-out half over the constant fitted on the other.
    pub holdout_ratio: f64,
    pub large_tau_slope: f64,
    pub small_tau_slope: f64,
    pub points: usize,
    pub physical_fallbacks: usize,
}

pub fn remainder_summary() -> Result<RemainderSummary> {
    let u = bump_profile(1.0)?;
    let pairs = remainder_pairs();
    let samples: Vec<nonlin::NonlinSample> = pairs
        .par_iter()
        .map(|&pt| remainder_scan(&u, &[pt], &ScanOptions::default()).map(|mut v| v.remove(0)))
        .collect::<Result<Vec<_>>>()?;
    let ratio: Vec<f64> = samples.iter().map(|s| s.remainder.norm() / s.envelope()).collect();
    let constant = ratio.iter().copied().fold(0.0, f64::max);
    let fit_half = ratio.iter().step_by(2).copied().fold(0.0, f64::max);
    let hold = ratio.iter().skip(1).step_by(2).copied().fold(0.0, f64::max);
    // |R| / (p³ E³) against τ
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.tau, s.remainder.norm() / (s.p.powi(3) * s.e_norm.powi(3)))).collect();
    let large = fit_binned_max(&pts, [100.0, 1e4], 4.0)?.slope;
    let small = fit_binned_max(&pts, [0.01, 1.0], 4.0)?.slope;
    Ok(RemainderSummary {
        constant,
        holdout_ratio: hold / fit_half,
        large_tau_slope: large,
        small_tau_slope: small,
        points: samples.len(),
        physical_fallbacks: samples.iter().filter(|s| s.route == nonlin::DirectRoute::Physical).count(),
    })
}

/// Criterion 3.
pub fn remainder_checks() -> Result<Vec<Check>> {
    let s = remainder_summary()?;
    let win = format!("bump profile, {} (p, tau) points, p in [0.8, 1.6], tau in [0.01, 1e4]", s.points);
    Ok(vec![
        Check::ge(3, "grid size", s.points as f64, 100.0, &win),
        Check::le(3, "held-out max |R| / (C envelope)", s.holdout_ratio, 1.5, &win),
        Check::le(3, "large-tau slope of |R|/(p^3 E^3)", s.large_tau_slope, -13.0 / 12.0 + 0.1, "tau in [100, 1e4]"),
        Check::ge(3, "small-tau slope of |R|/(p^3 E^3)", s.small_tau_slope, -5.0 / 6.0 - 0.1, "tau in [0.01, 1]"),
    ])
}

// ---------------------------------------------------------------- evolution

/// Data of the conservation run: `0.1 (1 + 0.3ip) e^{-p²}` on `[0, 6]` at `t = 1`.
pub fn conservation_profile() -> Result<Profile> {
    let g = GridSpec::default().with_p_max(6.0).with_resolve_time(10.0).build()?;
    Profile::from_fn(g, 1.0, |p| Complex64::new(0.1, 0.03 * p) * (-p * p).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationSummary {
    /// Drift with steps `dt`, `dt/2`, `dt/4`.
    pub drift: [f64; 3],
    pub order: f64,
}

pub fn conservation_summary() -> Result<ConservationSummary> {
    let u = conservation_profile()?;
    let cut = build_chi(1)?;
    let mut drift = [0.0; 3];
    for (r, d) in drift.iter_mut().enumerate() {
        let opts = EvolveOptions {
            t_end: 10.0,
            dt0: 0.5,
            growth: 1.0,
            dt_frac: 1.0,
            cutoff: Some(cut.clone()),
            mode: RhsMode::Direct,
            refine: r as u32,
            ..Default::default()
        };
        *d = weighted_l2_drift(&integrate(&u, &opts)?, &cut);
    }
    Ok(ConservationSummary { drift, order: (drift[0] / drift[1]).log2() })
}

/// Criterion 4.
pub fn conservation_checks() -> Result<Vec<Check>> {
    let s = conservation_summary()?;
    let win = "chi_1 cutoff run, t in [1, 10], dt = 0.5 and dt/2";
    Ok(vec![
        Check::le(4, "weighted L2 drift", s.drift[0], 1e-6, win),
        Check::ge(4, "observed order log2(drift(dt)/drift(dt/2))", s.order, 3.5, win),
    ])
}

/// Criterion 10.
pub fn cutoff_checks() -> Result<Vec<Check>> {
    let c1 = build_chi(1)?;
    let sups = [2, 4, 8, 16].iter().map(|&n| Ok(build_chi(n)?.sup_p_dsqrt())).collect::<Result<Vec<f64>>>()?;
    let decreasing = sups.windows(2).all(|w| w[1] < w[0]);
    Ok(vec![
        Check::ge(10, "alpha_1 lower end", c1.alpha_n, E - 1.0, "bracket [e-1, e]"),
        Check::le(10, "alpha_1 upper end", c1.alpha_n, E, "bracket [e-1, e]"),
        Check::le(10, "bisection residual", c1.residual, 1e-12, "n = 1"),
        Check::flag(10, "sup_p |p (chi_n^(1/2))'| strictly decreasing", decreasing, "n in {2, 4, 8, 16}"),
    ])
}

pub const MATCHED_C: f64 = 0.0271;
pub const MATCHED_ALPHA: f64 = 0.02;

/// Small data with the same jump at 0 as the self-similar profile `(MATCHED_C, MATCHED_ALPHA)`.
pub fn matched_profile() -> Result<Profile> {
    let s0 = Complex64::new(MATCHED_C, 3.0 * MATCHED_ALPHA / (2.0 * PI));
    let g = GridSpec::default().with_p_max(6.0).build()?;
    Profile::from_fn(g, 1.0, |p| s0 * (-(p / 2.0).powi(4)).exp())
}

pub struct MatchedRun {
    pub traj: Trajectory,
    pub selfsim: SelfSimilarProfile,
    pub delta: f64,
}

pub const MATCHED_TIMES: [f64; 8] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 100.0];

/// Hybrid run of [`matched_profile`] over `[1, 100]` and its self-similar partner.
pub fn matched_run() -> Result<MatchedRun> {
    let u = matched_profile()?;
    let delta = e_norm(&u)?.e_norm;
    let opts = EvolveOptions {
        t_end: 100.0,
        dt0: 0.02,
        growth: 1.1,
        dt_frac: 0.05,
        mode: RhsMode::Hybrid { tau_star: 5.0 },
        snapshot_times: MATCHED_TIMES.to_vec(),
        ..Default::default()
    };
    let traj = integrate(&u, &opts)?;
    let selfsim = solve_profile(MATCHED_C, MATCHED_ALPHA, 1e-6)?;
    Ok(MatchedRun { traj, selfsim, delta })
}

/// Criterion 5, plus the sup and time-derivative bounds along the same run.
pub fn small_data_checks(run: &MatchedRun) -> Result<Vec<Check>> {
    let d = &run.traj.diagnostics;
    let sup = d.iter().map(|d| d.e_norm).fold(0.0, f64::max);
    let delta = run.delta;
    let excess = d.iter().map(|x| x.sup_profile - d[0].sup_profile).fold(0.0, f64::max);
    // t max|∂_t ũ| / E³: the constant fitted on t ≤ 10 must cover the rest of the run
    let c = |lo: f64, hi: f64| {
        d.iter().filter(|x| x.t >= lo && x.t <= hi).map(|x| x.t * x.sup_dt / x.e_norm.powi(3)).fold(0.0, f64::max)
    };
    Ok(vec![
        Check::within(5, "initial E norm", delta, 0.05, 5e-4, "matched profile, t = 1"),
        Check::le(5, "sup_t E(t) norm / initial", sup / delta, 2.0, "t in [1, 100]"),
        Check::le(0, "sup-bound constant (sup|u(t)| - sup|u(1)|)/(delta^3 + delta^5)", excess / (delta.powi(3) + delta.powi(5)), 1.0, "matched run, t in [1, 100]"),
        Check::le(0, "t max|du/dt| / E^3 on [10, 100] over its value on [1, 10]", c(10.0, 100.0) / c(1.0, 10.0), 1.5, "matched run"),
    ])
}

// ---------------------------------------------------------------- self-similar

/// Criterion 6.
pub fn selfsim_checks() -> Result<Vec<Check>> {
    let tol = 1e-6;
    let s = solve_profile(0.05, 0.02, tol)?;
    let target = Complex64::new(0.05, 3.0 * 0.02 / (2.0 * PI));
    let jump = (s.profile.values[0] - target).norm();
    let inv = invariance_residual(&s, &[1.5, 2.0, 4.0])?;
    let worst = inv.iter().map(|r| r.1).fold(0.0, f64::max);
    let k = evolve::rhs(&s.profile, &EvolveOptions { mode: RhsMode::Hybrid { tau_star: 5.0 }, ..Default::default() })?;
    let e = e_norm(&s.profile)?.e_norm;
    let i = vector_field_i(&s.profile, &k)?.l2;
    let run = integrate(&s.profile, &EvolveOptions { t_end: 4.0, dt0: 0.02, growth: 1.0, dt_frac: 0.02, ..Default::default() })?;
    let (lo, hi) = run.diagnostics.iter().fold((f64::INFINITY, 0.0f64), |(a, b), d| (a.min(d.e_norm), b.max(d.e_norm)));
    Ok(vec![
        Check::le(6, "|S(0+) - (0.05 + 0.009549i)| at the first node", jump, 10.0 * tol, "c = 0.05, alpha = 0.02"),
        Check::le(6, "max_p |V(t,p) - V(1,p)|", worst, 10.0 * tol, "t in {1.5, 2, 4}"),
        Check::le(6, "||I S||_L2 / E norm", i / e, 1e-3, "t = 1"),
        Check::le(6, "large-p modulus flatness", s.fitted.modulus_flatness, 0.05, "p in [p_max/2, p_max]"),
        Check::le(0, "E(t) norm variation (max - min)/min", (hi - lo) / lo, 0.01, "self-similar run, t in [1, 4]"),
    ])
}

// ---------------------------------------------------------------- scattering

/// Criterion 7, small-data part.
pub fn fourier_checks(run: &MatchedRun) -> Result<Vec<Check>> {
    let acc = accumulate_phase(&run.traj)?;
    let rep = extract_u_infinity(&run.traj, &acc)?;
    let rate = scatter::verify_fourier_rate(&run.traj, &rep)?;
    let unit = (0..acc.phase.len()).flat_map(|k| acc.e_u(k)).map(|e| (e.norm() - 1.0).abs()).fold(0.0, f64::max);
    let modulus = rep.u.iter().zip(&rep.u_inf).map(|(a, b)| (a.norm() - b.norm()).abs() / a.norm().max(1e-300)).fold(0.0, f64::max);
    Ok(vec![
        Check::le(7, "Fourier residual slope", rate.fit.slope, -1.0 / 12.0 + 0.03, "<p^3 t> in [10, 1e4], t <= 25"),
        Check::le(7, "max ||E_u| - 1|", unit, 4.0 * f64::EPSILON, "all nodes and snapshots"),
        Check::le(7, "max ||U_inf| - |U|| / |U|", modulus, 4.0 * f64::EPSILON, "all nodes"),
    ])
}

/// Criterion 7, self-similar part: evolve `𝒮` to `t = 20` and read `|U∞|`.
pub fn selfsimilar_scattering_checks(s: &SelfSimilarProfile) -> Result<Vec<Check>> {
    let grid: Arc<FrequencyGrid> = GridSpec::default().with_p_max(4.0).with_resolve_time(20.0).build()?;
    let u = s.at_time(grid, 1.0)?;
    let opts = EvolveOptions { t_end: 20.0, dt0: 0.02, growth: 1.1, dt_frac: 0.05, mode: RhsMode::Hybrid { tau_star: 5.0 }, ..Default::default() };
    let traj = integrate(&u, &opts)?;
    let acc = accumulate_phase(&traj)?;
    let rep = extract_u_infinity(&traj, &acc)?;
    let mods: Vec<f64> = rep.u_inf[rep.band_start..].iter().map(|v| v.norm()).collect();
    let (lo, hi) = mods.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &m| (a.min(m), b.max(m)));
    let mean = mods.iter().sum::<f64>() / mods.len() as f64;
    let a_abs = s.fitted.a_coef.norm();
    let link = (mods[0] - a_abs).abs() / a_abs;
    Ok(vec![
        Check::le(7, "self-similar run: (max - min)|U_inf| / mean", (hi - lo) / mean, 0.05, "p^3 t_end >= 10, t_end = 20"),
        Check::le(7, "| |U_inf(0+)| - |A| | / |A|", link, 0.05, "first band node vs large-p fit"),
    ])
}

/// Criterion 8.
pub fn physical_checks(run: &MatchedRun) -> Result<Vec<Check>> {
    let acc = accumulate_phase(&run.traj)?;
    let rep = extract_u_infinity(&run.traj, &acc)?;
    let pr = scatter::verify_physical_rate(&run.traj, &rep, &MATCHED_TIMES, run.delta)?;
    let pts = MATCHED_TIMES
        .iter()
        .map(|&t| Ok((t, scatter::sup_difference(run.traj.nearest(t), &run.selfsim, -300.0, 10.0)?)))
        .collect::<Result<Vec<_>>>()?;
    let s = fit_power_law(&pts, [1.0, 100.0])?.slope;
    let nu = 0.45;
    Ok(vec![
        Check::le(8, "Airy residual envelope slope (1/4pi phase)", pr.fourier_coef.fit.slope, -0.3 + 0.05, "<x/t^(1/3)> in [10, 200], t in [1, 100]"),
        Check::le(8, "Airy residual envelope slope (1/6 phase)", pr.physical_coef.fit.slope, -0.3 + 0.05, "<x/t^(1/3)> in [10, 200], t in [1, 100]"),
        Check::le(8, "decay exponent of ||u - S||_inf", s, -(1.0 / 3.0 + nu / 3.0) + 0.05, "t in [1, 100], x/t^(1/3) in [-300, 10]"),
    ])
}

/// Criterion 9.
pub fn y_nu_checks(run: &MatchedRun) -> Result<Vec<Check>> {
    let r = scatter::y_nu_drift(&run.traj, &run.selfsim, 0.45, run.delta)?;
    Ok(vec![Check::le(9, "sup_t ||u - S||_(Y^nu) / delta", r, 30.0, "nu = 0.45, t in [1, 100]")])
}

/// Self-similar solve on a custom grid, used by the CLI.
pub fn selfsim_with(c: f64, alpha: f64, tol: f64, opts: &SelfSimilarOptions) -> Result<SelfSimilarProfile> {
    solve_profile_with(c, alpha, tol, opts)
}

/// `|R|/(p³E³)` and `⟨τ⟩` for plotting, from any scan.
pub fn normalized_remainders(samples: &[nonlin::NonlinSample]) -> Vec<(f64, f64)> {
    samples.iter().map(|s| (jap(s.tau), s.remainder.norm() / (s.p.powi(3) * s.e_norm.powi(3)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_airy_reference_values() {
        // Ai(1) = 0.1352924163128814, Ai(-2) = 0.2274074282016856, Ai(6) = 9.9476943602529e-6
        assert!((classical_airy(1.0).0 - 0.135_292_416_312_881_4).abs() < 1e-14);
        assert!((classical_airy(-2.0).0 - 0.227_407_428_201_685_6).abs() < 1e-13);
        assert!((classical_airy(6.0).0 - 9.947_694_360_252_9e-6).abs() < 1e-11);
        assert!((classical_airy(8.0).0 / 4.692_207_616_099_223_6e-8 - 1.0).abs() < 1e-10);
        // Ai'(0) and Wronskian-free check of the derivative by differences
        for &x in &[-7.3, -0.4, 2.2, 5.5] {
            let h = 1e-5;
            let fd = (classical_airy(x + h).0 - classical_airy(x - h).0) / (2.0 * h);
            assert!((fd - classical_airy(x).1).abs() < 1e-8, "{x}");
        }
    }

    #[test]
    fn classical_airy_is_continuous_across_branches() {
        for &x in &[0.0, 6.5] {
            let a = classical_airy(x - 1e-12);
            let b = classical_airy(x + 1e-12);
            assert!((a.0 - b.0).abs() < 1e-11 && (a.1 - b.1).abs() < 1e-11, "{x}: {a:?} {b:?}");
        }
    }

    #[test]
    fn suite_names_parse() {
        for s in ["decay", "nonlin", "conservation", "scatter", "selfsim"] {
            assert_eq!(s.parse::<Suite>().unwrap().name(), s);
        }
        assert!("other".parse::<Suite>().is_err());
    }

    #[test]
    fn cutoff_criterion() {
        assert!(cutoff_checks().unwrap().iter().all(|c| c.passed));
    }
}
