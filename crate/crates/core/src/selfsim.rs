//! Self-similar profiles `𝒮(p) = ũ(1, p)` with `ũ(t, p) = 𝒮(t^{1/3} p)`.
//!
//! Self-similarity turns the profile equation at `t = 1` into
//! `(p/3) 𝒮'(p) = -(ε/4π²) 𝒩[𝒮](p)`, which is solved as a fixed point
//! anchored at the jump `𝒮(0⁺) = c + 3iα/2π`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{self, EvolveOptions, RhsMode};
use crate::grid::{FrequencyGrid, GridSpec};
use crate::profile::{e_norm, Profile, TailModel};
use crate::quad;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarOptions {
    pub epsilon: f64,
    pub max_iter: usize,
    pub tau_star: f64,
    pub grid: GridSpec,
}

impl Default for SelfSimilarOptions {
    fn default() -> Self {
        SelfSimilarOptions {
            epsilon: 1.0,
            max_iter: 200,
            tau_star: 5.0,
            grid: GridSpec::default().with_p_max(8.0).with_resolve_time(4.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    /// `A`, with the phase taken at `p = 1` of the fitted spiral.
    pub a_coef: Complex64,
    /// Rate of the phase in `ln p`.
    pub a: f64,
    /// Relative standard deviation of `|𝒮|` on the fit window.
    pub modulus_flatness: f64,
    pub window: [f64; 2],
    /// Size of the `B e^{-8ip³/9}/p³` correction at the left end of the window.
    pub b_term: f64,
    pub b_warning: bool,
}

#[derive(Debug, Clone)]
pub struct SelfSimilarProfile {
    pub profile: Profile,
    pub c: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub last_change: f64,
    pub fitted: AsymptoticFit,
}

impl SelfSimilarProfile {
    /// `ũ(t, ·) = 𝒮(t^{1/3} ·)` sampled on `grid`.
    pub fn at_time(&self, grid: Arc<FrequencyGrid>, t: f64) -> Result<Profile> {
        let s = t.cbrt();
        let p = &self.profile;
        Ok(Profile::new(grid.clone(), grid.nodes.iter().map(|&q| p.value_at(s * q)).collect(), p.limit_at_zero, t)?
            .with_tail(TailModel::Frozen))
    }
}

/// `∫_0^{p_i} f` at every node.
fn cumulative(grid: &FrequencyGrid, f: &[Complex64]) -> Vec<Complex64> {
    let s = quad::cumulative_matrix(grid.order);
    let mut out = Vec::with_capacity(f.len());
    let mut base = Complex64::new(0.0, 0.0);
    for panel in &grid.panels {
        let h = 0.5 * (panel.b - panel.a);
        let fp = &f[panel.start..panel.start + grid.order];
        for row in s.iter() {
            let v: Complex64 = row.iter().zip(fp).map(|(w, x)| x * *w).sum();
            out.push(base + v * h);
        }
        let total: Complex64 = fp.iter().zip(&grid.weights[panel.start..panel.start + grid.order]).map(|(x, w)| x * *w).sum();
        base += total;
    }
    out
}

fn rhs_opts(opts: &SelfSimilarOptions) -> EvolveOptions {
    EvolveOptions { epsilon: opts.epsilon, mode: RhsMode::Hybrid { tau_star: opts.tau_star }, ..Default::default() }
}

/// Solve with the default options (`ε = +1`, `p_max = 8`).
///
/// ```
/// let s = mkdv_core::selfsim::solve_profile(0.0, 0.0, 1e-6).unwrap();
/// assert_eq!(s.profile.sup(), 0.0);
/// ```
pub fn solve_profile(c: f64, alpha: f64, tol: f64) -> Result<SelfSimilarProfile> {
    solve_profile_with(c, alpha, tol, &SelfSimilarOptions::default())
}

pub fn solve_profile_with(c: f64, alpha: f64, tol: f64, opts: &SelfSimilarOptions) -> Result<SelfSimilarProfile> {
    if !(tol > 0.0) || !c.is_finite() || !alpha.is_finite() {
        return Err(Error::Domain("need finite c, alpha and tol > 0".into()));
    }
    let grid = opts.grid.build()?;
    let s0 = Complex64::new(c, 3.0 * alpha / (2.0 * PI));
    let mut cur = Profile::new(grid.clone(), vec![s0; grid.len()], s0, 1.0)?.with_tail(TailModel::Frozen);
    let eo = rhs_opts(opts);
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let f = evolve::rhs(&cur, &eo)?;
        let g: Vec<Complex64> = f.iter().zip(&grid.nodes).map(|(v, p)| v * (3.0 / p)).collect();
        let next: Vec<Complex64> = cumulative(&grid, &g).into_iter().map(|v| v + s0).collect();
        let diff: Vec<Complex64> = next.iter().zip(&cur.values).map(|(a, b)| a - b).collect();
        change = e_norm(&Profile::new(grid.clone(), diff, Complex64::new(0.0, 0.0), 1.0)?)?.e_norm;
        cur = cur.with_values(next);
        if !change.is_finite() {
            break;
        }
        if change < tol {
            let fitted = fit_profile(&cur)?;
            return Ok(SelfSimilarProfile {
                profile: cur,
                c,
                alpha,
                epsilon: opts.epsilon,
                iterations: it,
                last_change: change,
                fitted,
            });
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, last_change: change })
}

fn fit_profile(p: &Profile) -> Result<AsymptoticFit> {
    let pm = p.grid.p_max;
    let window = [0.5 * pm, pm];
    let pts: Vec<(f64, Complex64)> = p
        .grid
        .nodes
        .iter()
        .zip(&p.values)
        .filter(|(q, _)| **q >= window[0] && **q <= window[1])
        .map(|(q, v)| (*q, *v))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit("fewer than three nodes in the large-p window".into()));
    }
    let n = pts.len() as f64;
    let mods: Vec<f64> = pts.iter().map(|(_, v)| v.norm()).collect();
    let mean = mods.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Ok(AsymptoticFit {
            a_coef: Complex64::new(0.0, 0.0),
            a: 0.0,
            modulus_flatness: 0.0,
            window,
            b_term: 0.0,
            b_warning: false,
        });
    }
    let flat = (mods.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / n).sqrt() / mean;
    // unwrap the phase along the window
    let mut phase = Vec::with_capacity(pts.len());
    let mut prev = pts[0].1.arg();
    let mut acc = prev;
    for (_, v) in &pts {
        let a = v.arg();
        let mut d = a - prev;
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        acc += d;
        prev = a;
        phase.push(acc);
    }
    let lx: Vec<f64> = pts.iter().map(|(q, _)| q.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = phase.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&phase).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = sxy / sxx;
    let phi0 = my - a * mx;
    let b_term = 3.0 * 3f64.sqrt() / (32.0 * PI) * mean.powi(3) / window[0].powi(3);
    Ok(AsymptoticFit {
        a_coef: Complex64::from_polar(mean, phi0),
        a,
        modulus_flatness: flat,
        window,
        b_term,
        b_warning: b_term > 0.1 * mean,
    })
}

/// Large-`p` fit `𝒮(p) ≈ A e^{ia ln p}` over `[p_max/2, p_max]`.
pub fn asymptotic_fit(s: &SelfSimilarProfile) -> Result<AsymptoticFit> {
    fit_profile(&s.profile)
}

/// `max_p |𝒱(t,p) - 𝒱(1,p)|` at each requested time, with `𝒱(t,p) = ũ(t, t^{-1/3}p)`
/// and `ũ` evolved from `𝒮` by the hybrid right-hand side.
pub fn invariance_residual(s: &SelfSimilarProfile, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    invariance_residual_with(s, times, 5.0, 0.02)
}

pub fn invariance_residual_with(s: &SelfSimilarProfile, times: &[f64], tau_star: f64, dt_frac: f64) -> Result<Vec<(f64, f64)>> {
    let t_end = times.iter().copied().fold(1.0, f64::max);
    if times.iter().any(|&t| t < 1.0) {
        return Err(Error::Domain("invariance times must be at least 1".into()));
    }
    if t_end == 1.0 {
        return Ok(times.iter().map(|&t| (t, 0.0)).collect());
    }
    let opts = EvolveOptions {
        epsilon: s.epsilon,
        dt0: dt_frac,
        growth: 1.0,
        dt_frac,
        t_end,
        mode: RhsMode::Hybrid { tau_star },
        snapshot_times: times.to_vec(),
        ..Default::default()
    };
    let tr = evolve::integrate(&s.profile, &opts)?;
    let base = &s.profile;
    Ok(times
        .iter()
        .map(|&t| {
            let u = tr.nearest(t);
            let r = t.cbrt();
            let res = base
                .grid
                .nodes
                .iter()
                .zip(&base.values)
                .map(|(&p, v)| (u.value_at(p / r) - v).norm())
                .fold(0.0, f64::max);
            (t, res)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_profile() {
        let s = solve_profile(0.0, 0.0, 1e-6).unwrap();
        assert_eq!(s.profile.sup(), 0.0);
        assert_eq!(s.fitted.a, 0.0);
        assert_eq!(s.fitted.modulus_flatness, 0.0);
    }

    #[test]
    fn cumulative_integrates_polynomial() {
        let g = GridSpec::default().with_p_max(2.0).build().unwrap();
        let f: Vec<Complex64> = g.nodes.iter().map(|p| Complex64::new(3.0 * p * p, 1.0)).collect();
        let c = cumulative(&g, &f);
        for (v, p) in c.iter().zip(&g.nodes) {
            assert!((v - Complex64::new(p.powi(3), *p)).norm() < 1e-13);
        }
    }

    #[test]
    fn jump_is_imposed() {
        let opts = SelfSimilarOptions { grid: GridSpec::default().with_p_max(8.0).with_resolve_time(1.0), ..Default::default() };
        let s = solve_profile_with(0.05, 0.0, 1e-6, &opts).unwrap();
        assert_eq!(s.profile.limit_at_zero, Complex64::new(0.05, 0.0));
        assert!((s.profile.values[0] - Complex64::new(0.05, 0.0)).norm() < 1e-8);
        // leading log spiral: a = -3ε|A|²/4π
        let a = -3.0 * s.fitted.a_coef.norm_sqr() / (4.0 * PI);
        assert!((s.fitted.a - a).abs() < 0.05 * a.abs(), "{} vs {a}", s.fitted.a);
        assert!(s.fitted.modulus_flatness < 0.05);
    }
}
