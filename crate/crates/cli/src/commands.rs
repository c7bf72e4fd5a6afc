//! One function per subcommand. Every artifact is written atomically; numbers in
//! CSV use the shortest round-trip form, so identical configs give identical bytes.

use std::path::{Path, PathBuf};

use mkdv_core::evolve::{integrate, weighted_l2_drift, StepDiagnostics};
use mkdv_core::fit::FitResult;
use mkdv_core::io::{write_atomic, write_csv, write_profile};
use mkdv_core::nonlin::{remainder_scan, DirectRoute, ScanOptions};
use mkdv_core::profile::{airy_main_term, e_norm, r_alpha_norm, reconstruct_physical, PhysicalSamples, WeightSequence};
use mkdv_core::scatter::{accumulate_phase, cauchy_constant, extract_u_infinity, verify_fourier_rate};
use mkdv_core::selfsim::{invariance_residual_with, solve_profile_with, AsymptoticFit, SelfSimilarOptions};
use mkdv_core::verify::{run_suite, Suite};
use mkdv_core::{airy_fock, airy_fock_deriv, Error, Result};
use serde::Serialize;

use crate::config::{jump, RunConfig};
use crate::Failure;

type Outcome = std::result::Result<(), Failure>;

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Domain(format!("json: {e}")))?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

fn linspace(a: f64, b: f64, n: u64) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

pub fn airy(cfg: Result<RunConfig>) -> Outcome {
    let cfg = cfg?;
    let z = linspace(cfg.f64_or("z_min", -20.0)?, cfg.f64_or("z_max", 20.0)?, cfg.u64_or("points", 401)?);
    let rows = z
        .iter()
        .map(|&z| {
            let a = airy_fock(z)?;
            let d = airy_fock_deriv(z)?;
            Ok(vec![z, a.re, a.im, d.re, d.im])
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(&cfg.output_dir.join("airy.csv"), &["z", "ai_re", "ai_im", "dai_re", "dai_im"], &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct ReconstructSummary {
    t: f64,
    e_norm: f64,
    sup_part: f64,
    deriv_part: f64,
    tail_warning: bool,
    x_window: [f64; 2],
    r_alpha: Option<mkdv_core::profile::RAlphaReport>,
}

pub fn reconstruct(cfg: Result<RunConfig>) -> Outcome {
    let cfg = cfg?;
    let u = cfg.profile()?;
    let (a, b) = (cfg.f64_or("x_min", -50.0)?, cfg.f64_or("x_max", 20.0)?);
    let n = cfg.u64_or("points", 701)?;
    if !(b > a) || n < 2 {
        return Err(Error::Parse { line: cfg.raw.line("x_max").unwrap_or(0), message: "field 'x_max': need x_max > x_min and points >= 2".into() }.into());
    }
    let x = linspace(a, b, n);
    let r = reconstruct_physical(&u, &x)?;
    write_csv(&cfg.output_dir.join("physical.csv"), &["x", "u"], &x.iter().zip(&r.u).map(|(x, v)| vec![*x, *v]).collect::<Vec<_>>())?;
    let edge = -u.time.cbrt();
    let airy_rows = x
        .iter()
        .filter(|&&x| x < edge)
        .map(|&x| airy_main_term(&u, x).map(|t| vec![x, t.main, t.residual]))
        .collect::<Result<Vec<_>>>()?;
    write_csv(&cfg.output_dir.join("airy_term.csv"), &["x", "main", "residual"], &airy_rows)?;
    let r_alpha = match cfg.raw.get_list("weights")? {
        None => None,
        Some(a_k) => {
            let seq = WeightSequence::new(cfg.positive_or("weight_alpha", 2.0)?, a_k)?;
            let dx = (b - a) / (n - 1) as f64;
            Some(r_alpha_norm(&PhysicalSamples { x0: a, dx, values: r.u.clone() }, &seq)?)
        }
    };
    let e = e_norm(&u)?;
    let summary = ReconstructSummary {
        t: u.time,
        e_norm: e.e_norm,
        sup_part: e.sup_part,
        deriv_part: e.deriv_part,
        tail_warning: r.tail_warning,
        x_window: [a, b],
        r_alpha,
    };
    write_json(&cfg.output_dir.join("reconstruct.json"), &summary)?;
    Ok(())
}

pub fn nonlin(cfg: Result<RunConfig>) -> Outcome {
    let cfg = cfg?;
    let u = cfg.profile()?;
    let ps = cfg.list_or("p", &[0.5, 1.0, 1.5])?;
    let ts = cfg.list_or("times", &[1.0, 10.0, 100.0])?;
    let pairs: Vec<(f64, f64)> = ps.iter().flat_map(|&p| ts.iter().map(move |&t| (p, t))).collect();
    let s = remainder_scan(&u, &pairs, &ScanOptions::default())?;
    let rows: Vec<Vec<f64>> = s
        .iter()
        .map(|s| {
            vec![
                s.p,
                s.t,
                s.tau,
                s.direct.re,
                s.direct.im,
                s.physical.re,
                s.physical.im,
                s.stationary.re,
                s.stationary.im,
                s.remainder.norm(),
                s.envelope(),
                if s.route == DirectRoute::Quadrature { 0.0 } else { 1.0 },
            ]
        })
        .collect();
    write_csv(
        &cfg.output_dir.join("nonlin.csv"),
        &[
            "p",
            "t",
            "tau",
            "direct_re",
            "direct_im",
            "physical_re",
            "physical_im",
            "stationary_re",
            "stationary_im",
            "remainder_abs",
            "envelope",
            "direct_from_physical",
        ],
        &rows,
    )?;
    Ok(())
}

fn diagnostics_rows(d: &[StepDiagnostics]) -> Vec<Vec<f64>> {
    d.iter().map(|d| vec![d.t, d.e_norm, d.i_norm, d.weighted_l2, d.sup_profile, d.sup_dt]).collect()
}

const DIAG_HEADER: [&str; 6] = ["t", "e_norm", "i_norm", "weighted_l2", "sup_profile", "sup_dt"];

#[derive(Serialize)]
struct EvolveSummary {
    t_start: f64,
    t_end: f64,
    steps: usize,
    e_norm_start: f64,
    e_norm_sup: f64,
    weighted_l2_drift: Option<f64>,
    cutoff_alpha_n: Option<f64>,
}

pub fn evolve(cfg: Result<RunConfig>) -> Outcome {
    let cfg = cfg?;
    let u = cfg.profile()?;
    let opts = cfg.evolve_options()?;
    let traj = integrate(&u, &opts)?;
    let dir = &cfg.output_dir;
    write_csv(&dir.join("diagnostics.csv"), &DIAG_HEADER, &diagnostics_rows(&traj.diagnostics))?;
    write_profile(&dir.join("profile_final.txt"), traj.snapshots.last().expect("non-empty"))?;
    for &t in &opts.snapshot_times {
        write_profile(&dir.join(format!("profile_t{t}.txt")), traj.nearest(t))?;
    }
    let summary = EvolveSummary {
        t_start: u.time,
        t_end: opts.t_end,
        steps: traj.diagnostics.len() - 1,
        e_norm_start: traj.diagnostics[0].e_norm,
        e_norm_sup: traj.diagnostics.iter().map(|d| d.e_norm).fold(0.0, f64::max),
        weighted_l2_drift: traj.cutoff.as_ref().map(|c| weighted_l2_drift(&traj, c)),
        cutoff_alpha_n: traj.cutoff.as_ref().map(|c| c.alpha_n),
    };
    write_json(&dir.join("evolve.json"), &summary)?;
    Ok(())
}

#[derive(Serialize)]
struct SelfSimilarSummary {
    c: f64,
    alpha: f64,
    epsilon: f64,
    jump: [f64; 2],
    iterations: usize,
    last_change: f64,
    tolerance: f64,
    fit: AsymptoticFit,
    /// `(t, max_p |V(t,p) - V(1,p)|)`.
    invariance: Vec<(f64, f64)>,
}

pub fn selfsimilar(cfg: Result<RunConfig>) -> Outcome {
    let cfg = cfg?;
    let c = cfg.f64_or("c", 0.05)?;
    let alpha = cfg.f64_or("alpha", 0.02)?;
    let tol = cfg.positive_or("tol", 1e-6)?;
    let tau_star = cfg.positive_or("tau_star", 5.0)?;
    let opts = SelfSimilarOptions {
        epsilon: cfg.epsilon,
        max_iter: cfg.u64_or("max_iter", 200)? as usize,
        tau_star,
        grid: mkdv_core::GridSpec::default()
            .with_p_max(cfg.positive_or("p_max", 8.0)?)
            .with_resolve_time(cfg.positive_or("resolve_time", 4.0)?),
    };
    let s = solve_profile_with(c, alpha, tol, &opts)?;
    let times = cfg.list_or("invariance_times", &[])?;
    let invariance = if times.is_empty() { Vec::new() } else { invariance_residual_with(&s, &times, tau_star, 0.02)? };
    write_profile(&cfg.output_dir.join("selfsimilar_profile.txt"), &s.profile)?;
    let j = jump(c, alpha);
    let summary = SelfSimilarSummary {
        c,
        alpha,
        epsilon: cfg.epsilon,
        jump: [j.re, j.im],
        iterations: s.iterations,
        last_change: s.last_change,
        tolerance: tol,
        fit: s.fitted,
        invariance,
    };
    write_json(&cfg.output_dir.join("selfsimilar.json"), &summary)?;
    Ok(())
}

#[derive(Serialize)]
struct ScatterSummary {
    t_end: f64,
    epsilon: f64,
    band_start_p: f64,
    fourier_rate: FitResult,
    fourier_rate_target: String,
    cauchy_constant: f64,
    phase_spacing_warning: bool,
}

pub fn scatter(cfg: Result<RunConfig>) -> Outcome {
    let cfg = cfg?;
    let u = cfg.profile()?;
    let mut opts = cfg.evolve_options()?;
    if !cfg.raw.contains("t_end") {
        opts.t_end = 100.0;
    }
    let traj = integrate(&u, &opts)?;
    let acc = accumulate_phase(&traj)?;
    let rep = extract_u_infinity(&traj, &acc)?;
    let rate = verify_fourier_rate(&traj, &rep)?;
    let rows: Vec<Vec<f64>> = (0..rep.nodes.len())
        .map(|k| vec![rep.nodes[k], rep.u[k].re, rep.u[k].im, rep.psi[k], rep.u_inf[k].re, rep.u_inf[k].im])
        .collect();
    write_csv(&cfg.output_dir.join("u_inf.csv"), &["p", "u_re", "u_im", "psi", "u_inf_re", "u_inf_im"], &rows)?;
    write_csv(&cfg.output_dir.join("diagnostics.csv"), &DIAG_HEADER, &diagnostics_rows(&traj.diagnostics))?;
    let summary = ScatterSummary {
        t_end: rep.t_end,
        epsilon: rep.epsilon,
        band_start_p: rep.nodes[rep.band_start],
        fourier_rate: rate.fit,
        fourier_rate_target: "<= -1/12 + 0.03 on <p^3 t> in [10, 1e4]".into(),
        cauchy_constant: cauchy_constant(&traj, &acc, rep.band_start),
        phase_spacing_warning: acc.spacing_warning,
    };
    write_json(&cfg.output_dir.join("scatter.json"), &summary)?;
    Ok(())
}

pub fn verify(suite: &str, output_dir: Option<PathBuf>) -> Outcome {
    let s: Suite = suite.parse()?;
    let dir = output_dir
        .or_else(|| std::env::var_os("MKDV_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let report = run_suite(s)?;
    for c in &report.checks {
        println!(
            "{} [{}] {} = {} (bound {}; {})",
            if c.passed { "PASS" } else { "FAIL" },
            c.criterion,
            c.name,
            c.value,
            c.bound,
            c.window
        );
    }
    write_json(&dir.join(format!("verify_{}.json", s.name())), &report)?;
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Failure::Acceptance(format!("suite {}: {}", s.name(), failed.join("; "))))
    }
}
