//! Run configuration: a flat `key = value` file, one schema per subcommand.
//!
//! Shared keys
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `output_dir` | where artifacts go (overridden by `--output-dir` or `MKDV_OUTPUT_DIR`) | `out` |
//! | `seed` | seed of the `random` test profile | `0` |
//! | `epsilon` | `+1` focusing, `-1` defocusing | `1` |
//! | `profile` | `gaussian`, `bump`, `smooth`, `plateau`, `matched`, `random` or a profile file | `gaussian` |
//! | `amplitude` | factor applied to built-in profiles | `1` |
//! | `t` | time the profile is taken at | `1` |
//! | `p_max`, `resolve_time` | frequency grid | `8`, `1` |
//!
//! Subcommand keys are listed in [`keys`].

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use mkdv_core::evolve::{build_chi, EvolveOptions, RhsMode};
use mkdv_core::io::{read_profile, Config};
use mkdv_core::{verify, ComplexValue, Error, GridSpec, Profile, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const COMMON: &[&str] = &["output_dir", "seed", "epsilon", "profile", "amplitude", "t", "p_max", "resolve_time"];
const EVOLVE: &[&str] = &["t_end", "dt0", "growth", "dt_frac", "cutoff_n", "mode", "tau_star", "refine", "snapshots"];

/// Keys accepted by a subcommand, shared ones included.
pub fn keys(sub: &str) -> Vec<&'static str> {
    let own: &[&str] = match sub {
        "airy" => &["z_min", "z_max", "points"],
        "reconstruct" => &["x_min", "x_max", "points", "weight_alpha", "weights"],
        "nonlin" => &["p", "times"],
        "evolve" => EVOLVE,
        "selfsimilar" => &["c", "alpha", "tol", "max_iter", "tau_star", "invariance_times"],
        "scatter" => EVOLVE,
        _ => &[],
    };
    COMMON.iter().chain(own).copied().collect()
}

pub struct RunConfig {
    pub raw: Config,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub epsilon: f64,
}

impl RunConfig {
    pub fn load(sub: &str, path: Option<&Path>, dir_override: Option<PathBuf>) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        let raw = Config::parse(&text, &keys(sub))?;
        let output_dir = dir_override
            .or_else(|| std::env::var_os("MKDV_OUTPUT_DIR").map(PathBuf::from))
            .or_else(|| raw.get_str("output_dir").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let seed = raw.get_u64("seed")?.unwrap_or(0);
        let epsilon = raw.get_epsilon("epsilon")?.unwrap_or(1.0);
        Ok(RunConfig { raw, output_dir, seed, epsilon })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.raw.get_f64(key)?.unwrap_or(default))
    }

    pub fn positive_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.raw.get_positive(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.raw.get_u64(key)?.unwrap_or(default))
    }

    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        Ok(self.raw.get_list(key)?.unwrap_or_else(|| default.to_vec()))
    }

    fn field_error(&self, key: &str, message: String) -> Error {
        Error::Parse { line: self.raw.line(key).unwrap_or(0), message: format!("field '{key}': {message}") }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::default()
            .with_p_max(self.positive_or("p_max", 8.0)?)
            .with_resolve_time(self.positive_or("resolve_time", 1.0)?))
    }

    /// The test profile named by `profile`, at time `t`.
    pub fn profile(&self) -> Result<Profile> {
        let t = self.positive_or("t", 1.0)?;
        let amp = self.f64_or("amplitude", 1.0)?;
        let name = self.raw.get_str("profile").unwrap_or("gaussian");
        let scale = |u: Profile| {
            let v = u.values.iter().map(|z| z * amp).collect();
            let mut u = u.with_values(v);
            u.limit_at_zero *= amp;
            u
        };
        let u = match name {
            "gaussian" => Profile::from_fn(self.grid()?.build()?, t, |p| ComplexValue::new((-p * p).exp(), 0.0))?,
            "bump" => verify::bump_profile(t)?,
            "smooth" => verify::smooth_profile(t)?,
            "plateau" => verify::plateau_profile(t)?,
            "matched" => verify::matched_profile()?.with_time(t),
            "random" => self.random_profile(t)?,
            path => {
                let p = Path::new(path);
                if !p.exists() {
                    return Err(self.field_error(
                        "profile",
                        format!("'{path}' is neither a built-in profile (gaussian|bump|smooth|plateau|matched|random) nor a file"),
                    ));
                }
                return read_profile(p);
            }
        };
        Ok(scale(u))
    }

    /// Sum of four complex Gaussians with coefficients drawn from `seed`.
    fn random_profile(&self, t: f64) -> Result<Profile> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let terms: Vec<(ComplexValue, f64, f64)> = (0..4)
            .map(|_| {
                let c = ComplexValue::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                (c, rng.random_range(0.0..3.0), rng.random_range(0.3..1.5))
            })
            .collect();
        Profile::from_fn(self.grid()?.build()?, t, |p| {
            terms.iter().map(|(c, m, w)| c * (-((p - m) / w).powi(2)).exp()).sum::<ComplexValue>() * 0.25
        })
    }

    pub fn evolve_options(&self) -> Result<EvolveOptions> {
        let mode = match self.raw.get_str("mode").unwrap_or("hybrid") {
            "direct" => RhsMode::Direct,
            "stationary" => RhsMode::Stationary,
            "hybrid" => RhsMode::Hybrid { tau_star: self.positive_or("tau_star", 5.0)? },
            other => return Err(self.field_error("mode", format!("expected direct|stationary|hybrid, got '{other}'"))),
        };
        let cutoff = match self.raw.get_u64("cutoff_n")? {
            None | Some(0) => None,
            Some(n) => Some(build_chi(u32::try_from(n).map_err(|_| self.field_error("cutoff_n", "too large".into()))?)?),
        };
        let d = EvolveOptions::default();
        Ok(EvolveOptions {
            epsilon: self.epsilon,
            dt0: self.positive_or("dt0", d.dt0)?,
            growth: self.positive_or("growth", d.growth)?,
            dt_frac: self.positive_or("dt_frac", d.dt_frac)?,
            t_end: self.positive_or("t_end", d.t_end)?,
            cutoff,
            mode,
            refine: self.u64_or("refine", 0)? as u32,
            snapshot_times: self.list_or("snapshots", &[])?,
            allow_backward: false,
        })
    }
}

/// Jump `c + 3iα/2π` of a self-similar profile.
pub fn jump(c: f64, alpha: f64) -> ComplexValue {
    ComplexValue::new(c, 3.0 * alpha / (2.0 * PI))
}
