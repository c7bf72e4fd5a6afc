//! Least-squares power laws on log–log data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

impl FitResult {
    /// `exp(intercept) x^slope`.
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept.exp() * x.powf(self.slope)
    }
}

/// Fewest points accepted in a fit window.
pub const MIN_SAMPLES: usize = 8;

/// Ordinary least squares of `ln y` on `ln x` over the points with `x` in `window`.
///
/// ```
/// use mkdv_core::fit::fit_power_law;
/// let pts: Vec<(f64, f64)> = (1..=20).map(|k| (k as f64, (k as f64).powf(-0.25))).collect();
/// let f = fit_power_law(&pts, [1.0, 20.0]).unwrap();
/// assert!((f.slope + 0.25).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
/// ```
pub fn fit_power_law(samples: &[(f64, f64)], window: [f64; 2]) -> Result<FitResult> {
    if !(window[0] > 0.0 && window[1] >= window[0]) {
        return Err(Error::Fit(format!("bad window [{}, {}]", window[0], window[1])));
    }
    let inside: Vec<(f64, f64)> = samples.iter().copied().filter(|&(x, _)| x >= window[0] && x <= window[1]).collect();
    if inside.len() < MIN_SAMPLES {
        return Err(Error::Fit(format!(
            "{} samples in [{}, {}], need at least {MIN_SAMPLES}",
            inside.len(),
            window[0],
            window[1]
        )));
    }
    if let Some(&(x, y)) = inside.iter().find(|&&(x, y)| !(x > 0.0) || !(y > 0.0) || !y.is_finite()) {
        return Err(Error::Fit(format!("non-positive sample ({x}, {y})")));
    }
    let n = inside.len() as f64;
    let lx: Vec<f64> = inside.iter().map(|s| s.0.ln()).collect();
    let ly: Vec<f64> = inside.iter().map(|s| s.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all samples share one abscissa".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(FitResult { slope, intercept, r_squared, window, samples: inside.len() })
}

/// Upper envelope of an oscillating sequence: its interior local maxima, averaged
/// in `ln x` and `ln y` over logarithmic bins so every decade carries equal weight.
///
/// Samples must be ordered by `x`. Without interior maxima the points themselves
/// are binned.
pub fn binned_envelope(samples: &[(f64, f64)], bins_per_decade: f64) -> Vec<(f64, f64)> {
    let ok: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.0 > 0.0 && s.1 > 0.0 && s.1.is_finite()).collect();
    let mut peaks: Vec<(f64, f64)> = ok.windows(3).filter(|w| w[1].1 >= w[0].1 && w[1].1 >= w[2].1).map(|w| w[1]).collect();
    if peaks.is_empty() {
        peaks = ok;
    }
    let mut bins: std::collections::BTreeMap<i64, (f64, f64, f64)> = std::collections::BTreeMap::new();
    for (x, y) in peaks {
        let e = bins.entry((x.log10() * bins_per_decade).floor() as i64).or_insert((0.0, 0.0, 0.0));
        e.0 += x.ln();
        e.1 += y.ln();
        e.2 += 1.0;
    }
    bins.into_values().map(|(lx, ly, n)| ((lx / n).exp(), (ly / n).exp())).collect()
}

/// Largest `y` in each logarithmic bin of `x`; samples may come in any order.
pub fn binned_max(samples: &[(f64, f64)], bins_per_decade: f64) -> Vec<(f64, f64)> {
    let mut bins: std::collections::BTreeMap<i64, (f64, f64)> = std::collections::BTreeMap::new();
    for &(x, y) in samples.iter().filter(|s| s.0 > 0.0 && s.1 > 0.0 && s.1.is_finite()) {
        let e = bins.entry((x.log10() * bins_per_decade).floor() as i64).or_insert((x, y));
        if y > e.1 {
            *e = (x, y);
        }
    }
    bins.into_values().collect()
}

/// Power law through the per-bin maxima of a scattered cloud.
pub fn fit_binned_max(samples: &[(f64, f64)], window: [f64; 2], bins_per_decade: f64) -> Result<FitResult> {
    let inside: Vec<(f64, f64)> = samples.iter().copied().filter(|&(x, _)| x >= window[0] && x <= window[1]).collect();
    fit_power_law(&binned_max(&inside, bins_per_decade), window)
}

/// Power law through the upper envelope of an oscillating quantity.
pub fn fit_envelope(samples: &[(f64, f64)], window: [f64; 2], bins_per_decade: f64) -> Result<FitResult> {
    let inside: Vec<(f64, f64)> = samples.iter().copied().filter(|&(x, _)| x >= window[0] && x <= window[1]).collect();
    fit_power_law(&binned_envelope(&inside, bins_per_decade), window)
}
