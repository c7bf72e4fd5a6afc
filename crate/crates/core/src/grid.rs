//! Composite Gauss–Legendre grid on (0, p_max].
//!
//! One panel on (0, p_min], geometric panels up to `p_geo`, then panels of
//! bounded width up to `p_max`. Optionally the linear panels are narrowed so
//! that the phase `t p³` moves by at most a fixed amount across each one.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridSpec {
    pub p_max: f64,
    pub p_min: f64,
    pub p_geo: f64,
    /// Ratio of consecutive geometric panel edges (refined if the node count
    /// below `p_max / 100` would otherwise fall under 25%).
    pub geo_ratio: f64,
    pub linear_width: f64,
    pub order: usize,
    /// Resolve `e^{i t p³}` up to this time.
    pub resolve_time: Option<f64>,
    /// Phase per linear panel when `resolve_time` is set.
    pub panel_phase: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            p_max: 16.0,
            p_min: 1e-4,
            p_geo: 0.1,
            geo_ratio: 2.0,
            linear_width: 0.25,
            order: 12,
            resolve_time: None,
            panel_phase: 6.0,
        }
    }
}

impl GridSpec {
    pub fn with_p_max(mut self, p_max: f64) -> Self {
        self.p_max = p_max;
        self
    }

    pub fn with_resolve_time(mut self, t: f64) -> Self {
        self.resolve_time = Some(t);
        self
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_linear_width(mut self, h: f64) -> Self {
        self.linear_width = h;
        self
    }

    pub fn build(&self) -> Result<Arc<FrequencyGrid>> {
        FrequencyGrid::from_spec(self).map(Arc::new)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    /// Index of the first node of this panel.
    pub start: usize,
}

/// Reference-panel interpolation data shared by all panels of a grid.
#[derive(Debug, Clone)]
pub struct PanelBasis {
    pub nodes: Vec<f64>,
    pub bary: Vec<f64>,
    /// Nodes of the first panel with the left end (p = 0) prepended.
    pub left_nodes: Vec<f64>,
    pub left_bary: Vec<f64>,
}

impl PanelBasis {
    fn new(order: usize) -> Self {
        let r = quad::rule(order);
        let mut left_nodes = vec![-1.0];
        left_nodes.extend_from_slice(&r.nodes);
        let left_bary = quad::barycentric_weights(&left_nodes);
        PanelBasis { nodes: r.nodes.clone(), bary: r.bary.clone(), left_nodes, left_bary }
    }
}

#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub p_max: f64,
    pub order: usize,
    pub panels: Vec<Panel>,
    basis: Arc<PanelBasis>,
}

impl PartialEq for FrequencyGrid {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.weights == other.weights && self.panels == other.panels
    }
}

impl FrequencyGrid {
    pub fn from_spec(spec: &GridSpec) -> Result<Self> {
        if !(spec.p_min > 0.0 && spec.p_geo > spec.p_min && spec.p_max > spec.p_geo) {
            return Err(Error::Domain(format!(
                "grid needs 0 < p_min < p_geo < p_max, got {} {} {}",
                spec.p_min, spec.p_geo, spec.p_max
            )));
        }
        if spec.order < 2 || spec.geo_ratio <= 1.0 || spec.linear_width <= 0.0 {
            return Err(Error::Domain("grid order >= 2, ratio > 1, width > 0 required".into()));
        }
        let linear = linear_edges(spec);
        let small = spec.p_max / 100.0;
        let mut ratio = spec.geo_ratio;
        loop {
            let mut edges = vec![0.0, spec.p_min];
            let n_geo = ((spec.p_geo / spec.p_min).ln() / ratio.ln()).ceil().max(1.0) as usize;
            let r = (spec.p_geo / spec.p_min).powf(1.0 / n_geo as f64);
            for k in 1..=n_geo {
                edges.push(spec.p_min * r.powi(k as i32));
            }
            *edges.last_mut().unwrap() = spec.p_geo;
            edges.extend_from_slice(&linear[1..]);
            let grid = Self::from_edges(&edges, spec.order)?;
            let below = grid.nodes.iter().filter(|&&p| p < small).count();
            if 4 * below >= grid.nodes.len() || ratio < 1.0005 {
                return Ok(grid);
            }
            ratio = ratio.sqrt();
        }
    }

    /// Grid with the given panel edges (first edge must be 0).
    pub fn from_edges(edges: &[f64], order: usize) -> Result<Self> {
        if edges.len() < 2 || edges[0] != 0.0 || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("panel edges must start at 0 and increase".into()));
        }
        let r = quad::rule(order);
        let mut nodes = Vec::with_capacity(order * (edges.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut panels = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            panels.push(Panel { a, b, start: nodes.len() });
            let h = 0.5 * (b - a);
            for (x, wt) in r.nodes.iter().zip(&r.weights) {
                nodes.push(0.5 * (a + b) + h * x);
                weights.push(wt * h);
            }
        }
        Ok(FrequencyGrid {
            nodes,
            weights,
            p_max: *edges.last().unwrap(),
            order,
            panels,
            basis: Arc::new(PanelBasis::new(order)),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The same panel structure with every frequency multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        FrequencyGrid {
            nodes: self.nodes.iter().map(|p| p * factor).collect(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
            p_max: self.p_max * factor,
            order: self.order,
            panels: self
                .panels
                .iter()
                .map(|pn| Panel { a: pn.a * factor, b: pn.b * factor, start: pn.start })
                .collect(),
            basis: self.basis.clone(),
        }
    }

    pub fn basis(&self) -> &PanelBasis {
        &self.basis
    }

    /// Reference coordinate of `p` in panel `k`.
    pub fn local(&self, k: usize, p: f64) -> f64 {
        let pn = &self.panels[k];
        (2.0 * p - pn.a - pn.b) / (pn.b - pn.a)
    }

    /// Index of the panel containing `p` (clamped to the grid).
    pub fn panel_of(&self, p: f64) -> usize {
        let k = self.panels.partition_point(|pn| pn.b < p);
        k.min(self.panels.len() - 1)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }

    /// Sum of weights times samples.
    pub fn dot(&self, samples: &[f64]) -> f64 {
        self.weights.iter().zip(samples).map(|(w, s)| w * s).sum()
    }

    pub fn edges(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.panels.iter().map(|p| p.a).collect();
        e.push(self.p_max);
        e
    }
}

fn linear_edges(spec: &GridSpec) -> Vec<f64> {
    let mut edges = vec![spec.p_geo];
    let mut p = spec.p_geo;
    while p < spec.p_max {
        let mut h = spec.linear_width;
        if let Some(t) = spec.resolve_time {
            // phase speed of e^{i t p³} at the far end of the panel
            let q = (p + h).min(spec.p_max);
            let speed = 3.0 * t * q * q;
            if speed * h > spec.panel_phase {
                h = (spec.panel_phase / speed).max(1e-4);
            }
        }
        p += h;
        if spec.p_max - p < 0.3 * h {
            p = spec.p_max;
        }
        edges.push(p.min(spec.p_max));
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_invariants() {
        let g = GridSpec::default().build().unwrap();
        assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
        assert!(g.weights.iter().all(|&w| w > 0.0));
        let below = g.nodes.iter().filter(|&&p| p < g.p_max / 100.0).count();
        assert!(4 * below >= g.len(), "{below} of {}", g.len());
        assert_eq!(g.p_max, 16.0);
    }

    #[test]
    fn integrates_compact_bump() {
        let g = GridSpec::default().with_p_max(4.0).build().unwrap();
        let f = |p: f64| {
            let s = p / 3.0;
            if s < 1.0 { (-1.0 / (1.0 - s * s)).exp() * (1.0 + p) } else { 0.0 }
        };
        let exact: f64 = quad::composite(0.0, 3.0, 3000, 16, f);
        assert!(((g.integrate(f) - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn resolving_time_narrows_panels() {
        let g0 = GridSpec::default().with_p_max(4.0).build().unwrap();
        let g1 = GridSpec::default().with_p_max(4.0).with_resolve_time(10.0).build().unwrap();
        assert!(g1.len() > g0.len());
        let total: f64 = g1.weights.iter().sum();
        assert!((total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn panel_lookup() {
        let g = GridSpec::default().build().unwrap();
        for &p in &[1e-6, 0.05, 3.3, 16.0] {
            let k = g.panel_of(p);
            assert!(g.panels[k].a <= p && p <= g.panels[k].b);
        }
    }
}
