//! Gauss–Legendre panels and the small amount of polynomial machinery built on them.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on [-1, 1], ascending.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Barycentric weights of the nodes (second kind formula).
    pub bary: Vec<f64>,
}

impl Rule {
    fn new(n: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(n).expect("rule order must be positive"));
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let weights = pairs.iter().map(|p| p.1).collect();
        let bary = barycentric_weights(&nodes);
        Rule { nodes, weights, bary }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over [a, b].
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + h * x) * (w * h);
        }
        acc
    }
}

/// Cached Gauss–Legendre rule of order `n`.
pub fn rule(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("rule cache poisoned");
    map.entry(n).or_insert_with(|| Arc::new(Rule::new(n))).clone()
}

pub fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] /= x[j] - x[k];
            }
        }
    }
    // rescale to avoid overflow for high orders; the formula is invariant
    let m = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    w.iter().map(|v| v / m).collect()
}

/// Composite integral of `f` over [a, b] split into `panels` equal pieces.
pub fn composite<T, F>(a: f64, b: f64, panels: usize, order: usize, mut f: F) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: FnMut(f64) -> T,
{
    let r = rule(order);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut acc = T::default();
    for k in 0..panels {
        let lo = a + h * k as f64;
        acc = acc + r.integrate(lo, lo + h, &mut f);
    }
    acc
}

/// Integrate over [a, b] with extra breakpoints, using `panels_for(lo, hi)` panels per piece.
pub fn piecewise<T, F, P>(breaks: &[f64], order: usize, mut panels_for: P, mut f: F) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: FnMut(f64) -> T,
    P: FnMut(f64, f64) -> usize,
{
    let mut acc = T::default();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi > lo {
            acc = acc + composite(lo, hi, panels_for(lo, hi), order, &mut f);
        }
    }
    acc
}

/// Sorted, de-duplicated breakpoints restricted to [lo, hi] (endpoints included).
pub fn breakpoints(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut b = vec![lo, hi];
    let tol = 1e-13 * (hi - lo).abs().max(1.0);
    for &e in extra {
        if e > lo + tol && e < hi - tol {
            b.push(e);
        }
    }
    b.sort_by(|x, y| x.total_cmp(y));
    b.dedup_by(|x, y| (*x - *y).abs() <= tol);
    b
}

/// Evaluate the interpolating polynomial through `(x, f)` at `t` (barycentric, second kind).
pub fn bary_eval<T>(x: &[f64], w: &[f64], f: &[T], t: f64) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Div<f64, Output = T> + Default,
{
    let mut num = T::default();
    let mut den = 0.0;
    for j in 0..x.len() {
        let d = t - x[j];
        if d == 0.0 {
            return f[j];
        }
        let c = w[j] / d;
        num = num + f[j] * c;
        den += c;
    }
    num / den
}

/// Derivative of the interpolating polynomial at `t`.
pub fn bary_deriv<T>(x: &[f64], w: &[f64], f: &[T], t: f64) -> T
where
    T: Copy
        + std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>
        + std::ops::Div<f64, Output = T>
        + Default,
{
    if let Some(i) = x.iter().position(|&xi| xi == t) {
        let mut acc = T::default();
        for j in 0..x.len() {
            if j != i {
                acc = acc + (f[j] - f[i]) * (w[j] / w[i] / (x[i] - x[j]));
            }
        }
        return acc;
    }
    let p = bary_eval(x, w, f, t);
    let mut num = T::default();
    let mut den = 0.0;
    for j in 0..x.len() {
        let d = t - x[j];
        let c = w[j] / d;
        num = num + (p - f[j]) * (c / d);
        den += c;
    }
    num / den
}

/// Nodal values of the derivative of the interpolating polynomial.
pub fn differentiate_nodal<T>(x: &[f64], w: &[f64], f: &[T]) -> Vec<T>
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    (0..x.len())
        .map(|i| {
            let mut acc = T::default();
            for j in 0..x.len() {
                if j != i {
                    acc = acc + (f[j] - f[i]) * (w[j] / w[i] / (x[i] - x[j]));
                }
            }
            acc
        })
        .collect()
}

/// Weights of the derivative of order `k` at `z` from values at `x` (Fornberg).
pub fn fd_weights(z: f64, x: &[f64], k: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; k + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(k);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for s in (1..=mn).rev() {
                    c[i][s] = c1 * (s as f64 * c[i - 1][s - 1] - c5 * c[i - 1][s]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for s in (1..=mn).rev() {
                c[j][s] = (c4 * c[j][s] - s as f64 * c[j][s - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[k]).collect()
}

/// Matrix `S[i][j] = ∫_{-1}^{x_i} ℓ_j(s) ds` for the Lagrange basis on the rule's nodes.
pub fn cumulative_matrix(order: usize) -> Arc<Vec<Vec<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Vec<f64>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().expect("matrix cache poisoned").get(&order) {
        return m.clone();
    }
    let r = rule(order);
    let fine = rule(order);
    let mut s = vec![vec![0.0; order]; order];
    let mut basis = vec![0.0; order];
    for i in 0..order {
        let (a, b) = (-1.0, r.nodes[i]);
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        for (xq, wq) in fine.nodes.iter().zip(&fine.weights) {
            let t = c + h * xq;
            for j in 0..order {
                basis.iter_mut().for_each(|v| *v = 0.0);
                basis[j] = 1.0;
                s[i][j] += wq * h * bary_eval(&r.nodes, &r.bary, &basis, t);
            }
        }
    }
    let m = Arc::new(s);
    cache.lock().expect("matrix cache poisoned").insert(order, m.clone());
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials() {
        let r = rule(8);
        let v: f64 = r.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
    }

    #[test]
    fn composite_handles_oscillation() {
        let v: f64 = composite(0.0, 100.0, 40, 16, |x| (3.0 * x).cos());
        assert!((v - (300f64).sin() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn barycentric_reproduces_polynomial_and_derivative() {
        let r = rule(10);
        let f: Vec<f64> = r.nodes.iter().map(|x| x.powi(7) - 2.0 * x).collect();
        let t = 0.3137;
        assert!((bary_eval(&r.nodes, &r.bary, &f, t) - (t.powi(7) - 2.0 * t)).abs() < 1e-13);
        assert!((bary_deriv(&r.nodes, &r.bary, &f, t) - (7.0 * t.powi(6) - 2.0)).abs() < 1e-12);
        let x0 = r.nodes[3];
        assert!((bary_deriv(&r.nodes, &r.bary, &f, x0) - (7.0 * x0.powi(6) - 2.0)).abs() < 1e-11);
    }

    #[test]
    fn cumulative_matrix_integrates_cubic() {
        let r = rule(6);
        let s = cumulative_matrix(6);
        let f: Vec<f64> = r.nodes.iter().map(|x| 3.0 * x * x).collect();
        for i in 0..6 {
            let v: f64 = (0..6).map(|j| s[i][j] * f[j]).sum();
            assert!((v - (r.nodes[i].powi(3) + 1.0)).abs() < 1e-13);
        }
    }
}
