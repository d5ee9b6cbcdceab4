//! Quadrature grids and the Laguerre function basis.
//!
//! Nodes of both Gauss rules come from the Golub-Welsch eigenvalue problem
//! and are then polished by Newton iteration on the three-term recurrence.
//! Weights are taken from the closed-form expressions at the polished nodes
//! rather than from eigenvector components, which keeps tiny Laguerre
//! weights accurate in a relative sense.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ordered sample points with positive quadrature weights.
///
/// Used for frequency axes and for time-difference axes alike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("grid"));
        }
        if points.len() != weights.len() {
            return Err(Error::invalid(
                "weights",
                format!("{} weights for {} points", weights.len(), points.len()),
            ));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("points", "non-finite grid point"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("points", "grid points must be strictly increasing"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("weights", "weights must be positive and finite"));
        }
        Ok(Self { points, weights })
    }

    /// `n`-point Gauss-Legendre rule mapped onto `[lo, hi]`.
    pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "need at least one node"));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::invalid(
                "window",
                format!("[{lo}, {hi}] is not a valid interval"),
            ));
        }
        let (x, w) = gauss_legendre_rule(n);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        Self::new(
            x.iter().map(|x| mid + half * x).collect(),
            w.iter().map(|w| half * w).collect(),
        )
    }

    /// `n`-point midpoint rule on `[lo, hi]`.
    pub fn midpoint(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "need at least one node"));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::invalid(
                "window",
                format!("[{lo}, {hi}] is not a valid interval"),
            ));
        }
        let h = (hi - lo) / n as f64;
        Self::new((0..n).map(|i| lo + (i as f64 + 0.5) * h).collect(), vec![h; n])
    }

    /// Points `0, 1, ..., n-1` with unit weights (a plain matrix index).
    pub fn unit(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i as f64).collect(), vec![1.0; n])
    }

    /// Gauss-Laguerre nodes on `[0, inf)` with weights rescaled by `e^x`, so
    /// that `sum w_i f(x_i)` approximates `int_0^inf f(x) dx` for
    /// functions decaying like `e^{-x}`.
    pub fn gauss_laguerre(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "need at least one node"));
        }
        let rule = GaussLaguerre::new(n);
        Self::new(rule.nodes, rule.scaled_weights)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sum of the weights; equals the window length for the bounded rules.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);

    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = legendre_with_derivative(n, *x);
            *x -= p / dp;
        }
        let (_, dp) = legendre_with_derivative(n, *x);
        weights.push(2.0 / ((1.0 - *x * *x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Laguerre rule for the weight `e^{-x}` on `[0, inf)`.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    /// Classical weights `w_i`, integrating `f(x) e^{-x}`.
    pub weights: Vec<f64>,
    /// `w_i e^{x_i}`, integrating `f(x)` directly.
    pub scaled_weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0);
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0 * i as f64 + 1.0
            } else if i + 1 == j || j + 1 == i {
                i.max(j) as f64
            } else {
                0.0
            }
        });
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        nodes.sort_by(f64::total_cmp);

        let mut weights = Vec::with_capacity(n);
        let mut scaled_weights = Vec::with_capacity(n);
        for x in nodes.iter_mut() {
            // Newton on the Laguerre function; it shares its zeros with L_n.
            for _ in 0..3 {
                let f = laguerre_functions(n + 1, *x);
                let deriv = n as f64 * (f[n] - f[n - 1]) / *x;
                *x -= f[n] / deriv;
            }
            let f = laguerre_functions(n + 2, *x);
            let np1 = (n + 1) as f64;
            let scaled = *x / (np1 * np1 * f[n + 1] * f[n + 1]);
            scaled_weights.push(scaled);
            weights.push(scaled * (-*x).exp());
        }
        Self {
            nodes,
            weights,
            scaled_weights,
        }
    }
}

/// Orthonormal Laguerre functions `e^{-x/2} L_k(x)` for `k < count`.
pub fn laguerre_functions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let l0 = (-0.5 * x).exp();
    out.push(l0);
    if count == 1 {
        return out;
    }
    out.push((1.0 - x) * l0);
    for k in 1..count - 1 {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Plain Laguerre polynomials `L_k(x)` for `k < count`.
pub fn laguerre_polynomials(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(1.0);
    if count == 1 {
        return out;
    }
    out.push(1.0 - x);
    for k in 1..count - 1 {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Composite Gauss-Legendre rule on the given breakpoints.
pub(crate) fn composite_legendre(breaks: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre_rule(order);
    let mut nodes = Vec::with_capacity((breaks.len() - 1) * order);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for pair in breaks.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[1] + pair[0]);
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + half * xi);
            weights.push(half * wi);
        }
    }
    (nodes, weights)
}
