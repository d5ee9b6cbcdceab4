//! Schmidt decomposition and von Neumann entropy of two-photon amplitudes.
//!
//! A sampled amplitude `A(x_i, y_j)` on grids with weights `u_i`, `v_j` is
//! decomposed through the SVD of `diag(sqrt u) A diag(sqrt v)`. The singular
//! values `r_k` are normalized to `lambda_k = r_k / sqrt(sum r^2)` and the
//! singular vectors are divided by `sqrt(weights)` to give modes that are
//! orthonormal under the grid quadrature.
//!
//! The homogeneous-limit kernel `e^{-s xy}` on `[0, inf)^2` is also handled
//! through its coefficient matrix in the Laguerre function basis
//! `l_n(x) = e^{-x/2} L_n(x)`; see [`laguerre_coefficients`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cumulants::{kernel_inhomogeneous, OrderingCase, TimeQuad};
use crate::quadrature::{composite_legendre, laguerre_functions, FrequencyGrid};
use crate::spectral::BiphotonAmplitude;
use crate::{Error, Result};

/// Singular values below this fraction of the largest are dropped.
pub const RELATIVE_CUTOFF: f64 = 1e-14;

/// Default truncation order of the Laguerre expansion.
pub const DEFAULT_LAGUERRE_ORDER: usize = 40;

#[derive(Debug, Clone)]
pub struct SchmidtSpectrum {
    /// Normalized coefficients, descending, `sum lambda^2 = 1`.
    pub lambdas: Vec<f64>,
    /// Photon-1 modes as columns, sampled on `grid1`.
    pub modes1: DMatrix<Complex64>,
    /// Photon-2 modes as columns, sampled on `grid2`.
    pub modes2: DMatrix<Complex64>,
    /// Relative Frobenius error of the reconstruction from the kept modes.
    pub residual: f64,
}

impl SchmidtSpectrum {
    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.lambdas)
    }
}

/// `-sum lambda^2 ln lambda^2`, with `0 ln 0 = 0`.
pub fn entropy_of(lambdas: &[f64]) -> f64 {
    lambdas
        .iter()
        .map(|l| l * l)
        .filter(|p| *p > 0.0 && *p < 1.0)
        .fold(0.0, |acc, p| acc - p * p.ln())
}

pub fn entropy(s: &SchmidtSpectrum) -> f64 {
    s.entropy()
}

/// Drops negligible singular values and normalizes the rest.
fn normalized(singular: &[f64]) -> Vec<f64> {
    let top = singular.iter().copied().fold(0.0, f64::max);
    let kept: Vec<f64> = singular
        .iter()
        .copied()
        .filter(|s| *s > RELATIVE_CUTOFF * top)
        .collect();
    let norm = kept.iter().map(|s| s * s).sum::<f64>().sqrt();
    kept.into_iter().map(|s| s / norm).collect()
}

/// Indices that sort `values` in descending order.
fn descending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

pub fn schmidt_decompose(a: &BiphotonAmplitude) -> Result<SchmidtSpectrum> {
    a.check()?;
    if a.values.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroMatrix);
    }
    let su: Vec<f64> = a.grid1.weights().iter().map(|w| w.sqrt()).collect();
    let sv: Vec<f64> = a.grid2.weights().iter().map(|w| w.sqrt()).collect();
    let (n1, n2) = a.values.shape();
    let m = DMatrix::from_fn(n1, n2, |i, j| a.values[(i, j)] * (su[i] * sv[j]));

    let svd = m.svd(true, true);
    let u = svd.u.ok_or(Error::NonFinite)?;
    let v_t = svd.v_t.ok_or(Error::NonFinite)?;
    let singular: Vec<f64> = svd.singular_values.iter().copied().collect();
    if singular.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite);
    }
    let order = descending(&singular);
    let lambdas = normalized(&order.iter().map(|&k| singular[k]).collect::<Vec<_>>());
    let rank = lambdas.len();

    let modes1 = DMatrix::from_fn(n1, rank, |i, k| u[(i, order[k])] / su[i]);
    let modes2 = DMatrix::from_fn(n2, rank, |j, k| v_t[(order[k], j)] / sv[j]);

    let mut recon = DMatrix::<Complex64>::zeros(n1, n2);
    for k in 0..rank {
        let r = singular[order[k]];
        for j in 0..n2 {
            let b = modes2[(j, k)] * r;
            for i in 0..n1 {
                recon[(i, j)] += modes1[(i, k)] * b;
            }
        }
    }
    let residual = (&recon - &a.values).norm() / a.values.norm();

    Ok(SchmidtSpectrum {
        lambdas,
        modes1,
        modes2,
        residual,
    })
}

/// Entropy `ln n` of a rank-`n` identity (discretized delta) kernel. It grows
/// without bound as the basis is refined.
pub fn delta_kernel_entropy(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be >= 1"));
    }
    Ok((n as f64).ln())
}

/// Coefficients `c[n][m] = int int e^{-s xy} l_n(x) l_m(y) dx dy` of the
/// homogeneous kernel in the Laguerre function basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreCoeffs {
    pub sigma12_sq: f64,
    pub order: usize,
    pub matrix: DMatrix<f64>,
}

/// Resolution of the outer radial quadrature used by [`laguerre_coefficients`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialQuadrature {
    pub panels_per_decade: usize,
    pub points_per_panel: usize,
}

impl Default for RadialQuadrature {
    fn default() -> Self {
        Self {
            panels_per_decade: 16,
            points_per_panel: 24,
        }
    }
}

/// Laguerre coefficient matrix of `e^{-sigma12_sq x y}`, truncated at `order`.
///
/// The inner integral is done in closed form: the Laplace transform of
/// `l_m` at `p = s x` is `(p - 1/2)^m / (p + 1/2)^(m+1)`. The remaining
/// radial integral is smooth but varies on the scale `1/s` near the origin,
/// so it is integrated with geometrically graded Gauss-Legendre panels.
pub fn laguerre_coefficients(sigma12_sq: f64, order: usize) -> Result<LaguerreCoeffs> {
    laguerre_coefficients_with(sigma12_sq, order, RadialQuadrature::default())
}

pub fn laguerre_coefficients_with(sigma12_sq: f64, order: usize, quad: RadialQuadrature) -> Result<LaguerreCoeffs> {
    if order < 2 {
        return Err(Error::invalid("order", format!("must be >= 2, got {order}")));
    }
    if !(sigma12_sq.is_finite() && sigma12_sq >= 0.0) {
        return Err(Error::invalid("sigma12_sq", format!("must be >= 0, got {sigma12_sq}")));
    }
    if quad.panels_per_decade == 0 || quad.points_per_panel == 0 {
        return Err(Error::invalid("quadrature", "panel counts must be positive"));
    }
    let s = sigma12_sq;
    // l_n(x) is below 1e-30 past 10 n + 100 for the orders in use.
    let x_hi = 10.0 * order as f64 + 100.0;
    let x_lo = if s > 1.0 { 1e-3 / s } else { 1e-3 };
    let decades = (x_hi / x_lo).log10();
    let panels = (decades * quad.panels_per_decade as f64).ceil() as usize;
    let mut breaks = Vec::with_capacity(panels + 2);
    breaks.push(0.0);
    for p in 0..=panels {
        breaks.push(x_lo * (x_hi / x_lo).powf(p as f64 / panels as f64));
    }
    let (nodes, weights) = composite_legendre(&breaks, quad.points_per_panel);

    let mut c = DMatrix::<f64>::zeros(order, order);
    for (&x, &w) in nodes.iter().zip(&weights) {
        let ell = laguerre_functions(order, x);
        let p = s * x;
        let base = 1.0 / (p + 0.5);
        let ratio = (p - 0.5) * base;
        let mut lam = base;
        for m in 0..order {
            let wl = w * lam;
            for n in 0..order {
                c[(n, m)] += ell[n] * wl;
            }
            lam *= ratio;
        }
    }
    Ok(LaguerreCoeffs {
        sigma12_sq,
        order,
        matrix: c,
    })
}

/// Leading Schmidt pairs of the Laguerre expansion.
#[derive(Debug, Clone)]
pub struct LaguerreSchmidt {
    pub lambdas: Vec<f64>,
    /// Expansion coefficients of the photon-1 modes, one column per mode.
    pub left: DMatrix<f64>,
    /// Expansion coefficients of the photon-2 modes.
    pub right: DMatrix<f64>,
    /// Relative Frobenius error of rebuilding `c` from the kept pairs.
    pub residual: f64,
}

impl LaguerreSchmidt {
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.lambdas)
    }

    /// Samples mode `k` of photon 1 (`left`) or photon 2 at `x`.
    pub fn mode_value(&self, k: usize, photon_two: bool, x: f64) -> f64 {
        let coeffs = if photon_two { &self.right } else { &self.left };
        let ell = laguerre_functions(coeffs.nrows(), x);
        (0..coeffs.nrows()).map(|n| coeffs[(n, k)] * ell[n]).sum()
    }
}

impl LaguerreCoeffs {
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.matrix.amax().max(f64::MIN_POSITIVE);
        (&self.matrix - self.matrix.transpose()).amax() <= tol * scale
    }

    /// SVD of `c`; equivalently the eigen-decomposition of `c c^T`.
    pub fn schmidt(&self) -> Result<LaguerreSchmidt> {
        if self.matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if self.matrix.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroMatrix);
        }
        let svd = self.matrix.clone().svd(true, true);
        let u = svd.u.ok_or(Error::NonFinite)?;
        let v_t = svd.v_t.ok_or(Error::NonFinite)?;
        let singular: Vec<f64> = svd.singular_values.iter().copied().collect();
        let order = descending(&singular);
        let lambdas = normalized(&order.iter().map(|&k| singular[k]).collect::<Vec<_>>());
        let n = self.order;
        let rank = lambdas.len();
        let left = DMatrix::from_fn(n, rank, |i, k| u[(i, order[k])]);
        let right = DMatrix::from_fn(n, rank, |j, k| v_t[(order[k], j)]);
        let mut recon = DMatrix::<f64>::zeros(n, n);
        for k in 0..rank {
            let r = singular[order[k]];
            for j in 0..n {
                for i in 0..n {
                    recon[(i, j)] += left[(i, k)] * r * right[(j, k)];
                }
            }
        }
        let residual = (&recon - &self.matrix).norm() / self.matrix.norm();
        Ok(LaguerreSchmidt {
            lambdas,
            left,
            right,
            residual,
        })
    }
}

/// Entropy of the homogeneous kernel through its Laguerre expansion.
pub fn kernel_entropy(sigma12_sq: f64, order: usize) -> Result<f64> {
    Ok(laguerre_coefficients(sigma12_sq, order)?.schmidt()?.entropy())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub sigma12_sq: f64,
    pub entropy: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyScan {
    pub order: usize,
    pub points: Vec<ScanPoint>,
    /// Index into `points` of the largest entropy.
    pub argmax: usize,
}

impl EntropyScan {
    pub fn peak(&self) -> ScanPoint {
        self.points[self.argmax]
    }

    /// Number of strict interior local maxima of the sampled curve.
    pub fn interior_maxima(&self) -> usize {
        self.points
            .windows(3)
            .filter(|w| w[1].entropy > w[0].entropy && w[1].entropy > w[2].entropy)
            .count()
    }
}

/// Pointwise [`kernel_entropy`] over `sigmas`, evaluated in parallel.
pub fn entropy_scan(sigmas: &[f64], order: usize) -> Result<EntropyScan> {
    if sigmas.is_empty() {
        return Err(Error::Empty("sigma12_sq scan"));
    }
    let points = sigmas
        .par_iter()
        .map(|&s| {
            let sch = laguerre_coefficients(s, order)?.schmidt()?;
            Ok(ScanPoint {
                sigma12_sq: s,
                entropy: sch.entropy(),
                residual: sch.residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let argmax = (0..points.len())
        .max_by(|&a, &b| points[a].entropy.total_cmp(&points[b].entropy).then(b.cmp(&a)))
        .unwrap_or(0);
    Ok(EntropyScan { order, points, argmax })
}

/// `count` geometrically spaced values from `from` to `to` inclusive.
pub fn geometric_grid(from: f64, to: f64, count: usize) -> Result<Vec<f64>> {
    if !(from > 0.0 && to > from && from.is_finite() && to.is_finite()) {
        return Err(Error::invalid(
            "geometric grid",
            format!("need 0 < from < to, got [{from}, {to}]"),
        ));
    }
    if count < 2 {
        return Err(Error::invalid("count", "need at least two points"));
    }
    let ratio = (to / from).ln();
    Ok((0..count)
        .map(|i| from * (ratio * i as f64 / (count - 1) as f64).exp())
        .collect())
}

/// The homogeneous kernel sampled on a grid, for decomposition by
/// [`schmidt_decompose`] (the Nystrom route).
pub fn homogeneous_kernel_amplitude(sigma12_sq: f64, grid: &FrequencyGrid) -> BiphotonAmplitude {
    BiphotonAmplitude::from_fn(grid.clone(), grid.clone(), |x, y| {
        Complex64::new((-sigma12_sq * x * y).exp(), 0.0)
    })
}

/// Fast-fluctuation kernel of one ordering case on an `n x n` grid of
/// elapsed times `(t1 - t1', t2 - t2')`.
///
/// For the staggered cases the two inner times are held fixed and the
/// elapsed times move the outer ones; for the nested cases the inner
/// photon's emission time and the outer photon's emission time are fixed.
/// Every grid point satisfies the case's ordering.
pub fn inhomogeneous_kernel_amplitude(gamma12: f64, case: OrderingCase, n: usize) -> Result<BiphotonAmplitude> {
    let (xr, yr): ((f64, f64), (f64, f64));
    let quad: fn(f64, f64) -> TimeQuad;
    match case {
        OrderingCase::B => {
            // t1' = 1, t2 = 1.5
            xr = (0.6, 1.6);
            yr = (0.6, 1.4);
            quad = |x, y| TimeQuad {
                t1: 1.0 + x,
                t1p: 1.0,
                t2: 1.5,
                t2p: 1.5 - y,
            };
        }
        OrderingCase::E => {
            xr = (0.6, 1.4);
            yr = (0.6, 1.6);
            quad = |x, y| TimeQuad {
                t1: 1.5,
                t1p: 1.5 - x,
                t2: 1.0 + y,
                t2p: 1.0,
            };
        }
        OrderingCase::C => {
            // t1' = 0, t2' = 1
            xr = (2.1, 3.1);
            yr = (0.05, 1.0);
            quad = |x, y| TimeQuad {
                t1: x,
                t1p: 0.0,
                t2: 1.0 + y,
                t2p: 1.0,
            };
        }
        OrderingCase::D => {
            xr = (0.05, 1.0);
            yr = (2.1, 3.1);
            quad = |x, y| TimeQuad {
                t1: 1.0 + x,
                t1p: 1.0,
                t2: y,
                t2p: 0.0,
            };
        }
        OrderingCase::A | OrderingCase::F => {
            return Err(Error::OrderingViolation {
                case: case.label(),
                detail: "disjoint windows have no surviving fast-fluctuation kernel".into(),
            })
        }
    }
    let g1 = FrequencyGrid::midpoint(n, xr.0, xr.1)?;
    let g2 = FrequencyGrid::midpoint(n, yr.0, yr.1)?;
    let mut values = DMatrix::<Complex64>::zeros(n, n);
    for (i, &x) in g1.points().iter().enumerate() {
        for (j, &y) in g2.points().iter().enumerate() {
            values[(i, j)] = kernel_inhomogeneous(gamma12, case, &quad(x, y))?.into();
        }
    }
    BiphotonAmplitude::new(g1, g2, values)
}
