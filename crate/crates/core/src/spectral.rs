//! Frequency-domain single- and two-photon scattering amplitudes.
//!
//! A single photon crossing the resonant medium picks up the transmission
//! factor `z = exp[-i b / ((omega0 - omega) + i gamma)]`. Coupling the two
//! photons with `xi e^{i phi}` at every order gives the geometric series
//! `z1 z2 sum_n q^n` with `q = xi e^{i phi} z1 z2`, summed in closed form by
//! [`biphoton_closed`] and term by term by [`biphoton_series`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quadrature::FrequencyGrid;
use crate::{Error, Result};

/// Hard cap on the number of terms of any phase-averaged series.
pub const MAX_SERIES_TERMS: usize = 1_000_000;

/// Resonance of the single-photon response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralParams {
    pub omega0: f64,
    /// Coupling strength, `alpha L gamma / 2` for optical thickness `alpha L`.
    pub b: f64,
    pub gamma: f64,
}

impl SpectralParams {
    pub fn new(omega0: f64, b: f64, gamma: f64) -> Result<Self> {
        let p = Self { omega0, b, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega0.is_finite() {
            return Err(Error::invalid("omega0", "must be finite"));
        }
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::invalid("b", format!("must be >= 0, got {}", self.b)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid("gamma", format!("must be > 0, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Default analysis window `[omega0 - 4 gamma, omega0 + 4 gamma]`.
    pub fn default_window(&self) -> (f64, f64) {
        (self.omega0 - 4.0 * self.gamma, self.omega0 + 4.0 * self.gamma)
    }
}

/// Distribution of the interaction phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseModel {
    Fixed { phi: f64 },
    Uniform,
    Gaussian { sigma: f64 },
}

/// Entanglement parameter plus the phase model of the coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingModel {
    pub xi: f64,
    pub phase: PhaseModel,
}

impl CouplingModel {
    pub fn fixed(xi: f64, phi: f64) -> Self {
        Self {
            xi,
            phase: PhaseModel::Fixed { phi },
        }
    }

    pub fn uniform(xi: f64) -> Self {
        Self {
            xi,
            phase: PhaseModel::Uniform,
        }
    }

    pub fn gaussian(xi: f64, sigma: f64) -> Self {
        Self {
            xi,
            phase: PhaseModel::Gaussian { sigma },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi.is_finite() && self.xi >= 0.0) {
            return Err(Error::invalid("xi", format!("must be >= 0, got {}", self.xi)));
        }
        match self.phase {
            PhaseModel::Fixed { phi } if !phi.is_finite() => Err(Error::invalid("phi", "must be finite")),
            PhaseModel::Gaussian { sigma } if !(sigma.is_finite() && sigma >= 0.0) => {
                Err(Error::invalid("sigma", format!("must be >= 0, got {sigma}")))
            }
            _ => Ok(()),
        }
    }
}

/// Sampled two-photon amplitude, `values[(i, j)]` at `(grid1[i], grid2[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiphotonAmplitude {
    pub grid1: FrequencyGrid,
    pub grid2: FrequencyGrid,
    pub values: DMatrix<Complex64>,
}

impl BiphotonAmplitude {
    pub fn new(grid1: FrequencyGrid, grid2: FrequencyGrid, values: DMatrix<Complex64>) -> Result<Self> {
        let a = Self { grid1, grid2, values };
        a.check()?;
        Ok(a)
    }

    /// Samples `f` on the product grid.
    pub fn from_fn<F>(grid1: FrequencyGrid, grid2: FrequencyGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let values = DMatrix::from_fn(grid1.len(), grid2.len(), |i, j| f(grid1.points()[i], grid2.points()[j]));
        Self { grid1, grid2, values }
    }

    /// Shape and finiteness check.
    pub fn check(&self) -> Result<()> {
        let (rows, cols) = self.values.shape();
        if rows != self.grid1.len() || cols != self.grid2.len() {
            return Err(Error::GridMismatch {
                rows,
                cols,
                n1: self.grid1.len(),
                n2: self.grid2.len(),
            });
        }
        if self.values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// Swaps the roles of the two photons.
    pub fn transposed(&self) -> Self {
        Self {
            grid1: self.grid2.clone(),
            grid2: self.grid1.clone(),
            values: self.values.transpose(),
        }
    }
}

/// `exp[-i b / ((omega0 - omega) + i gamma)]`.
pub fn single_photon_amplitude(p: &SpectralParams, omega: f64) -> Complex64 {
    let denom = Complex64::new(p.omega0 - omega, p.gamma);
    (Complex64::new(0.0, -p.b) / denom).exp()
}

fn pair_product(p1: &SpectralParams, p2: &SpectralParams, omega1: f64, omega2: f64) -> Complex64 {
    single_photon_amplitude(p1, omega1) * single_photon_amplitude(p2, omega2)
}

/// Resummed amplitude `z1 z2 / (1 - q)` for a fixed interaction phase.
pub fn biphoton_closed(
    p1: &SpectralParams,
    p2: &SpectralParams,
    xi: f64,
    phi: f64,
    omega1: f64,
    omega2: f64,
) -> Result<Complex64> {
    let zz = pair_product(p1, p2, omega1, omega2);
    let q = Complex64::from_polar(xi, phi) * zz;
    let q_abs = q.norm();
    if q_abs.is_nan() || q_abs >= 1.0 {
        return Err(Error::DivergentSeries { q_abs });
    }
    Ok(zz / (Complex64::new(1.0, 0.0) - q))
}

/// Partial sum `z1 z2 sum_{n < n_terms} q^n` of the unsummed series.
pub fn biphoton_series(
    p1: &SpectralParams,
    p2: &SpectralParams,
    xi: f64,
    phi: f64,
    omega1: f64,
    omega2: f64,
    n_terms: usize,
) -> Result<Complex64> {
    if n_terms == 0 {
        return Err(Error::invalid("n_terms", "need at least one term"));
    }
    let zz = pair_product(p1, p2, omega1, omega2);
    let q = Complex64::from_polar(xi, phi) * zz;
    let mut term = zz;
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..n_terms {
        sum += term;
        term *= q;
    }
    Ok(sum)
}

/// Amplitude averaged over the interaction phase.
///
/// A uniform phase kills every `n >= 1` term, leaving `z1 z2` exactly. A
/// Gaussian phase of width `sigma` damps the `n`-th term by
/// `e^{-n^2 sigma^2 / 2}`; the series is summed until the next term is
/// smaller than `tol`.
pub fn biphoton_phase_averaged(
    p1: &SpectralParams,
    p2: &SpectralParams,
    coupling: &CouplingModel,
    omega1: f64,
    omega2: f64,
    tol: f64,
) -> Result<Complex64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    match coupling.phase {
        PhaseModel::Fixed { phi } => biphoton_closed(p1, p2, coupling.xi, phi, omega1, omega2),
        PhaseModel::Uniform => Ok(pair_product(p1, p2, omega1, omega2)),
        PhaseModel::Gaussian { sigma } => {
            gaussian_phase_series(pair_product(p1, p2, omega1, omega2), coupling.xi, sigma, tol)
        }
    }
}

fn gaussian_phase_series(zz: Complex64, xi: f64, sigma: f64, tol: f64) -> Result<Complex64> {
    let half_var = 0.5 * sigma * sigma;
    let mut power = zz; // (z1 z2)^{n+1}
    let mut xi_n = 1.0;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..MAX_SERIES_TERMS {
        let nf = n as f64;
        sum += power * (xi_n * (-nf * nf * half_var).exp());

        power *= zz;
        xi_n *= xi;
        let next = nf + 1.0;
        let next_mag = xi_n * (-next * next * half_var).exp() * power.norm();
        if next_mag < tol {
            return Ok(sum);
        }
        if !next_mag.is_finite() {
            break;
        }
    }
    Err(Error::NonConvergence {
        terms: MAX_SERIES_TERMS,
    })
}

/// Evaluates the phase-averaged amplitude times `input_amp` on a product grid.
///
/// Entries are computed independently (in parallel), so the result does not
/// depend on scheduling.
pub fn amplitude_map<F>(
    p1: &SpectralParams,
    p2: &SpectralParams,
    coupling: &CouplingModel,
    grid1: &FrequencyGrid,
    grid2: &FrequencyGrid,
    input_amp: F,
    tol: f64,
) -> Result<BiphotonAmplitude>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    p1.validate()?;
    p2.validate()?;
    coupling.validate()?;
    let (n1, n2) = (grid1.len(), grid2.len());
    let rows: Vec<Vec<Complex64>> = grid1
        .points()
        .par_iter()
        .map(|&w1| {
            grid2
                .points()
                .iter()
                .map(|&w2| {
                    biphoton_phase_averaged(p1, p2, coupling, w1, w2, tol)
                        .map(|s| s * input_amp(w1, w2))
                        .map_err(|e| Error::AtGridPoint {
                            omega1: w1,
                            omega2: w2,
                            source: Box::new(e),
                        })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let values = DMatrix::from_fn(n1, n2, |i, j| rows[i][j]);
    BiphotonAmplitude::new(grid1.clone(), grid2.clone(), values)
}
