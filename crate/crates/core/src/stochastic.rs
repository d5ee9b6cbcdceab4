//! Monte Carlo sampling of correlated Ornstein-Uhlenbeck frequency noise.
//!
//! The two frequency offsets are built from three independent unit OU
//! processes with a shared correlation time,
//! `d1 = a x3 + b x1` and `d2 = c x3 + d x2`, where `a c = sigma12^2`,
//! `a^2 + b^2 = sigma1^2` and `c^2 + d^2 = sigma2^2`. Each process is
//! advanced with its exact discrete update and started from the stationary
//! law, so the sampled correlators are exact on the time grid. Phases are
//! trapezoid integrals of the piecewise-linear offsets.
//!
//! Trajectory `i` draws from its own ChaCha stream, so estimates do not
//! depend on the thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cumulants::{g_cross, g_single, KuboParams, Mode, TimeQuad};
use crate::{Error, Result};

/// Trajectories handled per work unit.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub params: KuboParams,
    pub dt: f64,
    /// Latest time any query may ask for.
    pub horizon: f64,
    pub n_traj: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let k = &self.params;
        let tol = 1e-12 * k.tau12;
        if (k.tau1 - k.tau12).abs() > tol || (k.tau2 - k.tau12).abs() > tol {
            return Err(Error::TimescaleMismatch {
                tau1: k.tau1,
                tau2: k.tau2,
                tau12: k.tau12,
            });
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if self.dt > k.tau12 / 20.0 * (1.0 + 1e-12) {
            return Err(Error::invalid(
                "dt",
                format!("must be <= tau / 20 = {}, got {}", k.tau12 / 20.0, self.dt),
            ));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::invalid("horizon", format!("must be > 0, got {}", self.horizon)));
        }
        if self.n_traj == 0 {
            return Err(Error::invalid("n_traj", "need at least one trajectory"));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid("time", format!("must be finite and >= 0, got {t}")));
        }
        if t > self.horizon {
            return Err(Error::HorizonExceeded {
                time: t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// Mixing coefficients `(a, b, c, d)`.
    fn mixing(&self) -> (f64, f64, f64, f64) {
        let k = &self.params;
        let s = k.sigma12_sq;
        if k.sigma1 == 0.0 || k.sigma2 == 0.0 {
            return (0.0, k.sigma1, 0.0, k.sigma2);
        }
        let a = (s.abs() * k.sigma1 / k.sigma2).sqrt();
        let c = s.signum() * (s.abs() * k.sigma2 / k.sigma1).sqrt();
        let b = (k.sigma1 * k.sigma1 - a * a).max(0.0).sqrt();
        let d = (k.sigma2 * k.sigma2 - c * c).max(0.0).sqrt();
        (a, b, c, d)
    }
}

/// One realization of both frequency offsets on `t_k = k dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub delta1: Vec<f64>,
    pub delta2: Vec<f64>,
    /// Running trapezoid integrals of `delta1`, `delta2` from 0.
    pub phase1: Vec<f64>,
    pub phase2: Vec<f64>,
}

impl Trajectory {
    /// Accumulated phase `int_0^t delta_j` with `delta_j` linear between
    /// grid points.
    pub fn phase_at(&self, mode: Mode, t: f64) -> f64 {
        let (delta, phase) = match mode {
            Mode::One => (&self.delta1, &self.phase1),
            Mode::Two => (&self.delta2, &self.phase2),
        };
        let last = delta.len() - 2;
        let k = ((t / self.dt).floor() as usize).min(last);
        let h = t - k as f64 * self.dt;
        let slope = (delta[k + 1] - delta[k]) / self.dt;
        phase[k] + delta[k] * h + 0.5 * slope * h * h
    }

    pub fn phase_between(&self, mode: Mode, t: f64, tp: f64) -> f64 {
        self.phase_at(mode, t) - self.phase_at(mode, tp)
    }
}

/// Draws trajectory `index` of the ensemble defined by `cfg`.
pub fn sample_trajectory(cfg: &McConfig, index: u64) -> Result<Trajectory> {
    cfg.validate()?;
    let mut out = Trajectory {
        dt: cfg.dt,
        delta1: Vec::new(),
        delta2: Vec::new(),
        phase1: Vec::new(),
        phase2: Vec::new(),
    };
    fill_trajectory(cfg, index, &mut out);
    Ok(out)
}

fn fill_trajectory(cfg: &McConfig, index: u64, out: &mut Trajectory) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let n = cfg.n_steps() + 1;
    let (a, b, c, d) = cfg.mixing();
    let rho = (-cfg.dt / cfg.params.tau12).exp();
    let kick = (-(2.0 * cfg.dt / cfg.params.tau12)).exp_m1().abs().sqrt();

    out.dt = cfg.dt;
    for v in [&mut out.delta1, &mut out.delta2, &mut out.phase1, &mut out.phase2] {
        v.clear();
        v.reserve(n);
    }
    let mut x: [f64; 3] = [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ];
    let half = 0.5 * cfg.dt;
    for k in 0..n {
        if k > 0 {
            for xi in &mut x {
                let z: f64 = rng.sample(StandardNormal);
                *xi = rho * *xi + kick * z;
            }
        }
        let d1 = a * x[2] + b * x[0];
        let d2 = c * x[2] + d * x[1];
        let (p1, p2) = match k {
            0 => (0.0, 0.0),
            _ => (
                out.phase1[k - 1] + half * (out.delta1[k - 1] + d1),
                out.phase2[k - 1] + half * (out.delta2[k - 1] + d2),
            ),
        };
        out.delta1.push(d1);
        out.delta2.push(d2);
        out.phase1.push(p1);
        out.phase2.push(p2);
    }
}

/// A dephasing factor to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Query {
    /// `<exp(i int_{tp}^{t} delta_j)>`.
    Single { mode: Mode, t: f64, tp: f64 },
    /// `<exp(i (int_{t1p}^{t1} delta_1 + int_{t2p}^{t2} delta_2))>`.
    Pair(TimeQuad),
}

impl Query {
    fn validate(&self, cfg: &McConfig) -> Result<()> {
        match self {
            Query::Single { t, tp, .. } => {
                cfg.check_time(*t)?;
                cfg.check_time(*tp)?;
                if t < tp {
                    return Err(Error::invalid("times", format!("need t >= tp, got t = {t}, tp = {tp}")));
                }
            }
            Query::Pair(q) => {
                for t in [q.t1, q.t1p, q.t2, q.t2p] {
                    cfg.check_time(t)?;
                }
                q.validate()?;
            }
        }
        Ok(())
    }

    fn sample(&self, tr: &Trajectory) -> Complex64 {
        let phase = match self {
            Query::Single { mode, t, tp } => tr.phase_between(*mode, *t, *tp),
            Query::Pair(q) => tr.phase_between(Mode::One, q.t1, q.t1p) + tr.phase_between(Mode::Two, q.t2, q.t2p),
        };
        Complex64::from_polar(1.0, phase)
    }

    /// Exact value from the second cumulants.
    pub fn exact(&self, k: &KuboParams) -> f64 {
        match self {
            Query::Single { mode, t, tp } => (-g_single(k, *mode, t - tp)).exp(),
            Query::Pair(q) => {
                let (x, y) = q.elapsed();
                (-(g_single(k, Mode::One, x) + g_single(k, Mode::Two, y) + g_cross(k, q))).exp()
            }
        }
    }
}

/// Sample mean with separate standard errors of its real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: Complex64,
    pub se_re: f64,
    pub se_im: f64,
    pub n: usize,
}

impl Estimate {
    /// Largest of the real and imaginary deviations from `exact`, in units
    /// of the standard error. A zero deviation scores 0 even when the
    /// standard error vanishes.
    pub fn z_score(&self, exact: Complex64) -> f64 {
        let z = |diff: f64, se: f64| {
            if diff == 0.0 {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                diff.abs() / se
            }
        };
        z(self.mean.re - exact.re, self.se_re).max(z(self.mean.im - exact.im, self.se_im))
    }
}

/// Count, mean and summed squared deviations per component.
#[derive(Debug, Clone, Copy)]
struct Moments {
    n: f64,
    mean: Complex64,
    m2_re: f64,
    m2_im: f64,
}

impl Moments {
    fn of(values: &[Complex64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<Complex64>() / n;
        let (m2_re, m2_im) = values.iter().fold((0.0, 0.0), |(r, i), v| {
            let d = v - mean;
            (r + d.re * d.re, i + d.im * d.im)
        });
        Self { n, mean, m2_re, m2_im }
    }

    fn merge(self, other: Self) -> Self {
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let f = self.n * other.n / n;
        Self {
            n,
            mean: self.mean + delta * (other.n / n),
            m2_re: self.m2_re + other.m2_re + delta.re * delta.re * f,
            m2_im: self.m2_im + other.m2_im + delta.im * delta.im * f,
        }
    }

    fn estimate(self) -> Estimate {
        let se = |m2: f64| {
            if self.n < 2.0 {
                f64::INFINITY
            } else {
                (m2 / (self.n * (self.n - 1.0))).sqrt()
            }
        };
        Estimate {
            mean: self.mean,
            se_re: se(self.m2_re),
            se_im: se(self.m2_im),
            n: self.n as usize,
        }
    }
}

/// Estimates every query from the same `cfg.n_traj` trajectories.
///
/// Memory is bounded by one trajectory and one chunk of samples per worker.
pub fn estimate(cfg: &McConfig, queries: &[Query]) -> Result<Vec<Estimate>> {
    cfg.validate()?;
    if queries.is_empty() {
        return Err(Error::Empty("queries"));
    }
    for q in queries {
        q.validate(cfg)?;
    }
    let n_chunks = cfg.n_traj.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<Moments>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(cfg.n_traj);
            let mut tr = Trajectory {
                dt: cfg.dt,
                delta1: Vec::new(),
                delta2: Vec::new(),
                phase1: Vec::new(),
                phase2: Vec::new(),
            };
            let mut samples = vec![Vec::with_capacity(end - start); queries.len()];
            for i in start..end {
                fill_trajectory(cfg, i as u64, &mut tr);
                for (q, s) in queries.iter().zip(&mut samples) {
                    s.push(q.sample(&tr));
                }
            }
            samples.iter().map(|s| Moments::of(s)).collect()
        })
        .collect();

    let mut it = per_chunk.into_iter();
    let first = it.next().ok_or(Error::Empty("trajectories"))?;
    let merged = it.fold(first, |acc, chunk| {
        acc.into_iter().zip(chunk).map(|(a, b)| a.merge(b)).collect()
    });
    let out: Vec<Estimate> = merged.into_iter().map(Moments::estimate).collect();
    if out.iter().any(|e| !(e.mean.re.is_finite() && e.mean.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    Ok(out)
}

/// Single-mode dephasing factor `<exp(i int_{tp}^{t} delta_j)>`.
pub fn mc_single_dephasing(cfg: &McConfig, mode: Mode, t: f64, tp: f64) -> Result<Estimate> {
    Ok(estimate(cfg, &[Query::Single { mode, t, tp }])?[0])
}

/// Joint dephasing factor of both photons over the windows of `q`.
pub fn mc_cross_dephasing(cfg: &McConfig, q: &TimeQuad) -> Result<Estimate> {
    Ok(estimate(cfg, &[Query::Pair(*q)])?[0])
}
