//! Coincidence probability of the two output detectors.
//!
//! With frequency conservation collapsing the primed integrals, the rate is
//! `Pc = sum_ij u_i v_j |F(w1_i, w2_j)|^2 |S(w1_i, w2_j)|^2` over the grid.
//! Absolute scale is conventional; compare ratios.

use serde::{Deserialize, Serialize};

use crate::spectral::BiphotonAmplitude;
use crate::{Error, Result};

/// Spectral envelope `F` of the incoming photon pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputEnvelope {
    /// `F = 1`, or an envelope already folded into the amplitude.
    #[default]
    Flat,
    /// `exp(-((w1 - c)^2 + (w2 - c)^2) / (2 width^2))`.
    Gaussian { center: f64, width: f64 },
}

impl InputEnvelope {
    pub fn validate(&self) -> Result<()> {
        if let InputEnvelope::Gaussian { center, width } = *self {
            if !center.is_finite() {
                return Err(Error::invalid("center", "must be finite"));
            }
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::invalid("width", format!("must be > 0, got {width}")));
            }
        }
        Ok(())
    }

    pub fn value(&self, omega1: f64, omega2: f64) -> f64 {
        match *self {
            InputEnvelope::Flat => 1.0,
            InputEnvelope::Gaussian { center, width } => {
                let r2 = (omega1 - center).powi(2) + (omega2 - center).powi(2);
                (-r2 / (2.0 * width * width)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceResult {
    pub pc: f64,
    pub n1: usize,
    pub n2: usize,
    /// Total weight of the grid, `sum u_i * sum v_j`.
    pub measure: f64,
    pub envelope: InputEnvelope,
}

/// Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

pub fn coincidence_probability(a: &BiphotonAmplitude, envelope: InputEnvelope) -> Result<CoincidenceResult> {
    a.check()?;
    envelope.validate()?;
    let (p1, p2) = (a.grid1.points(), a.grid2.points());
    let (u, v) = (a.grid1.weights(), a.grid2.weights());
    let mut acc = CompensatedSum::default();
    for j in 0..p2.len() {
        for i in 0..p1.len() {
            let f = envelope.value(p1[i], p2[j]);
            acc.add(u[i] * v[j] * f * f * a.values[(i, j)].norm_sqr());
        }
    }
    let pc = acc.value();
    if !pc.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(CoincidenceResult {
        pc,
        n1: p1.len(),
        n2: p2.len(),
        measure: a.grid1.measure() * a.grid2.measure(),
        envelope,
    })
}
