//! Kubo-Anderson second cumulants and the irreducible two-photon kernel.
//!
//! Frequency fluctuations are stationary Gaussian with exponential
//! correlators `sigma_j^2 e^{-|s|/tau_j}` (single mode) and
//! `sigma12^2 e^{-|s|/tau12}` (cross mode). For such noise the second
//! cumulant expansion is exact and every dephasing factor is `e^{-g}`.
//!
//! Two conventions matter here:
//!
//! * `g_j` is the *time-ordered* integral, i.e. half of the variance of the
//!   accumulated phase: `(sigma tau)^2 (e^{-x} + x - 1)` with `x = dt / tau`.
//! * `g_12` is the *unordered* double integral over the two photon
//!   windows, i.e. the full covariance of the two accumulated phases.
//!
//! Both follow from the even function `H(s) = tau^2 (e^{-|s|/tau} + |s|/tau - 1)`,
//! which satisfies `H'' = e^{-|s|/tau}` and `H(0) = H'(0) = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Variances and correlation times of the frequency fluctuations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KuboParams {
    pub sigma1: f64,
    pub sigma2: f64,
    pub tau1: f64,
    pub tau2: f64,
    /// Cross covariance `sigma12^2`; may be negative.
    pub sigma12_sq: f64,
    pub tau12: f64,
}

impl KuboParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma1", self.sigma1), ("sigma2", self.sigma2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        for (name, v) in [("tau1", self.tau1), ("tau2", self.tau2), ("tau12", self.tau12)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if !self.sigma12_sq.is_finite() {
            return Err(Error::invalid("sigma12_sq", "must be finite"));
        }
        let bound = self.sigma1 * self.sigma2;
        if self.sigma12_sq.abs() > bound * (1.0 + 1e-12) {
            return Err(Error::InvalidCovariance {
                sigma12_sq_abs: self.sigma12_sq.abs(),
                bound,
            });
        }
        Ok(())
    }

    pub fn sigma(&self, mode: Mode) -> f64 {
        match mode {
            Mode::One => self.sigma1,
            Mode::Two => self.sigma2,
        }
    }

    pub fn tau(&self, mode: Mode) -> f64 {
        match mode {
            Mode::One => self.tau1,
            Mode::Two => self.tau2,
        }
    }

    /// Rate `sigma12^2 tau12` of the fast-fluctuation limit.
    pub fn gamma12(&self) -> f64 {
        self.sigma12_sq * self.tau12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    One,
    Two,
}

/// Detection times `t1, t2` and emission times `t1p, t2p` of the two photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeQuad {
    pub t1: f64,
    pub t1p: f64,
    pub t2: f64,
    pub t2p: f64,
}

impl TimeQuad {
    pub fn new(t1: f64, t1p: f64, t2: f64, t2p: f64) -> Result<Self> {
        let q = Self { t1, t1p, t2, t2p };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.t1, self.t1p, self.t2, self.t2p];
        if all.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::invalid("times", "times must be finite and >= 0"));
        }
        if self.t1 < self.t1p || self.t2 < self.t2p {
            return Err(Error::invalid("times", "need t1 >= t1p and t2 >= t2p"));
        }
        Ok(())
    }

    /// Elapsed propagation times `(t1 - t1p, t2 - t2p)`.
    pub fn elapsed(&self) -> (f64, f64) {
        (self.t1 - self.t1p, self.t2 - self.t2p)
    }

    /// The quad with the two photons exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            t1: self.t2,
            t1p: self.t2p,
            t2: self.t1,
            t2p: self.t1p,
        }
    }

    pub fn latest(&self) -> f64 {
        self.t1.max(self.t2)
    }
}

/// Cavity mode frequencies and leakage rates; `omega~ = omega + i kappa / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityModeParams {
    pub omega1: f64,
    pub omega2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl CavityModeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega1.is_finite() && self.omega2.is_finite()) {
            return Err(Error::invalid("omega", "must be finite"));
        }
        for (name, v) in [("kappa1", self.kappa1), ("kappa2", self.kappa2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    fn complex_frequency(&self, mode: Mode) -> Complex64 {
        match mode {
            Mode::One => Complex64::new(self.omega1, 0.5 * self.kappa1),
            Mode::Two => Complex64::new(self.omega2, 0.5 * self.kappa2),
        }
    }
}

/// `e^{-x} + x - 1`, accurate for small `x`.
fn kubo_shape(x: f64) -> f64 {
    if x < 1e-3 {
        let x2 = x * x;
        x2 * (0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0)
    } else {
        (-x).exp_m1() + x
    }
}

/// `H(s) = tau^2 (e^{-|s|/tau} + |s|/tau - 1)`.
fn kink_primitive(s: f64, tau: f64) -> f64 {
    tau * tau * kubo_shape(s.abs() / tau)
}

/// Single-mode cumulant `(sigma_j tau_j)^2 (e^{-dt/tau_j} + dt/tau_j - 1)`.
pub fn g_single(k: &KuboParams, mode: Mode, dt: f64) -> f64 {
    let (sigma, tau) = (k.sigma(mode), k.tau(mode));
    sigma * sigma * kink_primitive(dt.max(0.0), tau)
}

/// The single-mode cumulant with an extra `+1` inside the bracket. It does
/// not vanish at `dt = 0` and is kept only so that validation reports can
/// show the discrepancy.
pub fn g_single_plus_one(k: &KuboParams, mode: Mode, dt: f64) -> f64 {
    let (sigma, tau) = (k.sigma(mode), k.tau(mode));
    let x = dt / tau;
    (sigma * tau).powi(2) * (x + (-x).exp() + 1.0)
}

/// Fast-fluctuation limit `sigma^2 tau dt`.
pub fn g_single_inhomogeneous(k: &KuboParams, mode: Mode, dt: f64) -> f64 {
    let (sigma, tau) = (k.sigma(mode), k.tau(mode));
    sigma * sigma * tau * dt
}

/// Slow-modulation limit `sigma^2 dt^2 / 2` (leading Taylor term of
/// [`g_single`]).
pub fn g_single_homogeneous(k: &KuboParams, mode: Mode, dt: f64) -> f64 {
    let sigma = k.sigma(mode);
    0.5 * sigma * sigma * dt * dt
}

/// Cross cumulant: the unordered double integral of `sigma12^2 e^{-|s|/tau12}`
/// over `[t1p, t1] x [t2p, t2]`, valid for every relative placement of the
/// two windows.
pub fn g_cross(k: &KuboParams, q: &TimeQuad) -> f64 {
    let tau = k.tau12;
    let h = |s: f64| kink_primitive(s, tau);
    k.sigma12_sq * (h(q.t1 - q.t2p) - h(q.t1p - q.t2p) - h(q.t1 - q.t2) + h(q.t1p - q.t2))
}

/// Relative placement of the four times, latest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderingCase {
    /// `t1 > t1p > t2 > t2p`: photon 2's window precedes photon 1's.
    A,
    /// `t1 > t2 > t1p > t2p`: staggered overlap, photon 1 later.
    B,
    /// `t1 > t2 > t2p > t1p`: photon 2's window nested in photon 1's.
    C,
    /// `t2 > t1 > t1p > t2p`: photon 1's window nested in photon 2's.
    D,
    /// `t2 > t1 > t2p > t1p`: staggered overlap, photon 2 later.
    E,
    /// `t2 > t2p > t1 > t1p`: photon 1's window precedes photon 2's.
    F,
}

impl OrderingCase {
    pub const ALL: [OrderingCase; 6] = [Self::A, Self::B, Self::C, Self::D, Self::E, Self::F];

    /// The four cases with a nonzero kernel in the fast-fluctuation limit.
    pub const SURVIVING: [OrderingCase; 4] = [Self::B, Self::C, Self::D, Self::E];

    pub fn label(self) -> &'static str {
        match self {
            Self::A => "A (t1>t1'>t2>t2')",
            Self::B => "B (t1>t2>t1'>t2')",
            Self::C => "C (t1>t2>t2'>t1')",
            Self::D => "D (t2>t1>t1'>t2')",
            Self::E => "E (t2>t1>t2'>t1')",
            Self::F => "F (t2>t2'>t1>t1')",
        }
    }

    /// The four times in the order this case demands, latest first.
    pub fn arrange(self, q: &TimeQuad) -> [f64; 4] {
        let TimeQuad { t1, t1p, t2, t2p } = *q;
        match self {
            Self::A => [t1, t1p, t2, t2p],
            Self::B => [t1, t2, t1p, t2p],
            Self::C => [t1, t2, t2p, t1p],
            Self::D => [t2, t1, t1p, t2p],
            Self::E => [t2, t1, t2p, t1p],
            Self::F => [t2, t2p, t1, t1p],
        }
    }

    pub fn holds(self, q: &TimeQuad) -> bool {
        let t = self.arrange(q);
        t[0] >= t[1] && t[1] >= t[2] && t[2] >= t[3]
    }

    /// The case a well-formed quad falls into; ties resolve to the first match.
    pub fn classify(q: &TimeQuad) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.holds(q))
    }

    fn check(self, q: &TimeQuad) -> Result<()> {
        if self.holds(q) {
            Ok(())
        } else {
            Err(Error::OrderingViolation {
                case: self.label(),
                detail: format!("t1={}, t1'={}, t2={}, t2'={}", q.t1, q.t1p, q.t2, q.t2p),
            })
        }
    }
}

/// Closed-form cross cumulants tabulated per time ordering, prefactor
/// `(sigma12 tau12)^2` read as `sigma12^2 tau12^2`.
///
/// These are audit values only: cases A and F carry the opposite sign for
/// the `t1` (resp. `t2`) exponentials compared with the direct integral,
/// so they disagree with [`g_cross`]; cases B to E agree.
pub fn g_cross_tabulated(k: &KuboParams, case: OrderingCase, q: &TimeQuad) -> Result<f64> {
    case.check(q)?;
    let tau = k.tau12;
    let e = |s: f64| (-s / tau).exp();
    let TimeQuad { t1, t1p, t2, t2p } = *q;
    let bracket = match case {
        OrderingCase::A => e(t1 - t2) - e(t1 - t2p) + e(t1p - t2) - e(t1p - t2p),
        OrderingCase::B => 2.0 * (t2 - t1p) / tau - e(t1 - t2) + e(t1 - t2p) - e(t1p - t2p) + e(t2 - t1p),
        OrderingCase::C => 2.0 * (t2 - t2p) / tau - e(t2p - t1p) + e(t2 - t1p) - e(t1 - t2) + e(t1 - t2p),
        OrderingCase::D => 2.0 * (t1 - t1p) / tau - e(t1p - t2p) + e(t1 - t2p) - e(t2 - t1) + e(t2 - t1p),
        OrderingCase::E => 2.0 * (t1 - t2p) / tau - e(t2 - t1) + e(t2 - t1p) - e(t2p - t1p) + e(t1 - t2p),
        OrderingCase::F => e(t2 - t1) - e(t2 - t1p) + e(t2p - t1) - e(t2p - t1p),
    };
    Ok(k.sigma12_sq * tau * tau * bracket)
}

/// Gaussian kernel `e^{-sigma12^2 x y}` of the slow-modulation limit.
pub fn kernel_homogeneous(sigma12_sq: f64, x: f64, y: f64) -> f64 {
    (-sigma12_sq * x * y).exp()
}

/// Fast-fluctuation kernel `e^{-gamma12 (t_b - t_c)}` where `t_b > t_c` are
/// the two inner times of the ordering, i.e. the overlap of the windows.
///
/// Only cases B to E survive this limit; A and F are rejected.
pub fn kernel_inhomogeneous(gamma12: f64, case: OrderingCase, q: &TimeQuad) -> Result<f64> {
    if !(gamma12.is_finite() && gamma12 >= 0.0) {
        return Err(Error::invalid("gamma12", format!("must be >= 0, got {gamma12}")));
    }
    if !OrderingCase::SURVIVING.contains(&case) {
        return Err(Error::OrderingViolation {
            case: case.label(),
            detail: "disjoint windows have no surviving fast-fluctuation kernel".into(),
        });
    }
    case.check(q)?;
    let t = case.arrange(q);
    Ok((-gamma12 * (t[1] - t[2])).exp())
}

/// How the irreducible kernel is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRegime {
    /// `e^{-g_cross}` with the full cross cumulant.
    Exact,
    /// `e^{-sigma12^2 (t1 - t1') (t2 - t2')}`.
    Homogeneous,
    /// The fast-fluctuation limit kernel of the quad's ordering case
    /// (unity for disjoint windows).
    Inhomogeneous,
}

/// Single-photon amplitude `theta(t - t') e^{i omega~ (t - t') - g(t - t')}`.
pub fn single_photon_amplitude_time(cav: &CavityModeParams, k: &KuboParams, mode: Mode, t: f64, tp: f64) -> Complex64 {
    if t < tp {
        return Complex64::new(0.0, 0.0);
    }
    let dt = t - tp;
    (Complex64::i() * cav.complex_frequency(mode) * dt - g_single(k, mode, dt)).exp()
}

/// Irreducible kernel in the requested regime.
pub fn irreducible_kernel(k: &KuboParams, q: &TimeQuad, regime: KernelRegime) -> f64 {
    match regime {
        KernelRegime::Exact => (-g_cross(k, q)).exp(),
        KernelRegime::Homogeneous => {
            let (x, y) = q.elapsed();
            kernel_homogeneous(k.sigma12_sq, x, y)
        }
        KernelRegime::Inhomogeneous => match OrderingCase::classify(q) {
            Some(case) if OrderingCase::SURVIVING.contains(&case) => {
                let t = case.arrange(q);
                (-k.gamma12() * (t[1] - t[2])).exp()
            }
            _ => 1.0,
        },
    }
}

/// Two-photon amplitude `S1(t1, t1') S2(t2, t2') K(t1 t2, t1' t2')`.
pub fn two_photon_amplitude_time(
    cav: &CavityModeParams,
    k: &KuboParams,
    q: &TimeQuad,
    regime: KernelRegime,
) -> Complex64 {
    if q.t1 < q.t1p || q.t2 < q.t2p {
        return Complex64::new(0.0, 0.0);
    }
    let s1 = single_photon_amplitude_time(cav, k, Mode::One, q.t1, q.t1p);
    let s2 = single_photon_amplitude_time(cav, k, Mode::Two, q.t2, q.t2p);
    s1 * s2 * irreducible_kernel(k, q, regime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn kubo(sigma: f64, tau: f64, sigma12_sq: f64) -> KuboParams {
        KuboParams {
            sigma1: sigma,
            sigma2: sigma,
            tau1: tau,
            tau2: tau,
            sigma12_sq,
            tau12: tau,
        }
    }

    #[test]
    fn single_cumulant_limits() {
        let k = kubo(1.0, 0.01, 0.0);
        assert_eq!(g_single(&k, Mode::One, 0.0), 0.0);
        let g = g_single(&k, Mode::One, 1.0);
        assert!((g - 0.01).abs() / 0.01 < 0.02, "{g}");
        assert_relative_eq!(g_single_inhomogeneous(&k, Mode::One, 1.0), 0.01, epsilon = 1e-15);

        let k = kubo(10.0, 10.0, 0.0);
        let g = g_single(&k, Mode::One, 0.01);
        assert!((g - 0.005).abs() / 0.005 < 0.01, "{g}");
        assert_relative_eq!(g_single_homogeneous(&k, Mode::One, 0.01), 0.005, epsilon = 1e-15);
    }

    #[test]
    fn plus_one_single_cumulant_does_not_vanish() {
        let k = kubo(0.7, 2.0, 0.0);
        assert_relative_eq!(
            g_single_plus_one(&k, Mode::One, 0.0),
            2.0 * (0.7f64 * 2.0).powi(2),
            epsilon = 1e-14
        );
    }

    #[test]
    fn small_argument_branch_is_continuous() {
        let below = kubo_shape(1e-3 * (1.0 - 1e-12));
        let above = kubo_shape(1e-3);
        assert!((below - above).abs() / above < 1e-9);
    }

    #[test]
    fn cross_cumulant_special_configurations() {
        let k = kubo(1.0, 1.0, 1.0);
        let q = TimeQuad::new(3.0, 2.0, 1.0, 0.0).unwrap();
        let e = |x: f64| (-x).exp();
        let want = e(1.0) - 2.0 * e(2.0) + e(3.0);
        assert_relative_eq!(g_cross(&k, &q), want, epsilon = 1e-14);
        assert_relative_eq!(g_cross(&k, &q), 0.146_995_943_066_080_8, epsilon = 1e-12);

        let q = TimeQuad::new(1.0, 0.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(g_cross(&k, &q), 2.0 * g_single(&k, Mode::One, 1.0), epsilon = 1e-14);

        let k0 = kubo(1.0, 1.0, 0.0);
        assert_eq!(g_cross(&k0, &q), 0.0);
        assert_eq!(irreducible_kernel(&k0, &q, KernelRegime::Exact), 1.0);
    }

    #[test]
    fn tabulated_cases_reject_wrong_orderings() {
        let k = kubo(1.0, 1.0, 1.0);
        let q = TimeQuad::new(3.0, 1.0, 2.0, 0.0).unwrap(); // case B
        assert_eq!(OrderingCase::classify(&q), Some(OrderingCase::B));
        let tabulated = g_cross_tabulated(&k, OrderingCase::B, &q).unwrap();
        let e = |x: f64| (-x).exp();
        assert_relative_eq!(tabulated, 2.0 - e(1.0) + e(3.0) - e(1.0) + e(1.0), epsilon = 1e-14);
        assert!(g_cross_tabulated(&k, OrderingCase::A, &q).is_err());
        assert!(g_cross_tabulated(&k, OrderingCase::F, &q).is_err());
    }

    #[test]
    fn tabulated_disjoint_cases_disagree_with_direct_integral() {
        let k = kubo(1.0, 1.0, 1.0);
        let q = TimeQuad::new(3.0, 2.0, 1.0, 0.0).unwrap();
        let tabulated = g_cross_tabulated(&k, OrderingCase::A, &q).unwrap();
        let direct = g_cross(&k, &q);
        assert!((tabulated - direct).abs() > 0.1);
        let q = q.swapped();
        let tabulated = g_cross_tabulated(&k, OrderingCase::F, &q).unwrap();
        assert!((tabulated - g_cross(&k, &q)).abs() > 0.1);
    }

    #[test]
    fn kernels() {
        assert_eq!(kernel_homogeneous(0.7, 0.0, 5.0), 1.0);
        assert_eq!(kernel_homogeneous(0.0, 3.0, 5.0), 1.0);
        assert_relative_eq!(
            kernel_homogeneous(1.33, 1.0, 1.0),
            0.264_477_261_299_824,
            epsilon = 1e-12
        );

        // C: t1 > t2 > t2' > t1'
        let q = TimeQuad::new(3.0, 0.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(
            kernel_inhomogeneous(1.0, OrderingCase::C, &q).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert_eq!(kernel_inhomogeneous(0.0, OrderingCase::C, &q).unwrap(), 1.0);
        assert!(kernel_inhomogeneous(1.0, OrderingCase::B, &q).is_err());
        assert!(kernel_inhomogeneous(1.0, OrderingCase::A, &q).is_err());

        let mut last = 1.0;
        for d in [0.5, 1.0, 5.0, 50.0] {
            let q = TimeQuad::new(d + 1.0, 0.0, d, 0.0).unwrap(); // C with overlap d
            let v = kernel_inhomogeneous(0.3, OrderingCase::C, &q).unwrap();
            assert!(v < last && v > 0.0);
            last = v;
        }
    }

    #[test]
    fn amplitude_time_limits() {
        let cav = CavityModeParams {
            omega1: 1.3,
            omega2: 0.4,
            kappa1: 0.0,
            kappa2: 0.0,
        };
        let k = kubo(1.0, 1.0, 0.5);
        let q = TimeQuad::new(2.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(
            two_photon_amplitude_time(&cav, &k, &q, KernelRegime::Exact),
            Complex64::new(1.0, 0.0)
        );

        let quiet = kubo(0.0, 1.0, 0.0);
        let q = TimeQuad::new(2.0, 0.5, 1.0, 0.25).unwrap();
        let a = two_photon_amplitude_time(&cav, &quiet, &q, KernelRegime::Exact);
        let want = Complex64::new(0.0, 1.3 * 1.5 + 0.4 * 0.75).exp();
        assert!((a - want).norm() < 1e-14);
        assert_relative_eq!(a.norm(), 1.0, epsilon = 1e-14);

        let backwards = TimeQuad {
            t1: 0.0,
            t1p: 1.0,
            t2: 2.0,
            t2p: 0.0,
        };
        assert_eq!(
            two_photon_amplitude_time(&cav, &k, &backwards, KernelRegime::Exact),
            Complex64::new(0.0, 0.0)
        );
        assert!(backwards.validate().is_err());
    }

    #[test]
    fn leakage_damps_the_amplitude() {
        let cav = CavityModeParams {
            omega1: 0.0,
            omega2: 0.0,
            kappa1: 2.0,
            kappa2: 0.0,
        };
        let k = kubo(0.0, 1.0, 0.0);
        let a = single_photon_amplitude_time(&cav, &k, Mode::One, 1.0, 0.0);
        assert_relative_eq!(a.re, (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn kubo_validation() {
        let mut k = kubo(1.0, 1.0, 1.0);
        assert!(k.validate().is_ok());
        k.sigma12_sq = 1.5;
        assert!(matches!(k.validate(), Err(Error::InvalidCovariance { .. })));
        k.sigma12_sq = -1.0;
        assert!(k.validate().is_ok());
        k.tau12 = 0.0;
        assert!(k.validate().is_err());
    }
}
