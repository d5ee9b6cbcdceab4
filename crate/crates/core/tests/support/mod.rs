//! Reference quadrature shared by the integration tests.

use biphoton::cumulants::{KuboParams, TimeQuad};

/// Adaptive Gauss-Kronrod (7, 15) with absolute tolerance `tol`.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    const XK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_728,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];
    fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WK[7] * fc;
        let mut g = WG[3] * fc;
        for i in 0..7 {
            let s = f(c - h * XK[i]) + f(c + h * XK[i]);
            k += WK[i] * s;
            if i % 2 == 1 {
                g += WG[i / 2] * s;
            }
        }
        (k * h, (k - g).abs() * h)
    }
    fn go<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = rule(f, a, b);
        if err <= tol || depth == 0 {
            return val;
        }
        let m = 0.5 * (a + b);
        go(f, a, m, 0.5 * tol, depth - 1) + go(f, m, b, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    go(f, a, b, tol, 40)
}

/// Direct double integral of the cross correlator over both photon windows.
pub fn g_cross_quadrature(k: &KuboParams, q: &TimeQuad) -> f64 {
    let inner = |s: f64| {
        let corr = |u: f64| k.sigma12_sq * (-(s - u).abs() / k.tau12).exp();
        if s > q.t2p && s < q.t2 {
            adaptive(&corr, q.t2p, s, 1e-14) + adaptive(&corr, s, q.t2, 1e-14)
        } else {
            adaptive(&corr, q.t2p, q.t2, 1e-14)
        }
    };
    let mut cuts = vec![q.t1p, q.t1];
    for t in [q.t2p, q.t2] {
        if t > q.t1p && t < q.t1 {
            cuts.push(t);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| adaptive(&inner, w[0], w[1], 1e-13)).sum()
}
