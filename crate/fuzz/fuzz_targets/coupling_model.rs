#![no_main]

use biphoton::spectral::{biphoton_phase_averaged, CouplingModel, SpectralParams};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(model) = serde_json::from_slice::<CouplingModel>(data) else {
        return;
    };
    if model.validate().is_err() {
        return;
    }
    let p = SpectralParams::new(std::f64::consts::PI, 1.0, 2.0).unwrap();
    for (w1, w2) in [(0.0, 0.0), (3.0, 3.5), (-5.0, 11.0)] {
        if let Ok(z) = biphoton_phase_averaged(&p, &p, &model, w1, w2, 1e-14) {
            assert!(
                z.re.is_finite() && z.im.is_finite(),
                "{model:?} at ({w1}, {w2}) gave {z}"
            );
        }
    }
});
