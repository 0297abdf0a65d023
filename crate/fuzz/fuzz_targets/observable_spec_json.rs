#![no_main]

use libfuzzer_sys::fuzz_target;
use varobs::observable::ObservableSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = serde_json::from_slice::<ObservableSpec>(data) {
        if spec.validate().is_ok() && spec.extended_qubits() <= 6 {
            let _ = spec.param_count();
            let theta = vec![0.3; spec.param_count()];
            let _ = varobs::observable::projectors(&spec, &theta);
        }
    }
});
