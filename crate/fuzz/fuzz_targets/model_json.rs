#![no_main]

use libfuzzer_sys::fuzz_target;
use varobs::regression::TrainedModel;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = TrainedModel::from_json_bytes(data) {
        let text = model.to_json().expect("accepted model must serialize");
        let back = TrainedModel::from_json(&text).expect("serialized model must load");
        assert_eq!(back.x_star, model.x_star);
        assert_eq!(back.theta_star, model.theta_star);
    }
});
