#![no_main]

use libfuzzer_sys::fuzz_target;
use varobs::data::TrainingSet;

fuzz_target!(|data: &[u8]| {
    if let Ok(set) = TrainingSet::from_json_bytes(data) {
        let text = set.to_json().expect("accepted set must serialize");
        let back = TrainingSet::from_json(&text).expect("serialized set must load");
        assert_eq!(back.len(), set.len());
    }
});
