#![no_main]

use imgmine::config::PipelineConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(c) = serde_json::from_slice::<PipelineConfig>(data) {
        if c.validate().is_ok() {
            c.canny_params().validate().expect("validated config yields valid edge parameters");
        }
    }
});
