#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = bpe::parse_config(data) {
        let _ = cfg.validate();
        let text = serde_json::to_string(&cfg).expect("parsed config serializes");
        bpe::parse_config(text.as_bytes()).expect("serialized config parses");
    }
});
