#![no_main]

use libfuzzer_sys::fuzz_target;
use shoebox::dataset::LabelFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(labels) = LabelFile::parse(text) {
        let _ = LabelFile::parse(&labels.to_text()).unwrap();
    }
});
