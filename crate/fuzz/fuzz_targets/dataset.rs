#![no_main]

use libfuzzer_sys::fuzz_target;
use shoebox::dataset::LabeledDataset;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ds) = LabeledDataset::parse(text) {
        let _ = LabeledDataset::parse(&ds.to_text()).unwrap();
    }
});
