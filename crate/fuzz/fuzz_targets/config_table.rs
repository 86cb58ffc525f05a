#![no_main]

use libfuzzer_sys::fuzz_target;
use shoebox::dataset::ConfigTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = ConfigTable::parse(text) {
        let _ = table.norm_bounds();
        let _ = ConfigTable::parse(&table.to_text()).unwrap();
    }
});
