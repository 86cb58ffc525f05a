#![no_main]

use libfuzzer_sys::fuzz_target;
use shoebox::scene::DesignSpace;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(space) = DesignSpace::parse(text) {
        // anything accepted must survive a round trip
        assert_eq!(DesignSpace::parse(&space.to_text()).unwrap(), space);
        if space.cardinality() <= 4096 {
            let _ = space.enumerate();
        }
    }
});
