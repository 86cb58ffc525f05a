#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use shoebox::ann::{NetShape, SurrogateNet};
use shoebox::scene::DesignSpace;
use shoebox_cli::server::parse_config;

fn model() -> &'static SurrogateNet {
    static MODEL: OnceLock<SurrogateNet> = OnceLock::new();
    MODEL.get_or_init(|| SurrogateNet::seeded(NetShape::default(), DesignSpace::table1().norm_bounds(), 1))
}

fuzz_target!(|data: &[u8]| {
    if let Ok(config) = parse_config(data, model()) {
        let x = model().norm.encode(&config).features;
        let y = model().forward(&x.0).unwrap();
        assert!(y.iter().all(|v| (0.0..=1.0).contains(v)));
    }
});
