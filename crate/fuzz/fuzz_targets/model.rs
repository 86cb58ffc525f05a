#![no_main]

use libfuzzer_sys::fuzz_target;
use shoebox::ann::SurrogateNet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(net) = SurrogateNet::parse(text) {
        let x = vec![0.5; net.inputs];
        let _ = net.forward(&x);
        let _ = net.digest();
    }
});
