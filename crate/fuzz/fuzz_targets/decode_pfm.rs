#![no_main]

use libfuzzer_sys::fuzz_target;
use netrefine::io::{decode_pfm, encode_pfm};

fuzz_target!(|data: &[u8]| {
    if let Ok(decoded) = decode_pfm(data) {
        let raster = decoded.raster;
        assert!(raster.values().iter().all(|v| (0.0..=1.0).contains(v)));
        let again = decode_pfm(&encode_pfm(&raster)).expect("re-encoded raster decodes");
        assert_eq!(again.clamped, 0);
        assert_eq!(again.raster, raster);
    }
});
