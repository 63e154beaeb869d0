#![no_main]

use libfuzzer_sys::fuzz_target;
use netrefine::provider::parse_list;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(items) = parse_list::<usize>(text) {
            assert_eq!(items.len(), text.split(',').count());
        }
        let _ = parse_list::<f32>(text);
    }
});
