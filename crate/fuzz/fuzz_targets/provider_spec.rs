#![no_main]

use libfuzzer_sys::fuzz_target;
use netrefine::provider::ProviderSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(ProviderSpec::Oracle(o)) = text.parse::<ProviderSpec>() {
            assert!((0.0..=1.0).contains(&o.hit));
            assert!((0.0..=1.0).contains(&o.false_rate));
            assert_eq!(o.blur % 2, 1);
        }
    }
});
