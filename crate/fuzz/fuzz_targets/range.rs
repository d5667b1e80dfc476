#![no_main]

use libfuzzer_sys::fuzz_target;
use qlaser_cli::config::{expand_range, parse_range};

fuzz_target!(|data: (&str, f64)| {
    let (text, step) = data;
    if let Ok((start, end)) = parse_range(text) {
        assert!(start > 0.0 && end > 0.0);
        if let Ok(values) = expand_range(start, end, step) {
            assert!(!values.is_empty());
            assert!(values.windows(2).all(|w| w[0] < w[1]));
        }
    }
});
