#![no_main]

use albker::padic::parse_rational;
use libfuzzer_sys::fuzz_target;
use num_bigint::BigInt;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((n, d)) = parse_rational(text) {
        assert!(d > BigInt::from(0));
        let shown = if d == BigInt::from(1) { n.to_string() } else { format!("{n}/{d}") };
        assert_eq!(parse_rational(&shown).unwrap(), (n, d));
    }
});
