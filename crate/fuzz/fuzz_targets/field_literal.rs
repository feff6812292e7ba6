#![no_main]

use std::sync::OnceLock;

use albker::padic::{parse_element, LocalField};
use libfuzzer_sys::fuzz_target;
use num_bigint::BigInt;

fn fields() -> &'static [LocalField] {
    static F: OnceLock<Vec<LocalField>> = OnceLock::new();
    F.get_or_init(|| {
        let eis = |c: &[i64]| c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        vec![
            LocalField::qp(2, 30).unwrap(),
            LocalField::new(3, 1, Some(&eis(&[3, 3, 1])), 30).unwrap(),
            LocalField::new(2, 2, Some(&eis(&[2, 0, 0, 1])), 20).unwrap(),
        ]
    })
}

fuzz_target!(|data: &[u8]| {
    let Some((&which, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if text.len() > 256 {
        return;
    }
    let k = &fields()[which as usize % fields().len()];
    let _ = parse_element(k, text);
});
