#![no_main]

use albker_cli::JobSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = JobSpec::from_json(text) else { return };
    let norm = spec.normalized();
    let again = JobSpec::from_json(&serde_json::to_string(&norm).unwrap()).expect("normalized spec parses");
    assert_eq!(again.normalized(), norm);
    // keep field construction cheap
    if norm.field.p <= 7 && norm.field.f <= 2 && (1..=40).contains(&norm.field.precision) {
        if let Ok(k) = norm.build_field() {
            if k.degree() <= 8 {
                let _ = norm.build_curves(&k);
            }
        }
    }
});
