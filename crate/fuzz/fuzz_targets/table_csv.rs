#![no_main]

use libfuzzer_sys::fuzz_target;
use semiquant::harness::parse_comparison_csv;
use semiquant::harness::table::parse_table_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_table_csv(text);
    if let Ok(rows) = parse_comparison_csv(text) {
        for r in &rows {
            let _ = r.discrepancy();
        }
    }
});
