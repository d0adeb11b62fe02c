#![no_main]

use libfuzzer_sys::fuzz_target;
use semiquant::harness::table::parse_report_json;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = parse_report_json(text) {
        let again = report.to_json().expect("parsed report re-encodes");
        parse_report_json(&again).expect("re-encoded report parses");
    }
});
