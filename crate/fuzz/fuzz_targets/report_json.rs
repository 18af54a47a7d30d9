#![no_main]
use galmckay::mckaybij::VerificationReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = VerificationReport::parse(s) {
        assert_eq!(VerificationReport::parse(&r.to_json()).expect("written report reparses"), r);
    }
});
