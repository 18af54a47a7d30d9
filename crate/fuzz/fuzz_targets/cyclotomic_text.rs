#![no_main]
use galmckay::cyclo::Cyclotomic;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(x) = s.parse::<Cyclotomic>() {
        // printing and reparsing must round-trip
        let back: Cyclotomic = x.to_string().parse().expect("printed value reparses");
        assert_eq!(back, x);
    }
});
