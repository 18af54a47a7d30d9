#![no_main]
use galmckay::charkit::CachedTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(t) = CachedTable::parse(s) {
        assert_eq!(CachedTable::parse(&t.to_text()).expect("written cache reparses"), t);
    }
});
