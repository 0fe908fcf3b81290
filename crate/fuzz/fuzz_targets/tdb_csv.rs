#![no_main]

use imgmine_core::segment::{read_tdb_csv, write_tdb_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(db) = read_tdb_csv(data) {
        let again = read_tdb_csv(&write_tdb_csv(&db)).expect("written TDB parses");
        assert_eq!(again, db);
    }
});
