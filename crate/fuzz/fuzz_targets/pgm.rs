#![no_main]

use imgmine_core::raster::{read_pgm, write_pgm};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = read_pgm(data) {
        let again = read_pgm(&write_pgm(&img)).expect("written PGM parses");
        assert_eq!(again, img);
    }
});
