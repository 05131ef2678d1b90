#![no_main]
//! Any accepted dump re-serialises to a dump that parses to the same program.

use cilp::lp::{parse_dump, write_dump};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if text.len() > 64 * 1024 {
        return;
    }
    let Ok(lp) = parse_dump(text) else {
        return;
    };
    let dumped = write_dump(&lp);
    let again = parse_dump(&dumped).expect("written dump must parse");
    assert_eq!(lp, again);
    assert_eq!(dumped, write_dump(&again));
});
