#![no_main]

use expctl::{read_throughput_csv, Table};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_throughput_csv(data) {
        let text = Table::Throughput(rows).to_csv_string();
        read_throughput_csv(text.as_bytes()).expect("written tables read back");
    }
});
