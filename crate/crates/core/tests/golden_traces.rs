//! Committed traces of the n = 8, S = {2, 3} replay. Set `HEURDIM_BLESS=1`
//! to rewrite them.

mod common;

use heurdim::io::trace_to_json;
use heurdim::search::run;

#[test]
fn family_traces_match_golden_files() {
    let (family, rho) = common::family_n8();
    let bless = std::env::var_os("HEURDIM_BLESS").is_some();
    for (i, algo, stem) in common::family_cases() {
        let x = &family[i - 1];
        let trace = run(algo, x, &rho).unwrap();
        let json = trace_to_json(x, &trace);
        let file = common::golden_dir().join(format!("{stem}.json"));
        if bless {
            std::fs::write(&file, serde_json::to_string_pretty(&json).unwrap() + "\n").unwrap();
            continue;
        }
        let golden: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
        assert_eq!(json, golden, "{stem}");
    }
}
