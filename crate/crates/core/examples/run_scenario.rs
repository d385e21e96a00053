//! Runs a scenario file in-process and prints its verdicts.
//!
//! ```text
//! cargo run --example run_scenario -- crates/core/scenarios/born_matrix_mub.json
//! ```

use qformal::scenario::{run_scenario_file, RunOptions};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/scenarios/born_matrix_mub.json"
        )
        .into()
    });
    let report = run_scenario_file(&path, &RunOptions::default());
    if let Some(e) = &report.error {
        eprintln!("{e}");
    }
    for v in &report.verdicts {
        let mark = if v.passed { "ok  " } else { "FAIL" };
        println!("{mark} {:<32} {:.3e}", v.name, v.value);
    }
    std::process::exit(report.exit_code());
}
