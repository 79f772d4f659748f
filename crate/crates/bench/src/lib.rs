//! Fixture loading shared by the benchmarks.

use std::path::PathBuf;

use drperf_core::{load_scenario, LoadedScenario};

pub fn scenario(name: &str) -> LoadedScenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name);
    load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
