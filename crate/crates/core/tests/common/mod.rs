#![allow(dead_code)]

use std::path::PathBuf;

use drperf_core::io::scenario::{load_scenario, LoadedScenario};

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn hybrid() -> LoadedScenario {
    load_scenario(scenarios_dir().join("hybrid.toml")).expect("hybrid fixture loads")
}

pub fn cloud() -> LoadedScenario {
    load_scenario(scenarios_dir().join("cloud.toml")).expect("cloud fixture loads")
}

pub fn close(actual: f64, expected: f64, tol: f64) -> bool {
    (actual - expected).abs() <= tol
}
