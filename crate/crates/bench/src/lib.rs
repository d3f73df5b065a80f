//! Shared inputs for the benchmarks.

use std::path::PathBuf;

use multimirror::{Input, MirrorPair};

/// Loads a fixture from the workspace `fixtures/` directory.
pub fn fixture(name: &str) -> MirrorPair {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let input = Input::parse(&text).expect("fixture parses");
    input.mirror_pair().expect("fixture is a mirror pair")
}
