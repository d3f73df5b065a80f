#![allow(dead_code)]

pub mod corpus;

use std::path::PathBuf;

use multimirror::{CharacterTable, Complex64, Input, LatticeVector, MirrorPair, TorusPoint, WStructure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fixtures that describe genuine multiple-mirror pairs.
pub const MIRROR_FIXTURES: &[&str] = &["bn51", "bn51-delta", "stacked-2x", "rank3-1", "rank3-2", "rank3-3"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.json"))
}

pub fn load(name: &str) -> Input {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    Input::parse(&text).expect("fixture parses")
}

pub fn pair(name: &str) -> MirrorPair {
    load(name).mirror_pair().expect("fixture is a mirror pair")
}

pub fn cells(mp: &MirrorPair) -> WStructure {
    WStructure::build(&CharacterTable::build_xi(mp).expect("table")).expect("cells")
}

pub fn v(raw: &[i64]) -> LatticeVector {
    LatticeVector::from_i64(raw)
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> Complex64 {
    let modulus = 2f64.powf(rng.random_range(-1.0..=1.0));
    Complex64::from_polar(modulus, rng.random_range(0.0..std::f64::consts::TAU))
}

/// A point with every coordinate and coefficient random.
pub fn random_point(w: &WStructure, seed: u64) -> TorusPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TorusPoint {
        coords: (0..w.rank()).map(|_| random_unit(&mut rng)).collect(),
        fiber: (0..w.size()).map(|_| random_unit(&mut rng)).collect(),
        coefficients: (0..w.characters().len()).map(|_| random_unit(&mut rng)).collect(),
        repaired_blocks: Vec::new(),
    }
}
