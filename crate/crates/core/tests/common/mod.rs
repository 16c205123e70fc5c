#![allow(dead_code)]

use cfd_core::{cfd, Cfd, FeatureId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_text(name: &str) -> String {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/");
    std::fs::read_to_string(format!("{path}{name}")).unwrap()
}

pub fn fixture(name: &str) -> Cfd {
    cfd(&fixture_text(name))
}

pub fn names(n: usize) -> Vec<FeatureId> {
    (0..n).map(|i| FeatureId::new(&format!("u{i}")).unwrap()).collect()
}
