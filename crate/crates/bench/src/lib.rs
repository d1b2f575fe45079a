//! Shared fixtures for the benchmarks.

use fairconsensus::gen::{GenSpec, Instance};
use fairconsensus::streaming::{encode_all, StreamHeader, StreamMode, StreamTriple};
use fairconsensus::Seed;

/// Balanced two-color instance with two planted centers.
pub fn instance(n: usize, m: usize, seed: u64) -> Instance {
    GenSpec {
        centers: 2,
        ..GenSpec::balanced(n, m)
    }
    .generate(Seed(seed))
    .expect("balanced instances are feasible for even n")
}

/// The instance as a contiguous stream.
pub fn stream(inst: &Instance) -> (StreamHeader, Vec<StreamTriple>) {
    let header = StreamHeader::new(
        inst.inputs.n(),
        inst.inputs.m(),
        inst.fairness.clone(),
        StreamMode::Contiguous,
    )
    .expect("header matches the instance");
    (header, encode_all(&inst.inputs, StreamMode::Contiguous, Seed(0)))
}
