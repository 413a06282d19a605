//! Seeded inputs shared by the benchmarks.

use twistor_core::clifford::{CliffordRep, Signature};
use twistor_core::random::{real_spinor, rng};
use twistor_core::Cq;

/// Alternating-convention representation in dimension `n` with a seeded real spinor.
pub fn split_input(n: usize, seed: u64) -> (CliffordRep, Vec<Cq>) {
    let rep = CliffordRep::new(Signature::alternating(n).expect("n >= 1")).expect("valid signature");
    let v = real_spinor(&mut rng(seed), rep.dim);
    (rep, v)
}
