//! Seeded random inputs for property trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::VertexId;
use crate::operator::FiniteSupportFn;

pub type TrialRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Values uniform in [−1, 1] on a random nonempty subset of `vertices`.
pub fn random_function(rng: &mut TrialRng, vertices: &[VertexId]) -> FiniteSupportFn {
    assert!(!vertices.is_empty(), "no vertices to draw from");
    let mut f = FiniteSupportFn::new();
    while f.is_empty() {
        for &x in vertices {
            if rng.random_bool(0.6) {
                f.set(x, rng.random_range(-1.0..=1.0));
            }
        }
    }
    f
}

/// Values uniform in [lo, hi] on every vertex of `vertices`.
pub fn random_values(rng: &mut TrialRng, vertices: &[VertexId], lo: f64, hi: f64) -> FiniteSupportFn {
    vertices.iter().map(|&x| (x, rng.random_range(lo..=hi))).collect()
}
