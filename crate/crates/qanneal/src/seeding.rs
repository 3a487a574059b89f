//! Deterministic seed derivation for batched runs.
//!
//! Every run in an experiment gets its own RNG stream derived from the
//! master seed and the run's position in the batch, so results do not
//! depend on worker count or scheduling order. The derivation below is
//! part of the external interface contract: reports produced on one
//! machine replay bit-exactly on another.
//!
//! The mixing function is the splitmix64 finalizer folded over the
//! components:
//!
//! ```text
//! mix(master, [p1, p2, ...]):
//!     z = master
//!     for p in parts:
//!         z = finalize(z ^ (p + 1) * 0x9E3779B97F4A7C15)
//!     return z
//!
//! finalize(z):
//!     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!     return z ^ (z >> 31)
//! ```
//!
//! The `p + 1` offset keeps component index 0 from being a no-op fold.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold `parts` into `master`. See the module docs for the exact recipe.
pub fn mix(master: u64, parts: &[u64]) -> u64 {
    let mut z = master;
    for &p in parts {
        z = finalize(z ^ p.wrapping_add(1).wrapping_mul(GOLDEN));
    }
    z
}

/// Seed for instance `index` in a generated batch.
pub fn instance_seed(master: u64, index: u64) -> u64 {
    mix(master, &[index])
}

/// Seed for run `run` of instance `instance` in an experiment.
pub fn run_seed(master: u64, instance: u64, run: u64) -> u64 {
    mix(master, &[instance, run])
}

/// Seed stream for ground-truth resolution, kept disjoint from run seeds
/// by a fixed tag.
pub fn ground_truth_seed(master: u64, instance: u64) -> u64 {
    mix(master, &[u64::MAX, instance])
}
