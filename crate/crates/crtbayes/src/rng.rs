//! Deterministic RNG substream derivation.
//!
//! All randomness in the crate flows from a single master seed. Independent
//! streams are obtained by mixing a sequence of integer tags (stage, cluster
//! index, role, ...) into the master seed with splitmix64 finalizers and
//! seeding a counter-based generator from the result. Streams derived with
//! different tag sequences never share state, so e.g. redrawing treatment
//! assignments cannot perturb potential-outcome generation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Collapse `(master, tags...)` into a single 64-bit stream seed.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = mix(master ^ GOLDEN);
    for &tag in tags {
        state = mix(state ^ tag.wrapping_add(GOLDEN));
        state = state.wrapping_add(GOLDEN);
    }
    mix(state)
}

/// Independent generator for the substream identified by `tags`.
pub fn substream(master: u64, tags: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(master, tags))
}
