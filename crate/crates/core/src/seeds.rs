//! Deterministic substream derivation.
//!
//! Every source of randomness in the crate flows from one user-supplied
//! seed. Independent work items (an image to render, a bootstrap resample)
//! get their own substream derived from (seed, index), so results are
//! identical regardless of evaluation order or worker count.

/// Derives the seed for work item `index` of a run seeded with `seed`.
///
/// splitmix64 finalizer over the seed xor a golden-ratio spread of the
/// index; consecutive indices land on well-separated streams.
pub fn substream(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
