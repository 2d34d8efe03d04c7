//! Deterministic seed derivation.
//!
//! Every component that needs randomness receives its own `u64` seed derived
//! from a caller-visible master seed, a stream tag naming the component, and a
//! counter. Derivation is a chain of SplitMix64 finalizer steps, so nearby
//! (master, stream, index) triples map to statistically unrelated seeds and
//! the whole experiment tree is reproducible from a single number.

/// Stream tags. Each random decision point in the crate owns one tag so that
/// adding a new consumer never perturbs the draws of existing ones.
pub mod stream {
    /// Monitor/target selection inside a study.
    pub const SAMPLING: u64 = 1;
    /// Per-source route-table tie-breaking (indexed by source position).
    pub const ROUTES: u64 = 2;
    /// Resampled studies inside the resampling estimator (indexed by a
    /// resample counter).
    pub const RESAMPLE: u64 = 3;
    /// Graph construction per sweep setting (indexed by setting position).
    pub const GRAPH: u64 = 4;
    /// Per-trial seeds inside a sweep setting (indexed by trial).
    pub const TRIAL: u64 = 5;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for `(stream, index)` under `master`.
#[inline]
pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    let h = splitmix64(master);
    let h = splitmix64(h ^ stream);
    splitmix64(h ^ index)
}
