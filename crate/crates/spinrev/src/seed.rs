//! Deterministic seed derivation.
//!
//! Every stochastic component draws from a [`rand_chacha::ChaCha8Rng`] whose
//! seed is derived from a base seed plus a role/index path. Work items
//! (anneal reads, population members, grid repetitions) therefore own
//! independent streams, which is what makes parallel and sequential
//! execution produce identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keeping unrelated consumers of one base seed independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Role {
    GraphEdges = 1,
    MaskBits = 2,
    ChipBias = 3,
    ChipCoupler = 4,
    ReadNoise = 5,
    ReadInit = 6,
    ReadSweep = 7,
    TieBreak = 8,
    NativeMask = 9,
    GaInit = 10,
    GaEval = 11,
    GaCross = 12,
    GaMutate = 13,
    GaElite = 14,
    GaFinal = 15,
    Experiment = 16,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `parts` into `base` with splitmix64 steps; order-sensitive.
pub fn derive(base: u64, parts: &[u64]) -> u64 {
    let mut state = base;
    let mut out = splitmix64(&mut state);
    for &p in parts {
        state ^= p.wrapping_mul(0xff51_afd7_ed55_8ccd);
        out = splitmix64(&mut state);
    }
    out
}

/// ChaCha8 stream for `(base, role, path...)`.
pub fn rng(base: u64, role: Role, path: &[u64]) -> ChaCha8Rng {
    let mut parts = vec![role as u64];
    parts.extend_from_slice(path);
    ChaCha8Rng::seed_from_u64(derive(base, &parts))
}
