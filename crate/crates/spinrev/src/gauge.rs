//! Spin-reversal masks and the qubit-level gauge transform.
//!
//! Reversing variable i maps a_i → -a_i and a_ij → -a_ij for every incident
//! coupler. Applying this per index over a set I means a coupler with both
//! endpoints in I flips twice, so the net rule is: negate a coupler iff
//! exactly one endpoint is masked. Energies are invariant: negations are
//! exact in floating point and term order is unchanged, so
//! `energy(H', transform_state(s, m)) == energy(H, s)` bitwise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IsingModel, SpinState, VarDomain};
use crate::seed::{self, Role};

/// Indicator bits over the model's variables: true = reverse this spin.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinReversalMask {
    bits: Vec<bool>,
}

impl SpinReversalMask {
    pub fn all_false(len: usize) -> Self {
        SpinReversalMask { bits: vec![false; len] }
    }

    pub fn all_true(len: usize) -> Self {
        SpinReversalMask { bits: vec![true; len] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        SpinReversalMask { bits }
    }

    /// Indicator of an index set: bits listed in `indices` are true.
    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut bits = vec![false; len];
        for &i in indices {
            assert!(i < len, "mask index {i} out of range (len={len})");
            bits[i] = true;
        }
        SpinReversalMask { bits }
    }

    /// Independent Bernoulli(p_s) draw per bit from a seeded generator.
    pub fn random(len: usize, p_s: f64, rng_seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_s) {
            return Err(Error::invalid(format!("flip probability {p_s} outside [0,1]")));
        }
        let mut rng = seed::rng(rng_seed, Role::MaskBits, &[]);
        let bits = (0..len).map(|_| rng.random::<f64>() < p_s).collect();
        Ok(SpinReversalMask { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of reversed spins.
    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Bitwise XOR; composing two transforms equals applying the XOR mask.
    pub fn xor(&self, other: &SpinReversalMask) -> Result<SpinReversalMask> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: other.len() });
        }
        Ok(SpinReversalMask {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// '1' per reversed bit, variable 0 first.
    pub fn bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(Error::Parse(format!("invalid mask char {other:?}"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Ok(SpinReversalMask { bits })
    }
}

/// The gauge-transformed model H': masked linear weights negated, couplers
/// negated iff exactly one endpoint is masked, offset unchanged.
pub fn apply_spin_reversal(model: &IsingModel, mask: &SpinReversalMask) -> Result<IsingModel> {
    if mask.len() != model.num_vars() {
        return Err(Error::LengthMismatch { expected: model.num_vars(), actual: mask.len() });
    }
    let mut out = IsingModel::new(model.num_vars());
    out.set_offset(model.offset());
    for (i, v) in model.linear_iter() {
        out.set_linear(i, if mask.get(i) { -v } else { v });
    }
    for ((i, j), v) in model.quadratic_iter() {
        let flip = mask.get(i) ^ mask.get(j);
        out.set_quadratic(i, j, if flip { -v } else { v });
    }
    Ok(out)
}

/// Maps a state between the original and gauged frames: masked entries are
/// negated. The map is its own inverse.
pub fn transform_state(state: &SpinState, mask: &SpinReversalMask) -> Result<SpinState> {
    if state.domain() != VarDomain::Spin {
        return Err(Error::DomainMismatch(
            "spin reversal acts on Ising (spin) states".to_string(),
        ));
    }
    if mask.len() != state.len() {
        return Err(Error::LengthMismatch { expected: state.len(), actual: mask.len() });
    }
    let values = state
        .values()
        .iter()
        .enumerate()
        .map(|(i, &s)| if mask.get(i) { -s } else { s })
        .collect();
    Ok(SpinState::from_values_unchecked(values, VarDomain::Spin))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_model() -> IsingModel {
        let mut m = IsingModel::new(2);
        m.set_linear(0, 1.0);
        m.set_linear(1, 1.0);
        m.set_quadratic(0, 1, 1.0);
        m
    }

    #[test]
    fn empty_mask_is_identity() {
        let m = sample_model();
        let out = apply_spin_reversal(&m, &SpinReversalMask::all_false(2)).unwrap();
        assert_eq!(m, out);
        let s = SpinState::spins(vec![1, -1]).unwrap();
        assert_eq!(transform_state(&s, &SpinReversalMask::all_false(2)).unwrap(), s);
    }

    #[test]
    fn single_flip_negates_incident_terms() {
        let m = sample_model();
        let mask = SpinReversalMask::from_indices(2, &[0]);
        let out = apply_spin_reversal(&m, &mask).unwrap();
        assert_eq!(out.linear(0), -1.0);
        assert_eq!(out.linear(1), 1.0);
        assert_eq!(out.quadratic(0, 1), -1.0);
    }

    #[test]
    fn all_true_mask_preserves_couplers() {
        let m = sample_model();
        let out = apply_spin_reversal(&m, &SpinReversalMask::all_true(2)).unwrap();
        assert_eq!(out.linear(0), -1.0);
        assert_eq!(out.linear(1), -1.0);
        assert_eq!(out.quadratic(0, 1), 1.0);
    }

    #[test]
    fn state_transform_flips_masked_entries() {
        let s = SpinState::spins(vec![1, -1]).unwrap();
        let mask = SpinReversalMask::from_indices(2, &[0]);
        let t = transform_state(&s, &mask).unwrap();
        assert_eq!(t.values(), &[-1, -1]);
    }

    #[test]
    fn gauge_invariance_of_energy() {
        let m = sample_model();
        let mask = SpinReversalMask::from_indices(2, &[1]);
        let gauged = apply_spin_reversal(&m, &mask).unwrap();
        for idx in 0..4u64 {
            let s = SpinState::from_index(idx, 2, VarDomain::Spin);
            let t = transform_state(&s, &mask).unwrap();
            assert_eq!(m.energy(&s).unwrap(), gauged.energy(&t).unwrap());
        }
    }

    #[test]
    fn transform_rejects_mismatches() {
        let s = SpinState::spins(vec![1, -1]).unwrap();
        assert!(transform_state(&s, &SpinReversalMask::all_false(3)).is_err());
        let b = SpinState::bits(vec![0, 1]).unwrap();
        assert!(transform_state(&b, &SpinReversalMask::all_false(2)).is_err());
        let m = sample_model();
        assert!(apply_spin_reversal(&m, &SpinReversalMask::all_false(5)).is_err());
    }

    #[test]
    fn random_mask_probability_extremes() {
        let zero = SpinReversalMask::random(64, 0.0, 1).unwrap();
        assert_eq!(zero.popcount(), 0);
        let one = SpinReversalMask::random(64, 1.0, 1).unwrap();
        assert_eq!(one.popcount(), 64);
        assert!(SpinReversalMask::random(8, 1.5, 1).is_err());
    }

    #[test]
    fn random_mask_popcount_statistics() {
        // popcount within 4 sigma of n/2 over 100 seeds at p = 0.5
        let len = 2048;
        let sigma = (len as f64 * 0.25).sqrt();
        for s in 0..100u64 {
            let mask = SpinReversalMask::random(len, 0.5, s).unwrap();
            let dev = (mask.popcount() as f64 - 1024.0).abs();
            assert!(dev < 4.0 * sigma, "seed {s}: popcount {}", mask.popcount());
        }
    }

    #[test]
    fn random_mask_is_seed_deterministic() {
        let a = SpinReversalMask::random(128, 0.3, 42).unwrap();
        let b = SpinReversalMask::random(128, 0.3, 42).unwrap();
        assert_eq!(a, b);
    }
}
