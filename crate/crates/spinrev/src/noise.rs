//! Persistent, gauge-dependent hardware noise.
//!
//! The emulated chip perturbs whatever coefficients are *submitted*. A
//! gauged model H' therefore realizes different effective coefficients
//! than H does — un-gauging realize(H') does not give realize(H) — which
//! breaks the gauge symmetry exactly the way device calibration errors do,
//! and is what makes the choice of reversal mask matter at all.
//!
//! Pipeline of [`realize_noise`]:
//! 1. rescale into a_i ∈ [-2,2], a_ij ∈ [-1,1];
//! 2. quantize each class to 2^dac_bits uniform levels over its range;
//! 3. add persistent per-qubit and per-coupler offsets drawn from the chip
//!    seed (same chip, same offsets across submissions);
//! 4. leak λ·Σ_j J_ij from incident couplers into each linear weight.
//!
//! Fresh per-read noise is applied separately by the sampler.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::model::IsingModel;
use crate::seed::{self, Role};

/// Chip-level error model; all offsets derive deterministically from
/// `chip_seed` and the coefficient's identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Identity of the emulated chip.
    pub chip_seed: u64,
    /// Std-dev of the persistent additive per-qubit linear offset b_i.
    pub bias_sigma: f64,
    /// Std-dev of the persistent additive per-coupler offset c_ij.
    pub coupler_sigma: f64,
    /// Digital-to-analog converter resolution in bits.
    pub dac_bits: u32,
    /// Fraction λ of incident coupler weight leaking into linear weights.
    pub leakage: f64,
    /// Std-dev of the fresh Gaussian perturbation applied per anneal read.
    pub read_sigma: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            chip_seed: 0,
            bias_sigma: 0.02,
            coupler_sigma: 0.01,
            dac_bits: 8,
            leakage: 0.05,
            read_sigma: 0.005,
        }
    }
}

impl NoiseModel {
    /// Noise-free limit: zero sigmas, zero leakage, 53-bit DAC.
    pub fn noiseless() -> Self {
        NoiseModel {
            chip_seed: 0,
            bias_sigma: 0.0,
            coupler_sigma: 0.0,
            dac_bits: 53,
            leakage: 0.0,
            read_sigma: 0.0,
        }
    }

    pub fn with_chip_seed(mut self, chip_seed: u64) -> Self {
        self.chip_seed = chip_seed;
        self
    }

    /// Persistent linear offset b_i of qubit `i`.
    pub fn bias_offset(&self, i: usize) -> f64 {
        if self.bias_sigma == 0.0 {
            return 0.0;
        }
        let g: f64 = seed::rng(self.chip_seed, Role::ChipBias, &[i as u64]).sample(StandardNormal);
        self.bias_sigma * g
    }

    /// Persistent coupler offset c_ij of pair `{i, j}`.
    pub fn coupler_offset(&self, i: usize, j: usize) -> f64 {
        if self.coupler_sigma == 0.0 {
            return 0.0;
        }
        let (lo, hi) = (i.min(j) as u64, i.max(j) as u64);
        let g: f64 = seed::rng(self.chip_seed, Role::ChipCoupler, &[lo, hi]).sample(StandardNormal);
        self.coupler_sigma * g
    }
}

/// Linear weights are converted on a [-2,2] DAC range, couplers on [-1,1].
pub(crate) const LINEAR_RANGE: (f64, f64) = (-2.0, 2.0);
pub(crate) const COUPLER_RANGE: (f64, f64) = (-1.0, 1.0);

/// Nearest of 2^bits uniform levels spanning [lo, hi] (level midpoints, so
/// the step is (hi-lo)/2^bits and the error is at most half a step).
pub(crate) fn quantize(value: f64, lo: f64, hi: f64, bits: u32) -> f64 {
    let count = (bits as f64).exp2();
    let step = (hi - lo) / count;
    let idx = ((value - lo) / step).floor().clamp(0.0, count - 1.0);
    lo + (idx + 0.5) * step
}

/// The coefficients the chip actually realizes for a submitted model.
/// Deterministic in (model, noise); per-read noise is not included.
pub fn realize_noise(model: &IsingModel, noise: &NoiseModel) -> IsingModel {
    let (rescaled, _scale) = model.rescaled();
    let n = rescaled.num_vars();
    let mut out = IsingModel::new(n);
    out.set_offset(rescaled.offset());

    for (i, v) in rescaled.linear_iter() {
        out.set_linear(i, quantize(v, LINEAR_RANGE.0, LINEAR_RANGE.1, noise.dac_bits));
    }
    for ((i, j), v) in rescaled.quadratic_iter() {
        out.set_quadratic(i, j, quantize(v, COUPLER_RANGE.0, COUPLER_RANGE.1, noise.dac_bits));
    }

    if noise.bias_sigma != 0.0 {
        for i in 0..n {
            out.add_linear(i, noise.bias_offset(i));
        }
    }
    if noise.coupler_sigma != 0.0 {
        let pairs: Vec<(usize, usize)> = out.quadratic_iter().map(|(p, _)| p).collect();
        for (i, j) in pairs {
            out.add_quadratic(i, j, noise.coupler_offset(i, j));
        }
    }
    if noise.leakage != 0.0 {
        let mut leak = vec![0.0f64; n];
        for ((i, j), w) in out.quadratic_iter() {
            leak[i] += w;
            leak[j] += w;
        }
        for (i, total) in leak.into_iter().enumerate() {
            if total != 0.0 {
                out.add_linear(i, noise.leakage * total);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{apply_spin_reversal, SpinReversalMask};

    #[test]
    fn quantization_step_at_8_bits() {
        // linear class step 4/256
        let step = 4.0 / 256.0;
        assert_eq!(step, 0.015625);
        let a = quantize(0.0, -2.0, 2.0, 8);
        let b = quantize(0.016, -2.0, 2.0, 8);
        assert!((b - a - step).abs() < 1e-12);
        // error bounded by half a step
        for v in [-2.0, -0.37, 0.0, 1.999, 2.0] {
            let q = quantize(v, -2.0, 2.0, 8);
            assert!((q - v).abs() <= step / 2.0 + 1e-12, "{v} -> {q}");
        }
    }

    #[test]
    fn noiseless_realization_is_rescaled_input() {
        let mut m = IsingModel::new(3);
        m.set_linear(0, 4.0);
        m.set_linear(2, -1.0);
        m.set_quadratic(0, 1, 0.5);
        let realized = realize_noise(&m, &NoiseModel::noiseless());
        let (rescaled, _) = m.rescaled();
        for i in 0..3 {
            assert!((realized.linear(i) - rescaled.linear(i)).abs() <= 1e-9);
        }
        assert!((realized.quadratic(0, 1) - rescaled.quadratic(0, 1)).abs() <= 1e-9);
    }

    #[test]
    fn persistent_offsets_follow_chip_seed() {
        let m = {
            let mut m = IsingModel::new(2);
            m.set_linear(0, 1.0);
            m.set_quadratic(0, 1, 0.5);
            m
        };
        let noise = NoiseModel::default().with_chip_seed(11);
        let a = realize_noise(&m, &noise);
        let b = realize_noise(&m, &noise);
        assert_eq!(a, b);
        let c = realize_noise(&m, &NoiseModel::default().with_chip_seed(12));
        assert_ne!(a, c);
    }

    #[test]
    fn leakage_feeds_couplers_into_linear_weights() {
        let mut m = IsingModel::new(2);
        m.set_linear(0, 1.0);
        m.set_quadratic(0, 1, 0.5);
        let noise = NoiseModel {
            chip_seed: 0,
            bias_sigma: 0.0,
            coupler_sigma: 0.0,
            dac_bits: 53,
            leakage: 0.05,
            read_sigma: 0.0,
        };
        let realized = realize_noise(&m, &noise);
        assert!((realized.linear(0) - (1.0 + 0.05 * 0.5)).abs() <= 1e-9);
        assert!((realized.linear(1) - 0.05 * 0.5).abs() <= 1e-9);
    }

    #[test]
    fn realization_is_gauge_dependent() {
        // leakage makes realize(reverse(H)) differ from reverse(realize(H))
        let mut m = IsingModel::new(2);
        m.set_linear(0, 1.0);
        m.set_quadratic(0, 1, 0.5);
        let noise = NoiseModel {
            chip_seed: 3,
            bias_sigma: 0.0,
            coupler_sigma: 0.0,
            dac_bits: 53,
            leakage: 0.05,
            read_sigma: 0.0,
        };
        let mask = SpinReversalMask::from_indices(2, &[0]);
        let gauged_then_realized = realize_noise(&apply_spin_reversal(&m, &mask).unwrap(), &noise);
        let realized_then_gauged = apply_spin_reversal(&realize_noise(&m, &noise), &mask).unwrap();
        assert_ne!(gauged_then_realized, realized_then_gauged);
        // the leaked contribution to the unmasked qubit flips sign
        assert!(
            (gauged_then_realized.linear(1) + realized_then_gauged.linear(1)).abs() <= 1e-9
        );
    }
}
