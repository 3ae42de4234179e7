//! Sparse Ising and QUBO models.
//!
//! Both forms share the energy function
//!
//!   H(x_1, …, x_n) = offset + Σ_i a_i x_i + Σ_{i<j} a_ij x_i x_j
//!
//! differing only in the variable domain: spins x_i ∈ {-1, +1} for Ising,
//! bits x_i ∈ {0, 1} for QUBO. Coefficient maps are sparse with canonical
//! `i < j` coupler keys; absent entries are exactly zero. Zero-valued
//! insertions remove the entry so structurally equal models compare equal.
//!
//! Coefficient maps are ordered, so energy sums run in a fixed term order
//! and repeated evaluations are bit-identical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variable domain tag: spins {-1,+1} or bits {0,1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarDomain {
    Spin,
    Binary,
}

/// Assignment of all `n` variables, tagged with its domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinState {
    domain: VarDomain,
    values: Vec<i8>,
}

impl SpinState {
    /// Spin-valued state; every entry must be -1 or +1.
    pub fn spins(values: Vec<i8>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| **v != -1 && **v != 1) {
            return Err(Error::DomainMismatch(format!(
                "spin state entries must be -1 or +1, found {v}"
            )));
        }
        Ok(SpinState { domain: VarDomain::Spin, values })
    }

    /// Binary-valued state; every entry must be 0 or 1.
    pub fn bits(values: Vec<i8>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| **v != 0 && **v != 1) {
            return Err(Error::DomainMismatch(format!(
                "binary state entries must be 0 or 1, found {v}"
            )));
        }
        Ok(SpinState { domain: VarDomain::Binary, values })
    }

    /// State number `index` (bit k of `index` drives variable k: set bit
    /// means +1 / 1, clear bit means -1 / 0).
    pub fn from_index(index: u64, n: usize, domain: VarDomain) -> Self {
        let up: i8 = 1;
        let down: i8 = match domain {
            VarDomain::Spin => -1,
            VarDomain::Binary => 0,
        };
        let values = (0..n)
            .map(|k| if (index >> k) & 1 == 1 { up } else { down })
            .collect();
        SpinState { domain, values }
    }

    pub fn domain(&self) -> VarDomain {
        self.domain
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Map spins to bits via x = (s+1)/2; binary states pass through.
    pub fn to_binary(&self) -> SpinState {
        match self.domain {
            VarDomain::Binary => self.clone(),
            VarDomain::Spin => SpinState {
                domain: VarDomain::Binary,
                values: self.values.iter().map(|&s| (s + 1) / 2).collect(),
            },
        }
    }

    /// Map bits to spins via s = 2x-1; spin states pass through.
    pub fn to_spin(&self) -> SpinState {
        match self.domain {
            VarDomain::Spin => self.clone(),
            VarDomain::Binary => SpinState {
                domain: VarDomain::Spin,
                values: self.values.iter().map(|&x| 2 * x - 1).collect(),
            },
        }
    }

    /// '1' for +1/1, '0' for -1/0, variable 0 first.
    pub fn bitstring(&self) -> String {
        self.values
            .iter()
            .map(|&v| if v > 0 { '1' } else { '0' })
            .collect()
    }

    /// Inverse of [`SpinState::bitstring`].
    pub fn from_bitstring(s: &str, domain: VarDomain) -> Result<Self> {
        let down: i8 = match domain {
            VarDomain::Spin => -1,
            VarDomain::Binary => 0,
        };
        let values = s
            .chars()
            .map(|c| match c {
                '1' => Ok(1),
                '0' => Ok(down),
                other => Err(Error::Parse(format!("invalid bitstring char {other:?}"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Ok(SpinState { domain, values })
    }

    pub(crate) fn from_values_unchecked(values: Vec<i8>, domain: VarDomain) -> Self {
        SpinState { domain, values }
    }
}

/// Exhaustive search refuses instances above this variable count.
pub const BRUTE_FORCE_LIMIT: usize = 24;

macro_rules! quadratic_model_impl {
    ($name:ident, $domain:expr, $tag:literal) => {
        impl $name {
            /// The `kind` tag in the JSON document.
            pub const KIND: &'static str = $tag;

            /// Zero model over `n` variables.
            pub fn new(n: usize) -> Self {
                Self {
                    n,
                    linear: BTreeMap::new(),
                    quadratic: BTreeMap::new(),
                    offset: 0.0,
                }
            }

            pub fn num_vars(&self) -> usize {
                self.n
            }

            pub fn domain(&self) -> VarDomain {
                $domain
            }

            pub fn offset(&self) -> f64 {
                self.offset
            }

            pub fn set_offset(&mut self, offset: f64) {
                self.offset = offset;
            }

            /// Linear weight of variable `i` (zero when absent).
            pub fn linear(&self, i: usize) -> f64 {
                assert!(i < self.n, "variable index {i} out of range (n={})", self.n);
                self.linear.get(&i).copied().unwrap_or(0.0)
            }

            /// Coupler weight of pair `{i, j}` in either order (zero when absent).
            pub fn quadratic(&self, i: usize, j: usize) -> f64 {
                let key = canonical_pair(i, j, self.n);
                self.quadratic.get(&key).copied().unwrap_or(0.0)
            }

            /// Sets a_i; a zero value removes the entry.
            pub fn set_linear(&mut self, i: usize, value: f64) {
                assert!(i < self.n, "variable index {i} out of range (n={})", self.n);
                if value == 0.0 {
                    self.linear.remove(&i);
                } else {
                    self.linear.insert(i, value);
                }
            }

            /// Sets a_ij (order-insensitive); a zero value removes the entry.
            pub fn set_quadratic(&mut self, i: usize, j: usize, value: f64) {
                let key = canonical_pair(i, j, self.n);
                if value == 0.0 {
                    self.quadratic.remove(&key);
                } else {
                    self.quadratic.insert(key, value);
                }
            }

            /// Adds to a_i in place.
            pub fn add_linear(&mut self, i: usize, value: f64) {
                let updated = self.linear(i) + value;
                self.set_linear(i, updated);
            }

            /// Adds to a_ij in place.
            pub fn add_quadratic(&mut self, i: usize, j: usize, value: f64) {
                let updated = self.quadratic(i, j) + value;
                self.set_quadratic(i, j, updated);
            }

            /// Nonzero linear terms in index order.
            pub fn linear_iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
                self.linear.iter().map(|(&i, &v)| (i, v))
            }

            /// Nonzero couplers in canonical key order.
            pub fn quadratic_iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
                self.quadratic.iter().map(|(&k, &v)| (k, v))
            }

            pub fn num_linear_terms(&self) -> usize {
                self.linear.len()
            }

            pub fn num_quadratic_terms(&self) -> usize {
                self.quadratic.len()
            }

            pub fn max_abs_linear(&self) -> f64 {
                self.linear.values().fold(0.0, |m: f64, v| m.max(v.abs()))
            }

            pub fn max_abs_quadratic(&self) -> f64 {
                self.quadratic.values().fold(0.0, |m: f64, v| m.max(v.abs()))
            }

            /// Largest coefficient magnitude across both classes.
            pub fn max_abs_coefficient(&self) -> f64 {
                self.max_abs_linear().max(self.max_abs_quadratic())
            }

            /// offset + Σ a_i x_i + Σ_{i<j} a_ij x_i x_j for a matching state.
            pub fn energy(&self, state: &SpinState) -> Result<f64> {
                if state.domain() != self.domain() {
                    return Err(Error::DomainMismatch(format!(
                        "{:?} state evaluated against {:?} model",
                        state.domain(),
                        self.domain()
                    )));
                }
                if state.len() != self.n {
                    return Err(Error::LengthMismatch {
                        expected: self.n,
                        actual: state.len(),
                    });
                }
                Ok(eval_terms(&self.linear, &self.quadratic, self.offset, state.values()))
            }

            /// Exact minimum energy and every attaining state, by exhaustive
            /// enumeration of all 2^n assignments. Refuses n > 24.
            pub fn brute_force_ground_state(&self) -> Result<(f64, Vec<SpinState>)> {
                brute_force(self.n, &self.linear, &self.quadratic, self.offset, $domain, false)
            }

            /// Sequential reference path of [`Self::brute_force_ground_state`].
            pub fn brute_force_ground_state_sequential(&self) -> Result<(f64, Vec<SpinState>)> {
                brute_force(self.n, &self.linear, &self.quadratic, self.offset, $domain, true)
            }

            /// Serializes to the model JSON document.
            pub fn to_json(&self) -> String {
                ModelJson::from_parts(Self::KIND, self.n, &self.linear, &self.quadratic, self.offset, None)
                    .to_string()
            }

            /// Serializes with an attached metadata object.
            pub fn to_json_with(&self, metadata: serde_json::Value) -> String {
                ModelJson::from_parts(
                    Self::KIND,
                    self.n,
                    &self.linear,
                    &self.quadratic,
                    self.offset,
                    Some(metadata),
                )
                .to_string()
            }

            /// Parses the model JSON document, validating kind and indices.
            pub fn from_json(json: &str) -> Result<Self> {
                let doc: ModelJson = serde_json::from_str(json)?;
                if doc.kind != Self::KIND {
                    return Err(Error::Parse(format!(
                        "expected kind {:?}, found {:?}",
                        Self::KIND,
                        doc.kind
                    )));
                }
                let (n, linear, quadratic, offset, _) = doc.into_parts()?;
                Ok(Self { n, linear, quadratic, offset })
            }
        }
    };
}

/// Ising model: spins in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IsingModel {
    n: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

/// QUBO model: bits in {0, 1}.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuboModel {
    n: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

quadratic_model_impl!(IsingModel, VarDomain::Spin, "ising");
quadratic_model_impl!(QuboModel, VarDomain::Binary, "qubo");

impl IsingModel {
    /// Equivalent QUBO under s = 2x - 1; energies match pointwise.
    pub fn to_qubo(&self) -> QuboModel {
        let mut q = QuboModel::new(self.n);
        let mut offset = self.offset;
        for (i, h) in self.linear_iter() {
            // h s = 2h x - h
            q.add_linear(i, 2.0 * h);
            offset -= h;
        }
        for ((i, j), w) in self.quadratic_iter() {
            // w s_i s_j = 4w x_i x_j - 2w x_i - 2w x_j + w
            q.add_quadratic(i, j, 4.0 * w);
            q.add_linear(i, -2.0 * w);
            q.add_linear(j, -2.0 * w);
            offset += w;
        }
        q.set_offset(offset);
        q
    }

    /// Uniform rescale into a_i ∈ [-2,2], a_ij ∈ [-1,1].
    ///
    /// Returns the scaled model and the single positive scale
    /// s = min(2/max|a_i|, 1/max|a_ij|, 1); models already inside the ranges
    /// are returned unchanged with s = 1. The offset scales too, so the
    /// argmin set of the energy is preserved.
    pub fn rescaled(&self) -> (IsingModel, f64) {
        let max_lin = self.max_abs_linear();
        let max_quad = self.max_abs_quadratic();
        let mut scale = 1.0f64;
        if max_lin > 0.0 {
            scale = scale.min(2.0 / max_lin);
        }
        if max_quad > 0.0 {
            scale = scale.min(1.0 / max_quad);
        }
        if scale == 1.0 {
            return (self.clone(), 1.0);
        }
        let mut out = IsingModel::new(self.n);
        for (i, v) in self.linear_iter() {
            out.set_linear(i, v * scale);
        }
        for ((i, j), v) in self.quadratic_iter() {
            out.set_quadratic(i, j, v * scale);
        }
        out.set_offset(self.offset * scale);
        (out, scale)
    }
}

impl QuboModel {
    /// Equivalent Ising model under x = (s+1)/2; energies match pointwise.
    pub fn to_ising(&self) -> IsingModel {
        let mut m = IsingModel::new(self.n);
        let mut offset = self.offset;
        for (i, a) in self.linear_iter() {
            // a x = a/2 s + a/2
            m.add_linear(i, a / 2.0);
            offset += a / 2.0;
        }
        for ((i, j), w) in self.quadratic_iter() {
            // w x_i x_j = w/4 (s_i s_j + s_i + s_j + 1)
            m.add_quadratic(i, j, w / 4.0);
            m.add_linear(i, w / 4.0);
            m.add_linear(j, w / 4.0);
            offset += w / 4.0;
        }
        m.set_offset(offset);
        m
    }
}

/// A model of either kind, as read from a JSON document.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Ising(IsingModel),
    Qubo(QuboModel),
}

impl AnyModel {
    pub fn num_vars(&self) -> usize {
        match self {
            AnyModel::Ising(m) => m.num_vars(),
            AnyModel::Qubo(q) => q.num_vars(),
        }
    }

    /// View as Ising, converting a QUBO if necessary.
    pub fn into_ising(self) -> IsingModel {
        match self {
            AnyModel::Ising(m) => m,
            AnyModel::Qubo(q) => q.to_ising(),
        }
    }
}

/// Reads a model JSON document of either kind plus its metadata block.
pub fn read_model(json: &str) -> Result<(AnyModel, Option<serde_json::Value>)> {
    let doc: ModelJson = serde_json::from_str(json)?;
    let kind = doc.kind.clone();
    let (n, linear, quadratic, offset, metadata) = doc.into_parts()?;
    let model = match kind.as_str() {
        "ising" => AnyModel::Ising(IsingModel { n, linear, quadratic, offset }),
        "qubo" => AnyModel::Qubo(QuboModel { n, linear, quadratic, offset }),
        other => return Err(Error::Parse(format!("unknown model kind {other:?}"))),
    };
    Ok((model, metadata))
}

fn canonical_pair(i: usize, j: usize, n: usize) -> (usize, usize) {
    assert!(i != j, "self-pair ({i},{i}) is not a valid coupler");
    assert!(i < n && j < n, "coupler ({i},{j}) out of range (n={n})");
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

fn eval_terms(
    linear: &BTreeMap<usize, f64>,
    quadratic: &BTreeMap<(usize, usize), f64>,
    offset: f64,
    values: &[i8],
) -> f64 {
    let mut e = offset;
    for (&i, &a) in linear {
        e += a * f64::from(values[i]);
    }
    for (&(i, j), &w) in quadratic {
        e += w * f64::from(values[i]) * f64::from(values[j]);
    }
    e
}

fn brute_force(
    n: usize,
    linear: &BTreeMap<usize, f64>,
    quadratic: &BTreeMap<(usize, usize), f64>,
    offset: f64,
    domain: VarDomain,
    force_sequential: bool,
) -> Result<(f64, Vec<SpinState>)> {
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { size: n, limit: BRUTE_FORCE_LIMIT });
    }
    if n == 0 {
        return Err(Error::invalid("cannot enumerate a model with zero variables"));
    }
    let total: u64 = 1 << n;

    // Dense views for the hot loop.
    let mut lin = vec![0.0f64; n];
    for (&i, &v) in linear {
        lin[i] = v;
    }
    let pairs: Vec<(usize, usize, f64)> =
        quadratic.iter().map(|(&(i, j), &v)| (i, j, v)).collect();
    let down: f64 = match domain {
        VarDomain::Spin => -1.0,
        VarDomain::Binary => 0.0,
    };

    let chunk_size: u64 = 1 << 16;
    let chunks = total.div_ceil(chunk_size) as usize;
    let scan_chunk = |c: usize| -> (f64, Vec<u64>) {
        let lo = c as u64 * chunk_size;
        let hi = (lo + chunk_size).min(total);
        let mut best = f64::INFINITY;
        let mut arg: Vec<u64> = Vec::new();
        let mut values = vec![0.0f64; n];
        for idx in lo..hi {
            for (k, v) in values.iter_mut().enumerate() {
                *v = if (idx >> k) & 1 == 1 { 1.0 } else { down };
            }
            let mut e = offset;
            for k in 0..n {
                e += lin[k] * values[k];
            }
            for &(i, j, w) in &pairs {
                e += w * values[i] * values[j];
            }
            if e < best {
                best = e;
                arg.clear();
                arg.push(idx);
            } else if e == best {
                arg.push(idx);
            }
        }
        (best, arg)
    };

    let per_chunk = if force_sequential {
        crate::exec::map_indexed_seq(chunks, scan_chunk)
    } else {
        crate::exec::map_indexed(chunks, scan_chunk)
    };

    let mut best = f64::INFINITY;
    for (chunk_best, _) in &per_chunk {
        if *chunk_best < best {
            best = *chunk_best;
        }
    }
    let mut states = Vec::new();
    for (chunk_best, arg) in &per_chunk {
        if *chunk_best == best {
            states.extend(arg.iter().map(|&idx| SpinState::from_index(idx, n, domain)));
        }
    }
    Ok((best, states))
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    kind: String,
    n: usize,
    linear: BTreeMap<String, f64>,
    quadratic: BTreeMap<String, f64>,
    offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

impl ModelJson {
    fn from_parts(
        kind: &str,
        n: usize,
        linear: &BTreeMap<usize, f64>,
        quadratic: &BTreeMap<(usize, usize), f64>,
        offset: f64,
        metadata: Option<serde_json::Value>,
    ) -> Self {
        ModelJson {
            kind: kind.to_string(),
            n,
            linear: linear.iter().map(|(i, &v)| (i.to_string(), v)).collect(),
            quadratic: quadratic
                .iter()
                .map(|(&(i, j), &v)| (format!("{i},{j}"), v))
                .collect(),
            offset,
            metadata,
        }
    }

    #[allow(clippy::type_complexity)]
    fn into_parts(
        self,
    ) -> Result<(
        usize,
        BTreeMap<usize, f64>,
        BTreeMap<(usize, usize), f64>,
        f64,
        Option<serde_json::Value>,
    )> {
        let n = self.n;
        let mut linear = BTreeMap::new();
        for (key, v) in self.linear {
            let i: usize = key
                .parse()
                .map_err(|_| Error::Parse(format!("bad linear key {key:?}")))?;
            if i >= n {
                return Err(Error::Parse(format!("linear index {i} out of range (n={n})")));
            }
            if v != 0.0 {
                linear.insert(i, v);
            }
        }
        let mut quadratic = BTreeMap::new();
        for (key, v) in self.quadratic {
            let (a, b) = key
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad quadratic key {key:?}")))?;
            let i: usize = a
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad quadratic key {key:?}")))?;
            let j: usize = b
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad quadratic key {key:?}")))?;
            if i == j {
                return Err(Error::Parse(format!("self-pair key {key:?}")));
            }
            if i >= n || j >= n {
                return Err(Error::Parse(format!(
                    "quadratic index ({i},{j}) out of range (n={n})"
                )));
            }
            let pair = if i < j { (i, j) } else { (j, i) };
            if quadratic.contains_key(&pair) {
                return Err(Error::Parse(format!("duplicate coupler key for pair {pair:?}")));
            }
            if v != 0.0 {
                quadratic.insert(pair, v);
            }
        }
        Ok((n, linear, quadratic, self.offset, self.metadata))
    }
}

impl std::fmt::Display for ModelJson {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", serde_json::to_string_pretty(self).expect("model serialization"))
    }
}
