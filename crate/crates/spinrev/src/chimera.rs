//! Chimera topologies, complete-graph chain embeddings, and the
//! logical ↔ physical correspondence.
//!
//! A Chimera graph is an M×N grid of K_{t,t} unit cells. Qubit ids are
//! cell-major: `id = ((row·N)+col)·2t + side·t + k` with side 0 qubits
//! coupling vertically between adjacent rows and side 1 qubits coupling
//! horizontally between adjacent columns (same shore index k in both
//! cases); within a cell the two shores are completely connected.
//!
//! Complete graphs embed via the triangle construction: variable v = c·t+k
//! occupies the side-1 qubits of row c up to the diagonal plus the side-0
//! qubits of column c from the diagonal down, giving ceil(n/t)+1 qubits
//! per chain and a bridging coupler for every variable pair.
//!
//! Physical models and states use the *compact frame*: in-use qubits
//! (the union of all chains) sorted by dense id and re-indexed from 0.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::SpinReversalMask;
use crate::model::{IsingModel, SpinState, VarDomain};
use crate::seed::{self, Role};

/// M×N grid of K_{t,t} cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChimeraTopology {
    rows: usize,
    cols: usize,
    shore: usize,
}

impl ChimeraTopology {
    pub fn new(rows: usize, cols: usize, shore: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || shore == 0 {
            return Err(Error::invalid(format!(
                "chimera dimensions must be positive, got {rows}x{cols} shore {shore}"
            )));
        }
        Ok(ChimeraTopology { rows, cols, shore })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shore(&self) -> usize {
        self.shore
    }

    pub fn qubit_count(&self) -> usize {
        self.rows * self.cols * 2 * self.shore
    }

    /// Dense qubit id for (row, col, side, k); side 0 is the vertical
    /// shore, side 1 the horizontal one.
    pub fn qubit_id(&self, row: usize, col: usize, side: usize, k: usize) -> usize {
        debug_assert!(row < self.rows && col < self.cols && side < 2 && k < self.shore);
        ((row * self.cols) + col) * 2 * self.shore + side * self.shore + k
    }

    /// Inverse of [`Self::qubit_id`].
    pub fn coords(&self, id: usize) -> (usize, usize, usize, usize) {
        let per_cell = 2 * self.shore;
        let cell = id / per_cell;
        let within = id % per_cell;
        (cell / self.cols, cell % self.cols, within / self.shore, within % self.shore)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a == b || a >= self.qubit_count() || b >= self.qubit_count() {
            return false;
        }
        let (ra, ca, sa, ka) = self.coords(a);
        let (rb, cb, sb, kb) = self.coords(b);
        if ra == rb && ca == cb {
            return sa != sb;
        }
        if sa != sb || ka != kb {
            return false;
        }
        match sa {
            0 => ca == cb && ra.abs_diff(rb) == 1,
            _ => ra == rb && ca.abs_diff(cb) == 1,
        }
    }

    /// All couplers, canonical (low id, high id), ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let t = self.shore;
        let mut edges = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                for k0 in 0..t {
                    for k1 in 0..t {
                        edges.push((self.qubit_id(r, c, 0, k0), self.qubit_id(r, c, 1, k1)));
                    }
                }
                if r + 1 < self.rows {
                    for k in 0..t {
                        edges.push((self.qubit_id(r, c, 0, k), self.qubit_id(r + 1, c, 0, k)));
                    }
                }
                if c + 1 < self.cols {
                    for k in 0..t {
                        edges.push((self.qubit_id(r, c, 1, k), self.qubit_id(r, c + 1, 1, k)));
                    }
                }
            }
        }
        edges.iter_mut().for_each(|e| {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        });
        edges.sort_unstable();
        edges
    }

    pub fn edge_count(&self) -> usize {
        let t = self.shore;
        self.rows * self.cols * t * t
            + (self.rows - 1) * self.cols * t
            + self.rows * (self.cols - 1) * t
    }

    fn neighbors(&self, id: usize) -> Vec<usize> {
        let (r, c, side, k) = self.coords(id);
        let mut out: Vec<usize> = (0..self.shore).map(|kk| self.qubit_id(r, c, 1 - side, kk)).collect();
        if side == 0 {
            if r > 0 {
                out.push(self.qubit_id(r - 1, c, 0, k));
            }
            if r + 1 < self.rows {
                out.push(self.qubit_id(r + 1, c, 0, k));
            }
        } else {
            if c > 0 {
                out.push(self.qubit_id(r, c - 1, 1, k));
            }
            if c + 1 < self.cols {
                out.push(self.qubit_id(r, c + 1, 1, k));
            }
        }
        out
    }
}

/// Logical variable → ordered chain of physical qubit ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    chains: Vec<Vec<usize>>,
}

impl Embedding {
    pub fn new(chains: Vec<Vec<usize>>) -> Self {
        Embedding { chains }
    }

    /// Chains of length 1 mapping variable i to qubit i.
    pub fn identity(n: usize) -> Self {
        Embedding { chains: (0..n).map(|i| vec![i]).collect() }
    }

    pub fn num_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn chain(&self, i: usize) -> &[usize] {
        &self.chains[i]
    }

    pub fn chains(&self) -> &[Vec<usize>] {
        &self.chains
    }

    pub fn max_chain_length(&self) -> usize {
        self.chains.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// In-use qubits: sorted union of all chains. The position of a qubit
    /// in this list is its compact index.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.chains.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Structural validity: nonempty pairwise-disjoint chains of valid
    /// qubit ids, each inducing a connected subgraph of the topology.
    pub fn validate(&self, topo: &ChimeraTopology) -> Result<()> {
        let mut seen = BTreeMap::new();
        for (i, chain) in self.chains.iter().enumerate() {
            if chain.is_empty() {
                return Err(Error::EmbeddingInvalid(format!("chain {i} is empty")));
            }
            for &q in chain {
                if q >= topo.qubit_count() {
                    return Err(Error::EmbeddingInvalid(format!(
                        "chain {i} uses qubit {q} outside the topology"
                    )));
                }
                if let Some(other) = seen.insert(q, i) {
                    return Err(Error::EmbeddingInvalid(format!(
                        "qubit {q} shared by chains {other} and {i}"
                    )));
                }
            }
            // connectivity by BFS within the chain's qubit set
            let set: Vec<usize> = chain.clone();
            let mut reached = vec![false; set.len()];
            let mut queue = vec![0usize];
            reached[0] = true;
            while let Some(pos) = queue.pop() {
                for n in topo.neighbors(set[pos]) {
                    if let Some(j) = set.iter().position(|&q| q == n) {
                        if !reached[j] {
                            reached[j] = true;
                            queue.push(j);
                        }
                    }
                }
            }
            if reached.iter().any(|r| !r) {
                return Err(Error::EmbeddingInvalid(format!("chain {i} is disconnected")));
            }
        }
        Ok(())
    }

    /// Validity for a concrete model: structure plus a bridging physical
    /// edge for every nonzero logical coupler.
    pub fn validate_for_model(&self, topo: &ChimeraTopology, model: &IsingModel) -> Result<()> {
        self.validate(topo)?;
        if model.num_vars() != self.num_chains() {
            return Err(Error::LengthMismatch {
                expected: self.num_chains(),
                actual: model.num_vars(),
            });
        }
        for ((i, j), _) in model.quadratic_iter() {
            if bridging_edge(topo, self.chain(i), self.chain(j)).is_none() {
                return Err(Error::EmbeddingInvalid(format!(
                    "no physical edge bridges chains {i} and {j}"
                )));
            }
        }
        Ok(())
    }

    /// JSON object mapping logical index to its qubit id list.
    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, &Vec<usize>> =
            self.chains.iter().enumerate().map(|(i, c)| (i.to_string(), c)).collect();
        serde_json::to_string_pretty(&map).expect("embedding serialization")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let map: BTreeMap<String, Vec<usize>> = serde_json::from_str(json)?;
        let mut chains = vec![Vec::new(); map.len()];
        for (key, chain) in map {
            let i: usize =
                key.parse().map_err(|_| Error::Parse(format!("bad chain key {key:?}")))?;
            if i >= chains.len() {
                return Err(Error::Parse(format!(
                    "chain keys must be 0..{}, found {i}",
                    chains.len()
                )));
            }
            chains[i] = chain;
        }
        Ok(Embedding { chains })
    }
}

/// Lexicographically smallest physical edge between two chains, if any.
fn bridging_edge(topo: &ChimeraTopology, a: &[usize], b: &[usize]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for &p in a {
        for &q in b {
            if topo.has_edge(p, q) {
                let e = (p.min(q), p.max(q));
                if best.is_none_or(|cur| e < cur) {
                    best = Some(e);
                }
            }
        }
    }
    best
}

/// Embeds the complete graph K_k by the triangle construction.
///
/// Capacity is k ≤ t·min(M,N); chains have length ceil(k/t)+1 (length 1
/// for the trivial k = 1).
pub fn embed_complete(k: usize, topo: &ChimeraTopology) -> Result<Embedding> {
    let capacity = topo.shore() * topo.rows().min(topo.cols());
    if k == 0 {
        return Err(Error::invalid("cannot embed the empty graph"));
    }
    if k > capacity {
        return Err(Error::Capacity { requested: k, capacity });
    }
    if k == 1 {
        return Ok(Embedding::new(vec![vec![topo.qubit_id(0, 0, 0, 0)]]));
    }
    let t = topo.shore();
    let blocks = k.div_ceil(t);
    let mut chains = Vec::with_capacity(k);
    for v in 0..k {
        let c = v / t;
        let kk = v % t;
        let mut chain = Vec::with_capacity(blocks + 1);
        // horizontal arm: row c, side 1, columns 0..=c
        for col in 0..=c {
            chain.push(topo.qubit_id(c, col, 1, kk));
        }
        // vertical arm: column c, side 0, rows c..blocks
        for row in c..blocks {
            chain.push(topo.qubit_id(row, c, 0, kk));
        }
        chains.push(chain);
    }
    Ok(Embedding::new(chains))
}

/// An embedded Ising model in the compact physical frame, with its
/// provenance.
#[derive(Debug, Clone)]
pub struct PhysicalIsing {
    model: IsingModel,
    qubit_ids: Vec<usize>,
    embedding: Embedding,
    chain_strength: f64,
    logical: IsingModel,
}

impl PhysicalIsing {
    /// The embedded model over compact indices 0..active_qubits.
    pub fn model(&self) -> &IsingModel {
        &self.model
    }

    /// Dense topology qubit id for each compact index.
    pub fn qubit_ids(&self) -> &[usize] {
        &self.qubit_ids
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn chain_strength(&self) -> f64 {
        self.chain_strength
    }

    pub fn logical(&self) -> &IsingModel {
        &self.logical
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_ids.len()
    }
}

/// Default binding strength: twice the largest logical coefficient.
pub fn default_chain_strength(logical: &IsingModel) -> f64 {
    2.0 * logical.max_abs_coefficient()
}

/// Expands a logical model onto an embedding: linear weights split equally
/// across chain qubits, each logical coupler placed on its lowest-id
/// bridging edge, chain-internal topology edges set to -chain_strength,
/// offset copied.
pub fn embed_model(
    logical: &IsingModel,
    emb: &Embedding,
    topo: &ChimeraTopology,
    chain_strength: f64,
) -> Result<PhysicalIsing> {
    emb.validate(topo)?;
    if logical.num_vars() != emb.num_chains() {
        return Err(Error::LengthMismatch {
            expected: emb.num_chains(),
            actual: logical.num_vars(),
        });
    }
    let qubit_ids = emb.active_qubits();
    let compact: BTreeMap<usize, usize> =
        qubit_ids.iter().enumerate().map(|(pos, &q)| (q, pos)).collect();
    let mut model = IsingModel::new(qubit_ids.len());
    model.set_offset(logical.offset());

    for (i, weight) in logical.linear_iter() {
        let chain = emb.chain(i);
        let share = weight / chain.len() as f64;
        for &q in chain {
            model.add_linear(compact[&q], share);
        }
    }
    for ((i, j), weight) in logical.quadratic_iter() {
        let (p, q) = bridging_edge(topo, emb.chain(i), emb.chain(j)).ok_or_else(|| {
            Error::EmbeddingInvalid(format!("no physical edge bridges chains {i} and {j}"))
        })?;
        model.set_quadratic(compact[&p], compact[&q], weight);
    }
    for chain in emb.chains() {
        for (a_pos, &p) in chain.iter().enumerate() {
            for &q in &chain[a_pos + 1..] {
                if topo.has_edge(p, q) {
                    model.set_quadratic(compact[&p], compact[&q], -chain_strength);
                }
            }
        }
    }
    Ok(PhysicalIsing {
        model,
        qubit_ids,
        embedding: emb.clone(),
        chain_strength,
        logical: logical.clone(),
    })
}

/// Collapses a compact-frame physical state to a logical one by majority
/// vote per chain; exact ties are broken by a fair coin from `tie_seed`.
pub fn unembed(physical_state: &SpinState, emb: &Embedding, tie_seed: u64) -> Result<SpinState> {
    if physical_state.domain() != VarDomain::Spin {
        return Err(Error::DomainMismatch("unembed expects a spin state".to_string()));
    }
    let active = emb.active_qubits();
    if physical_state.len() != active.len() {
        return Err(Error::LengthMismatch {
            expected: active.len(),
            actual: physical_state.len(),
        });
    }
    let compact: BTreeMap<usize, usize> =
        active.iter().enumerate().map(|(pos, &q)| (q, pos)).collect();
    let mut rng = seed::rng(tie_seed, Role::TieBreak, &[]);
    let values = emb
        .chains()
        .iter()
        .map(|chain| {
            let sum: i64 = chain
                .iter()
                .map(|q| i64::from(physical_state.values()[compact[q]]))
                .sum();
            match sum.cmp(&0) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => -1,
                std::cmp::Ordering::Equal => {
                    if rng.random::<bool>() {
                        1
                    } else {
                        -1
                    }
                }
            }
        })
        .collect();
    Ok(SpinState::from_values_unchecked(values, VarDomain::Spin))
}

/// Lifts a logical mask to the compact physical frame: every qubit of
/// chain i carries logical bit i.
pub fn expand_chain_mask(logical_mask: &SpinReversalMask, emb: &Embedding) -> Result<SpinReversalMask> {
    if logical_mask.len() != emb.num_chains() {
        return Err(Error::LengthMismatch {
            expected: emb.num_chains(),
            actual: logical_mask.len(),
        });
    }
    let active = emb.active_qubits();
    let compact: BTreeMap<usize, usize> =
        active.iter().enumerate().map(|(pos, &q)| (q, pos)).collect();
    let mut bits = vec![false; active.len()];
    for (i, chain) in emb.chains().iter().enumerate() {
        if logical_mask.get(i) {
            for q in chain {
                bits[compact[q]] = true;
            }
        }
    }
    Ok(SpinReversalMask::from_bits(bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_counts() {
        let topo = ChimeraTopology::new(1, 1, 4).unwrap();
        assert_eq!(topo.qubit_count(), 8);
        assert_eq!(topo.edge_count(), 16);
        assert_eq!(topo.edges().len(), 16);
    }

    #[test]
    fn dwave_2000q_scale() {
        let topo = ChimeraTopology::new(16, 16, 4).unwrap();
        assert_eq!(topo.qubit_count(), 2048);
    }

    #[test]
    fn two_by_one_counts() {
        let topo = ChimeraTopology::new(2, 1, 4).unwrap();
        assert_eq!(topo.qubit_count(), 16);
        // 2 cells * 16 intra + 4 vertical inter
        assert_eq!(topo.edge_count(), 36);
        let edges = topo.edges();
        assert_eq!(edges.len(), 36);
        for (a, b) in edges {
            assert!(topo.has_edge(a, b));
            assert!(topo.has_edge(b, a));
        }
    }

    #[test]
    fn rejects_zero_dimensions() {
        assert!(ChimeraTopology::new(0, 1, 4).is_err());
        assert!(ChimeraTopology::new(1, 1, 0).is_err());
    }

    #[test]
    fn intra_cell_edges_cross_shores() {
        let topo = ChimeraTopology::new(2, 2, 4).unwrap();
        for (a, b) in topo.edges() {
            let (ra, ca, sa, ka) = topo.coords(a);
            let (rb, cb, sb, kb) = topo.coords(b);
            if (ra, ca) == (rb, cb) {
                assert_ne!(sa, sb);
            } else {
                assert_eq!(sa, sb);
                assert_eq!(ka, kb);
            }
        }
    }

    #[test]
    fn embed_complete_on_single_cell() {
        let topo = ChimeraTopology::new(1, 1, 4).unwrap();
        let emb = embed_complete(4, &topo).unwrap();
        emb.validate(&topo).unwrap();
        assert_eq!(emb.num_chains(), 4);
        for i in 0..4 {
            assert_eq!(emb.chain(i).len(), 2);
        }
        // every pair of chains bridged
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert!(bridging_edge(&topo, emb.chain(i), emb.chain(j)).is_some());
            }
        }
    }

    #[test]
    fn embed_single_variable() {
        let topo = ChimeraTopology::new(1, 1, 4).unwrap();
        let emb = embed_complete(1, &topo).unwrap();
        assert_eq!(emb.num_chains(), 1);
        assert_eq!(emb.chain(0).len(), 1);
    }

    #[test]
    fn embed_k64_on_2000q() {
        let topo = ChimeraTopology::new(16, 16, 4).unwrap();
        let emb = embed_complete(64, &topo).unwrap();
        emb.validate(&topo).unwrap();
        assert_eq!(emb.num_chains(), 64);
        assert_eq!(emb.max_chain_length(), 17);
        let mut complete = IsingModel::new(64);
        for i in 0..64 {
            for j in (i + 1)..64 {
                complete.set_quadratic(i, j, 1.0);
            }
        }
        emb.validate_for_model(&topo, &complete).unwrap();
        assert!(embed_complete(65, &topo).is_err());
    }

    #[test]
    fn embedding_json_round_trip() {
        let topo = ChimeraTopology::new(2, 2, 4).unwrap();
        let emb = embed_complete(6, &topo).unwrap();
        let back = Embedding::from_json(&emb.to_json()).unwrap();
        assert_eq!(emb, back);
    }

    #[test]
    fn validate_catches_overlap_and_disconnection() {
        let topo = ChimeraTopology::new(1, 1, 4).unwrap();
        let overlapping = Embedding::new(vec![vec![0, 4], vec![4, 1]]);
        assert!(overlapping.validate(&topo).is_err());
        // qubits 0 and 1 are both side 0 in the same cell: no edge
        let disconnected = Embedding::new(vec![vec![0, 1]]);
        assert!(disconnected.validate(&topo).is_err());
    }

    #[test]
    fn identity_embedding_preserves_model() {
        let topo = ChimeraTopology::new(1, 1, 1).unwrap();
        // qubit 0 (side 0) and qubit 1 (side 1) with one intra edge
        let emb = Embedding::identity(2);
        let mut logical = IsingModel::new(2);
        logical.set_linear(0, 0.5);
        logical.set_linear(1, -0.25);
        logical.set_quadratic(0, 1, 0.75);
        logical.set_offset(1.0);
        let phys = embed_model(&logical, &emb, &topo, 2.0).unwrap();
        assert_eq!(phys.model(), &logical);
        assert_eq!(phys.qubit_ids(), &[0, 1]);
    }

    #[test]
    fn linear_weight_splits_equally() {
        let topo = ChimeraTopology::new(4, 1, 4).unwrap();
        // one vertical chain of 4 qubits in column 0, shore index 0
        let chain: Vec<usize> = (0..4).map(|r| topo.qubit_id(r, 0, 0, 0)).collect();
        let emb = Embedding::new(vec![chain]);
        let mut logical = IsingModel::new(1);
        logical.set_linear(0, 2.0);
        let phys = embed_model(&logical, &emb, &topo, 1.5).unwrap();
        for idx in 0..4 {
            assert_eq!(phys.model().linear(idx), 0.5);
        }
        // 3 chain-internal couplers at -1.5
        assert_eq!(phys.model().num_quadratic_terms(), 3);
        for ((i, j), v) in phys.model().quadratic_iter() {
            assert_eq!(v, -1.5, "coupler ({i},{j})");
        }
    }

    #[test]
    fn embedding_round_trip_recovers_logical_ground_state() {
        use rand::Rng;
        let topo = ChimeraTopology::new(1, 1, 4).unwrap();
        let mut rng = seed::rng(3, Role::Experiment, &[7]);
        let n = 4;
        let mut logical = IsingModel::new(n);
        for i in 0..n {
            logical.set_linear(i, rng.random_range(-1.0..1.0));
            for j in (i + 1)..n {
                logical.set_quadratic(i, j, rng.random_range(-1.0..1.0));
            }
        }
        let emb = embed_complete(n, &topo).unwrap();
        let strength = default_chain_strength(&logical);
        let phys = embed_model(&logical, &emb, &topo, strength).unwrap();
        assert_eq!(phys.num_qubits(), 8);
        let (logical_min, _) = logical.brute_force_ground_state().unwrap();
        let (_, phys_states) = phys.model().brute_force_ground_state().unwrap();
        for state in &phys_states {
            let decoded = unembed(state, &emb, 0).unwrap();
            let e = logical.energy(&decoded).unwrap();
            assert!((e - logical_min).abs() <= 1e-9, "{e} vs {logical_min}");
        }
    }

    #[test]
    fn unembed_majority_and_errors() {
        let topo = ChimeraTopology::new(3, 1, 1).unwrap();
        // vertical chain of 3 side-0 qubits
        let chain: Vec<usize> = (0..3).map(|r| topo.qubit_id(r, 0, 0, 0)).collect();
        let emb = Embedding::new(vec![chain]);
        let up = SpinState::spins(vec![1, 1, 1]).unwrap();
        assert_eq!(unembed(&up, &emb, 0).unwrap().values(), &[1]);
        let split = SpinState::spins(vec![1, -1, -1]).unwrap();
        assert_eq!(unembed(&split, &emb, 0).unwrap().values(), &[-1]);
        let wrong_len = SpinState::spins(vec![1, 1]).unwrap();
        assert!(unembed(&wrong_len, &emb, 0).is_err());
    }

    #[test]
    fn unembed_tie_break_is_fair() {
        let topo = ChimeraTopology::new(2, 1, 1).unwrap();
        let chain: Vec<usize> = (0..2).map(|r| topo.qubit_id(r, 0, 0, 0)).collect();
        let emb = Embedding::new(vec![chain]);
        let tied = SpinState::spins(vec![1, -1]).unwrap();
        let ups = (0..1000u64)
            .filter(|&s| unembed(&tied, &emb, s).unwrap().values()[0] == 1)
            .count();
        let frequency = ups as f64 / 1000.0;
        assert!((0.45..=0.55).contains(&frequency), "up frequency {frequency}");
    }

    #[test]
    fn expand_chain_mask_covers_whole_chains() {
        let topo = ChimeraTopology::new(2, 2, 4).unwrap();
        let emb = embed_complete(5, &topo).unwrap();
        let all_false = SpinReversalMask::all_false(5);
        assert_eq!(expand_chain_mask(&all_false, &emb).unwrap().popcount(), 0);

        let mask = SpinReversalMask::from_indices(5, &[2]);
        let expanded = expand_chain_mask(&mask, &emb).unwrap();
        assert_eq!(expanded.popcount(), emb.chain(2).len());
        let active = emb.active_qubits();
        for &q in emb.chain(2) {
            let pos = active.iter().position(|&a| a == q).unwrap();
            assert!(expanded.get(pos));
        }
        assert!(expand_chain_mask(&SpinReversalMask::all_false(4), &emb).is_err());
    }

    #[test]
    fn chain_mask_commutes_with_unembed_for_unanimous_chains() {
        let topo = ChimeraTopology::new(2, 2, 4).unwrap();
        let emb = embed_complete(5, &topo).unwrap();
        let logical_mask = SpinReversalMask::from_indices(5, &[0, 3]);
        let expanded = expand_chain_mask(&logical_mask, &emb).unwrap();
        // unanimous physical state: chain i uniformly +1 or -1
        let active = emb.active_qubits();
        let mut values = vec![0i8; active.len()];
        for (i, chain) in emb.chains().iter().enumerate() {
            let v = if i % 2 == 0 { 1 } else { -1 };
            for &q in chain {
                let pos = active.iter().position(|&a| a == q).unwrap();
                values[pos] = v;
            }
        }
        let phys = SpinState::spins(values).unwrap();
        let left = unembed(&crate::gauge::transform_state(&phys, &expanded).unwrap(), &emb, 0).unwrap();
        let right =
            crate::gauge::transform_state(&unembed(&phys, &emb, 0).unwrap(), &logical_mask).unwrap();
        assert_eq!(left, right);
    }
}
