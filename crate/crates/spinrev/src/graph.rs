//! Undirected graphs, Erdős–Rényi generation, and QUBO reductions for
//! Maximum Clique and Minimum Vertex Cover.
//!
//! Penalty forms (x_v = 1 means vertex v is selected):
//!
//!   clique:  H(x) = -A Σ_v x_v + B Σ_{(u,v)∉E, u<v} x_u x_v,   B > A > 0
//!   cover:   H(x) =  A Σ_{(u,v)∈E} (1-x_u)(1-x_v) + B Σ_v x_v, A > B > 0
//!
//! With penalty dominance the QUBO minima are exactly the maximum cliques
//! (energy -A·ω(G)) resp. minimum vertex covers (energy B·τ(G)).

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{QuboModel, SpinState};
use crate::seed::{self, Role};

/// Undirected simple graph with vertices 0..vertex_count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    vertex_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(vertex_count: usize) -> Self {
        Graph { vertex_count, edges: BTreeSet::new() }
    }

    /// Complete graph K_n.
    pub fn complete(vertex_count: usize) -> Self {
        let mut g = Graph::new(vertex_count);
        for u in 0..vertex_count {
            for v in (u + 1)..vertex_count {
                g.edges.insert((u, v));
            }
        }
        g
    }

    /// Inserts edge {u, v}; self-loops and out-of-range endpoints are
    /// rejected, duplicates are absorbed by set semantics.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u == v {
            return Err(Error::invalid(format!("self-loop at vertex {u}")));
        }
        if u >= self.vertex_count || v >= self.vertex_count {
            return Err(Error::invalid(format!(
                "edge ({u},{v}) out of range (n={})",
                self.vertex_count
            )));
        }
        self.edges.insert((u.min(v), u.max(v)));
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Edges in canonical (u < v) lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Vertex pairs (u < v) that are NOT edges.
    pub fn non_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertex_count;
        (0..n)
            .flat_map(move |u| ((u + 1)..n).map(move |v| (u, v)))
            .filter(move |&(u, v)| !self.has_edge(u, v))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Adjacency bitmasks; only valid for vertex_count <= 64.
    fn adjacency_masks(&self) -> Vec<u64> {
        let mut adj = vec![0u64; self.vertex_count];
        for &(u, v) in &self.edges {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        adj
    }

    /// Edge-list text: `n` header line, then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.vertex_count);
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty edge list".into()))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad vertex count {header:?}")))?;
        let mut g = Graph::new(n);
        for line in lines {
            let mut it = line.split_whitespace();
            let (u, v) = match (it.next(), it.next(), it.next()) {
                (Some(u), Some(v), None) => (u, v),
                _ => return Err(Error::Parse(format!("bad edge line {line:?}"))),
            };
            let u: usize = u.parse().map_err(|_| Error::Parse(format!("bad endpoint {u:?}")))?;
            let v: usize = v.parse().map_err(|_| Error::Parse(format!("bad endpoint {v:?}")))?;
            g.add_edge(u, v)?;
        }
        Ok(g)
    }
}

/// Generation record written alongside graph files for seeded replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphMetadata {
    pub vertex_count: usize,
    pub edge_probability: f64,
    pub seed: u64,
    /// Name of the generator algorithm (the seed is only meaningful
    /// together with it).
    pub generator: String,
}

pub const GENERATOR_NAME: &str = "chacha8";

/// G(n, p): every possible edge included by an independent Bernoulli(p)
/// draw, in canonical pair order, from a ChaCha8 stream. Same seed, same
/// graph.
pub fn erdos_renyi(vertex_count: usize, edge_probability: f64, rng_seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&edge_probability) {
        return Err(Error::invalid(format!(
            "edge probability {edge_probability} outside [0,1]"
        )));
    }
    let mut rng = seed::rng(rng_seed, Role::GraphEdges, &[]);
    let mut g = Graph::new(vertex_count);
    for u in 0..vertex_count {
        for v in (u + 1)..vertex_count {
            if rng.random::<f64>() < edge_probability {
                g.edges.insert((u, v));
            }
        }
    }
    Ok(g)
}

/// Which NP-hard problem a reduction encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionKind {
    MaxClique,
    MinVertexCover,
}

impl std::fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReductionKind::MaxClique => write!(f, "max-clique"),
            ReductionKind::MinVertexCover => write!(f, "min-vertex-cover"),
        }
    }
}

/// A graph problem encoded as a QUBO, with its penalty weights and the
/// source graph kept for decoding.
#[derive(Debug, Clone)]
pub struct ProblemReduction {
    pub kind: ReductionKind,
    pub qubo: QuboModel,
    pub penalty_a: f64,
    pub penalty_b: f64,
    pub graph: Graph,
}

pub const DEFAULT_CLIQUE_A: f64 = 1.0;
pub const DEFAULT_CLIQUE_B: f64 = 2.0;
pub const DEFAULT_COVER_A: f64 = 2.0;
pub const DEFAULT_COVER_B: f64 = 1.0;

/// Maximum Clique QUBO; requires B > A > 0 so that selecting a non-adjacent
/// pair always costs more than it gains.
pub fn max_clique_qubo(g: &Graph, a: f64, b: f64) -> Result<ProblemReduction> {
    if !(a > 0.0 && b > a) {
        return Err(Error::invalid(format!(
            "max-clique penalties require B > A > 0, got A={a}, B={b}"
        )));
    }
    let mut qubo = QuboModel::new(g.vertex_count());
    for v in 0..g.vertex_count() {
        qubo.set_linear(v, -a);
    }
    for (u, v) in g.non_edges() {
        qubo.set_quadratic(u, v, b);
    }
    Ok(ProblemReduction {
        kind: ReductionKind::MaxClique,
        qubo,
        penalty_a: a,
        penalty_b: b,
        graph: g.clone(),
    })
}

/// Minimum Vertex Cover QUBO; requires A > B > 0 so that uncovering an edge
/// always costs more than deselecting a vertex saves.
pub fn min_vertex_cover_qubo(g: &Graph, a: f64, b: f64) -> Result<ProblemReduction> {
    if !(b > 0.0 && a > b) {
        return Err(Error::invalid(format!(
            "min-vertex-cover penalties require A > B > 0, got A={a}, B={b}"
        )));
    }
    let mut qubo = QuboModel::new(g.vertex_count());
    // A Σ_E (1 - x_u)(1 - x_v) = A|E| - A Σ_v deg(v) x_v + A Σ_E x_u x_v
    qubo.set_offset(a * g.edge_count() as f64);
    for v in 0..g.vertex_count() {
        let weight = b - a * g.degree(v) as f64;
        qubo.set_linear(v, weight);
    }
    for (u, v) in g.edges() {
        qubo.set_quadratic(u, v, a);
    }
    Ok(ProblemReduction {
        kind: ReductionKind::MinVertexCover,
        qubo,
        penalty_a: a,
        penalty_b: b,
        graph: g.clone(),
    })
}

/// A decoded reduction solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedSolution {
    /// Selected vertices {v : x_v = 1}.
    pub vertices: Vec<usize>,
    /// Whether the set is a clique (max-clique) or a cover (vertex cover).
    pub feasible: bool,
    /// Size of the selected set.
    pub objective: usize,
}

/// Reads the selected vertex set out of a state and checks feasibility
/// against the source graph. Spin states are converted via x = (s+1)/2.
/// Infeasibility is reported in the result, never as an error.
pub fn decode_solution(reduction: &ProblemReduction, state: &SpinState) -> Result<DecodedSolution> {
    if state.len() != reduction.qubo.num_vars() {
        return Err(Error::LengthMismatch {
            expected: reduction.qubo.num_vars(),
            actual: state.len(),
        });
    }
    let binary = state.to_binary();
    let vertices: Vec<usize> = binary
        .values()
        .iter()
        .enumerate()
        .filter_map(|(v, &x)| (x == 1).then_some(v))
        .collect();
    let feasible = match reduction.kind {
        ReductionKind::MaxClique => vertices
            .iter()
            .enumerate()
            .all(|(k, &u)| vertices[k + 1..].iter().all(|&v| reduction.graph.has_edge(u, v))),
        ReductionKind::MinVertexCover => reduction
            .graph
            .edges()
            .all(|(u, v)| vertices.binary_search(&u).is_ok() || vertices.binary_search(&v).is_ok()),
    };
    Ok(DecodedSolution { objective: vertices.len(), vertices, feasible })
}

const SUBSET_ORACLE_LIMIT: usize = 20;

/// Exact clique number ω(G) by exhaustive subset enumeration (n <= 20).
pub fn brute_force_max_clique(g: &Graph) -> Result<usize> {
    if g.vertex_count() > SUBSET_ORACLE_LIMIT {
        return Err(Error::TooLarge { size: g.vertex_count(), limit: SUBSET_ORACLE_LIMIT });
    }
    let n = g.vertex_count();
    let adj = g.adjacency_masks();
    let mut best = 0usize;
    for subset in 0u64..(1 << n) {
        let size = subset.count_ones() as usize;
        if size <= best {
            continue;
        }
        let mut ok = true;
        let mut rest = subset;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if subset & !(adj[v] | (1 << v)) != 0 {
                ok = false;
                break;
            }
        }
        if ok {
            best = size;
        }
    }
    Ok(best)
}

/// Exact vertex cover number τ(G) by exhaustive subset enumeration (n <= 20).
pub fn brute_force_min_vertex_cover(g: &Graph) -> Result<usize> {
    if g.vertex_count() > SUBSET_ORACLE_LIMIT {
        return Err(Error::TooLarge { size: g.vertex_count(), limit: SUBSET_ORACLE_LIMIT });
    }
    let n = g.vertex_count();
    let edge_masks: Vec<u64> = g.edges().map(|(u, v)| (1 << u) | (1 << v)).collect();
    let mut best = n;
    for subset in 0u64..(1 << n) {
        let size = subset.count_ones() as usize;
        if size >= best {
            continue;
        }
        if edge_masks.iter().all(|&e| subset & e != 0) {
            best = size;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erdos_renyi_extremes() {
        let empty = erdos_renyi(10, 0.0, 1).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let full = erdos_renyi(10, 1.0, 1).unwrap();
        assert_eq!(full.edge_count(), 45);
        assert!(erdos_renyi(10, -0.1, 1).is_err());
        assert!(erdos_renyi(10, 1.1, 1).is_err());
    }

    #[test]
    fn erdos_renyi_is_seed_deterministic() {
        let a = erdos_renyi(32, 0.4, 7).unwrap();
        let b = erdos_renyi(32, 0.4, 7).unwrap();
        assert_eq!(a, b);
        let c = erdos_renyi(32, 0.4, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn erdos_renyi_edge_count_statistics() {
        // Binomial(C(64,2), 0.5): mean 1008, sigma = sqrt(2016 * 0.25)
        let mean = 2016.0 * 0.5;
        let sigma = (2016.0 * 0.25_f64).sqrt();
        for s in 0..100u64 {
            let g = erdos_renyi(64, 0.5, s).unwrap();
            let dev = (g.edge_count() as f64 - mean).abs();
            assert!(dev < 4.0 * sigma, "seed {s}: {} edges", g.edge_count());
        }
    }

    #[test]
    fn graph_rejects_bad_edges() {
        let mut g = Graph::new(3);
        assert!(g.add_edge(1, 1).is_err());
        assert!(g.add_edge(0, 3).is_err());
        g.add_edge(2, 0).unwrap();
        assert!(g.has_edge(0, 2));
        g.add_edge(0, 2).unwrap(); // duplicate absorbed
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = erdos_renyi(12, 0.5, 3).unwrap();
        let text = g.to_edge_list();
        let back = Graph::from_edge_list(&text).unwrap();
        assert_eq!(g, back);
        assert!(Graph::from_edge_list("").is_err());
        assert!(Graph::from_edge_list("2\n0 1 9\n").is_err());
    }

    #[test]
    fn clique_qubo_on_triangle() {
        let g = Graph::complete(3);
        let red = max_clique_qubo(&g, 1.0, 2.0).unwrap();
        let (min, states) = red.qubo.brute_force_ground_state().unwrap();
        assert!((min - (-3.0)).abs() <= 1e-9);
        assert_eq!(states.len(), 1);
        let decoded = decode_solution(&red, &states[0]).unwrap();
        assert!(decoded.feasible);
        assert_eq!(decoded.vertices, vec![0, 1, 2]);
    }

    #[test]
    fn clique_qubo_on_edgeless_graph() {
        let g = Graph::new(3);
        let red = max_clique_qubo(&g, 1.0, 2.0).unwrap();
        let (min, states) = red.qubo.brute_force_ground_state().unwrap();
        assert!((min - (-1.0)).abs() <= 1e-9);
        assert_eq!(states.len(), 3);
        for s in &states {
            let d = decode_solution(&red, s).unwrap();
            assert!(d.feasible);
            assert_eq!(d.objective, 1);
        }
    }

    #[test]
    fn clique_penalty_precondition() {
        let g = Graph::complete(3);
        assert!(max_clique_qubo(&g, 2.0, 1.0).is_err());
        assert!(max_clique_qubo(&g, 0.0, 1.0).is_err());
    }

    #[test]
    fn cover_qubo_on_single_edge() {
        let mut g = Graph::new(2);
        g.add_edge(0, 1).unwrap();
        let red = min_vertex_cover_qubo(&g, 2.0, 1.0).unwrap();
        let (min, states) = red.qubo.brute_force_ground_state().unwrap();
        assert!((min - 1.0).abs() <= 1e-9);
        assert_eq!(states.len(), 2);
        for s in &states {
            let d = decode_solution(&red, s).unwrap();
            assert!(d.feasible);
            assert_eq!(d.objective, 1);
        }
    }

    #[test]
    fn cover_qubo_on_path() {
        let mut g = Graph::new(3);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        let red = min_vertex_cover_qubo(&g, 2.0, 1.0).unwrap();
        let (min, states) = red.qubo.brute_force_ground_state().unwrap();
        assert!((min - 1.0).abs() <= 1e-9);
        assert_eq!(states.len(), 1);
        let d = decode_solution(&red, &states[0]).unwrap();
        assert_eq!(d.vertices, vec![1]);
    }

    #[test]
    fn cover_penalty_precondition() {
        let g = Graph::complete(3);
        assert!(min_vertex_cover_qubo(&g, 1.0, 2.0).is_err());
        assert!(min_vertex_cover_qubo(&g, 1.0, 0.0).is_err());
    }

    #[test]
    fn decode_reports_infeasibility() {
        let mut k2 = Graph::new(2);
        k2.add_edge(0, 1).unwrap();
        let red = min_vertex_cover_qubo(&k2, 2.0, 1.0).unwrap();
        let zero = SpinState::bits(vec![0, 0]).unwrap();
        let d = decode_solution(&red, &zero).unwrap();
        assert!(!d.feasible);
        assert_eq!(d.objective, 0);

        let edgeless = Graph::new(2);
        let red = min_vertex_cover_qubo(&edgeless, 2.0, 1.0).unwrap();
        let d = decode_solution(&red, &zero).unwrap();
        assert!(d.feasible);
        assert_eq!(d.objective, 0);
    }

    #[test]
    fn decode_accepts_spin_states() {
        let g = Graph::complete(3);
        let red = max_clique_qubo(&g, 1.0, 2.0).unwrap();
        let s = SpinState::spins(vec![1, -1, 1]).unwrap();
        let d = decode_solution(&red, &s).unwrap();
        assert_eq!(d.vertices, vec![0, 2]);
        let short = SpinState::bits(vec![1]).unwrap();
        assert!(decode_solution(&red, &short).is_err());
    }

    #[test]
    fn subset_oracles_on_known_graphs() {
        let k5 = Graph::complete(5);
        assert_eq!(brute_force_max_clique(&k5).unwrap(), 5);
        assert_eq!(brute_force_min_vertex_cover(&k5).unwrap(), 4);
        let edgeless = Graph::new(6);
        assert_eq!(brute_force_max_clique(&edgeless).unwrap(), 1);
        assert_eq!(brute_force_min_vertex_cover(&edgeless).unwrap(), 0);
        assert!(brute_force_max_clique(&Graph::new(21)).is_err());
    }

    #[test]
    fn qubo_ground_states_match_subset_oracles() {
        for s in 0..5u64 {
            let g = erdos_renyi(8, 0.5, s).unwrap();
            let clique = brute_force_max_clique(&g).unwrap();
            let red = max_clique_qubo(&g, DEFAULT_CLIQUE_A, DEFAULT_CLIQUE_B).unwrap();
            let (min, states) = red.qubo.brute_force_ground_state().unwrap();
            assert!((min - (-(clique as f64))).abs() <= 1e-9, "seed {s}");
            for st in &states {
                let d = decode_solution(&red, st).unwrap();
                assert!(d.feasible, "seed {s}");
                assert_eq!(d.objective, clique, "seed {s}");
            }

            let cover = brute_force_min_vertex_cover(&g).unwrap();
            let red = min_vertex_cover_qubo(&g, DEFAULT_COVER_A, DEFAULT_COVER_B).unwrap();
            let (min, states) = red.qubo.brute_force_ground_state().unwrap();
            assert!((min - cover as f64).abs() <= 1e-9, "seed {s}");
            for st in &states {
                let d = decode_solution(&red, st).unwrap();
                assert!(d.feasible, "seed {s}");
                assert_eq!(d.objective, cover, "seed {s}");
            }
        }
    }

    #[test]
    fn clique_number_monotone_under_edge_addition() {
        for s in 0..5u64 {
            let g = erdos_renyi(9, 0.4, s).unwrap();
            let before = brute_force_max_clique(&g).unwrap();
            let first_non_edge = g.non_edges().next();
            if let Some((u, v)) = first_non_edge {
                let mut bigger = g.clone();
                bigger.add_edge(u, v).unwrap();
                let after = brute_force_max_clique(&bigger).unwrap();
                assert!(before <= after);
            }
        }
    }
}
