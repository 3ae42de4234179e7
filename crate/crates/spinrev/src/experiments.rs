//! Experiment harness: p_s sweeps, GA parameter studies, GA vs native
//! comparison, reversal-count traces, and layout rendering, with CSV and
//! SVG output.
//!
//! Every run derives all of its randomness from the configured seed, so a
//! replay with the same configuration reproduces output files
//! byte-for-byte. Detail CSVs carry the derived seed of every solve.
//!
//! Grid points and repetitions are independent jobs executed through the
//! same parallel/sequential machinery as the sampler; aggregation is by
//! (grid point, repetition) key order, never completion order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chimera::{
    default_chain_strength, embed_complete, embed_model, ChimeraTopology, Embedding,
    PhysicalIsing,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::ga::{run_ga, GaConfig, GaHistory, MaskLevel, SamplerEvaluator};
use crate::gauge::SpinReversalMask;
use crate::graph::{
    erdos_renyi, max_clique_qubo, min_vertex_cover_qubo, Graph, ProblemReduction, ReductionKind,
    DEFAULT_CLIQUE_A, DEFAULT_CLIQUE_B, DEFAULT_COVER_A, DEFAULT_COVER_B,
};
use crate::model::IsingModel;
use crate::noise::NoiseModel;
use crate::sampler::{sample, solve_native, solve_with_mask, SamplerConfig};
use crate::seed::{self, Role};
use crate::svg::{self, ChartOptions, Series};

/// The p_s grid used throughout: 0.01, 0.05, 0.1, 0.2, …, 0.8, 0.9, 0.95,
/// 0.99.
pub const PS_GRID: [f64; 13] =
    [0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];

/// The graph-density grid.
pub const PG_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// Chimera dimensions as experiment configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub rows: usize,
    pub cols: usize,
    pub shore: usize,
}

impl TopologySpec {
    /// Smallest grid that holds K_16: fits desk-scale graphs.
    pub fn desk() -> Self {
        TopologySpec { rows: 4, cols: 4, shore: 4 }
    }

    /// The 2000Q working graph (16x16 cells, shore 4, 2048 qubits).
    pub fn paper() -> Self {
        TopologySpec { rows: 16, cols: 16, shore: 4 }
    }

    pub fn build(&self) -> Result<ChimeraTopology> {
        ChimeraTopology::new(self.rows, self.cols, self.shore)
    }
}

/// A generated problem instance ready to solve.
pub struct BuiltProblem {
    pub graph: Graph,
    pub reduction: ProblemReduction,
    pub logical: IsingModel,
    pub topology: ChimeraTopology,
    pub embedding: Embedding,
    pub physical: PhysicalIsing,
}

/// Generates graph → reduction → logical Ising → complete-graph embedding.
pub fn build_problem(
    problem: ReductionKind,
    vertices: usize,
    edge_probability: f64,
    topology: &TopologySpec,
    graph_seed: u64,
) -> Result<BuiltProblem> {
    let graph = erdos_renyi(vertices, edge_probability, graph_seed)?;
    let reduction = match problem {
        ReductionKind::MaxClique => max_clique_qubo(&graph, DEFAULT_CLIQUE_A, DEFAULT_CLIQUE_B)?,
        ReductionKind::MinVertexCover => {
            min_vertex_cover_qubo(&graph, DEFAULT_COVER_A, DEFAULT_COVER_B)?
        }
    };
    let logical = reduction.qubo.to_ising();
    let topo = topology.build()?;
    let embedding = embed_complete(vertices, &topo)?;
    let physical = embed_model(&logical, &embedding, &topo, default_chain_strength(&logical))?;
    Ok(BuiltProblem { graph, reduction, logical, topology: topo, embedding, physical })
}

// ---------------------------------------------------------------------------
// p_s sweep
// ---------------------------------------------------------------------------

/// Configuration of the p_s sweep comparing masked and native solves to
/// the standard anneal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub problem: ReductionKind,
    pub vertices: usize,
    pub edge_probabilities: Vec<f64>,
    pub ps_grid: Vec<f64>,
    pub repetitions: usize,
    /// Reads per solve (N_a).
    pub anneals: usize,
    /// N_s of the native emulation.
    pub native_transforms: usize,
    pub level: MaskLevel,
    pub sweeps: usize,
    pub topology: TopologySpec,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl SweepConfig {
    /// CI-friendly scale: |V|=12, 10 repetitions, N_a=200.
    pub fn desk(problem: ReductionKind, seed: u64) -> Self {
        SweepConfig {
            problem,
            vertices: 12,
            edge_probabilities: PG_GRID.to_vec(),
            ps_grid: PS_GRID.to_vec(),
            repetitions: 10,
            anneals: 200,
            native_transforms: 10,
            level: MaskLevel::Qubit,
            sweeps: 200,
            topology: TopologySpec::desk(),
            noise: NoiseModel::default(),
            seed,
        }
    }

    /// Published protocol scale: |V|=64, 50 repetitions, N_a=1000.
    pub fn paper(problem: ReductionKind, seed: u64) -> Self {
        SweepConfig {
            vertices: 64,
            repetitions: 50,
            anneals: 1000,
            sweeps: 1000,
            topology: TopologySpec::paper(),
            ..SweepConfig::desk(problem, seed)
        }
    }

    fn sampler(&self, num_reads: usize, solve_seed: u64) -> SamplerConfig {
        SamplerConfig::new(num_reads, solve_seed).with_sweeps(self.sweeps)
    }
}

/// Scores of one repetition at one graph density.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRepetition {
    pub p_g: f64,
    pub rep: usize,
    pub graph_seed: u64,
    pub standard_seed: u64,
    pub standard_score: f64,
    pub native_seed: u64,
    pub native_score: f64,
    /// Per p_s grid point: (mask seed, solve seed, score).
    pub masked: Vec<(u64, u64, f64)>,
}

/// Aggregated sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p_g: f64,
    pub p_s: f64,
    pub repetitions: usize,
    pub mean_diff_masked: f64,
    pub std_diff_masked: f64,
    pub mean_diff_native: f64,
    pub std_diff_native: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub repetitions: Vec<SweepRepetition>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the sweep: for every graph density and repetition, regenerate the
/// graph, reduction, and embedding, then score the standard anneal, the
/// native emulation, and a masked solve per p_s; emits score differences
/// against the standard anneal.
pub fn sweep_ps(config: &SweepConfig) -> Result<SweepResult> {
    if config.repetitions == 0 || config.edge_probabilities.is_empty() || config.ps_grid.is_empty()
    {
        return Err(Error::invalid("sweep needs repetitions and nonempty grids"));
    }
    let kind_tag = config.problem as u64;
    let jobs = config.edge_probabilities.len() * config.repetitions;
    let reps = exec::map_indexed(jobs, |job| -> Result<SweepRepetition> {
        let pg_idx = job / config.repetitions;
        let rep = job % config.repetitions;
        let p_g = config.edge_probabilities[pg_idx];
        let rep_seed =
            seed::derive(config.seed, &[Role::Experiment as u64, kind_tag, pg_idx as u64, rep as u64]);
        let graph_seed = seed::derive(rep_seed, &[0]);
        let built =
            build_problem(config.problem, config.vertices, p_g, &config.topology, graph_seed)?;
        let model = built.physical.model();

        let standard_seed = seed::derive(rep_seed, &[1]);
        let standard =
            sample(model, &config.noise, &config.sampler(config.anneals, standard_seed))?;
        let standard_score = standard.one_percent_score();

        let native_seed = seed::derive(rep_seed, &[2]);
        let native = solve_native(
            model,
            config.anneals,
            config.native_transforms,
            &config.noise,
            &config.sampler(1, native_seed),
        )?;
        let native_score = native.one_percent_score();

        let mut masked = Vec::with_capacity(config.ps_grid.len());
        for (ps_idx, &p_s) in config.ps_grid.iter().enumerate() {
            let mask_seed = seed::derive(rep_seed, &[3, ps_idx as u64]);
            let mask = match config.level {
                MaskLevel::Qubit => {
                    SpinReversalMask::random(model.num_vars(), p_s, mask_seed)?
                }
                MaskLevel::Chain => {
                    let logical = SpinReversalMask::random(
                        built.embedding.num_chains(),
                        p_s,
                        mask_seed,
                    )?;
                    crate::chimera::expand_chain_mask(&logical, &built.embedding)?
                }
            };
            let solve_seed = seed::derive(rep_seed, &[4, ps_idx as u64]);
            let set = solve_with_mask(
                model,
                &mask,
                &config.noise,
                &config.sampler(config.anneals, solve_seed),
            )?;
            masked.push((mask_seed, solve_seed, set.one_percent_score()));
        }
        Ok(SweepRepetition {
            p_g,
            rep,
            graph_seed,
            standard_seed,
            standard_score,
            native_seed,
            native_score,
            masked,
        })
    });
    let repetitions = reps.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (pg_idx, &p_g) in config.edge_probabilities.iter().enumerate() {
        let slice =
            &repetitions[pg_idx * config.repetitions..(pg_idx + 1) * config.repetitions];
        let native_diffs: Vec<f64> =
            slice.iter().map(|r| r.native_score - r.standard_score).collect();
        let (native_mean, native_std) = mean_std(&native_diffs);
        for (ps_idx, &p_s) in config.ps_grid.iter().enumerate() {
            let diffs: Vec<f64> =
                slice.iter().map(|r| r.masked[ps_idx].2 - r.standard_score).collect();
            let (mean, std) = mean_std(&diffs);
            rows.push(SweepRow {
                p_g,
                p_s,
                repetitions: config.repetitions,
                mean_diff_masked: mean,
                std_diff_masked: std,
                mean_diff_native: native_mean,
                std_diff_native: native_std,
            });
        }
    }
    Ok(SweepResult { config: config.clone(), rows, repetitions })
}

impl SweepResult {
    /// Aggregated cells: one row per (p_G, p_s).
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "problem,seed,p_g,p_s,repetitions,mean_diff_masked,std_diff_masked,mean_diff_native,std_diff_native\n",
        );
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                self.config.problem,
                self.config.seed,
                row.p_g,
                row.p_s,
                row.repetitions,
                row.mean_diff_masked,
                row.std_diff_masked,
                row.mean_diff_native,
                row.std_diff_native,
            ));
        }
        out
    }

    /// Per-repetition scores with the full seed tuple of every solve.
    pub fn detail_csv(&self) -> String {
        let mut out = String::from(
            "problem,master_seed,chip_seed,p_g,rep,graph_seed,standard_seed,standard_score,native_seed,native_score,p_s,mask_seed,solve_seed,masked_score\n",
        );
        for r in &self.repetitions {
            for (ps_idx, &p_s) in self.config.ps_grid.iter().enumerate() {
                let (mask_seed, solve_seed, score) = r.masked[ps_idx];
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    self.config.problem,
                    self.config.seed,
                    self.config.noise.chip_seed,
                    r.p_g,
                    r.rep,
                    r.graph_seed,
                    r.standard_seed,
                    r.standard_score,
                    r.native_seed,
                    r.native_score,
                    p_s,
                    mask_seed,
                    solve_seed,
                    score,
                ));
            }
        }
        out
    }

    /// Mean masked-vs-standard difference per density over p_s, with the
    /// native emulation as a flat reference line.
    pub fn chart_svg(&self) -> Result<String> {
        let mut series = Vec::new();
        for (i, &p_g) in self.config.edge_probabilities.iter().enumerate() {
            let rows: Vec<&SweepRow> =
                self.rows.iter().filter(|r| r.p_g == p_g).collect();
            series.push(Series {
                label: format!("p_G = {p_g}"),
                color: svg::palette_color(i).to_string(),
                points: rows.iter().map(|r| (r.p_s, r.mean_diff_masked)).collect(),
                errors: Some(rows.iter().map(|r| r.std_diff_masked).collect()),
            });
        }
        let native_mean = mean_std(
            &self
                .repetitions
                .iter()
                .map(|r| r.native_score - r.standard_score)
                .collect::<Vec<_>>(),
        )
        .0;
        let ps_min = self.config.ps_grid.first().copied().unwrap_or(0.0);
        let ps_max = self.config.ps_grid.last().copied().unwrap_or(1.0);
        series.push(Series {
            label: "native".to_string(),
            color: svg::palette_color(5).to_string(),
            points: vec![(ps_min, native_mean), (ps_max, native_mean)],
            errors: None,
        });
        svg::line_chart(
            &series,
            &ChartOptions {
                title: format!("{}: score difference to standard anneal", self.config.problem),
                x_label: "p_s".to_string(),
                y_label: "mean 1%-score difference".to_string(),
                ..Default::default()
            },
        )
    }
}

// ---------------------------------------------------------------------------
// GA parameter study
// ---------------------------------------------------------------------------

/// Which algorithm parameter a study varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyParameter {
    Population,
    PSpin,
    PMat,
    PMut,
}

impl std::str::FromStr for StudyParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" | "population" => Ok(StudyParameter::Population),
            "p_spin" => Ok(StudyParameter::PSpin),
            "p_mat" => Ok(StudyParameter::PMat),
            "p_mut" => Ok(StudyParameter::PMut),
            other => Err(Error::invalid(format!(
                "unknown study parameter {other:?} (expected N, p_spin, p_mat, or p_mut)"
            ))),
        }
    }
}

impl std::fmt::Display for StudyParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StudyParameter::Population => write!(f, "N"),
            StudyParameter::PSpin => write!(f, "p_spin"),
            StudyParameter::PMat => write!(f, "p_mat"),
            StudyParameter::PMut => write!(f, "p_mut"),
        }
    }
}

/// Published study grids per parameter and level.
pub fn default_study_values(parameter: StudyParameter, level: MaskLevel) -> Vec<f64> {
    match (parameter, level) {
        (StudyParameter::Population, _) => vec![20.0, 50.0, 80.0],
        (StudyParameter::PSpin, MaskLevel::Qubit) => vec![0.001, 0.01, 0.1],
        (StudyParameter::PSpin, MaskLevel::Chain) => vec![0.1, 0.3, 0.5],
        (StudyParameter::PMat, _) => vec![0.1, 0.3, 0.5],
        (StudyParameter::PMut, _) => vec![0.001, 0.01, 0.1],
    }
}

/// GA parameter study on one fixed problem instance and embedding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub problem: ReductionKind,
    pub vertices: usize,
    pub edge_probability: f64,
    pub parameter: StudyParameter,
    /// Values the parameter takes (N values are given as whole numbers).
    pub values: Vec<f64>,
    pub level: MaskLevel,
    pub anneals: usize,
    /// Defaults per level when absent: 100 (qubit) or 50 (chain).
    pub generations: Option<usize>,
    pub sweeps: usize,
    pub topology: TopologySpec,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl StudyConfig {
    pub fn desk(parameter: StudyParameter, level: MaskLevel, seed: u64) -> Self {
        StudyConfig {
            problem: ReductionKind::MaxClique,
            vertices: 12,
            edge_probability: 0.5,
            parameter,
            values: default_study_values(parameter, level),
            level,
            anneals: 50,
            generations: None,
            sweeps: 200,
            topology: TopologySpec::desk(),
            noise: NoiseModel::default(),
            seed,
        }
    }

    pub fn generations_for_level(&self) -> usize {
        self.generations.unwrap_or(match self.level {
            MaskLevel::Qubit => 100,
            MaskLevel::Chain => 50,
        })
    }

    /// Base parameters with the studied one overridden to `value`.
    fn ga_config(&self, value: f64, ga_seed: u64) -> GaConfig {
        let mut cfg = GaConfig::base_study(ga_seed)
            .with_generations(self.generations_for_level())
            .with_anneals(self.anneals)
            .with_level(self.level);
        if self.level == MaskLevel::Chain {
            cfg.p_spin = 0.5;
        }
        match self.parameter {
            StudyParameter::Population => cfg.population = value as usize,
            StudyParameter::PSpin => cfg.p_spin = value,
            StudyParameter::PMat => cfg.p_mat = value,
            StudyParameter::PMut => cfg.p_mut = value,
        }
        cfg
    }
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub graph_seed: u64,
    /// One best-fitness trace per studied value.
    pub traces: Vec<(f64, GaHistory)>,
}

/// Runs one GA per value of the studied parameter, all other parameters at
/// the base set, on a single fixed graph and embedding.
pub fn ga_param_study(config: &StudyConfig) -> Result<StudyResult> {
    if config.values.is_empty() {
        return Err(Error::invalid("study needs at least one parameter value"));
    }
    let kind_tag = config.problem as u64;
    let graph_seed = seed::derive(config.seed, &[Role::Experiment as u64, kind_tag, 0]);
    let built = build_problem(
        config.problem,
        config.vertices,
        config.edge_probability,
        &config.topology,
        graph_seed,
    )?;
    // one shared GA seed: traces differ only through the studied parameter
    let ga_seed = seed::derive(config.seed, &[Role::Experiment as u64, kind_tag, 1]);
    let sampler = SamplerConfig::new(config.anneals, 0).with_sweeps(config.sweeps);
    let mut traces = Vec::with_capacity(config.values.len());
    for &value in &config.values {
        let ga_cfg = config.ga_config(value, ga_seed).with_anneals(config.anneals);
        let evaluator = match config.level {
            MaskLevel::Qubit => SamplerEvaluator::qubit_level(
                built.physical.model().clone(),
                config.noise,
                sampler.with_num_reads(config.anneals),
            ),
            MaskLevel::Chain => SamplerEvaluator::chain_level(
                &built.physical,
                config.noise,
                sampler.with_num_reads(config.anneals),
            ),
        };
        let outcome = run_ga(&evaluator, &ga_cfg)?;
        traces.push((value, outcome.history));
    }
    Ok(StudyResult { config: config.clone(), graph_seed, traces })
}

impl StudyResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "parameter,value,graph_seed,generation,best_e,mean_e,worst_e,best_popcount,best_score,cum_best_e,cum_best_popcount,cum_best_score\n",
        );
        for (value, history) in &self.traces {
            for row in &history.generations {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    self.config.parameter,
                    value,
                    self.graph_seed,
                    row.generation,
                    row.best_fitness,
                    row.mean_fitness,
                    row.worst_fitness,
                    row.best_popcount,
                    row.best_score,
                    row.cumulative_best_fitness,
                    row.cumulative_best_popcount,
                    row.cumulative_best_score,
                ));
            }
        }
        out
    }

    pub fn chart_svg(&self) -> Result<String> {
        let series: Vec<Series> = self
            .traces
            .iter()
            .enumerate()
            .map(|(i, (value, history))| Series {
                label: format!("{} = {}", self.config.parameter, value),
                color: svg::palette_color(i).to_string(),
                points: history
                    .generations
                    .iter()
                    .map(|r| (r.generation as f64, r.cumulative_best_fitness))
                    .collect(),
                errors: None,
            })
            .collect();
        svg::line_chart(
            &series,
            &ChartOptions {
                title: format!(
                    "{} dependence ({} level)",
                    self.config.parameter,
                    match self.config.level {
                        MaskLevel::Qubit => "qubit",
                        MaskLevel::Chain => "chain",
                    }
                ),
                x_label: "generation".to_string(),
                y_label: "best energy found".to_string(),
                ..Default::default()
            },
        )
    }
}

// ---------------------------------------------------------------------------
// GA vs native comparison
// ---------------------------------------------------------------------------

/// GA-against-native-baseline comparison configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareConfig {
    pub problems: Vec<ReductionKind>,
    pub vertices: usize,
    pub edge_probability: f64,
    /// GA reads per evaluation (N_a).
    pub anneals: usize,
    pub generations: usize,
    /// Independent GA runs per problem.
    pub realizations: usize,
    /// Native baseline read budget and N_s.
    pub native_reads: usize,
    pub native_transforms: usize,
    pub level: MaskLevel,
    pub sweeps: usize,
    pub topology: TopologySpec,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl CompareConfig {
    pub fn desk(seed: u64) -> Self {
        CompareConfig {
            problems: vec![ReductionKind::MaxClique, ReductionKind::MinVertexCover],
            vertices: 12,
            edge_probability: 0.5,
            anneals: 200,
            generations: 20,
            realizations: 6,
            native_reads: 2000,
            native_transforms: 100,
            level: MaskLevel::Qubit,
            sweeps: 200,
            topology: TopologySpec::desk(),
            noise: NoiseModel::default(),
            seed,
        }
    }

    /// Published protocol: N_a=1000 GA evaluations over 100 generations
    /// against the native baseline at N_a=10000, N_s=100.
    pub fn paper(seed: u64) -> Self {
        CompareConfig {
            vertices: 64,
            anneals: 1000,
            generations: 100,
            native_reads: 10000,
            sweeps: 1000,
            topology: TopologySpec::paper(),
            ..CompareConfig::desk(seed)
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompareProblemResult {
    pub problem: ReductionKind,
    pub graph_seed: u64,
    pub native_seed: u64,
    pub native_score: f64,
    /// One GA history per realization.
    pub realizations: Vec<GaHistory>,
}

#[derive(Debug, Clone)]
pub struct CompareResult {
    pub config: CompareConfig,
    pub problems: Vec<CompareProblemResult>,
}

/// One native baseline score per problem, then `realizations` GA runs with
/// the standard parameter set; per generation the best 1%-score is
/// compared against the native score.
pub fn ga_vs_native(config: &CompareConfig) -> Result<CompareResult> {
    let mut problems = Vec::with_capacity(config.problems.len());
    for &problem in &config.problems {
        let kind_tag = problem as u64;
        let graph_seed = seed::derive(config.seed, &[Role::Experiment as u64, kind_tag, 0]);
        let built = build_problem(
            problem,
            config.vertices,
            config.edge_probability,
            &config.topology,
            graph_seed,
        )?;
        let model = built.physical.model();

        let native_seed = seed::derive(config.seed, &[Role::Experiment as u64, kind_tag, 1]);
        let native_cfg = SamplerConfig::new(1, native_seed).with_sweeps(config.sweeps);
        let native = solve_native(
            model,
            config.native_reads,
            config.native_transforms,
            &config.noise,
            &native_cfg,
        )?;
        let native_score = native.one_percent_score();

        let sampler = SamplerConfig::new(config.anneals, 0).with_sweeps(config.sweeps);
        let mut realizations = Vec::with_capacity(config.realizations);
        for real in 0..config.realizations {
            let ga_seed =
                seed::derive(config.seed, &[Role::Experiment as u64, kind_tag, 2, real as u64]);
            let ga_cfg = GaConfig::standard(ga_seed)
                .with_generations(config.generations)
                .with_anneals(config.anneals)
                .with_level(config.level);
            let evaluator = match config.level {
                MaskLevel::Qubit => SamplerEvaluator::qubit_level(
                    model.clone(),
                    config.noise,
                    sampler,
                ),
                MaskLevel::Chain => {
                    SamplerEvaluator::chain_level(&built.physical, config.noise, sampler)
                }
            };
            let outcome = run_ga(&evaluator, &ga_cfg)?;
            realizations.push(outcome.history);
        }
        problems.push(CompareProblemResult {
            problem,
            graph_seed,
            native_seed,
            native_score,
            realizations,
        });
    }
    Ok(CompareResult { config: config.clone(), problems })
}

impl CompareResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "problem,graph_seed,native_seed,native_score,realization,generation,ga_best_score,score_diff\n",
        );
        for p in &self.problems {
            for (real, history) in p.realizations.iter().enumerate() {
                for row in &history.generations {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        p.problem,
                        p.graph_seed,
                        p.native_seed,
                        p.native_score,
                        real,
                        row.generation,
                        row.cumulative_best_score,
                        row.cumulative_best_score - p.native_score,
                    ));
                }
            }
        }
        out
    }

    pub fn chart_svg(&self) -> Result<String> {
        let mut series = Vec::new();
        for p in &self.problems {
            let color = match p.problem {
                ReductionKind::MaxClique => svg::palette_color(3),   // red
                ReductionKind::MinVertexCover => svg::palette_color(0), // blue
            };
            for (real, history) in p.realizations.iter().enumerate() {
                series.push(Series {
                    label: if real == 0 { p.problem.to_string() } else { String::new() },
                    color: color.to_string(),
                    points: history
                        .generations
                        .iter()
                        .map(|r| {
                            (r.generation as f64, r.cumulative_best_score - p.native_score)
                        })
                        .collect(),
                    errors: None,
                });
            }
        }
        svg::line_chart(
            &series,
            &ChartOptions {
                title: "best GA score minus native baseline".to_string(),
                x_label: "generation".to_string(),
                y_label: "1%-score difference".to_string(),
                ..Default::default()
            },
        )
    }
}

// ---------------------------------------------------------------------------
// traces and layout rendering
// ---------------------------------------------------------------------------

/// (generation, reversed-bit count of the best solution found so far).
pub fn reversal_count_trace(history: &GaHistory) -> Vec<(usize, usize)> {
    history
        .generations
        .iter()
        .map(|row| (row.generation, row.cumulative_best_popcount))
        .collect()
}

/// Writes the Chimera-grid coloring of a mask to an SVG file.
pub fn render_layout(
    topo: &ChimeraTopology,
    emb: &Embedding,
    mask: &SpinReversalMask,
    path: &Path,
) -> Result<()> {
    let svg = svg::chimera_layout(topo, emb, mask)?;
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_sweep_config() -> SweepConfig {
        SweepConfig {
            problem: ReductionKind::MaxClique,
            vertices: 6,
            edge_probabilities: vec![0.3, 0.7],
            ps_grid: vec![0.1, 0.9],
            repetitions: 2,
            anneals: 10,
            native_transforms: 5,
            level: MaskLevel::Qubit,
            sweeps: 30,
            topology: TopologySpec { rows: 2, cols: 2, shore: 4 },
            noise: NoiseModel::default(),
            seed: 5,
        }
    }

    #[test]
    fn sweep_row_bookkeeping() {
        let cfg = tiny_sweep_config();
        let result = sweep_ps(&cfg).unwrap();
        assert_eq!(result.rows.len(), cfg.edge_probabilities.len() * cfg.ps_grid.len());
        assert_eq!(result.repetitions.len(), 4);
        for row in &result.rows {
            assert!(row.std_diff_masked >= 0.0);
            assert_eq!(row.repetitions, 2);
        }
        let csv = result.summary_csv();
        assert_eq!(csv.lines().count(), 1 + result.rows.len());
        let detail = result.detail_csv();
        assert_eq!(detail.lines().count(), 1 + 4 * cfg.ps_grid.len());
        assert!(result.chart_svg().unwrap().contains("polyline"));
    }

    #[test]
    fn sweep_replays_byte_for_byte() {
        let cfg = tiny_sweep_config();
        let a = sweep_ps(&cfg).unwrap();
        let b = sweep_ps(&cfg).unwrap();
        assert_eq!(a.summary_csv(), b.summary_csv());
        assert_eq!(a.detail_csv(), b.detail_csv());
    }

    #[test]
    fn paper_grids_match_protocol() {
        assert_eq!(PS_GRID.len(), 13);
        assert_eq!(PS_GRID[0], 0.01);
        assert_eq!(PS_GRID[12], 0.99);
        assert_eq!(PG_GRID.to_vec(), vec![0.1, 0.3, 0.5, 0.7, 0.9]);
        let paper = SweepConfig::paper(ReductionKind::MaxClique, 0);
        assert_eq!(paper.vertices, 64);
        assert_eq!(paper.repetitions, 50);
        assert_eq!(paper.anneals, 1000);
        assert_eq!(paper.native_transforms, 10);
        let compare = CompareConfig::paper(0);
        assert_eq!(compare.native_reads, 10000);
        assert_eq!(compare.native_transforms, 100);
        assert_eq!(compare.generations, 100);
        assert_eq!(compare.realizations, 6);
    }

    #[test]
    fn study_rejects_unknown_parameter_name() {
        assert!("N".parse::<StudyParameter>().is_ok());
        assert!("p_spin".parse::<StudyParameter>().is_ok());
        assert!("temperature".parse::<StudyParameter>().is_err());
    }

    #[test]
    fn study_values_follow_level() {
        assert_eq!(default_study_values(StudyParameter::PSpin, MaskLevel::Qubit), vec![
            0.001, 0.01, 0.1
        ]);
        assert_eq!(default_study_values(StudyParameter::PSpin, MaskLevel::Chain), vec![
            0.1, 0.3, 0.5
        ]);
        assert_eq!(
            default_study_values(StudyParameter::Population, MaskLevel::Qubit),
            vec![20.0, 50.0, 80.0]
        );
    }

    #[test]
    fn study_traces_share_generation_one_for_non_init_parameters() {
        let mut cfg = StudyConfig::desk(StudyParameter::PMut, MaskLevel::Qubit, 3);
        cfg.vertices = 5;
        cfg.values = vec![0.01, 0.2];
        cfg.anneals = 5;
        cfg.generations = Some(2);
        cfg.sweeps = 20;
        cfg.topology = TopologySpec { rows: 2, cols: 2, shore: 3 };
        let result = ga_param_study(&cfg).unwrap();
        assert_eq!(result.traces.len(), 2);
        // only p_spin and N enter the initialization
        let first = &result.traces[0].1.generations[0];
        let second = &result.traces[1].1.generations[0];
        assert_eq!(first.best_fitness, second.best_fitness);
        assert_eq!(first.mean_fitness, second.mean_fitness);
        let csv = result.to_csv();
        assert_eq!(csv.lines().count(), 1 + 2 * 2);
        assert!(result.chart_svg().unwrap().contains("polyline"));
    }

    #[test]
    fn chain_level_study_defaults_to_50_generations() {
        let cfg = StudyConfig::desk(StudyParameter::PMat, MaskLevel::Chain, 0);
        assert_eq!(cfg.generations_for_level(), 50);
        let cfg = StudyConfig::desk(StudyParameter::PMat, MaskLevel::Qubit, 0);
        assert_eq!(cfg.generations_for_level(), 100);
    }

    #[test]
    fn compare_emits_all_generations() {
        let cfg = CompareConfig {
            problems: vec![ReductionKind::MaxClique],
            vertices: 4,
            edge_probability: 0.5,
            anneals: 5,
            generations: 3,
            realizations: 2,
            native_reads: 20,
            native_transforms: 4,
            level: MaskLevel::Qubit,
            sweeps: 20,
            topology: TopologySpec { rows: 1, cols: 1, shore: 4 },
            noise: NoiseModel::default(),
            seed: 9,
        };
        let result = ga_vs_native(&cfg).unwrap();
        assert_eq!(result.problems.len(), 1);
        assert_eq!(result.problems[0].realizations.len(), 2);
        let csv = result.to_csv();
        assert_eq!(csv.lines().count(), 1 + 2 * 3);
        let again = ga_vs_native(&cfg).unwrap();
        assert_eq!(result.to_csv(), again.to_csv());
    }

    #[test]
    fn reversal_trace_uses_cumulative_best() {
        let history = GaHistory {
            generations: vec![
                crate::ga::GenerationStats {
                    generation: 1,
                    best_fitness: -1.0,
                    mean_fitness: 0.0,
                    worst_fitness: 1.0,
                    best_popcount: 3,
                    best_score: -0.5,
                    cumulative_best_fitness: -1.0,
                    cumulative_best_popcount: 3,
                    cumulative_best_score: -0.5,
                },
                crate::ga::GenerationStats {
                    generation: 2,
                    best_fitness: -0.5,
                    mean_fitness: 0.0,
                    worst_fitness: 1.0,
                    best_popcount: 7,
                    best_score: -0.2,
                    cumulative_best_fitness: -1.0,
                    cumulative_best_popcount: 3,
                    cumulative_best_score: -0.5,
                },
            ],
        };
        assert_eq!(reversal_count_trace(&history), vec![(1, 3), (2, 3)]);
    }
}
