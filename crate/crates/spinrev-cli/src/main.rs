//! Command-line front end: graph generation, reductions, embedding,
//! sampling, GA mask optimization, and the experiment suites.
//!
//! All randomness derives from `--seed`; rerunning any command with the
//! same arguments reproduces its output files byte-for-byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spinrev::chimera::{
    default_chain_strength, embed_complete, embed_model, ChimeraTopology, Embedding,
};
use spinrev::error::{Error, Result};
use spinrev::experiments::{
    self, ga_param_study, ga_vs_native, sweep_ps, CompareConfig, StudyConfig,
    StudyParameter, SweepConfig, TopologySpec,
};
use spinrev::ga::{run_ga_with, GaCheckpoint, GaConfig, MaskLevel, SamplerEvaluator};
use spinrev::graph::{
    erdos_renyi, max_clique_qubo, min_vertex_cover_qubo, Graph, GraphMetadata, ReductionKind,
    DEFAULT_CLIQUE_A, DEFAULT_CLIQUE_B, DEFAULT_COVER_A, DEFAULT_COVER_B, GENERATOR_NAME,
};
use spinrev::model::{read_model, IsingModel};
use spinrev::noise::NoiseModel;
use spinrev::sampler::{sample, solve_native, solve_with_mask, SamplerConfig};
use spinrev::SpinReversalMask;

#[derive(Parser)]
#[command(name = "spinrev", version, about = "Spin-reversal transform experiments for Ising problems")]
struct Cli {
    /// Master seed; every derived random stream is a pure function of it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// JSON noise profile file (fields of the noise model); omit for the
    /// built-in default chip.
    #[arg(long, global = true)]
    noise_profile: Option<PathBuf>,

    /// Output directory (created if absent).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Run experiment suites at the published protocol scale (|V|=64,
    /// 50 repetitions, N_a=1000) instead of desk scale.
    #[arg(long, global = true)]
    paper_scale: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Clique,
    VertexCover,
}

impl From<ProblemArg> for ReductionKind {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Clique => ReductionKind::MaxClique,
            ProblemArg::VertexCover => ReductionKind::MinVertexCover,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Qubit,
    Chain,
}

impl From<LevelArg> for MaskLevel {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Qubit => MaskLevel::Qubit,
            LevelArg::Chain => MaskLevel::Chain,
        }
    }
}

#[derive(Args)]
struct GaParams {
    #[arg(long, default_value_t = 80)]
    population: usize,
    #[arg(long, default_value_t = 0.1)]
    p_spin: f64,
    #[arg(long, default_value_t = 0.1)]
    p_mat: f64,
    #[arg(long, default_value_t = 0.01)]
    p_mut: f64,
    #[arg(long, default_value_t = 100)]
    generations: usize,
    /// Reads per fitness evaluation (N_a).
    #[arg(long, default_value_t = 200)]
    anneals: usize,
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded Erdős–Rényi graph (edge list + metadata).
    Generate {
        #[arg(long, default_value_t = 12)]
        vertices: usize,
        #[arg(long, default_value_t = 0.5)]
        edge_probability: f64,
    },
    /// Reduce a graph to a Maximum Clique or Minimum Vertex Cover QUBO.
    Reduce {
        /// Edge-list file produced by `generate`.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        problem: ProblemArg,
        #[arg(long)]
        penalty_a: Option<f64>,
        #[arg(long)]
        penalty_b: Option<f64>,
    },
    /// Embed a model onto a Chimera topology (clique embedding).
    Embed {
        /// Model JSON (Ising or QUBO; QUBOs are converted).
        #[arg(long)]
        model: PathBuf,
        /// Topology as rows,cols,shore.
        #[arg(long, default_value = "4,4,4")]
        chimera: String,
        /// Defaults to twice the largest logical coefficient.
        #[arg(long)]
        chain_strength: Option<f64>,
    },
    /// Sample a model with the noisy annealer emulation.
    Sample {
        #[arg(long)]
        model: PathBuf,
        /// Mask JSON file for a fixed-gauge solve.
        #[arg(long, conflicts_with_all = ["random_mask", "native"])]
        mask: Option<PathBuf>,
        /// Draw one random mask with this flip probability.
        #[arg(long, conflicts_with = "native")]
        random_mask: Option<f64>,
        /// Native-style mode: split reads across this many random gauges.
        #[arg(long)]
        native: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        reads: usize,
        #[arg(long, default_value_t = 1000)]
        sweeps: usize,
        /// Score fraction (mean of the lowest fraction of reads).
        #[arg(long, default_value_t = 0.01)]
        fraction: f64,
    },
    /// Optimize the reversal mask with the genetic algorithm.
    Ga {
        #[arg(long)]
        model: PathBuf,
        /// Embedding JSON; required for chain level.
        #[arg(long)]
        embedding: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "qubit")]
        level: LevelArg,
        #[command(flatten)]
        params: GaParams,
        /// Resume from a checkpoint written by a previous run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Sweep the reversal probability p_s against the standard anneal.
    SweepPs {
        #[arg(long, value_enum, default_value = "clique")]
        problem: ProblemArg,
        #[arg(long, value_enum, default_value = "qubit")]
        level: LevelArg,
        /// Full sweep configuration as JSON (overrides other flags).
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// GA parameter study on a fixed instance.
    GaStudy {
        /// One of: N, p_spin, p_mat, p_mut.
        #[arg(long)]
        parameter: String,
        /// Override the studied values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "qubit")]
        level: LevelArg,
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Compare GA-optimized masks against the native emulation.
    GaVsNative {
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Render a mask on the Chimera grid (blue = reversed, red = not,
    /// gray = idle).
    RenderLayout {
        #[arg(long, default_value = "4,4,4")]
        chimera: String,
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long, default_value = "layout.svg")]
        file: String,
    },
}

fn parse_topology(text: &str) -> Result<(TopologySpec, ChimeraTopology)> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("expected rows,cols,shore, got {text:?}")));
    }
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.trim().parse().map_err(|_| Error::Parse(format!("bad dimension {p:?}"))))
        .collect::<Result<_>>()?;
    let spec = TopologySpec { rows: nums[0], cols: nums[1], shore: nums[2] };
    let topo = spec.build()?;
    Ok((spec, topo))
}

fn load_noise(path: Option<&Path>, chip_seed: u64) -> Result<NoiseModel> {
    match path {
        None => Ok(NoiseModel::default().with_chip_seed(chip_seed)),
        Some(p) => {
            let text = fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn load_ising(path: &Path) -> Result<(IsingModel, Option<serde_json::Value>)> {
    let text = fs::read_to_string(path)?;
    let (model, meta) = read_model(&text)?;
    Ok((model.into_ising(), meta))
}

fn mask_to_json(mask: &SpinReversalMask) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "length": mask.len(),
        "popcount": mask.popcount(),
        "bitstring": mask.bitstring(),
    }))
    .expect("mask serialization")
}

fn mask_from_json(path: &Path) -> Result<SpinReversalMask> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let bits = value
        .get("bitstring")
        .and_then(|b| b.as_str())
        .ok_or_else(|| Error::Parse("mask file needs a \"bitstring\" field".into()))?;
    SpinReversalMask::from_bitstring(bits)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    fs::create_dir_all(&cli.out)?;
    let out = cli.out.clone();
    match cli.command {
        Command::Generate { vertices, edge_probability } => {
            let graph = erdos_renyi(vertices, edge_probability, cli.seed)?;
            write(&out.join("graph.edges"), &graph.to_edge_list())?;
            let meta = GraphMetadata {
                vertex_count: vertices,
                edge_probability,
                seed: cli.seed,
                generator: GENERATOR_NAME.to_string(),
            };
            write(&out.join("graph.meta.json"), &serde_json::to_string_pretty(&meta)?)?;
            println!("{} vertices, {} edges", graph.vertex_count(), graph.edge_count());
        }

        Command::Reduce { graph, problem, penalty_a, penalty_b } => {
            let text = fs::read_to_string(&graph)?;
            let g = Graph::from_edge_list(&text)?;
            let kind: ReductionKind = problem.into();
            let reduction = match kind {
                ReductionKind::MaxClique => max_clique_qubo(
                    &g,
                    penalty_a.unwrap_or(DEFAULT_CLIQUE_A),
                    penalty_b.unwrap_or(DEFAULT_CLIQUE_B),
                )?,
                ReductionKind::MinVertexCover => min_vertex_cover_qubo(
                    &g,
                    penalty_a.unwrap_or(DEFAULT_COVER_A),
                    penalty_b.unwrap_or(DEFAULT_COVER_B),
                )?,
            };
            let mut metadata = serde_json::json!({
                "problem": kind,
                "penalty_a": reduction.penalty_a,
                "penalty_b": reduction.penalty_b,
                "vertices": g.vertex_count(),
                "edges": g.edge_count(),
            });
            // carry the generation record along when it sits next to the graph
            let meta_path = graph.with_extension("meta.json");
            if let Ok(graph_meta) = fs::read_to_string(&meta_path) {
                if let Ok(v) = serde_json::from_str::<serde_json::Value>(&graph_meta) {
                    metadata["graph"] = v;
                }
            }
            write(&out.join("model.json"), &reduction.qubo.to_json_with(metadata))?;
        }

        Command::Embed { model, chimera, chain_strength } => {
            let (_, topo) = parse_topology(&chimera)?;
            let (logical, _) = load_ising(&model)?;
            let embedding = embed_complete(logical.num_vars(), &topo)?;
            let strength = chain_strength.unwrap_or_else(|| default_chain_strength(&logical));
            let physical = embed_model(&logical, &embedding, &topo, strength)?;
            write(&out.join("embedding.json"), &embedding.to_json())?;
            let metadata = serde_json::json!({
                "topology": {"rows": topo.rows(), "cols": topo.cols(), "shore": topo.shore()},
                "chain_strength": strength,
                "qubit_ids": physical.qubit_ids(),
                "logical_vars": logical.num_vars(),
                "max_chain_length": embedding.max_chain_length(),
            });
            write(&out.join("physical.json"), &physical.model().to_json_with(metadata))?;
            println!(
                "{} logical vars -> {} physical qubits (chain strength {})",
                logical.num_vars(),
                physical.num_qubits(),
                strength
            );
        }

        Command::Sample { model, mask, random_mask, native, reads, sweeps, fraction } => {
            let (ising, _) = load_ising(&model)?;
            let noise = load_noise(cli.noise_profile.as_deref(), cli.seed)?;
            let cfg = SamplerConfig::new(reads, cli.seed).with_sweeps(sweeps);
            let (set, mode) = if let Some(n_s) = native {
                (solve_native(&ising, reads, n_s, &noise, &cfg)?, format!("native(N_s={n_s})"))
            } else if let Some(path) = mask {
                let m = mask_from_json(&path)?;
                (solve_with_mask(&ising, &m, &noise, &cfg)?, "mask(file)".to_string())
            } else if let Some(p_s) = random_mask {
                let m = SpinReversalMask::random(ising.num_vars(), p_s, cli.seed)?;
                write(&out.join("mask.json"), &mask_to_json(&m))?;
                (solve_with_mask(&ising, &m, &noise, &cfg)?, format!("mask(p_s={p_s})"))
            } else {
                (sample(&ising, &noise, &cfg)?, "standard".to_string())
            };
            let meta = serde_json::json!({
                "mode": mode,
                "seed": cli.seed,
                "config": cfg,
                "noise": noise,
            });
            write(&out.join("samples.csv"), &set.to_csv(&meta))?;
            println!(
                "best energy {} | {}-score {}",
                set.best_energy(),
                fraction,
                set.score(fraction)?
            );
        }

        Command::Ga { model, embedding, level, params, resume } => {
            let (ising, _) = load_ising(&model)?;
            let noise = load_noise(cli.noise_profile.as_deref(), cli.seed)?;
            let sampler = SamplerConfig::new(params.anneals, 0).with_sweeps(params.sweeps);
            let level: MaskLevel = level.into();
            let evaluator = match level {
                MaskLevel::Qubit => SamplerEvaluator::qubit_level(ising, noise, sampler),
                MaskLevel::Chain => {
                    let path = embedding.ok_or_else(|| {
                        Error::InvalidArgument("chain level requires --embedding".into())
                    })?;
                    let emb = Embedding::from_json(&fs::read_to_string(&path)?)?;
                    SamplerEvaluator::chain_level_parts(ising, emb, noise, sampler)?
                }
            };
            let checkpoint_path = out.join("checkpoint.json");
            let history_path = out.join("history.csv");
            let observer = |cp: &GaCheckpoint| -> Result<()> {
                fs::write(&checkpoint_path, cp.to_json())?;
                fs::write(&history_path, cp.history.to_csv())?;
                Ok(())
            };
            let outcome = match resume {
                Some(path) => {
                    let cp = GaCheckpoint::from_json(&fs::read_to_string(&path)?)?;
                    println!("resuming at generation {}", cp.next_generation);
                    spinrev::ga::resume_ga(&evaluator, &cp)?
                }
                None => {
                    let cfg = GaConfig {
                        population: params.population,
                        p_spin: params.p_spin,
                        p_mat: params.p_mat,
                        p_mut: params.p_mut,
                        generations: params.generations,
                        anneals: params.anneals,
                        level,
                        seed: cli.seed,
                    };
                    run_ga_with(&evaluator, &cfg, observer)?
                }
            };
            write(&history_path, &outcome.history.to_csv())?;
            write(&out.join("best_mask.json"), &mask_to_json(&outcome.best.mask))?;
            println!(
                "best fitness {} (popcount {} of {})",
                outcome.best.fitness,
                outcome.best.mask.popcount(),
                outcome.best.mask.len()
            );
        }

        Command::SweepPs { problem, level, spec } => {
            let config = match spec {
                Some(path) => serde_json::from_str(&fs::read_to_string(&path)?)?,
                None => {
                    let mut c = if cli.paper_scale {
                        SweepConfig::paper(problem.into(), cli.seed)
                    } else {
                        SweepConfig::desk(problem.into(), cli.seed)
                    };
                    c.level = level.into();
                    c.noise = load_noise(cli.noise_profile.as_deref(), cli.seed)?;
                    c
                }
            };
            let result = sweep_ps(&config)?;
            write(&out.join("sweep_config.json"), &serde_json::to_string_pretty(&config)?)?;
            write(&out.join("sweep_summary.csv"), &result.summary_csv())?;
            write(&out.join("sweep_detail.csv"), &result.detail_csv())?;
            write(&out.join("sweep.svg"), &result.chart_svg()?)?;
        }

        Command::GaStudy { parameter, values, level, spec } => {
            let config = match spec {
                Some(path) => serde_json::from_str(&fs::read_to_string(&path)?)?,
                None => {
                    let parameter: StudyParameter = parameter.parse()?;
                    let level: MaskLevel = level.into();
                    let mut c = StudyConfig::desk(parameter, level, cli.seed);
                    if cli.paper_scale {
                        c.vertices = 64;
                        c.anneals = 1000;
                        c.sweeps = 1000;
                        c.topology = TopologySpec::paper();
                    }
                    if let Some(values) = values {
                        c.values = values;
                    }
                    c.noise = load_noise(cli.noise_profile.as_deref(), cli.seed)?;
                    c
                }
            };
            let result = ga_param_study(&config)?;
            write(&out.join("study_config.json"), &serde_json::to_string_pretty(&config)?)?;
            write(&out.join("study.csv"), &result.to_csv())?;
            write(&out.join("study.svg"), &result.chart_svg()?)?;
        }

        Command::GaVsNative { spec } => {
            let config: CompareConfig = match spec {
                Some(path) => serde_json::from_str(&fs::read_to_string(&path)?)?,
                None => {
                    let mut c = if cli.paper_scale {
                        CompareConfig::paper(cli.seed)
                    } else {
                        CompareConfig::desk(cli.seed)
                    };
                    c.noise = load_noise(cli.noise_profile.as_deref(), cli.seed)?;
                    c
                }
            };
            let result = ga_vs_native(&config)?;
            write(&out.join("compare_config.json"), &serde_json::to_string_pretty(&config)?)?;
            write(&out.join("compare.csv"), &result.to_csv())?;
            write(&out.join("compare.svg"), &result.chart_svg()?)?;
            for p in &result.problems {
                println!("{}: native score {}", p.problem, p.native_score);
            }
        }

        Command::RenderLayout { chimera, embedding, mask, file } => {
            let (_, topo) = parse_topology(&chimera)?;
            let emb = Embedding::from_json(&fs::read_to_string(&embedding)?)?;
            let m = mask_from_json(&mask)?;
            let path = out.join(file);
            experiments::render_layout(&topo, &emb, &m, &path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
