//! Genetic search over spin-reversal masks.
//!
//! Individuals are boolean vectors interpreted as reversal masks; fitness
//! is the minimal energy observed in N_a anneals of the gauged model.
//! Each generation keeps the proportion p_mat of lowest-fitness
//! individuals as the mating pool, breeds N children by uniform crossover
//! of two pool members, mutates every bit with probability p_mut, and
//! carries the generation's best individual forward unmutated in place of
//! one child so the best solution found is never lost. After R
//! generations the final population is re-evaluated once more and the
//! argmin mask returned.
//!
//! All randomness derives from (seed, generation, index) paths, so runs
//! are reproducible, population members evaluate in parallel without
//! affecting results, and an interrupted run resumed from a checkpoint
//! finishes with the identical outcome.

use serde::{Deserialize, Serialize};

use crate::chimera::{expand_chain_mask, Embedding, PhysicalIsing};
use crate::error::{Error, Result};
use crate::exec;
use crate::gauge::SpinReversalMask;
use crate::model::IsingModel;
use crate::noise::NoiseModel;
use crate::sampler::{solve_with_mask, SampleSet, SamplerConfig};
use crate::seed::{self, Role};

/// Whether masks act per physical qubit or per logical chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskLevel {
    Qubit,
    Chain,
}

/// Algorithm parameters (population N, init probability p_spin, mating
/// proportion p_mat, mutation probability p_mut, generations R, anneals
/// per evaluation N_a).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub p_spin: f64,
    pub p_mat: f64,
    pub p_mut: f64,
    pub generations: usize,
    pub anneals: usize,
    pub level: MaskLevel,
    pub seed: u64,
}

impl GaConfig {
    /// The production parameter set: N=80, p_spin=0.1, p_mat=0.1,
    /// p_mut=0.01, R=100.
    pub fn standard(seed: u64) -> Self {
        GaConfig {
            population: 80,
            p_spin: 0.1,
            p_mat: 0.1,
            p_mut: 0.01,
            generations: 100,
            anneals: 1000,
            level: MaskLevel::Qubit,
            seed,
        }
    }

    /// The parameter-study base set: N=20, p_spin=0.1, p_mat=0.1,
    /// p_mut=0.01.
    pub fn base_study(seed: u64) -> Self {
        GaConfig { population: 20, ..GaConfig::standard(seed) }
    }

    pub fn with_generations(mut self, generations: usize) -> Self {
        self.generations = generations;
        self
    }

    pub fn with_anneals(mut self, anneals: usize) -> Self {
        self.anneals = anneals;
        self
    }

    pub fn with_level(mut self, level: MaskLevel) -> Self {
        self.level = level;
        self
    }

    pub fn with_population(mut self, population: usize) -> Self {
        self.population = population;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Mating pool size: ceil(p_mat · N).
    pub fn mating_pool_size(&self) -> usize {
        (self.p_mat * self.population as f64).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::invalid("population must be at least 2"));
        }
        for (name, p) in [("p_spin", self.p_spin), ("p_mat", self.p_mat), ("p_mut", self.p_mut)] {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::invalid(format!("{name} = {p} outside (0,1]")));
            }
        }
        if self.mating_pool_size() < 2 {
            return Err(Error::invalid(format!(
                "ceil(p_mat*N) = {} but crossover needs two parents",
                self.mating_pool_size()
            )));
        }
        if self.generations == 0 {
            return Err(Error::invalid("generations must be at least 1"));
        }
        if self.anneals == 0 {
            return Err(Error::invalid("anneals per evaluation must be at least 1"));
        }
        Ok(())
    }
}

/// An evaluated population member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub mask: SpinReversalMask,
    /// Minimal energy among the N_a anneals.
    pub fitness: f64,
    /// 1%-mean score of the same anneal batch.
    pub score: f64,
    pub eval_seed: u64,
}

/// Fitness summary of one evaluation batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskEvaluation {
    pub fitness: f64,
    pub score: f64,
}

/// Binding of the annealer to a fixed (model, noise, sampler) context so
/// fitness values are comparable across a whole run.
pub trait MaskEvaluator: Sync {
    /// Length of the masks this evaluator accepts.
    fn mask_len(&self) -> usize;

    /// N_a anneals of the gauged model; deterministic in `eval_seed`.
    fn evaluate(&self, mask: &SpinReversalMask, eval_seed: u64) -> Result<MaskEvaluation>;
}

/// [`MaskEvaluator`] backed by the noisy sampler, at qubit or chain level.
#[derive(Debug, Clone)]
pub struct SamplerEvaluator {
    model: IsingModel,
    noise: NoiseModel,
    config: SamplerConfig,
    /// Present for chain-level operation: logical-length masks are
    /// expanded to whole chains before submission.
    embedding: Option<Embedding>,
}

impl SamplerEvaluator {
    /// Masks address the model's variables directly.
    pub fn qubit_level(model: IsingModel, noise: NoiseModel, config: SamplerConfig) -> Self {
        SamplerEvaluator { model, noise, config, embedding: None }
    }

    /// Masks address logical chains of an embedded model.
    pub fn chain_level(physical: &PhysicalIsing, noise: NoiseModel, config: SamplerConfig) -> Self {
        SamplerEvaluator {
            model: physical.model().clone(),
            noise,
            config,
            embedding: Some(physical.embedding().clone()),
        }
    }

    /// Chain level from separately loaded parts; the model must be the
    /// embedded one in the embedding's compact frame.
    pub fn chain_level_parts(
        model: IsingModel,
        embedding: Embedding,
        noise: NoiseModel,
        config: SamplerConfig,
    ) -> Result<Self> {
        let active = embedding.active_qubits().len();
        if model.num_vars() != active {
            return Err(Error::LengthMismatch { expected: active, actual: model.num_vars() });
        }
        Ok(SamplerEvaluator { model, noise, config, embedding: Some(embedding) })
    }

    /// Full read-outs for a mask (the trait summarizes these).
    pub fn evaluate_set(&self, mask: &SpinReversalMask, eval_seed: u64) -> Result<SampleSet> {
        let submitted = match &self.embedding {
            None => mask.clone(),
            Some(emb) => expand_chain_mask(mask, emb)?,
        };
        let cfg = self.config.with_seed(eval_seed);
        solve_with_mask(&self.model, &submitted, &self.noise, &cfg)
    }
}

impl MaskEvaluator for SamplerEvaluator {
    fn mask_len(&self) -> usize {
        match &self.embedding {
            None => self.model.num_vars(),
            Some(emb) => emb.num_chains(),
        }
    }

    fn evaluate(&self, mask: &SpinReversalMask, eval_seed: u64) -> Result<MaskEvaluation> {
        let set = self.evaluate_set(mask, eval_seed)?;
        Ok(MaskEvaluation { fitness: set.best_energy(), score: set.one_percent_score() })
    }
}

/// Per-generation record; `cumulative_*` fields track the best individual
/// seen so far, which is non-increasing in fitness by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub worst_fitness: f64,
    /// Reversed-bit count of this generation's best individual.
    pub best_popcount: usize,
    /// 1%-mean score of this generation's best individual.
    pub best_score: f64,
    pub cumulative_best_fitness: f64,
    pub cumulative_best_popcount: usize,
    pub cumulative_best_score: f64,
}

/// Fitness trace of a whole run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GaHistory {
    pub generations: Vec<GenerationStats>,
}

impl GaHistory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "generation,best_e,mean_e,worst_e,best_popcount,best_score,cum_best_e,cum_best_popcount,cum_best_score\n",
        );
        for row in &self.generations {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
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
        out
    }
}

/// Result of a finished run.
#[derive(Debug, Clone)]
pub struct GaOutcome {
    /// Argmin of the final re-evaluation.
    pub best: Individual,
    /// Final population with re-evaluated fitness.
    pub population: Vec<Individual>,
    pub history: GaHistory,
}

/// Everything needed to resume an interrupted run after generation
/// `next_generation - 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaCheckpoint {
    pub config: GaConfig,
    pub next_generation: usize,
    /// Masks of the population awaiting evaluation, as bitstrings.
    pub population: Vec<String>,
    pub history: GaHistory,
    pub best_so_far: Option<Individual>,
}

impl GaCheckpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serialization")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    fn population_masks(&self) -> Result<Vec<SpinReversalMask>> {
        self.population.iter().map(|s| SpinReversalMask::from_bitstring(s)).collect()
    }
}

/// Uniform crossover: each child bit comes from `parent_a` with
/// probability 0.5, else from `parent_b`.
pub fn crossover(
    parent_a: &SpinReversalMask,
    parent_b: &SpinReversalMask,
    rng_seed: u64,
) -> Result<SpinReversalMask> {
    if parent_a.len() != parent_b.len() {
        return Err(Error::LengthMismatch { expected: parent_a.len(), actual: parent_b.len() });
    }
    use rand::Rng;
    let mut rng = seed::rng(rng_seed, Role::GaCross, &[]);
    let bits = (0..parent_a.len())
        .map(|k| if rng.random::<bool>() { parent_a.get(k) } else { parent_b.get(k) })
        .collect();
    Ok(SpinReversalMask::from_bits(bits))
}

/// Flips each bit independently with probability `p_mut`.
pub fn mutate(mask: &SpinReversalMask, p_mut: f64, rng_seed: u64) -> Result<SpinReversalMask> {
    if !(0.0..=1.0).contains(&p_mut) {
        return Err(Error::invalid(format!("mutation probability {p_mut} outside [0,1]")));
    }
    use rand::Rng;
    let mut rng = seed::rng(rng_seed, Role::GaMutate, &[]);
    let bits = (0..mask.len())
        .map(|k| {
            let flip = rng.random::<f64>() < p_mut;
            mask.get(k) ^ flip
        })
        .collect();
    Ok(SpinReversalMask::from_bits(bits))
}

/// Evaluates a population; member i uses `eval_seed = derive(seed,
/// [eval-role, generation, i])` so evaluation order never matters.
pub fn evaluate_population<E: MaskEvaluator>(
    masks: &[SpinReversalMask],
    evaluator: &E,
    base_seed: u64,
    generation: usize,
) -> Result<Vec<Individual>> {
    let results = exec::map_indexed(masks.len(), |i| {
        let eval_seed =
            seed::derive(base_seed, &[Role::GaEval as u64, generation as u64, i as u64]);
        evaluator.evaluate(&masks[i], eval_seed).map(|eval| Individual {
            mask: masks[i].clone(),
            fitness: eval.fitness,
            score: eval.score,
            eval_seed,
        })
    });
    results.into_iter().collect()
}

fn best_index(population: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in population.iter().enumerate().skip(1) {
        if ind.fitness < population[best].fitness {
            best = i;
        }
    }
    best
}

/// Breeds the next generation from an evaluated one: selection, uniform
/// crossover, mutation, then the elite injection of `generation_best`.
fn breed(
    population: &[Individual],
    generation_best: &Individual,
    cfg: &GaConfig,
    generation: usize,
) -> Vec<SpinReversalMask> {
    use rand::Rng;
    let pool_size = cfg.mating_pool_size();
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| {
        population[a].fitness.total_cmp(&population[b].fitness).then(a.cmp(&b))
    });
    let pool: Vec<&SpinReversalMask> =
        order[..pool_size].iter().map(|&i| &population[i].mask).collect();

    let mut children = Vec::with_capacity(cfg.population);
    for c in 0..cfg.population {
        let mut pick_rng = seed::rng(cfg.seed, Role::GaCross, &[generation as u64, c as u64, 0]);
        let a = pick_rng.random_range(0..pool_size);
        let b = pick_rng.random_range(0..pool_size);
        let cross_seed =
            seed::derive(cfg.seed, &[Role::GaCross as u64, generation as u64, c as u64, 1]);
        let child = crossover(pool[a], pool[b], cross_seed).expect("pool masks share length");
        let mut_seed =
            seed::derive(cfg.seed, &[Role::GaMutate as u64, generation as u64, c as u64]);
        children.push(mutate(&child, cfg.p_mut, mut_seed).expect("validated p_mut"));
    }
    let mut elite_rng = seed::rng(cfg.seed, Role::GaElite, &[generation as u64]);
    let slot = elite_rng.random_range(0..cfg.population);
    children[slot] = generation_best.mask.clone();
    children
}

fn update_best(best_so_far: &mut Option<Individual>, candidate: &Individual) {
    let improved = match best_so_far {
        None => true,
        Some(b) => candidate.fitness < b.fitness,
    };
    if improved {
        *best_so_far = Some(candidate.clone());
    }
}

fn run_loop<E, F>(
    evaluator: &E,
    cfg: &GaConfig,
    start_generation: usize,
    mut masks: Vec<SpinReversalMask>,
    mut history: GaHistory,
    mut best_so_far: Option<Individual>,
    observer: &mut F,
) -> Result<GaOutcome>
where
    E: MaskEvaluator,
    F: FnMut(&GaCheckpoint) -> Result<()>,
{
    for r in start_generation..=cfg.generations {
        let population = evaluate_population(&masks, evaluator, cfg.seed, r)?;
        let best = best_index(&population);
        let worst = population.iter().map(|p| p.fitness).fold(f64::NEG_INFINITY, f64::max);
        let mean = population.iter().map(|p| p.fitness).sum::<f64>() / population.len() as f64;
        update_best(&mut best_so_far, &population[best]);
        let cumulative = best_so_far.as_ref().expect("set above");
        history.generations.push(GenerationStats {
            generation: r,
            best_fitness: population[best].fitness,
            mean_fitness: mean,
            worst_fitness: worst,
            best_popcount: population[best].mask.popcount(),
            best_score: population[best].score,
            cumulative_best_fitness: cumulative.fitness,
            cumulative_best_popcount: cumulative.mask.popcount(),
            cumulative_best_score: cumulative.score,
        });

        if r < cfg.generations {
            masks = breed(&population, &population[best], cfg, r);
        } else {
            masks = population.iter().map(|p| p.mask.clone()).collect();
        }
        observer(&GaCheckpoint {
            config: *cfg,
            next_generation: r + 1,
            population: masks.iter().map(SpinReversalMask::bitstring).collect(),
            history: history.clone(),
            best_so_far: best_so_far.clone(),
        })?;
    }

    // determine the final population's minimal energies one last time
    let results = exec::map_indexed(masks.len(), |i| {
        let eval_seed = seed::derive(cfg.seed, &[Role::GaFinal as u64, i as u64]);
        evaluator.evaluate(&masks[i], eval_seed).map(|eval| Individual {
            mask: masks[i].clone(),
            fitness: eval.fitness,
            score: eval.score,
            eval_seed,
        })
    });
    let final_population = results.into_iter().collect::<Result<Vec<Individual>>>()?;
    let best = final_population[best_index(&final_population)].clone();
    Ok(GaOutcome { best, population: final_population, history })
}

/// Runs the full algorithm; `observer` is called once per generation with
/// a resumable checkpoint (write it to disk to survive interruption).
pub fn run_ga_with<E, F>(evaluator: &E, cfg: &GaConfig, mut observer: F) -> Result<GaOutcome>
where
    E: MaskEvaluator,
    F: FnMut(&GaCheckpoint) -> Result<()>,
{
    cfg.validate()?;
    let n = evaluator.mask_len();
    let masks = (0..cfg.population)
        .map(|i| {
            let mask_seed = seed::derive(cfg.seed, &[Role::GaInit as u64, i as u64]);
            SpinReversalMask::random(n, cfg.p_spin, mask_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    run_loop(evaluator, cfg, 1, masks, GaHistory::default(), None, &mut observer)
}

/// Runs the full algorithm without observation.
pub fn run_ga<E: MaskEvaluator>(evaluator: &E, cfg: &GaConfig) -> Result<GaOutcome> {
    run_ga_with(evaluator, cfg, |_| Ok(()))
}

/// Continues an interrupted run; produces the same outcome as the
/// uninterrupted one because all randomness is derived per (generation,
/// index).
pub fn resume_ga<E: MaskEvaluator>(evaluator: &E, checkpoint: &GaCheckpoint) -> Result<GaOutcome> {
    let cfg = checkpoint.config;
    cfg.validate()?;
    let masks = checkpoint.population_masks()?;
    if masks.len() != cfg.population {
        return Err(Error::invalid(format!(
            "checkpoint population {} does not match configured {}",
            masks.len(),
            cfg.population
        )));
    }
    let mut observer = |_: &GaCheckpoint| Ok(());
    run_loop(
        evaluator,
        &cfg,
        checkpoint.next_generation,
        masks,
        checkpoint.history.clone(),
        checkpoint.best_so_far.clone(),
        &mut observer,
    )
}
