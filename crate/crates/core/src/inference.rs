//! Maximising a block-model objective over partitions.
//!
//! A run builds an initial partition, optionally climbs to a local optimum
//! with Kernighan-Lin passes, then refines with single-vertex heat-bath
//! updates at temperature 1, keeping the best state visited.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Degrees, Graph};
use crate::likelihood::ModelSpec;
use crate::objective::{objective, ObjectiveState};
use crate::partition::Partition;
use crate::stats::NeighborCounts;

/// Gains at or below this are treated as no improvement by KL passes.
const KL_MIN_GAIN: f64 = 1e-10;
const KL_MAX_PASSES: usize = 10_000;

pub type ChainRng = ChaCha8Rng;

/// RNG for run `run` of an experiment seeded with `seed`.
pub fn run_rng(seed: u64, run: usize) -> ChainRng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(run as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Random,
    /// Degree-direction heuristic, directed graphs only.
    NaiveHeuristic,
    Given(Partition),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceConfig {
    pub k: usize,
    pub mcmc_steps: u64,
    pub runs: usize,
    pub init: Init,
    pub use_kl: bool,
    pub seed: u64,
    pub model: ModelSpec,
}

impl InferenceConfig {
    pub fn new(model: ModelSpec, k: usize) -> Self {
        InferenceConfig {
            k,
            mcmc_steps: 1_000_000,
            runs: 10,
            init: Init::Random,
            use_kl: true,
            seed: 0,
            model,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    pub best_partition: Partition,
    pub best_objective: f64,
    /// `(run index, best objective of that run)`.
    pub per_run_trace: Vec<(usize, f64)>,
    pub seed: u64,
}

/// Labels a vertex 0 when it has more out- than in-edges, 1 for the reverse,
/// and flips a fair coin on ties.
pub fn naive_heuristic<R: Rng + ?Sized>(degrees: &Degrees, rng: &mut R) -> Result<Partition> {
    if !degrees.directed {
        return Err(Error::Usage(
            "the naive heuristic needs edge directions (directed graph)".into(),
        ));
    }
    let labels = degrees
        .d_out
        .iter()
        .zip(&degrees.d_in)
        .map(|(o, i)| match o.cmp(i) {
            std::cmp::Ordering::Greater => 0,
            std::cmp::Ordering::Less => 1,
            std::cmp::Ordering::Equal => rng.random_range(0..2),
        })
        .collect();
    Partition::new(2, labels)
}

pub fn random_partition<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Partition {
    let labels = (0..n).map(|_| rng.random_range(0..k)).collect();
    Partition::new(k, labels).expect("labels drawn below k")
}

/// Scratch space for heat-bath updates.
#[derive(Debug, Clone)]
pub struct HeatBathScratch {
    counts: NeighborCounts,
    deltas: Vec<f64>,
}

impl HeatBathScratch {
    pub fn new(k: usize) -> Self {
        HeatBathScratch {
            counts: NeighborCounts::zeros(k),
            deltas: vec![0.0; k],
        }
    }
}

/// Resamples the label of `v` from its exact conditional distribution
/// `∝ exp(objective)` given all other labels. Returns the new label.
pub fn heat_bath_update<R: Rng + ?Sized>(
    state: &mut ObjectiveState<'_>,
    v: usize,
    rng: &mut R,
    scratch: &mut HeatBathScratch,
) -> usize {
    let k = state.k();
    let current = state.label(v);
    if k == 1 {
        return current;
    }
    state.neighbor_counts(v, &mut scratch.counts);
    let mut max = f64::NEG_INFINITY;
    for t in 0..k {
        let d = state.delta(v, t, &scratch.counts);
        scratch.deltas[t] = d;
        max = max.max(d);
    }
    let mut total = 0.0;
    for d in scratch.deltas.iter_mut() {
        *d = (*d - max).exp();
        total += *d;
    }
    let mut u = rng.random::<f64>() * total;
    let mut chosen = k - 1;
    for (t, &w) in scratch.deltas.iter().enumerate() {
        if u < w {
            chosen = t;
            break;
        }
        u -= w;
    }
    if chosen != current {
        let d = state.delta(v, chosen, &scratch.counts);
        state.apply(v, chosen, &scratch.counts, d);
    }
    chosen
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcOutcome {
    pub best_partition: Partition,
    pub best_objective: f64,
    /// `(step, objective)` sampled about 100 times along the chain.
    pub trace: Vec<(u64, f64)>,
}

/// Runs `steps` heat-bath updates on uniformly chosen vertices. The state is
/// left at the final sample; the best state visited (including the start) is
/// returned.
pub fn heat_bath_mcmc<R: Rng + ?Sized>(
    state: &mut ObjectiveState<'_>,
    steps: u64,
    rng: &mut R,
) -> McmcOutcome {
    let n = state.partition().len();
    let mut best_partition = state.partition().clone();
    let mut best_objective = state.value();
    let every = (steps / 100).max(1);
    let mut trace = vec![(0, best_objective)];
    if n == 0 || state.k() == 1 {
        return McmcOutcome {
            best_partition,
            best_objective,
            trace,
        };
    }
    let mut scratch = HeatBathScratch::new(state.k());
    for step in 1..=steps {
        let v = rng.random_range(0..n);
        heat_bath_update(state, v, rng, &mut scratch);
        if state.value() > best_objective {
            best_objective = state.value();
            best_partition.clone_from(state.partition());
        }
        if step % every == 0 {
            trace.push((step, state.value()));
        }
    }
    McmcOutcome {
        best_partition,
        best_objective,
        trace,
    }
}

/// Kernighan-Lin local search under single-vertex moves.
///
/// Each pass moves every vertex exactly once, always taking the best
/// remaining move even when it lowers the objective, then rolls back to the
/// best intermediate state. Passes repeat until one fails to improve.
/// Returns the number of passes.
pub fn kl_heuristic(state: &mut ObjectiveState<'_>) -> usize {
    let n = state.partition().len();
    let k = state.k();
    if n == 0 || k == 1 {
        return 0;
    }
    let graph = state.graph().clone();
    let mut passes = 0;
    while passes < KL_MAX_PASSES {
        passes += 1;
        let mut cache: Vec<NeighborCounts> = (0..n)
            .map(|v| NeighborCounts::compute(&graph, state.partition().labels(), v, k))
            .collect();
        let mut moved = vec![false; n];
        let mut history: Vec<(usize, usize)> = Vec::with_capacity(n);
        let mut gain = 0.0;
        let mut best_gain = 0.0;
        let mut best_len = 0;
        for _ in 0..n {
            let mut best: Option<(usize, usize, f64)> = None;
            for v in (0..n).filter(|&v| !moved[v]) {
                let from = state.label(v);
                for t in (0..k).filter(|&t| t != from) {
                    let d = state.delta(v, t, &cache[v]);
                    if best.is_none_or(|(_, _, bd)| d > bd) {
                        best = Some((v, t, d));
                    }
                }
            }
            let Some((v, to, d)) = best else { break };
            let from = state.label(v);
            state.apply(v, to, &cache[v], d);
            for &(w, c) in graph.out_neighbors(v) {
                cache[w].in_from[from] -= c;
                cache[w].in_from[to] += c;
            }
            for &(w, c) in graph.in_neighbors(v) {
                cache[w].out_to[from] -= c;
                cache[w].out_to[to] += c;
            }
            moved[v] = true;
            history.push((v, from));
            gain += d;
            if gain > best_gain + KL_MIN_GAIN {
                best_gain = gain;
                best_len = history.len();
            }
        }
        for &(v, from) in history[best_len..].iter().rev() {
            state.move_vertex(v, from);
        }
        state.resync();
        if best_len == 0 {
            break;
        }
    }
    passes
}

fn initial_partition(
    config: &InferenceConfig,
    original: &Graph,
    rng: &mut ChainRng,
) -> Result<Partition> {
    let n = original.num_vertices();
    match &config.init {
        Init::Random => Ok(random_partition(n, config.k, rng)),
        Init::NaiveHeuristic => {
            if config.k < 2 {
                return Err(Error::Usage("the naive heuristic needs k >= 2".into()));
            }
            let p = naive_heuristic(&original.degrees(), rng)?;
            Partition::new(config.k, p.into_labels())
        }
        Init::Given(p) => {
            if p.len() != n {
                return Err(Error::contract(format!(
                    "initial partition covers {} vertices, graph has {n}",
                    p.len()
                )));
            }
            if p.k() > config.k {
                return Err(Error::contract(format!(
                    "initial partition uses {} blocks, k = {}",
                    p.k(),
                    config.k
                )));
            }
            Partition::new(config.k, p.labels().to_vec())
        }
    }
}

/// Graph the model is evaluated on: undirected families see the projection
/// of a directed input.
pub fn model_view(graph: &Graph, model: &ModelSpec) -> Result<Option<Graph>> {
    match (graph.is_directed(), model.family.is_directed()) {
        (true, false) => Ok(Some(graph.undirected_projection()?)),
        (false, true) => Err(Error::Usage(format!(
            "model {} needs a directed graph",
            model.name()
        ))),
        _ => Ok(None),
    }
}

/// Best of `config.runs` independent runs. Run `i` uses seed `config.seed + i`.
pub fn run_inference(graph: &Graph, config: &InferenceConfig) -> Result<InferenceResult> {
    if config.k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    if config.runs == 0 {
        return Err(Error::config("runs must be at least 1"));
    }
    if graph.num_vertices() == 0 {
        return Err(Error::EmptyGraph);
    }
    let projected = model_view(graph, &config.model)?;
    let work = projected.as_ref().unwrap_or(graph);

    let runs: Vec<(Partition, f64)> = (0..config.runs)
        .into_par_iter()
        .map(|run| -> Result<(Partition, f64)> {
            let mut rng = run_rng(config.seed, run);
            let init = initial_partition(config, graph, &mut rng)?;
            let mut state = ObjectiveState::new(work, &config.model, init)?;
            let start = (state.partition().clone(), state.value());
            if config.use_kl {
                kl_heuristic(&mut state);
            }
            let outcome = heat_bath_mcmc(&mut state, config.mcmc_steps, &mut rng);
            let mut best = if outcome.best_objective >= start.1 {
                outcome.best_partition
            } else {
                start.0
            };
            let value = objective(&config.model, work, &best)?;
            // keep labels tidy: the returned partition retains k blocks
            best = Partition::new(config.k, best.into_labels())?;
            Ok((best, value))
        })
        .collect::<Result<_>>()?;

    let per_run_trace = runs.iter().enumerate().map(|(i, r)| (i, r.1)).collect();
    let (best_partition, best_objective) = runs
        .into_iter()
        .reduce(|a, b| if b.1 > a.1 { b } else { a })
        .expect("at least one run");
    Ok(InferenceResult {
        best_partition,
        best_objective,
        per_run_trace,
        seed: config.seed,
    })
}
