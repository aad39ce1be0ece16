//! Accuracy-versus-λ experiments on synthetic benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inference::{run_inference, InferenceConfig, Init};
use crate::likelihood::ModelSpec;
use crate::metrics::nmi;
use crate::priors::{BlockPriorSpec, PriorConfig};
use crate::synth::{generate, postprocess, SynthBlock, SynthSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub spec: SynthSpec,
    pub lambdas: Vec<f64>,
    pub models: Vec<ModelSpec>,
    pub networks: usize,
    pub runs: usize,
    pub steps: u64,
    pub use_kl: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub model: String,
    pub network: usize,
    pub nmi: f64,
    pub objective: f64,
    pub vertices: usize,
}

/// Degree-generated models learn only the family of each block's prior from
/// the benchmark; every parameter is fitted during inference.
pub fn priors_for_spec(spec: &SynthSpec) -> Result<PriorConfig> {
    PriorConfig::new(
        spec.blocks
            .iter()
            .map(|b| match b {
                SynthBlock::PowerLaw { .. } => BlockPriorSpec::FITTED_POWER_LAW,
                SynthBlock::Poisson { .. } => BlockPriorSpec::FITTED_POISSON,
            })
            .collect(),
    )
}

/// Seed of network `network` at λ index `li`.
pub fn network_seed(seed: u64, li: usize, networks: usize, network: usize) -> u64 {
    seed.wrapping_add((li * networks + network) as u64 * 1_000_003)
}

/// Generates `networks` graphs per λ, infers each with every model from random
/// starts, and scores the best partition against the truth by NMI. Rows come
/// back ordered by λ, network, then model.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.models.is_empty() {
        return Err(Error::Usage("no models given".into()));
    }
    if cfg.lambdas.is_empty() {
        return Err(Error::Usage("no lambda values given".into()));
    }
    if cfg.networks == 0 {
        return Err(Error::Usage("need at least one network per lambda".into()));
    }
    for &l in &cfg.lambdas {
        if !(0.0..=1.0).contains(&l) {
            return Err(Error::config(format!("lambda {l} outside [0, 1]")));
        }
    }
    let priors = priors_for_spec(&cfg.spec)?;
    let models: Vec<ModelSpec> = cfg
        .models
        .iter()
        .map(|m| {
            let mut m = m.clone();
            if m.is_degree_generated() {
                m.degree_prior = Some(priors.clone());
            }
            m
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cfg.lambdas.len())
        .flat_map(|li| (0..cfg.networks).map(move |ni| (li, ni)))
        .collect();
    let rows: Vec<Vec<SweepRow>> = jobs
        .par_iter()
        .map(|&(li, ni)| -> Result<Vec<SweepRow>> {
            let lambda = cfg.lambdas[li];
            let seed = network_seed(cfg.seed, li, cfg.networks, ni);
            let spec = SynthSpec { lambda, seed, ..cfg.spec.clone() };
            let net = generate(&spec, &mut ChaCha8Rng::seed_from_u64(seed))?;
            let (graph, truth) = postprocess(&net.graph, &net.truth, lambda)?;
            models
                .iter()
                .map(|model| {
                    let mut ic = InferenceConfig::new(model.clone(), cfg.spec.blocks.len());
                    ic.runs = cfg.runs;
                    ic.mcmc_steps = cfg.steps;
                    ic.use_kl = cfg.use_kl;
                    ic.init = Init::Random;
                    ic.seed = seed;
                    let res = run_inference(&graph, &ic)?;
                    Ok(SweepRow {
                        lambda,
                        model: model.name(),
                        network: ni,
                        nmi: nmi(&truth, &res.best_partition)?,
                        objective: res.best_objective,
                        vertices: graph.num_vertices(),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Mean NMI of `model` at `lambda` over the rows.
pub fn mean_nmi(rows: &[SweepRow], model: &str, lambda: f64) -> Option<f64> {
    let xs: Vec<f64> = rows
        .iter()
        .filter(|r| r.model == model && r.lambda == lambda)
        .map(|r| r.nmi)
        .collect();
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn format_rows(rows: &[SweepRow]) -> String {
    let mut s = String::from("lambda\tmodel\tnetwork\tnmi\tobjective\tvertices\n");
    for r in rows {
        s.push_str(&format!(
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{}\n",
            r.lambda, r.model, r.network, r.nmi, r.objective, r.vertices
        ));
    }
    s
}
