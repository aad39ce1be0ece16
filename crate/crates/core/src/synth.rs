//! Planted two-block benchmark networks with heavy-tailed and Poisson blocks.
//!
//! Expected block-pair edge counts `ω_rs` interpolate between a random and a
//! planted matrix. Given propensities `θ`, a pair `u ≠ v` with `u ∈ r`,
//! `v ∈ s` receives `Poi(θ_u θ_v ω_rs / (κ_r κ_s))` edges, where `κ_r` is the
//! realised `Σ θ` of block `r`, so that `ω` is the expected `m` matrix.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also catches NaN

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::config::{self, KeyValues};
use crate::error::{Error, Result};
use crate::graph::{ComponentMode, Graph};
use crate::partition::Partition;
use crate::priors::{sample_power_law, solve_theta_min_for_mean};

pub const BENCH_ALPHA: f64 = 1.7;
pub const BENCH_THETA_MAX: f64 = 1850.0;
pub const BENCH_MEAN: f64 = 20.0;

/// How one block's propensities are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum SynthBlock {
    /// Truncated continuous power law. Give `theta_min` directly or a target
    /// `mean` from which it is solved.
    PowerLaw {
        alpha: f64,
        theta_min: Option<f64>,
        theta_max: f64,
        mean: Option<f64>,
    },
    /// Poisson degrees of the given mean. By default every vertex gets
    /// `θ = mean`, so degrees are exactly Poisson under the edge law; with
    /// `draw_theta` each `θ` is itself an integer `Poi(mean)` draw, which
    /// doubles the degree variance.
    Poisson { mean: f64, draw_theta: bool },
}

impl SynthBlock {
    pub fn family_name(&self) -> &'static str {
        match self {
            SynthBlock::PowerLaw { .. } => "powerlaw",
            SynthBlock::Poisson { .. } => "poisson",
        }
    }

    /// Lower cutoff actually used by the power-law sampler.
    pub fn theta_min(&self) -> Result<Option<f64>> {
        match *self {
            SynthBlock::PowerLaw { alpha, theta_min: Some(t), theta_max, .. } => {
                if !(alpha > 1.0 && t > 0.0 && theta_max > t) {
                    return Err(Error::config(format!(
                        "power law needs alpha > 1 and 0 < theta_min < theta_max (got {alpha}, {t}, {theta_max})"
                    )));
                }
                Ok(Some(t))
            }
            SynthBlock::PowerLaw { alpha, theta_min: None, theta_max, mean } => {
                let mean = mean.ok_or_else(|| {
                    Error::config("power-law block needs theta_min or mean")
                })?;
                if !(alpha > 1.0) {
                    return Err(Error::config(format!("alpha must exceed 1 (got {alpha})")));
                }
                solve_theta_min_for_mean(alpha, theta_max, mean).map(Some)
            }
            SynthBlock::Poisson { mean, .. } => {
                if !(mean > 0.0 && mean.is_finite()) {
                    return Err(Error::config(format!("Poisson mean must be positive (got {mean})")));
                }
                Ok(None)
            }
        }
    }

    fn sampler(&self) -> Result<BlockSampler> {
        Ok(match *self {
            SynthBlock::PowerLaw { alpha, theta_max, .. } => BlockSampler::PowerLaw {
                alpha,
                theta_min: self.theta_min()?.expect("power law has a cutoff"),
                theta_max,
            },
            SynthBlock::Poisson { mean, draw_theta } => {
                self.theta_min()?;
                if draw_theta {
                    BlockSampler::Poisson(
                        Poisson::new(mean).map_err(|e| Error::config(format!("Poisson mean: {e}")))?,
                    )
                } else {
                    BlockSampler::Constant(mean)
                }
            }
        })
    }
}

enum BlockSampler {
    PowerLaw { alpha: f64, theta_min: f64, theta_max: f64 },
    Poisson(Poisson<f64>),
    Constant(f64),
}

impl BlockSampler {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match self {
            &BlockSampler::PowerLaw { alpha, theta_min, theta_max } => {
                sample_power_law(rng, alpha, theta_min, theta_max, 0.0)
            }
            BlockSampler::Poisson(p) => Ok(p.sample(rng)),
            &BlockSampler::Constant(c) => Ok(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub fractions: Vec<f64>,
    pub blocks: Vec<SynthBlock>,
    pub lambda: f64,
    pub directed: bool,
    /// Directed only: one draw per vertex serves as both `θ^out` and `θ^in`
    /// instead of two independent draws.
    pub shared_theta: bool,
    pub seed: u64,
}

impl SynthSpec {
    fn benchmark(n: usize, lambda: f64, directed: bool) -> Self {
        SynthSpec {
            n,
            fractions: vec![0.5, 0.5],
            blocks: vec![
                SynthBlock::PowerLaw {
                    alpha: BENCH_ALPHA,
                    theta_min: None,
                    theta_max: BENCH_THETA_MAX,
                    mean: Some(BENCH_MEAN),
                },
                SynthBlock::Poisson { mean: BENCH_MEAN, draw_theta: false },
            ],
            lambda,
            directed,
            shared_theta: false,
            seed: 0,
        }
    }

    /// Power-law block (α = 1.7, upper bound 1850, mean 20) beside a
    /// Poisson block of mean 20, equal sizes.
    pub fn undirected_benchmark(n: usize, lambda: f64) -> Self {
        Self::benchmark(n, lambda, false)
    }

    /// Directed counterpart of the undirected benchmark. Each vertex draws
    /// one propensity from its block's law and uses it for both directions.
    pub fn directed_benchmark(n: usize, lambda: f64) -> Self {
        SynthSpec {
            shared_theta: true,
            ..Self::benchmark(n, lambda, true)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::config(format!("lambda must lie in [0, 1] (got {})", self.lambda)));
        }
        if self.blocks.len() != 2 || self.fractions.len() != 2 {
            return Err(Error::config("synthetic networks have exactly two blocks"));
        }
        if self.fractions.iter().any(|&f| !(f > 0.0)) {
            return Err(Error::config("block fractions must be positive"));
        }
        let sum: f64 = self.fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("block fractions sum to {sum}, not 1")));
        }
        if self.n < 2 {
            return Err(Error::config("need at least two vertices"));
        }
        for b in &self.blocks {
            b.theta_min()?;
        }
        Ok(())
    }

    /// Vertices per block; the last block absorbs rounding.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self
            .fractions
            .iter()
            .map(|f| (f * self.n as f64).round() as usize)
            .collect();
        let head: usize = sizes[..sizes.len() - 1].iter().sum();
        *sizes.last_mut().expect("validated") = self.n.saturating_sub(head);
        sizes
    }

    /// Reads `n`, `lambda`, `directed`, `seed`, `fractions` and per-block
    /// `block.<r>.family` with `alpha`/`theta_min`/`theta_max`/`mean`.
    pub fn from_keys(kv: &KeyValues) -> Result<Self> {
        let n = config::require(kv, "n")?;
        let lambda = config::require(kv, "lambda")?;
        let directed = config::get(kv, "directed")?.unwrap_or(false);
        let shared_theta = config::get(kv, "shared_theta")?.unwrap_or(false);
        let seed = config::get(kv, "seed")?.unwrap_or(0);
        let mut blocks = Vec::new();
        for r in 0.. {
            let key = |f: &str| format!("block.{r}.{f}");
            let Some(family) = kv.get(&key("family")) else { break };
            let block = match family.as_str() {
                "powerlaw" => SynthBlock::PowerLaw {
                    alpha: config::require(kv, &key("alpha"))?,
                    theta_min: config::get(kv, &key("theta_min"))?,
                    theta_max: config::get(kv, &key("theta_max"))?.unwrap_or(f64::INFINITY),
                    mean: config::get(kv, &key("mean"))?,
                },
                "poisson" => SynthBlock::Poisson {
                    mean: config::require(kv, &key("mean"))?,
                    draw_theta: config::get(kv, &key("draw_theta"))?.unwrap_or(false),
                },
                other => {
                    return Err(Error::config(format!("{}: unknown family '{other}'", key("family"))))
                }
            };
            blocks.push(block);
        }
        let fractions = config::get_list(kv, "fractions")?
            .unwrap_or_else(|| vec![1.0 / blocks.len().max(1) as f64; blocks.len()]);
        let spec = SynthSpec { n, fractions, blocks, lambda, directed, shared_theta, seed };
        spec.validate()?;
        Ok(spec)
    }

    /// Key/value echo accepted by [`SynthSpec::from_keys`].
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("n".to_string(), self.n.to_string()),
            ("lambda".to_string(), self.lambda.to_string()),
            ("directed".to_string(), self.directed.to_string()),
            ("shared_theta".to_string(), self.shared_theta.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("fractions".to_string(), config::join_list(&self.fractions)),
        ];
        for (r, b) in self.blocks.iter().enumerate() {
            let mut push = |f: &str, v: String| out.push((format!("block.{r}.{f}"), v));
            push("family", b.family_name().to_string());
            match *b {
                SynthBlock::PowerLaw { alpha, theta_min, theta_max, mean } => {
                    push("alpha", alpha.to_string());
                    if let Some(t) = theta_min {
                        push("theta_min", t.to_string());
                    }
                    push("theta_max", theta_max.to_string());
                    if let Some(m) = mean {
                        push("mean", m.to_string());
                    }
                }
                SynthBlock::Poisson { mean, draw_theta } => {
                    push("mean", mean.to_string());
                    push("draw_theta", draw_theta.to_string());
                }
            }
        }
        out
    }
}

/// `λ ω^planted + (1 − λ) ω^random` for two blocks, with `2M = Σ κ`.
///
/// Undirected: random `κ_r κ_s / 2M`, planted `diag(κ)`. Directed (`κ` the
/// total-degree sums): random `κ_r κ_s / 4M`, planted with all cross edges
/// running from block 0 to block 1, `ω_01 = min(κ) / 2`.
pub fn omega_interpolate(kappa: &[f64], lambda: f64, directed: bool) -> Result<Vec<Vec<f64>>> {
    if kappa.len() != 2 {
        return Err(Error::contract("omega_interpolate expects two blocks"));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::contract(format!("lambda {lambda} outside [0, 1]")));
    }
    let two_m: f64 = kappa.iter().sum();
    let (k1, k2) = (kappa[0], kappa[1]);
    let (random, planted) = if directed {
        let w12 = 0.5 * k1.min(k2);
        (
            [[k1 * k1 / (2.0 * two_m), k1 * k2 / (2.0 * two_m)],
             [k2 * k1 / (2.0 * two_m), k2 * k2 / (2.0 * two_m)]],
            [[(k1 - w12) / 2.0, w12], [0.0, (k2 - w12) / 2.0]],
        )
    } else {
        (
            [[k1 * k1 / two_m, k1 * k2 / two_m], [k2 * k1 / two_m, k2 * k2 / two_m]],
            [[k1, 0.0], [0.0, k2]],
        )
    };
    let random = if two_m > 0.0 { random } else { [[0.0; 2]; 2] };
    Ok((0..2)
        .map(|r| {
            (0..2)
                .map(|s| lambda * planted[r][s] + (1.0 - lambda) * random[r][s])
                .collect()
        })
        .collect())
}

fn block_sums(theta: &[f64], truth: &Partition) -> Vec<f64> {
    let mut sums = vec![0.0; truth.k()];
    for (&t, &r) in theta.iter().zip(truth.labels()) {
        sums[r] += t;
    }
    sums
}

fn check_inputs(theta_out: &[f64], theta_in: &[f64], truth: &Partition, omega: &[Vec<f64>]) -> Result<()> {
    if theta_out.len() != truth.len() || theta_in.len() != truth.len() {
        return Err(Error::contract("theta and partition lengths differ"));
    }
    if omega.len() != truth.k() || omega.iter().any(|row| row.len() != truth.k()) {
        return Err(Error::contract("omega must be k x k"));
    }
    if theta_out.iter().chain(theta_in).any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::contract("theta values must be finite and non-negative"));
    }
    if omega.iter().flatten().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::contract("omega entries must be finite and non-negative"));
    }
    Ok(())
}

/// Expected number of edges (multiplicities summed) under the edge law,
/// over unordered pairs (undirected) or ordered pairs (directed), `u ≠ v`.
pub fn expected_edge_count(
    theta_out: &[f64],
    theta_in: &[f64],
    truth: &Partition,
    omega: &[Vec<f64>],
    directed: bool,
) -> Result<f64> {
    check_inputs(theta_out, theta_in, truth, omega)?;
    let ko = block_sums(theta_out, truth);
    let ki = block_sums(theta_in, truth);
    let n = truth.len();
    let g = truth.labels();
    let mut total = 0.0;
    for u in 0..n {
        let start = if directed { 0 } else { u + 1 };
        for v in start..n {
            if u == v {
                continue;
            }
            let (r, s) = (g[u], g[v]);
            let denom = ko[r] * ki[s];
            if denom > 0.0 {
                total += theta_out[u] * theta_in[v] * omega[r][s] / denom;
            }
        }
    }
    Ok(total)
}

fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// Draws a multigraph from the edge law. Each block pair receives a Poisson
/// number of edges with endpoints chosen in proportion to `θ`; self-pairs are
/// discarded, which leaves every pair `u ≠ v` with an independent Poisson
/// count at its exact rate.
pub fn realize_edges<R: Rng + ?Sized>(
    rng: &mut R,
    theta_out: &[f64],
    theta_in: &[f64],
    truth: &Partition,
    omega: &[Vec<f64>],
    directed: bool,
) -> Result<Graph> {
    check_inputs(theta_out, theta_in, truth, omega)?;
    let k = truth.k();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (v, &r) in truth.labels().iter().enumerate() {
        members[r].push(v);
    }
    let picker = |theta: &[f64], r: usize| -> Option<WeightedIndex<f64>> {
        WeightedIndex::new(members[r].iter().map(|&v| theta[v])).ok()
    };
    let out_pick: Vec<_> = (0..k).map(|r| picker(theta_out, r)).collect();
    let in_pick: Vec<_> = (0..k).map(|r| picker(theta_in, r)).collect();
    let mut pairs = Vec::new();
    for r in 0..k {
        for s in 0..k {
            if !directed && s < r {
                continue;
            }
            let (Some(po), Some(pi)) = (&out_pick[r], &in_pick[s]) else { continue };
            let mean = if !directed && r == s { omega[r][s] / 2.0 } else { omega[r][s] };
            for _ in 0..poisson_count(rng, mean) {
                let u = members[r][po.sample(rng)];
                let v = members[s][pi.sample(rng)];
                if u != v {
                    pairs.push((u, v, 1));
                }
            }
        }
    }
    Graph::new(truth.len(), directed, pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthNetwork {
    pub graph: Graph,
    pub truth: Partition,
    pub theta_out: Vec<f64>,
    /// Equal to `theta_out` for undirected networks.
    pub theta_in: Vec<f64>,
    /// Realised `Σ θ` per block (out + in for directed networks).
    pub kappa: Vec<f64>,
    pub omega: Vec<Vec<f64>>,
    pub theta_min_used: Vec<Option<f64>>,
}

impl SynthNetwork {
    /// Manifest lines describing the realisation.
    pub fn manifest_pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (r, t) in self.theta_min_used.iter().enumerate() {
            if let Some(t) = t {
                out.push((format!("block.{r}.theta_min_used"), format!("{t:.10}")));
            }
        }
        out.push(("kappa".into(), config::join_list(&self.kappa)));
        let omega: Vec<String> = self.omega.iter().map(|row| config::join_list(row)).collect();
        out.push(("omega".into(), omega.join(";")));
        out.push(("vertices".into(), self.graph.num_vertices().to_string()));
        out.push(("edges".into(), self.graph.num_edges().to_string()));
        out.push((
            "note.poisson_block".into(),
            "Poisson blocks use theta = mean unless draw_theta, which draws integer theta ~ Poi(mean)".into(),
        ));
        out
    }
}

/// Draws propensities, builds `ω` and realises the network. Vertices are
/// numbered block by block.
pub fn generate<R: Rng + ?Sized>(spec: &SynthSpec, rng: &mut R) -> Result<SynthNetwork> {
    spec.validate()?;
    let sizes = spec.block_sizes();
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(r, &s)| std::iter::repeat_n(r, s))
        .collect();
    let truth = Partition::new(spec.blocks.len(), labels)?;
    let samplers: Vec<BlockSampler> = spec.blocks.iter().map(SynthBlock::sampler).collect::<Result<_>>()?;
    let theta_min_used = spec.blocks.iter().map(SynthBlock::theta_min).collect::<Result<_>>()?;
    let mut theta_out = Vec::with_capacity(spec.n);
    let mut theta_in = Vec::with_capacity(spec.n);
    for &r in truth.labels() {
        theta_out.push(samplers[r].draw(rng)?);
        if spec.directed && !spec.shared_theta {
            theta_in.push(samplers[r].draw(rng)?);
        }
    }
    if !spec.directed || spec.shared_theta {
        theta_in.clone_from(&theta_out);
    }
    let mut kappa = block_sums(&theta_out, &truth);
    if spec.directed {
        for (k, i) in kappa.iter_mut().zip(block_sums(&theta_in, &truth)) {
            *k += i;
        }
    }
    let omega = omega_interpolate(&kappa, spec.lambda, spec.directed)?;
    let graph = realize_edges(rng, &theta_out, &theta_in, &truth, &omega, spec.directed)?;
    Ok(SynthNetwork {
        graph,
        truth,
        theta_out,
        theta_in,
        kappa,
        omega,
        theta_min_used,
    })
}

/// Drops isolated vertices and keeps the giant component, or one giant
/// component per block when `lambda == 1`.
pub fn postprocess(graph: &Graph, truth: &Partition, lambda: f64) -> Result<(Graph, Partition)> {
    let mode = if lambda >= 1.0 { ComponentMode::PerBlock } else { ComponentMode::Weak };
    let (g, remap) = graph.giant_component(mode, Some(truth))?;
    Ok((g, truth.remap(&remap)))
}
