//! Degree-generation priors.
//!
//! Degree-generated models add `log P(θ̂ | ψ, g)` to a degree-corrected
//! likelihood, with `θ̂` set to the observed degrees. Per block the prior is
//! either a zero-inflated continuous power law with `θ_min = 1`, or a Poisson
//! mass function. Parameters left unspecified are refitted from the current
//! partition.
//!
//! This module also holds the bounded power-law exponent solver, the
//! truncated power-law sampler and the Gamma-conjugate marginal likelihood.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Degrees;
use crate::likelihood::Family;
use crate::partition::Partition;

/// Fitted exponents are capped here. A block whose nonzero degrees all equal
/// `θ_min` has an unbounded exponent MLE.
pub const MAX_FITTED_ALPHA: f64 = 64.0;

/// Lower end of the exponent bracket used by [`fit_alpha_bounded`].
pub const MIN_BRACKET_ALPHA: f64 = 1.0 + 1e-9;

/// Log-probability charged for a degree the prior rules out (e.g. a zero degree
/// under `β = 0`), so objective differences stay finite.
pub const IMPOSSIBLE_LOG_PROB: f64 = -745.0;

/// Zero-inflated power law: mass `beta` at 0, density
/// `(1-β)(α-1)/θ_min · (θ/θ_min)^-α` on `[θ_min, θ_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawParams {
    pub alpha: f64,
    pub beta: f64,
    pub theta_min: f64,
    pub theta_max: Option<f64>,
}

impl PowerLawParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        PowerLawParams {
            alpha,
            beta,
            theta_min: 1.0,
            theta_max: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0) {
            return Err(Error::contract(format!("power-law exponent {} must exceed 1", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::contract(format!("zero mass {} outside [0, 1]", self.beta)));
        }
        if !(self.theta_min > 0.0) {
            return Err(Error::contract("theta_min must be positive"));
        }
        if let Some(max) = self.theta_max {
            if !(max > self.theta_min) {
                return Err(Error::contract("theta_max must exceed theta_min"));
            }
        }
        Ok(())
    }

    /// `log((α-1) / (θ_min^{1-α} - θ_max^{1-α}))`, the log normaliser of `θ^-α`.
    fn log_norm(&self) -> f64 {
        let e = 1.0 - self.alpha;
        let upper = self.theta_max.map_or(0.0, |m| m.powf(e));
        (self.alpha - 1.0).ln() - (self.theta_min.powf(e) - upper).ln()
    }

    /// Log density (or log mass at 0).
    pub fn log_density(&self, theta: f64) -> Result<f64> {
        self.validate()?;
        if theta == 0.0 {
            return Ok(self.beta.ln());
        }
        if theta < self.theta_min || self.theta_max.is_some_and(|m| theta > m) {
            return Err(Error::contract(format!(
                "theta {theta} outside the support of the power-law prior"
            )));
        }
        Ok((1.0 - self.beta).ln() + self.log_norm() - self.alpha * theta.ln())
    }
}

/// Per-block power-law parameters for one degree channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreePrior {
    pub blocks: Vec<PowerLawParams>,
}

/// Which degree a prior generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DegreeChannel {
    Total,
    Out,
    In,
}

impl DegreeChannel {
    /// Channels generated by the degree-generated variant of `family`.
    pub fn for_family(family: Family) -> &'static [DegreeChannel] {
        match family {
            Family::Ddc => &[DegreeChannel::Out, DegreeChannel::In],
            _ => &[DegreeChannel::Total],
        }
    }

    pub fn select<'a>(&self, degrees: &'a Degrees) -> &'a [u64] {
        match self {
            DegreeChannel::Total => &degrees.d_total,
            DegreeChannel::Out => &degrees.d_out,
            DegreeChannel::In => &degrees.d_in,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DegreeChannel::Total => "total",
            DegreeChannel::Out => "out",
            DegreeChannel::In => "in",
        }
    }
}

/// Closed-form exponent MLE `1 + y / Σ ln θ` over the nonzero values, `θ_min = 1`.
///
/// Returns `+∞` when every nonzero value equals 1.
pub fn fit_alpha(thetas: &[f64]) -> Result<f64> {
    let mut y = 0usize;
    let mut log_sum = 0.0;
    for &t in thetas {
        if t == 0.0 {
            continue;
        }
        if !(t >= 1.0) {
            return Err(Error::contract(format!("value {t} below theta_min = 1")));
        }
        y += 1;
        log_sum += t.ln();
    }
    if y == 0 {
        return Err(Error::contract("exponent fit needs at least one nonzero value"));
    }
    if log_sum == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 + y as f64 / log_sum)
}

/// Fraction of zero values.
pub fn fit_beta(thetas: &[f64]) -> Result<f64> {
    if thetas.is_empty() {
        return Err(Error::contract("zero-mass fit needs at least one value"));
    }
    Ok(thetas.iter().filter(|&&t| t == 0.0).count() as f64 / thetas.len() as f64)
}

/// `Σ_u log P(θ_u | ψ_{g_u})`.
pub fn log_prior(thetas: &[f64], prior: &DegreePrior, partition: &Partition) -> Result<f64> {
    if thetas.len() != partition.len() {
        return Err(Error::contract("one theta per vertex required"));
    }
    if prior.blocks.len() < partition.k() {
        return Err(Error::contract("prior must cover every block"));
    }
    thetas
        .iter()
        .zip(partition.labels())
        .map(|(&t, &r)| prior.blocks[r].log_density(t))
        .sum()
}

/// Exponent MLE of a power law on `[x_min, x_max]` by bisection on the score
/// equation over `α ∈ (1 + 1e-9, 64]`. `x_max` may be infinite.
pub fn fit_alpha_bounded(samples: &[f64], x_min: f64, x_max: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::contract("exponent fit needs samples"));
    }
    if !(x_min > 0.0) || !(x_max > x_min) {
        return Err(Error::contract("bounds must satisfy 0 < x_min < x_max"));
    }
    if let Some(x) = samples.iter().find(|&&x| x < x_min || x > x_max) {
        return Err(Error::contract(format!("sample {x} outside [{x_min}, {x_max}]")));
    }
    let mean_log = samples.iter().map(|x| x.ln()).sum::<f64>() / samples.len() as f64;
    let a = x_min.ln();
    let span = x_max.ln() - a;
    // 1/t + (x_min^{-t} ln x_min - x_max^{-t} ln x_max)/(x_min^{-t} - x_max^{-t}) - mean, t = α - 1
    let score = |alpha: f64| {
        let t = alpha - 1.0;
        let tail = if span.is_infinite() { 0.0 } else { span / (t * span).exp_m1() };
        1.0 / t + a - tail - mean_log
    };
    let (mut lo, mut hi) = (MIN_BRACKET_ALPHA, MAX_FITTED_ALPHA);
    let (f_lo, f_hi) = (score(lo), score(hi));
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Solver(format!(
            "no sign change for the exponent score on ({lo}, {hi}]"
        )));
    }
    for _ in 0..500 {
        let mid = 0.5 * (lo + hi);
        let f = score(mid);
        if f.abs() < 1e-9 || hi - lo < 1e-15 {
            return Ok(mid);
        }
        if f.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Zero with probability `beta`, otherwise an inverse-CDF draw from the power
/// law with exponent `alpha` on `[theta_min, theta_max]`.
pub fn sample_power_law<R: Rng + ?Sized>(
    rng: &mut R,
    alpha: f64,
    theta_min: f64,
    theta_max: f64,
    beta: f64,
) -> Result<f64> {
    if !(alpha > 1.0) || !(theta_min > 0.0) || !(theta_max > theta_min) || !(0.0..=1.0).contains(&beta) {
        return Err(Error::contract(format!(
            "invalid power-law parameters alpha={alpha} theta_min={theta_min} theta_max={theta_max} beta={beta}"
        )));
    }
    if beta > 0.0 && rng.random::<f64>() < beta {
        return Ok(0.0);
    }
    let e = 1.0 - alpha;
    let lo = theta_min.powf(e);
    let hi = if theta_max.is_infinite() { 0.0 } else { theta_max.powf(e) };
    let u: f64 = rng.random();
    let x = (lo - u * (lo - hi)).powf(1.0 / e);
    Ok(x.clamp(theta_min, theta_max))
}

/// Mean of the power law with exponent `alpha` truncated to `[lo, hi]`.
pub fn truncated_power_law_mean(alpha: f64, lo: f64, hi: f64) -> f64 {
    let norm = if (alpha - 1.0).abs() < 1e-12 {
        1.0 / (hi / lo).ln()
    } else {
        (alpha - 1.0) / (lo.powf(1.0 - alpha) - hi.powf(1.0 - alpha))
    };
    let first = if (alpha - 2.0).abs() < 1e-12 {
        (hi / lo).ln()
    } else {
        (hi.powf(2.0 - alpha) - lo.powf(2.0 - alpha)) / (2.0 - alpha)
    };
    norm * first
}

/// Lower cutoff giving the truncated power law a prescribed mean, by bisection.
pub fn solve_theta_min_for_mean(alpha: f64, theta_max: f64, mean: f64) -> Result<f64> {
    if !(mean > 0.0 && mean < theta_max) {
        return Err(Error::config(format!(
            "target mean {mean} must lie in (0, {theta_max})"
        )));
    }
    let (mut lo, mut hi) = (theta_max * 1e-12, theta_max * (1.0 - 1e-12));
    if truncated_power_law_mean(alpha, lo, theta_max) > mean {
        return Err(Error::Solver(format!(
            "mean {mean} unreachable for alpha {alpha} below {theta_max}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if truncated_power_law_mean(alpha, mid, theta_max) < mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// Per-block penalties used by degree-generated objectives.

/// Per-block prior family. `None` fields are refitted from the block's degrees.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockPriorSpec {
    PowerLaw {
        alpha: Option<f64>,
        beta: Option<f64>,
        theta_max: Option<f64>,
    },
    Poisson {
        mean: Option<f64>,
    },
}

impl BlockPriorSpec {
    pub const FITTED_POWER_LAW: BlockPriorSpec = BlockPriorSpec::PowerLaw {
        alpha: None,
        beta: None,
        theta_max: None,
    };

    pub const FITTED_POISSON: BlockPriorSpec = BlockPriorSpec::Poisson { mean: None };

    pub fn family_name(&self) -> &'static str {
        match self {
            BlockPriorSpec::PowerLaw { .. } => "powerlaw",
            BlockPriorSpec::Poisson { .. } => "poisson",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            BlockPriorSpec::PowerLaw { alpha, beta, theta_max } => {
                if alpha.is_some_and(|a| !(a > 1.0)) {
                    return Err(Error::config("power-law alpha must exceed 1"));
                }
                if beta.is_some_and(|b| !(0.0..=1.0).contains(&b)) {
                    return Err(Error::config("power-law beta must lie in [0, 1]"));
                }
                if theta_max.is_some_and(|m| !(m > 1.0)) {
                    return Err(Error::config("power-law theta_max must exceed theta_min = 1"));
                }
            }
            BlockPriorSpec::Poisson { mean } => {
                if mean.is_some_and(|m| !(m > 0.0)) {
                    return Err(Error::config("poisson mean must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Log prior of one block's degrees summarised by `agg`, with unspecified
    /// parameters at their MLEs.
    pub fn penalty(&self, agg: &DegreeAggregate) -> f64 {
        if agg.count == 0 {
            return 0.0;
        }
        let n = agg.count as f64;
        let zeros = agg.zeros as f64;
        let y = n - zeros;
        match *self {
            BlockPriorSpec::PowerLaw { alpha, beta, theta_max } => {
                let beta = beta.unwrap_or(zeros / n);
                let mut total = xlog(zeros, beta) + xlog(y, 1.0 - beta);
                if agg.count > agg.zeros {
                    let alpha = alpha.unwrap_or_else(|| {
                        if agg.log_sum > 0.0 {
                            (1.0 + y / agg.log_sum).min(MAX_FITTED_ALPHA)
                        } else {
                            MAX_FITTED_ALPHA
                        }
                    });
                    let params = PowerLawParams {
                        alpha,
                        beta,
                        theta_min: 1.0,
                        theta_max,
                    };
                    total += y * params.log_norm() - alpha * agg.log_sum;
                }
                total
            }
            BlockPriorSpec::Poisson { mean } => {
                let mu = mean.unwrap_or(agg.degree_sum as f64 / n);
                let d = agg.degree_sum as f64;
                let linear = if d == 0.0 {
                    0.0
                } else if mu == 0.0 {
                    IMPOSSIBLE_LOG_PROB * n
                } else {
                    d * mu.ln()
                };
                linear - n * mu - agg.log_factorial_sum
            }
        }
    }
}

/// `x ln p` with `0 ln 0 = 0` and impossible events floored.
fn xlog(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if p <= 0.0 {
        x * IMPOSSIBLE_LOG_PROB
    } else {
        x * p.ln()
    }
}

/// Running sufficient statistics of the degrees in one block.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DegreeAggregate {
    pub count: u64,
    pub zeros: u64,
    pub degree_sum: u64,
    /// `Σ ln d` over nonzero degrees.
    pub log_sum: f64,
    /// `Σ ln d!`.
    pub log_factorial_sum: f64,
}

impl DegreeAggregate {
    pub fn add(&mut self, d: u64) {
        self.count += 1;
        self.degree_sum += d;
        if d == 0 {
            self.zeros += 1;
        } else {
            self.log_sum += (d as f64).ln();
        }
        self.log_factorial_sum += ln_factorial(d);
    }

    pub fn remove(&mut self, d: u64) {
        self.count -= 1;
        self.degree_sum -= d;
        if d == 0 {
            self.zeros -= 1;
        } else {
            self.log_sum -= (d as f64).ln();
        }
        self.log_factorial_sum -= ln_factorial(d);
        if self.count == 0 {
            *self = DegreeAggregate::default();
        }
    }
}

pub fn ln_factorial(d: u64) -> f64 {
    libm::lgamma(d as f64 + 1.0)
}

/// Per-block prior families for a degree-generated model.
///
/// Blocks beyond the listed ones use a fitted power law.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriorConfig {
    pub blocks: Vec<BlockPriorSpec>,
}

impl PriorConfig {
    pub fn new(blocks: Vec<BlockPriorSpec>) -> Result<Self> {
        for b in &blocks {
            b.validate()?;
        }
        Ok(PriorConfig { blocks })
    }

    pub fn block(&self, r: usize) -> &BlockPriorSpec {
        self.blocks.get(r).unwrap_or(&BlockPriorSpec::FITTED_POWER_LAW)
    }

    /// Reads per-block keys `block.<r>.family` (`powerlaw` or `poisson`) and,
    /// unless `families_only`, the fixed parameters `alpha`, `beta`,
    /// `theta_min` (must be 1), `theta_max` and `mean`. Missing parameters are
    /// fitted during inference.
    pub fn from_keys(keys: &BTreeMap<String, String>, families_only: bool) -> Result<Self> {
        let mut by_block: BTreeMap<usize, BTreeMap<&str, &str>> = BTreeMap::new();
        for (key, value) in keys {
            let Some(rest) = key.strip_prefix("block.") else { continue };
            let Some((idx, field)) = rest.split_once('.') else { continue };
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::config(format!("bad block index in key '{key}'")))?;
            by_block.entry(idx).or_default().insert(field, value.as_str());
        }
        let count = by_block.keys().next_back().map_or(0, |m| m + 1);
        let mut blocks = Vec::with_capacity(count);
        for r in 0..count {
            let fields = by_block.get(&r).cloned().unwrap_or_default();
            let num = |name: &str| -> Result<Option<f64>> {
                if families_only {
                    return Ok(None);
                }
                fields
                    .get(name)
                    .map(|v| {
                        v.trim().parse::<f64>().map_err(|_| {
                            Error::config(format!("block.{r}.{name}: '{v}' is not a number"))
                        })
                    })
                    .transpose()
            };
            if num("theta_min")?.is_some_and(|t| t != 1.0) {
                return Err(Error::config(format!("block.{r}.theta_min: priors use theta_min = 1")));
            }
            let family = fields.get("family").copied().unwrap_or("powerlaw");
            let spec = match family.trim() {
                "powerlaw" => BlockPriorSpec::PowerLaw {
                    alpha: num("alpha")?,
                    beta: num("beta")?,
                    theta_max: num("theta_max")?,
                },
                "poisson" => BlockPriorSpec::Poisson { mean: num("mean")? },
                other => {
                    return Err(Error::config(format!(
                        "block.{r}.family: unknown prior family '{other}'"
                    )))
                }
            };
            blocks.push(spec);
        }
        PriorConfig::new(blocks)
    }
}

/// Degree-channel aggregates for every block.
pub fn block_aggregates(degrees: &[u64], partition: &Partition) -> Vec<DegreeAggregate> {
    let mut aggs = vec![DegreeAggregate::default(); partition.k()];
    for (&d, &r) in degrees.iter().zip(partition.labels()) {
        aggs[r].add(d);
    }
    aggs
}

/// Total degree-prior penalty of a partition under `config`.
pub fn dg_penalty(config: &PriorConfig, family: Family, degrees: &Degrees, partition: &Partition) -> f64 {
    DegreeChannel::for_family(family)
        .iter()
        .map(|ch| {
            block_aggregates(ch.select(degrees), partition)
                .iter()
                .enumerate()
                .map(|(r, agg)| config.block(r).penalty(agg))
                .sum::<f64>()
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Gamma-conjugate marginal.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }
}

/// Gamma hyperparameters per channel and block.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaHyper {
    pub channels: Vec<(DegreeChannel, Vec<GammaParams>)>,
}

impl GammaHyper {
    pub fn get(&self, channel: DegreeChannel) -> Option<&[GammaParams]> {
        self.channels
            .iter()
            .find(|(c, _)| *c == channel)
            .map(|(_, p)| p.as_slice())
    }
}

/// Log of `∫ Poi(d | θ) Γ(θ | α, β) dθ`.
pub fn gamma_marginal_vertex(d: u64, p: GammaParams) -> f64 {
    let (a, b) = (p.shape, p.rate);
    let d = d as f64;
    a * b.ln() + libm::lgamma(a + d) - (a + d) * (b + 1.0).ln() - libm::lgamma(d + 1.0) - libm::lgamma(a)
}

fn gamma_channels(degrees: &Degrees) -> &'static [DegreeChannel] {
    if degrees.directed {
        &[DegreeChannel::Out, DegreeChannel::In]
    } else {
        &[DegreeChannel::Total]
    }
}

/// Closed-form log marginal of every degree channel under per-block Gamma priors
/// (out and in degrees for directed graphs, total degree otherwise).
pub fn gamma_marginal_loglik(degrees: &Degrees, partition: &Partition, hyper: &GammaHyper) -> Result<f64> {
    if degrees.len() != partition.len() {
        return Err(Error::contract("degree and partition lengths differ"));
    }
    let mut total = 0.0;
    for ch in gamma_channels(degrees) {
        let params = hyper
            .get(*ch)
            .ok_or_else(|| Error::contract(format!("no Gamma hyperparameters for {} degrees", ch.name())))?;
        if params.len() < partition.k() {
            return Err(Error::contract("Gamma hyperparameters must cover every block"));
        }
        if let Some(bad) = params.iter().find(|p| !(p.shape > 0.0 && p.rate > 0.0)) {
            return Err(Error::contract(format!("invalid Gamma hyperparameters {bad:?}")));
        }
        for (&d, &r) in ch.select(degrees).iter().zip(partition.labels()) {
            total += gamma_marginal_vertex(d, params[r]);
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaFit {
    pub hyper: GammaHyper,
    /// False when the sweep limit was hit before the improvement fell below tolerance.
    pub converged: bool,
    pub sweeps: usize,
}

const GAMMA_LOG_LO: f64 = -6.907_755_278_982_137; // ln 1e-3
const GAMMA_LOG_HI: f64 = 6.907_755_278_982_137; // ln 1e3
const GAMMA_MAX_SWEEPS: usize = 200;
const GAMMA_TOL: f64 = 1e-8;

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-11 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    // endpoints can beat the interior when the optimum sits on the boundary
    [(x, f(x)), (a, f(a)), (b, f(b))]
        .into_iter()
        .fold((x, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
        .0
}

fn fit_gamma_block(ds: &[u64]) -> (GammaParams, bool, usize) {
    let objective = |la: f64, lb: f64| {
        let p = GammaParams { shape: la.exp(), rate: lb.exp() };
        ds.iter().map(|&d| gamma_marginal_vertex(d, p)).sum::<f64>()
    };
    let mean = ds.iter().sum::<u64>() as f64 / ds.len().max(1) as f64;
    let mut la = 0.0f64;
    let mut lb = (1.0 / mean.max(1e-3)).ln().clamp(GAMMA_LOG_LO, GAMMA_LOG_HI);
    let mut current = objective(la, lb);
    for sweep in 1..=GAMMA_MAX_SWEEPS {
        la = golden_max(|x| objective(x, lb), GAMMA_LOG_LO, GAMMA_LOG_HI);
        lb = golden_max(|x| objective(la, x), GAMMA_LOG_LO, GAMMA_LOG_HI);
        let next = objective(la, lb);
        let improvement = next - current;
        current = next.max(current);
        if improvement < GAMMA_TOL {
            return (GammaParams { shape: la.exp(), rate: lb.exp() }, true, sweep);
        }
    }
    (
        GammaParams { shape: la.exp(), rate: lb.exp() },
        false,
        GAMMA_MAX_SWEEPS,
    )
}

/// Empirical-Bayes Gamma hyperparameters per block and channel by coordinate-wise
/// golden-section search on `(ln α, ln β) ∈ [ln 1e-3, ln 1e3]²`.
pub fn fit_gamma_hyper(degrees: &Degrees, partition: &Partition) -> Result<GammaFit> {
    if degrees.len() != partition.len() {
        return Err(Error::contract("degree and partition lengths differ"));
    }
    if partition.block_sizes().contains(&0) {
        return Err(Error::contract("every block needs at least one vertex"));
    }
    let mut converged = true;
    let mut sweeps = 0;
    let mut channels = Vec::new();
    for ch in gamma_channels(degrees) {
        let mut per_block: Vec<Vec<u64>> = vec![Vec::new(); partition.k()];
        for (&d, &r) in ch.select(degrees).iter().zip(partition.labels()) {
            per_block[r].push(d);
        }
        let mut params = Vec::with_capacity(partition.k());
        for ds in &per_block {
            let (p, ok, s) = fit_gamma_block(ds);
            converged &= ok;
            sweeps = sweeps.max(s);
            params.push(p);
        }
        channels.push((*ch, params));
    }
    Ok(GammaFit {
        hyper: GammaHyper { channels },
        converged,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{E, LN_2};

    #[test]
    fn fit_alpha_closed_form() {
        assert!((fit_alpha(&[E, E * E, E * E * E]).unwrap() - 1.5).abs() < 1e-12);
        assert!((fit_alpha(&[E, E, E]).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fit_alpha(&[1.0, 1.0]).unwrap(), f64::INFINITY);
        assert!(fit_alpha(&[0.5]).is_err());
        assert!(fit_alpha(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn fit_beta_counts_zeros() {
        assert_eq!(fit_beta(&[0.0, 2.0, 3.0, 5.0]).unwrap(), 0.25);
        assert_eq!(fit_beta(&[2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(fit_beta(&[0.0, 0.0]).unwrap(), 1.0);
        assert!(fit_beta(&[]).is_err());
    }

    #[test]
    fn log_prior_branches() {
        let p = |alpha, beta| DegreePrior { blocks: vec![PowerLawParams::new(alpha, beta)] };
        let one = Partition::single_block(1);
        assert!((log_prior(&[0.0], &p(2.0, 0.5), &one).unwrap() - 0.5f64.ln()).abs() < 1e-12);
        assert!(log_prior(&[1.0], &p(2.0, 0.0), &one).unwrap().abs() < 1e-12);
        assert!((log_prior(&[2.0], &p(2.0, 0.0), &one).unwrap() + 2.0 * LN_2).abs() < 1e-12);
        assert!(matches!(
            log_prior(&[0.5], &p(2.0, 0.0), &one),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn bounded_fit_reduces_to_closed_form() {
        let inf = f64::INFINITY;
        assert!((fit_alpha_bounded(&[E, E * E, E * E * E], 1.0, inf).unwrap() - 1.5).abs() < 1e-8);
        assert!((fit_alpha_bounded(&[E, E, E], 1.0, inf).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn bounded_fit_without_root_is_solver_error() {
        // all mass at the upper end of a narrow range: score stays negative
        let err = fit_alpha_bounded(&[9.9, 10.0], 1.0, 10.0).unwrap_err();
        assert!(matches!(err, Error::Solver(_)));
    }

    #[test]
    fn sampler_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(sample_power_law(&mut rng, 2.0, 1.0, 10.0, 1.0).unwrap(), 0.0);
        }
        let x = sample_power_law(&mut rng, 2.0, 1.0, 1.0 + 1e-12, 0.0).unwrap();
        assert!((x - 1.0).abs() < 1e-9);
        assert!(sample_power_law(&mut rng, 0.5, 1.0, 10.0, 0.0).is_err());
        assert!(sample_power_law(&mut rng, 2.0, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn truncated_mean_matches_quadrature() {
        // trapezoid on a log grid
        let (alpha, lo, hi) = (1.7, 1.0, 1850.0);
        let n = 200_000;
        let (a, b) = (f64::ln(lo), f64::ln(hi));
        let h = (b - a) / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=n {
            let x = (a + i as f64 * h).exp();
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            // dx = x dt
            den += w * x.powf(-alpha) * x;
            num += w * x.powf(1.0 - alpha) * x;
        }
        let mean = num / den;
        assert!((truncated_power_law_mean(alpha, lo, hi) - mean).abs() < 1e-6);
        assert!((truncated_power_law_mean(2.0, 1.0, 10.0) - 10f64.ln() / 0.9).abs() < 1e-9);
    }

    #[test]
    fn theta_min_solver_hits_target_mean() {
        let tm = solve_theta_min_for_mean(1.7, 1850.0, 20.0).unwrap();
        assert!((truncated_power_law_mean(1.7, tm, 1850.0) - 20.0).abs() < 1e-8);
        assert!((tm - 1.0).abs() < 0.01);
    }

    #[test]
    fn penalty_matches_log_prior_with_refit() {
        let degrees = [0u64, 1, 2, 5, 9, 0, 3];
        let mut agg = DegreeAggregate::default();
        degrees.iter().for_each(|&d| agg.add(d));
        let thetas: Vec<f64> = degrees.iter().map(|&d| d as f64).collect();
        let prior = DegreePrior {
            blocks: vec![PowerLawParams::new(
                fit_alpha(&thetas).unwrap(),
                fit_beta(&thetas).unwrap(),
            )],
        };
        let expected = log_prior(&thetas, &prior, &Partition::single_block(7)).unwrap();
        let got = BlockPriorSpec::FITTED_POWER_LAW.penalty(&agg);
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }

    #[test]
    fn degenerate_blocks_have_finite_penalty() {
        let mut agg = DegreeAggregate::default();
        agg.add(0);
        assert_eq!(BlockPriorSpec::FITTED_POWER_LAW.penalty(&agg), 0.0);
        agg.add(1);
        agg.add(1);
        assert!(BlockPriorSpec::FITTED_POWER_LAW.penalty(&agg).is_finite());
        assert_eq!(BlockPriorSpec::FITTED_POWER_LAW.penalty(&DegreeAggregate::default()), 0.0);
        let mut zeros = DegreeAggregate::default();
        zeros.add(0);
        assert_eq!(BlockPriorSpec::FITTED_POISSON.penalty(&zeros), 0.0);
    }

    #[test]
    fn poisson_penalty_is_log_pmf() {
        let degrees = [18u64, 22, 20, 25];
        let mut agg = DegreeAggregate::default();
        degrees.iter().for_each(|&d| agg.add(d));
        let mu = 85.0 / 4.0;
        let expected: f64 = degrees
            .iter()
            .map(|&d| d as f64 * f64::ln(mu) - mu - ln_factorial(d))
            .sum();
        assert!((BlockPriorSpec::FITTED_POISSON.penalty(&agg) - expected).abs() < 1e-10);
    }

    #[test]
    fn aggregate_remove_restores_state() {
        let mut agg = DegreeAggregate::default();
        agg.add(4);
        let snapshot = agg;
        agg.add(7);
        agg.remove(7);
        assert_eq!(agg.count, snapshot.count);
        assert!((agg.log_sum - snapshot.log_sum).abs() < 1e-12);
    }

    #[test]
    fn gamma_marginal_single_vertex() {
        let p = GammaParams { shape: 1.0, rate: 1.0 };
        assert!((gamma_marginal_vertex(0, p) + LN_2).abs() < 1e-12);
        let degrees = Degrees { directed: false, d_out: vec![3, 3], d_in: vec![3, 3], d_total: vec![3, 3] };
        let hyper = GammaHyper { channels: vec![(DegreeChannel::Total, vec![p])] };
        let two = gamma_marginal_loglik(&degrees, &Partition::single_block(2), &hyper).unwrap();
        assert!((two - 2.0 * gamma_marginal_vertex(3, p)).abs() < 1e-12);
    }

    #[test]
    fn gamma_map_in_uninformative_limit_is_degree() {
        // posterior Γ(α + d, β + 1) has mode (α + d - 1)/(β + 1) → d as α = 1, β → 0
        for d in 0..6u64 {
            let (a, b) = (1.0, 1e-12);
            let mode = (a + d as f64 - 1.0) / (b + 1.0);
            assert!((mode - d as f64).abs() < 1e-9);
        }
    }

    fn undirected(ds: Vec<u64>) -> Degrees {
        Degrees { directed: false, d_out: ds.clone(), d_in: ds.clone(), d_total: ds }
    }

    fn grid_best(ds: &[u64]) -> GammaParams {
        let mut best = (f64::NEG_INFINITY, GammaParams { shape: 1.0, rate: 1.0 });
        let steps = 400;
        for i in 0..=steps {
            for j in 0..=steps {
                let la = GAMMA_LOG_LO + (GAMMA_LOG_HI - GAMMA_LOG_LO) * i as f64 / steps as f64;
                let lb = GAMMA_LOG_LO + (GAMMA_LOG_HI - GAMMA_LOG_LO) * j as f64 / steps as f64;
                let p = GammaParams { shape: la.exp(), rate: lb.exp() };
                let v: f64 = ds.iter().map(|&d| gamma_marginal_vertex(d, p)).sum();
                if v > best.0 {
                    best = (v, p);
                }
            }
        }
        best.1
    }

    #[test]
    fn gamma_fit_equal_degrees_concentrates_on_mean() {
        let ds = vec![7u64; 12];
        let fit = fit_gamma_hyper(&undirected(ds.clone()), &Partition::single_block(12)).unwrap();
        let p = fit.hyper.get(DegreeChannel::Total).unwrap()[0];
        assert!((p.mean() - 7.0).abs() / 7.0 < 0.01, "{p:?}");
        // lattice spacing in ln(α/β) is about 0.035
        let grid = grid_best(&ds);
        assert!((grid.mean() - 7.0).abs() / 7.0 < 0.04);
    }

    #[test]
    fn gamma_fit_all_zero_degrees() {
        let ds = vec![0u64; 3];
        let fit = fit_gamma_hyper(&undirected(ds.clone()), &Partition::single_block(3)).unwrap();
        let p = fit.hyper.get(DegreeChannel::Total).unwrap()[0];
        assert!(p.mean() <= 0.01, "{p:?}");
        assert!(grid_best(&ds).mean() <= 0.01);
    }

    #[test]
    fn gamma_fit_is_local_max() {
        let ds = vec![0u64, 1, 1, 2, 3, 5, 8, 13, 2, 4];
        let fit = fit_gamma_hyper(&undirected(ds.clone()), &Partition::single_block(ds.len())).unwrap();
        assert!(fit.converged);
        let p = fit.hyper.get(DegreeChannel::Total).unwrap()[0];
        let obj = |p: GammaParams| ds.iter().map(|&d| gamma_marginal_vertex(d, p)).sum::<f64>();
        let base = obj(p);
        for (fa, fb) in [(1.01, 1.0), (0.99, 1.0), (1.0, 1.01), (1.0, 0.99), (1.01, 1.01), (0.99, 0.99)] {
            let q = GammaParams { shape: p.shape * fa, rate: p.rate * fb };
            assert!(obj(q) <= base + 1e-12, "perturbation ({fa}, {fb}) improved");
        }
    }

    #[test]
    fn gamma_fit_rejects_empty_block() {
        let d = undirected(vec![1, 2]);
        let p = Partition::new(2, vec![0, 0]).unwrap();
        assert!(fit_gamma_hyper(&d, &p).is_err());
    }
}
