//! Command-line front end: `generate`, `ingest`, `infer`, `score`, `sweep`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{self, parse_key_values};
use crate::corpus::{build_network, network_summary, IngestConfig, TaggedStream};
use crate::error::{Error, Result};
use crate::inference::{run_inference, InferenceConfig, Init};
use crate::io::{
    align_partitions, format_edge_list, format_label_map, format_partition, parse_edge_list,
    parse_partition, LabelMap, RunManifest,
};
use crate::likelihood::ModelSpec;
use crate::metrics::{best_match_accuracy, nmi, MAX_MATCH_BLOCKS};
use crate::priors::PriorConfig;
use crate::sweep::{format_rows, mean_nmi, run_sweep, SweepConfig};
use crate::synth::{generate, postprocess, SynthSpec};

pub const THREADS_ENV: &str = "BLOCKMODEL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "blockmodel", version, about = "Degree-corrected, oriented and degree-generated block models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic benchmark network from a spec file.
    Generate(GenerateArgs),
    /// Build a word-adjacency network from a tagged corpus.
    Ingest(IngestArgs),
    /// Infer block assignments for an edge list.
    Infer(InferArgs),
    /// Compare two partition files (NMI and best-match accuracy).
    Score(ScoreArgs),
    /// Accuracy versus lambda over generated benchmarks.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// key = value synthetic spec.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the spec's lambda.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Keep isolated vertices and every component.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// token<TAB>tag lines, blank line between documents.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Collapse repeated adjacencies to single edges.
    #[arg(long)]
    pub simple: bool,
    /// Keep only the largest weakly connected component.
    #[arg(long)]
    pub giant: bool,
    /// Link words across intervening out-of-vocabulary tokens.
    #[arg(long)]
    pub bridge_nonvocab: bool,
    /// Comma-separated adjective tags (replaces the defaults).
    #[arg(long)]
    pub adjective_tags: Option<String>,
    /// Comma-separated noun tags (replaces the defaults).
    #[arg(long)]
    pub noun_tags: Option<String>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub edges: PathBuf,
    /// One of sbm, dc, ddc, odc, dg-dc, dg-ddc, dg-odc.
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: u64,
    /// random, nh, or file:<partition file>.
    #[arg(long, default_value = "random")]
    pub init: String,
    #[arg(long, overrides_with = "no_kl")]
    pub kl: bool,
    /// Skip the Kernighan-Lin stage.
    #[arg(long = "no-kl", overrides_with = "kl")]
    pub no_kl: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Prior config for degree-generated models (block.<r>.family etc.).
    #[arg(long)]
    pub priors: Option<PathBuf>,
    /// Treat the edge list as directed (true) or undirected (false),
    /// overriding its header.
    #[arg(long)]
    pub directed: Option<bool>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    pub a: PathBuf,
    pub b: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Comma-separated lambda values.
    #[arg(long, default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
    pub lambdas: String,
    /// Comma-separated model names.
    #[arg(long)]
    pub models: String,
    #[arg(long, default_value_t = 30)]
    pub networks: usize,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "no-kl")]
    pub no_kl: bool,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses arguments and runs the command. Normal output goes to stdout,
/// warnings to stderr.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            print!("{e}");
            Error::Usage(String::new())
        }
        _ => Error::Usage(e.to_string()),
    })?;
    configure_threads()?;
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Ingest(a) => cmd_ingest(&a),
        Command::Infer(a) => cmd_infer(&a),
        Command::Score(a) => cmd_score(&a).map(|out| print!("{out}")),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

/// Exit status for an error: 2 for usage problems, 1 otherwise.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Usage(_) => 2,
        _ => 1,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Usage(format!("{THREADS_ENV} must be a positive integer")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn write_bundle(out: &Path, files: &[(&str, String)], manifest: &mut RunManifest, started: Instant) -> Result<()> {
    fs::create_dir_all(out)?;
    for (name, body) in files {
        let path = out.join(name);
        fs::write(&path, body)?;
        manifest.outputs.push(path);
    }
    let path = out.join("manifest.txt");
    manifest.outputs.push(path.clone());
    manifest.elapsed_secs = started.elapsed().as_secs_f64();
    fs::write(path, manifest.render())?;
    Ok(())
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("generate");
    let text = manifest.read_input(&a.spec)?;
    let mut spec = SynthSpec::from_keys(&parse_key_values(&text)?)?;
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    if let Some(lambda) = a.lambda {
        spec.lambda = lambda;
    }
    spec.validate()?;
    manifest.seed = Some(spec.seed);
    let net = generate(&spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))?;
    let labels = LabelMap::identity(net.graph.num_vertices());
    let (graph, truth, labels) = if a.raw {
        (net.graph.clone(), net.truth.clone(), labels)
    } else {
        let (g, t) = postprocess(&net.graph, &net.truth, spec.lambda)?;
        let (_, remap) = net.graph.giant_component(
            if spec.lambda >= 1.0 { crate::graph::ComponentMode::PerBlock } else { crate::graph::ComponentMode::Weak },
            Some(&net.truth),
        )?;
        (g, t, labels.remap(&remap))
    };
    for (k, v) in spec.to_pairs() {
        manifest.config.push((format!("spec.{k}"), v));
    }
    manifest.set("postprocess", !a.raw);
    manifest.config.extend(net.manifest_pairs());
    manifest.set("kept_vertices", graph.num_vertices());
    manifest.set("kept_edges", graph.num_edges());
    write_bundle(
        &a.out,
        &[
            ("edges.tsv", format_edge_list(&graph, &labels)),
            ("truth.tsv", format_partition(&truth, &labels)),
        ],
        &mut manifest,
        started,
    )
}

fn tag_list(raw: &str) -> std::collections::BTreeSet<String> {
    raw.split(',').map(|t| t.trim().to_uppercase()).filter(|t| !t.is_empty()).collect()
}

pub fn cmd_ingest(a: &IngestArgs) -> Result<()> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("ingest");
    let text = manifest.read_input(&a.input)?;
    let stream = TaggedStream::parse(&text)?;
    let mut cfg = IngestConfig {
        min_count: a.min_count,
        multigraph: !a.simple,
        restrict_to_giant: a.giant,
        bridge_nonvocab: a.bridge_nonvocab,
        ..Default::default()
    };
    if let Some(t) = &a.adjective_tags {
        cfg.adjective_tags = tag_list(t);
    }
    if let Some(t) = &a.noun_tags {
        cfg.noun_tags = tag_list(t);
    }
    let net = build_network(&stream, &cfg)?;
    let summary = network_summary(&net.graph, &net.truth)?;
    manifest.set("min_count", cfg.min_count);
    manifest.set("multigraph", cfg.multigraph);
    manifest.set("restrict_to_giant", cfg.restrict_to_giant);
    manifest.set("bridge_nonvocab", cfg.bridge_nonvocab);
    manifest.set("adjective_tags", config::join_list(&cfg.adjective_tags.iter().collect::<Vec<_>>()));
    manifest.set("noun_tags", config::join_list(&cfg.noun_tags.iter().collect::<Vec<_>>()));
    println!("{summary}");
    write_bundle(
        &a.out,
        &[
            ("edges.tsv", format_edge_list(&net.graph, &net.labels)),
            ("truth.tsv", format_partition(&net.truth, &net.labels)),
            ("labels.tsv", format_label_map(&net.labels)),
            ("summary.tsv", format!("{summary}\n")),
        ],
        &mut manifest,
        started,
    )
}

pub fn cmd_infer(a: &InferArgs) -> Result<()> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("infer");
    let mut model: ModelSpec = a.model.parse()?;
    if let Some(path) = &a.priors {
        if !model.is_degree_generated() {
            return Err(Error::Usage(format!(
                "--priors applies only to degree-generated models, not {}",
                model.name()
            )));
        }
        let text = manifest.read_input(path)?;
        model.degree_prior = Some(PriorConfig::from_keys(&parse_key_values(&text)?, false)?);
    }
    let text = manifest.read_input(&a.edges)?;
    let el = parse_edge_list(&text, a.directed)?;
    let graph = &el.graph;
    let init = match a.init.as_str() {
        "random" => Init::Random,
        "nh" => {
            if !graph.is_directed() {
                return Err(Error::Usage(
                    "--init nh needs edge directions; the edge list is undirected".into(),
                ));
            }
            Init::NaiveHeuristic
        }
        other => match other.strip_prefix("file:") {
            Some(path) => {
                let p = Path::new(path);
                let text = manifest.read_input(p)?;
                Init::Given(parse_partition(&text, &el.labels)?)
            }
            None => {
                return Err(Error::Usage(format!(
                    "unknown --init '{other}'; expected random, nh or file:<path>"
                )))
            }
        },
    };
    if graph.is_directed() && !model.family.is_directed() {
        eprintln!(
            "warning: model {} is undirected; treating the directed graph as undirected",
            model.name()
        );
    }
    let cfg = InferenceConfig {
        k: a.k,
        mcmc_steps: a.steps,
        runs: a.runs,
        init,
        use_kl: !a.no_kl,
        seed: a.seed,
        model: model.clone(),
    };
    let result = run_inference(graph, &cfg)?;

    manifest.seed = Some(a.seed);
    for (k, v) in [
        ("model", model.name()),
        ("k", a.k.to_string()),
        ("runs", a.runs.to_string()),
        ("steps", a.steps.to_string()),
        ("init", a.init.clone()),
        ("kl", (!a.no_kl).to_string()),
        ("directed_input", graph.is_directed().to_string()),
    ] {
        manifest.set(k, v);
    }
    let mut pairs = vec![
        ("model".to_string(), model.name()),
        ("k".to_string(), a.k.to_string()),
        ("seed".to_string(), result.seed.to_string()),
        ("vertices".to_string(), graph.num_vertices().to_string()),
        ("edges".to_string(), graph.num_edges().to_string()),
        ("best_objective".to_string(), format!("{:.10}", result.best_objective)),
        (
            "block_sizes".to_string(),
            config::join_list(&result.best_partition.block_sizes()),
        ),
    ];
    for (run, obj) in &result.per_run_trace {
        pairs.push((format!("run.{run}.objective"), format!("{obj:.10}")));
    }
    println!("best_objective = {:.6}", result.best_objective);
    write_bundle(
        &a.out,
        &[
            ("result.txt", config::render(&pairs)),
            ("partition.tsv", format_partition(&result.best_partition, &el.labels)),
        ],
        &mut manifest,
        started,
    )
}

/// Returns the text printed by `score`.
pub fn cmd_score(a: &ScoreArgs) -> Result<String> {
    let (pa, pb) = align_partitions(&fs::read_to_string(&a.a)?, &fs::read_to_string(&a.b)?)?;
    let v = nmi(&pa, &pb)?;
    let acc = if pa.k().max(pb.k()) <= MAX_MATCH_BLOCKS {
        format!("{:.6}", best_match_accuracy(&pa, &pb)?)
    } else {
        "n/a".to_string()
    };
    Ok(format!("nmi\t{v:.6}\naccuracy\t{acc}\n"))
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("sweep");
    let text = manifest.read_input(&a.spec)?;
    let spec = SynthSpec::from_keys(&parse_key_values(&text)?)?;
    let lambdas: Vec<f64> = config::parse_list(&a.lambdas)
        .map_err(|_| Error::Usage(format!("cannot parse --lambdas '{}'", a.lambdas)))?;
    let models: Vec<ModelSpec> = a
        .models
        .split(',')
        .map(str::trim)
        .filter(|m| !m.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    let cfg = SweepConfig {
        spec,
        lambdas: lambdas.clone(),
        models: models.clone(),
        networks: a.networks,
        runs: a.runs,
        steps: a.steps,
        use_kl: !a.no_kl,
        seed: a.seed,
    };
    let rows = run_sweep(&cfg)?;
    manifest.seed = Some(a.seed);
    manifest.set("lambdas", &a.lambdas);
    manifest.set("models", config::join_list(&models.iter().map(ModelSpec::name).collect::<Vec<_>>()));
    manifest.set("networks", a.networks);
    manifest.set("runs", a.runs);
    manifest.set("steps", a.steps);
    manifest.set("kl", !a.no_kl);
    println!("lambda\tmodel\tmean_nmi");
    for &l in &lambdas {
        for m in &models {
            if let Some(v) = mean_nmi(&rows, &m.name(), l) {
                println!("{l}\t{}\t{v:.4}", m.name());
            }
        }
    }
    write_bundle(&a.out, &[("sweep.tsv", format_rows(&rows))], &mut manifest, started)
}
