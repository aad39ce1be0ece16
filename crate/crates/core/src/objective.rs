//! Mutable objective state for one inference chain.

use crate::error::{Error, Result};
use crate::graph::{Degrees, Graph};
use crate::likelihood::{delta_loglik, loglik, ModelSpec};
use crate::partition::Partition;
use crate::priors::{block_aggregates, dg_penalty, DegreeAggregate, DegreeChannel, PriorConfig};
use crate::stats::{BlockStats, NeighborCounts, VertexDegree};

/// Moves between full recomputations of the tracked objective.
pub const RESYNC_INTERVAL: u64 = 10_000;

/// Family log-likelihood plus, for degree-generated models, the degree-prior
/// penalty with `θ̂` at the observed degrees.
pub fn dg_objective(
    model: &ModelSpec,
    stats: &BlockStats,
    degrees: &Degrees,
    partition: &Partition,
) -> Result<f64> {
    if degrees.len() != partition.len() {
        return Err(Error::contract("degree and partition lengths differ"));
    }
    let base = loglik(model.family, stats);
    Ok(match &model.degree_prior {
        Some(cfg) => base + dg_penalty(cfg, model.family, degrees, partition),
        None => base,
    })
}

fn check_direction(graph: &Graph, model: &ModelSpec) -> Result<()> {
    if graph.is_directed() != model.family.is_directed() {
        return Err(Error::contract(format!(
            "model {} expects a {} graph",
            model.name(),
            if model.family.is_directed() { "directed" } else { "undirected" }
        )));
    }
    Ok(())
}

/// Full objective of `partition` on `graph`.
pub fn objective(model: &ModelSpec, graph: &Graph, partition: &Partition) -> Result<f64> {
    check_direction(graph, model)?;
    let stats = BlockStats::compute(graph, partition)?;
    dg_objective(model, &stats, &graph.degrees(), partition)
}

#[derive(Debug, Clone)]
struct ChannelState {
    channel: DegreeChannel,
    aggs: Vec<DegreeAggregate>,
}

#[derive(Debug, Clone)]
pub struct ObjectiveState<'a> {
    graph: &'a Graph,
    model: &'a ModelSpec,
    degrees: Degrees,
    partition: Partition,
    stats: BlockStats,
    channels: Vec<ChannelState>,
    value: f64,
    moves_since_sync: u64,
}

impl<'a> ObjectiveState<'a> {
    pub fn new(graph: &'a Graph, model: &'a ModelSpec, partition: Partition) -> Result<Self> {
        check_direction(graph, model)?;
        let stats = BlockStats::compute(graph, &partition)?;
        let degrees = graph.degrees();
        let channels = if model.is_degree_generated() {
            DegreeChannel::for_family(model.family)
                .iter()
                .map(|&channel| ChannelState {
                    channel,
                    aggs: block_aggregates(channel.select(&degrees), &partition),
                })
                .collect()
        } else {
            Vec::new()
        };
        let mut state = ObjectiveState {
            graph,
            model,
            degrees,
            partition,
            stats,
            channels,
            value: 0.0,
            moves_since_sync: 0,
        };
        state.value = state.recompute();
        Ok(state)
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn k(&self) -> usize {
        self.partition.k()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn stats(&self) -> &BlockStats {
        &self.stats
    }

    pub fn label(&self, v: usize) -> usize {
        self.partition.label(v)
    }

    /// Objective recomputed from the current counts.
    pub fn recompute(&self) -> f64 {
        let mut v = loglik(self.model.family, &self.stats);
        if let Some(cfg) = &self.model.degree_prior {
            v += self.penalty_total(cfg);
        }
        v
    }

    fn penalty_total(&self, cfg: &PriorConfig) -> f64 {
        self.channels
            .iter()
            .flat_map(|ch| ch.aggs.iter().enumerate().map(|(r, a)| cfg.block(r).penalty(a)))
            .sum()
    }

    pub fn neighbor_counts(&self, v: usize, counts: &mut NeighborCounts) {
        counts.fill(self.graph, self.partition.labels(), v);
    }

    /// Objective change if `v` moved to `to`; `counts` must be current for `v`.
    pub fn delta(&self, v: usize, to: usize, counts: &NeighborCounts) -> f64 {
        let from = self.partition.label(v);
        if from == to {
            return 0.0;
        }
        let degree = VertexDegree::of(&self.degrees, v);
        let mut d = delta_loglik(self.model.family, &self.stats, degree, counts, from, to);
        if let Some(cfg) = &self.model.degree_prior {
            for ch in &self.channels {
                let deg = ch.channel.select(&self.degrees)[v];
                let (old_from, old_to) = (ch.aggs[from], ch.aggs[to]);
                let (mut new_from, mut new_to) = (old_from, old_to);
                new_from.remove(deg);
                new_to.add(deg);
                let (pf, pt) = (cfg.block(from), cfg.block(to));
                d += pf.penalty(&new_from) + pt.penalty(&new_to)
                    - pf.penalty(&old_from)
                    - pt.penalty(&old_to);
            }
        }
        d
    }

    /// Moves `v` to `to`, given its current `counts` and the matching `delta`.
    pub fn apply(&mut self, v: usize, to: usize, counts: &NeighborCounts, delta: f64) {
        let from = self.partition.label(v);
        if from == to {
            return;
        }
        let degree = VertexDegree::of(&self.degrees, v);
        self.stats.apply_move(from, to, degree, counts);
        for ch in &mut self.channels {
            let deg = ch.channel.select(&self.degrees)[v];
            ch.aggs[from].remove(deg);
            ch.aggs[to].add(deg);
        }
        self.partition.set(v, to);
        self.value += delta;
        self.moves_since_sync += 1;
        if self.moves_since_sync >= RESYNC_INTERVAL {
            self.resync();
        }
    }

    /// Convenience wrapper computing counts and delta.
    pub fn move_vertex(&mut self, v: usize, to: usize) -> f64 {
        let mut counts = NeighborCounts::zeros(self.k());
        self.neighbor_counts(v, &mut counts);
        let d = self.delta(v, to, &counts);
        self.apply(v, to, &counts, d);
        d
    }

    pub fn resync(&mut self) {
        self.value = self.recompute();
        self.moves_since_sync = 0;
    }
}
