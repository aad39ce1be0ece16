//! Sufficient statistics of a (graph, partition) pair.

use crate::error::{Error, Result};
use crate::graph::{Degrees, Graph};
use crate::partition::Partition;

/// Block-level counts.
///
/// `m(r, s)` counts edges from block `r` to block `s`. Undirected graphs are
/// stored symmetrically with within-block edges counted twice, so `m(r, r)` is
/// even and the matrix sums to `2M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStats {
    k: usize,
    directed: bool,
    m: Vec<u64>,
    kappa_out: Vec<u64>,
    kappa_in: Vec<u64>,
    kappa_total: Vec<u64>,
    sizes: Vec<u64>,
}

/// Edge multiplicities between one vertex and every block, excluding the vertex itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborCounts {
    /// `v -> block t` (all incident edges for undirected graphs).
    pub out_to: Vec<u64>,
    /// `block t -> v` (equal to `out_to` for undirected graphs).
    pub in_from: Vec<u64>,
}

impl NeighborCounts {
    pub fn zeros(k: usize) -> Self {
        NeighborCounts {
            out_to: vec![0; k],
            in_from: vec![0; k],
        }
    }

    pub fn compute(graph: &Graph, labels: &[usize], v: usize, k: usize) -> Self {
        let mut c = Self::zeros(k);
        c.fill(graph, labels, v);
        c
    }

    pub fn fill(&mut self, graph: &Graph, labels: &[usize], v: usize) {
        self.out_to.iter_mut().for_each(|x| *x = 0);
        self.in_from.iter_mut().for_each(|x| *x = 0);
        for &(w, c) in graph.out_neighbors(v) {
            self.out_to[labels[w]] += c;
        }
        for &(w, c) in graph.in_neighbors(v) {
            self.in_from[labels[w]] += c;
        }
    }
}

/// Degree triple of a moving vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexDegree {
    pub out: u64,
    pub inn: u64,
    pub total: u64,
}

impl VertexDegree {
    pub fn of(degrees: &Degrees, v: usize) -> Self {
        VertexDegree {
            out: degrees.d_out[v],
            inn: degrees.d_in[v],
            total: degrees.d_total[v],
        }
    }
}

impl BlockStats {
    pub fn compute(graph: &Graph, partition: &Partition) -> Result<Self> {
        if partition.len() != graph.num_vertices() {
            return Err(Error::contract(format!(
                "partition covers {} vertices, graph has {}",
                partition.len(),
                graph.num_vertices()
            )));
        }
        let k = partition.k();
        let g = partition.labels();
        let mut m = vec![0u64; k * k];
        for e in graph.edges() {
            let (r, s) = (g[e.src], g[e.dst]);
            m[r * k + s] += e.count;
            if !graph.is_directed() {
                m[s * k + r] += e.count;
            }
        }
        let degrees = graph.degrees();
        let mut stats = BlockStats {
            k,
            directed: graph.is_directed(),
            m,
            kappa_out: vec![0; k],
            kappa_in: vec![0; k],
            kappa_total: vec![0; k],
            sizes: vec![0; k],
        };
        for (v, &r) in g.iter().enumerate() {
            stats.kappa_out[r] += degrees.d_out[v];
            stats.kappa_in[r] += degrees.d_in[v];
            stats.kappa_total[r] += degrees.d_total[v];
            stats.sizes[r] += 1;
        }
        Ok(stats)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn m(&self, r: usize, s: usize) -> u64 {
        self.m[r * self.k + s]
    }

    /// `m(r, s) + m(s, r)`.
    pub fn m_bar(&self, r: usize, s: usize) -> u64 {
        self.m(r, s) + self.m(s, r)
    }

    pub fn kappa_out(&self) -> &[u64] {
        &self.kappa_out
    }

    pub fn kappa_in(&self) -> &[u64] {
        &self.kappa_in
    }

    pub fn kappa_total(&self) -> &[u64] {
        &self.kappa_total
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn total(&self) -> u64 {
        self.m.iter().sum()
    }

    /// Change in `m(a, b)` caused by moving a vertex from `from` to `to`.
    #[inline]
    pub(crate) fn move_delta(
        a: usize,
        b: usize,
        from: usize,
        to: usize,
        counts: &NeighborCounts,
    ) -> i64 {
        let side = |x: usize| (x == to) as i64 - (x == from) as i64;
        side(a) * counts.out_to[b] as i64 + side(b) * counts.in_from[a] as i64
    }

    /// Moves one vertex between blocks, updating every affected count.
    pub fn apply_move(
        &mut self,
        from: usize,
        to: usize,
        degree: VertexDegree,
        counts: &NeighborCounts,
    ) {
        if from == to {
            return;
        }
        let k = self.k;
        let mut bump = |a: usize, b: usize| {
            let cell = &mut self.m[a * k + b];
            *cell = (*cell as i64 + Self::move_delta(a, b, from, to, counts)) as u64;
        };
        for t in 0..k {
            bump(from, t);
            bump(to, t);
            if t != from && t != to {
                bump(t, from);
                bump(t, to);
            }
        }
        self.kappa_out[from] -= degree.out;
        self.kappa_out[to] += degree.out;
        self.kappa_in[from] -= degree.inn;
        self.kappa_in[to] += degree.inn;
        self.kappa_total[from] -= degree.total;
        self.kappa_total[to] += degree.total;
        self.sizes[from] -= 1;
        self.sizes[to] += 1;
    }
}
