//! Integer-weighted multigraphs, degree bookkeeping and component extraction.
//!
//! A [`Graph`] is either directed, storing `A_uv` for ordered pairs, or
//! undirected, storing one multiplicity per unordered pair `u < v`. Self-loops
//! are never stored.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::partition::Partition;

/// One stored multigraph entry. For undirected graphs `src < dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub count: u64,
}

/// Compressed adjacency: neighbours of `v` are `entries[offsets[v]..offsets[v + 1]]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Adjacency {
    offsets: Vec<usize>,
    entries: Vec<(usize, u64)>,
}

impl Adjacency {
    fn build(n: usize, pairs: impl Iterator<Item = (usize, usize, u64)> + Clone) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for (u, _, _) in pairs.clone() {
            offsets[u + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut entries = vec![(0usize, 0u64); offsets[n]];
        for (u, v, c) in pairs {
            entries[cursor[u]] = (v, c);
            cursor[u] += 1;
        }
        for v in 0..n {
            entries[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Adjacency { offsets, entries }
    }

    fn row(&self, v: usize) -> &[(usize, u64)] {
        &self.entries[self.offsets[v]..self.offsets[v + 1]]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    directed: bool,
    edges: Vec<Edge>,
    num_edges: u64,
    out_adj: Adjacency,
    in_adj: Adjacency,
}

impl Graph {
    /// Builds a graph on `n` vertices, aggregating duplicate pairs.
    ///
    /// For undirected graphs `(u, v)` and `(v, u)` refer to the same pair.
    /// Zero counts are ignored; self-loops and out-of-range ids are rejected.
    pub fn new<I>(n: usize, directed: bool, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        let mut agg: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for (u, v, c) in pairs {
            if u >= n || v >= n {
                return Err(Error::contract(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::SelfLoop {
                    vertex: u.to_string(),
                    line: None,
                });
            }
            if c == 0 {
                continue;
            }
            let key = if directed || u < v { (u, v) } else { (v, u) };
            *agg.entry(key).or_insert(0) += c;
        }
        let edges: Vec<Edge> = agg
            .into_iter()
            .map(|((src, dst), count)| Edge { src, dst, count })
            .collect();
        Ok(Self::from_sorted_edges(n, directed, edges))
    }

    fn from_sorted_edges(n: usize, directed: bool, edges: Vec<Edge>) -> Self {
        let num_edges = edges.iter().map(|e| e.count).sum();
        let (out_adj, in_adj) = if directed {
            (
                Adjacency::build(n, edges.iter().map(|e| (e.src, e.dst, e.count))),
                Adjacency::build(n, edges.iter().map(|e| (e.dst, e.src, e.count))),
            )
        } else {
            let both = edges
                .iter()
                .flat_map(|e| [(e.src, e.dst, e.count), (e.dst, e.src, e.count)]);
            let adj = Adjacency::build(n, both);
            (adj.clone(), adj)
        };
        Graph {
            n,
            directed,
            edges,
            num_edges,
            out_adj,
            in_adj,
        }
    }

    /// Builds a graph from `(u, v, count)` triples with `n = max id + 1`.
    pub fn from_edge_list(lines: &[(usize, usize, u64)], directed: bool) -> Result<Self> {
        let n = lines.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
        for (i, &(u, v, c)) in lines.iter().enumerate() {
            if c == 0 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "edge count must be a positive integer".into(),
                });
            }
            if u == v {
                return Err(Error::SelfLoop {
                    vertex: u.to_string(),
                    line: Some(i + 1),
                });
            }
        }
        Self::new(n, directed, lines.iter().copied())
    }

    pub fn empty(n: usize, directed: bool) -> Self {
        Self::from_sorted_edges(n, directed, Vec::new())
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Total multiplicity `M`.
    pub fn num_edges(&self) -> u64 {
        self.num_edges
    }

    /// Stored entries, sorted by `(src, dst)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `(target, multiplicity)` pairs leaving `v`. Undirected graphs list all neighbours.
    pub fn out_neighbors(&self, v: usize) -> &[(usize, u64)] {
        self.out_adj.row(v)
    }

    /// `(source, multiplicity)` pairs entering `v`. Undirected graphs list all neighbours.
    pub fn in_neighbors(&self, v: usize) -> &[(usize, u64)] {
        self.in_adj.row(v)
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> u64 {
        let (a, b) = if self.directed || u < v { (u, v) } else { (v, u) };
        let row = self.out_adj.row(a);
        row.binary_search_by_key(&b, |&(w, _)| w)
            .map(|i| row[i].1)
            .unwrap_or(0)
    }

    pub fn degrees(&self) -> Degrees {
        let mut d_out = vec![0u64; self.n];
        let mut d_in = vec![0u64; self.n];
        for e in &self.edges {
            d_out[e.src] += e.count;
            d_in[e.dst] += e.count;
        }
        if self.directed {
            let d_total = d_out.iter().zip(&d_in).map(|(a, b)| a + b).collect();
            Degrees {
                directed: true,
                d_out,
                d_in,
                d_total,
            }
        } else {
            let d_total: Vec<u64> = d_out.iter().zip(&d_in).map(|(a, b)| a + b).collect();
            Degrees {
                directed: false,
                d_out: d_total.clone(),
                d_in: d_total.clone(),
                d_total,
            }
        }
    }

    /// Erases edge directions: `Ā_uv = A_uv + A_vu`.
    pub fn undirected_projection(&self) -> Result<Graph> {
        if !self.directed {
            return Err(Error::contract("undirected_projection requires a directed graph"));
        }
        Graph::new(
            self.n,
            false,
            self.edges.iter().map(|e| (e.src, e.dst, e.count)),
        )
    }

    /// Subgraph induced on `keep` (listed in the desired new order).
    /// Returns the graph and the old → new id map.
    pub fn induced_subgraph(&self, keep: &[usize]) -> (Graph, Vec<Option<usize>>) {
        let mut remap = vec![None; self.n];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = Some(new);
        }
        let pairs = self.edges.iter().filter_map(|e| {
            Some((remap[e.src]?, remap[e.dst]?, e.count))
        });
        let g = Graph::new(keep.len(), self.directed, pairs)
            .expect("induced subgraph of a valid graph is valid");
        (g, remap)
    }

    /// Weakly connected components, each sorted ascending, ordered by smallest member.
    pub fn weak_components(&self) -> Vec<Vec<usize>> {
        self.components_where(|_, _| true)
    }

    fn components_where(&self, same_group: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            comp[start] = id;
            stack.push(start);
            let mut members = Vec::new();
            while let Some(u) = stack.pop() {
                members.push(u);
                let nbrs = self.out_adj.row(u).iter().chain(self.in_adj.row(u));
                for &(w, _) in nbrs {
                    if comp[w] == usize::MAX && same_group(u, w) {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Extracts the giant component.
    ///
    /// `Weak` keeps the largest weakly connected component. `PerBlock` keeps,
    /// for every block of `truth`, the largest component of the subgraph induced
    /// on that block. Ties go to the component with the smallest member id and
    /// single isolated vertices are never kept.
    pub fn giant_component(
        &self,
        mode: ComponentMode,
        truth: Option<&Partition>,
    ) -> Result<(Graph, Vec<Option<usize>>)> {
        let mut keep: Vec<usize> = match mode {
            ComponentMode::Weak => largest(self.weak_components(), |c| self.has_edges(c))
                .unwrap_or_default(),
            ComponentMode::PerBlock => {
                let truth = truth.ok_or_else(|| {
                    Error::contract("per-block giant component requires a ground-truth partition")
                })?;
                if truth.len() != self.n {
                    return Err(Error::contract(format!(
                        "partition covers {} vertices, graph has {}",
                        truth.len(),
                        self.n
                    )));
                }
                let comps = self.components_where(|u, w| truth.label(u) == truth.label(w));
                let mut by_block: Vec<Vec<Vec<usize>>> = vec![Vec::new(); truth.k()];
                for c in comps {
                    by_block[truth.label(c[0])].push(c);
                }
                by_block
                    .into_iter()
                    .filter_map(|cs| largest(cs, |c| c.len() > 1))
                    .flatten()
                    .collect()
            }
        };
        keep.sort_unstable();
        Ok(self.induced_subgraph(&keep))
    }

    fn has_edges(&self, component: &[usize]) -> bool {
        component.len() > 1
            || component
                .first()
                .is_some_and(|&v| !self.out_adj.row(v).is_empty())
    }
}

/// Largest eligible component; components arrive ordered by smallest member, so
/// the first maximum wins ties.
fn largest(comps: Vec<Vec<usize>>, eligible: impl Fn(&[usize]) -> bool) -> Option<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    for c in comps {
        if !eligible(&c) {
            continue;
        }
        if best.as_ref().is_none_or(|b| c.len() > b.len()) {
            best = Some(c);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentMode {
    Weak,
    PerBlock,
}

/// Per-vertex degrees. For undirected graphs all three vectors hold the ordinary degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Degrees {
    pub directed: bool,
    pub d_out: Vec<u64>,
    pub d_in: Vec<u64>,
    pub d_total: Vec<u64>,
}

impl Degrees {
    pub fn len(&self) -> usize {
        self.d_total.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d_total.is_empty()
    }
}
