//! Text formats: edge lists, partition files, label maps and run manifests.
//!
//! Edge lists hold one `src<TAB>dst[<TAB>count]` per line; `#` lines are
//! comments, and a `# directed: true|false` comment records orientation.
//! Vertex labels are arbitrary strings mapped to dense ids in order of first
//! appearance.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelMap {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Labels `"0"`, `"1"`, ... for plain integer ids.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::new();
        for v in 0..n {
            m.intern(&v.to_string());
        }
        m
    }

    pub fn from_labels<I: IntoIterator<Item = String>>(labels: I) -> Result<Self> {
        let mut m = Self::new();
        for l in labels {
            if m.index.contains_key(&l) {
                return Err(Error::contract(format!("duplicate label '{l}'")));
            }
            m.intern(&l);
        }
        Ok(m)
    }

    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Keeps surviving labels given an old → new id map.
    pub fn remap(&self, remap: &[Option<usize>]) -> Self {
        let mut kept: Vec<(usize, &String)> = remap
            .iter()
            .zip(&self.labels)
            .filter_map(|(n, l)| n.map(|n| (n, l)))
            .collect();
        kept.sort_unstable_by_key(|x| x.0);
        Self::from_labels(kept.into_iter().map(|(_, l)| l.clone())).expect("labels stay unique")
    }
}

/// Parsed edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub graph: Graph,
    pub labels: LabelMap,
    /// Orientation declared in the file header, if any.
    pub declared_directed: Option<bool>,
}

fn directed_header(line: &str) -> Option<bool> {
    let body = line.trim_start_matches('#').trim();
    let value = body.strip_prefix("directed:")?.trim();
    value.parse().ok()
}

/// Parses an edge list. `directed` overrides the header; with neither the
/// graph is directed.
pub fn parse_edge_list(text: &str, directed: Option<bool>) -> Result<EdgeList> {
    let mut labels = LabelMap::new();
    let mut declared = None;
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if declared.is_none() {
                declared = directed_header(line);
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let fields: Vec<&str> = if fields.len() == 1 {
            line.split_whitespace().collect()
        } else {
            fields
        };
        if !(2..=3).contains(&fields.len()) || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected src<TAB>dst[<TAB>count], got '{line}'"),
            });
        }
        let count = match fields.get(2) {
            Some(c) => c.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("count '{c}' is not a non-negative integer"),
            })?,
            None => 1,
        };
        if count == 0 {
            return Err(Error::Parse {
                line: lineno,
                message: "edge count must be positive".into(),
            });
        }
        if fields[0] == fields[1] {
            return Err(Error::SelfLoop {
                vertex: fields[0].to_string(),
                line: Some(lineno),
            });
        }
        let u = labels.intern(fields[0]);
        let v = labels.intern(fields[1]);
        raw.push((u, v, count));
    }
    let is_directed = directed.or(declared).unwrap_or(true);
    let graph = Graph::new(labels.len(), is_directed, raw)?;
    Ok(EdgeList {
        graph,
        labels,
        declared_directed: declared,
    })
}

pub fn read_edge_list(path: &Path, directed: Option<bool>) -> Result<EdgeList> {
    parse_edge_list(&fs::read_to_string(path)?, directed)
}

/// Renders the graph as an edge list with a direction header.
pub fn format_edge_list(graph: &Graph, labels: &LabelMap) -> String {
    let mut s = format!("# directed: {}\n", graph.is_directed());
    for e in graph.edges() {
        let _ = writeln!(s, "{}\t{}\t{}", labels.label(e.src), labels.label(e.dst), e.count);
    }
    s
}

/// Parses `vertex<TAB>block` lines in file order.
pub fn parse_partition_pairs(text: &str) -> Result<Vec<(String, usize)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(v), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected vertex<TAB>block, got '{line}'"),
            });
        };
        let b = b.trim().parse::<usize>().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("block '{b}' is not a non-negative integer"),
        })?;
        out.push((v.trim().to_string(), b));
    }
    Ok(out)
}

/// Partition over the vertices of `labels`; every vertex must appear exactly once.
pub fn parse_partition(text: &str, labels: &LabelMap) -> Result<Partition> {
    let pairs = parse_partition_pairs(text)?;
    let mut raw = vec![None; labels.len()];
    for (v, b) in pairs {
        let id = labels
            .get(&v)
            .ok_or_else(|| Error::contract(format!("partition names unknown vertex '{v}'")))?;
        if raw[id].replace(b).is_some() {
            return Err(Error::contract(format!("vertex '{v}' listed twice")));
        }
    }
    let labels_out: Vec<usize> = raw
        .iter()
        .enumerate()
        .map(|(id, b)| b.ok_or_else(|| Error::contract(format!("vertex '{}' has no block", labels.label(id)))))
        .collect::<Result<_>>()?;
    let k = labels_out.iter().max().map_or(1, |m| m + 1);
    Partition::new(k, labels_out)
}

/// Two partition files over the same vertex set, aligned on the first's order.
pub fn align_partitions(a: &str, b: &str) -> Result<(Partition, Partition)> {
    let pa = parse_partition_pairs(a)?;
    let labels = LabelMap::from_labels(pa.iter().map(|p| p.0.clone()))?;
    let first = parse_partition(a, &labels)?;
    let pb = parse_partition_pairs(b)?;
    if pb.len() != pa.len() || pb.iter().any(|(v, _)| labels.get(v).is_none()) {
        return Err(Error::contract("partition files cover different vertex sets"));
    }
    let second = parse_partition(b, &labels)?;
    Ok((first, second))
}

pub fn format_partition(partition: &Partition, labels: &LabelMap) -> String {
    let mut s = String::new();
    for (v, &b) in partition.labels().iter().enumerate() {
        let _ = writeln!(s, "{}\t{}", labels.label(v), b);
    }
    s
}

pub fn format_label_map(labels: &LabelMap) -> String {
    let mut s = String::new();
    for (id, l) in labels.labels().iter().enumerate() {
        let _ = writeln!(s, "{l}\t{id}");
    }
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Record of one command invocation, written as `manifest.txt` beside its outputs.
#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    pub command: String,
    pub seed: Option<u64>,
    pub config: Vec<(String, String)>,
    pub inputs: Vec<(PathBuf, String)>,
    pub outputs: Vec<PathBuf>,
    pub elapsed_secs: f64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.to_string(), value.to_string()));
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path)?;
        self.inputs.push((path.to_path_buf(), sha256_hex(&bytes)));
        String::from_utf8(bytes).map_err(|_| Error::Parse {
            line: 0,
            message: format!("{} is not UTF-8", path.display()),
        })
    }

    pub fn render(&self) -> String {
        let mut pairs = vec![("command".to_string(), self.command.clone())];
        if let Some(seed) = self.seed {
            pairs.push(("seed".into(), seed.to_string()));
        }
        pairs.extend(self.config.iter().map(|(k, v)| (format!("config.{k}"), v.clone())));
        for (i, (p, d)) in self.inputs.iter().enumerate() {
            pairs.push((format!("input.{i}.path"), p.display().to_string()));
            pairs.push((format!("input.{i}.sha256"), d.clone()));
        }
        for (i, p) in self.outputs.iter().enumerate() {
            pairs.push((format!("output.{i}"), p.display().to_string()));
        }
        pairs.push(("elapsed_secs".into(), format!("{:.3}", self.elapsed_secs)));
        config::render(&pairs)
    }
}
