use crate::error::{Error, Result};

/// Block assignment `g`: vertex `v` belongs to block `labels[v]` in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    k: usize,
    labels: Vec<usize>,
}

impl Partition {
    pub fn new(k: usize, labels: Vec<usize>) -> Result<Self> {
        if k == 0 {
            return Err(Error::contract("partition needs at least one block"));
        }
        if let Some((v, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(Error::contract(format!(
                "vertex {v} has label {l}, expected < {k}"
            )));
        }
        Ok(Partition { k, labels })
    }

    /// Everything in block 0.
    pub fn single_block(n: usize) -> Self {
        Partition {
            k: 1,
            labels: vec![0; n],
        }
    }

    /// Builds a partition from arbitrary labels, compacting them to `0..k` in
    /// first-appearance order.
    pub fn from_raw_labels(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Partition {
            k: map.len().max(1),
            labels,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }

    pub(crate) fn set(&mut self, v: usize, block: usize) {
        debug_assert!(block < self.k);
        self.labels[v] = block;
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Number of non-empty blocks.
    pub fn occupied_blocks(&self) -> usize {
        self.block_sizes().iter().filter(|&&s| s > 0).count()
    }

    /// Applies `perm[old] = new` to every label.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k {
            return Err(Error::contract("relabeling must cover every block"));
        }
        Partition::new(self.k, self.labels.iter().map(|&l| perm[l]).collect())
    }

    /// Restricts to surviving vertices given an old → new id map.
    pub fn remap(&self, remap: &[Option<usize>]) -> Self {
        let n_new = remap.iter().flatten().count();
        let mut labels = vec![0; n_new];
        for (old, new) in remap.iter().enumerate() {
            if let Some(new) = new {
                labels[*new] = self.labels[old];
            }
        }
        Partition { k: self.k, labels }
    }
}
