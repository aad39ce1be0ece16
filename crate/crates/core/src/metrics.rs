//! Agreement between two partitions of the same vertex set.

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Largest block count for exhaustive permutation matching.
pub const MAX_MATCH_BLOCKS: usize = 8;

/// `counts[i][j]`: vertices in block `i` of `a` and block `j` of `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionTable {
    counts: Vec<Vec<u64>>,
    rows: Vec<u64>,
    cols: Vec<u64>,
    n: u64,
}

impl ConfusionTable {
    pub fn new(a: &Partition, b: &Partition) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::contract(format!(
                "partitions cover {} and {} vertices",
                a.len(),
                b.len()
            )));
        }
        let mut counts = vec![vec![0u64; b.k()]; a.k()];
        for (&i, &j) in a.labels().iter().zip(b.labels()) {
            counts[i][j] += 1;
        }
        Ok(Self::from_counts(counts))
    }

    /// Builds a table from a rectangular count matrix.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        let kb = counts.first().map_or(0, Vec::len);
        let rows: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let mut cols = vec![0u64; kb];
        for r in &counts {
            for (c, &x) in cols.iter_mut().zip(r) {
                *c += x;
            }
        }
        let n = rows.iter().sum();
        ConfusionTable { counts, rows, cols, n }
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_marginals(&self) -> &[u64] {
        &self.rows
    }

    pub fn col_marginals(&self) -> &[u64] {
        &self.cols
    }

    pub fn total(&self) -> u64 {
        self.n
    }

    fn entropy(marginal: &[u64], n: f64) -> f64 {
        marginal
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    }

    /// `2 I(A;B) / (H(A) + H(B))`.
    pub fn nmi(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let n = self.n as f64;
        let ha = Self::entropy(&self.rows, n);
        let hb = Self::entropy(&self.cols, n);
        if ha == 0.0 && hb == 0.0 {
            return 1.0;
        }
        if ha == 0.0 || hb == 0.0 {
            return 0.0;
        }
        let mut terms = Vec::new();
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0 {
                    let c = c as f64;
                    terms.push(c / n * (c * n / (self.rows[i] as f64 * self.cols[j] as f64)).ln());
                }
            }
        }
        // fixed summation order keeps nmi(a, b) == nmi(b, a) bit for bit
        terms.sort_by(f64::total_cmp);
        let mi: f64 = terms.iter().sum();
        (2.0 * mi / (ha + hb)).clamp(0.0, 1.0)
    }
}

pub fn nmi(a: &Partition, b: &Partition) -> Result<f64> {
    Ok(ConfusionTable::new(a, b)?.nmi())
}

/// Fraction of vertices whose labels agree under the best one-to-one
/// relabelling of `b`.
pub fn best_match_accuracy(a: &Partition, b: &Partition) -> Result<f64> {
    let table = ConfusionTable::new(a, b)?;
    let k = a.k().max(b.k());
    if k > MAX_MATCH_BLOCKS {
        return Err(Error::Usage(format!(
            "exact matching supports at most {MAX_MATCH_BLOCKS} blocks (got {k}); use NMI instead"
        )));
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    let cell = |i: usize, j: usize| -> u64 {
        table.counts.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0)
    };
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0u64;
    permute(&mut perm, 0, &mut |p| {
        let agree = p.iter().enumerate().map(|(i, &j)| cell(i, j)).sum::<u64>();
        best = best.max(agree);
    });
    Ok(best as f64 / a.len() as f64)
}

fn permute(p: &mut Vec<usize>, i: usize, visit: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        visit(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, visit);
        p.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Two blocks of `half` vertices with `wrong` of each labelled in the other block.
    fn fixture(half: usize, wrong: usize) -> (Partition, Partition) {
        let truth: Vec<usize> = (0..2 * half).map(|v| v / half).collect();
        let mut inferred = truth.clone();
        for v in 0..wrong {
            inferred[v] = 1;
            inferred[half + v] = 0;
        }
        (
            Partition::new(2, truth).unwrap(),
            Partition::new(2, inferred).unwrap(),
        )
    }

    /// Binary-entropy form of the symmetric two-block case.
    fn symmetric_oracle(accuracy: f64) -> f64 {
        let h = |p: f64| if p <= 0.0 || p >= 1.0 { 0.0 } else { -p * p.log2() - (1.0 - p) * (1.0 - p).log2() };
        1.0 - h(accuracy)
    }

    #[test]
    fn ninety_five_percent_anchor() {
        let (a, b) = fixture(1000, 50);
        let v = nmi(&a, &b).unwrap();
        assert!((v - 0.714).abs() <= 1e-3, "{v}");
        assert!((v - symmetric_oracle(0.95)).abs() < 1e-12);
    }

    #[test]
    fn ninety_percent_anchor() {
        let (a, b) = fixture(1000, 100);
        let v = nmi(&a, &b).unwrap();
        assert!((v - 0.531).abs() <= 1e-3, "{v}");
    }

    #[test]
    fn joint_entropy_normalisation_misses_the_anchor() {
        let (a, b) = fixture(1000, 50);
        let t = ConfusionTable::new(&a, &b).unwrap();
        let n = t.total() as f64;
        let plogp = |c: &u64| {
            let p = *c as f64 / n;
            -p * p.ln()
        };
        let h_joint: f64 = t.counts().iter().flatten().filter(|&&c| c > 0).map(plogp).sum();
        let h_a: f64 = t.row_marginals().iter().map(plogp).sum();
        let h_b: f64 = t.col_marginals().iter().map(plogp).sum();
        let mi = h_a + h_b - h_joint;
        assert!((mi / h_joint - 0.714).abs() > 0.1);
        assert!((2.0 * mi / (h_a + h_b) - t.nmi()).abs() < 1e-12);
    }

    #[test]
    fn identical_and_complement() {
        let (a, _) = fixture(10, 0);
        let flipped = Partition::new(2, a.labels().iter().map(|&l| 1 - l).collect()).unwrap();
        assert_eq!(nmi(&a, &a).unwrap(), 1.0);
        assert!((nmi(&a, &flipped).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(best_match_accuracy(&a, &flipped).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_by_construction() {
        let (a, b) = fixture(100, 5);
        assert!((best_match_accuracy(&a, &b).unwrap() - 0.95).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cases() {
        let (a, _) = fixture(5, 0);
        let one = Partition::single_block(10);
        assert_eq!(nmi(&a, &one).unwrap(), 0.0);
        assert_eq!(nmi(&one, &one).unwrap(), 1.0);
        // independent labellings
        let x = Partition::new(2, vec![0, 0, 1, 1]).unwrap();
        let y = Partition::new(2, vec![0, 1, 0, 1]).unwrap();
        assert_eq!(nmi(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch_and_too_many_blocks() {
        assert!(nmi(&Partition::single_block(3), &Partition::single_block(4)).is_err());
        let big = Partition::new(9, (0..9).collect()).unwrap();
        assert!(matches!(best_match_accuracy(&big, &big), Err(Error::Usage(_))));
    }

    proptest! {
        #[test]
        fn symmetric_and_relabel_invariant(
            labels in prop::collection::vec((0usize..4, 0usize..3), 1..60),
            shift in 0usize..4,
        ) {
            let a = Partition::new(4, labels.iter().map(|x| x.0).collect()).unwrap();
            let b = Partition::new(3, labels.iter().map(|x| x.1).collect()).unwrap();
            prop_assert_eq!(nmi(&a, &b).unwrap(), nmi(&b, &a).unwrap());
            let a2 = Partition::new(4, a.labels().iter().map(|&l| (l + shift) % 4).collect()).unwrap();
            prop_assert!((nmi(&a, &b).unwrap() - nmi(&a2, &b).unwrap()).abs() < 1e-12);
            let v = nmi(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            if a.occupied_blocks() > 1 {
                prop_assert!((nmi(&a, &a).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }
}
