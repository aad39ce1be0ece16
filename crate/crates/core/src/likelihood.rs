//! Profile log-likelihoods of the Poisson block model family.
//!
//! Every value is in natural-log units and drops partition-independent
//! constants (the `Σ d log d` and factorial terms), so values are comparable
//! across partitions of one graph under one family but not across families.
//! Terms with `m = 0` contribute 0, which also covers empty blocks.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Degrees;
use crate::priors::PriorConfig;
use crate::stats::{BlockStats, NeighborCounts, VertexDegree};

/// Likelihood family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Poisson block model without degree correction (undirected).
    Sbm,
    /// Degree-corrected, undirected.
    Dc,
    /// Directed degree-corrected: separate in/out propensities.
    Ddc,
    /// Oriented degree-corrected: total-degree correction plus orientation matrix.
    Odc,
}

impl Family {
    pub fn is_directed(self) -> bool {
        matches!(self, Family::Ddc | Family::Odc)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Sbm => "sbm",
            Family::Dc => "dc",
            Family::Ddc => "ddc",
            Family::Odc => "odc",
        }
    }

    fn weight(self) -> f64 {
        match self {
            Family::Sbm | Family::Dc => 0.5,
            Family::Ddc | Family::Odc => 1.0,
        }
    }

    /// Block normalisers used for rows and columns of `m`.
    fn row_norm(self, stats: &BlockStats, r: usize) -> u64 {
        match self {
            Family::Sbm => stats.sizes()[r],
            Family::Dc | Family::Odc => stats.kappa_total()[r],
            Family::Ddc => stats.kappa_out()[r],
        }
    }

    fn col_norm(self, stats: &BlockStats, s: usize) -> u64 {
        match self {
            Family::Sbm => stats.sizes()[s],
            Family::Dc | Family::Odc => stats.kappa_total()[s],
            Family::Ddc => stats.kappa_in()[s],
        }
    }

    fn row_step(self, d: VertexDegree) -> u64 {
        match self {
            Family::Sbm => 1,
            Family::Dc | Family::Odc => d.total,
            Family::Ddc => d.out,
        }
    }

    fn col_step(self, d: VertexDegree) -> u64 {
        match self {
            Family::Sbm => 1,
            Family::Dc | Family::Odc => d.total,
            Family::Ddc => d.inn,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Family plus optional degree generation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub family: Family,
    pub degree_prior: Option<PriorConfig>,
}

pub const MODEL_NAMES: [&str; 7] = ["sbm", "dc", "ddc", "odc", "dg-dc", "dg-ddc", "dg-odc"];

impl ModelSpec {
    pub fn plain(family: Family) -> Self {
        ModelSpec {
            family,
            degree_prior: None,
        }
    }

    /// Degree-generated variant with every prior parameter fitted on the fly.
    pub fn degree_generated(family: Family, prior: PriorConfig) -> Result<Self> {
        if family == Family::Sbm {
            return Err(Error::config(
                "degree generation needs a degree-corrected family (dc, ddc, odc)",
            ));
        }
        Ok(ModelSpec {
            family,
            degree_prior: Some(prior),
        })
    }

    pub fn is_degree_generated(&self) -> bool {
        self.degree_prior.is_some()
    }

    pub fn name(&self) -> String {
        if self.is_degree_generated() {
            format!("dg-{}", self.family)
        } else {
            self.family.to_string()
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (dg, base) = match lower.strip_prefix("dg-") {
            Some(rest) => (true, rest),
            None => (false, lower.as_str()),
        };
        let family = match base {
            "sbm" if !dg => Family::Sbm,
            "dc" => Family::Dc,
            "ddc" => Family::Ddc,
            "odc" => Family::Odc,
            _ => {
                return Err(Error::Usage(format!(
                    "unknown model '{s}'; expected one of {{{}}}",
                    MODEL_NAMES.join(", ")
                )))
            }
        };
        if dg {
            ModelSpec::degree_generated(family, PriorConfig::default())
        } else {
            Ok(ModelSpec::plain(family))
        }
    }
}

#[inline]
fn term(m: u64, a: u64, b: u64) -> f64 {
    if m == 0 {
        0.0
    } else {
        let m = m as f64;
        m * (m.ln() - (a as f64).ln() - (b as f64).ln())
    }
}

fn check_direction(stats: &BlockStats, directed: bool, what: &str) {
    debug_assert_eq!(
        stats.is_directed(),
        directed,
        "{what} evaluated on {} statistics",
        if stats.is_directed() { "directed" } else { "undirected" }
    );
}

/// Profile log-likelihood of `family` at `stats`.
pub fn loglik(family: Family, stats: &BlockStats) -> f64 {
    let k = stats.k();
    let mut sum = 0.0;
    for r in 0..k {
        let a = family.row_norm(stats, r);
        for s in 0..k {
            sum += term(stats.m(r, s), a, family.col_norm(stats, s));
        }
    }
    family.weight() * sum
}

/// `½ Σ m_rs log(m_rs / (κ_r κ_s))` on undirected statistics.
pub fn loglik_dc(stats: &BlockStats) -> f64 {
    check_direction(stats, false, "DC");
    loglik(Family::Dc, stats)
}

/// `Σ m_rs log(m_rs / (κ_r^out κ_s^in))` on directed statistics.
pub fn loglik_ddc(stats: &BlockStats) -> f64 {
    check_direction(stats, true, "DDC");
    loglik(Family::Ddc, stats)
}

/// `Σ m_rs log(m_rs / (κ_r κ_s))` with `κ = κ^in + κ^out`, on directed statistics.
pub fn loglik_odc(stats: &BlockStats) -> f64 {
    check_direction(stats, true, "ODC");
    loglik(Family::Odc, stats)
}

/// Partition-dependent part of the Poisson SBM, `½ Σ m_rs log(m_rs / (n_r n_s))`,
/// on undirected statistics.
pub fn loglik_sbm(stats: &BlockStats) -> f64 {
    check_direction(stats, false, "SBM");
    loglik(Family::Sbm, stats)
}

/// Splits the ODC likelihood into the undirected degree-corrected part on the
/// symmetrised counts and the orientation part at the fitted `ρ̂ = m / m̄`.
pub fn loglik_odc_decomposed(stats: &BlockStats) -> (f64, f64) {
    check_direction(stats, true, "ODC");
    let k = stats.k();
    let kappa = stats.kappa_total();
    let mut undirected = 0.0;
    let mut orientation = 0.0;
    for r in 0..k {
        for s in 0..k {
            let m_bar = stats.m_bar(r, s);
            undirected += term(m_bar, kappa[r], kappa[s]);
            let m = stats.m(r, s);
            if m > 0 {
                orientation += m as f64 * (m as f64 / m_bar as f64).ln();
            }
        }
    }
    (0.5 * undirected, orientation)
}

/// Exact change of the profile likelihood when a vertex with degree `degree`
/// and block counts `counts` moves from `from` to `to`. Only rows and columns
/// `from`/`to` are touched.
pub fn delta_loglik(
    family: Family,
    stats: &BlockStats,
    degree: VertexDegree,
    counts: &NeighborCounts,
    from: usize,
    to: usize,
) -> f64 {
    if from == to {
        return 0.0;
    }
    let k = stats.k();
    let row_step = family.row_step(degree);
    let col_step = family.col_step(degree);
    let row_old = |x: usize| family.row_norm(stats, x);
    let col_old = |x: usize| family.col_norm(stats, x);
    let shift = |x: usize, v: u64, step: u64| {
        if x == from {
            v - step
        } else if x == to {
            v + step
        } else {
            v
        }
    };
    let pair = |a: usize, b: usize| {
        let m_old = stats.m(a, b);
        let m_new = (m_old as i64 + BlockStats::move_delta(a, b, from, to, counts)) as u64;
        term(m_new, shift(a, row_old(a), row_step), shift(b, col_old(b), col_step))
            - term(m_old, row_old(a), col_old(b))
    };
    let mut sum = 0.0;
    for b in 0..k {
        sum += pair(from, b) + pair(to, b);
    }
    for a in 0..k {
        if a != from && a != to {
            sum += pair(a, from) + pair(a, to);
        }
    }
    family.weight() * sum
}

/// Maximum-likelihood parameters at a fixed partition. Entries whose
/// normaliser is zero are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct MleParameters {
    /// `θ̂` (out-propensity for DDC, total degree for DC/ODC, 1 for SBM).
    pub theta: Vec<f64>,
    /// `θ̂^in`, DDC only.
    pub theta_in: Option<Vec<f64>>,
    /// Row-major `k × k`. For ODC this is the undirected `m̄ / (κ κ)`.
    pub omega: Vec<Option<f64>>,
    /// Row-major `k × k` orientation probabilities, ODC only.
    pub rho: Option<Vec<Option<f64>>>,
}

pub fn mle_parameters(family: Family, stats: &BlockStats, degrees: &Degrees) -> MleParameters {
    let k = stats.k();
    let ratio = |num: u64, a: u64, b: u64| {
        (a > 0 && b > 0).then(|| num as f64 / (a as f64 * b as f64))
    };
    let to_f = |v: &[u64]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let mut omega = Vec::with_capacity(k * k);
    let mut rho = None;
    match family {
        Family::Odc => {
            let kappa = stats.kappa_total();
            let mut rh = Vec::with_capacity(k * k);
            for r in 0..k {
                for s in 0..k {
                    let m_bar = stats.m_bar(r, s);
                    omega.push(ratio(m_bar, kappa[r], kappa[s]));
                    rh.push((m_bar > 0).then(|| stats.m(r, s) as f64 / m_bar as f64));
                }
            }
            rho = Some(rh);
        }
        _ => {
            for r in 0..k {
                for s in 0..k {
                    omega.push(ratio(
                        stats.m(r, s),
                        family.row_norm(stats, r),
                        family.col_norm(stats, s),
                    ));
                }
            }
        }
    }
    let (theta, theta_in) = match family {
        Family::Sbm => (vec![1.0; degrees.len()], None),
        Family::Dc | Family::Odc => (to_f(&degrees.d_total), None),
        Family::Ddc => (to_f(&degrees.d_out), Some(to_f(&degrees.d_in))),
    };
    MleParameters {
        theta,
        theta_in,
        omega,
        rho,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::partition::Partition;
    use std::f64::consts::LN_2;

    fn stats(n: usize, directed: bool, edges: &[(usize, usize, u64)], labels: Vec<usize>) -> BlockStats {
        let g = Graph::new(n, directed, edges.iter().copied()).unwrap();
        let k = labels.iter().max().map_or(1, |m| m + 1);
        BlockStats::compute(&g, &Partition::new(k, labels).unwrap()).unwrap()
    }

    fn four_vertex() -> BlockStats {
        stats(4, false, &[(0, 1, 1), (0, 2, 1), (1, 3, 1)], vec![0, 0, 1, 1])
    }

    fn two_into_one() -> BlockStats {
        stats(3, true, &[(0, 2, 1), (1, 2, 1)], vec![0, 0, 1])
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn dc_hand_values() {
        close(loglik_dc(&four_vertex()), -7.0 * LN_2);
        // single block: -M ln(2M), M = 3
        let s = stats(4, false, &[(0, 1, 1), (0, 2, 1), (1, 3, 1)], vec![0; 4]);
        close(loglik_dc(&s), -3.0 * 6f64.ln());
        close(loglik_dc(&stats(0, false, &[], vec![])), 0.0);
    }

    #[test]
    fn ddc_hand_values() {
        close(loglik_ddc(&two_into_one()), -2.0 * LN_2);
        // A -> B only, M = 5
        let s = stats(4, true, &[(0, 2, 2), (1, 3, 3)], vec![0, 0, 1, 1]);
        close(loglik_ddc(&s), -5.0 * 5f64.ln());
        close(loglik_ddc(&stats(0, true, &[], vec![])), 0.0);
    }

    #[test]
    fn odc_hand_values() {
        close(loglik_odc(&two_into_one()), -2.0 * LN_2);
        close(loglik_odc(&stats(2, true, &[(0, 1, 1)], vec![0, 0])), (0.25f64).ln());
        close(loglik_odc(&stats(0, true, &[], vec![])), 0.0);
    }

    #[test]
    fn odc_decomposition_hand_values() {
        let (u, o) = loglik_odc_decomposed(&two_into_one());
        close(u, 2.0 * (0.5f64).ln());
        close(o, 0.0);

        let s = stats(2, true, &[(0, 1, 1), (1, 0, 1)], vec![0, 1]);
        let (_, o) = loglik_odc_decomposed(&s);
        close(o, 2.0 * (0.5f64).ln());

        // single block: every edge sits on the diagonal with ρ̂ = 1/2
        let s = stats(3, true, &[(0, 1, 2), (1, 2, 1), (2, 0, 1)], vec![0, 0, 0]);
        let (u, o) = loglik_odc_decomposed(&s);
        close(o, 4.0 * (0.5f64).ln());
        close(u + o, loglik_odc(&s));
    }

    #[test]
    fn sbm_hand_values() {
        close(loglik_sbm(&four_vertex()), -3.0 * LN_2);
        close(loglik_sbm(&stats(0, false, &[], vec![])), 0.0);
    }

    #[test]
    fn sbm_omega_matches_edge_density() {
        let s = four_vertex();
        let g = Graph::new(4, false, [(0, 1, 1), (0, 2, 1), (1, 3, 1)]).unwrap();
        let p = mle_parameters(Family::Sbm, &s, &g.degrees());
        assert_eq!(p.omega, vec![Some(0.5), Some(0.5), Some(0.5), Some(0.0)]);
    }

    #[test]
    fn mle_ddc_hand_values() {
        let g = Graph::new(3, true, [(0, 2, 1), (1, 2, 1)]).unwrap();
        let p = mle_parameters(Family::Ddc, &two_into_one(), &g.degrees());
        assert_eq!(p.theta, vec![1.0, 1.0, 0.0]);
        assert_eq!(p.theta_in, Some(vec![0.0, 0.0, 2.0]));
        assert_eq!(p.omega[1], Some(0.5));
        // κ_B^out = 0: row B undefined
        assert_eq!(p.omega[2], None);
    }

    #[test]
    fn mle_odc_symmetric_pair() {
        let g = Graph::new(2, true, [(0, 1, 1), (1, 0, 1)]).unwrap();
        let s = BlockStats::compute(&g, &Partition::new(2, vec![0, 1]).unwrap()).unwrap();
        let p = mle_parameters(Family::Odc, &s, &g.degrees());
        let rho = p.rho.unwrap();
        assert_eq!(rho[1], Some(0.5));
        assert_eq!(rho[2], Some(0.5));
        assert_eq!(rho[0], None);
    }

    #[test]
    fn mle_dc_theta_is_degree() {
        let g = Graph::new(4, false, [(0, 1, 1), (0, 2, 1), (1, 3, 1)]).unwrap();
        let p = mle_parameters(Family::Dc, &four_vertex(), &g.degrees());
        assert_eq!(p.theta, vec![2.0, 2.0, 1.0, 1.0]);
    }

    #[test]
    fn delta_no_op_is_zero() {
        let s = four_vertex();
        let c = NeighborCounts::zeros(2);
        let d = VertexDegree { out: 1, inn: 1, total: 1 };
        assert_eq!(delta_loglik(Family::Dc, &s, d, &c, 1, 1), 0.0);
    }

    #[test]
    fn delta_matches_recompute_on_four_vertex_example() {
        let g = Graph::new(4, false, [(0, 1, 1), (0, 2, 1), (1, 3, 1)]).unwrap();
        let labels = vec![0, 0, 1, 1];
        let before = BlockStats::compute(&g, &Partition::new(2, labels.clone()).unwrap()).unwrap();
        let counts = NeighborCounts::compute(&g, &labels, 3, 2);
        let d = delta_loglik(Family::Dc, &before, VertexDegree::of(&g.degrees(), 3), &counts, 1, 0);
        let after = BlockStats::compute(&g, &Partition::new(2, vec![0, 0, 1, 0]).unwrap()).unwrap();
        close(d, loglik_dc(&after) - loglik_dc(&before));

        // emptying block 1 by moving vertex 2 afterwards
        let labels = vec![0, 0, 1, 0];
        let counts = NeighborCounts::compute(&g, &labels, 2, 2);
        let d = delta_loglik(Family::Dc, &after, VertexDegree::of(&g.degrees(), 2), &counts, 1, 0);
        let empty = BlockStats::compute(&g, &Partition::new(2, vec![0; 4]).unwrap()).unwrap();
        close(d, loglik_dc(&empty) - loglik_dc(&after));
    }

    #[test]
    fn model_names_parse() {
        for name in MODEL_NAMES {
            let m: ModelSpec = name.parse().unwrap();
            assert_eq!(m.name(), name);
        }
        assert!(matches!("dg-sbm".parse::<ModelSpec>(), Err(Error::Usage(_))));
        let err = "foo".parse::<ModelSpec>().unwrap_err().to_string();
        assert!(err.contains("dg-odc"));
    }
}
