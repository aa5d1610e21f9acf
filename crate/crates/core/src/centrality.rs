//! Common out-neighbor (CON) scores, PageRank on the reversed network, min-max
//! normalization and the low-key leader strength that combines them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};
use crate::report::fmt_sig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PageRankParams {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Edge weights define transition probabilities when set.
    pub weighted: bool,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            damping: 0.85,
            tolerance: 1e-10,
            max_iterations: 200,
            weighted: true,
        }
    }
}

impl PageRankParams {
    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::invalid(format!(
                "damping must lie in (0,1), got {}",
                self.damping
            )));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be positive"));
        }
        Ok(())
    }
}

/// Number of common out-neighbors of `u` and `v`; weights are ignored.
pub fn con_pair(g: &WeightedDigraph, u: NodeId, v: NodeId) -> usize {
    let (a, b) = (g.out_neighbors(u), g.out_neighbors(v));
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `CON(u) = sum over v of con_pair(u, v)`.
///
/// Each out-neighbor `w` of `u` is shared with every in-neighbor of `w`, so the sum
/// collapses to the in-degrees of `u`'s out-neighbors. Dropping the `v = u` term
/// subtracts `u`'s own out-degree.
pub fn con_scores(g: &WeightedDigraph, include_self: bool) -> Vec<u64> {
    (0..g.num_nodes())
        .map(|u| {
            let total: u64 = g
                .out_neighbors(u)
                .iter()
                .map(|&(w, _)| g.in_degree(w) as u64)
                .sum();
            if include_self {
                total
            } else {
                total - g.out_degree(u) as u64
            }
        })
        .collect()
}

/// Power-iteration PageRank on the reversed graph.
///
/// Nodes with no outgoing edge in the reversed graph (nodes that beat nobody in the
/// original) spread their mass uniformly. Iteration stops when the L1 change falls
/// below `params.tolerance`.
pub fn pagerank_adversarial(g: &WeightedDigraph, params: &PageRankParams) -> Result<Vec<f64>> {
    params.validate()?;
    let n = g.num_nodes();
    if n == 0 {
        return Err(Error::invalid("PageRank needs at least one node"));
    }
    pagerank(&g.reverse(), params)
}

pub(crate) fn pagerank(g: &WeightedDigraph, params: &PageRankParams) -> Result<Vec<f64>> {
    let n = g.num_nodes();
    let nf = n as f64;
    let d = params.damping;
    let edge_w = |w: f64| if params.weighted { w } else { 1.0 };
    let out_total: Vec<f64> = (0..n)
        .map(|u| g.out_neighbors(u).iter().map(|&(_, w)| edge_w(w)).sum())
        .collect();

    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iterations {
        let dangling: f64 = (0..n)
            .filter(|&u| out_total[u] == 0.0)
            .map(|u| rank[u])
            .sum();
        let base = (1.0 - d) / nf + d * dangling / nf;
        for (v, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = g
                .in_neighbors(v)
                .iter()
                .map(|&(u, w)| rank[u] * edge_w(w) / out_total[u])
                .sum();
            *slot = base + d * inflow;
        }
        // renormalize against drift
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= s);
        residual = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if residual < params.tolerance {
            return Ok(rank);
        }
    }
    Err(Error::PageRankNotConverged {
        iterations: params.max_iterations,
        residual,
        last_iterate: rank,
    })
}

/// Min-max rescaling into `[0, 1]`. A constant input maps to all zeros.
pub fn unity_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::invalid("cannot normalize an empty sequence"));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return Ok(vec![0.0; values.len()]);
    }
    let span = max - min;
    Ok(values.iter().map(|x| (x - min) / span).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityRow {
    pub label: String,
    pub con: u64,
    pub pagerank: f64,
    pub con_norm: f64,
    pub pr_norm: f64,
    /// Low-key leader strength, `con_norm - pr_norm`.
    pub lkl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityTable {
    pub rows: Vec<CentralityRow>,
}

impl CentralityTable {
    pub fn lkl(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.lkl).collect()
    }

    pub fn lkl_range(&self) -> Option<(f64, f64)> {
        if self.rows.is_empty() {
            return None;
        }
        let lo = self
            .rows
            .iter()
            .map(|r| r.lkl)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .rows
            .iter()
            .map(|r| r.lkl)
            .fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    pub const CSV_HEADER: [&'static str; 6] =
        ["label", "con", "pagerank", "con_norm", "pr_norm", "lkl"];

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    r.con.to_string(),
                    fmt_sig(r.pagerank, 10),
                    fmt_sig(r.con_norm, 10),
                    fmt_sig(r.pr_norm, 10),
                    fmt_sig(r.lkl, 10),
                ]
            })
            .collect()
    }
}

pub fn low_key_leader_strengths(
    g: &WeightedDigraph,
    pr_params: &PageRankParams,
    include_self: bool,
) -> Result<CentralityTable> {
    let con = con_scores(g, include_self);
    let pr = pagerank_adversarial(g, pr_params)?;
    let con_f: Vec<f64> = con.iter().map(|&c| c as f64).collect();
    let con_norm = unity_normalize(&con_f)?;
    let pr_norm = unity_normalize(&pr)?;
    let rows = (0..g.num_nodes())
        .map(|u| CentralityRow {
            label: g.label(u).to_string(),
            con: con[u],
            pagerank: pr[u],
            con_norm: con_norm[u],
            pr_norm: pr_norm[u],
            lkl: con_norm[u] - pr_norm[u],
        })
        .collect();
    Ok(CentralityTable { rows })
}
