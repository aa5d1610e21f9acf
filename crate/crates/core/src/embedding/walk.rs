//! Second-order biased random walks.
//!
//! Having just moved `t -> v`, the walk picks an out-neighbor `x` of `v` with weight
//! `alpha(t, x) * w(v, x)`, where `alpha` is `1/p` when `x == t`, `1` when `x` is
//! adjacent to `t` (either direction) and `1/q` otherwise. Walks follow out-edges and
//! stop early at nodes with no out-edges.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};
use crate::seed::{rng_for, STREAM_WALKS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkConfig {
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            p: 1.0,
            q: 1.0,
            walk_length: 80,
            walks_per_node: 10,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite() && self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::invalid(format!(
                "p and q must be positive, got p={} q={}",
                self.p, self.q
            )));
        }
        if self.walk_length == 0 || self.walks_per_node == 0 {
            return Err(Error::invalid(
                "walk_length and walks_per_node must be positive",
            ));
        }
        Ok(())
    }
}

/// The current node has no out-edges; the walk ends here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeadEnd(pub NodeId);

/// Search bias for stepping to `x` having arrived from `t`.
pub fn search_bias(g: &WeightedDigraph, t: NodeId, x: NodeId, p: f64, q: f64) -> f64 {
    if x == t {
        1.0 / p
    } else if g.adjacent_undirected(t, x) {
        1.0
    } else {
        1.0 / q
    }
}

/// Normalized probabilities of each out-neighbor of `v` after the step `t -> v`,
/// in ascending neighbor order.
pub fn transition_distribution(
    g: &WeightedDigraph,
    t: NodeId,
    v: NodeId,
    p: f64,
    q: f64,
) -> std::result::Result<Vec<(NodeId, f64)>, DeadEnd> {
    let nbrs = g.out_neighbors(v);
    if nbrs.is_empty() {
        return Err(DeadEnd(v));
    }
    let mut dist: Vec<(NodeId, f64)> = nbrs
        .iter()
        .map(|&(x, w)| (x, search_bias(g, t, x, p, q) * w))
        .collect();
    let total: f64 = dist.iter().map(|d| d.1).sum();
    dist.iter_mut().for_each(|d| d.1 /= total);
    Ok(dist)
}

fn pick<R: Rng>(rng: &mut R, choices: &[(NodeId, f64)], total: f64) -> NodeId {
    let mut r = rng.gen::<f64>() * total;
    for &(x, w) in choices {
        if r < w {
            return x;
        }
        r -= w;
    }
    choices.last().expect("nonempty").0
}

/// One walk from `start`, seeded independently of every other walk.
pub fn walk_from(
    g: &WeightedDigraph,
    start: NodeId,
    walk_index: usize,
    cfg: &WalkConfig,
) -> Vec<NodeId> {
    let mut rng = rng_for(cfg.seed, &[STREAM_WALKS, start as u64, walk_index as u64]);
    let mut walk = Vec::with_capacity(cfg.walk_length);
    walk.push(start);
    if cfg.walk_length < 2 {
        return walk;
    }
    let first = g.out_neighbors(start);
    if first.is_empty() {
        return walk;
    }
    let total: f64 = first.iter().map(|e| e.1).sum();
    walk.push(pick(&mut rng, first, total));

    let mut buf: Vec<(NodeId, f64)> = Vec::new();
    while walk.len() < cfg.walk_length {
        let (t, v) = (walk[walk.len() - 2], walk[walk.len() - 1]);
        let nbrs = g.out_neighbors(v);
        if nbrs.is_empty() {
            break;
        }
        buf.clear();
        buf.extend(
            nbrs.iter()
                .map(|&(x, w)| (x, search_bias(g, t, x, cfg.p, cfg.q) * w)),
        );
        let total: f64 = buf.iter().map(|e| e.1).sum();
        walk.push(pick(&mut rng, &buf, total));
    }
    walk
}

/// `walks_per_node` walks from every node, ordered round by round and by start node
/// within a round. Walks are generated in parallel; the result does not depend on the
/// number of threads.
pub fn generate_walks(g: &WeightedDigraph, cfg: &WalkConfig) -> Result<Vec<Vec<NodeId>>> {
    cfg.validate()?;
    let n = g.num_nodes();
    Ok((0..cfg.walks_per_node * n)
        .into_par_iter()
        .map(|i| walk_from(g, i % n.max(1), i / n.max(1), cfg))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_abc() -> WeightedDigraph {
        let mut g = WeightedDigraph::with_labels(["a", "b", "c"]);
        g.add_edge_accumulate(0, 1, 1.0).unwrap();
        g.add_edge_accumulate(1, 2, 1.0).unwrap();
        g
    }

    #[test]
    fn bias_values() {
        // t=0, v=1; out-neighbors of v: 0 (return), 2 (adjacent to t), 3 (distance 2)
        let mut g = WeightedDigraph::with_labels(["t", "v", "x1", "x2"]);
        g.add_edge_accumulate(0, 1, 1.0).unwrap();
        g.add_edge_accumulate(1, 0, 1.0).unwrap();
        g.add_edge_accumulate(1, 2, 1.0).unwrap();
        g.add_edge_accumulate(1, 3, 1.0).unwrap();
        g.add_edge_accumulate(2, 0, 1.0).unwrap();
        assert_eq!(search_bias(&g, 0, 0, 2.0, 0.5), 0.5);
        assert_eq!(search_bias(&g, 0, 2, 2.0, 0.5), 1.0);
        assert_eq!(search_bias(&g, 0, 3, 2.0, 0.5), 2.0);
        let d = transition_distribution(&g, 0, 1, 2.0, 0.5).unwrap();
        assert_eq!(d, vec![(0, 0.5 / 3.5), (2, 1.0 / 3.5), (3, 2.0 / 3.5)]);
    }

    #[test]
    fn unbiased_is_uniform() {
        let mut g = WeightedDigraph::with_labels(["t", "v", "a", "b", "c"]);
        g.add_edge_accumulate(0, 1, 1.0).unwrap();
        for x in [0, 2, 3, 4] {
            g.add_edge_accumulate(1, x, 1.0).unwrap();
        }
        let d = transition_distribution(&g, 0, 1, 1.0, 1.0).unwrap();
        assert!(d.iter().all(|&(_, pr)| (pr - 0.25).abs() < 1e-15));
    }

    #[test]
    fn weighted_return_vs_far() {
        let mut g = WeightedDigraph::with_labels(["t", "v", "x"]);
        g.add_edge_accumulate(0, 1, 1.0).unwrap();
        g.add_edge_accumulate(1, 0, 1.0).unwrap();
        g.add_edge_accumulate(1, 2, 3.0).unwrap();
        let d = transition_distribution(&g, 0, 1, 1.0, 1.0).unwrap();
        assert_eq!(d, vec![(0, 0.25), (2, 0.75)]);
    }

    #[test]
    fn dead_end_signalled() {
        let g = path_abc();
        assert_eq!(transition_distribution(&g, 1, 2, 1.0, 1.0), Err(DeadEnd(2)));
    }

    #[test]
    fn single_choice_chain_and_truncation() {
        let g = path_abc();
        let cfg = WalkConfig {
            walk_length: 3,
            walks_per_node: 4,
            ..Default::default()
        };
        for w in 0..4 {
            assert_eq!(walk_from(&g, 0, w, &cfg), vec![0, 1, 2]);
        }
        let mut ab = WeightedDigraph::with_labels(["a", "b"]);
        ab.add_edge_accumulate(0, 1, 1.0).unwrap();
        let cfg5 = WalkConfig {
            walk_length: 5,
            ..Default::default()
        };
        assert_eq!(walk_from(&ab, 0, 0, &cfg5), vec![0, 1]);
        assert_eq!(walk_from(&ab, 1, 0, &cfg5), vec![1]);
    }

    #[test]
    fn walks_reproducible_and_ordered() {
        let mut g = WeightedDigraph::with_labels(["a", "b", "c", "d"]);
        for (u, v) in [(0, 1), (1, 2), (2, 0), (0, 3), (3, 1), (1, 0)] {
            g.add_edge_accumulate(u, v, 1.0).unwrap();
        }
        let cfg = WalkConfig {
            walk_length: 12,
            walks_per_node: 3,
            p: 0.5,
            q: 2.0,
            seed: 9,
        };
        let a = generate_walks(&g, &cfg).unwrap();
        let b = generate_walks(&g, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
        assert_eq!(
            a.iter().map(|w| w[0]).collect::<Vec<_>>(),
            vec![0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3]
        );
        let other = generate_walks(&g, &WalkConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn renaming_labels_keeps_walks() {
        let mut g = WeightedDigraph::with_labels(["a", "b", "c"]);
        let mut h = WeightedDigraph::with_labels(["zz", "yy", "xx"]);
        for (u, v, w) in [(0, 1, 1.0), (1, 2, 2.0), (2, 0, 1.0), (1, 0, 3.0)] {
            g.add_edge_accumulate(u, v, w).unwrap();
            h.add_edge_accumulate(u, v, w).unwrap();
        }
        let cfg = WalkConfig {
            walk_length: 20,
            walks_per_node: 5,
            seed: 3,
            ..Default::default()
        };
        assert_eq!(
            generate_walks(&g, &cfg).unwrap(),
            generate_walks(&h, &cfg).unwrap()
        );
    }

    #[test]
    fn rejects_bad_params() {
        let g = path_abc();
        for cfg in [
            WalkConfig {
                p: 0.0,
                ..Default::default()
            },
            WalkConfig {
                q: -1.0,
                ..Default::default()
            },
            WalkConfig {
                walk_length: 0,
                ..Default::default()
            },
        ] {
            assert!(generate_walks(&g, &cfg).is_err());
        }
    }
}
