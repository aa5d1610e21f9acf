//! Seeded planted-partition digraphs whose future links favour same-community pairs,
//! so embedding similarity predicts them by construction.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};
use crate::linkpred::{CandidatePairs, FeatureMode};
use crate::seed::{rng_for, STREAM_SYNTH};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedAffinityModel {
    pub num_nodes: usize,
    pub num_communities: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Odds multiplier for same-community future links.
    pub future_link_bias: f64,
    /// Future-link probability for cross-community pairs.
    pub future_base_prob: f64,
    pub seed: u64,
}

impl Default for PlantedAffinityModel {
    fn default() -> Self {
        PlantedAffinityModel {
            num_nodes: 60,
            num_communities: 2,
            p_in: 0.5,
            p_out: 0.05,
            future_link_bias: 6.0,
            future_base_prob: 0.1,
            seed: 0,
        }
    }
}

impl PlantedAffinityModel {
    pub fn validate(&self) -> Result<()> {
        if self.num_nodes < 2 || self.num_communities == 0 || self.num_communities > self.num_nodes
        {
            return Err(Error::invalid(format!(
                "need 2 <= nodes and 1 <= communities <= nodes, got {} nodes, {} communities",
                self.num_nodes, self.num_communities
            )));
        }
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return Err(Error::invalid(format!(
                "need 0 <= p_out < p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        if !(self.future_link_bias > 0.0 && self.future_link_bias.is_finite()) {
            return Err(Error::invalid("future_link_bias must be positive"));
        }
        if !(self.future_base_prob > 0.0 && self.future_base_prob < 1.0) {
            return Err(Error::invalid("future_base_prob must be in (0, 1)"));
        }
        Ok(())
    }

    /// Contiguous blocks whose sizes differ by at most one.
    pub fn community(&self, u: NodeId) -> usize {
        u * self.num_communities / self.num_nodes
    }

    /// Future-link probability for a same-community pair.
    pub fn intra_future_prob(&self) -> f64 {
        let odds = self.future_base_prob / (1.0 - self.future_base_prob) * self.future_link_bias;
        odds / (1.0 + odds)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance {
    pub graph: WeightedDigraph,
    /// Unordered pairs with sampled future labels.
    pub future: CandidatePairs,
    pub communities: Vec<usize>,
}

/// Zero-padded labels keep label order equal to index order.
fn node_label(u: NodeId, n: usize) -> String {
    let width = (n.max(2) - 1).to_string().len();
    format!("n{u:0width$}")
}

pub fn generate_planted(model: &PlantedAffinityModel) -> Result<PlantedInstance> {
    model.validate()?;
    let n = model.num_nodes;
    let mut graph = WeightedDigraph::with_labels((0..n).map(|u| node_label(u, n)));
    let communities: Vec<usize> = (0..n).map(|u| model.community(u)).collect();

    let mut rng = rng_for(model.seed, &[STREAM_SYNTH, 0]);
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let p = if communities[u] == communities[v] {
                model.p_in
            } else {
                model.p_out
            };
            if rng.gen::<f64>() < p {
                graph.add_edge_accumulate(u, v, 1.0)?;
            }
        }
    }

    let mut rng = rng_for(model.seed, &[STREAM_SYNTH, 1]);
    let p_intra = model.intra_future_prob();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    let mut labels = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            let p = if communities[u] == communities[v] {
                p_intra
            } else {
                model.future_base_prob
            };
            pairs.push((u, v));
            labels.push(u8::from(rng.gen::<f64>() < p));
        }
    }
    Ok(PlantedInstance {
        graph,
        future: CandidatePairs {
            pairs,
            labels,
            ordered: false,
            mode: FeatureMode::Cosine,
            pair_kind: "node_pairs".into(),
            dropped: Vec::new(),
        },
        communities,
    })
}

pub const PAIR_CSV_HEADER: [&str; 3] = ["source_label", "target_label", "label"];

/// Labelled pair list as `source_label,target_label,label` after `#` comments.
pub fn write_pairs<W: Write>(
    writer: W,
    graph: &WeightedDigraph,
    pairs: &CandidatePairs,
    comments: &[String],
) -> Result<()> {
    let rows: Vec<Vec<String>> = pairs
        .pairs
        .iter()
        .zip(&pairs.labels)
        .map(|(&(u, v), y)| {
            vec![
                graph.label(u).to_string(),
                graph.label(v).to_string(),
                y.to_string(),
            ]
        })
        .collect();
    let bytes = crate::report::csv_bytes(comments, &PAIR_CSV_HEADER, &rows)?;
    let mut writer = writer;
    writer
        .write_all(&bytes)
        .map_err(|e| Error::io("<pairs>", e))
}

#[derive(Debug, Deserialize)]
struct PairRow {
    source_label: String,
    target_label: String,
    label: u8,
}

/// Reads a pair list against `graph`. Pairs are treated as unordered with cosine
/// features unless `ordered` is set.
pub fn read_pairs<R: Read>(
    reader: R,
    origin: &Path,
    graph: &WeightedDigraph,
    ordered: bool,
) -> Result<CandidatePairs> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != PAIR_CSV_HEADER {
        return Err(Error::Schema {
            path: origin.to_path_buf(),
            message: format!("expected header {}", PAIR_CSV_HEADER.join(",")),
        });
    }
    let mut pairs = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.deserialize::<PairRow>().enumerate() {
        let row = (i + 2) as u64;
        let rec = rec.map_err(|e| Error::Record {
            path: origin.to_path_buf(),
            row,
            column: "label".into(),
            message: e.to_string(),
        })?;
        let lookup = |label: &str, column: &str| {
            graph.node_id(label).ok_or_else(|| Error::Record {
                path: origin.to_path_buf(),
                row,
                column: column.into(),
                message: format!("unknown node `{label}`"),
            })
        };
        let u = lookup(&rec.source_label, "source_label")?;
        let v = lookup(&rec.target_label, "target_label")?;
        if rec.label > 1 {
            return Err(Error::Record {
                path: origin.to_path_buf(),
                row,
                column: "label".into(),
                message: format!("label must be 0 or 1, got {}", rec.label),
            });
        }
        pairs.push((u, v));
        labels.push(rec.label);
    }
    if pairs.is_empty() {
        return Err(Error::Data(format!("{}: no pairs", origin.display())));
    }
    Ok(CandidatePairs {
        pairs,
        labels,
        ordered,
        mode: FeatureMode::Cosine,
        pair_kind: "node_pairs".into(),
        dropped: Vec::new(),
    })
}
