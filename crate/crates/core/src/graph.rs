//! Directed weighted graph with dense node ids and a label table.
//!
//! Parallel observations of the same ordered pair are collapsed into a single
//! edge whose weight is the sum of the observations. Adjacency lists are kept
//! sorted by neighbor id so every traversal is deterministic.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::report::fmt_sig;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedDigraph {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    out_adj: Vec<Vec<(NodeId, f64)>>,
    in_adj: Vec<Vec<(NodeId, f64)>>,
}

impl WeightedDigraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph with nodes labelled by the given strings, in order. Duplicate labels are merged.
    pub fn with_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut g = Self::new();
        for l in labels {
            g.add_node(l);
        }
        g
    }

    /// Returns the id for `label`, creating the node if needed.
    pub fn add_node(&mut self, label: impl Into<String>) -> NodeId {
        let label = label.into();
        if let Some(&id) = self.index.get(&label) {
            return id;
        }
        let id = self.labels.len();
        self.index.insert(label.clone(), id);
        self.labels.push(label);
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        id
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    pub fn label(&self, u: NodeId) -> &str {
        &self.labels[u]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    fn check(&self, u: NodeId) -> Result<()> {
        if u < self.num_nodes() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: u,
                num_nodes: self.num_nodes(),
            })
        }
    }

    /// Adds `w` to the weight of edge `(u, v)`, creating it if absent.
    pub fn add_edge_accumulate(&mut self, u: NodeId, v: NodeId, w: f64) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::invalid(format!(
                "edge weight must be positive and finite, got {w}"
            )));
        }
        accumulate(&mut self.out_adj[u], v, w);
        accumulate(&mut self.in_adj[v], u, w);
        Ok(())
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let adj = self.out_adj.get(u)?;
        adj.binary_search_by_key(&v, |&(t, _)| t)
            .ok()
            .map(|i| adj[i].1)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.weight(u, v).is_some()
    }

    /// Adjacent nodes in ascending id order.
    pub fn neighborhood(&self, u: NodeId, direction: Direction) -> &[(NodeId, f64)] {
        match direction {
            Direction::Out => &self.out_adj[u],
            Direction::In => &self.in_adj[u],
        }
    }

    pub fn out_neighbors(&self, u: NodeId) -> &[(NodeId, f64)] {
        &self.out_adj[u]
    }

    pub fn in_neighbors(&self, u: NodeId) -> &[(NodeId, f64)] {
        &self.in_adj[u]
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_adj[u].len()
    }

    pub fn in_degree(&self, u: NodeId) -> usize {
        self.in_adj[u].len()
    }

    pub fn out_weight(&self, u: NodeId) -> f64 {
        self.out_adj[u].iter().map(|&(_, w)| w).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.out_adj.iter().flatten().map(|&(_, w)| w).sum()
    }

    /// All edges as `(source, target, weight)` ordered by source then target.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().map(move |&(v, w)| (u, v, w)))
    }

    /// True when `a` and `b` are joined by an edge in either direction.
    pub fn adjacent_undirected(&self, a: NodeId, b: NodeId) -> bool {
        let found = |adj: &[(NodeId, f64)]| adj.binary_search_by_key(&b, |&(t, _)| t).is_ok();
        found(&self.out_adj[a]) || found(&self.in_adj[a])
    }

    /// The same graph with every edge flipped.
    pub fn reverse(&self) -> WeightedDigraph {
        WeightedDigraph {
            labels: self.labels.clone(),
            index: self.index.clone(),
            out_adj: self.in_adj.clone(),
            in_adj: self.out_adj.clone(),
        }
    }

    /// Writes `source_label,target_label,weight`. Every node is first declared as a
    /// `label,,` row so that re-reading preserves node ids, isolated nodes included.
    pub fn write_edge_list<W: Write>(&self, writer: W, preamble: &[String]) -> Result<()> {
        let mut raw = writer;
        for line in preamble {
            writeln!(raw, "# {line}").map_err(|e| Error::io("<edge list>", e))?;
        }
        let mut wtr = csv::Writer::from_writer(raw);
        wtr.write_record(["source_label", "target_label", "weight"])?;
        for label in &self.labels {
            wtr.write_record([label.as_str(), "", ""])?;
        }
        for (u, v, w) in self.edges() {
            wtr.write_record([self.label(u), self.label(v), &fmt_sig(w, 6)])?;
        }
        wtr.flush().map_err(|e| Error::io("<edge list>", e))?;
        Ok(())
    }

    pub fn read_edge_list<R: Read>(reader: R, origin: &Path) -> Result<WeightedDigraph> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["source_label", "target_label", "weight"];
        if headers.iter().ne(expected.iter().copied()) {
            return Err(Error::Schema {
                path: origin.to_path_buf(),
                message: format!(
                    "expected header `{}`, found `{}`",
                    expected.join(","),
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut g = WeightedDigraph::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i as u64 + 2;
            let bad = |column: &str, message: String| Error::Record {
                path: origin.to_path_buf(),
                row,
                column: column.to_string(),
                message,
            };
            if rec.len() != 3 {
                return Err(bad("*", format!("expected 3 fields, found {}", rec.len())));
            }
            let src = &rec[0];
            if src.is_empty() {
                return Err(bad("source_label", "empty label".into()));
            }
            let u = g.add_node(src);
            if rec[1].is_empty() && rec[2].is_empty() {
                continue;
            }
            let v = g.add_node(&rec[1]);
            let w: f64 = rec[2]
                .parse()
                .map_err(|_| bad("weight", format!("cannot parse `{}`", &rec[2])))?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(bad("weight", format!("weight must be positive, got {w}")));
            }
            g.add_edge_accumulate(u, v, w)?;
        }
        Ok(g)
    }

    pub fn load_edge_list(path: &Path) -> Result<WeightedDigraph> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_edge_list(std::io::BufReader::new(file), path)
    }
}

fn accumulate(adj: &mut Vec<(NodeId, f64)>, target: NodeId, w: f64) {
    match adj.binary_search_by_key(&target, |&(t, _)| t) {
        Ok(i) => adj[i].1 += w,
        Err(i) => adj.insert(i, (target, w)),
    }
}
