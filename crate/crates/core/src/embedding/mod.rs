//! node2vec: biased walks plus skip-gram training, and the vector utilities used by
//! the link-prediction experiments.

pub mod skipgram;
pub mod walk;

pub use skipgram::{
    corpus_objective, initial_skipgram_model, train_skipgram, train_skipgram_model, SkipGramModel,
    TrainConfig,
};
pub use walk::{generate_walks, search_bias, transition_distribution, DeadEnd, WalkConfig};

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};

/// Row-major `num_rows x dims` matrix of node vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dims: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(rows: usize, dims: usize) -> Self {
        EmbeddingMatrix {
            rows,
            dims,
            data: vec![0.0; rows * dims],
        }
    }

    pub fn from_vec(rows: usize, dims: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * dims, "embedding data has wrong length");
        EmbeddingMatrix { rows, dims, data }
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, node: NodeId) -> &[f64] {
        &self.data[node * self.dims..(node + 1) * self.dims]
    }

    pub fn row_mut(&mut self, node: NodeId) -> &mut [f64] {
        &mut self.data[node * self.dims..(node + 1) * self.dims]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `label,e0,...,e{d-1}` rows with `#` metadata lines first. Values use the shortest
    /// representation that round-trips.
    pub fn csv_bytes(&self, labels: &[String], comments: &[String]) -> Result<Vec<u8>> {
        let mut header = vec!["label".to_string()];
        header.extend((0..self.dims).map(|i| format!("e{i}")));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|u| {
                std::iter::once(labels[u].clone())
                    .chain(self.row(u).iter().map(|x| x.to_string()))
                    .collect()
            })
            .collect();
        crate::report::csv_bytes(comments, &header_refs, &rows)
    }
}

/// Walks then training, as one node2vec run.
pub fn node2vec(
    g: &WeightedDigraph,
    walk_cfg: &WalkConfig,
    train_cfg: &TrainConfig,
) -> Result<EmbeddingMatrix> {
    let walks = generate_walks(g, walk_cfg)?;
    train_skipgram(&walks, g.num_nodes(), train_cfg)
}

/// `a.b / (|a| |b|)`, or 0 when either vector is zero.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return Ok(0.0);
    }
    Ok((ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0))
}

/// Source entries followed by target entries.
pub fn concat_features(src: &[f64], tgt: &[f64]) -> Result<Vec<f64>> {
    if src.len() != tgt.len() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            src.len(),
            tgt.len()
        )));
    }
    Ok(src.iter().chain(tgt).copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_cases() {
        assert!((cosine_similarity(&[1.0, 2.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 3.0]).unwrap(), 0.0);
        assert!((cosine_similarity(&[1.0, 0.0], &[-2.0, 0.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(cosine_similarity(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn concat_cases() {
        assert_eq!(
            concat_features(&[1.0, 2.0], &[3.0, 4.0]).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0]
        );
        assert_ne!(
            concat_features(&[1.0, 2.0], &[3.0, 4.0]).unwrap(),
            concat_features(&[3.0, 4.0], &[1.0, 2.0]).unwrap()
        );
        assert_eq!(concat_features(&[0.0; 3], &[0.0; 3]).unwrap(), vec![0.0; 6]);
        assert!(concat_features(&[1.0], &[]).is_err());
    }

    #[test]
    fn csv_dump_layout() {
        let m = EmbeddingMatrix::from_vec(2, 2, vec![0.5, -1.0, 0.25, 2.0]);
        let bytes = m
            .csv_bytes(&["a".into(), "b".into()], &["d=2".into()])
            .unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "# d=2\nlabel,e0,e1\na,0.5,-1\nb,0.25,2\n"
        );
    }
}
