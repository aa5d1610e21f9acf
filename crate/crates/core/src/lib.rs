//! Network analytics for basketball interaction data: adversarial and passing graphs,
//! CON/PageRank centrality and low-key leader scores, node2vec embeddings, logistic
//! link-prediction experiments and a seeded synthetic generator.

pub mod centrality;
pub mod cli;
pub mod embedding;
pub mod error;
pub mod glm;
pub mod graph;
pub mod ingest;
pub mod linkpred;
pub mod ranking;
pub mod report;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{NodeId, WeightedDigraph};
