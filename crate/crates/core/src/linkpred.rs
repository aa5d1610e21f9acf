//! Link-prediction experiments: fixed candidate pair sets with observed future labels,
//! features recomputed from fresh node2vec embeddings on every iteration, and a
//! logistic fit per iteration aggregated across iterations.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{
    self, concat_features, cosine_similarity, EmbeddingMatrix, TrainConfig, WalkConfig,
};
use crate::error::{Error, Result};
use crate::glm::{fit_logistic, DesignMatrix, FitOptions, FitResult};
use crate::graph::{NodeId, WeightedDigraph};
use crate::ingest::BlockRecord;
use crate::seed::{
    derive_seed, rng_for, STREAM_ITERATION, STREAM_SHUFFLE, STREAM_TRAIN, STREAM_WALKS,
};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    /// One feature: cosine similarity of the two endpoint embeddings.
    Cosine,
    /// `2d` features: source embedding then target embedding.
    Concat,
}

/// Candidate pairs with their observed outcome. Features are attached per embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePairs {
    pub pairs: Vec<(NodeId, NodeId)>,
    pub labels: Vec<u8>,
    pub ordered: bool,
    pub mode: FeatureMode,
    /// Name of the pair count in reports (`team_pairs`, `player_pairs`, ...).
    pub pair_kind: String,
    /// Inputs that could not be placed on the graph.
    pub dropped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPairSet {
    pub pairs: Vec<(NodeId, NodeId)>,
    pub ordered: bool,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl LabeledPairSet {
    pub fn num_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    pub fn design(&self) -> Result<DesignMatrix> {
        DesignMatrix::new(&self.features, &self.labels)
    }
}

impl CandidatePairs {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    pub fn num_features(&self, dims: usize) -> usize {
        match self.mode {
            FeatureMode::Cosine => 1,
            FeatureMode::Concat => 2 * dims,
        }
    }

    pub fn featurize(&self, emb: &EmbeddingMatrix) -> Result<LabeledPairSet> {
        let features = self
            .pairs
            .iter()
            .map(|&(u, v)| match self.mode {
                FeatureMode::Cosine => cosine_similarity(emb.row(u), emb.row(v)).map(|s| vec![s]),
                FeatureMode::Concat => concat_features(emb.row(u), emb.row(v)),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LabeledPairSet {
            pairs: self.pairs.clone(),
            ordered: self.ordered,
            features,
            labels: self.labels.clone(),
        })
    }

    /// Same pairs with labels permuted; a null control.
    pub fn shuffled_labels(&self, seed: u64) -> CandidatePairs {
        let mut labels = self.labels.clone();
        labels.shuffle(&mut rng_for(seed, &[STREAM_SHUFFLE]));
        CandidatePairs {
            labels,
            ..self.clone()
        }
    }
}

fn sort_by_labels(g: &WeightedDigraph, pairs: &mut [(NodeId, NodeId, u8)]) {
    pairs.sort_by(|a, b| (g.label(a.0), g.label(a.1)).cmp(&(g.label(b.0), g.label(b.1))));
}

fn unzip(pairs: Vec<(NodeId, NodeId, u8)>) -> (Vec<(NodeId, NodeId)>, Vec<u8>) {
    pairs.into_iter().map(|(u, v, y)| ((u, v), y)).unzip()
}

/// Every unordered pair of tournament participants present in `graph`, labelled by
/// whether the two met. Teams missing from the graph are dropped and listed.
pub fn matchup_candidates(
    graph: &WeightedDigraph,
    matchups: &[(String, String)],
) -> Result<CandidatePairs> {
    if matchups.is_empty() {
        return Err(Error::Data("tournament matchup list is empty".into()));
    }
    let teams: BTreeSet<&str> = matchups
        .iter()
        .flat_map(|(a, b)| [a.as_str(), b.as_str()])
        .collect();
    let mut dropped = Vec::new();
    let mut present: Vec<NodeId> = Vec::new();
    for t in &teams {
        match graph.node_id(t) {
            Some(id) => present.push(id),
            None => {
                log::warn!("tournament team `{t}` has no regular-season node; dropped");
                dropped.push(t.to_string());
            }
        }
    }
    let met: BTreeSet<(NodeId, NodeId)> = matchups
        .iter()
        .filter_map(|(a, b)| {
            let (u, v) = (graph.node_id(a)?, graph.node_id(b)?);
            Some((u.min(v), u.max(v)))
        })
        .collect();
    let mut pairs = Vec::new();
    for (i, &u) in present.iter().enumerate() {
        for &v in &present[i + 1..] {
            let (a, b) = if graph.label(u) <= graph.label(v) {
                (u, v)
            } else {
                (v, u)
            };
            let y = u8::from(met.contains(&(u.min(v), u.max(v))));
            pairs.push((a, b, y));
        }
    }
    sort_by_labels(graph, &mut pairs);
    let (pairs, labels) = unzip(pairs);
    Ok(CandidatePairs {
        pairs,
        labels,
        ordered: false,
        mode: FeatureMode::Cosine,
        pair_kind: "team_pairs".into(),
        dropped,
    })
}

pub fn build_matchup_dataset(
    graph: &WeightedDigraph,
    emb: &EmbeddingMatrix,
    matchups: &[(String, String)],
) -> Result<LabeledPairSet> {
    matchup_candidates(graph, matchups)?.featurize(emb)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlockingFilters {
    /// Keep only players who also appear in the next season's block records.
    pub require_next_season: bool,
}

/// Ordered pairs of distinct players embedded from the prior season, labelled 1 when
/// the first blocked the second at least once in `next_season`.
pub fn blocking_candidates(
    prev_graph: &WeightedDigraph,
    blocks_next: &[BlockRecord],
    next_season: i32,
    filters: BlockingFilters,
) -> CandidatePairs {
    let next: Vec<&BlockRecord> = blocks_next
        .iter()
        .filter(|b| b.season == next_season)
        .collect();
    let observed: BTreeSet<(&str, &str)> = next
        .iter()
        .map(|b| (b.blocker.as_str(), b.blocked.as_str()))
        .collect();
    let active: BTreeSet<&str> = next
        .iter()
        .flat_map(|b| [b.blocker.as_str(), b.blocked.as_str()])
        .collect();
    let players: Vec<NodeId> = (0..prev_graph.num_nodes())
        .filter(|&u| !filters.require_next_season || active.contains(prev_graph.label(u)))
        .collect();
    let mut pairs = Vec::with_capacity(players.len() * players.len().saturating_sub(1));
    for &u in &players {
        for &v in &players {
            if u != v {
                let y = observed.contains(&(prev_graph.label(u), prev_graph.label(v)));
                pairs.push((u, v, u8::from(y)));
            }
        }
    }
    sort_by_labels(prev_graph, &mut pairs);
    let (pairs, labels) = unzip(pairs);
    CandidatePairs {
        pairs,
        labels,
        ordered: true,
        mode: FeatureMode::Concat,
        pair_kind: "player_pairs".into(),
        dropped: Vec::new(),
    }
}

pub fn build_blocking_dataset(
    prev_graph: &WeightedDigraph,
    emb: &EmbeddingMatrix,
    blocks_next: &[BlockRecord],
    next_season: i32,
    filters: BlockingFilters,
) -> Result<LabeledPairSet> {
    blocking_candidates(prev_graph, blocks_next, next_season, filters).featurize(emb)
}

/// All ordered pairs of distinct regions, labelled by whether the later-quarter graph
/// has the edge. Both graphs must share the same node set.
pub fn passing_candidates(
    early: &WeightedDigraph,
    later: &WeightedDigraph,
    exclude_early_edges: bool,
) -> Result<CandidatePairs> {
    if early.labels() != later.labels() {
        return Err(Error::invalid("passing graphs must share the same regions"));
    }
    let n = early.num_nodes();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1));
    for u in 0..n {
        for v in 0..n {
            if u == v || (exclude_early_edges && early.has_edge(u, v)) {
                continue;
            }
            pairs.push((u, v, u8::from(later.has_edge(u, v))));
        }
    }
    sort_by_labels(early, &mut pairs);
    let (pairs, labels) = unzip(pairs);
    Ok(CandidatePairs {
        pairs,
        labels,
        ordered: true,
        mode: FeatureMode::Cosine,
        pair_kind: "region_pairs".into(),
        dropped: Vec::new(),
    })
}

pub fn build_passing_dataset(
    early: &WeightedDigraph,
    emb: &EmbeddingMatrix,
    later: &WeightedDigraph,
) -> Result<LabeledPairSet> {
    passing_candidates(early, later, false)?.featurize(emb)
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationOutcome {
    pub index: usize,
    pub walk_seed: u64,
    pub train_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentAggregate {
    pub iterations: usize,
    pub succeeded: usize,
    pub excluded: usize,
    pub mean_pseudo_r2: f64,
    pub median_pseudo_r2: f64,
    pub mean_llr_p: f64,
    pub median_llr_p: f64,
    /// Intercept first.
    pub mean_coefficients: Vec<f64>,
    /// One entry per feature (intercept excluded).
    pub median_p_values: Vec<f64>,
    pub mean_p_values: Vec<f64>,
    /// Features whose median p-value is below 0.05.
    pub significant_dimensions: usize,
}

/// Headline statistics under their table names.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableSummary {
    #[serde(flatten)]
    pub pair_count: BTreeMap<String, usize>,
    pub embedding_features: usize,
    pub pseudo_r2: f64,
    pub llr_p: f64,
    pub significant_dimensions: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub pairs: usize,
    pub positives: usize,
    pub embedding_features: usize,
    pub aggregate: ExperimentAggregate,
    pub table: TableSummary,
    pub per_iteration: Vec<IterationOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub walk: WalkConfig,
    pub train: TrainConfig,
    pub iterations: usize,
    pub base_seed: u64,
    pub fit: FitOptions,
}

impl ExperimentConfig {
    /// Ridge is only used for singular information matrices (e.g. an all-zero
    /// similarity column from degenerate embeddings).
    pub fn default_fit() -> FitOptions {
        FitOptions {
            ridge: 1e-8,
            ..FitOptions::default()
        }
    }
}

/// Seeds for iteration `i`: `(walk_seed, train_seed)`.
pub fn iteration_seeds(base_seed: u64, i: usize) -> (u64, u64) {
    (
        derive_seed(base_seed, &[STREAM_ITERATION, i as u64, STREAM_WALKS]),
        derive_seed(base_seed, &[STREAM_ITERATION, i as u64, STREAM_TRAIN]),
    )
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn aggregate(fits: &[&FitResult], iterations: usize) -> ExperimentAggregate {
    let col = |f: &dyn Fn(&FitResult) -> f64| fits.iter().map(|r| f(r)).collect::<Vec<f64>>();
    let r2 = col(&|r| r.pseudo_r2);
    let llr = col(&|r| r.llr_p);
    let m = fits[0].coefficients.len();
    let mean_coefficients = (0..m).map(|j| mean(&col(&|r| r.coefficients[j]))).collect();
    let mut median_p_values = Vec::with_capacity(m - 1);
    let mut mean_p_values = Vec::with_capacity(m - 1);
    for j in 1..m {
        let mut p = col(&|r| r.p_values[j]);
        mean_p_values.push(mean(&p));
        median_p_values.push(median(&mut p));
    }
    let significant_dimensions = median_p_values
        .iter()
        .filter(|&&p| p < SIGNIFICANCE_LEVEL)
        .count();
    ExperimentAggregate {
        iterations,
        succeeded: fits.len(),
        excluded: iterations - fits.len(),
        mean_pseudo_r2: mean(&r2),
        median_pseudo_r2: median(&mut r2.clone()),
        mean_llr_p: mean(&llr),
        median_llr_p: median(&mut llr.clone()),
        mean_coefficients,
        median_p_values,
        mean_p_values,
        significant_dimensions,
    }
}

/// Re-embeds `graph` once per iteration with seeds derived from `(base_seed, i)`, fits
/// the candidate outcomes on the resulting features and aggregates. Failed fits are
/// excluded; more than half failing is an error. Iterations run in parallel and the
/// result does not depend on the thread count.
pub fn run_experiment(
    graph: &WeightedDigraph,
    candidates: &CandidatePairs,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if cfg.iterations == 0 {
        return Err(Error::invalid("need at least one iteration"));
    }
    if candidates.is_empty() {
        return Err(Error::Data("candidate pair set is empty".into()));
    }
    cfg.walk.validate()?;
    cfg.train.validate()?;
    let per_iteration: Vec<IterationOutcome> = (0..cfg.iterations)
        .into_par_iter()
        .map(|i| {
            let (walk_seed, train_seed) = iteration_seeds(cfg.base_seed, i);
            let walk = WalkConfig {
                seed: walk_seed,
                ..cfg.walk
            };
            let train = TrainConfig {
                seed: train_seed,
                ..cfg.train
            };
            let outcome = embedding::node2vec(graph, &walk, &train)
                .and_then(|emb| candidates.featurize(&emb))
                .and_then(|set| fit_logistic(&set.design()?, &cfg.fit));
            let (fit, error) = match outcome {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            IterationOutcome {
                index: i,
                walk_seed,
                train_seed,
                fit,
                error,
            }
        })
        .collect();

    let fits: Vec<&FitResult> = per_iteration
        .iter()
        .filter_map(|o| o.fit.as_ref())
        .collect();
    let failed = cfg.iterations - fits.len();
    if fits.is_empty() || 2 * failed > cfg.iterations {
        if let Some(e) = per_iteration.iter().find_map(|o| o.error.as_ref()) {
            log::error!("first failed iteration: {e}");
        }
        return Err(Error::ExperimentFailed {
            failed,
            total: cfg.iterations,
        });
    }
    let aggregate = aggregate(&fits, cfg.iterations);
    let embedding_features = candidates.num_features(cfg.train.dimensions);
    let table = TableSummary {
        pair_count: BTreeMap::from([(candidates.pair_kind.clone(), candidates.len())]),
        embedding_features,
        pseudo_r2: aggregate.mean_pseudo_r2,
        llr_p: aggregate.mean_llr_p,
        significant_dimensions: aggregate.significant_dimensions,
    };
    Ok(ExperimentReport {
        pairs: candidates.len(),
        positives: candidates.positives(),
        embedding_features,
        aggregate,
        table,
        per_iteration,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityRow {
    pub label: String,
    pub similarity: f64,
}

/// Cosine similarity from `focus` to every other node, highest first (ties by node id).
pub fn node_similarity_report(
    emb: &EmbeddingMatrix,
    labels: &[String],
    focus: NodeId,
    include_focus: bool,
) -> Result<Vec<SimilarityRow>> {
    if focus >= emb.num_rows() {
        return Err(Error::NodeOutOfRange {
            node: focus,
            num_nodes: emb.num_rows(),
        });
    }
    let mut rows: Vec<(NodeId, f64)> = (0..emb.num_rows())
        .filter(|&v| include_focus || v != focus)
        .map(|v| cosine_similarity(emb.row(focus), emb.row(v)).map(|s| (v, s)))
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(rows
        .into_iter()
        .map(|(v, s)| SimilarityRow {
            label: labels[v].clone(),
            similarity: s,
        })
        .collect())
}
