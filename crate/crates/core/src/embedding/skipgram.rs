//! Skip-gram with negative sampling over walk corpora.
//!
//! For a center node `c` and a context node `o` within `window` positions, SGD ascends
//! `log s(u_o . v_c) + sum_k log s(-u_n . v_c)` where `s` is the logistic function,
//! `v` are input vectors, `u` output vectors and the `n` are drawn from the corpus
//! frequency distribution raised to the 3/4 power.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::seed::{rng_for, STREAM_TRAIN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dimensions: usize,
    pub window: usize,
    pub negative_samples: usize,
    pub epochs: usize,
    pub lr_initial: f64,
    pub lr_final: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dimensions: 128,
            window: 10,
            negative_samples: 5,
            epochs: 5,
            lr_initial: 0.025,
            lr_final: 0.0001,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimensions == 0 || self.window == 0 || self.negative_samples == 0 {
            return Err(Error::invalid(
                "dimensions, window and negative_samples must be positive",
            ));
        }
        if !(self.lr_initial > 0.0 && self.lr_final > 0.0 && self.lr_final <= self.lr_initial) {
            return Err(Error::invalid(format!(
                "learning rates must satisfy 0 < lr_final <= lr_initial, got {} -> {}",
                self.lr_initial, self.lr_final
            )));
        }
        Ok(())
    }
}

/// Trained input and output vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramModel {
    pub input: EmbeddingMatrix,
    pub output: EmbeddingMatrix,
}

impl SkipGramModel {
    pub fn into_embeddings(self) -> EmbeddingMatrix {
        self.input
    }
}

/// Cumulative unigram^0.75 table for drawing negatives.
struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(walks: &[Vec<NodeId>], num_nodes: usize) -> Self {
        let mut counts = vec![0u64; num_nodes];
        for w in walks {
            for &x in w {
                counts[x] += 1;
            }
        }
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseTable { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> NodeId {
        let total = *self.cumulative.last().unwrap();
        let r = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= r)
            .min(self.cumulative.len() - 1)
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_corpus(walks: &[Vec<NodeId>], num_nodes: usize) -> Result<()> {
    if !walks.iter().any(|w| w.len() >= 2) {
        return Err(Error::invalid(
            "walk corpus has no walk of length 2 or more",
        ));
    }
    if let Some(&bad) = walks.iter().flatten().find(|&&x| x >= num_nodes) {
        return Err(Error::NodeOutOfRange {
            node: bad,
            num_nodes,
        });
    }
    Ok(())
}

fn initial_model(num_nodes: usize, d: usize, rng: &mut ChaCha8Rng) -> SkipGramModel {
    let scale = 0.5 / d as f64;
    let input: Vec<f64> = (0..num_nodes * d)
        .map(|_| rng.gen_range(-scale..scale))
        .collect();
    SkipGramModel {
        input: EmbeddingMatrix::from_vec(num_nodes, d, input),
        output: EmbeddingMatrix::zeros(num_nodes, d),
    }
}

/// Trains input/output vectors for `num_nodes` nodes. With `epochs == 0` the
/// untrained initialization is returned. Single-threaded and fully determined by
/// `cfg.seed` and the corpus.
pub fn train_skipgram_model(
    walks: &[Vec<NodeId>],
    num_nodes: usize,
    cfg: &TrainConfig,
) -> Result<SkipGramModel> {
    cfg.validate()?;
    check_corpus(walks, num_nodes)?;
    let d = cfg.dimensions;
    let mut rng = rng_for(cfg.seed, &[STREAM_TRAIN]);
    let mut model = initial_model(num_nodes, d, &mut rng);
    let noise = NoiseTable::new(walks, num_nodes);

    let tokens: usize = walks.iter().map(Vec::len).sum();
    let total_steps = (cfg.epochs * tokens).max(1) as f64;
    let mut step = 0usize;
    let mut grad = vec![0.0; d];
    let mut center_vec = vec![0.0; d];

    for _ in 0..cfg.epochs {
        for walk in walks {
            for (pos, &center) in walk.iter().enumerate() {
                let progress = step as f64 / total_steps;
                let lr = cfg.lr_initial - (cfg.lr_initial - cfg.lr_final) * progress;
                step += 1;
                let lo = pos.saturating_sub(cfg.window);
                let hi = (pos + cfg.window + 1).min(walk.len());
                for (cpos, &context) in walk.iter().enumerate().take(hi).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    center_vec.copy_from_slice(model.input.row(center));
                    for k in 0..=cfg.negative_samples {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let n = noise.sample(&mut rng);
                            if n == context {
                                continue;
                            }
                            (n, 0.0)
                        };
                        let out = model.output.row_mut(target);
                        let g = (label - sigmoid(dot(&center_vec, out))) * lr;
                        for i in 0..d {
                            grad[i] += g * out[i];
                            out[i] += g * center_vec[i];
                        }
                    }
                    let inp = model.input.row_mut(center);
                    for i in 0..d {
                        inp[i] += grad[i];
                    }
                }
            }
        }
    }
    Ok(model)
}

/// Input vectors after training; see [`train_skipgram_model`].
pub fn train_skipgram(
    walks: &[Vec<NodeId>],
    num_nodes: usize,
    cfg: &TrainConfig,
) -> Result<EmbeddingMatrix> {
    train_skipgram_model(walks, num_nodes, cfg).map(SkipGramModel::into_embeddings)
}

/// Untrained initialization for the same config, for before/after comparisons.
pub fn initial_skipgram_model(num_nodes: usize, cfg: &TrainConfig) -> Result<SkipGramModel> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.seed, &[STREAM_TRAIN]);
    Ok(initial_model(num_nodes, cfg.dimensions, &mut rng))
}

/// Mean negative-sampling objective per (center, context) pair, with negatives drawn
/// from a stream keyed by `eval_seed` so two models can be scored on identical samples.
pub fn corpus_objective(
    model: &SkipGramModel,
    walks: &[Vec<NodeId>],
    cfg: &TrainConfig,
    eval_seed: u64,
) -> Result<f64> {
    let num_nodes = model.input.num_rows();
    check_corpus(walks, num_nodes)?;
    let noise = NoiseTable::new(walks, num_nodes);
    let mut rng = rng_for(eval_seed, &[STREAM_TRAIN, 1]);
    let (mut total, mut pairs) = (0.0, 0usize);
    for walk in walks {
        for (pos, &center) in walk.iter().enumerate() {
            let lo = pos.saturating_sub(cfg.window);
            let hi = (pos + cfg.window + 1).min(walk.len());
            let v = model.input.row(center);
            for (cpos, &context) in walk.iter().enumerate().take(hi).skip(lo) {
                if cpos == pos {
                    continue;
                }
                total += log_sigmoid(dot(v, model.output.row(context)));
                for _ in 0..cfg.negative_samples {
                    let n = noise.sample(&mut rng);
                    total += log_sigmoid(-dot(v, model.output.row(n)));
                }
                pairs += 1;
            }
        }
    }
    Ok(total / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(d: usize) -> TrainConfig {
        TrainConfig {
            dimensions: d,
            window: 2,
            negative_samples: 3,
            epochs: 2,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let walks = vec![vec![0, 1, 2], vec![2, 1, 0]];
        let c = TrainConfig {
            epochs: 0,
            ..cfg(4)
        };
        let trained = train_skipgram_model(&walks, 3, &c).unwrap();
        let init = initial_skipgram_model(3, &c).unwrap();
        assert_eq!(trained, init);
        let bound = 0.5 / 4.0;
        assert!(init.input.as_slice().iter().all(|x| x.abs() <= bound));
        assert!(init.output.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn deterministic() {
        let walks = vec![vec![0, 1, 2, 3, 0, 1], vec![3, 2, 1, 0], vec![1, 3]];
        let a = train_skipgram(&walks, 4, &cfg(6)).unwrap();
        let b = train_skipgram(&walks, 4, &cfg(6)).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        let c = train_skipgram(&walks, 4, &TrainConfig { seed: 12, ..cfg(6) }).unwrap();
        assert_ne!(a.as_slice(), c.as_slice());
    }

    #[test]
    fn rejects_empty_or_trivial_corpus() {
        assert!(train_skipgram(&[], 3, &cfg(4)).is_err());
        assert!(train_skipgram(&[vec![0], vec![1]], 3, &cfg(4)).is_err());
        assert!(train_skipgram(&[vec![0, 5]], 3, &cfg(4)).is_err());
        let bad = TrainConfig {
            lr_final: 1.0,
            ..cfg(4)
        };
        assert!(train_skipgram(&[vec![0, 1]], 3, &bad).is_err());
    }

    #[test]
    fn objective_improves_and_init_value() {
        let walks: Vec<Vec<NodeId>> = (0..30)
            .map(|i| vec![i % 3, (i + 1) % 3, 3 + i % 2, 3 + (i + 1) % 2])
            .collect();
        let c = TrainConfig {
            epochs: 5,
            ..cfg(8)
        };
        let init = initial_skipgram_model(5, &c).unwrap();
        let before = corpus_objective(&init, &walks, &c, 1).unwrap();
        // zero output vectors make every term log(1/2)
        let expect = (1 + c.negative_samples) as f64 * 0.5f64.ln();
        assert!((before - expect).abs() < 1e-12);
        let trained = train_skipgram_model(&walks, 5, &c).unwrap();
        let after = corpus_objective(&trained, &walks, &c, 1).unwrap();
        assert!(after > before, "{after} <= {before}");
    }

    #[test]
    fn log_sigmoid_stable() {
        assert!((log_sigmoid(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!(log_sigmoid(800.0) == 0.0);
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
    }
}
