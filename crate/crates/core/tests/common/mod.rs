//! Reference implementations used as oracles. Written for clarity, not speed, and
//! sharing no code with the library.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashSet;

use hoopsnet::WeightedDigraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_digraph(seed: u64, max_nodes: usize) -> WeightedDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_nodes);
    let p = rng.gen_range(0.1..=0.5);
    let mut g = WeightedDigraph::with_labels((0..n).map(|i| format!("v{i:02}")));
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen::<f64>() < p {
                let w = rng.gen_range(1..=20) as f64;
                g.add_edge_accumulate(u, v, w).unwrap();
            }
        }
    }
    g
}

/// `sum_v |N+(u) & N+(v)|` by explicit set intersection.
pub fn brute_con(g: &WeightedDigraph, include_self: bool) -> Vec<u64> {
    let n = g.num_nodes();
    let sets: Vec<HashSet<usize>> = (0..n)
        .map(|u| g.out_neighbors(u).iter().map(|&(v, _)| v).collect())
        .collect();
    (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| include_self || v != u)
                .map(|v| sets[u].intersection(&sets[v]).count() as u64)
                .sum()
        })
        .collect()
}

/// Dense power iteration on the reversed graph: node `u` passes its score to the
/// nodes that beat it, in proportion to the margin. Dangling mass is spread evenly.
pub fn dense_reversed_pagerank(g: &WeightedDigraph, damping: f64) -> Vec<f64> {
    let n = g.num_nodes();
    let mut m = vec![vec![0.0; n]; n];
    let mut out = vec![0.0; n];
    for u in 0..n {
        for v in 0..n {
            // reversed edge u -> v exists when v -> u in the original
            if let Some(w) = g.weight(v, u) {
                m[u][v] = w;
                out[u] += w;
            }
        }
    }
    let mut r = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let dangling: f64 = (0..n).filter(|&u| out[u] == 0.0).map(|u| r[u]).sum();
        let mut next = vec![(1.0 - damping) / n as f64 + damping * dangling / n as f64; n];
        for u in 0..n {
            if out[u] > 0.0 {
                for v in 0..n {
                    next[v] += damping * r[u] * m[u][v] / out[u];
                }
            }
        }
        let diff: f64 = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum();
        r = next;
        if diff < 1e-15 {
            break;
        }
    }
    r
}

/// Neumaier compensated sum.
pub fn ksum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in values {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// Solves `a x = b` by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        assert!(d.abs() > 1e-300, "singular system");
        for k in 0..n {
            a[col][k] /= d;
        }
        b[col] /= d;
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for k in 0..n {
                        a[i][k] -= f * a[col][k];
                    }
                    b[i] -= f * b[col];
                }
            }
        }
    }
    b
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log s(t)` for the logistic function `s`.
fn log_logistic(t: f64) -> f64 {
    if t >= 0.0 {
        -(-t).exp().ln_1p()
    } else {
        t - t.exp().ln_1p()
    }
}

pub fn oracle_log_lik(x: &[Vec<f64>], y: &[u8], beta: &[f64]) -> f64 {
    ksum(x.iter().zip(y).map(|(row, &yi)| {
        let eta =
            ksum(std::iter::once(beta[0]).chain(row.iter().zip(&beta[1..]).map(|(a, b)| a * b)));
        if yi == 1 {
            log_logistic(eta)
        } else {
            log_logistic(-eta)
        }
    }))
}

/// Maximum-likelihood logistic coefficients (intercept first) and standard errors by
/// damped Newton iteration with compensated sums, run until the step vanishes.
pub fn oracle_logistic(x: &[Vec<f64>], y: &[u8]) -> (Vec<f64>, Vec<f64>) {
    let m = x[0].len() + 1;
    let design: Vec<Vec<f64>> = x
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
        .collect();
    let mut beta = vec![0.0; m];
    let info_at = |beta: &[f64]| {
        let p: Vec<f64> = design
            .iter()
            .map(|r| logistic(ksum(r.iter().zip(beta).map(|(a, b)| a * b))))
            .collect();
        let grad: Vec<f64> = (0..m)
            .map(|j| {
                ksum(
                    design
                        .iter()
                        .zip(&p)
                        .zip(y)
                        .map(|((r, pi), &yi)| r[j] * (yi as f64 - pi)),
                )
            })
            .collect();
        let info: Vec<Vec<f64>> = (0..m)
            .map(|j| {
                (0..m)
                    .map(|k| {
                        ksum(
                            design
                                .iter()
                                .zip(&p)
                                .map(|(r, pi)| r[j] * r[k] * pi * (1.0 - pi)),
                        )
                    })
                    .collect()
            })
            .collect();
        (grad, info)
    };
    for _ in 0..500 {
        let (grad, info) = info_at(&beta);
        let step = gauss_jordan(info, grad);
        let ll0 = oracle_log_lik(x, y, &beta);
        let mut t = 1.0;
        let mut next: Vec<f64>;
        loop {
            next = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            if oracle_log_lik(x, y, &next) >= ll0 - 1e-12 || t < 1e-10 {
                break;
            }
            t *= 0.5;
        }
        let size = step.iter().map(|s| s.abs()).fold(0.0, f64::max) * t;
        beta = next;
        if size < 1e-14 {
            break;
        }
    }
    let (_, info) = info_at(&beta);
    let se = (0..m)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            gauss_jordan(info.clone(), e)[j].sqrt()
        })
        .collect();
    (beta, se)
}

/// Upper 1% points of the chi-square distribution, df 1..=4.
pub const CHI2_CRIT_01: [f64; 4] = [6.634_897, 9.210_340, 11.344_867, 13.276_704];
