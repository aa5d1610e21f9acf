//! Unpenalized binary logistic regression by Newton-Raphson, reporting Wald tests,
//! McFadden pseudo-R^2 and the likelihood-ratio test against the intercept-only model.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::special::{chi_square_sf, normal_sf};
use crate::error::{Error, Result};

/// Features without the intercept column; one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    k: usize,
    values: Vec<f64>,
    labels: Vec<u8>,
}

impl DesignMatrix {
    pub fn new(rows: &[Vec<f64>], labels: &[u8]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let k = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * k);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(Error::invalid(format!(
                    "row {i} has {} features, expected {k}",
                    r.len()
                )));
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::Data(format!("row {i} has a non-finite feature")));
            }
            values.extend_from_slice(r);
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::Data(format!("label {bad} is not binary")));
        }
        Ok(DesignMatrix {
            n: rows.len(),
            k,
            values,
            labels: labels.to_vec(),
        })
    }

    /// Intercept-only design.
    pub fn intercept_only(labels: &[u8]) -> Result<Self> {
        let rows = vec![Vec::new(); labels.len()];
        Self::new(&rows, labels)
    }

    pub fn num_rows(&self) -> usize {
        self.n
    }

    pub fn num_features(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    fn linear_predictor(&self, i: usize, beta: &[f64]) -> f64 {
        beta[0]
            + self
                .row(i)
                .iter()
                .zip(&beta[1..])
                .map(|(x, b)| x * b)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Convergence when the log-likelihood changes by less than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Added to the information diagonal only when it is singular. Zero disables.
    pub ridge: f64,
    /// Coefficient norm beyond which the fit is declared separated.
    pub separation_bound: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: 1e-10,
            max_iter: 100,
            ridge: 0.0,
            separation_bound: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Intercept first.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub log_lik: f64,
    pub null_log_lik: f64,
    pub pseudo_r2: f64,
    pub llr_stat: f64,
    pub llr_p: f64,
    pub df_model: usize,
    pub n_obs: usize,
    pub converged: bool,
    pub iterations: usize,
    pub ridge_applied: bool,
}

fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Bernoulli log-likelihood at `beta` (intercept first).
pub fn log_likelihood(data: &DesignMatrix, beta: &[f64]) -> f64 {
    (0..data.n)
        .map(|i| {
            let eta = data.linear_predictor(i, beta);
            data.labels[i] as f64 * eta - log1p_exp(eta)
        })
        .sum()
}

/// Gradient of [`log_likelihood`]: `X^T (y - p)` with the intercept column included.
pub fn score(data: &DesignMatrix, beta: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; data.k + 1];
    for i in 0..data.n {
        let r = data.labels[i] as f64 - sigmoid(data.linear_predictor(i, beta));
        g[0] += r;
        for (gj, x) in g[1..].iter_mut().zip(data.row(i)) {
            *gj += r * x;
        }
    }
    g
}

fn information(data: &DesignMatrix, beta: &[f64]) -> DMatrix<f64> {
    let m = data.k + 1;
    let mut h = DMatrix::<f64>::zeros(m, m);
    let mut x = vec![1.0; m];
    for i in 0..data.n {
        let p = sigmoid(data.linear_predictor(i, beta));
        let w = p * (1.0 - p);
        x[1..].copy_from_slice(data.row(i));
        for a in 0..m {
            let wa = w * x[a];
            for b in a..m {
                h[(a, b)] += wa * x[b];
            }
        }
    }
    h.fill_lower_triangle_with_upper_triangle();
    h
}

/// Inverse of the information matrix, regularizing with `ridge` only when singular.
fn invert_information(h: DMatrix<f64>, ridge: f64) -> Result<(DMatrix<f64>, bool)> {
    if let Some(ch) = h.clone().cholesky() {
        if ch
            .l()
            .diagonal()
            .iter()
            .all(|d| *d > 1e-12 * h.diagonal().amax().max(1.0).sqrt())
        {
            return Ok((ch.inverse(), false));
        }
    }
    if ridge > 0.0 {
        let m = h.nrows();
        let reg = h + DMatrix::identity(m, m) * ridge;
        if let Some(ch) = reg.cholesky() {
            return Ok((ch.inverse(), true));
        }
    }
    Err(Error::Numerical(
        "information matrix is singular (collinear or constant features)".into(),
    ))
}

/// Intercept-only log-likelihood, `n [ybar ln ybar + (1 - ybar) ln(1 - ybar)]`.
pub fn null_log_likelihood(labels: &[u8]) -> f64 {
    let n = labels.len() as f64;
    let ones = labels.iter().filter(|&&y| y == 1).count() as f64;
    let ybar = ones / n;
    let term = |p: f64, c: f64| if c == 0.0 { 0.0 } else { c * p.ln() };
    term(ybar, ones) + term(1.0 - ybar, n - ones)
}

pub fn fit_logistic(data: &DesignMatrix, opts: &FitOptions) -> Result<FitResult> {
    let n = data.n;
    let ones = data.labels.iter().filter(|&&y| y == 1).count();
    if ones == 0 || ones == n {
        return Err(Error::Data("labels contain a single class".into()));
    }
    if data.k + 1 > n {
        log::warn!("logistic fit with {} parameters on {n} rows", data.k + 1);
    }
    let m = data.k + 1;
    let ybar = ones as f64 / n as f64;
    let mut beta = vec![0.0; m];
    beta[0] = (ybar / (1.0 - ybar)).ln();
    let mut ll = log_likelihood(data, &beta);
    let mut converged = false;
    let mut iterations = 0;
    let mut ridge_applied = false;

    while iterations < opts.max_iter {
        iterations += 1;
        let g = DVector::from_vec(score(data, &beta));
        let (cov, reg) = invert_information(information(data, &beta), opts.ridge)?;
        ridge_applied |= reg;
        let step = cov * g;

        let mut scale = 1.0;
        let mut candidate: Vec<f64>;
        let mut ll_new;
        let mut halvings = 0;
        loop {
            candidate = beta
                .iter()
                .zip(step.iter())
                .map(|(b, s)| b + scale * s)
                .collect();
            ll_new = log_likelihood(data, &candidate);
            if ll_new >= ll - 1e-12 * ll.abs().max(1.0) || halvings >= 40 {
                break;
            }
            scale *= 0.5;
            halvings += 1;
        }
        let delta = ll_new - ll;
        beta = candidate;
        ll = ll_new;

        let norm = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > opts.separation_bound {
            return Err(Error::Separation(format!(
                "coefficient norm {norm:.3e} exceeds {} after {iterations} iterations",
                opts.separation_bound
            )));
        }
        if delta.abs() < opts.tol {
            converged = true;
            break;
        }
    }

    let max_resid = (0..n)
        .map(|i| (data.labels[i] as f64 - sigmoid(data.linear_predictor(i, &beta))).abs())
        .fold(0.0, f64::max);
    if max_resid < 1e-6 {
        return Err(Error::Separation(
            "fitted probabilities reproduce every label".into(),
        ));
    }

    let (cov, reg) = invert_information(information(data, &beta), opts.ridge)?;
    ridge_applied |= reg;
    let std_errors: Vec<f64> = (0..m).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
    let z_values: Vec<f64> = beta.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let p_values: Vec<f64> = z_values.iter().map(|z| 2.0 * normal_sf(z.abs())).collect();
    let null_ll = null_log_likelihood(&data.labels);
    let llr_stat = (2.0 * (ll - null_ll)).max(0.0);
    let llr_p = if data.k == 0 {
        1.0
    } else {
        chi_square_sf(llr_stat, data.k as u32)
    };
    Ok(FitResult {
        coefficients: beta,
        std_errors,
        z_values,
        p_values,
        log_lik: ll,
        null_log_lik: null_ll,
        pseudo_r2: (1.0 - ll / null_ll).max(0.0),
        llr_stat,
        llr_p,
        df_model: data.k,
        n_obs: n,
        converged,
        iterations,
        ridge_applied,
    })
}
