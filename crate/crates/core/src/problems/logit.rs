//! Regularized logistic regression with ambiguous features, modeled as the
//! inclusion `0 ∈ Fx + Tx` over `x = [w; v]`.
//!
//! Each sample carries `m` noisy feature copies; the dual block `v` weighs
//! the per-copy losses over the simplex, and the primal block `w` is
//! ℓ1-regularized.

use std::path::PathBuf;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linops::{ForwardMap, Point, Resolvent};
use crate::problems::libsvm::parse_libsvm;
use crate::prox::{l1_resolvent, make_block, simplex_resolvent};
use crate::rng::Stream;

/// Where the nominal features come from.
#[derive(Debug, Clone)]
pub enum LogitSource {
    /// A sparse-text dataset on disk.
    Libsvm(PathBuf),
    /// Bundled generator (stream 0 = features, 1 = separating weights,
    /// 2 = ambiguity noise) for desk-scale runs.
    Synthetic { samples: usize, features: usize },
}

#[derive(Debug, Clone)]
pub struct LogitAmbiguousSpec {
    pub source: LogitSource,
    /// Number of ambiguous copies per sample.
    pub copies: usize,
    /// Scale of the standard-normal feature noise.
    pub noise_scale: f64,
    /// ℓ1 regularization weight on the primal block.
    pub gamma: f64,
    pub seed: u64,
}

/// Prepared data: `features[i][j]` is the `j`-th noisy copy of sample `i`
/// with the bias coordinate appended, `labels[i] ∈ {0, 1}`.
#[derive(Debug, Clone)]
pub struct LogitData {
    pub features: Vec<Vec<Vec<f64>>>,
    pub labels: Vec<f64>,
    pub weight_dim: usize,
    pub copies: usize,
}

pub struct LogitProblem {
    pub forward: ForwardMap,
    pub resolvent: Resolvent,
    pub data: Arc<LogitData>,
    /// Total variable dimension `(d + 1) + m`.
    pub dim: usize,
}

/// Numerically stable `log(1 + exp(t))`.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Numerically stable `exp(t) / (1 + exp(t))`.
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Logistic loss `log(1 + exp(t)) - s t`.
fn loss(t: f64, s: f64) -> f64 {
    softplus(t) - s * t
}

fn normalize_rows(rows: &mut [Vec<f64>]) {
    for row in rows {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
    }
}

fn load_nominal(spec: &LogitAmbiguousSpec) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    match &spec.source {
        LogitSource::Libsvm(path) => parse_libsvm(path, None),
        LogitSource::Synthetic { samples, features } => {
            let mut feat_stream = Stream::new(spec.seed, 0);
            let mut rows: Vec<Vec<f64>> =
                (0..*samples).map(|_| feat_stream.normal_vec(*features)).collect();
            normalize_rows(&mut rows);
            let mut weight_stream = Stream::new(spec.seed, 1);
            let w_true = weight_stream.normal_vec(*features + 1);
            let labels = rows
                .iter()
                .map(|row| {
                    let score: f64 = row
                        .iter()
                        .zip(&w_true)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        + w_true[*features];
                    if score >= 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            // rows are already unit-norm here; the caller normalizes again
            // harmlessly for the libsvm path's benefit.
            Ok((rows, labels))
        }
    }
}

/// Builds the ambiguous-feature problem.
///
/// Nominal feature rows are normalized to unit norm first; each of the `m`
/// copies adds `noise_scale * N(0, 1)` to the normalized features, and the
/// bias coordinate (a constant 1, not noised) is appended last.
pub fn gen_logit_ambiguous(spec: &LogitAmbiguousSpec) -> Result<LogitProblem> {
    if spec.copies == 0 {
        return Err(Error::invalid("logit problem requires at least one copy"));
    }
    if spec.gamma < 0.0 || spec.noise_scale < 0.0 {
        return Err(Error::invalid("gamma and noise_scale must be nonnegative"));
    }
    let (mut rows, labels) = load_nominal(spec)?;
    if rows.is_empty() {
        return Err(Error::invalid("logit dataset is empty"));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::invalid("inconsistent feature dimensions"));
    }
    normalize_rows(&mut rows);

    let mut noise_stream = Stream::new(spec.seed, 2);
    let features: Vec<Vec<Vec<f64>>> = rows
        .iter()
        .map(|row| {
            (0..spec.copies)
                .map(|_| {
                    let mut copy: Vec<f64> = row
                        .iter()
                        .map(|v| v + spec.noise_scale * noise_stream.standard_normal())
                        .collect();
                    copy.push(1.0);
                    copy
                })
                .collect()
        })
        .collect();

    let data = Arc::new(LogitData {
        features,
        labels,
        weight_dim: d + 1,
        copies: spec.copies,
    });
    let dim = data.weight_dim + data.copies;
    let eval_data = Arc::clone(&data);
    let forward = ForwardMap::new(dim, move |x: &Point| eval_forward(&eval_data, x));
    let resolvent = make_block(vec![
        (0, l1_resolvent(data.weight_dim, spec.gamma)),
        (data.weight_dim, simplex_resolvent(data.copies)),
    ])?;
    Ok(LogitProblem {
        forward,
        resolvent,
        data,
        dim,
    })
}

fn eval_forward(data: &LogitData, x: &Point) -> Point {
    let (w, v) = x.as_slice().split_at(data.weight_dim);
    let n = data.labels.len() as f64;
    let mut grad_w = vec![0.0; data.weight_dim];
    let mut grad_v = vec![0.0; data.copies];
    for (copies, &label) in data.features.iter().zip(&data.labels) {
        for (j, feat) in copies.iter().enumerate() {
            let t: f64 = feat.iter().zip(w).map(|(a, b)| a * b).sum();
            let slope = v[j] * (sigmoid(t) - label);
            for (g, a) in grad_w.iter_mut().zip(feat) {
                *g += slope * a;
            }
            grad_v[j] -= loss(t, label);
        }
    }
    let mut out = grad_w;
    out.extend(grad_v);
    Point::new(out.into_iter().map(|g| g / n).collect())
}

/// The smooth saddle term `H(w, v) = (1/N) sum_i sum_j v_j loss(<X_ij, w>, y_i)`,
/// exposed for derivative cross-checks.
pub fn logit_hamiltonian(data: &LogitData, w: &[f64], v: &[f64]) -> f64 {
    let n = data.labels.len() as f64;
    let mut total = 0.0;
    for (copies, &label) in data.features.iter().zip(&data.labels) {
        for (j, feat) in copies.iter().enumerate() {
            let t: f64 = feat.iter().zip(w).map(|(a, b)| a * b).sum();
            total += v[j] * loss(t, label);
        }
    }
    total / n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_spec(n: usize, d: usize, m: usize, seed: u64) -> LogitAmbiguousSpec {
        LogitAmbiguousSpec {
            source: LogitSource::Synthetic {
                samples: n,
                features: d,
            },
            copies: m,
            noise_scale: 1.0,
            gamma: 5e-4,
            seed,
        }
    }

    #[test]
    fn zero_weights_give_known_blocks() {
        // One sample, one copy: at w = 0, v = e1 the w-block is
        // (0.5 - y) X_1 and the v-block is -log 2.
        let spec = synthetic_spec(1, 3, 1, 8);
        let prob = gen_logit_ambiguous(&spec).unwrap();
        let y = prob.data.labels[0];
        let mut x = vec![0.0; prob.dim];
        x[prob.data.weight_dim] = 1.0;
        let fx = prob.forward.eval_untracked(&Point::new(x));
        let feat = &prob.data.features[0][0];
        for i in 0..prob.data.weight_dim {
            assert!((fx[i] - (0.5 - y) * feat[i]).abs() <= 1e-14);
        }
        let v_block = fx[prob.data.weight_dim];
        assert!((v_block + (2.0_f64).ln()).abs() <= 1e-14);
    }

    #[test]
    fn v_on_simplex_makes_w_block_a_convex_combination() {
        let spec = synthetic_spec(4, 3, 2, 3);
        let prob = gen_logit_ambiguous(&spec).unwrap();
        let wd = prob.data.weight_dim;
        let w: Vec<f64> = (0..wd).map(|i| 0.1 * i as f64 - 0.2).collect();
        // Per-copy gradients at v = e_j.
        let mut per_copy = Vec::new();
        for j in 0..2 {
            let mut x = w.clone();
            x.extend(vec![0.0; 2]);
            x[wd + j] = 1.0;
            per_copy.push(prob.forward.eval_untracked(&Point::new(x)));
        }
        // Mixed v.
        let (a, b) = (0.3, 0.7);
        let mut x = w.clone();
        x.extend(vec![a, b]);
        let mixed = prob.forward.eval_untracked(&Point::new(x));
        for i in 0..wd {
            let want = a * per_copy[0][i] + b * per_copy[1][i];
            assert!((mixed[i] - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn copies_share_the_exact_bias_coordinate() {
        let spec = synthetic_spec(3, 4, 3, 1);
        let prob = gen_logit_ambiguous(&spec).unwrap();
        for copies in &prob.data.features {
            for feat in copies {
                assert_eq!(*feat.last().unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_logit_ambiguous(&synthetic_spec(5, 4, 2, 11)).unwrap();
        let b = gen_logit_ambiguous(&synthetic_spec(5, 4, 2, 11)).unwrap();
        assert_eq!(a.data.features, b.data.features);
        assert_eq!(a.data.labels, b.data.labels);
    }

    #[test]
    fn stable_loss_handles_large_arguments() {
        assert!(loss(800.0, 1.0).is_finite());
        assert!(loss(-800.0, 0.0).is_finite());
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
    }
}
