//! Training of the head parameters (`d` and the query projection) with a
//! sampled-negative softmax cross-entropy loss and analytic gradients.
//!
//! The encoder is frozen, so every instance batch is encoded once up front
//! and training only touches the head. Both aggregations are linear in the
//! projection `P`:
//!
//! ```text
//! coarse: q = P Σ α_i c_i          (c_i = hidden [CLS] of row i)
//! fine:   q = P Σ α_i ū_i          (ū_i = mean hidden state over q_k tokens)
//! α = softmax(d · P c_i)
//! ```
//!
//! which is what [`grad_head`] differentiates.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::batching::{build_instance_batch, BatchConfig, SequenceLayout};
use crate::corpus::{Dialog, Vocabulary};
use crate::encoder::{EncoderWeights, RawTurnEncoding};
use crate::error::{HarError, Result};
use crate::eval::recall_at_k;
use crate::har::{attention_weights, compose_from_raw, softmax, AttentionHead, AttentionMode, Granularity};
use crate::index::{search, VectorStore};
use crate::linalg::{axpy, dot, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub n_neg: usize,
    pub seed: u64,
    pub eval_every: usize,
    pub max_steps: Option<usize>,
    /// Cutoff of the dev recall used to pick the best checkpoint.
    pub select_recall_k: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 5e-5,
            epochs: 3,
            n_neg: 8,
            seed: 7,
            eval_every: 100,
            max_steps: None,
            select_recall_k: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(HarError::InvalidConfig("learning_rate must be finite and >= 0".into()));
        }
        if self.n_neg == 0 {
            return Err(HarError::InvalidConfig("n_neg must be >= 1".into()));
        }
        if self.eval_every == 0 || self.select_recall_k == 0 {
            return Err(HarError::InvalidConfig("eval_every and select_recall_k must be >= 1".into()));
        }
        Ok(())
    }
}

/// One question with its instance batch already encoded.
#[derive(Debug, Clone)]
pub struct EncodedQuery {
    pub dialog_id: String,
    pub turn_index: usize,
    pub turn_ids: Vec<usize>,
    pub raw: Vec<RawTurnEncoding>,
    pub gold_pids: Vec<String>,
}

impl EncodedQuery {
    pub fn qid(&self) -> String {
        format!("{}#{}", self.dialog_id, self.turn_index)
    }
}

/// Encodes every turn of every dialog (parallel, order preserved).
pub fn encode_queries(
    dialogs: &[Dialog],
    vocab: &Vocabulary,
    encoder: &EncoderWeights,
    layout: &SequenceLayout,
    batch_config: &BatchConfig,
) -> Result<Vec<EncodedQuery>> {
    let jobs: Vec<(&Dialog, usize)> = dialogs
        .iter()
        .flat_map(|d| (1..=d.len()).map(move |k| (d, k)))
        .collect();
    jobs.par_iter()
        .map(|&(d, k)| {
            let batch = build_instance_batch(d, k, vocab, layout, batch_config)?;
            let raw = encoder.encode_batch(&batch, layout)?;
            let turn = d.turn(k).expect("k in range");
            Ok(EncodedQuery {
                dialog_id: d.dialog_id.clone(),
                turn_index: k,
                turn_ids: batch.turn_ids,
                raw,
                gold_pids: turn.gold_pids.clone(),
            })
        })
        .collect()
}

/// `−log softmax(scores)[0]` over `[q·gold, q·neg_1, ...]`.
pub fn retrieval_loss(q_hat: &[f64], gold: &[f64], negatives: &[Vec<f64>]) -> Result<f64> {
    if negatives.is_empty() {
        return Err(HarError::InvalidConfig("at least one negative required".into()));
    }
    let scores: Vec<f64> = std::iter::once(dot(q_hat, gold))
        .chain(negatives.iter().map(|n| dot(q_hat, n)))
        .collect();
    Ok(log_sum_exp(&scores) - scores[0])
}

fn log_sum_exp(x: &[f64]) -> f64 {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + x.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadGradients {
    pub loss: f64,
    pub d: Vec<f64>,
    pub projection: Matrix,
}

fn aggregation_inputs(raw: &[RawTurnEncoding], mode: Granularity) -> Vec<Vec<f64>> {
    match mode {
        Granularity::Coarse => raw.iter().map(|r| r.cls.clone()).collect(),
        Granularity::Fine => raw.iter().map(RawTurnEncoding::mean_active_tokens).collect(),
    }
}

/// Loss and analytic gradients for `d` and the projection.
///
/// For `d`: `∂α_i/∂d = α_i (s_i − Σ_j α_j s_j)`, chained through the
/// aggregation and the score softmax. Non-soft modes have constant weights,
/// so their `d` gradient is zero.
pub fn grad_head(
    raw: &[RawTurnEncoding],
    head: &AttentionHead,
    gold: &[f64],
    negatives: &[Vec<f64>],
) -> Result<HeadGradients> {
    if negatives.is_empty() {
        return Err(HarError::InvalidConfig("at least one negative required".into()));
    }
    if head.mode == Granularity::Fine && raw.iter().any(|r| r.active_token_count == 0) {
        return Err(HarError::NoActiveTokens);
    }
    let p = &head.projection;
    let h = p.cols;
    let cls: Vec<&[f64]> = raw.iter().map(|r| r.cls.as_slice()).collect();
    let s: Vec<Vec<f64>> = cls.iter().map(|c| p.matvec(c)).collect();
    let alpha = attention_weights(&s, &head.d, head.attention_mode);
    let xs = aggregation_inputs(raw, head.mode);

    let mut v = vec![0.0; h];
    for (x, &a) in xs.iter().zip(&alpha) {
        axpy(a, x, &mut v);
    }
    let q = p.matvec(&v);

    let passages: Vec<&[f64]> = std::iter::once(gold)
        .chain(negatives.iter().map(Vec::as_slice))
        .collect();
    let scores: Vec<f64> = passages.iter().map(|pj| dot(&q, pj)).collect();
    let loss = log_sum_exp(&scores) - scores[0];
    let pi = softmax(&scores);

    // dL/dq
    let mut g_q = vec![0.0; q.len()];
    for (j, pj) in passages.iter().enumerate() {
        let coef = pi[j] - if j == 0 { 1.0 } else { 0.0 };
        axpy(coef, pj, &mut g_q);
    }

    // dL/dP from q = P v
    let mut grad_p = Matrix::zeros(p.rows, h);
    for (r, &g) in g_q.iter().enumerate() {
        axpy(g, &v, grad_p.row_mut(r));
    }

    let mut grad_d = vec![0.0; head.d.len()];
    if head.attention_mode == AttentionMode::Soft {
        // dL/dα_i = g_q · P x_i = (Pᵀ g_q) · x_i
        let back = p.matvec_t(&g_q);
        let a: Vec<f64> = xs.iter().map(|x| dot(&back, x)).collect();
        let mean_a: f64 = alpha.iter().zip(&a).map(|(al, ai)| al * ai).sum();
        let delta: Vec<f64> = alpha.iter().zip(&a).map(|(al, ai)| al * (ai - mean_a)).collect();
        let mut c_bar = vec![0.0; h];
        for ((si, ci), &dl) in s.iter().zip(&cls).zip(&delta) {
            axpy(dl, si, &mut grad_d);
            axpy(dl, ci, &mut c_bar);
        }
        // logits z_i = dᵀ P c_i contribute d (Σ δ_i c_i)ᵀ
        for (r, &dr) in head.d.iter().enumerate() {
            axpy(dr, &c_bar, grad_p.row_mut(r));
        }
    }
    Ok(HeadGradients {
        loss,
        d: grad_d,
        projection: grad_p,
    })
}

/// Loss through the full forward path (projection, attention, aggregation).
pub fn forward_loss(
    raw: &[RawTurnEncoding],
    head: &AttentionHead,
    gold: &[f64],
    negatives: &[Vec<f64>],
) -> Result<f64> {
    let q = compose_from_raw(raw, &[], head)?;
    retrieval_loss(&q.q_hat, gold, negatives)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub step: usize,
    /// Mean dev loss on fixed negatives.
    pub loss: f64,
    pub dev_recall: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestCheckpoint {
    pub recall: f64,
    pub loss: f64,
    pub step: usize,
    pub head: AttentionHead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub step: usize,
    pub head: AttentionHead,
    pub best: BestCheckpoint,
    /// One training loss per step.
    pub loss_history: Vec<f64>,
    pub eval_log: Vec<EvalPoint>,
    pub select_recall_k: usize,
}

impl TrainState {
    /// Training log as JSON lines `{"step", "loss", "dev_recall@K"}`.
    pub fn log_lines(&self) -> Vec<String> {
        let key = format!("dev_recall@{}", self.select_recall_k);
        self.eval_log
            .iter()
            .map(|e| {
                let mut m = serde_json::Map::new();
                m.insert("step".into(), e.step.into());
                m.insert("loss".into(), e.loss.into());
                m.insert(key.clone(), e.dev_recall.into());
                serde_json::Value::Object(m).to_string()
            })
            .collect()
    }
}

/// Resolves gold pids to store rows and samples negatives.
pub struct NegativeSampler<'a> {
    store: &'a VectorStore,
    rows: HashMap<&'a str, usize>,
    vectors: Vec<Vec<f64>>,
}

impl<'a> NegativeSampler<'a> {
    pub fn new(store: &'a VectorStore) -> Self {
        let rows = store
            .pids()
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect();
        let vectors = (0..store.len()).map(|r| store.vector(r)).collect();
        Self { store, rows, vectors }
    }

    pub fn gold_rows(&self, q: &EncodedQuery) -> Result<Vec<usize>> {
        if q.gold_pids.is_empty() {
            return Err(HarError::EmptyGold(q.qid()));
        }
        q.gold_pids
            .iter()
            .map(|pid| {
                self.rows.get(pid.as_str()).copied().ok_or_else(|| HarError::MissingGold {
                    qid: q.qid(),
                    pid: pid.clone(),
                })
            })
            .collect()
    }

    pub fn vector(&self, row: usize) -> &[f64] {
        &self.vectors[row]
    }

    /// Uniform draws (with replacement) from rows not in `gold`.
    pub fn sample(&self, gold: &[usize], n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
        if gold.len() >= self.store.len() {
            return Err(HarError::InvalidConfig("no non-gold passages to sample".into()));
        }
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let r = rng.random_range(0..self.store.len());
            if !gold.contains(&r) {
                out.push(self.vectors[r].clone());
            }
        }
        Ok(out)
    }
}

struct DevSet<'a> {
    queries: &'a [EncodedQuery],
    gold: Vec<Vec<usize>>,
    negatives: Vec<Vec<Vec<f64>>>,
}

impl<'a> DevSet<'a> {
    fn new(queries: &'a [EncodedQuery], sampler: &NegativeSampler<'_>, n_neg: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD5E7);
        let mut gold = Vec::with_capacity(queries.len());
        let mut negatives = Vec::with_capacity(queries.len());
        for q in queries {
            let g = sampler.gold_rows(q)?;
            negatives.push(sampler.sample(&g, n_neg, &mut rng)?);
            gold.push(g);
        }
        Ok(Self { queries, gold, negatives })
    }

    fn evaluate(&self, head: &AttentionHead, sampler: &NegativeSampler<'_>, k: usize) -> Result<(f64, f64)> {
        if self.queries.is_empty() {
            return Ok((0.0, 0.0));
        }
        let per: Vec<(f64, f64)> = self
            .queries
            .par_iter()
            .enumerate()
            .map(|(i, q)| {
                let qv = compose_from_raw(&q.raw, &q.turn_ids, head)?;
                let loss = retrieval_loss(&qv.q_hat, sampler.vector(self.gold[i][0]), &self.negatives[i])?;
                let ranked = search(sampler.store, &qv.q_hat, k)?;
                let gold: Vec<&str> = q.gold_pids.iter().map(String::as_str).collect();
                let recall = recall_at_k(&ranked.pids(), &gold, k)?;
                Ok((loss, recall))
            })
            .collect::<Result<_>>()?;
        let n = per.len() as f64;
        Ok((
            per.iter().map(|p| p.0).sum::<f64>() / n,
            per.iter().map(|p| p.1).sum::<f64>() / n,
        ))
    }
}

/// Plain gradient descent over shuffled training questions; the returned
/// state carries the best dev checkpoint (recall first, then lower dev loss,
/// then earlier step).
pub fn train(
    train_queries: &[EncodedQuery],
    dev_queries: &[EncodedQuery],
    store: &VectorStore,
    mut head: AttentionHead,
    config: &TrainConfig,
) -> Result<TrainState> {
    config.validate()?;
    if head.embedding_size() != store.dim() {
        return Err(HarError::DimensionMismatch {
            expected: store.dim(),
            got: head.embedding_size(),
        });
    }
    let sampler = NegativeSampler::new(store);
    let dev = DevSet::new(dev_queries, &sampler, config.n_neg, config.seed)?;
    let train_gold: Vec<Vec<usize>> = train_queries
        .iter()
        .map(|q| sampler.gold_rows(q))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let total = config.epochs * train_queries.len();
    let total = config.max_steps.map_or(total, |m| m.min(total));

    let (loss0, recall0) = dev.evaluate(&head, &sampler, config.select_recall_k)?;
    let mut eval_log = vec![EvalPoint {
        step: 0,
        loss: loss0,
        dev_recall: recall0,
    }];
    let mut best = BestCheckpoint {
        recall: recall0,
        loss: loss0,
        step: 0,
        head: head.clone(),
    };
    let mut loss_history = Vec::with_capacity(total);
    let mut order: Vec<usize> = (0..train_queries.len()).collect();
    let mut step = 0;

    'outer: for _epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for &qi in &order {
            if step >= total {
                break 'outer;
            }
            let q = &train_queries[qi];
            let gold = &train_gold[qi];
            let negatives = sampler.sample(gold, config.n_neg, &mut rng)?;
            let g = grad_head(&q.raw, &head, sampler.vector(gold[0]), &negatives)?;
            if !g.loss.is_finite() {
                return Err(HarError::Diverged { step, loss: g.loss });
            }
            let lr = config.learning_rate;
            axpy(-lr, &g.d, &mut head.d);
            axpy(-lr, &g.projection.data, &mut head.projection.data);
            if !head.is_finite() {
                return Err(HarError::Diverged { step, loss: f64::NAN });
            }
            loss_history.push(g.loss);
            step += 1;

            if step % config.eval_every == 0 || step == total {
                let (loss, recall) = dev.evaluate(&head, &sampler, config.select_recall_k)?;
                if !loss.is_finite() {
                    return Err(HarError::Diverged { step, loss });
                }
                eval_log.push(EvalPoint {
                    step,
                    loss,
                    dev_recall: recall,
                });
                if recall > best.recall || (recall == best.recall && loss < best.loss) {
                    best = BestCheckpoint {
                        recall,
                        loss,
                        step,
                        head: head.clone(),
                    };
                }
            }
        }
    }

    Ok(TrainState {
        step,
        head,
        best,
        loss_history,
        eval_log,
        select_recall_k: config.select_recall_k,
    })
}
