//! History attention: softmax weights over per-turn sequence vectors and
//! fine-/coarse-grained aggregation into one query vector.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::batching::{build_instance_batch, BatchConfig, HistoryWindow, SequenceLayout};
use crate::corpus::{Dialog, Vocabulary};
use crate::encoder::{EncoderWeights, RawTurnEncoding, TurnEncoding};
use crate::error::{io_err, HarError, Result};
use crate::linalg::{axpy, dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    /// Token-level weighting of `T_i`, then a masked mean over `q_k` tokens.
    Fine,
    /// Weighting of the sequence vectors `s_i`.
    Coarse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttentionMode {
    Soft,
    /// Every turn weighted 1.
    AlphaOne,
    /// Every turn weighted `1 / n_rows`.
    Uniform,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Fine => "fine",
            Granularity::Coarse => "coarse",
        })
    }
}

impl fmt::Display for AttentionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttentionMode::Soft => "soft",
            AttentionMode::AlphaOne => "alpha-one",
            AttentionMode::Uniform => "uniform",
        })
    }
}

/// One point in the ablation space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variant {
    pub mode: Granularity,
    pub attention_mode: AttentionMode,
    pub posseg_enabled: bool,
    #[serde(default)]
    pub window: HistoryWindow,
}

impl Variant {
    pub fn new(mode: Granularity, posseg_enabled: bool, attention_mode: AttentionMode) -> Self {
        Self {
            mode,
            attention_mode,
            posseg_enabled,
            window: HistoryWindow::Full,
        }
    }

    pub fn current_only(mut self) -> Self {
        self.window = HistoryWindow::CurrentOnly;
        self
    }

    /// e.g. `coarse,no-posseg,soft`
    pub fn label(&self) -> String {
        let mut s = format!(
            "{},{},{}",
            self.mode,
            if self.posseg_enabled { "posseg" } else { "no-posseg" },
            self.attention_mode
        );
        if self.window == HistoryWindow::CurrentOnly {
            s.push_str(",current-only");
        }
        s
    }

    pub fn batch_config(&self, max_history_turns: usize) -> BatchConfig {
        BatchConfig {
            max_history_turns,
            posseg_enabled: self.posseg_enabled,
            window: self.window,
        }
    }
}

/// Trainable head: attention vector `d` and the query-side projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionHead {
    pub mode: Granularity,
    pub attention_mode: AttentionMode,
    pub posseg_enabled: bool,
    #[serde(default)]
    pub window: HistoryWindow,
    pub d: Vec<f64>,
    /// `b × h`, rows in embedding space.
    #[serde(with = "matrix_rows")]
    pub projection: Matrix,
}

mod matrix_rows {
    use super::Matrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        m.to_rows().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        if rows.windows(2).any(|w| w[0].len() != w[1].len()) {
            return Err(serde::de::Error::custom("ragged projection rows"));
        }
        Ok(Matrix::from_rows(&rows))
    }
}

impl AttentionHead {
    /// `d = 0` (uniform attention at start), projection copied from the encoder.
    pub fn new(variant: Variant, encoder: &EncoderWeights) -> Self {
        Self {
            mode: variant.mode,
            attention_mode: variant.attention_mode,
            posseg_enabled: variant.posseg_enabled,
            window: variant.window,
            d: vec![0.0; encoder.embedding_size()],
            projection: encoder.projection.clone(),
        }
    }

    pub fn variant(&self) -> Variant {
        Variant {
            mode: self.mode,
            attention_mode: self.attention_mode,
            posseg_enabled: self.posseg_enabled,
            window: self.window,
        }
    }

    pub fn embedding_size(&self) -> usize {
        self.projection.rows
    }

    pub fn is_finite(&self) -> bool {
        self.d.iter().all(|v| v.is_finite()) && self.projection.is_finite()
    }
}

/// Head checkpoint file: the head plus the fingerprint of the run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadCheckpoint {
    #[serde(flatten)]
    pub head: AttentionHead,
    pub config_hash: String,
}

impl HeadCheckpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json + "\n").map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryVector {
    pub q_hat: Vec<f64>,
    /// Aligned with the batch's `turn_ids`.
    pub alphas: Vec<f64>,
    pub turn_ids: Vec<usize>,
}

/// Softmax (max-subtracted) over the given logits.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Per-turn weights from sequence vectors `s` (one per row) and `d`.
pub fn attention_weights(s: &[Vec<f64>], d: &[f64], mode: AttentionMode) -> Vec<f64> {
    let n = s.len();
    match mode {
        AttentionMode::Soft => {
            let logits: Vec<f64> = s.iter().map(|si| dot(d, si)).collect();
            softmax(&logits)
        }
        AttentionMode::AlphaOne => vec![1.0; n],
        AttentionMode::Uniform => vec![1.0 / n as f64; n],
    }
}

/// `Q̂ = Σ_i α_i T_i`, then the mean of `Q̂` over the active `q_k` slots.
/// `active` has one flag per token slot (length M).
pub fn aggregate_fine(t_stack: &[Matrix], alpha: &[f64], active: &[bool]) -> Result<Vec<f64>> {
    let n_active = active.iter().filter(|&&a| a).count();
    if n_active == 0 {
        return Err(HarError::NoActiveTokens);
    }
    if t_stack.len() != alpha.len() {
        return Err(HarError::DimensionMismatch {
            expected: t_stack.len(),
            got: alpha.len(),
        });
    }
    let b = t_stack[0].cols;
    let mut combined = Matrix::zeros(t_stack[0].rows, b);
    for (t, &a) in t_stack.iter().zip(alpha) {
        axpy(a, &t.data, &mut combined.data);
    }
    let mut q = vec![0.0; b];
    for (slot, &on) in active.iter().enumerate() {
        if on {
            axpy(1.0, combined.row(slot), &mut q);
        }
    }
    let inv = 1.0 / n_active as f64;
    q.iter_mut().for_each(|v| *v *= inv);
    Ok(q)
}

/// `q̂ = Σ_i α_i s_i`
pub fn aggregate_coarse(s: &[Vec<f64>], alpha: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; s.first().map_or(0, Vec::len)];
    for (si, &a) in s.iter().zip(alpha) {
        axpy(a, si, &mut q);
    }
    q
}

/// Query vector from already-projected turn encodings.
pub fn compose_from_turns(turns: &[TurnEncoding], head: &AttentionHead) -> Result<Vec<f64>> {
    compose_with_alphas(turns, head).map(|(q, _)| q)
}

fn compose_with_alphas(turns: &[TurnEncoding], head: &AttentionHead) -> Result<(Vec<f64>, Vec<f64>)> {
    let s: Vec<Vec<f64>> = turns.iter().map(|t| t.s.clone()).collect();
    let alphas = attention_weights(&s, &head.d, head.attention_mode);
    let q = match head.mode {
        Granularity::Coarse => aggregate_coarse(&s, &alphas),
        Granularity::Fine => {
            let stack: Vec<Matrix> = turns.iter().map(|t| t.t.clone()).collect();
            let m = stack[0].rows;
            let n_active = turns[0].active_token_count;
            let active: Vec<bool> = (0..m).map(|slot| slot < n_active).collect();
            aggregate_fine(&stack, &alphas, &active)?
        }
    };
    Ok((q, alphas))
}

/// Query vector from raw (unprojected) encodings of one instance batch.
pub fn compose_from_raw(raw: &[RawTurnEncoding], turn_ids: &[usize], head: &AttentionHead) -> Result<QueryVector> {
    let turns: Vec<TurnEncoding> = raw.iter().map(|r| r.project(&head.projection)).collect();
    let (q_hat, alphas) = compose_with_alphas(&turns, head)?;
    Ok(QueryVector {
        q_hat,
        alphas,
        turn_ids: turn_ids.to_vec(),
    })
}

/// Batch → encode → attend → aggregate for turn `k` of `dialog`.
pub fn compose_query(
    dialog: &Dialog,
    k: usize,
    vocab: &Vocabulary,
    encoder: &EncoderWeights,
    head: &AttentionHead,
    layout: &SequenceLayout,
    max_history_turns: usize,
) -> Result<QueryVector> {
    let cfg = head.variant().batch_config(max_history_turns);
    let batch = build_instance_batch(dialog, k, vocab, layout, &cfg)?;
    let raw = encoder.encode_batch(&batch, layout)?;
    compose_from_raw(&raw, &batch.turn_ids, head)
}
