//! Small deterministic transformer encoder.
//!
//! Post-norm layout: embeddings (token + position + segment) go through a
//! layer norm, then each layer applies masked multi-head self-attention and a
//! GELU feed-forward block, each wrapped in a residual connection and a layer
//! norm. Weights are drawn from a seeded ChaCha stream and never trained, so
//! a checkpoint is just the config.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::batching::{InstanceBatch, SequenceLayout};
use crate::corpus::CLS;
use crate::error::{io_err, HarError, Result};
use crate::linalg::{axpy, dot, Matrix};

pub const LAYER_NORM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub vocab_size: usize,
    /// Hidden size h.
    pub hidden_size: usize,
    /// Output embedding size b.
    pub embedding_size: usize,
    pub layers: usize,
    pub heads: usize,
    /// Feed-forward inner width as a multiple of `hidden_size`.
    pub ffn_multiplier: usize,
    pub max_positions: usize,
    /// Segment vocabulary size; equals the history window N.
    pub segment_vocab_size: usize,
    pub seed: u64,
}

impl EncoderConfig {
    /// Desk-scale defaults: two layers, two heads, h = 64, b = 128.
    pub fn desk(vocab_size: usize, max_positions: usize, segment_vocab_size: usize, seed: u64) -> Self {
        Self {
            vocab_size,
            hidden_size: 64,
            embedding_size: 128,
            layers: 2,
            heads: 2,
            ffn_multiplier: 4,
            max_positions,
            segment_vocab_size,
            seed,
        }
    }

    pub fn head_dim(&self) -> usize {
        self.hidden_size / self.heads.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarError::InvalidConfig(m));
        for (name, v) in [
            ("vocab_size", self.vocab_size),
            ("hidden_size", self.hidden_size),
            ("embedding_size", self.embedding_size),
            ("layers", self.layers),
            ("heads", self.heads),
            ("ffn_multiplier", self.ffn_multiplier),
            ("max_positions", self.max_positions),
            ("segment_vocab_size", self.segment_vocab_size),
        ] {
            if v == 0 {
                return bad(format!("{name} must be >= 1"));
            }
        }
        if !self.hidden_size.is_multiple_of(self.heads) {
            return bad(format!(
                "hidden_size {} not divisible by heads {}",
                self.hidden_size, self.heads
            ));
        }
        Ok(())
    }

    /// Stable hex digest of the config (seed included).
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&json);
        hex::encode(&digest[..8])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

impl LayerNorm {
    fn new(h: usize) -> Self {
        Self {
            gamma: vec![1.0; h],
            beta: vec![0.0; h],
        }
    }

    fn apply(&self, x: &mut [f64]) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
        for ((v, g), b) in x.iter_mut().zip(&self.gamma).zip(&self.beta) {
            *v = (*v - mean) * inv * g + b;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderLayer {
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub wo: Matrix,
    pub bq: Vec<f64>,
    pub bk: Vec<f64>,
    pub bv: Vec<f64>,
    pub bo: Vec<f64>,
    pub attn_norm: LayerNorm,
    pub w_in: Matrix,
    pub b_in: Vec<f64>,
    pub w_out: Matrix,
    pub b_out: Vec<f64>,
    pub ffn_norm: LayerNorm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderWeights {
    pub config: EncoderConfig,
    pub token_embeddings: Matrix,
    pub position_embeddings: Matrix,
    /// Positional segment table, one row per relative turn offset.
    pub segment_embeddings: Matrix,
    pub embedding_norm: LayerNorm,
    pub layers: Vec<EncoderLayer>,
    /// `b × h` map from hidden space to the output embedding space.
    pub projection: Matrix,
}

struct Init {
    rng: ChaCha8Rng,
    normal: Normal<f64>,
}

impl Init {
    fn matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        let data = (0..rows * cols)
            .map(|_| self.normal.sample(&mut self.rng))
            .collect();
        Matrix { rows, cols, data }
    }
}

pub fn init_encoder(config: &EncoderConfig) -> Result<EncoderWeights> {
    config.validate()?;
    let h = config.hidden_size;
    let mut init = Init {
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        normal: Normal::new(0.0, 1.0 / (h as f64).sqrt()).expect("valid std"),
    };
    let token_embeddings = init.matrix(config.vocab_size, h);
    let position_embeddings = init.matrix(config.max_positions, h);
    let segment_embeddings = init.matrix(config.segment_vocab_size, h);
    let inner = h * config.ffn_multiplier;
    let layers = (0..config.layers)
        .map(|_| EncoderLayer {
            wq: init.matrix(h, h),
            wk: init.matrix(h, h),
            wv: init.matrix(h, h),
            wo: init.matrix(h, h),
            bq: vec![0.0; h],
            bk: vec![0.0; h],
            bv: vec![0.0; h],
            bo: vec![0.0; h],
            attn_norm: LayerNorm::new(h),
            w_in: init.matrix(inner, h),
            b_in: vec![0.0; inner],
            w_out: init.matrix(h, inner),
            b_out: vec![0.0; h],
            ffn_norm: LayerNorm::new(h),
        })
        .collect();
    let projection = init.matrix(config.embedding_size, h);
    Ok(EncoderWeights {
        config: config.clone(),
        token_embeddings,
        position_embeddings,
        segment_embeddings,
        embedding_norm: LayerNorm::new(h),
        layers,
        projection,
    })
}

/// tanh approximation of GELU.
#[inline]
fn gelu(x: f64) -> f64 {
    const C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
    0.5 * x * (1.0 + (C * (x + 0.044_715 * x * x * x)).tanh())
}

fn affine(w: &Matrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut y = w.matvec(x);
    for (yi, bi) in y.iter_mut().zip(b) {
        *yi += bi;
    }
    y
}

impl EncoderWeights {
    pub fn hidden_size(&self) -> usize {
        self.config.hidden_size
    }

    pub fn embedding_size(&self) -> usize {
        self.config.embedding_size
    }

    /// Replaces the output projection with the identity (requires h = b).
    pub fn with_identity_projection(mut self) -> Result<Self> {
        if self.config.hidden_size != self.config.embedding_size {
            return Err(HarError::DimensionMismatch {
                expected: self.config.hidden_size,
                got: self.config.embedding_size,
            });
        }
        self.projection = Matrix::identity(self.config.hidden_size);
        Ok(self)
    }

    /// Contextual hidden states `[len × h]` for one row. Pad positions
    /// (mask false) are never attended to and come back as zero rows.
    pub fn encode_row(&self, token_ids: &[u32], segment_ids: &[u32], mask: &[bool]) -> Result<Matrix> {
        let len = token_ids.len();
        if segment_ids.len() != len || mask.len() != len {
            return Err(HarError::DimensionMismatch {
                expected: len,
                got: segment_ids.len().min(mask.len()),
            });
        }
        if len > self.config.max_positions {
            return Err(HarError::IdOutOfRange {
                what: "position",
                id: len - 1,
                size: self.config.max_positions,
            });
        }
        let h = self.config.hidden_size;
        let active: Vec<usize> = (0..len).filter(|&p| mask[p]).collect();

        let mut x = Matrix::zeros(active.len(), h);
        for (r, &p) in active.iter().enumerate() {
            let tok = token_ids[p] as usize;
            let seg = segment_ids[p] as usize;
            if tok >= self.config.vocab_size {
                return Err(HarError::IdOutOfRange {
                    what: "token",
                    id: tok,
                    size: self.config.vocab_size,
                });
            }
            if seg >= self.config.segment_vocab_size {
                return Err(HarError::IdOutOfRange {
                    what: "segment",
                    id: seg,
                    size: self.config.segment_vocab_size,
                });
            }
            let row = x.row_mut(r);
            row.copy_from_slice(self.token_embeddings.row(tok));
            axpy(1.0, self.position_embeddings.row(p), row);
            axpy(1.0, self.segment_embeddings.row(seg), row);
            self.embedding_norm.apply(row);
        }

        for layer in &self.layers {
            x = self.layer_forward(layer, &x);
        }

        let mut out = Matrix::zeros(len, h);
        for (r, &p) in active.iter().enumerate() {
            out.row_mut(p).copy_from_slice(x.row(r));
        }
        Ok(out)
    }

    fn layer_forward(&self, layer: &EncoderLayer, x: &Matrix) -> Matrix {
        let n = x.rows;
        let h = self.config.hidden_size;
        let heads = self.config.heads;
        let dh = self.config.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();

        let q: Vec<Vec<f64>> = (0..n).map(|r| affine(&layer.wq, &layer.bq, x.row(r))).collect();
        let k: Vec<Vec<f64>> = (0..n).map(|r| affine(&layer.wk, &layer.bk, x.row(r))).collect();
        let v: Vec<Vec<f64>> = (0..n).map(|r| affine(&layer.wv, &layer.bv, x.row(r))).collect();

        let mut out = Matrix::zeros(n, h);
        let mut scores = vec![0.0; n];
        for r in 0..n {
            let mut ctx = vec![0.0; h];
            for hd in 0..heads {
                let span = hd * dh..(hd + 1) * dh;
                let qh = &q[r][span.clone()];
                let mut max = f64::NEG_INFINITY;
                for (c, s) in scores.iter_mut().enumerate() {
                    *s = dot(qh, &k[c][span.clone()]) * scale;
                    max = max.max(*s);
                }
                let mut z = 0.0;
                for s in scores.iter_mut() {
                    *s = (*s - max).exp();
                    z += *s;
                }
                let dst = &mut ctx[span.clone()];
                for (c, s) in scores.iter().enumerate() {
                    axpy(s / z, &v[c][span.clone()], dst);
                }
            }
            let attn = affine(&layer.wo, &layer.bo, &ctx);
            let row = out.row_mut(r);
            for ((o, xi), a) in row.iter_mut().zip(x.row(r)).zip(&attn) {
                *o = xi + a;
            }
            layer.attn_norm.apply(row);

            let hidden: Vec<f64> = affine(&layer.w_in, &layer.b_in, row)
                .into_iter()
                .map(gelu)
                .collect();
            let ffn = affine(&layer.w_out, &layer.b_out, &hidden);
            for (o, f) in row.iter_mut().zip(&ffn) {
                *o += f;
            }
            layer.ffn_norm.apply(row);
        }
        out
    }

    /// Raw (unprojected) turn features for every row of a batch.
    pub fn encode_batch(&self, batch: &InstanceBatch, layout: &SequenceLayout) -> Result<Vec<RawTurnEncoding>> {
        (0..batch.n_rows())
            .map(|r| {
                let g = self.encode_row(&batch.token_ids[r], &batch.segment_ids[r], &batch.token_mask[r])?;
                Ok(raw_turn_encoding(&g, &batch.current_token_mask[r], layout))
            })
            .collect()
    }

    /// Hidden vector at `[CLS]` for a passage row `[CLS] tokens...`, all
    /// segment ids 0.
    pub fn encode_passage_hidden(&self, token_ids: &[u32]) -> Result<Vec<f64>> {
        let mut row = Vec::with_capacity(token_ids.len() + 1);
        row.push(CLS);
        row.extend_from_slice(token_ids);
        let segs = vec![0; row.len()];
        let mask = vec![true; row.len()];
        let g = self.encode_row(&row, &segs, &mask)?;
        Ok(g.row(0).to_vec())
    }
}

/// Hidden-space (`h`) features of one row before projection.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTurnEncoding {
    /// `G_i[CLS]`
    pub cls: Vec<f64>,
    /// `[M × h]`: hidden states at `q_k` positions, zero rows at pads.
    pub tokens: Matrix,
    pub active_token_count: usize,
}

/// Projected turn encoding in embedding space `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnEncoding {
    /// Sequence vector `s_i`.
    pub s: Vec<f64>,
    /// `[M × b]` token matrix `T_i`; rows past the active tokens are zero.
    pub t: Matrix,
    pub active_token_count: usize,
}

pub fn raw_turn_encoding(g: &Matrix, current_mask: &[bool], layout: &SequenceLayout) -> RawTurnEncoding {
    let m = layout.max_question_tokens;
    let mut tokens = Matrix::zeros(m, g.cols);
    let mut active = 0;
    for (slot, p) in layout.current_question().enumerate() {
        if current_mask[p] {
            tokens.row_mut(slot).copy_from_slice(g.row(p));
            active += 1;
        }
    }
    RawTurnEncoding {
        cls: g.row(layout.cls_pos()).to_vec(),
        tokens,
        active_token_count: active,
    }
}

impl RawTurnEncoding {
    pub fn project(&self, projection: &Matrix) -> TurnEncoding {
        TurnEncoding {
            s: projection.matvec(&self.cls),
            t: projection.apply_rows(&self.tokens),
            active_token_count: self.active_token_count,
        }
    }

    /// Mean of the active token rows (zero vector if none).
    pub fn mean_active_tokens(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.tokens.cols];
        if self.active_token_count == 0 {
            return acc;
        }
        for r in 0..self.tokens.rows {
            axpy(1.0, self.tokens.row(r), &mut acc);
        }
        let inv = 1.0 / self.active_token_count as f64;
        acc.iter_mut().for_each(|v| *v *= inv);
        acc
    }
}

/// `s_i` and `T_i` from a contextual matrix, projected to `b`.
pub fn extract_turn_encoding(
    g: &Matrix,
    current_mask: &[bool],
    layout: &SequenceLayout,
    projection: &Matrix,
) -> TurnEncoding {
    raw_turn_encoding(g, current_mask, layout).project(projection)
}

/// On-disk encoder checkpoint: the config alone regenerates the weights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderCheckpoint {
    pub seed: u64,
    pub config_hash: String,
    pub config: EncoderConfig,
}

impl EncoderCheckpoint {
    pub fn new(config: &EncoderConfig) -> Self {
        Self {
            seed: config.seed,
            config_hash: config.fingerprint(),
            config: config.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n").map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let ck: Self = serde_json::from_str(&text)?;
        let expected = ck.config.fingerprint();
        if ck.config_hash != expected || ck.seed != ck.config.seed {
            return Err(HarError::FingerprintMismatch {
                expected,
                found: ck.config_hash,
            });
        }
        Ok(ck)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm, sub};

    fn tiny(seed: u64) -> EncoderConfig {
        EncoderConfig {
            vocab_size: 20,
            hidden_size: 8,
            embedding_size: 6,
            layers: 2,
            heads: 2,
            ffn_multiplier: 2,
            max_positions: 16,
            segment_vocab_size: 4,
            seed,
        }
    }

    #[test]
    fn deterministic_init() {
        let a = init_encoder(&tiny(42)).unwrap();
        let b = init_encoder(&tiny(42)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.token_embeddings, init_encoder(&tiny(43)).unwrap().token_embeddings);
    }

    #[test]
    fn head_divisibility() {
        let mut c = EncoderConfig::desk(10, 20, 11, 1);
        c.heads = 2;
        assert_eq!(c.head_dim(), 32);
        c.heads = 3;
        assert!(init_encoder(&c).is_err());
    }

    #[test]
    fn out_of_range_ids() {
        let w = init_encoder(&tiny(1)).unwrap();
        assert!(w.encode_row(&[1, 25], &[0, 0], &[true, true]).is_err());
        assert!(w.encode_row(&[1, 5], &[0, 9], &[true, true]).is_err());
    }

    #[test]
    fn pad_positions_do_not_leak() {
        let w = init_encoder(&tiny(3)).unwrap();
        let mask = [true, true, true, false, false, true];
        let segs = [1, 1, 1, 0, 0, 0];
        let a = w.encode_row(&[1, 5, 6, 0, 0, 7], &segs, &mask).unwrap();
        let b = w.encode_row(&[1, 5, 6, 13, 19, 7], &segs, &mask).unwrap();
        for p in [0, 1, 2, 5] {
            assert_eq!(a.row(p), b.row(p));
        }
        assert!(a.row(3).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn segments_reach_output() {
        let w = init_encoder(&tiny(5)).unwrap();
        let mask = [true; 5];
        let a = w.encode_row(&[1, 4, 5, 2, 6], &[0; 5], &mask).unwrap();
        let b = w.encode_row(&[1, 4, 5, 2, 6], &[2, 2, 2, 2, 0], &mask).unwrap();
        assert!(norm(&sub(a.row(0), b.row(0))) > 1e-9);
    }

    #[test]
    fn identity_projection_keeps_cls() {
        let mut c = tiny(7);
        c.embedding_size = c.hidden_size;
        let w = init_encoder(&c).unwrap().with_identity_projection().unwrap();
        let layout = SequenceLayout::new(4);
        let len = layout.row_len();
        let mut ids = vec![0u32; len];
        let mut mask = vec![false; len];
        for p in [0, 1, 5, 6, 10, 11, 12] {
            ids[p] = 4 + p as u32 % 10;
            mask[p] = true;
        }
        let mut cur = vec![false; len];
        cur[11] = true;
        cur[12] = true;
        let g = w.encode_row(&ids, &vec![0; len], &mask).unwrap();
        let te = extract_turn_encoding(&g, &cur, &layout, &w.projection);
        assert_eq!(te.s, g.row(0).to_vec());
        assert_eq!(te.active_token_count, 2);
        assert!(te.t.row(0).iter().any(|&v| v != 0.0));
        assert!(te.t.row(1).iter().any(|&v| v != 0.0));
        assert!(te.t.row(2).iter().all(|&v| v == 0.0));
        assert!(te.t.row(3).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn checkpoint_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("encoder.json");
        let ck = EncoderCheckpoint::new(&tiny(9));
        ck.save(&p).unwrap();
        assert_eq!(EncoderCheckpoint::load(&p).unwrap(), ck);
    }
}
