#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use har::batching::{build_instance_batch, SequenceLayout};
use har::corpus::{gen_synthetic, SyntheticConfig, SyntheticCorpus};
use har::encoder::{init_encoder, EncoderConfig, EncoderWeights, RawTurnEncoding};
use har::har::{AttentionHead, AttentionMode, Granularity, Variant};
use har::index::VectorStore;
use har::linalg::Matrix;
use har::training::{forward_loss, grad_head};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn rand_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix {
        rows,
        cols,
        data: rand_vec(rng, rows * cols, scale),
    }
}

/// Double loop over turns and token slots, written independently of the
/// library's accumulation.
pub fn brute_fine(t_stack: &[Matrix], alpha: &[f64], active: &[bool]) -> Vec<f64> {
    let b = t_stack[0].cols;
    let n_active = active.iter().filter(|&&a| a).count() as f64;
    let mut out = vec![0.0; b];
    for c in 0..b {
        let mut total = 0.0;
        for (m, &on) in active.iter().enumerate() {
            if !on {
                continue;
            }
            for (i, t) in t_stack.iter().enumerate() {
                total += alpha[i] * t.data[m * b + c];
            }
        }
        out[c] = total / n_active;
    }
    out
}

/// Full scan, full sort by (-score, row), truncate.
pub fn sort_oracle(store: &VectorStore, q: &[f64], r: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = (0..store.len())
        .map(|row| {
            let p = store.row(row);
            let mut s = 0.0;
            for c in 0..q.len() {
                s += q[c] * p[c] as f64;
            }
            (row, s)
        })
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(r);
    all
}

pub fn random_store(rng: &mut ChaCha8Rng, j: usize, dim: usize, integer: bool) -> VectorStore {
    let pids = (0..j).map(|i| format!("p{i:05}")).collect();
    let data = (0..j * dim)
        .map(|_| {
            if integer {
                rng.random_range(-2i32..=2) as f32
            } else {
                rng.random_range(-1.0f32..1.0)
            }
        })
        .collect();
    VectorStore::new(dim, pids, data).unwrap()
}

pub const SMALL_M: usize = 8;
pub const SMALL_N: usize = 11;

pub fn small_corpus(seed: u64) -> SyntheticCorpus {
    let config = SyntheticConfig {
        n_dialogs: 20,
        n_passages: 80,
        ..SyntheticConfig::default()
    };
    gen_synthetic(&config, seed).unwrap()
}

pub fn small_encoder(vocab_size: usize, seed: u64) -> EncoderWeights {
    let config = EncoderConfig {
        vocab_size,
        hidden_size: 16,
        embedding_size: 12,
        layers: 2,
        heads: 2,
        ffn_multiplier: 2,
        max_positions: 3 * SMALL_M + 3,
        segment_vocab_size: SMALL_N,
        seed,
    };
    init_encoder(&config).unwrap()
}

pub struct GradInstance {
    pub raw: Vec<RawTurnEncoding>,
    pub head: AttentionHead,
    pub gold: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Encoded multi-row batches from a small synthetic corpus with a random
/// head and random passage vectors.
pub fn grad_instances(mode: Granularity, posseg: bool, n: usize, seed: u64) -> Vec<GradInstance> {
    let corpus = small_corpus(seed);
    let encoder = small_encoder(corpus.vocab.len(), seed);
    let layout = SequenceLayout::new(SMALL_M);
    let variant = Variant::new(mode, posseg, AttentionMode::Soft);
    let cfg = variant.batch_config(SMALL_N);
    let mut r = rng(seed ^ 0x6a4d);
    let b = encoder.embedding_size();
    let h = encoder.hidden_size();
    (0..n)
        .map(|idx| {
            let dialog = &corpus.dialogs[idx % corpus.dialogs.len()];
            let k = 2 + idx % (dialog.len() - 1);
            let batch = build_instance_batch(dialog, k, &corpus.vocab, &layout, &cfg).unwrap();
            let raw = encoder.encode_batch(&batch, &layout).unwrap();
            let mut head = AttentionHead::new(variant, &encoder);
            head.d = rand_vec(&mut r, b, 0.2);
            let noise = rand_matrix(&mut r, b, h, 0.1);
            for (p, e) in head.projection.data.iter_mut().zip(&noise.data) {
                *p = 0.5 * *p + e;
            }
            let gold = rand_vec(&mut r, b, 0.4);
            let negatives = (0..4).map(|_| rand_vec(&mut r, b, 0.4)).collect();
            GradInstance {
                raw,
                head,
                gold,
                negatives,
            }
        })
        .collect()
}

pub const FD_EPS: f64 = 1e-3;
/// Components whose magnitudes are both below this are compared absolutely.
pub const FD_FLOOR: f64 = 1e-4;

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(FD_FLOOR)
}

/// Largest componentwise relative error between analytic and central
/// difference gradients, over `d` and the projection.
pub fn fd_max_rel_err(inst: &GradInstance) -> f64 {
    let g = grad_head(&inst.raw, &inst.head, &inst.gold, &inst.negatives).unwrap();
    let loss = |head: &AttentionHead| forward_loss(&inst.raw, head, &inst.gold, &inst.negatives).unwrap();
    let mut worst: f64 = 0.0;
    for c in 0..inst.head.d.len() {
        let mut plus = inst.head.clone();
        plus.d[c] += FD_EPS;
        let mut minus = inst.head.clone();
        minus.d[c] -= FD_EPS;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * FD_EPS);
        worst = worst.max(rel_err(g.d[c], numeric));
    }
    for c in 0..inst.head.projection.data.len() {
        let mut plus = inst.head.clone();
        plus.projection.data[c] += FD_EPS;
        let mut minus = inst.head.clone();
        minus.projection.data[c] -= FD_EPS;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * FD_EPS);
        worst = worst.max(rel_err(g.projection.data[c], numeric));
    }
    worst
}
