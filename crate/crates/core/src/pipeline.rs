//! End-to-end wiring used by the `har` binary: run configuration, on-disk
//! layout, and one function per command.
//!
//! Layout under the configured directories:
//!
//! ```text
//! data_dir/   train.jsonl dev.jsonl test.jsonl passages.jsonl vocab.txt summary.json
//! store_dir/  vectors.bin pids.txt manifest.json encoder.json
//! checkpoint_dir/  <variant>.json <variant>.log.jsonl
//! report_dir/ <variant>.json ablation.json ablation.txt
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::batching::SequenceLayout;
use crate::corpus::{
    dialog_stats, gen_synthetic, load_dialogs, load_passages, write_dialogs, write_passages, Dialog,
    DialogStats, PassageCollection, SyntheticConfig, Vocabulary,
};
use crate::encoder::{init_encoder, EncoderCheckpoint, EncoderConfig, EncoderWeights};
use crate::error::{io_err, HarError, Result};
use crate::eval::{evaluate_queries, evaluate_run, QueryResult, RunReport, DEFAULT_KS};
use crate::har::{AttentionHead, AttentionMode, Granularity, HeadCheckpoint, Variant};
use crate::index::{build_store, StoreManifest, VectorStore};
use crate::training::{encode_queries, train, EncodedQuery, TrainConfig, TrainState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderSettings {
    pub hidden_size: usize,
    pub embedding_size: usize,
    pub layers: usize,
    pub heads: usize,
    pub ffn_multiplier: usize,
    /// Defaults to the run seed.
    pub seed: Option<u64>,
}

impl Default for EncoderSettings {
    fn default() -> Self {
        Self {
            hidden_size: 64,
            embedding_size: 128,
            layers: 2,
            heads: 2,
            ffn_multiplier: 4,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub data_dir: PathBuf,
    pub store_dir: PathBuf,
    pub checkpoint_dir: PathBuf,
    pub report_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            data_dir: "run/data".into(),
            store_dir: "run/store".into(),
            checkpoint_dir: "run/checkpoints".into(),
            report_dir: "run/reports".into(),
        }
    }
}

impl Paths {
    pub fn under(root: &Path) -> Self {
        Self {
            data_dir: root.join("data"),
            store_dir: root.join("store"),
            checkpoint_dir: root.join("checkpoints"),
            report_dir: root.join("reports"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub profile: String,
    pub seed: u64,
    pub paths: Paths,
    pub synthetic: SyntheticConfig,
    /// M
    pub max_question_tokens: usize,
    pub max_passage_tokens: usize,
    pub max_seq: usize,
    /// N
    pub max_history_turns: usize,
    /// R
    pub top_r: usize,
    pub encoder: EncoderSettings,
    pub train: TrainConfig,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl RunConfig {
    /// Small encoder and synthetic corpus; completes in minutes on one core.
    pub fn desk() -> Self {
        Self {
            profile: "desk".into(),
            seed: 7,
            paths: Paths::default(),
            synthetic: SyntheticConfig::default(),
            max_question_tokens: 16,
            max_passage_tokens: 64,
            max_seq: 512,
            max_history_turns: 11,
            top_r: 100,
            encoder: EncoderSettings::default(),
            train: TrainConfig {
                learning_rate: 1e-3,
                epochs: 5,
                n_neg: 8,
                seed: 7,
                eval_every: 100,
                max_steps: None,
                select_recall_k: 100,
            },
            threads: None,
        }
    }

    /// Sequence limits, history window, retrieval depth and optimisation
    /// settings of the original large-scale setup, for use with real data.
    pub fn paper_defaults() -> Self {
        Self {
            profile: "paper-defaults".into(),
            max_question_tokens: 125,
            max_passage_tokens: 384,
            max_seq: 512,
            max_history_turns: 11,
            top_r: 100,
            train: TrainConfig {
                learning_rate: 5e-5,
                epochs: 3,
                max_steps: Some(90_000),
                ..TrainConfig::default()
            },
            ..Self::desk()
        }
    }

    pub fn profile(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "paper-defaults" => Ok(Self::paper_defaults()),
            other => Err(HarError::InvalidConfig(format!("unknown profile {other:?}"))),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let base = match value.get("profile").and_then(|p| p.as_str()) {
            Some(p) => Self::profile(p)?,
            None => Self::desk(),
        };
        let mut merged = serde_json::to_value(base)?;
        merge_json(&mut merged, value);
        Ok(serde_json::from_value(merged)?)
    }

    /// Applies a new seed to every seeded stage.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.train.seed = seed;
        self.encoder.seed = None;
        self
    }

    pub fn layout(&self) -> SequenceLayout {
        SequenceLayout::new(self.max_question_tokens)
    }

    pub fn validate(&self) -> Result<()> {
        let row = self.layout().row_len();
        if row > self.max_seq {
            return Err(HarError::InvalidConfig(format!(
                "3M+3 = {row} exceeds max_seq {}",
                self.max_seq
            )));
        }
        if self.max_passage_tokens + 1 > self.max_seq {
            return Err(HarError::InvalidConfig("max_passage_tokens + 1 exceeds max_seq".into()));
        }
        if self.max_question_tokens == 0 || self.max_history_turns == 0 || self.top_r == 0 {
            return Err(HarError::InvalidConfig("M, N and R must be >= 1".into()));
        }
        self.train.validate()
    }

    pub fn encoder_config(&self, vocab_size: usize) -> EncoderConfig {
        let e = &self.encoder;
        EncoderConfig {
            vocab_size,
            hidden_size: e.hidden_size,
            embedding_size: e.embedding_size,
            layers: e.layers,
            heads: e.heads,
            ffn_multiplier: e.ffn_multiplier,
            max_positions: self.layout().row_len().max(self.max_passage_tokens + 1),
            segment_vocab_size: self.max_history_turns,
            seed: e.seed.unwrap_or(self.seed),
        }
    }

    /// Digest of everything except paths and thread count.
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.paths = Paths::default();
        c.threads = None;
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }
}

fn merge_json(base: &mut serde_json::Value, over: serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

pub const TRAIN_FILE: &str = "train.jsonl";
pub const DEV_FILE: &str = "dev.jsonl";
pub const TEST_FILE: &str = "test.jsonl";
pub const PASSAGES_FILE: &str = "passages.jsonl";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const ENCODER_FILE: &str = "encoder.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataSummary {
    pub config_hash: String,
    pub seed: u64,
    pub questions: usize,
    pub passages: usize,
    pub vocab_size: usize,
    pub train: DialogStats,
    pub dev: DialogStats,
    pub test: DialogStats,
}

fn ensure_writable(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(HarError::AlreadyExists(path.to_path_buf()));
    }
    Ok(())
}

pub fn cmd_gen_data(config: &RunConfig, force: bool) -> Result<DataSummary> {
    config.validate()?;
    let dir = &config.paths.data_dir;
    ensure_writable(&dir.join(TRAIN_FILE), force)?;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;

    let corpus = gen_synthetic(&config.synthetic, config.seed)?;
    let splits = corpus.splits();
    write_dialogs(&dir.join(TRAIN_FILE), &splits.train)?;
    write_dialogs(&dir.join(DEV_FILE), &splits.dev)?;
    write_dialogs(&dir.join(TEST_FILE), &splits.test)?;
    write_passages(&dir.join(PASSAGES_FILE), &corpus.passages)?;
    corpus.vocab.save(&dir.join(VOCAB_FILE))?;

    let summary = DataSummary {
        config_hash: config.config_hash(),
        seed: config.seed,
        questions: corpus.dialogs.iter().map(Dialog::len).sum(),
        passages: corpus.passages.len(),
        vocab_size: corpus.vocab.len(),
        train: dialog_stats(&splits.train),
        dev: dialog_stats(&splits.dev),
        test: dialog_stats(&splits.test),
    };
    let path = dir.join("summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n").map_err(io_err(&path))?;
    Ok(summary)
}

/// Loaded corpus files.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub train: Vec<Dialog>,
    pub dev: Vec<Dialog>,
    pub test: Vec<Dialog>,
    pub passages: PassageCollection,
    pub vocab: Vocabulary,
}

pub fn load_corpus(config: &RunConfig) -> Result<Corpus> {
    let dir = &config.paths.data_dir;
    let vocab = Vocabulary::load(&dir.join(VOCAB_FILE))?;
    let mut passages = load_passages(&dir.join(PASSAGES_FILE))?;
    passages.tokenize_with(&vocab, config.max_passage_tokens);
    Ok(Corpus {
        train: load_dialogs(&dir.join(TRAIN_FILE))?,
        dev: load_dialogs(&dir.join(DEV_FILE))?,
        test: load_dialogs(&dir.join(TEST_FILE))?,
        passages,
        vocab,
    })
}

// ---------------------------------------------------------------------------
// Passage store
// ---------------------------------------------------------------------------

pub fn cmd_encode_passages(config: &RunConfig, force: bool) -> Result<StoreManifest> {
    config.validate()?;
    let dir = &config.paths.store_dir;
    ensure_writable(&dir.join(crate::index::VECTORS_FILE), force)?;
    let corpus = load_corpus(config)?;
    let enc_cfg = config.encoder_config(corpus.vocab.len());
    let encoder = init_encoder(&enc_cfg)?;
    let store = build_store(&corpus.passages, &encoder)?;
    let manifest = StoreManifest::for_encoder(&enc_cfg, &store);
    store.write(dir, &manifest)?;
    EncoderCheckpoint::new(&enc_cfg).save(&dir.join(ENCODER_FILE))?;
    Ok(manifest)
}

/// Everything needed to compose and score queries.
pub struct Workspace {
    pub config: RunConfig,
    pub corpus: Corpus,
    pub encoder: EncoderWeights,
    pub store: VectorStore,
}

impl Workspace {
    /// Loads corpus and store; the store must match this config's encoder.
    pub fn open(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let corpus = load_corpus(config)?;
        let enc_cfg = config.encoder_config(corpus.vocab.len());
        let ck = EncoderCheckpoint::load(&config.paths.store_dir.join(ENCODER_FILE))?;
        if ck.config != enc_cfg {
            return Err(HarError::FingerprintMismatch {
                expected: enc_cfg.fingerprint(),
                found: ck.config_hash,
            });
        }
        let (store, manifest) = VectorStore::read(&config.paths.store_dir)?;
        manifest.check(&enc_cfg)?;
        let encoder = init_encoder(&enc_cfg)?;
        Ok(Self {
            config: config.clone(),
            corpus,
            encoder,
            store,
        })
    }

    pub fn encode(&self, dialogs: &[Dialog], variant: &Variant) -> Result<Vec<EncodedQuery>> {
        encode_queries(
            dialogs,
            &self.corpus.vocab,
            &self.encoder,
            &self.config.layout(),
            &variant.batch_config(self.config.max_history_turns),
        )
    }

    pub fn split(&self, name: &str) -> Result<&[Dialog]> {
        match name {
            "train" => Ok(&self.corpus.train),
            "dev" => Ok(&self.corpus.dev),
            "test" => Ok(&self.corpus.test),
            other => Err(HarError::InvalidConfig(format!("unknown split {other:?}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Training / evaluation
// ---------------------------------------------------------------------------

pub fn variant_file_stem(variant: &Variant) -> String {
    variant.label().replace(',', "_")
}

pub fn checkpoint_path(config: &RunConfig, variant: &Variant) -> PathBuf {
    config
        .paths
        .checkpoint_dir
        .join(format!("{}.json", variant_file_stem(variant)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainSummary {
    pub variant: String,
    pub config_hash: String,
    pub steps: usize,
    pub best_step: usize,
    pub best_dev_recall: f64,
    pub checkpoint: PathBuf,
}

/// Trains one variant in memory.
pub fn train_variant(ws: &Workspace, variant: Variant) -> Result<TrainState> {
    let train_q = ws.encode(&ws.corpus.train, &variant)?;
    let dev_q = ws.encode(&ws.corpus.dev, &variant)?;
    let head = AttentionHead::new(variant, &ws.encoder);
    train(&train_q, &dev_q, &ws.store, head, &ws.config.train)
}

pub fn cmd_train(ws: &Workspace, variant: Variant) -> Result<(TrainState, TrainSummary)> {
    let state = train_variant(ws, variant)?;
    let dir = &ws.config.paths.checkpoint_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = checkpoint_path(&ws.config, &variant);
    HeadCheckpoint {
        head: state.best.head.clone(),
        config_hash: ws.config.config_hash(),
    }
    .save(&path)?;
    let log = dir.join(format!("{}.log.jsonl", variant_file_stem(&variant)));
    let mut text = state.log_lines().join("\n");
    text.push('\n');
    std::fs::write(&log, text).map_err(io_err(&log))?;
    let summary = TrainSummary {
        variant: variant.label(),
        config_hash: ws.config.config_hash(),
        steps: state.step,
        best_step: state.best.step,
        best_dev_recall: state.best.recall,
        checkpoint: path,
    };
    Ok((state, summary))
}

pub fn load_head(ws: &Workspace, variant: &Variant) -> Result<AttentionHead> {
    let ck = HeadCheckpoint::load(&checkpoint_path(&ws.config, variant))?;
    if ck.config_hash != ws.config.config_hash() {
        return Err(HarError::FingerprintMismatch {
            expected: ws.config.config_hash(),
            found: ck.config_hash,
        });
    }
    if ck.head.embedding_size() != ws.store.dim() || ck.head.projection.cols != ws.encoder.hidden_size() {
        return Err(HarError::DimensionMismatch {
            expected: ws.store.dim(),
            got: ck.head.embedding_size(),
        });
    }
    Ok(ck.head)
}

pub fn eval_head(ws: &Workspace, head: &AttentionHead, split: &str) -> Result<RunReport> {
    let queries = ws.encode(ws.split(split)?, &head.variant())?;
    evaluate_run(&queries, head, &ws.store, ws.config.top_r, &DEFAULT_KS, &ws.config.config_hash())
}

pub fn cmd_eval(ws: &Workspace, variant: Variant, split: &str) -> Result<(RunReport, PathBuf)> {
    let head = load_head(ws, &variant)?;
    let report = eval_head(ws, &head, split)?;
    let dir = &ws.config.paths.report_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(format!("{}.json", variant_file_stem(&variant)));
    report.save(&path)?;
    Ok((report, path))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrieveOutput {
    pub dialog_id: String,
    pub turn_index: usize,
    pub variant: String,
    pub config_hash: String,
    pub turn_ids: Vec<usize>,
    pub alphas: Vec<f64>,
    pub ranked: Vec<RankedPid>,
    pub rr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedPid {
    pub pid: String,
    pub score: f64,
}

pub fn cmd_retrieve(
    ws: &Workspace,
    variant: Variant,
    dialogs_path: &Path,
    dialog_id: Option<&str>,
    k: usize,
) -> Result<RetrieveOutput> {
    let head = load_head(ws, &variant)?;
    let dialogs = load_dialogs(dialogs_path)?;
    let dialog = match dialog_id {
        Some(id) => dialogs.iter().find(|d| d.dialog_id == id),
        None => dialogs.first(),
    }
    .ok_or_else(|| HarError::InvalidConfig(format!("dialog {dialog_id:?} not found")))?;
    let q = crate::har::compose_query(
        dialog,
        k,
        &ws.corpus.vocab,
        &ws.encoder,
        &head,
        &ws.config.layout(),
        ws.config.max_history_turns,
    )?;
    let ranked = crate::index::search(&ws.store, &q.q_hat, ws.config.top_r)?;
    let gold = &dialog.turn(k).expect("validated by compose_query").gold_pids;
    let rr = if gold.is_empty() {
        None
    } else {
        let g: Vec<&str> = gold.iter().map(String::as_str).collect();
        Some(crate::eval::reciprocal_rank(&ranked.pids(), &g)?)
    };
    Ok(RetrieveOutput {
        dialog_id: dialog.dialog_id.clone(),
        turn_index: k,
        variant: variant.label(),
        config_hash: ws.config.config_hash(),
        turn_ids: q.turn_ids,
        alphas: q.alphas,
        ranked: ranked
            .hits
            .into_iter()
            .map(|h| RankedPid {
                pid: h.pid,
                score: h.score,
            })
            .collect(),
        rr,
    })
}

// ---------------------------------------------------------------------------
// Ablation matrix
// ---------------------------------------------------------------------------

/// Variants of the ablation matrix in table order: for each granularity the
/// full model, then without positional segments, then with α = 1, then both.
pub fn ablation_variants() -> Vec<Variant> {
    let mut out = Vec::new();
    for mode in [Granularity::Fine, Granularity::Coarse] {
        for (posseg, attn) in [
            (true, AttentionMode::Soft),
            (false, AttentionMode::Soft),
            (true, AttentionMode::AlphaOne),
            (false, AttentionMode::AlphaOne),
        ] {
            out.push(Variant::new(mode, posseg, attn));
        }
    }
    out
}

/// Row name in the ablation table.
pub fn ablation_row_name(v: &Variant) -> String {
    let base = match v.mode {
        Granularity::Fine => "HAR w/ fine-grained attention",
        Granularity::Coarse => "HAR w/ coarse-grained attention",
    };
    match (v.posseg_enabled, v.attention_mode) {
        (true, AttentionMode::Soft) => base.to_string(),
        (false, AttentionMode::Soft) => "  w/o PosSeg".to_string(),
        (true, AttentionMode::AlphaOne) => "  w/o Soft Attention (α=1)".to_string(),
        (false, AttentionMode::AlphaOne) => "  w/o PosSeg, w/o Soft Attention (α=1)".to_string(),
        (_, AttentionMode::Uniform) => format!("  {}", v.label()),
    }
}

/// Published numbers, printed next to the table for orientation only.
pub fn reference_values(v: &Variant) -> Option<(f64, f64)> {
    match (v.mode, v.posseg_enabled, v.attention_mode) {
        (Granularity::Fine, true, AttentionMode::Soft) => Some((0.1995, 0.2742)),
        (Granularity::Fine, false, AttentionMode::Soft) => Some((0.1902, 0.2635)),
        (Granularity::Coarse, true, AttentionMode::Soft) => Some((0.1966, 0.2812)),
        (Granularity::Coarse, false, AttentionMode::Soft) => Some((0.1960, 0.2819)),
        (Granularity::Coarse, true, AttentionMode::AlphaOne) => Some((0.1948, 0.2773)),
        _ => None,
    }
}

pub const BASELINE_REFERENCE: (f64, f64) = (0.2166, 0.3045);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub name: String,
    pub variant: String,
    pub mrr: f64,
    pub recall: f64,
    pub recall_at_10: f64,
    pub reference_mrr: Option<f64>,
    pub reference_recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationTable {
    pub config_hash: String,
    pub split: String,
    pub recall_k: usize,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "{:<42} {:>8} {:>10} {:>10}   {}\n",
            "Model", "MRR", format!("Recall@{}", self.recall_k), "Recall@10", "reference MRR / Recall"
        ));
        s.push_str(&format!("{}\n", "-".repeat(100)));
        for r in &self.rows {
            let reference = match (r.reference_mrr, r.reference_recall) {
                (Some(m), Some(rc)) => format!("({m:.4} / {rc:.4})"),
                _ => "-".into(),
            };
            s.push_str(&format!(
                "{:<42} {:>8.4} {:>10.4} {:>10.4}   {}\n",
                r.name, r.mrr, r.recall, r.recall_at_10, reference
            ));
        }
        s.push_str(&format!(
            "\nreference baseline (history concatenation): MRR {:.4} / Recall {:.4}\n\
             reference values come from a full-scale run on real data and are not comparable.\n",
            BASELINE_REFERENCE.0, BASELINE_REFERENCE.1
        ));
        s
    }
}

pub fn cmd_ablate(ws: &Workspace, train_missing: bool, split: &str) -> Result<(AblationTable, Vec<RunReport>)> {
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let report_dir = &ws.config.paths.report_dir;
    std::fs::create_dir_all(report_dir).map_err(io_err(report_dir))?;
    let recall_k = ws.config.top_r.min(100);
    for v in ablation_variants() {
        let path = checkpoint_path(&ws.config, &v);
        if !path.exists() {
            if !train_missing {
                return Err(HarError::Io {
                    path,
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "checkpoint missing (use --train-missing)"),
                });
            }
            cmd_train(ws, v)?;
        }
        let head = load_head(ws, &v)?;
        let report = eval_head(ws, &head, split)?;
        report.save(&report_dir.join(format!("{}.json", variant_file_stem(&v))))?;
        let reference = reference_values(&v);
        rows.push(AblationRow {
            name: ablation_row_name(&v),
            variant: v.label(),
            mrr: report.mrr,
            recall: report.recall_at(recall_k).unwrap_or(0.0),
            recall_at_10: report.recall_at(10).unwrap_or(0.0),
            reference_mrr: reference.map(|r| r.0),
            reference_recall: reference.map(|r| r.1),
        });
        reports.push(report);
    }
    let table = AblationTable {
        config_hash: ws.config.config_hash(),
        split: split.to_string(),
        recall_k,
        rows,
    };
    let jpath = report_dir.join("ablation.json");
    std::fs::write(&jpath, serde_json::to_string_pretty(&table)? + "\n").map_err(io_err(&jpath))?;
    let tpath = report_dir.join("ablation.txt");
    std::fs::write(&tpath, table.render()).map_err(io_err(&tpath))?;
    Ok((table, reports))
}

/// Per-query results for a head on a split (no files written).
pub fn query_results(ws: &Workspace, head: &AttentionHead, split: &str) -> Result<Vec<QueryResult>> {
    let queries = ws.encode(ws.split(split)?, &head.variant())?;
    evaluate_queries(&queries, head, &ws.store, ws.config.top_r, &DEFAULT_KS)
}
