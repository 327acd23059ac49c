//! Instance-aware batches: one encoder row per attended history turn, each
//! laid out as `[CLS] q_1 [SEP] q_i [SEP] q_k` with fixed-width question
//! segments.

use serde::{Deserialize, Serialize};

use crate::corpus::{Dialog, Vocabulary, CLS, PAD, SEP};
use crate::error::{HarError, Result};

/// Fixed-width row layout. Every question segment is `max_question_tokens`
/// wide; rows have length `3M + 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceLayout {
    pub max_question_tokens: usize,
}

impl SequenceLayout {
    pub fn new(max_question_tokens: usize) -> Self {
        Self { max_question_tokens }
    }

    pub fn row_len(&self) -> usize {
        3 * self.max_question_tokens + 3
    }

    pub const fn cls_pos(&self) -> usize {
        0
    }

    pub fn first_question(&self) -> std::ops::Range<usize> {
        1..1 + self.max_question_tokens
    }

    pub fn first_sep(&self) -> usize {
        1 + self.max_question_tokens
    }

    pub fn history_question(&self) -> std::ops::Range<usize> {
        let s = self.first_sep() + 1;
        s..s + self.max_question_tokens
    }

    pub fn second_sep(&self) -> usize {
        2 + 2 * self.max_question_tokens
    }

    pub fn current_question(&self) -> std::ops::Range<usize> {
        let s = self.second_sep() + 1;
        s..s + self.max_question_tokens
    }
}

/// Which history turns get a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum HistoryWindow {
    /// The most recent `max_history_turns` turns up to and including `k`.
    #[default]
    Full,
    /// Only the row for `i = k`.
    CurrentOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchConfig {
    /// N: history window size and segment vocabulary size.
    pub max_history_turns: usize,
    pub posseg_enabled: bool,
    #[serde(default)]
    pub window: HistoryWindow,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            max_history_turns: 11,
            posseg_enabled: true,
            window: HistoryWindow::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceBatch {
    pub token_ids: Vec<Vec<u32>>,
    pub segment_ids: Vec<Vec<u32>>,
    pub token_mask: Vec<Vec<bool>>,
    /// Real (non-pad) tokens of `q_k`; identical in every row.
    pub current_token_mask: Vec<Vec<bool>>,
    /// History turn index `i` of each row, strictly increasing, last is `k`.
    pub turn_ids: Vec<usize>,
    pub k: usize,
}

impl InstanceBatch {
    pub fn n_rows(&self) -> usize {
        self.turn_ids.len()
    }

    /// Number of real tokens in `q_k`.
    pub fn active_current_tokens(&self) -> usize {
        self.current_token_mask[0].iter().filter(|&&b| b).count()
    }
}

/// Segment ids for the row of history turn `i` at current turn `k`.
///
/// With positional segments on, `q_k` and the separator in front of it get
/// id 0 and everything before that gets `k - i`, clamped to `n_segments - 1`.
/// Off, the row is all zeros.
pub fn assign_segment_ids(
    i: usize,
    k: usize,
    layout: &SequenceLayout,
    n_segments: usize,
    posseg_enabled: bool,
) -> Vec<u32> {
    let mut seg = vec![0u32; layout.row_len()];
    if posseg_enabled {
        let id = k.saturating_sub(i).min(n_segments.saturating_sub(1)) as u32;
        for s in &mut seg[..layout.second_sep()] {
            *s = id;
        }
    }
    seg
}

fn place(
    ids: &[u32],
    range: std::ops::Range<usize>,
    row: &mut [u32],
    mask: &mut [bool],
) {
    for (slot, &id) in range.zip(ids.iter()) {
        row[slot] = id;
        mask[slot] = true;
    }
}

fn truncated(vocab: &Vocabulary, text: &str, m: usize) -> Vec<u32> {
    let mut ids = vocab.tokenize(text);
    ids.truncate(m);
    ids
}

/// Attended turns for current turn `k`.
pub fn attended_turns(k: usize, config: &BatchConfig) -> std::ops::RangeInclusive<usize> {
    match config.window {
        HistoryWindow::Full => {
            let n = config.max_history_turns.max(1);
            (k + 1).saturating_sub(n).max(1)..=k
        }
        HistoryWindow::CurrentOnly => k..=k,
    }
}

pub fn build_instance_batch(
    dialog: &Dialog,
    k: usize,
    vocab: &Vocabulary,
    layout: &SequenceLayout,
    config: &BatchConfig,
) -> Result<InstanceBatch> {
    if k == 0 || k > dialog.len() {
        return Err(HarError::TurnOutOfRange {
            dialog_id: dialog.dialog_id.clone(),
            k,
            len: dialog.len(),
        });
    }
    let m = layout.max_question_tokens;
    let text = |t: usize| dialog.question_text(t).expect("turn in range");
    let q1 = truncated(vocab, text(1), m);
    let qk = truncated(vocab, text(k), m);
    let len = layout.row_len();

    let turns: Vec<usize> = attended_turns(k, config).collect();
    let mut batch = InstanceBatch {
        token_ids: Vec::with_capacity(turns.len()),
        segment_ids: Vec::with_capacity(turns.len()),
        token_mask: Vec::with_capacity(turns.len()),
        current_token_mask: Vec::with_capacity(turns.len()),
        turn_ids: turns.clone(),
        k,
    };
    for &i in &turns {
        let qi = truncated(vocab, text(i), m);
        let mut row = vec![PAD; len];
        let mut mask = vec![false; len];
        row[layout.cls_pos()] = CLS;
        mask[layout.cls_pos()] = true;
        row[layout.first_sep()] = SEP;
        mask[layout.first_sep()] = true;
        row[layout.second_sep()] = SEP;
        mask[layout.second_sep()] = true;
        place(&q1, layout.first_question(), &mut row, &mut mask);
        place(&qi, layout.history_question(), &mut row, &mut mask);
        place(&qk, layout.current_question(), &mut row, &mut mask);

        let mut current = vec![false; len];
        for slot in layout.current_question().take(qk.len()) {
            current[slot] = true;
        }
        batch.token_ids.push(row);
        batch.token_mask.push(mask);
        batch.current_token_mask.push(current);
        batch.segment_ids.push(assign_segment_ids(
            i,
            k,
            layout,
            config.max_history_turns,
            config.posseg_enabled,
        ));
    }
    Ok(batch)
}
