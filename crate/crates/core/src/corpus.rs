//! Conversational datasets, passage collections, tokenization and the
//! synthetic topic-return corpus generator.
//!
//! On-disk formats are JSON lines:
//!
//! * `dialogs.jsonl`: one turn per line,
//!   `{"dialog_id", "turn_index", "question", "rewritten_first_question"?, "gold_pids"}`
//! * `passages.jsonl`: `{"pid", "text"}`
//! * `vocab.txt`: one token per line, line number is the id.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarError, Result};

pub const PAD: u32 = 0;
pub const CLS: u32 = 1;
pub const SEP: u32 = 2;
pub const UNK: u32 = 3;
pub const RESERVED: [&str; 4] = ["[PAD]", "[CLS]", "[SEP]", "[UNK]"];

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

/// Lowercases and splits on whitespace; every punctuation character becomes
/// its own token.
pub fn split_words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            out.push(ch.to_string());
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Token ↔ id map with four reserved ids at the front.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocabulary {
    pub fn new() -> Self {
        let tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self { tokens, index }
    }

    /// Builds a vocabulary from texts; ids follow first occurrence.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut vocab = Self::new();
        for text in texts {
            for w in split_words(text) {
                vocab.insert(&w);
            }
        }
        vocab
    }

    pub fn insert(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.tokens.len() as u32;
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// Maps text to ids. Out-of-vocabulary words become `[UNK]`. Raw text can
    /// never produce a reserved id because brackets split into their own tokens.
    pub fn tokenize(&self, text: &str) -> Vec<u32> {
        split_words(text)
            .iter()
            .map(|w| match self.index.get(w.as_str()) {
                Some(&id) if id > UNK => id,
                _ => UNK,
            })
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = BufWriter::new(File::create(path).map_err(io_err(path))?);
        for t in &self.tokens {
            writeln!(f, "{t}").map_err(io_err(path))?;
        }
        f.flush().map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(io_err(path))?;
        let mut vocab = Self::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(io_err(path))?;
            if i < RESERVED.len() {
                if line != RESERVED[i] {
                    return Err(HarError::Parse {
                        path: path.into(),
                        line: i + 1,
                        message: format!("expected reserved token {}, found {line:?}", RESERVED[i]),
                    });
                }
                continue;
            }
            if vocab.index.contains_key(&line) {
                return Err(HarError::Parse {
                    path: path.into(),
                    line: i + 1,
                    message: format!("duplicate token {line:?}"),
                });
            }
            vocab.insert(&line);
        }
        Ok(vocab)
    }
}

/// Free-function form of [`Vocabulary::tokenize`].
pub fn tokenize(text: &str, vocab: &Vocabulary) -> Vec<u32> {
    vocab.tokenize(text)
}

// ---------------------------------------------------------------------------
// Dialogs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub dialog_id: String,
    pub turn_index: usize,
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewritten_first_question: Option<String>,
    pub gold_pids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dialog {
    pub dialog_id: String,
    /// Sorted by `turn_index`, consecutive from 1.
    pub turns: Vec<Turn>,
}

impl Dialog {
    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    /// 1-based turn access.
    pub fn turn(&self, k: usize) -> Option<&Turn> {
        k.checked_sub(1).and_then(|i| self.turns.get(i))
    }

    /// Question text used when building encoder rows; turn 1 is replaced by
    /// its rewrite when one is present.
    pub fn question_text(&self, k: usize) -> Option<&str> {
        let t = self.turn(k)?;
        if k == 1 {
            if let Some(rw) = &t.rewritten_first_question {
                return Some(rw);
            }
        }
        Some(&t.question)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DialogStats {
    pub dialogs: usize,
    pub questions: usize,
    pub avg_turns_per_dialog: f64,
    pub avg_question_tokens: f64,
    pub max_turns: usize,
}

pub fn dialog_stats(dialogs: &[Dialog]) -> DialogStats {
    let questions: usize = dialogs.iter().map(Dialog::len).sum();
    let tokens: usize = dialogs
        .iter()
        .flat_map(|d| &d.turns)
        .map(|t| split_words(&t.question).len())
        .sum();
    DialogStats {
        dialogs: dialogs.len(),
        questions,
        avg_turns_per_dialog: if dialogs.is_empty() {
            0.0
        } else {
            questions as f64 / dialogs.len() as f64
        },
        avg_question_tokens: if questions == 0 {
            0.0
        } else {
            tokens as f64 / questions as f64
        },
        max_turns: dialogs.iter().map(Dialog::len).max().unwrap_or(0),
    }
}

/// Groups turns into dialogs (first-appearance order) and validates indices.
pub fn group_turns(turns: Vec<Turn>) -> Result<Vec<Dialog>> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<Turn>> = HashMap::new();
    for t in turns {
        if !groups.contains_key(&t.dialog_id) {
            order.push(t.dialog_id.clone());
        }
        groups.entry(t.dialog_id.clone()).or_default().push(t);
    }
    let mut dialogs = Vec::with_capacity(order.len());
    for id in order {
        let mut turns = groups.remove(&id).unwrap_or_default();
        turns.sort_by_key(|t| t.turn_index);
        for (pos, t) in turns.iter().enumerate() {
            if pos > 0 && turns[pos - 1].turn_index == t.turn_index {
                return Err(HarError::DuplicateTurn {
                    dialog_id: id,
                    turn_index: t.turn_index,
                });
            }
            if t.turn_index != pos + 1 {
                return Err(HarError::NonConsecutiveTurns {
                    dialog_id: id,
                    found: t.turn_index,
                    expected: pos + 1,
                });
            }
        }
        dialogs.push(Dialog {
            dialog_id: id,
            turns,
        });
    }
    Ok(dialogs)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let f = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| HarError::Parse {
            path: path.into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for row in rows {
        serde_json::to_writer(&mut f, &row)?;
        f.write_all(b"\n").map_err(io_err(path))?;
    }
    f.flush().map_err(io_err(path))
}

pub fn load_dialogs(path: &Path) -> Result<Vec<Dialog>> {
    let turns: Vec<Turn> = read_jsonl(path)?;
    for t in &turns {
        if t.turn_index == 0 {
            return Err(HarError::NonConsecutiveTurns {
                dialog_id: t.dialog_id.clone(),
                found: 0,
                expected: 1,
            });
        }
    }
    group_turns(turns)
}

pub fn write_dialogs(path: &Path, dialogs: &[Dialog]) -> Result<()> {
    write_jsonl(path, dialogs.iter().flat_map(|d| &d.turns))
}

// ---------------------------------------------------------------------------
// Passages
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Passage {
    pub pid: String,
    pub text: String,
    /// Filled by [`PassageCollection::tokenize_with`]; empty until then.
    pub token_ids: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct PassageRecord<'a> {
    pid: std::borrow::Cow<'a, str>,
    text: std::borrow::Cow<'a, str>,
}

/// Passages in insertion order, addressable by pid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PassageCollection {
    passages: Vec<Passage>,
    index: HashMap<String, usize>,
}

impl PassageCollection {
    pub fn new(items: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut coll = Self::default();
        for (pid, text) in items {
            if pid.is_empty() {
                return Err(HarError::InvalidConfig("empty passage id".into()));
            }
            if text.trim().is_empty() {
                return Err(HarError::EmptyPassage(pid));
            }
            if coll.index.contains_key(&pid) {
                return Err(HarError::DuplicatePid(pid));
            }
            coll.index.insert(pid.clone(), coll.passages.len());
            coll.passages.push(Passage {
                pid,
                text,
                token_ids: Vec::new(),
            });
        }
        Ok(coll)
    }

    pub fn len(&self) -> usize {
        self.passages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passages.is_empty()
    }

    pub fn get(&self, pid: &str) -> Option<&Passage> {
        self.index.get(pid).map(|&i| &self.passages[i])
    }

    pub fn position(&self, pid: &str) -> Option<usize> {
        self.index.get(pid).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Passage> {
        self.passages.iter()
    }

    pub fn as_slice(&self) -> &[Passage] {
        &self.passages
    }

    /// Tokenizes every passage, truncating to `max_tokens`.
    pub fn tokenize_with(&mut self, vocab: &Vocabulary, max_tokens: usize) {
        for p in &mut self.passages {
            let mut ids = vocab.tokenize(&p.text);
            ids.truncate(max_tokens);
            p.token_ids = ids;
        }
    }
}

pub fn load_passages(path: &Path) -> Result<PassageCollection> {
    let rows: Vec<PassageRecord<'static>> = read_jsonl(path)?;
    PassageCollection::new(
        rows.into_iter()
            .map(|r| (r.pid.into_owned(), r.text.into_owned())),
    )
}

pub fn write_passages(path: &Path, passages: &PassageCollection) -> Result<()> {
    write_jsonl(
        path,
        passages.iter().map(|p| PassageRecord {
            pid: (&p.pid).into(),
            text: (&p.text).into(),
        }),
    )
}

// ---------------------------------------------------------------------------
// Synthetic topic-return corpus
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_dialogs: usize,
    pub turns_per_dialog: usize,
    pub n_passages: usize,
    /// Turn `k > gap` returns to the topic of turn `k - gap`.
    pub topic_return_gap: usize,
    /// Number of distinct content (entity) words.
    pub content_vocab_size: usize,
    pub key_words_per_passage: usize,
    pub dev_fraction: f64,
    pub test_fraction: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_dialogs: 200,
            turns_per_dialog: 4,
            n_passages: 500,
            topic_return_gap: 3,
            content_vocab_size: 1500,
            key_words_per_passage: 5,
            dev_fraction: 0.1,
            test_fraction: 0.2,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarError::InvalidConfig(m));
        if self.topic_return_gap == 0 {
            return bad("topic_return_gap must be >= 1".into());
        }
        if self.topic_return_gap >= self.turns_per_dialog {
            return bad(format!(
                "topic_return_gap {} must be < turns_per_dialog {}",
                self.topic_return_gap, self.turns_per_dialog
            ));
        }
        if self.turns_per_dialog > 2 * self.topic_return_gap {
            return bad(format!(
                "turns_per_dialog {} > 2 * topic_return_gap would make a return target another return turn",
                self.turns_per_dialog
            ));
        }
        if self.n_passages < self.topic_return_gap {
            return bad(format!(
                "n_passages {} < {} distinct topics needed per dialog",
                self.n_passages, self.topic_return_gap
            ));
        }
        if self.key_words_per_passage < 2 || self.content_vocab_size < self.key_words_per_passage {
            return bad("need key_words_per_passage >= 2 and content_vocab_size >= key_words_per_passage".into());
        }
        if self.n_dialogs == 0 {
            return bad("n_dialogs must be >= 1".into());
        }
        if !(0.0..1.0).contains(&(self.dev_fraction + self.test_fraction)) {
            return bad("dev_fraction + test_fraction must lie in [0, 1)".into());
        }
        Ok(())
    }
}

const SYLLABLE_ONSETS: &[&str] = &[
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
];
const SYLLABLE_VOWELS: &[&str] = &["a", "e", "i", "o", "u"];

/// Two-slot content question templates.
const QUESTION_TEMPLATES: &[&str] = &[
    "what is {a} known for in {b} ?",
    "where did {a} meet {b} ?",
    "when was {a} part of {b} ?",
    "how did {a} affect {b} ?",
    "who led {a} and {b} ?",
    "what did {a} do with {b} ?",
    "why was {a} in {b} ?",
];

/// Referentially impoverished follow-ups.
const RETURN_TEMPLATES: &[&str] = &[
    "what happened to it after that ?",
    "did they ever go back there ?",
    "what else was it known for ?",
    "tell me more about them .",
    "and what about that one ?",
    "was it ever there again ?",
    "what did they do then ?",
];

const PASSAGE_CLAUSES: &[&str] = &[
    "{w} is often mentioned in old records",
    "the story of {w} was written long ago",
    "many visitors came to see {w}",
    "{w} was known across the region",
    "people still study {w} today",
    "the name {w} appears on several maps",
    "a group formed around {w} in later years",
];

/// A generated corpus: every dialog, the passage collection, and a vocabulary
/// built from the training split plus the passages.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub dialogs: Vec<Dialog>,
    pub passages: PassageCollection,
    pub vocab: Vocabulary,
    /// Content (entity) words; everything else is a function word.
    pub content_words: BTreeSet<String>,
    pub config: SyntheticConfig,
}

/// Contiguous dialog split: train, then dev, then test.
#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Vec<Dialog>,
    pub dev: Vec<Dialog>,
    pub test: Vec<Dialog>,
}

pub fn split_dialogs(dialogs: &[Dialog], dev_fraction: f64, test_fraction: f64) -> Splits {
    let n = dialogs.len();
    let n_test = (n as f64 * test_fraction).round() as usize;
    let n_dev = (n as f64 * dev_fraction).round() as usize;
    let n_train = n.saturating_sub(n_dev + n_test);
    Splits {
        train: dialogs[..n_train].to_vec(),
        dev: dialogs[n_train..(n_train + n_dev).min(n)].to_vec(),
        test: dialogs[(n_train + n_dev).min(n)..].to_vec(),
    }
}

impl SyntheticCorpus {
    pub fn splits(&self) -> Splits {
        split_dialogs(
            &self.dialogs,
            self.config.dev_fraction,
            self.config.test_fraction,
        )
    }
}

fn pseudo_words(n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let syllables: Vec<String> = SYLLABLE_ONSETS
        .iter()
        .flat_map(|o| SYLLABLE_VOWELS.iter().map(move |v| format!("{o}{v}")))
        .collect();
    let reserved: HashSet<String> = QUESTION_TEMPLATES
        .iter()
        .chain(RETURN_TEMPLATES)
        .chain(PASSAGE_CLAUSES)
        .flat_map(|t| split_words(t))
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.random_range(2..=3);
        let w: String = (0..len)
            .map(|_| syllables.choose(rng).expect("non-empty").as_str())
            .collect();
        if !reserved.contains(w.as_str()) && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Generates the topic-shift / topic-return corpus.
///
/// Turns `1..=gap` each ask about a different passage using two of its key
/// words. Turn `k > gap` asks a pronoun-style question with no content words
/// whose gold passage is that of turn `k - gap`. Passages chosen within one
/// dialog have disjoint key-word sets, so a return turn's gold passage shares
/// content words with turn `k - gap` only.
pub fn gen_synthetic(config: &SyntheticConfig, seed: u64) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let content = pseudo_words(config.content_vocab_size, &mut rng);

    let width = digits(config.n_passages);
    let mut keys: Vec<Vec<usize>> = Vec::with_capacity(config.n_passages);
    let mut items = Vec::with_capacity(config.n_passages);
    let all_idx: Vec<usize> = (0..content.len()).collect();
    for j in 0..config.n_passages {
        let picked: Vec<usize> = all_idx
            .choose_multiple(&mut rng, config.key_words_per_passage)
            .copied()
            .collect();
        // clause i always carries key word i
        let text = picked
            .iter()
            .zip(PASSAGE_CLAUSES.iter().cycle())
            .map(|(&w, c)| c.replace("{w}", &content[w]))
            .collect::<Vec<_>>()
            .join(" . ")
            + " .";
        items.push((format!("p{j:0width$}"), text));
        keys.push(picked);
    }
    let passages = PassageCollection::new(items)?;

    let gap = config.topic_return_gap;
    let dwidth = digits(config.n_dialogs);
    let mut dialogs = Vec::with_capacity(config.n_dialogs);
    for di in 0..config.n_dialogs {
        let dialog_id = format!("d{di:0dwidth$}");
        let topics = pick_disjoint_topics(&keys, gap, &mut rng);
        let mut turns = Vec::with_capacity(config.turns_per_dialog);
        for k in 1..=config.turns_per_dialog {
            let (gold, question) = if k <= gap {
                let j = topics[k - 1];
                let pair: Vec<&usize> = keys[j].choose_multiple(&mut rng, 2).collect();
                let tpl = QUESTION_TEMPLATES.choose(&mut rng).expect("non-empty");
                let q = tpl
                    .replace("{a}", &content[*pair[0]])
                    .replace("{b}", &content[*pair[1]]);
                (j, q)
            } else {
                let j = topics[(k - gap) - 1];
                let q = RETURN_TEMPLATES.choose(&mut rng).expect("non-empty").to_string();
                (j, q)
            };
            turns.push(Turn {
                dialog_id: dialog_id.clone(),
                turn_index: k,
                question,
                rewritten_first_question: None,
                gold_pids: vec![passages.as_slice()[gold].pid.clone()],
            });
        }
        dialogs.push(Dialog { dialog_id, turns });
    }

    let mut corpus = SyntheticCorpus {
        dialogs,
        passages,
        vocab: Vocabulary::new(),
        content_words: content.into_iter().collect(),
        config: config.clone(),
    };
    let splits = corpus.splits();
    corpus.vocab = Vocabulary::build(
        splits
            .train
            .iter()
            .flat_map(|d| d.turns.iter().map(|t| t.question.as_str()))
            .chain(corpus.passages.iter().map(|p| p.text.as_str())),
    );
    Ok(corpus)
}

fn pick_disjoint_topics(keys: &[Vec<usize>], n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    loop {
        let mut chosen: Vec<usize> = Vec::with_capacity(n);
        let mut used: HashSet<usize> = HashSet::new();
        let mut ok = true;
        for _ in 0..n {
            let mut found = None;
            for _attempt in 0..64 {
                let j = rng.random_range(0..keys.len());
                if !chosen.contains(&j) && keys[j].iter().all(|w| !used.contains(w)) {
                    found = Some(j);
                    break;
                }
            }
            match found {
                Some(j) => {
                    used.extend(keys[j].iter().copied());
                    chosen.push(j);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return chosen;
        }
    }
}

fn digits(n: usize) -> usize {
    n.saturating_sub(1).max(1).to_string().len().max(4)
}

/// Number of distinct content words shared by two texts.
pub fn content_overlap(a: &str, b: &str, content: &BTreeSet<String>) -> usize {
    let wa: HashSet<String> = split_words(a)
        .into_iter()
        .filter(|w| content.contains(w))
        .collect();
    split_words(b)
        .into_iter()
        .filter(|w| content.contains(w))
        .collect::<HashSet<_>>()
        .intersection(&wa)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_question() {
        assert_eq!(
            split_words("Where was she born?"),
            vec!["where", "was", "she", "born", "?"]
        );
        let vocab = Vocabulary::build(["where was she born ?"]);
        let ids = vocab.tokenize("Where was she born?");
        assert_eq!(ids.len(), 5);
        assert!(ids.iter().all(|&i| i > UNK));
        assert_eq!(ids, vocab.tokenize("Where was she born?"));
    }

    #[test]
    fn tokenize_empty_and_unknown() {
        let vocab = Vocabulary::build(["hello"]);
        assert!(vocab.tokenize("").is_empty());
        assert_eq!(vocab.tokenize("hello stranger"), vec![4, UNK]);
    }

    #[test]
    fn reserved_never_from_text() {
        let vocab = Vocabulary::build(["[CLS] [SEP] [PAD] [UNK] cls"]);
        for id in vocab.tokenize("[CLS] x [SEP] [PAD]") {
            assert!(id >= UNK);
        }
        assert_eq!(vocab.id("[CLS]"), Some(CLS));
    }

    #[test]
    fn duplicate_pid_rejected() {
        let err = PassageCollection::new([
            ("p1".to_string(), "a".to_string()),
            ("p1".to_string(), "b".to_string()),
        ])
        .unwrap_err();
        assert!(err.to_string().contains("p1"));
    }

    #[test]
    fn empty_passage_rejected() {
        let err = PassageCollection::new([("p1".to_string(), "  ".to_string())]).unwrap_err();
        assert!(matches!(err, HarError::EmptyPassage(_)));
    }

    fn turn(d: &str, k: usize) -> Turn {
        Turn {
            dialog_id: d.into(),
            turn_index: k,
            question: format!("q{k}"),
            rewritten_first_question: None,
            gold_pids: vec!["p1".into()],
        }
    }

    #[test]
    fn group_sorts_and_validates() {
        let ds = group_turns(vec![turn("a", 2), turn("b", 1), turn("a", 1)]).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds[0].dialog_id, "a");
        assert_eq!(ds[0].turns[0].turn_index, 1);

        let err = group_turns(vec![turn("a", 1), turn("a", 1)]).unwrap_err();
        assert!(matches!(err, HarError::DuplicateTurn { .. }));
        let err = group_turns(vec![turn("a", 1), turn("a", 3)]).unwrap_err();
        assert!(matches!(err, HarError::NonConsecutiveTurns { .. }));
    }

    #[test]
    fn rewritten_first_question_substitutes() {
        let mut t1 = turn("a", 1);
        t1.rewritten_first_question = Some("full rewrite".into());
        let d = group_turns(vec![t1, turn("a", 2)]).unwrap().remove(0);
        assert_eq!(d.question_text(1), Some("full rewrite"));
        assert_eq!(d.question_text(2), Some("q2"));
        assert_eq!(d.question_text(3), None);
    }

    #[test]
    fn synthetic_config_validation() {
        let mut c = SyntheticConfig::default();
        c.topic_return_gap = 4;
        assert!(gen_synthetic(&c, 1).is_err());
        c.topic_return_gap = 0;
        assert!(gen_synthetic(&c, 1).is_err());
        let c = SyntheticConfig {
            n_passages: 2,
            ..SyntheticConfig::default()
        };
        assert!(gen_synthetic(&c, 1).is_err());
    }

    #[test]
    fn synthetic_is_deterministic() {
        let c = SyntheticConfig {
            n_dialogs: 10,
            n_passages: 30,
            ..SyntheticConfig::default()
        };
        let a = gen_synthetic(&c, 3).unwrap();
        let b = gen_synthetic(&c, 3).unwrap();
        assert_eq!(a.dialogs, b.dialogs);
        assert_eq!(a.passages, b.passages);
        assert_eq!(a.vocab, b.vocab);
    }
}
