//! Offline passage vectors, the `vectors.bin` store, and exact top-k
//! inner-product search.
//!
//! Store layout (all little-endian):
//!
//! ```text
//! "HARV" | u32 version = 1 | u32 count | u32 dim | count * dim f32, row-major
//! ```
//!
//! `pids.txt` holds one pid per row and `manifest.json` records the encoder
//! fingerprint so a store built by a different encoder is rejected.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Passage, PassageCollection};
use crate::encoder::{EncoderConfig, EncoderWeights};
use crate::error::{io_err, HarError, Result};

pub const MAGIC: &[u8; 4] = b"HARV";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

pub const VECTORS_FILE: &str = "vectors.bin";
pub const PIDS_FILE: &str = "pids.txt";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    dim: usize,
    pids: Vec<String>,
    data: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreManifest {
    pub encoder_seed: u64,
    pub config_hash: String,
    pub count: usize,
    pub dim: usize,
}

impl StoreManifest {
    pub fn for_encoder(config: &EncoderConfig, store: &VectorStore) -> Self {
        Self {
            encoder_seed: config.seed,
            config_hash: config.fingerprint(),
            count: store.len(),
            dim: store.dim(),
        }
    }

    pub fn check(&self, config: &EncoderConfig) -> Result<()> {
        let expected = config.fingerprint();
        if self.config_hash != expected || self.encoder_seed != config.seed {
            return Err(HarError::FingerprintMismatch {
                expected,
                found: self.config_hash.clone(),
            });
        }
        if self.dim != config.embedding_size {
            return Err(HarError::DimensionMismatch {
                expected: config.embedding_size,
                got: self.dim,
            });
        }
        Ok(())
    }
}

impl VectorStore {
    pub fn new(dim: usize, pids: Vec<String>, data: Vec<f32>) -> Result<Self> {
        if data.len() != pids.len() * dim {
            return Err(HarError::BadStore(format!(
                "{} values for {} rows of dim {dim}",
                data.len(),
                pids.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(HarError::BadStore(format!(
                "non-finite value in row {}",
                pos / dim.max(1)
            )));
        }
        Ok(Self { dim, pids, data })
    }

    pub fn from_rows(pids: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(HarError::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            data.extend(r.iter().map(|&v| v as f32));
        }
        Self::new(dim, pids, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.pids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pids.is_empty()
    }

    pub fn pids(&self) -> &[String] {
        &self.pids
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    /// Row as `f64`.
    pub fn vector(&self, r: usize) -> Vec<f64> {
        self.row(r).iter().map(|&v| v as f64).collect()
    }

    pub fn row_of(&self, pid: &str) -> Option<usize> {
        self.pids.iter().position(|p| p == pid)
    }

    fn append(&mut self, other: VectorStore) -> Result<()> {
        if other.dim != self.dim {
            return Err(HarError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        self.pids.extend(other.pids);
        self.data.extend(other.data);
        Ok(())
    }

    pub fn write(&self, dir: &Path, manifest: &StoreManifest) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let vpath = dir.join(VECTORS_FILE);
        let mut f = BufWriter::new(File::create(&vpath).map_err(io_err(&vpath))?);
        let mut header = Vec::with_capacity(HEADER_LEN);
        header.extend_from_slice(MAGIC);
        header.extend_from_slice(&VERSION.to_le_bytes());
        header.extend_from_slice(&(self.len() as u32).to_le_bytes());
        header.extend_from_slice(&(self.dim as u32).to_le_bytes());
        f.write_all(&header).map_err(io_err(&vpath))?;
        for v in &self.data {
            f.write_all(&v.to_le_bytes()).map_err(io_err(&vpath))?;
        }
        f.flush().map_err(io_err(&vpath))?;

        let ppath = dir.join(PIDS_FILE);
        let mut f = BufWriter::new(File::create(&ppath).map_err(io_err(&ppath))?);
        for pid in &self.pids {
            writeln!(f, "{pid}").map_err(io_err(&ppath))?;
        }
        f.flush().map_err(io_err(&ppath))?;

        let mpath = dir.join(MANIFEST_FILE);
        std::fs::write(&mpath, serde_json::to_string_pretty(manifest)? + "\n").map_err(io_err(&mpath))
    }

    pub fn read(dir: &Path) -> Result<(Self, StoreManifest)> {
        let vpath = dir.join(VECTORS_FILE);
        let bytes = std::fs::read(&vpath).map_err(io_err(&vpath))?;
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(HarError::BadStore("missing HARV header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let version = word(4);
        if version != VERSION {
            return Err(HarError::BadStore(format!("unsupported version {version}")));
        }
        let count = word(8) as usize;
        let dim = word(12) as usize;
        let body = &bytes[HEADER_LEN..];
        if body.len() != count * dim * 4 {
            return Err(HarError::BadStore(format!(
                "expected {} payload bytes, found {}",
                count * dim * 4,
                body.len()
            )));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();

        let ppath = dir.join(PIDS_FILE);
        let f = File::open(&ppath).map_err(io_err(&ppath))?;
        let pids: Vec<String> = BufReader::new(f)
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(io_err(&ppath))?;
        if pids.len() != count {
            return Err(HarError::BadStore(format!(
                "{} pids for {count} vectors",
                pids.len()
            )));
        }

        let mpath = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
        let manifest: StoreManifest = serde_json::from_str(&text)?;
        if manifest.count != count || manifest.dim != dim {
            return Err(HarError::BadStore("manifest disagrees with vectors.bin".into()));
        }
        Ok((Self::new(dim, pids, data)?, manifest))
    }
}

/// Dense vector for one passage: `[CLS] tokens...` with segment 0, `[CLS]`
/// hidden state through the encoder's projection.
pub fn encode_passage(passage: &Passage, encoder: &EncoderWeights) -> Result<Vec<f64>> {
    if passage.token_ids.is_empty() {
        return Err(HarError::EmptyPassage(passage.pid.clone()));
    }
    let hidden = encoder.encode_passage_hidden(&passage.token_ids)?;
    Ok(encoder.projection.matvec(&hidden))
}

/// Encodes every passage (in parallel, order preserved).
pub fn build_store(passages: &PassageCollection, encoder: &EncoderWeights) -> Result<VectorStore> {
    if passages.is_empty() {
        return Err(HarError::InvalidConfig("empty passage collection".into()));
    }
    let rows: Vec<Vec<f64>> = passages
        .as_slice()
        .par_iter()
        .map(|p| encode_passage(p, encoder))
        .collect::<Result<_>>()?;
    let pids = passages.iter().map(|p| p.pid.clone()).collect();
    VectorStore::from_rows(pids, &rows)
}

/// Encodes `passages` and appends them to the store in `dir`, which must have
/// been built by the same encoder.
pub fn append_to_store(dir: &Path, passages: &PassageCollection, encoder: &EncoderWeights) -> Result<VectorStore> {
    let (mut store, manifest) = VectorStore::read(dir)?;
    manifest.check(&encoder.config)?;
    for p in passages.iter() {
        if store.row_of(&p.pid).is_some() {
            return Err(HarError::DuplicatePid(p.pid.clone()));
        }
    }
    store.append(build_store(passages, encoder)?)?;
    store.write(dir, &StoreManifest::for_encoder(&encoder.config, &store))?;
    Ok(store)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub pid: String,
    pub row: usize,
    pub score: f64,
}

/// Hits ordered by score descending, ties by ascending row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedList {
    pub hits: Vec<Hit>,
}

impl RankedList {
    pub fn pids(&self) -> Vec<&str> {
        self.hits.iter().map(|h| h.pid.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }
}

/// Candidate in a bounded heap. `Ord` puts the better candidate first, so a
/// max-heap's top is the worst entry.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    score: f64,
    row: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(self.row.cmp(&other.row))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[inline]
fn score(q: &[f64], p: &[f32]) -> f64 {
    let mut acc = 0.0;
    for (a, &b) in q.iter().zip(p) {
        acc += a * b as f64;
    }
    acc
}

fn scan(store: &VectorStore, q: &[f64], rows: std::ops::Range<usize>, r: usize) -> Vec<Candidate> {
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(r + 1);
    for row in rows {
        let c = Candidate {
            score: score(q, store.row(row)),
            row,
        };
        if heap.len() < r {
            heap.push(c);
        } else if let Some(worst) = heap.peek() {
            if c < *worst {
                heap.pop();
                heap.push(c);
            }
        }
    }
    heap.into_vec()
}

/// Exact top-`r` by inner product over `shards` contiguous row ranges.
/// The result does not depend on `shards`.
pub fn search_sharded(store: &VectorStore, q: &[f64], r: usize, shards: usize) -> Result<RankedList> {
    if q.len() != store.dim() {
        return Err(HarError::DimensionMismatch {
            expected: store.dim(),
            got: q.len(),
        });
    }
    if r == 0 {
        return Err(HarError::InvalidConfig("R must be >= 1".into()));
    }
    let n = store.len();
    let shards = shards.clamp(1, n.max(1));
    let per = n.div_ceil(shards);
    let mut merged: Vec<Candidate> = (0..shards)
        .into_par_iter()
        .map(|s| scan(store, q, (s * per).min(n)..((s + 1) * per).min(n), r))
        .flatten()
        .collect();
    merged.sort();
    merged.truncate(r);
    Ok(RankedList {
        hits: merged
            .into_iter()
            .map(|c| Hit {
                pid: store.pids[c.row].clone(),
                row: c.row,
                score: c.score,
            })
            .collect(),
    })
}

/// Single-shard exact search.
pub fn search(store: &VectorStore, q: &[f64], r: usize) -> Result<RankedList> {
    search_sharded(store, q, r, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(rows: &[Vec<f64>]) -> VectorStore {
        let pids = (1..=rows.len()).map(|i| format!("p{i}")).collect();
        VectorStore::from_rows(pids, rows).unwrap()
    }

    #[test]
    fn hand_example() {
        let s = store(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let r = search(&s, &[2.0, 1.0], 3).unwrap();
        assert_eq!(r.pids(), vec!["p3", "p1", "p2"]);
        let scores: Vec<f64> = r.hits.iter().map(|h| h.score).collect();
        assert_eq!(scores, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn r_larger_than_collection() {
        let s = store(&[vec![1.0], vec![2.0]]);
        assert_eq!(search(&s, &[1.0], 10).unwrap().len(), 2);
    }

    #[test]
    fn ties_by_row() {
        let s = store(&[
            vec![0.0, 1.0],
            vec![0.5, 0.5],
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![0.5, 0.5],
        ]);
        let r = search(&s, &[1.0, 1.0], 2).unwrap();
        assert_eq!(r.pids(), vec!["p1", "p2"]);
        let r = search(&s, &[1.0, 1.0], 3).unwrap();
        assert_eq!(r.pids(), vec!["p1", "p2", "p5"]);
    }

    #[test]
    fn dimension_mismatch() {
        let s = store(&[vec![1.0, 0.0]]);
        assert!(matches!(
            search(&s, &[1.0], 1),
            Err(HarError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn write_read_roundtrip_and_size() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(&[vec![1.0, -2.0, 0.5], vec![0.25, 0.0, 3.0]]);
        let m = StoreManifest {
            encoder_seed: 1,
            config_hash: "x".into(),
            count: 2,
            dim: 3,
        };
        s.write(dir.path(), &m).unwrap();
        let len = std::fs::metadata(dir.path().join(VECTORS_FILE)).unwrap().len();
        assert_eq!(len as usize, HEADER_LEN + 2 * 3 * 4);
        let (back, m2) = VectorStore::read(dir.path()).unwrap();
        assert_eq!(back, s);
        assert_eq!(m2, m);
    }

    #[test]
    fn corrupt_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(&[vec![1.0]]);
        let m = StoreManifest {
            encoder_seed: 1,
            config_hash: "x".into(),
            count: 1,
            dim: 1,
        };
        s.write(dir.path(), &m).unwrap();
        let p = dir.path().join(VECTORS_FILE);
        let mut bytes = std::fs::read(&p).unwrap();
        bytes[0] = b'X';
        std::fs::write(&p, bytes).unwrap();
        assert!(matches!(VectorStore::read(dir.path()), Err(HarError::BadStore(_))));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(VectorStore::new(1, vec!["a".into()], vec![f32::NAN]).is_err());
    }
}
