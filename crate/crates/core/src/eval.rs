//! MRR / Recall@k over retrieval runs and the report formats.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarError, Result};
use crate::har::{compose_from_raw, AttentionHead};
use crate::index::{search, VectorStore};
use crate::training::EncodedQuery;

pub const DEFAULT_KS: [usize; 3] = [5, 10, 100];

fn gold_set<'a>(gold: &[&'a str]) -> Result<HashSet<&'a str>> {
    if gold.is_empty() {
        return Err(HarError::EmptyGold(String::new()));
    }
    Ok(gold.iter().copied().collect())
}

/// `1 / r` for the first gold hit at rank `r`, 0 when none is retrieved.
pub fn reciprocal_rank(ranked: &[&str], gold: &[&str]) -> Result<f64> {
    let gold = gold_set(gold)?;
    Ok(ranked
        .iter()
        .position(|p| gold.contains(p))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64))
}

/// `|gold ∩ top-k| / |gold|`
pub fn recall_at_k(ranked: &[&str], gold: &[&str], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(HarError::InvalidConfig("k must be >= 1".into()));
    }
    let gold = gold_set(gold)?;
    let found: HashSet<&str> = ranked
        .iter()
        .take(k)
        .copied()
        .filter(|p| gold.contains(p))
        .collect();
    Ok(found.len() as f64 / gold.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub dialog_id: String,
    pub turn_index: usize,
    pub ranked: Vec<(String, f64)>,
    pub gold: Vec<String>,
    pub rr: f64,
    /// Recall@k per cutoff (0/1 for single-gold queries).
    pub hits: BTreeMap<usize, f64>,
    pub alphas: Vec<f64>,
}

impl QueryResult {
    pub fn qid(&self) -> String {
        format!("{}#{}", self.dialog_id, self.turn_index)
    }

    pub fn from_ranking(
        dialog_id: &str,
        turn_index: usize,
        ranked: Vec<(String, f64)>,
        gold: Vec<String>,
        ks: &[usize],
    ) -> Result<Self> {
        let pids: Vec<&str> = ranked.iter().map(|(p, _)| p.as_str()).collect();
        let g: Vec<&str> = gold.iter().map(String::as_str).collect();
        let rr = reciprocal_rank(&pids, &g).map_err(|_| HarError::EmptyGold(format!("{dialog_id}#{turn_index}")))?;
        let hits = ks
            .iter()
            .map(|&k| Ok((k, recall_at_k(&pids, &g, k)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            dialog_id: dialog_id.to_string(),
            turn_index,
            ranked,
            gold,
            rr,
            hits,
            alphas: Vec::new(),
        })
    }

    pub fn record(&self) -> QueryRecord {
        QueryRecord {
            qid: self.qid(),
            rr: self.rr,
            hits: self.hits.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub qid: String,
    pub rr: f64,
    pub hits: BTreeMap<String, f64>,
}

/// `report.json`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub variant: String,
    pub mrr: f64,
    pub recall: BTreeMap<String, f64>,
    pub config_hash: String,
    pub per_query: Vec<QueryRecord>,
}

impl RunReport {
    /// Aggregates per-query records: MRR is the mean reciprocal rank, recall
    /// is macro-averaged per cutoff. Sums run in record order.
    pub fn aggregate(variant: &str, config_hash: &str, per_query: Vec<QueryRecord>) -> Self {
        let n = per_query.len().max(1) as f64;
        let mrr = per_query.iter().map(|q| q.rr).sum::<f64>() / n;
        let mut recall: BTreeMap<String, f64> = BTreeMap::new();
        for q in &per_query {
            for (k, v) in &q.hits {
                *recall.entry(k.clone()).or_insert(0.0) += v;
            }
        }
        recall.values_mut().for_each(|v| *v /= n);
        Self {
            variant: variant.to_string(),
            mrr,
            recall,
            config_hash: config_hash.to_string(),
            per_query,
        }
    }

    pub fn recall_at(&self, k: usize) -> Option<f64> {
        self.recall.get(&k.to_string()).copied()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n").map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Composes, searches and scores every query. Gold pids missing from the
/// store are a hard error.
pub fn evaluate_queries(
    queries: &[EncodedQuery],
    head: &AttentionHead,
    store: &VectorStore,
    r: usize,
    ks: &[usize],
) -> Result<Vec<QueryResult>> {
    let known: HashSet<&str> = store.pids().iter().map(String::as_str).collect();
    for q in queries {
        if q.gold_pids.is_empty() {
            return Err(HarError::EmptyGold(q.qid()));
        }
        for pid in &q.gold_pids {
            if !known.contains(pid.as_str()) {
                return Err(HarError::MissingGold {
                    qid: q.qid(),
                    pid: pid.clone(),
                });
            }
        }
    }
    queries
        .par_iter()
        .map(|q| {
            let qv = compose_from_raw(&q.raw, &q.turn_ids, head)?;
            let ranked = search(store, &qv.q_hat, r)?;
            let ranked = ranked.hits.into_iter().map(|h| (h.pid, h.score)).collect();
            let mut res = QueryResult::from_ranking(&q.dialog_id, q.turn_index, ranked, q.gold_pids.clone(), ks)?;
            res.alphas = qv.alphas;
            Ok(res)
        })
        .collect()
}

pub fn evaluate_run(
    queries: &[EncodedQuery],
    head: &AttentionHead,
    store: &VectorStore,
    r: usize,
    ks: &[usize],
    config_hash: &str,
) -> Result<RunReport> {
    if let Some(&kmax) = ks.iter().max() {
        if kmax > r {
            return Err(HarError::InvalidConfig(format!("cutoff {kmax} exceeds R = {r}")));
        }
    }
    let results = evaluate_queries(queries, head, store, r, ks)?;
    Ok(RunReport::aggregate(
        &head.variant().label(),
        config_hash,
        results.iter().map(QueryResult::record).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryDelta {
    pub qid: String,
    pub rr_a: f64,
    pub rr_b: f64,
    pub delta: f64,
}

/// `A − B` for every metric and query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub variant_a: String,
    pub variant_b: String,
    pub delta_mrr: f64,
    pub delta_recall: BTreeMap<String, f64>,
    /// Sorted by `|delta|` descending, then qid.
    pub per_query: Vec<QueryDelta>,
}

pub fn compare_runs(a: &RunReport, b: &RunReport) -> Result<DeltaReport> {
    if a.config_hash != b.config_hash {
        return Err(HarError::FingerprintMismatch {
            expected: a.config_hash.clone(),
            found: b.config_hash.clone(),
        });
    }
    let b_rr: BTreeMap<&str, f64> = b.per_query.iter().map(|q| (q.qid.as_str(), q.rr)).collect();
    let mut per_query = Vec::with_capacity(a.per_query.len());
    for q in &a.per_query {
        let rr_b = *b_rr.get(q.qid.as_str()).ok_or_else(|| {
            HarError::InvalidConfig(format!("query {} missing from {}", q.qid, b.variant))
        })?;
        per_query.push(QueryDelta {
            qid: q.qid.clone(),
            rr_a: q.rr,
            rr_b,
            delta: q.rr - rr_b,
        });
    }
    if b.per_query.len() != a.per_query.len() {
        return Err(HarError::InvalidConfig("reports cover different query sets".into()));
    }
    per_query.sort_by(|x, y| {
        y.delta
            .abs()
            .total_cmp(&x.delta.abs())
            .then_with(|| x.qid.cmp(&y.qid))
    });
    let delta_recall = a
        .recall
        .iter()
        .filter_map(|(k, va)| b.recall.get(k).map(|vb| (k.clone(), va - vb)))
        .collect();
    Ok(DeltaReport {
        variant_a: a.variant.clone(),
        variant_b: b.variant.clone(),
        delta_mrr: a.mrr - b.mrr,
        delta_recall,
        per_query,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rr_cases() {
        assert_eq!(reciprocal_rank(&["a", "b"], &["a"]).unwrap(), 1.0);
        assert_eq!(reciprocal_rank(&["x", "y", "z", "a"], &["a"]).unwrap(), 0.25);
        assert_eq!(reciprocal_rank(&["x", "y"], &["a"]).unwrap(), 0.0);
        assert!(reciprocal_rank(&["x"], &[]).is_err());
    }

    #[test]
    fn recall_cases() {
        assert_eq!(recall_at_k(&["x", "y", "a"], &["a"], 5).unwrap(), 1.0);
        assert_eq!(recall_at_k(&["x", "a", "y"], &["a", "b"], 5).unwrap(), 0.5);
        assert_eq!(recall_at_k(&["x", "a"], &["a"], 1).unwrap(), 0.0);
        assert!(recall_at_k(&["x"], &["a"], 0).is_err());
    }

    fn rec(qid: &str, rr: f64) -> QueryRecord {
        QueryRecord {
            qid: qid.into(),
            rr,
            hits: BTreeMap::from([("5".to_string(), if rr > 0.0 { 1.0 } else { 0.0 })]),
        }
    }

    #[test]
    fn mrr_is_mean() {
        let r = RunReport::aggregate("v", "h", vec![rec("a", 1.0), rec("b", 0.25), rec("c", 0.0)]);
        assert_eq!(r.mrr, (1.0 + 0.25 + 0.0) / 3.0);
        assert!((r.mrr - 0.416_666_666_666_666_7).abs() < 1e-15);
        assert_eq!(r.recall_at(5), Some(2.0 / 3.0));
    }

    #[test]
    fn compare_identity_and_sign() {
        let a = RunReport::aggregate("a", "h", vec![rec("q1", 0.5), rec("q2", 0.1)]);
        let d = compare_runs(&a, &a).unwrap();
        assert_eq!(d.delta_mrr, 0.0);
        assert!(d.per_query.iter().all(|q| q.delta == 0.0));

        let mut a = RunReport::aggregate("a", "h", vec![rec("q1", 0.30)]);
        let b = RunReport::aggregate("b", "h", vec![rec("q1", 0.25)]);
        a.mrr = 0.30;
        let d = compare_runs(&a, &b).unwrap();
        assert!((d.delta_mrr - 0.05).abs() < 1e-12);

        let c = RunReport::aggregate("c", "other", vec![rec("q1", 0.25)]);
        assert!(compare_runs(&a, &c).is_err());
    }

    #[test]
    fn deltas_sorted_by_magnitude() {
        let a = RunReport::aggregate("a", "h", vec![rec("q1", 0.5), rec("q2", 1.0), rec("q3", 0.2)]);
        let b = RunReport::aggregate("b", "h", vec![rec("q1", 0.4), rec("q2", 0.0), rec("q3", 0.7)]);
        let d = compare_runs(&a, &b).unwrap();
        let order: Vec<&str> = d.per_query.iter().map(|q| q.qid.as_str()).collect();
        assert_eq!(order, vec!["q2", "q3", "q1"]);
    }
}
