mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::SMALL_N;
use har::batching::{build_instance_batch, BatchConfig, HistoryWindow, SequenceLayout};
use har::corpus::{
    dialog_stats, gen_synthetic, load_dialogs, load_passages, split_words, write_dialogs, write_passages, Dialog,
    PassageCollection, SyntheticConfig, Turn,
};
use har::HarError;

fn overlap(a: &str, b: &str, content: &BTreeSet<String>) -> usize {
    let wa: BTreeSet<String> = split_words(a).into_iter().filter(|w| content.contains(w)).collect();
    let wb: BTreeSet<String> = split_words(b).into_iter().filter(|w| content.contains(w)).collect();
    wa.intersection(&wb).count()
}

#[test]
fn seed_7_turn_4_gold_overlaps_turn_1_only() {
    let corpus = gen_synthetic(&SyntheticConfig::default(), 7).unwrap();
    assert_eq!(corpus.dialogs.len(), 200);
    assert_eq!(corpus.dialogs.iter().map(Dialog::len).sum::<usize>(), 800);
    assert_eq!(corpus.passages.len(), 500);
    let content = &corpus.content_words;
    for d in &corpus.dialogs {
        let t4 = &d.turns[3];
        let gold = &corpus.passages.get(&t4.gold_pids[0]).unwrap().text;
        for (i, t) in d.turns.iter().enumerate() {
            let o = overlap(gold, &t.question, content);
            if i == 0 {
                assert!(o > 0, "{}: turn 1 shares nothing with the turn 4 gold", d.dialog_id);
            } else {
                assert_eq!(o, 0, "{}: turn {} overlaps the turn 4 gold", d.dialog_id, i + 1);
            }
        }
    }
}

#[test]
fn return_turn_gold_favours_the_earlier_question() {
    let config = SyntheticConfig::default();
    let corpus = gen_synthetic(&config, 7).unwrap();
    let gap = config.topic_return_gap;
    for d in &corpus.dialogs {
        for k in gap + 1..=d.len() {
            let gold = &corpus.passages.get(&d.turns[k - 1].gold_pids[0]).unwrap().text;
            let back = overlap(gold, &d.turns[k - 1 - gap].question, &corpus.content_words);
            let here = overlap(gold, &d.turns[k - 1].question, &corpus.content_words);
            assert!(back > here);
        }
    }
}

#[test]
fn average_question_length_near_seven() {
    let corpus = gen_synthetic(&SyntheticConfig::default(), 7).unwrap();
    let avg = dialog_stats(&corpus.dialogs).avg_question_tokens;
    assert!((avg - 7.0).abs() <= 1.5, "average question length {avg}");
}

#[test]
fn generation_is_deterministic() {
    let config = SyntheticConfig {
        n_dialogs: 30,
        n_passages: 60,
        ..SyntheticConfig::default()
    };
    let a = gen_synthetic(&config, 3).unwrap();
    let b = gen_synthetic(&config, 3).unwrap();
    assert_eq!(a.dialogs, b.dialogs);
    assert_eq!(a.passages, b.passages);
    let c = gen_synthetic(&config, 4).unwrap();
    assert_ne!(a.dialogs, c.dialogs);
}

#[test]
fn invalid_configs_are_rejected() {
    let gap_too_big = SyntheticConfig {
        topic_return_gap: 4,
        ..SyntheticConfig::default()
    };
    assert!(matches!(gen_synthetic(&gap_too_big, 7), Err(HarError::InvalidConfig(_))));
    let too_few_passages = SyntheticConfig {
        n_passages: 2,
        ..SyntheticConfig::default()
    };
    assert!(matches!(gen_synthetic(&too_few_passages, 7), Err(HarError::InvalidConfig(_))));
}

#[test]
fn ten_thousand_passages_round_trip() {
    let config = SyntheticConfig {
        n_dialogs: 5,
        n_passages: 10_000,
        ..SyntheticConfig::default()
    };
    let corpus = gen_synthetic(&config, 7).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("passages.jsonl");
    write_passages(&path, &corpus.passages).unwrap();
    let loaded = load_passages(&path).unwrap();
    assert_eq!(loaded.len(), 10_000);
    assert_eq!(loaded.as_slice()[0].pid, "p0000");
    assert_eq!(loaded.as_slice()[9_999].pid, "p9999");
    assert_eq!(loaded, corpus.passages);
}

#[test]
fn malformed_dialog_line_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    std::fs::write(
        &path,
        "{\"dialog_id\":\"a\",\"turn_index\":1,\"question\":\"q\",\"gold_pids\":[\"p\"]}\n\
         {\"dialog_id\":\"a\",\"turn_index\":2,\"question\":\"q\",\"gold_pids\":[\"p\"]}\n\
         {\"dialog_id\":\"a\",\"turn_index\":3,\n",
    )
    .unwrap();
    match load_dialogs(&path) {
        Err(HarError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn no_segment_id_reaches_n() {
    let config = SyntheticConfig {
        n_dialogs: 40,
        turns_per_dialog: 13,
        topic_return_gap: 7,
        n_passages: 200,
        ..SyntheticConfig::default()
    };
    let corpus = gen_synthetic(&config, 9).unwrap();
    let layout = SequenceLayout::new(12);
    let mut max_seen = 0;
    for posseg in [true, false] {
        let cfg = BatchConfig {
            max_history_turns: SMALL_N,
            posseg_enabled: posseg,
            window: HistoryWindow::Full,
        };
        for d in &corpus.dialogs {
            for k in 1..=d.len() {
                let batch = build_instance_batch(d, k, &corpus.vocab, &layout, &cfg).unwrap();
                for row in &batch.segment_ids {
                    max_seen = max_seen.max(*row.iter().max().unwrap());
                }
            }
        }
    }
    assert_eq!(max_seen as usize, SMALL_N - 1);
}

fn dialog_strategy() -> impl Strategy<Value = Vec<Dialog>> {
    prop::collection::vec(prop::collection::vec(("[a-z ?]{1,20}", "p[0-9]{1,3}"), 1..6), 1..5).prop_map(|ds| {
        ds.into_iter()
            .enumerate()
            .map(|(di, turns)| {
                let dialog_id = format!("d{di}");
                let turns = turns
                    .into_iter()
                    .enumerate()
                    .map(|(i, (q, p))| Turn {
                        dialog_id: dialog_id.clone(),
                        turn_index: i + 1,
                        question: q,
                        rewritten_first_question: None,
                        gold_pids: vec![p],
                    })
                    .collect();
                Dialog { dialog_id, turns }
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dialogs_round_trip(dialogs in dialog_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        write_dialogs(&path, &dialogs).unwrap();
        prop_assert_eq!(load_dialogs(&path).unwrap(), dialogs);
    }

    #[test]
    fn passages_round_trip(texts in prop::collection::vec("[a-zA-Z .,\"\\\\]{1,40}", 1..30)) {
        let items: Vec<(String, String)> = texts
            .into_iter()
            .enumerate()
            .filter(|(_, t)| !t.trim().is_empty())
            .map(|(i, t)| (format!("p{i}"), t))
            .collect();
        prop_assume!(!items.is_empty());
        let collection = PassageCollection::new(items).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        write_passages(&path, &collection).unwrap();
        prop_assert_eq!(load_passages(&path).unwrap(), collection);
    }
}
