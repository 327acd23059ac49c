mod common;

use proptest::prelude::*;

use common::sort_oracle;
use har::batching::{build_instance_batch, BatchConfig, HistoryWindow, SequenceLayout};
use har::corpus::{tokenize, Dialog, Turn, Vocabulary, CLS, PAD, SEP, UNK};
use har::eval::recall_at_k;
use har::har::softmax;
use har::index::{search_sharded, VectorStore};

fn logits() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-30.0f64..30.0, 1..16)
}

fn store_and_query() -> impl Strategy<Value = (VectorStore, Vec<f64>)> {
    (1usize..6, 1usize..300).prop_flat_map(|(dim, j)| {
        (
            prop::collection::vec(-3i8..=3, dim * j),
            prop::collection::vec(-2.0f64..2.0, dim),
        )
            .prop_map(move |(cells, q)| {
                let pids = (0..j).map(|i| format!("p{i}")).collect();
                let data = cells.into_iter().map(|c| c as f32 * 0.5).collect();
                (VectorStore::new(dim, pids, data).unwrap(), q)
            })
    })
}

proptest! {
    #[test]
    fn softmax_sums_to_one_and_is_shift_invariant(z in logits(), c in -100.0f64..100.0) {
        let a = softmax(&z);
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(a.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
        for (x, y) in a.iter().zip(softmax(&shifted)) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn softmax_keeps_argmax(z in logits()) {
        let a = softmax(&z);
        let arg = |v: &[f64]| v.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap().0;
        prop_assert_eq!(z[arg(&a)], z[arg(&z)]);
    }

    #[test]
    fn search_matches_sort_oracle((store, q) in store_and_query(), r in 1usize..50, shards in 1usize..9) {
        let got = search_sharded(&store, &q, r, shards).unwrap();
        let got: Vec<(usize, f64)> = got.hits.iter().map(|h| (h.row, h.score)).collect();
        prop_assert_eq!(got, sort_oracle(&store, &q, r));
    }

    #[test]
    fn search_prefix_is_stable((store, q) in store_and_query(), r in 1usize..40) {
        let short = search_sharded(&store, &q, r, 3).unwrap();
        let long = search_sharded(&store, &q, r + 10, 3).unwrap();
        prop_assert_eq!(short.len(), r.min(store.len()));
        prop_assert_eq!(&long.hits[..short.len()], &short.hits[..]);
        prop_assert!(short.hits.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn recall_is_monotone_in_k(n in 1usize..30, gold_mask in prop::collection::vec(any::<bool>(), 30)) {
        let ranked: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let ranked: Vec<&str> = ranked.iter().map(String::as_str).collect();
        let mut gold: Vec<String> = (0..30).filter(|&i| gold_mask[i]).map(|i| format!("p{i}")).collect();
        gold.push("missing".into());
        let gold: Vec<&str> = gold.iter().map(String::as_str).collect();
        let mut prev = 0.0;
        for k in 1..=n + 2 {
            let r = recall_at_k(&ranked, &gold, k).unwrap();
            prop_assert!(r >= prev && r <= 1.0);
            prev = r;
        }
    }

    #[test]
    fn tokenizer_is_deterministic_and_avoids_reserved(text in "[a-zA-Z0-9 ,.?!'-]{0,80}") {
        let vocab = Vocabulary::build([text.as_str()]);
        let a = tokenize(&text, &vocab);
        prop_assert_eq!(&a, &tokenize(&text, &vocab));
        prop_assert!(a.iter().all(|&id| id != PAD && id != CLS && id != SEP && id != UNK));
        let unseen = Vocabulary::new();
        prop_assert!(tokenize(&text, &unseen).iter().all(|&id| id == UNK));
    }

    #[test]
    fn batch_invariants(
        n_turns in 1usize..16,
        k_seed in 0usize..100,
        m in 1usize..6,
        n_hist in 1usize..12,
        posseg in any::<bool>(),
        words in prop::collection::vec("[a-e]{1,3}( [a-e]{1,3}){0,7}", 16),
    ) {
        let k = 1 + k_seed % n_turns;
        let turns: Vec<Turn> = (1..=n_turns)
            .map(|i| Turn {
                dialog_id: "d".into(),
                turn_index: i,
                question: words[i - 1].clone(),
                gold_pids: vec!["p".into()],
                rewritten_first_question: None,
            })
            .collect();
        let dialog = Dialog { dialog_id: "d".into(), turns };
        let vocab = Vocabulary::build(words.iter().map(String::as_str));
        let layout = SequenceLayout::new(m);
        let cfg = BatchConfig { max_history_turns: n_hist, posseg_enabled: posseg, window: HistoryWindow::Full };
        let batch = build_instance_batch(&dialog, k, &vocab, &layout, &cfg).unwrap();

        let lo = if k >= n_hist { k + 1 - n_hist } else { 1 };
        let expected: Vec<usize> = (lo..=k).collect();
        prop_assert_eq!(&batch.turn_ids, &expected);
        for row in 0..batch.n_rows() {
            prop_assert_eq!(batch.token_ids[row].len(), 3 * m + 3);
            prop_assert_eq!(batch.token_ids[row][0], CLS);
            prop_assert!(batch.segment_ids[row].iter().all(|&s| (s as usize) < n_hist));
            if !posseg {
                prop_assert!(batch.segment_ids[row].iter().all(|&s| s == 0));
            }
            for (p, &id) in batch.token_ids[row].iter().enumerate() {
                prop_assert_eq!(batch.token_mask[row][p], id != PAD);
            }
            prop_assert_eq!(&batch.current_token_mask[row], &batch.current_token_mask[0]);
        }
        prop_assert!(batch.active_current_tokens() >= 1);
    }
}
