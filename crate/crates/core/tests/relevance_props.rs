use proptest::prelude::*;

use wasmsmell::relevance::{
    is_relevant, rank, rank_graph, LemmaGraph, RankParams, DEFAULT_KEYWORDS,
};

const WORDS: &[&str] = &[
    "wasm", "module", "build", "browser", "runtime", "port", "game", "audio",
];

fn tokens() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(WORDS).prop_map(String::from), 0..120)
}

proptest! {
    #[test]
    fn ranks_sum_to_one(t in tokens(), window in 2usize..6) {
        let r = rank(&t, RankParams { window, ..Default::default() });
        if !t.is_empty() {
            let sum: f64 = r.scores.values().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9, "sum {}", sum);
        }
        prop_assert!(r.scores.values().all(|s| *s > 0.0));
    }

    #[test]
    fn reversal_invariant_for_window_two(t in tokens()) {
        let params = RankParams { window: 2, ..Default::default() };
        let mut rev = t.clone();
        rev.reverse();
        prop_assert_eq!(LemmaGraph::build(&t, 2), LemmaGraph::build(&rev, 2));
        let (a, b) = (rank(&t, params), rank(&rev, params));
        for (w, s) in &a.scores {
            prop_assert!((s - b.scores[w]).abs() <= 1e-12);
        }
    }

    #[test]
    fn residuals_shrink(t in tokens(), damping in 0.1f64..=0.85) {
        let g = LemmaGraph::build(&t, 3);
        let r = rank_graph(&g, RankParams { damping, ..Default::default() });
        for w in r.residuals.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-15, "{:?}", r.residuals);
        }
    }

    #[test]
    fn symmetric_nodes_rank_equal(n in 2usize..8) {
        // a star: the hub plus n leaves, every leaf symmetric to every other
        let mut t = vec![];
        for i in 0..n {
            t.push("hub".to_string());
            t.push(format!("leaf{i}"));
        }
        t.push("hub".to_string());
        let r = rank(&t, RankParams { window: 2, ..Default::default() });
        let leaf0 = r.scores["leaf0"];
        for i in 1..n {
            let leaf = r.scores[&format!("leaf{}", i)];
            prop_assert!((leaf - leaf0).abs() <= 1e-9);
        }
        prop_assert!(r.scores["hub"] > leaf0);
    }

    #[test]
    fn keyword_set_is_generic(filler in prop::collection::vec("[a-z]{4,9}", 0..6)) {
        let mut text = String::from("foo tools: foo parser, foo printer and foo runtime for foo files. ");
        text += &filler.join(" ");
        let r = is_relevant(&text, &["foo"], 15, RankParams::default());
        prop_assert!(r.relevant);
        let r = is_relevant(&text, DEFAULT_KEYWORDS, 15, RankParams::default());
        prop_assert!(!r.relevant);
    }
}
