//! Keyword importance in README text: PageRank over a word co-occurrence
//! graph, then a top-K membership test for the keywords.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::OnceLock;

use serde::Serialize;

pub const DEFAULT_KEYWORDS: &[&str] = &["wasm", "webassembly", "web assembly", "emscripten"];

fn stopwords() -> &'static HashSet<&'static str> {
    static WORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| {
        include_str!("stopwords.txt")
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .collect()
    })
}

pub fn is_stopword(word: &str) -> bool {
    stopwords().contains(word)
}

/// Lowercased content words of `text` in order.
pub fn extract_candidates(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .filter(|w| w.chars().count() >= 2)
        .filter(|w| !w.chars().all(|c| c.is_numeric()))
        .filter(|w| !is_stopword(w))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankParams {
    pub window: usize,
    pub damping: f64,
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for RankParams {
    fn default() -> Self {
        RankParams {
            window: 3,
            damping: 0.85,
            eps: 1e-6,
            max_iter: 100,
        }
    }
}

/// Undirected co-occurrence graph over distinct tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaGraph {
    pub nodes: Vec<String>,
    /// Symmetric weights keyed by node index pairs `(i, j)` with `i < j`.
    pub edges: BTreeMap<(usize, usize), f64>,
}

impl LemmaGraph {
    /// Tokens fewer than `window` positions apart are linked; every such
    /// pair adds 1 to the edge weight.
    pub fn build(tokens: &[String], window: usize) -> LemmaGraph {
        let nodes: Vec<String> = tokens
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut edges = BTreeMap::new();
        for i in 0..tokens.len() {
            for j in i + 1..tokens.len().min(i + window.max(2)) {
                let (a, b) = (index[tokens[i].as_str()], index[tokens[j].as_str()]);
                if a != b {
                    *edges.entry((a.min(b), a.max(b))).or_insert(0.0) += 1.0;
                }
            }
        }
        LemmaGraph { nodes, edges }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankVector {
    pub scores: BTreeMap<String, f64>,
    /// L1 change per iteration.
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl RankVector {
    /// Words by descending score, ties broken alphabetically.
    pub fn ordered(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self.scores.iter().map(|(k, s)| (k.as_str(), *s)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
        v
    }
}

/// Weighted PageRank by power iteration. Isolated nodes only receive the
/// teleport share; the result is normalized to sum to 1.
pub fn rank_graph(g: &LemmaGraph, params: RankParams) -> RankVector {
    let n = g.nodes.len();
    if n == 0 {
        return RankVector {
            scores: BTreeMap::new(),
            residuals: vec![],
        };
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(a, b), &w) in &g.edges {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    let strength: Vec<f64> = adj.iter().map(|e| e.iter().map(|(_, w)| w).sum()).collect();
    let d = params.damping;
    let mut r = vec![1.0 / n as f64; n];
    let mut residuals = Vec::new();
    for _ in 0..params.max_iter {
        let mut next = vec![(1.0 - d) / n as f64; n];
        for (j, edges) in adj.iter().enumerate() {
            if strength[j] == 0.0 {
                continue;
            }
            let share = d * r[j] / strength[j];
            for &(i, w) in edges {
                next[i] += share * w;
            }
        }
        let res: f64 = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum();
        r = next;
        residuals.push(res);
        if res < params.eps {
            break;
        }
    }
    let total: f64 = r.iter().sum();
    RankVector {
        scores: g
            .nodes
            .iter()
            .cloned()
            .zip(r.into_iter().map(|x| x / total))
            .collect(),
        residuals,
    }
}

pub fn rank(tokens: &[String], params: RankParams) -> RankVector {
    rank_graph(&LemmaGraph::build(tokens, params.window), params)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedWord {
    pub word: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Relevance {
    pub relevant: bool,
    pub matched: Vec<String>,
    pub top: Vec<RankedWord>,
}

/// A keyword counts when it ranks in the top `k`; a multi-word keyword
/// counts when its words occur consecutively and all rank in the top `2k`.
pub fn is_relevant<S: AsRef<str>>(
    text: &str,
    keywords: &[S],
    k: usize,
    params: RankParams,
) -> Relevance {
    let tokens = extract_candidates(text);
    let ranks = rank(&tokens, params);
    let ordered = ranks.ordered();
    let top_k: HashSet<&str> = ordered.iter().take(k).map(|(w, _)| *w).collect();
    let top_2k: HashSet<&str> = ordered.iter().take(2 * k).map(|(w, _)| *w).collect();
    let mut matched = Vec::new();
    for kw in keywords {
        let words = extract_candidates(kw.as_ref());
        let hit = match words.len() {
            0 => false,
            1 => top_k.contains(words[0].as_str()),
            len => {
                tokens.windows(len).any(|w| w == words.as_slice())
                    && words.iter().all(|w| top_2k.contains(w.as_str()))
            }
        };
        if hit {
            matched.push(kw.as_ref().to_string());
        }
    }
    Relevance {
        relevant: !matched.is_empty(),
        matched,
        top: ordered
            .into_iter()
            .take(k)
            .map(|(w, s)| RankedWord {
                word: w.to_string(),
                score: s,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn stopword_list_size() {
        let n = stopwords().len();
        assert!((100..=150).contains(&n), "{n}");
    }

    #[test]
    fn candidates() {
        assert_eq!(
            extract_candidates("A WebAssembly port of SQLite"),
            toks("webassembly port sqlite")
        );
        assert!(extract_candidates("").is_empty());
        assert_eq!(
            extract_candidates("Build with Emscripten: `emcc`"),
            toks("build emscripten emcc")
        );
        assert_eq!(
            extract_candidates("# Title\n* item 42 x"),
            toks("title item")
        );
    }

    #[test]
    fn single_node_is_one() {
        let r = rank(&toks("wasm wasm wasm"), RankParams::default());
        assert_eq!(r.scores["wasm"], 1.0);
    }

    #[test]
    fn two_nodes_equal() {
        let r = rank(
            &toks("a b a b a"),
            RankParams {
                window: 2,
                ..Default::default()
            },
        );
        assert!((r.scores["a"] - 0.5).abs() < 1e-9);
        assert!((r.scores["a"] - r.scores["b"]).abs() < 1e-9);
    }

    #[test]
    fn path_graph_closed_form() {
        let r = rank(
            &toks("a b c"),
            RankParams {
                window: 2,
                eps: 1e-12,
                max_iter: 2000,
                ..Default::default()
            },
        );
        // r_a = (1-d)/3 + d r_b / 2, r_b = (1-d)/3 + d (r_a + r_c), r_a = r_c
        let d = 0.85;
        let t = (1.0 - d) / 3.0;
        let ra = (t + d * t / 2.0) / (1.0 - d * d);
        let rb = t + 2.0 * d * ra;
        assert!((r.scores["a"] - ra).abs() < 1e-9);
        assert!((r.scores["b"] - rb).abs() < 1e-9);
        assert!((ra - 0.256757).abs() < 1e-6);
    }

    #[test]
    fn empty_tokens() {
        assert!(rank(&[], RankParams::default()).scores.is_empty());
    }

    #[test]
    fn bigram_rule() {
        let text = "This library is a web assembly runtime. The web assembly runtime runs modules.";
        let r = is_relevant(text, DEFAULT_KEYWORDS, 15, RankParams::default());
        assert!(r.relevant);
        assert_eq!(r.matched, vec!["web assembly"]);
    }

    #[test]
    fn unrelated_text() {
        let r = is_relevant(
            "A cooking app with recipes, shopping lists and meal plans.",
            DEFAULT_KEYWORDS,
            15,
            RankParams::default(),
        );
        assert!(!r.relevant);
    }
}
