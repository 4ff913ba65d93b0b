//! Cross-lingual document pairing.
//!
//! Documents are compared through TF-IDF vectors over anchor tokens:
//! numbers, and lowercased tokens of four or more characters. Across a
//! language pair such tokens only match when they are shared verbatim
//! (names, figures, cognates), so cosine similarity needs no dictionary.
//! When aligning collections, terms that occur on only one side are dropped
//! before weighting: they can never match and would only swamp the anchors
//! in the vector norms.
//!
//! Selection is a greedy one-to-one matching over the score matrix,
//! repeated for up to `max_iter` rounds. Each round re-weights the
//! still-unassigned documents among themselves and gives previously
//! rejected documents another chance.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use once_cell::sync::Lazy;
use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::TextDocument;

pub const MIN_ANCHOR_CHARS: usize = 4;

static EDGE_PUNCT: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\p{P}+|\p{P}+$").unwrap());
static NUMBER: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\d+([.,:/]\d+)*$").unwrap());

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentPair {
    pub source_id: String,
    pub target_id: String,
    pub score: f64,
    /// Source characters divided by target characters.
    pub size_ratio: f64,
    /// Round in which the pair was accepted, starting at 1.
    pub iteration: usize,
}

impl DocumentPair {
    pub fn id(&self) -> String {
        format!("{}|{}", self.source_id, self.target_id)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocAlignResult {
    pub pairs: Vec<DocumentPair>,
    pub unmapped: Vec<String>,
    pub iterations_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DocAlignParams {
    pub threshold: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub max_iter: usize,
}

impl Default for DocAlignParams {
    fn default() -> Self {
        DocAlignParams {
            threshold: 0.1,
            min_ratio: 0.75,
            max_ratio: 1.33,
            max_iter: 3,
        }
    }
}

impl DocAlignParams {
    pub fn accepts(&self, score: f64, size_ratio: f64) -> bool {
        score >= self.threshold && size_ratio >= self.min_ratio && size_ratio <= self.max_ratio
    }
}

pub fn anchor_tokens(doc: &TextDocument) -> Vec<String> {
    let mut out = Vec::new();
    for line in &doc.lines {
        for raw in line.split_whitespace() {
            let tok = EDGE_PUNCT.replace_all(raw, "");
            if NUMBER.is_match(&tok) || tok.chars().count() >= MIN_ANCHOR_CHARS {
                out.push(tok.to_lowercase());
            }
        }
    }
    out
}

/// L2-normalized sparse vectors, entries sorted by term.
type SparseVec = Vec<(String, f64)>;

fn tfidf_vectors(token_lists: &[Vec<String>]) -> Vec<SparseVec> {
    let n = token_lists.len() as f64;
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    let counts: Vec<BTreeMap<&str, usize>> = token_lists
        .iter()
        .map(|toks| {
            let mut tf = BTreeMap::new();
            for t in toks {
                *tf.entry(t.as_str()).or_insert(0) += 1;
            }
            tf
        })
        .collect();
    for tf in &counts {
        for term in tf.keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    counts
        .iter()
        .map(|tf| {
            let mut v: SparseVec = tf
                .iter()
                .map(|(&term, &c)| {
                    let idf = ((1.0 + n) / (1.0 + df[term] as f64)).ln() + 1.0;
                    (term.to_string(), (1.0 + (c as f64).ln()) * idf)
                })
                .collect();
            let norm = v.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|(_, w)| *w /= norm);
            }
            v
        })
        .collect()
}

/// Merge-join dot product; the summation order depends only on the terms,
/// so `cosine(a, b) == cosine(b, a)` exactly.
fn cosine(a: &SparseVec, b: &SparseVec) -> f64 {
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    dot.clamp(0.0, 1.0)
}

/// Similarity of two documents in [0, 1], weighting terms over just the
/// two of them and keeping every anchor token of both.
pub fn score_pair(src: &TextDocument, tgt: &TextDocument) -> f64 {
    let vecs = tfidf_vectors(&[anchor_tokens(src), anchor_tokens(tgt)]);
    cosine(&vecs[0], &vecs[1])
}

pub fn size_ratio(src: &TextDocument, tgt: &TextDocument) -> f64 {
    if tgt.char_count == 0 {
        return f64::INFINITY;
    }
    src.char_count as f64 / tgt.char_count as f64
}

struct Candidate {
    src: usize,
    tgt: usize,
    score: f64,
    ratio: f64,
}

pub fn align_documents(
    sources: &[TextDocument],
    targets: &[TextDocument],
    params: &DocAlignParams,
) -> DocAlignResult {
    let src_tokens: Vec<Vec<String>> = sources.par_iter().map(anchor_tokens).collect();
    let tgt_tokens: Vec<Vec<String>> = targets.par_iter().map(anchor_tokens).collect();

    let mut src_open: Vec<usize> = (0..sources.len()).collect();
    let mut tgt_open: Vec<usize> = (0..targets.len()).collect();
    let mut pairs = Vec::new();
    let mut iterations_used = 0;

    for iteration in 1..=params.max_iter {
        if src_open.is_empty() || tgt_open.is_empty() {
            break;
        }
        iterations_used = iteration;

        let src_terms: BTreeSet<&str> = src_open
            .iter()
            .flat_map(|&i| src_tokens[i].iter().map(String::as_str))
            .collect();
        let tgt_terms: BTreeSet<&str> = tgt_open
            .iter()
            .flat_map(|&j| tgt_tokens[j].iter().map(String::as_str))
            .collect();
        let shared: BTreeSet<&str> = src_terms.intersection(&tgt_terms).copied().collect();
        let keep = |toks: &Vec<String>| -> Vec<String> {
            toks.iter()
                .filter(|t| shared.contains(t.as_str()))
                .cloned()
                .collect()
        };
        let lists: Vec<Vec<String>> = src_open
            .iter()
            .map(|&i| keep(&src_tokens[i]))
            .chain(tgt_open.iter().map(|&j| keep(&tgt_tokens[j])))
            .collect();
        let vecs = tfidf_vectors(&lists);
        let (src_vecs, tgt_vecs) = vecs.split_at(src_open.len());

        let mut candidates: Vec<Candidate> = src_open
            .par_iter()
            .enumerate()
            .flat_map_iter(|(a, &si)| {
                tgt_open.iter().enumerate().map(move |(b, &ti)| Candidate {
                    src: si,
                    tgt: ti,
                    score: cosine(&src_vecs[a], &tgt_vecs[b]),
                    ratio: size_ratio(&sources[si], &targets[ti]),
                })
            })
            .filter(|c| params.accepts(c.score, c.ratio))
            .collect();
        candidates.sort_by(|x, y| {
            y.score
                .total_cmp(&x.score)
                .then_with(|| sources[x.src].doc_id.cmp(&sources[y.src].doc_id))
                .then_with(|| targets[x.tgt].doc_id.cmp(&targets[y.tgt].doc_id))
        });

        let mut taken_src = BTreeSet::new();
        let mut taken_tgt = BTreeSet::new();
        for c in candidates {
            if taken_src.contains(&c.src) || taken_tgt.contains(&c.tgt) {
                continue;
            }
            taken_src.insert(c.src);
            taken_tgt.insert(c.tgt);
            pairs.push(DocumentPair {
                source_id: sources[c.src].doc_id.clone(),
                target_id: targets[c.tgt].doc_id.clone(),
                score: c.score,
                size_ratio: c.ratio,
                iteration,
            });
        }
        if taken_src.is_empty() {
            break;
        }
        src_open.retain(|i| !taken_src.contains(i));
        tgt_open.retain(|j| !taken_tgt.contains(j));
    }

    let mut unmapped: Vec<String> = src_open
        .iter()
        .map(|&i| sources[i].doc_id.clone())
        .collect();
    unmapped.sort();
    let mut tgt_unmapped: Vec<String> = tgt_open
        .iter()
        .map(|&j| targets[j].doc_id.clone())
        .collect();
    tgt_unmapped.sort();
    unmapped.extend(tgt_unmapped);

    DocAlignResult {
        pairs,
        unmapped,
        iterations_used,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Origin;
    use proptest::prelude::*;

    fn doc(id: &str, text: &str) -> TextDocument {
        TextDocument::from_text(
            id,
            text,
            Origin {
                path: id.into(),
                extractor: "plain".into(),
            },
        )
    }

    /// Cosine over plain count vectors with idf = ln(3/(1+df)) + 1, written
    /// out directly for two documents.
    fn cosine_by_hand(a: &[(&str, f64)], b: &[(&str, f64)]) -> f64 {
        let dot: f64 = a
            .iter()
            .filter_map(|(t, w)| b.iter().find(|(u, _)| u == t).map(|(_, v)| w * v))
            .sum();
        let na = a.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        let nb = b.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    #[test]
    fn identical_documents_score_one() {
        let a = doc("a", "In 2020 the covid programme expanded.");
        assert!((score_pair(&a, &a.clone()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_documents_score_zero() {
        let a = doc("a", "one two six");
        let b = doc("b", "aon dó sé");
        assert_eq!(score_pair(&a, &b), 0.0);
        assert_eq!(score_pair(&doc("e", ""), &b), 0.0);
    }

    #[test]
    fn shared_anchor_beats_decoy() {
        let src = doc("s", "2020 covid");
        let tgt = doc("t", "2020");
        let decoy = doc("d", "1999");
        let s_t = score_pair(&src, &tgt);
        let s_d = score_pair(&src, &decoy);
        // two-document idf: shared term ln(3/3)+1 = 1, unshared ln(3/2)+1
        let unshared = (1.5f64).ln() + 1.0;
        let expect = cosine_by_hand(&[("2020", 1.0), ("covid", unshared)], &[("2020", 1.0)]);
        assert!((s_t - expect).abs() < 1e-12);
        assert!(s_t > s_d);
        assert_eq!(s_d, 0.0);
    }

    #[test]
    fn score_is_symmetric() {
        let a = doc("a", "The 2019 report on Galway hospitals and 14.5% growth.");
        let b = doc("b", "Tuarascáil 2019 ar ospidéil Galway agus fás 14.5%.");
        assert_eq!(score_pair(&a, &b), score_pair(&b, &a));
    }

    #[test]
    fn anchors() {
        let d = doc(
            "a",
            "In 2020, the HSE's (Covid) rate was 14.5% of 1,000 cases.",
        );
        assert_eq!(
            anchor_tokens(&d),
            ["2020", "hse's", "covid", "rate", "14.5", "1,000", "cases"]
        );
    }

    fn text_of_len(anchor: &str, n: usize) -> String {
        let mut s = format!("{anchor} ");
        while s.chars().count() < n {
            s.push('x');
        }
        s
    }

    #[test]
    fn accepts_pair_within_ratio() {
        let s = doc("s", &text_of_len("galway 2020", 80));
        let t = doc("t", &text_of_len("galway 2020", 100));
        let r = align_documents(&[s], &[t], &DocAlignParams::default());
        assert_eq!(r.pairs.len(), 1);
        assert!((r.pairs[0].size_ratio - 0.8).abs() < 1e-12);
        assert!(r.unmapped.is_empty());
    }

    #[test]
    fn rejects_pair_outside_ratio() {
        let s = doc("s", &text_of_len("galway 2020", 200));
        let t = doc("t", &text_of_len("galway 2020", 100));
        let r = align_documents(&[s], &[t], &DocAlignParams::default());
        assert!(r.pairs.is_empty());
        assert_eq!(r.unmapped, ["s", "t"]);
    }

    #[test]
    fn weaker_source_never_steals_target() {
        let a = doc("A", "2020 2021 galway cork");
        let b = doc("B", "2020 galway xxxxxxxx");
        let t = doc("T", "2020 2021 galway cork");
        let params = DocAlignParams {
            min_ratio: 0.0,
            max_ratio: f64::INFINITY,
            ..Default::default()
        };
        let r = align_documents(&[b.clone(), a.clone()], std::slice::from_ref(&t), &params);
        assert_eq!(r.pairs.len(), 1);
        assert_eq!(
            (r.pairs[0].source_id.as_str(), r.pairs[0].target_id.as_str()),
            ("A", "T")
        );
        assert_eq!(r.unmapped, ["B"]);
        // brute force: of the two possible single matchings the greedy one has the higher score
        assert!(score_pair(&a, &t) > score_pair(&b, &t));
    }

    #[test]
    fn one_sided_vocabulary_does_not_swamp_anchors() {
        // Long monolingual text around a couple of shared anchors per pair.
        let en = "the minister announced funding for hospitals across the country this week";
        let ga = "beidh an roinn sláinte ag obair ar phlean nua do sheirbhísí meabhairshláinte";
        let srcs = [
            doc("s0", &format!("{en} Carrowkeel 1207 {en} {en}")),
            doc("s1", &format!("{en} Drumlish 2415 {en} {en}")),
        ];
        let tgts = [
            doc("t0", &format!("{ga} Drumlish 2415 {ga} {ga}")),
            doc("t1", &format!("{ga} Carrowkeel 1207 {ga} {ga}")),
        ];
        assert!(score_pair(&srcs[0], &tgts[1]) < DocAlignParams::default().threshold);
        let r = align_documents(&srcs, &tgts, &DocAlignParams::default());
        let got: Vec<(&str, &str)> = r
            .pairs
            .iter()
            .map(|p| (p.source_id.as_str(), p.target_id.as_str()))
            .collect();
        assert_eq!(got, [("s0", "t1"), ("s1", "t0")]);
        assert!(r.pairs.iter().all(|p| (p.score - 1.0).abs() < 1e-12));
    }

    #[test]
    fn empty_inputs() {
        let r = align_documents(&[], &[], &DocAlignParams::default());
        assert!(r.pairs.is_empty() && r.unmapped.is_empty());
        assert_eq!(r.iterations_used, 0);
        let r = align_documents(&[doc("a", "x")], &[], &DocAlignParams::default());
        assert_eq!(r.unmapped, ["a"]);
    }

    fn arb_docs(prefix: &'static str) -> impl Strategy<Value = Vec<TextDocument>> {
        let vocab = [
            "2019", "2020", "2021", "galway", "cork", "dublin", "covid", "vaccine", "1,000", "14.5",
        ];
        prop::collection::vec(
            (prop::collection::vec(0..vocab.len(), 1..6), 20usize..60),
            0..6,
        )
        .prop_map(move |specs| {
            specs
                .into_iter()
                .enumerate()
                .map(|(i, (words, pad))| {
                    let mut text: Vec<String> =
                        words.iter().map(|&w| vocab[w].to_string()).collect();
                    text.push("z".repeat(pad));
                    doc(&format!("{prefix}{i}"), &text.join(" "))
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn matching_is_one_to_one_and_constrained(
            srcs in arb_docs("s"),
            tgts in arb_docs("t"),
            threshold in 0.0f64..0.6,
            max_iter in 1usize..5,
        ) {
            let params = DocAlignParams { threshold, max_iter, ..Default::default() };
            let r = align_documents(&srcs, &tgts, &params);
            let mut seen = BTreeSet::new();
            for p in &r.pairs {
                prop_assert!(seen.insert(p.source_id.clone()));
                prop_assert!(seen.insert(p.target_id.clone()));
                prop_assert!(params.accepts(p.score, p.size_ratio));
            }
            for u in &r.unmapped {
                prop_assert!(seen.insert(u.clone()));
            }
            prop_assert_eq!(seen.len(), srcs.len() + tgts.len());
            prop_assert!(r.iterations_used <= max_iter);

            let more = align_documents(&srcs, &tgts, &DocAlignParams { max_iter: max_iter + 3, ..params });
            if r.iterations_used < max_iter {
                prop_assert_eq!(&more, &r);
            }
        }

        #[test]
        fn permutation_invariant(srcs in arb_docs("s"), tgts in arb_docs("t"), seed in any::<u64>()) {
            let params = DocAlignParams::default();
            let base = align_documents(&srcs, &tgts, &params);
            let mut s2 = srcs.clone();
            let mut t2 = tgts.clone();
            let k = (seed as usize) % (s2.len().max(1));
            let n = s2.len();
            s2.rotate_left(k.min(n));
            t2.reverse();
            prop_assert_eq!(align_documents(&s2, &t2, &params), base);
        }
    }
}
