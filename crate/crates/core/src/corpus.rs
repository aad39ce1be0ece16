//! Word-adjacency networks from part-of-speech tagged text.
//!
//! Input is one `token<TAB>tag` per line with blank lines separating
//! documents. Each adjective or noun above the frequency threshold becomes a
//! vertex labelled by its majority class, and a directed edge `u → v` is
//! added whenever `v` immediately follows `u`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{ComponentMode, Graph};
use crate::io::LabelMap;
use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Token { word: String, tag: String },
    Separator,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaggedStream {
    records: Vec<Record>,
}

impl TaggedStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `token<TAB>tag` lines; tokens are case-folded.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                s.push_separator();
                continue;
            }
            let Some((word, tag)) = line.split_once('\t') else {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected token<TAB>tag, got '{line}'"),
                });
            };
            let (word, tag) = (word.trim(), tag.trim());
            if word.is_empty() || tag.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "empty token or tag".into(),
                });
            }
            s.push_token(word, tag);
        }
        Ok(s)
    }

    pub fn push_token(&mut self, word: &str, tag: &str) {
        self.records.push(Record::Token {
            word: word.to_lowercase(),
            tag: tag.to_string(),
        });
    }

    pub fn push_separator(&mut self) {
        self.records.push(Record::Separator);
    }

    pub fn from_tokens<'a>(tokens: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut s = Self::new();
        for (w, t) in tokens {
            s.push_token(w, t);
        }
        s
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    /// The same records in reverse order.
    pub fn reversed(&self) -> Self {
        TaggedStream {
            records: self.records.iter().rev().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WordClass {
    Adjective = 0,
    Noun = 1,
}

impl WordClass {
    pub fn block(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestConfig {
    pub adjective_tags: BTreeSet<String>,
    pub noun_tags: BTreeSet<String>,
    pub min_count: u64,
    pub multigraph: bool,
    pub restrict_to_giant: bool,
    /// Let adjacency run across tokens outside the vocabulary instead of breaking at them.
    pub bridge_nonvocab: bool,
}

fn tag_set(tags: &[&str]) -> BTreeSet<String> {
    tags.iter().map(|t| t.to_string()).collect()
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            adjective_tags: tag_set(&["JJ", "JJR", "JJS", "JJT", "ADJ"]),
            noun_tags: tag_set(&["NN", "NNS", "NP", "NPS", "NOUN"]),
            min_count: 1,
            multigraph: true,
            restrict_to_giant: false,
            bridge_nonvocab: false,
        }
    }
}

/// Upper-cased tag with any hyphenated suffix (`NN-TL`, `JJ-HL`) removed.
pub fn normalize_tag(tag: &str) -> String {
    tag.split('-').next().unwrap_or(tag).trim().to_uppercase()
}

impl IngestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_count == 0 {
            return Err(Error::config("min_count must be at least 1"));
        }
        if let Some(t) = self.adjective_tags.intersection(&self.noun_tags).next() {
            return Err(Error::config(format!("tag '{t}' is both adjective and noun")));
        }
        Ok(())
    }

    pub fn classify(&self, tag: &str) -> Option<WordClass> {
        let t = normalize_tag(tag);
        if self.adjective_tags.contains(&t) {
            Some(WordClass::Adjective)
        } else if self.noun_tags.contains(&t) {
            Some(WordClass::Noun)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusNetwork {
    pub graph: Graph,
    /// Block 0 adjectives, block 1 nouns.
    pub truth: Partition,
    pub labels: LabelMap,
}

#[derive(Default)]
struct WordTally {
    adjective: u64,
    noun: u64,
}

pub fn build_network(stream: &TaggedStream, cfg: &IngestConfig) -> Result<CorpusNetwork> {
    cfg.validate()?;
    let mut tallies: HashMap<&str, WordTally> = HashMap::new();
    let mut first_seen: Vec<&str> = Vec::new();
    for rec in stream.records() {
        if let Record::Token { word, tag } = rec {
            if let Some(class) = cfg.classify(tag) {
                let t = tallies.entry(word).or_insert_with(|| {
                    first_seen.push(word);
                    WordTally::default()
                });
                match class {
                    WordClass::Adjective => t.adjective += 1,
                    WordClass::Noun => t.noun += 1,
                }
            }
        }
    }
    let mut labels = LabelMap::new();
    let mut classes = Vec::new();
    for w in first_seen {
        let t = &tallies[w];
        if t.adjective + t.noun >= cfg.min_count {
            labels.intern(w);
            // ties go to noun
            classes.push(if t.adjective > t.noun { WordClass::Adjective } else { WordClass::Noun });
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyVocabulary);
    }

    let mut pairs = Vec::new();
    let mut prev: Option<usize> = None;
    for rec in stream.records() {
        match rec {
            Record::Separator => prev = None,
            Record::Token { word, tag } => {
                let vertex = cfg.classify(tag).and_then(|_| labels.get(word));
                match vertex {
                    Some(v) => {
                        if let Some(u) = prev {
                            if u != v {
                                pairs.push((u, v, 1));
                            }
                        }
                        prev = Some(v);
                    }
                    None if cfg.bridge_nonvocab => {}
                    None => prev = None,
                }
            }
        }
    }
    let mut graph = Graph::new(labels.len(), true, pairs)?;
    if !cfg.multigraph {
        let simple: Vec<_> = graph.edges().iter().map(|e| (e.src, e.dst, 1)).collect();
        graph = Graph::new(labels.len(), true, simple)?;
    }
    let mut truth = Partition::new(2, classes.iter().map(|c| c.block()).collect())?;
    if cfg.restrict_to_giant {
        let (g, remap) = graph.giant_component(ComponentMode::Weak, None)?;
        truth = truth.remap(&remap);
        labels = labels.remap(&remap);
        graph = g;
    }
    Ok(CorpusNetwork { graph, truth, labels })
}

/// Vertex, adjective, noun and edge counts (edges with multiplicity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkSummary {
    pub n: usize,
    pub adjectives: usize,
    pub nouns: usize,
    pub edges: u64,
}

impl fmt::Display for NetworkSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n\tn_adj\tn_noun\tedges")?;
        write!(f, "{}\t{}\t{}\t{}", self.n, self.adjectives, self.nouns, self.edges)
    }
}

pub fn network_summary(graph: &Graph, truth: &Partition) -> Result<NetworkSummary> {
    if truth.len() != graph.num_vertices() {
        return Err(Error::contract("truth and graph sizes differ"));
    }
    let adjectives = truth.labels().iter().filter(|&&b| b == WordClass::Adjective.block()).count();
    Ok(NetworkSummary {
        n: graph.num_vertices(),
        adjectives,
        nouns: truth.len() - adjectives,
        edges: graph.num_edges(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> TaggedStream {
        TaggedStream::from_tokens([("big", "ADJ"), ("dog", "NOUN"), ("big", "ADJ"), ("dog", "NOUN")])
    }

    fn cfg(multigraph: bool) -> IngestConfig {
        IngestConfig { multigraph, ..Default::default() }
    }

    fn edge(net: &CorpusNetwork, a: &str, b: &str) -> u64 {
        net.graph.multiplicity(net.labels.get(a).unwrap(), net.labels.get(b).unwrap())
    }

    #[test]
    fn toy_multigraph() {
        let net = build_network(&toy(), &cfg(true)).unwrap();
        assert_eq!(edge(&net, "big", "dog"), 2);
        assert_eq!(edge(&net, "dog", "big"), 1);
        assert_eq!(net.truth.label(net.labels.get("big").unwrap()), 0);
        assert_eq!(net.truth.label(net.labels.get("dog").unwrap()), 1);
        let s = network_summary(&net.graph, &net.truth).unwrap();
        assert_eq!(s, NetworkSummary { n: 2, adjectives: 1, nouns: 1, edges: 3 });
    }

    #[test]
    fn toy_simple() {
        let net = build_network(&toy(), &cfg(false)).unwrap();
        assert_eq!(edge(&net, "big", "dog"), 1);
        assert_eq!(edge(&net, "dog", "big"), 1);
    }

    #[test]
    fn separators_break_adjacency() {
        let mut s = TaggedStream::new();
        for (w, t) in [("big", "ADJ"), ("dog", "NOUN"), ("red", "JJ")] {
            s.push_token(w, t);
            s.push_separator();
        }
        let net = build_network(&s, &cfg(true)).unwrap();
        assert_eq!(net.graph.num_vertices(), 3);
        assert_eq!(net.graph.num_edges(), 0);
        let s = network_summary(&net.graph, &net.truth).unwrap();
        assert_eq!(s.edges, 0);
    }

    #[test]
    fn nonvocab_tokens_break_or_bridge() {
        let s = TaggedStream::parse("Old\tJJ\nthe\tAT\nman\tNN-TL\n").unwrap();
        let plain = build_network(&s, &cfg(true)).unwrap();
        assert_eq!(plain.graph.num_edges(), 0);
        let bridged = build_network(&s, &IngestConfig { bridge_nonvocab: true, ..cfg(true) }).unwrap();
        assert_eq!(edge(&bridged, "old", "man"), 1);
    }

    #[test]
    fn repeated_word_is_not_a_loop() {
        let s = TaggedStream::from_tokens([("very", "JJ"), ("very", "JJ"), ("cat", "NN")]);
        let net = build_network(&s, &cfg(true)).unwrap();
        assert_eq!(net.graph.num_edges(), 1);
        assert_eq!(edge(&net, "very", "cat"), 1);
    }

    #[test]
    fn majority_class_with_noun_tiebreak() {
        let s = TaggedStream::from_tokens([
            ("light", "JJ"), ("light", "NN"), ("cold", "JJ"), ("cold", "JJ"), ("cold", "NN"),
        ]);
        let net = build_network(&s, &cfg(true)).unwrap();
        assert_eq!(net.truth.label(net.labels.get("light").unwrap()), 1);
        assert_eq!(net.truth.label(net.labels.get("cold").unwrap()), 0);
    }

    #[test]
    fn frequency_threshold_and_empty_vocabulary() {
        let s = TaggedStream::from_tokens([("a", "JJ"), ("b", "NN"), ("a", "JJ")]);
        let net = build_network(&s, &IngestConfig { min_count: 2, ..cfg(true) }).unwrap();
        assert_eq!(net.labels.labels(), &["a"]);
        let none = TaggedStream::from_tokens([("the", "AT")]);
        assert!(matches!(build_network(&none, &cfg(true)), Err(Error::EmptyVocabulary)));
    }

    #[test]
    fn case_folding_and_tag_suffixes() {
        let s = TaggedStream::parse("The\tAT\nBig\tJJ-HL\nDOG\tnn\n").unwrap();
        let net = build_network(&s, &cfg(true)).unwrap();
        assert_eq!(edge(&net, "big", "dog"), 1);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(TaggedStream::parse("a\tJJ\nnotab\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(true);
        c.noun_tags.insert("JJ".into());
        assert!(build_network(&toy(), &c).is_err());
        assert!(build_network(&toy(), &IngestConfig { min_count: 0, ..cfg(true) }).is_err());
    }

    #[test]
    fn giant_restriction_keeps_labels_aligned() {
        let mut s = TaggedStream::from_tokens([("a", "JJ"), ("b", "NN"), ("c", "JJ"), ("d", "NN")]);
        s.push_separator();
        s.push_token("x", "NN");
        s.push_token("y", "JJ");
        let net = build_network(&s, &IngestConfig { restrict_to_giant: true, ..cfg(true) }).unwrap();
        assert_eq!(net.labels.labels(), &["a", "b", "c", "d"]);
        assert_eq!(net.truth.labels(), &[0, 1, 0, 1]);
    }

    fn stream_strategy() -> impl Strategy<Value = TaggedStream> {
        let words = ["a", "b", "c", "d", "e"];
        let tags = ["JJ", "NN", "AT", "VB"];
        prop::collection::vec(prop::option::weighted(0.9, (0..5usize, 0..4usize)), 1..80).prop_map(
            move |recs| {
                let mut s = TaggedStream::new();
                for r in recs {
                    match r {
                        Some((w, t)) => s.push_token(words[w], tags[t]),
                        None => s.push_separator(),
                    }
                }
                s
            },
        )
    }

    fn edge_set(net: &CorpusNetwork) -> Vec<(String, String, u64)> {
        let mut v: Vec<_> = net
            .graph
            .edges()
            .iter()
            .map(|e| (net.labels.label(e.src).to_string(), net.labels.label(e.dst).to_string(), e.count))
            .collect();
        v.sort();
        v
    }

    proptest! {
        #[test]
        fn simple_is_support_of_multigraph(s in stream_strategy(), bridge in any::<bool>()) {
            let base = IngestConfig { bridge_nonvocab: bridge, ..cfg(true) };
            if let Ok(multi) = build_network(&s, &base) {
                let simple = build_network(&s, &IngestConfig { multigraph: false, ..base }).unwrap();
                let support: Vec<_> = edge_set(&multi).into_iter().map(|(a, b, _)| (a, b, 1)).collect();
                prop_assert_eq!(edge_set(&simple), support);
            }
        }

        #[test]
        fn reversal_transposes(s in stream_strategy()) {
            if let Ok(fwd) = build_network(&s, &cfg(true)) {
                let back = build_network(&s.reversed(), &cfg(true)).unwrap();
                let mut t: Vec<_> = edge_set(&fwd).into_iter().map(|(a, b, c)| (b, a, c)).collect();
                t.sort();
                prop_assert_eq!(edge_set(&back), t);
            }
        }

        #[test]
        fn raising_threshold_never_adds(s in stream_strategy(), m in 1u64..4) {
            let lo = build_network(&s, &IngestConfig { min_count: m, ..cfg(true) });
            let hi = build_network(&s, &IngestConfig { min_count: m + 1, ..cfg(true) });
            if let (Ok(lo), Ok(hi)) = (lo, hi) {
                prop_assert!(hi.graph.num_vertices() <= lo.graph.num_vertices());
                prop_assert!(hi.graph.num_edges() <= lo.graph.num_edges());
            }
        }
    }
}
