//! Utterance n-grams crossed with logical-form tree-grams.
//!
//! Every feature key has an utterance part and a logical-form part joined by
//! `|`. The part prefixes depend on the model variant:
//!
//! | variant  | utterance part            | logical-form part        |
//! |----------|---------------------------|--------------------------|
//! | full     | `u:` n-gram               | `z:` tree-gram           |
//! | half     | `u:` n-gram               | `lf:` canonical form     |
//! | memorize | `x:` whole utterance      | `lf:` canonical form     |
//!
//! e.g. `u:remove|z:(remove,1,all)`. The logical-form part never contains
//! `|`, so a key splits unambiguously at its last `|`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lf::{LogicalForm, Node};

pub const DEFAULT_MAX_DEPTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Indicator on (whole utterance, whole logical form).
    Memorize,
    /// Utterance n-grams conjoined with the whole logical form.
    Half,
    /// Utterance n-grams conjoined with tree-grams.
    Full,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Memorize, Variant::Half, Variant::Full];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Memorize => "memorize",
            Variant::Half => "half",
            Variant::Full => "full",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}` (expected memorize, half or full)"))
    }
}

/// Lowercases and splits on whitespace runs.
pub fn tokenize(utterance: &str) -> Vec<String> {
    utterance
        .split_whitespace()
        .map(str::to_lowercase)
        .collect()
}

/// Unigrams, bigrams, trigrams and skip-trigrams, sorted and deduplicated.
///
/// Unigrams are position independent. Skip-trigrams keep the outer tokens
/// of a trigram, written `a * c`.
pub fn utterance_features<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    let t: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
    let mut feats: Vec<String> = Vec::new();
    feats.extend(t.iter().map(|w| w.to_string()));
    feats.extend(t.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    for w in t.windows(3) {
        feats.push(format!("{} {} {}", w[0], w[1], w[2]));
        feats.push(format!("{} * {}", w[0], w[2]));
    }
    feats.sort();
    feats.dedup();
    feats
}

/// Tree-grams rooted at `node` with exactly `depth` levels of expansion.
///
/// Depth 0 is the predicate itself; depth `d` is `(h,i,g)` for every
/// argument position `i` (1-based) and every `g` rooted at argument `i`
/// with depth `d-1`.
pub fn rooted_grams(node: Node<'_>, depth: usize) -> Vec<String> {
    if depth == 0 {
        return vec![node.predicate().to_string()];
    }
    let pred = node.predicate();
    node.children()
        .into_iter()
        .enumerate()
        .flat_map(|(i, child)| {
            rooted_grams(child, depth - 1)
                .into_iter()
                .map(move |g| format!("({pred},{},{g})", i + 1))
        })
        .collect()
}

/// All tree-grams of `lf` up to `max_depth`, with multiplicities: a gram
/// rooted at several nodes is counted once per node.
pub fn tree_grams(lf: &LogicalForm, max_depth: usize) -> BTreeMap<String, usize> {
    let mut bag = BTreeMap::new();
    for node in lf.node().descendants() {
        for d in 0..=max_depth {
            for g in rooted_grams(node, d) {
                *bag.entry(g).or_insert(0) += 1;
            }
        }
    }
    bag
}

/// Sparse feature vector; zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(BTreeMap<String, f64>);

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> f64 {
        self.0.get(key).copied().unwrap_or(0.0)
    }

    pub fn add(&mut self, key: impl Into<String>, value: f64) {
        let key = key.into();
        let entry = self.0.entry(key.clone()).or_insert(0.0);
        *entry += value;
        if *entry == 0.0 {
            self.0.remove(&key);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    /// `self += scale * other`
    pub fn add_scaled(&mut self, other: &FeatureVector, scale: f64) {
        for (k, v) in other.iter() {
            self.add(k, scale * v);
        }
    }

    pub fn norm(&self) -> f64 {
        self.0.values().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl FromIterator<(String, f64)> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        let mut fv = FeatureVector::new();
        for (k, v) in iter {
            fv.add(k, v);
        }
        fv
    }
}

pub fn join_key(utterance_part: &str, lf_part: &str) -> String {
    format!("{utterance_part}|{lf_part}")
}

/// Splits a feature key into its utterance and logical-form parts.
pub fn split_key(key: &str) -> Option<(&str, &str)> {
    key.rsplit_once('|')
}

/// A logical form's feature parts and their counts.
pub type LfParts = Vec<(String, f64)>;

/// Computes feature vectors for one model variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Featurizer {
    pub variant: Variant,
    pub max_depth: usize,
}

impl Featurizer {
    pub fn new(variant: Variant) -> Self {
        Featurizer {
            variant,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }

    /// Prefixed utterance parts. Empty for an empty utterance.
    pub fn utterance_parts<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        match self.variant {
            Variant::Full | Variant::Half => utterance_features(tokens)
                .into_iter()
                .map(|f| format!("u:{f}"))
                .collect(),
            Variant::Memorize if tokens.is_empty() => Vec::new(),
            Variant::Memorize => {
                let joined: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
                vec![format!("x:{}", joined.join(" "))]
            }
        }
    }

    /// Prefixed logical-form parts with their counts.
    pub fn lf_parts(&self, lf: &LogicalForm) -> LfParts {
        match self.variant {
            Variant::Full => tree_grams(lf, self.max_depth)
                .into_iter()
                .map(|(g, n)| (format!("z:{g}"), n as f64))
                .collect(),
            Variant::Half | Variant::Memorize => vec![(format!("lf:{lf}"), 1.0)],
        }
    }

    /// φ(x, z): the cross product of utterance parts and logical-form parts.
    pub fn phi<S: AsRef<str>>(&self, tokens: &[S], lf: &LogicalForm) -> FeatureVector {
        let lf_parts = self.lf_parts(lf);
        let mut fv = FeatureVector::new();
        for u in self.utterance_parts(tokens) {
            for (l, n) in &lf_parts {
                fv.add(join_key(&u, l), *n);
            }
        }
        fv
    }
}
