use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{LmError, BOS, EOS};
use crate::lexing::TokenStream;

pub(crate) type Sym = u32;
pub(crate) const BOS_ID: Sym = 0;
pub(crate) const EOS_ID: Sym = 1;

/// Interned token texts. Ids 0 and 1 are the start and end markers.
#[derive(Debug, Clone)]
pub(crate) struct SymbolTable {
    texts: Vec<String>,
    ids: HashMap<String, Sym>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        let mut t = SymbolTable { texts: Vec::new(), ids: HashMap::new() };
        t.intern(BOS);
        t.intern(EOS);
        t
    }
}

impl SymbolTable {
    pub fn intern(&mut self, text: &str) -> Sym {
        if let Some(id) = self.ids.get(text) {
            return *id;
        }
        let id = Sym::try_from(self.texts.len()).expect("fewer than 2^32 symbols");
        self.texts.push(text.to_string());
        self.ids.insert(text.to_string(), id);
        id
    }

    pub fn get(&self, text: &str) -> Option<Sym> {
        self.ids.get(text).copied()
    }

    pub fn text(&self, id: Sym) -> &str {
        &self.texts[id as usize]
    }
}

/// Occurrence counts of every k-gram, k = 1..=order, over padded token
/// sequences.
///
/// Each sequence is padded with `order - 1` start markers and one end marker
/// before counting.
#[derive(Debug, Clone)]
pub struct NGramCounts {
    order: usize,
    min_count: u32,
    pub(crate) symbols: SymbolTable,
    pub(crate) vocabulary: BTreeSet<Sym>,
    /// `grams[k - 1]` holds the k-grams.
    pub(crate) grams: Vec<HashMap<Vec<Sym>, u64>>,
    sequences: u64,
}

impl NGramCounts {
    pub fn new(order: usize) -> Result<Self, LmError> {
        if order < 1 {
            return Err(LmError::InvalidOrder(order));
        }
        Ok(NGramCounts {
            order,
            min_count: 1,
            symbols: SymbolTable::default(),
            vocabulary: BTreeSet::new(),
            grams: vec![HashMap::new(); order],
            sequences: 0,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Frequency threshold the vocabulary was built with (1 = no rare-token
    /// mapping).
    pub fn min_count(&self) -> u32 {
        self.min_count
    }

    pub(crate) fn set_min_count(&mut self, min_count: u32) {
        self.min_count = min_count;
    }

    /// Number of sequences counted.
    pub fn sequences(&self) -> u64 {
        self.sequences
    }

    /// Counts one padded sequence.
    pub fn add_sequence<I, S>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut padded: Vec<Sym> = vec![BOS_ID; self.order - 1];
        for tok in tokens {
            let id = self.symbols.intern(tok.as_ref());
            self.vocabulary.insert(id);
            padded.push(id);
        }
        padded.push(EOS_ID);
        for k in 1..=self.order {
            let table = &mut self.grams[k - 1];
            for window in padded.windows(k) {
                match table.get_mut(window) {
                    Some(c) => *c += 1,
                    None => {
                        table.insert(window.to_vec(), 1);
                    }
                }
            }
        }
        self.sequences += 1;
    }

    /// Adds a token to the vocabulary without counting it (used for the
    /// unknown-token placeholder).
    pub fn reserve(&mut self, token: &str) {
        let id = self.symbols.intern(token);
        self.vocabulary.insert(id);
    }

    /// Pointwise sum of two count tables of the same order.
    pub fn merge(&self, other: &NGramCounts) -> Result<NGramCounts, LmError> {
        if self.order != other.order {
            return Err(LmError::OrderMismatch { left: self.order, right: other.order });
        }
        let mut out = self.clone();
        out.min_count = self.min_count.max(other.min_count);
        let remap: Vec<Sym> = other.symbols.texts.iter().map(|t| out.symbols.intern(t)).collect();
        for id in &other.vocabulary {
            out.vocabulary.insert(remap[*id as usize]);
        }
        for (k, table) in other.grams.iter().enumerate() {
            for (gram, c) in table {
                let key: Vec<Sym> = gram.iter().map(|s| remap[*s as usize]).collect();
                *out.grams[k].entry(key).or_insert(0) += c;
            }
        }
        out.sequences += other.sequences;
        Ok(out)
    }

    fn ids(&self, tokens: &[&str]) -> Option<Vec<Sym>> {
        tokens.iter().map(|t| self.symbols.get(t)).collect()
    }

    /// Count of a k-gram (k ≤ order); 0 when unseen.
    pub fn count(&self, gram: &[&str]) -> u64 {
        if gram.is_empty() || gram.len() > self.order {
            return 0;
        }
        self.ids(gram).and_then(|key| self.grams[gram.len() - 1].get(&key).copied()).unwrap_or(0)
    }

    /// Number of times `context` is followed by some token, i.e. the sum of
    /// the counts of its one-token extensions.
    pub fn context_count(&self, context: &[&str]) -> u64 {
        if context.len() >= self.order {
            return 0;
        }
        let Some(key) = self.ids(context) else { return 0 };
        self.grams[context.len()].iter().filter(|(g, _)| g[..context.len()] == key[..]).map(|(_, c)| *c).sum()
    }

    /// Vocabulary texts in sorted order (markers excluded).
    pub fn vocabulary(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.vocabulary.iter().map(|id| self.symbols.text(*id)).collect();
        v.sort_unstable();
        v
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.symbols.get(token).is_some_and(|id| self.vocabulary.contains(&id))
    }

    /// All stored k-grams as texts.
    pub fn grams(&self, k: usize) -> impl Iterator<Item = (Vec<&str>, u64)> {
        let table = if (1..=self.order).contains(&k) { Some(&self.grams[k - 1]) } else { None };
        table.into_iter().flat_map(|t| t.iter()).map(|(g, c)| (g.iter().map(|s| self.symbols.text(*s)).collect(), *c))
    }

    /// Number of distinct stored k-grams.
    pub fn distinct(&self, k: usize) -> usize {
        if (1..=self.order).contains(&k) {
            self.grams[k - 1].len()
        } else {
            0
        }
    }

    pub fn is_empty(&self) -> bool {
        self.grams[self.order - 1].is_empty()
    }

    /// Order-independent view used for equality.
    pub fn canonical(&self) -> (usize, BTreeSet<String>, BTreeMap<Vec<String>, u64>) {
        let vocab = self.vocabulary.iter().map(|id| self.symbols.text(*id).to_string()).collect();
        let mut grams = BTreeMap::new();
        for k in 1..=self.order {
            for (g, c) in self.grams(k) {
                grams.insert(g.into_iter().map(str::to_string).collect(), c);
            }
        }
        (self.order, vocab, grams)
    }
}

impl PartialEq for NGramCounts {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

/// Counts all k-grams (k ≤ `order`) of the given streams.
pub fn count_ngrams(streams: &[TokenStream], order: usize) -> Result<NGramCounts, LmError> {
    let mut counts = NGramCounts::new(order)?;
    for s in streams {
        counts.add_sequence(s.texts());
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(seqs: &[&[&str]], n: usize) -> NGramCounts {
        let mut c = NGramCounts::new(n).unwrap();
        for s in seqs {
            c.add_sequence(s.iter());
        }
        c
    }

    #[test]
    fn bigram_enumeration() {
        let c = counts(&[&["a", "b", "a"]], 2);
        let mut grams: Vec<(Vec<&str>, u64)> = c.grams(2).collect();
        grams.sort();
        assert_eq!(
            grams,
            vec![(vec!["<s>", "a"], 1), (vec!["a", "</s>"], 1), (vec!["a", "b"], 1), (vec!["b", "a"], 1),]
        );
        assert_eq!(c.vocabulary(), ["a", "b"]);
    }

    #[test]
    fn empty_stream_counts_markers() {
        let c = counts(&[&[]], 2);
        let grams: Vec<_> = c.grams(2).collect();
        assert_eq!(grams, vec![(vec!["<s>", "</s>"], 1)]);
        assert_eq!(c.vocabulary_size(), 0);
    }

    #[test]
    fn order_zero_rejected() {
        assert!(matches!(NGramCounts::new(0), Err(LmError::InvalidOrder(0))));
    }

    #[test]
    fn merge_laws() {
        let a = counts(&[&["a", "b", "c"], &["a"]], 3);
        let b = counts(&[&["c", "c", "d"]], 3);
        let empty = NGramCounts::new(3).unwrap();
        assert_eq!(a.merge(&empty).unwrap(), a);
        assert_eq!(a.merge(&b).unwrap(), b.merge(&a).unwrap());
        assert_eq!(a.merge(&b).unwrap(), counts(&[&["a", "b", "c"], &["a"], &["c", "c", "d"]], 3));
        let doubled = a.merge(&a).unwrap();
        for k in 1..=3 {
            for (g, c) in a.grams(k) {
                assert_eq!(doubled.count(&g), 2 * c);
            }
        }
        assert!(matches!(a.merge(&NGramCounts::new(2).unwrap()), Err(LmError::OrderMismatch { .. })));
    }

    #[test]
    fn marginalization() {
        let c = counts(&[&["a", "b", "a", "a"], &["b", "b"]], 3);
        assert_eq!(c.context_count(&["a"]), c.count(&["a", "a"]) + c.count(&["a", "b"]) + c.count(&["a", "</s>"]));
        assert_eq!(c.context_count(&["<s>", "<s>"]), 2);
    }
}
