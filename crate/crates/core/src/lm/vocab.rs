use std::collections::{HashMap, HashSet};

use super::{LmError, NGramCounts, UNK};

/// Closed training vocabulary. Tokens seen fewer than `min_count` times are
/// replaced by [`UNK`].
#[derive(Debug, Clone)]
pub struct Vocabulary {
    kept: HashSet<String>,
    min_count: u32,
}

impl Vocabulary {
    pub fn fit<'a, I, S>(sequences: I, min_count: u32) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = &'a str>,
    {
        let mut freq: HashMap<&'a str, u32> = HashMap::new();
        for seq in sequences {
            for tok in seq {
                *freq.entry(tok).or_insert(0) += 1;
            }
        }
        let kept = freq.into_iter().filter(|(_, c)| *c >= min_count).map(|(t, _)| t.to_string()).collect();
        Vocabulary { kept, min_count }
    }

    pub fn map<'b>(&'b self, token: &'b str) -> &'b str {
        if self.min_count <= 1 || self.kept.contains(token) {
            token
        } else {
            UNK
        }
    }

    pub fn min_count(&self) -> u32 {
        self.min_count
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }
}

/// Fits a vocabulary with threshold `min_count` and counts the mapped
/// sequences. When `min_count > 1` the unknown-token placeholder is always
/// part of the vocabulary.
pub fn build_counts<'a, I, S>(sequences: I, order: usize, min_count: u32) -> Result<NGramCounts, LmError>
where
    I: IntoIterator<Item = S> + Clone,
    S: IntoIterator<Item = &'a str>,
{
    let vocab = Vocabulary::fit(sequences.clone(), min_count);
    let mut counts = NGramCounts::new(order)?;
    for seq in sequences {
        counts.add_sequence(seq.into_iter().map(|t| vocab.map(t)));
    }
    if min_count > 1 {
        counts.reserve(UNK);
    }
    counts.set_min_count(min_count.max(1));
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rare_tokens_become_unk() {
        let seqs: Vec<Vec<&str>> = vec![vec!["a", "b", "a"], vec!["c", "a"]];
        let v = Vocabulary::fit(seqs.iter().map(|s| s.iter().copied()), 2);
        assert_eq!(v.map("a"), "a");
        assert_eq!(v.map("b"), UNK);
        assert_eq!(v.map("zzz"), UNK);
        let counts = build_counts(seqs.iter().map(|s| s.iter().copied()), 2, 2).unwrap();
        assert_eq!(counts.vocabulary(), ["<unk>", "a"]);
        assert_eq!(counts.count(&["a", "<unk>"]), 1);
        assert_eq!(counts.min_count(), 2);
    }

    #[test]
    fn threshold_one_keeps_everything() {
        let seqs: Vec<Vec<&str>> = vec![vec!["x", "y"]];
        let counts = build_counts(seqs.iter().map(|s| s.iter().copied()), 2, 1).unwrap();
        assert_eq!(counts.vocabulary(), ["x", "y"]);
        assert!(!counts.contains(UNK));
    }
}
