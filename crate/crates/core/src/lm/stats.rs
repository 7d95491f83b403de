use std::collections::{BTreeMap, HashSet};

use crate::lexing::TokenStream;

/// Corpus size of one extension.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct CorpusRow {
    /// Distinct (review, revision) pairs contributing a file.
    pub revisions: u64,
    pub files: u64,
    pub unique_tokens: u64,
    pub tokens: u64,
}

/// Per-extension corpus size. Each item pairs a stream with the
/// `(review id, revision number)` it came from.
pub fn corpus_stats<'a, I>(streams: I) -> BTreeMap<String, CorpusRow>
where
    I: IntoIterator<Item = ((&'a str, u32), &'a TokenStream)>,
{
    #[derive(Default)]
    struct Acc<'a> {
        revisions: HashSet<(&'a str, u32)>,
        unique: HashSet<&'a str>,
        files: u64,
        tokens: u64,
    }
    let mut acc: BTreeMap<String, Acc<'a>> = BTreeMap::new();
    for (rev, stream) in streams {
        let a = acc.entry(stream.extension().unwrap_or_default()).or_default();
        a.revisions.insert(rev);
        a.files += 1;
        a.tokens += stream.tokens.len() as u64;
        a.unique.extend(stream.tokens.iter().map(|t| t.text.as_str()));
    }
    acc.into_iter()
        .map(|(ext, a)| {
            let row = CorpusRow {
                revisions: a.revisions.len() as u64,
                files: a.files,
                unique_tokens: a.unique.len() as u64,
                tokens: a.tokens,
            };
            (ext, row)
        })
        .collect()
}
