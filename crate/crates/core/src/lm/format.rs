//! Text serialization of trained models.
//!
//! ```text
//! conflens-ngram v1
//! order 3
//! smoothing mkn
//! min-count 2
//! \vocabulary 4
//! <unk>
//! def
//! ...
//! \1-grams 9
//! def<TAB>12
//! ...
//! \2-grams 15
//! <s> def<TAB>3
//! ...
//! \end
//! ```
//!
//! The model is stored as its counts; the probability tables are rebuilt on
//! load. Tokens are escaped (`\\`, `\s` for space, `\t`, `\n`, `\r`) so that a
//! single space can join the tokens of an n-gram. Every section is sorted
//! bytewise, which makes write → read → write byte-identical.

use std::io::{BufRead, Write};

use super::counts::NGramCounts;
use super::model::{NGramModel, Smoothing};
use super::LmError;
use crate::Scalar;

const MAGIC: &str = "conflens-ngram v1";

pub fn escape_token(tok: &str) -> String {
    let mut out = String::with_capacity(tok.len());
    for c in tok.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            ' ' => out.push_str("\\s"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_token(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match chars.next()? {
            '\\' => '\\',
            's' => ' ',
            't' => '\t',
            'n' => '\n',
            'r' => '\r',
            _ => return None,
        });
    }
    Some(out)
}

impl<F: Scalar> NGramModel<F> {
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let counts = self.counts();
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "order {}", counts.order())?;
        writeln!(w, "smoothing {}", self.smoothing())?;
        writeln!(w, "min-count {}", counts.min_count())?;
        let mut vocab: Vec<String> = counts.vocabulary().into_iter().map(escape_token).collect();
        vocab.sort();
        writeln!(w, "\\vocabulary {}", vocab.len())?;
        for v in vocab {
            writeln!(w, "{v}")?;
        }
        for k in 1..=counts.order() {
            let mut lines: Vec<String> = counts
                .grams(k)
                .map(|(g, c)| {
                    let joined: Vec<String> = g.into_iter().map(escape_token).collect();
                    format!("{}\t{c}", joined.join(" "))
                })
                .collect();
            lines.sort();
            writeln!(w, "\\{k}-grams {}", lines.len())?;
            for l in lines {
                writeln!(w, "{l}")?;
            }
        }
        writeln!(w, "\\end")
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("model text is UTF-8")
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self, LmError> {
        let mut lines = r.lines().enumerate().map(|(i, l)| l.map(|l| (i + 1, l)));
        let mut next = move || -> Result<(usize, String), LmError> {
            match lines.next() {
                Some(Ok(x)) => Ok(x),
                Some(Err(e)) => Err(LmError::Io(e)),
                None => Err(LmError::Format { line: 0, reason: "unexpected end of file".into() }),
            }
        };
        let bad = |line: usize, reason: &str| LmError::Format { line, reason: reason.to_string() };
        let header = |line: (usize, String), key: &str| -> Result<String, LmError> {
            line.1
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| bad(line.0, &format!("expected `{key}`")))
        };
        let magic = next()?;
        if magic.1 != MAGIC {
            return Err(bad(magic.0, "not a conflens model file"));
        }
        let l = next()?;
        let order: usize = header(l.clone(), "order")?.parse().map_err(|_| bad(l.0, "bad order"))?;
        let l = next()?;
        let smoothing: Smoothing<F> = header(l.clone(), "smoothing")?.parse()?;
        let l = next()?;
        let min_count: u32 = header(l.clone(), "min-count")?.parse().map_err(|_| bad(l.0, "bad min-count"))?;

        let section_len = |l: (usize, String), name: &str| -> Result<usize, LmError> {
            header(l.clone(), name)?.parse().map_err(|_| bad(l.0, "bad section length"))
        };
        let mut counts = NGramCounts::new(order)?;
        counts.set_min_count(min_count);
        let n_vocab = section_len(next()?, "\\vocabulary")?;
        for _ in 0..n_vocab {
            let (no, text) = next()?;
            counts.reserve(&unescape_token(&text).ok_or_else(|| bad(no, "bad escape"))?);
        }
        for k in 1..=order {
            let n = section_len(next()?, &format!("\\{k}-grams"))?;
            for _ in 0..n {
                let (no, text) = next()?;
                let (gram, c) = text.split_once('\t').ok_or_else(|| bad(no, "missing count"))?;
                let c: u64 = c.parse().map_err(|_| bad(no, "bad count"))?;
                let toks = gram
                    .split(' ')
                    .map(unescape_token)
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| bad(no, "bad escape"))?;
                if toks.len() != k || c == 0 {
                    return Err(bad(no, "malformed n-gram entry"));
                }
                counts.insert_raw(&toks, c).map_err(|r| bad(no, &r))?;
            }
        }
        let end = next()?;
        if end.1 != "\\end" {
            return Err(bad(end.0, "expected `\\end`"));
        }
        NGramModel::train(counts, smoothing)
    }
}

impl NGramCounts {
    /// Inserts a stored n-gram as read from a model file. Tokens must already
    /// be in the vocabulary (or be markers).
    pub(crate) fn insert_raw(&mut self, toks: &[String], c: u64) -> Result<(), String> {
        let mut key = Vec::with_capacity(toks.len());
        for t in toks {
            let id = self.symbols.get(t).ok_or_else(|| format!("token {t:?} not in vocabulary"))?;
            if id > super::counts::EOS_ID && !self.vocabulary.contains(&id) {
                return Err(format!("token {t:?} not in vocabulary"));
            }
            key.push(id);
        }
        self.grams[toks.len() - 1].insert(key, c);
        Ok(())
    }
}
