//! Comment removal, tokenization and token/file classification.
//!
//! Python, JavaScript and shell sources go through hand-written lexers whose
//! keyword, operator and separator tables live in `data/tokens/`. Everything
//! else is split on whitespace and punctuation by the generic lexer.

mod kind;
mod scan;
mod tokens;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use kind::{classify_file, extension_of, FileKind};
pub use tokens::{TokenSet, TokenSetError, TokenSets};

use crate::ingest::Side;

/// Syntax class of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenClass {
    Separator,
    Operator,
    Keyword,
    Identifier,
    Literal,
    Word,
    Other,
}

impl TokenClass {
    pub const ALL: [TokenClass; 7] = [
        TokenClass::Separator,
        TokenClass::Operator,
        TokenClass::Keyword,
        TokenClass::Identifier,
        TokenClass::Literal,
        TokenClass::Word,
        TokenClass::Other,
    ];

    /// The classes tabulated as language syntax.
    pub const SYNTAX: [TokenClass; 3] = [TokenClass::Separator, TokenClass::Operator, TokenClass::Keyword];

    pub fn as_str(self) -> &'static str {
        match self {
            TokenClass::Separator => "separator",
            TokenClass::Operator => "operator",
            TokenClass::Keyword => "keyword",
            TokenClass::Identifier => "identifier",
            TokenClass::Literal => "literal",
            TokenClass::Word => "word",
            TokenClass::Other => "other",
        }
    }
}

impl fmt::Display for TokenClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub class: TokenClass,
}

impl Token {
    pub fn new(text: impl Into<String>, class: TokenClass) -> Self {
        Self { text: text.into(), class }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Python,
    JavaScript,
    Shell,
    Generic,
}

impl Language {
    /// Lexer used for a file path.
    pub fn for_path(path: &str) -> Language {
        match extension_of(path).as_deref() {
            Some(".py") => Language::Python,
            Some(".js") => Language::JavaScript,
            Some(".sh") | Some(".bash") => Language::Shell,
            _ => Language::Generic,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Language::Python => "python",
            Language::JavaScript => "javascript",
            Language::Shell => "shell",
            Language::Generic => "generic",
        }
    }
}

impl std::str::FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "python" => Ok(Language::Python),
            "javascript" => Ok(Language::JavaScript),
            "shell" => Ok(Language::Shell),
            "generic" => Ok(Language::Generic),
            other => Err(format!("unknown language {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexError {
    #[error("unterminated string literal starting on line {line}")]
    UnterminatedString { line: usize },
    #[error("unterminated block comment starting on line {line}")]
    UnterminatedComment { line: usize },
    #[error("unterminated template literal starting on line {line}")]
    UnterminatedTemplate { line: usize },
}

impl LexError {
    pub fn line(&self) -> usize {
        match self {
            LexError::UnterminatedString { line }
            | LexError::UnterminatedComment { line }
            | LexError::UnterminatedTemplate { line } => *line,
        }
    }
}

/// Tokens of one file version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub path: String,
    pub side: Side,
    pub language: Language,
    pub tokens: Vec<Token>,
    /// Set when the dedicated lexer failed and the generic lexer was used.
    pub fallback: bool,
}

impl TokenStream {
    /// Lexes `source` with the lexer for `path`'s extension, falling back to
    /// the generic lexer (and flagging the stream) on lex errors.
    pub fn lex(path: &str, side: Side, source: &str, sets: &TokenSets) -> TokenStream {
        let language = Language::for_path(path);
        match tokenize_with(source, language, sets) {
            Ok(tokens) => TokenStream { path: path.to_string(), side, language, tokens, fallback: false },
            Err(e) => {
                log::warn!("{path} ({side}): {e}; using generic tokenization");
                let tokens = tokenize_with(source, Language::Generic, sets).expect("generic lexer is total");
                TokenStream { path: path.to_string(), side, language: Language::Generic, tokens, fallback: true }
            }
        }
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }

    pub fn extension(&self) -> Option<String> {
        extension_of(&self.path)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Removes comments using the builtin tables. Generic sources are returned
/// unchanged.
pub fn strip_comments(source: &str, language: Language) -> Result<String, LexError> {
    strip_comments_with(source, language, TokenSets::builtin())
}

pub fn strip_comments_with(source: &str, language: Language, sets: &TokenSets) -> Result<String, LexError> {
    if language == Language::Generic {
        return Ok(source.to_string());
    }
    let lexemes = scan::scan(source, language, sets.for_language(language))?;
    let mut out = String::with_capacity(source.len());
    let mut cursor = 0;
    for lx in lexemes.iter().filter(|l| l.is_comment()) {
        out.push_str(&source[cursor..lx.start]);
        let body = &source[lx.start..lx.end];
        if lx.is_line_comment() {
            let keep = out.trim_end_matches([' ', '\t']).len();
            out.truncate(keep);
        } else {
            out.extend(body.chars().filter(|c| *c == '\n'));
        }
        cursor = lx.end;
    }
    out.push_str(&source[cursor..]);
    Ok(out)
}

/// Tokenizes with the builtin tables. Comments never produce tokens.
pub fn tokenize(source: &str, language: Language) -> Result<Vec<Token>, LexError> {
    tokenize_with(source, language, TokenSets::builtin())
}

pub fn tokenize_with(source: &str, language: Language, sets: &TokenSets) -> Result<Vec<Token>, LexError> {
    let lexemes = scan::scan(source, language, sets.for_language(language))?;
    Ok(lexemes
        .into_iter()
        .filter_map(|lx| lx.class().map(|class| Token::new(&source[lx.start..lx.end], class)))
        .collect())
}

/// Class of a single token as produced by the lexer for `language`.
pub fn classify_token(text: &str, language: Language) -> TokenClass {
    classify_token_with(text, language, TokenSets::builtin())
}

pub fn classify_token_with(text: &str, language: Language, sets: &TokenSets) -> TokenClass {
    if language == Language::Generic {
        return TokenClass::Word;
    }
    scan::classify_text(text, language, sets.for_language(language))
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenClass::*;

    fn toks(src: &str, lang: Language) -> Vec<(String, TokenClass)> {
        tokenize(src, lang).unwrap().into_iter().map(|t| (t.text, t.class)).collect()
    }

    fn texts(src: &str, lang: Language) -> Vec<String> {
        tokenize(src, lang).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn strip_examples() {
        assert_eq!(strip_comments("x = 1  # note", Language::Python).unwrap(), "x = 1");
        assert_eq!(strip_comments("a; /* c */ b;", Language::JavaScript).unwrap(), "a;  b;");
        assert_eq!(strip_comments("u = \"#tag\"", Language::Python).unwrap(), "u = \"#tag\"");
        assert_eq!(strip_comments("a # b", Language::Generic).unwrap(), "a # b");
    }

    #[test]
    fn strip_preserves_line_structure() {
        let src = "a = 1 /* one\ntwo */ + 2\n// tail\nb";
        let out = strip_comments(src, Language::JavaScript).unwrap();
        assert_eq!(out, "a = 1 \n + 2\n\nb");
        assert_eq!(out.lines().count(), src.lines().count());
        let sh = "#!/bin/sh\necho $# # count\nX=1";
        assert_eq!(strip_comments(sh, Language::Shell).unwrap(), "\necho $#\nX=1");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(texts("def f(a):", Language::Python), ["def", "f", "(", "a", ")", ":"]);
        assert!(texts("", Language::Python).is_empty());
        assert_eq!(texts("X=/tmp/a", Language::Shell), ["X", "=", "/", "tmp", "/", "a"]);
        assert_eq!(
            toks("X=/tmp/a", Language::Shell),
            vec![
                ("X".into(), Identifier),
                ("=".into(), Operator),
                ("/".into(), Operator),
                ("tmp".into(), Identifier),
                ("/".into(), Operator),
                ("a".into(), Identifier)
            ]
        );
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_token(".", Language::Python), Separator);
        assert_eq!(classify_token("def", Language::Python), Keyword);
        assert_eq!(classify_token("/", Language::Shell), Operator);
        assert_eq!(classify_token("foo", Language::Python), Identifier);
        assert_eq!(classify_token("'x'", Language::Python), Literal);
        assert_eq!(classify_token("rb'x'", Language::Python), Literal);
        assert_eq!(classify_token("0x1F", Language::JavaScript), Literal);
        assert_eq!(classify_token("42", Language::Shell), Literal);
        assert_eq!(classify_token("anything", Language::Generic), Word);
        assert_eq!(classify_token("$", Language::Python), Other);
    }

    #[test]
    fn generic_splits_punctuation() {
        assert_eq!(
            toks("a-b, c", Language::Generic),
            vec![("a".into(), Word), ("-".into(), Word), ("b".into(), Word), (",".into(), Word), ("c".into(), Word)]
        );
    }

    #[test]
    fn lex_errors_carry_lines() {
        assert_eq!(tokenize("x = 1\ny = 'abc", Language::Python), Err(LexError::UnterminatedString { line: 2 }));
        assert_eq!(
            strip_comments("a;\n\n/* open", Language::JavaScript),
            Err(LexError::UnterminatedComment { line: 3 })
        );
        assert_eq!(tokenize("s = `abc", Language::JavaScript), Err(LexError::UnterminatedTemplate { line: 1 }));
        assert_eq!(tokenize("echo 'abc", Language::Shell), Err(LexError::UnterminatedString { line: 1 }));
    }

    #[test]
    fn stream_falls_back_on_error() {
        let s = TokenStream::lex("a.py", Side::Post, "x = 'abc", TokenSets::builtin());
        assert!(s.fallback);
        assert_eq!(s.language, Language::Generic);
        assert!(s.tokens.iter().all(|t| t.class == Word));
        let ok = TokenStream::lex("a.py", Side::Pre, "x = 1", TokenSets::builtin());
        assert!(!ok.fallback);
        assert_eq!(ok.language, Language::Python);
    }
}
