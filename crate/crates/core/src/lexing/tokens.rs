//! Per-language keyword/operator/separator tables.
//!
//! Tables are plain text: `#` starts a comment line, `[keywords]`,
//! `[operators]` and `[separators]` open a section, and every other
//! whitespace-separated entry is a token of the current section. The builtin
//! tables are compiled in from `data/tokens/`; [`TokenSets::load_dir`] reads
//! replacements at run time.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use super::{Language, TokenClass};

const PYTHON: &str = include_str!("../../data/tokens/python.tokens");
const JAVASCRIPT: &str = include_str!("../../data/tokens/javascript.tokens");
const SHELL: &str = include_str!("../../data/tokens/shell.tokens");

#[derive(Debug, thiserror::Error)]
pub enum TokenSetError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Token classes of one language.
#[derive(Debug, Clone, Default)]
pub struct TokenSet {
    classes: HashMap<String, TokenClass>,
    /// Punctuation entries, longest first, for maximal-munch matching.
    punct: Vec<(String, TokenClass)>,
    separators_defined: bool,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl TokenSet {
    pub fn parse(text: &str) -> Result<Self, TokenSetError> {
        let mut set = TokenSet::default();
        let mut current: Option<TokenClass> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') && line.len() > 1 && line.as_bytes()[1] == b' ' {
                continue;
            }
            let section = match line {
                "[keywords]" => Some(TokenClass::Keyword),
                "[operators]" => Some(TokenClass::Operator),
                "[separators]" => Some(TokenClass::Separator),
                _ => None,
            };
            if let Some(class) = section {
                if class == TokenClass::Separator {
                    set.separators_defined = true;
                }
                current = Some(class);
                continue;
            }
            let class = current
                .ok_or_else(|| TokenSetError::Syntax { line: i + 1, reason: "token outside of a section".into() })?;
            for tok in line.split_whitespace() {
                if let Some(prev) = set.classes.insert(tok.to_string(), class) {
                    return Err(TokenSetError::Syntax {
                        line: i + 1,
                        reason: format!("{tok:?} listed as both {prev} and {class}"),
                    });
                }
            }
        }
        let mut punct: Vec<(String, TokenClass)> = set
            .classes
            .iter()
            .filter(|(t, _)| !t.chars().next().is_some_and(is_word_char))
            .map(|(t, c)| (t.clone(), *c))
            .collect();
        punct.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        set.punct = punct;
        Ok(set)
    }

    /// Class of a listed token.
    pub fn class_of(&self, token: &str) -> Option<TokenClass> {
        self.classes.get(token).copied()
    }

    /// Longest listed punctuation token at the start of `rest`.
    pub fn match_punct(&self, rest: &str) -> Option<(usize, TokenClass)> {
        self.punct.iter().find(|(p, _)| rest.starts_with(p.as_str())).map(|(p, c)| (p.len(), *c))
    }

    pub fn tokens(&self, class: TokenClass) -> HashSet<&str> {
        self.classes.iter().filter(|(_, c)| **c == class).map(|(t, _)| t.as_str()).collect()
    }

    /// Whether the language has a separator class at all (shell does not).
    pub fn has_separators(&self) -> bool {
        self.separators_defined && self.classes.values().any(|c| *c == TokenClass::Separator)
    }
}

/// Tables for every language with a dedicated lexer.
#[derive(Debug, Clone)]
pub struct TokenSets {
    pub python: TokenSet,
    pub javascript: TokenSet,
    pub shell: TokenSet,
    generic: TokenSet,
}

impl TokenSets {
    /// The compiled-in tables.
    pub fn builtin() -> &'static TokenSets {
        static SETS: OnceLock<TokenSets> = OnceLock::new();
        SETS.get_or_init(|| TokenSets {
            python: TokenSet::parse(PYTHON).expect("builtin python table"),
            javascript: TokenSet::parse(JAVASCRIPT).expect("builtin javascript table"),
            shell: TokenSet::parse(SHELL).expect("builtin shell table"),
            generic: TokenSet::default(),
        })
    }

    /// Loads `python.tokens`, `javascript.tokens` and `shell.tokens` from
    /// `dir`; missing files keep the builtin table.
    pub fn load_dir(dir: &Path) -> Result<TokenSets, TokenSetError> {
        let mut sets = Self::builtin().clone();
        for (name, slot) in
            [("python", &mut sets.python), ("javascript", &mut sets.javascript), ("shell", &mut sets.shell)]
        {
            let path = dir.join(format!("{name}.tokens"));
            if !path.exists() {
                continue;
            }
            let text = std::fs::read_to_string(&path)
                .map_err(|source| TokenSetError::Io { path: path.display().to_string(), source })?;
            *slot = TokenSet::parse(&text)?;
        }
        Ok(sets)
    }

    pub fn for_language(&self, language: Language) -> &TokenSet {
        match language {
            Language::Python => &self.python,
            Language::JavaScript => &self.javascript,
            Language::Shell => &self.shell,
            Language::Generic => &self.generic,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_tables_parse() {
        let sets = TokenSets::builtin();
        assert_eq!(sets.python.class_of("def"), Some(TokenClass::Keyword));
        assert_eq!(sets.python.class_of("."), Some(TokenClass::Separator));
        assert_eq!(sets.python.class_of("="), Some(TokenClass::Operator));
        assert_eq!(sets.shell.class_of("/"), Some(TokenClass::Operator));
        assert!(sets.python.has_separators());
        assert!(sets.javascript.has_separators());
        assert!(!sets.shell.has_separators());
        assert!(sets.shell.tokens(TokenClass::Separator).is_empty());
    }

    #[test]
    fn maximal_munch_prefers_longer() {
        let sets = TokenSets::builtin();
        assert_eq!(sets.python.match_punct("**=x"), Some((3, TokenClass::Operator)));
        assert_eq!(sets.python.match_punct("*x"), Some((1, TokenClass::Operator)));
        assert_eq!(sets.javascript.match_punct(">>>=1"), Some((4, TokenClass::Operator)));
        assert_eq!(sets.python.match_punct("$"), None);
    }

    #[test]
    fn rejects_duplicates_and_orphans() {
        assert!(TokenSet::parse("[keywords]\nif\n[operators]\nif\n").is_err());
        assert!(TokenSet::parse("if\n").is_err());
        let s = TokenSet::parse("# comment line\n[operators]\n# \n").unwrap();
        assert_eq!(s.class_of("#"), Some(TokenClass::Operator));
    }
}
