//! Hand-written lexers. Each produces lexemes (byte spans) covering every
//! token and comment of the source; whitespace is skipped.
//!
//! Grammar notes:
//! - python: `#` comments; string literals with `r`/`b`/`u`/`f` prefixes
//!   (any case/combination of two), single or triple quoted; numbers in
//!   decimal, hex/octal/binary, float and imaginary forms; a backslash before
//!   a newline joins lines.
//! - javascript: `//` and `/* */` comments, a leading `#!` line, quoted
//!   strings, template literals (with `${}` nesting) and regular expression
//!   literals are each one literal token. A `/` starts a regex only where an
//!   operand is expected; otherwise it is the division operator.
//! - shell: `#` starts a comment only at the beginning of a word. Quoted
//!   strings and backslash escapes are literals, all-digit words are
//!   literals, and punctuation is matched against the table (longest entry
//!   first), so `--flag` lexes as `-`, `-`, `flag`.
//! - generic: runs of letters, digits and `_` form one word; any other
//!   non-whitespace character is a word by itself.
//!
//! Punctuation missing from a table lexes as a single `other` character.

use super::{Language, LexError, TokenClass, TokenSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum LexemeKind {
    LineComment,
    BlockComment,
    Token(TokenClass),
}

#[derive(Debug, Clone, Copy)]
pub(super) struct Lexeme {
    pub start: usize,
    pub end: usize,
    pub kind: LexemeKind,
}

impl Lexeme {
    pub fn is_comment(&self) -> bool {
        !matches!(self.kind, LexemeKind::Token(_))
    }

    pub fn is_line_comment(&self) -> bool {
        self.kind == LexemeKind::LineComment
    }

    pub fn class(&self) -> Option<TokenClass> {
        match self.kind {
            LexemeKind::Token(c) => Some(c),
            _ => None,
        }
    }
}

pub(super) fn scan(src: &str, language: Language, set: &TokenSet) -> Result<Vec<Lexeme>, LexError> {
    let mut lx = Lexer { src, pos: 0, set, out: Vec::new() };
    match language {
        Language::Python => lx.python()?,
        Language::JavaScript => lx.javascript()?,
        Language::Shell => lx.shell()?,
        Language::Generic => lx.generic(),
    }
    Ok(lx.out)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_python_string_prefix(word: &str) -> bool {
    word.len() <= 2
        && !word.is_empty()
        && word.chars().all(|c| matches!(c.to_ascii_lowercase(), 'r' | 'b' | 'u' | 'f'))
        && {
            let lower = word.to_ascii_lowercase();
            matches!(lower.as_str(), "r" | "b" | "u" | "f" | "br" | "rb" | "fr" | "rf")
        }
}

/// Class of a standalone token text under a language's lexer rules.
pub(super) fn classify_text(text: &str, language: Language, set: &TokenSet) -> TokenClass {
    if let Some(c) = set.class_of(text) {
        return c;
    }
    let mut chars = text.chars();
    let Some(first) = chars.next() else {
        return TokenClass::Other;
    };
    let second = chars.next();
    match language {
        Language::Generic => TokenClass::Word,
        Language::Shell => {
            if text.chars().all(|c| c.is_ascii_digit()) || matches!(first, '\'' | '"' | '\\') {
                TokenClass::Literal
            } else if text.chars().all(is_word_char) {
                TokenClass::Identifier
            } else {
                TokenClass::Other
            }
        }
        Language::Python | Language::JavaScript => {
            let quotes: &[char] = if language == Language::Python { &['\'', '"'] } else { &['\'', '"', '`'] };
            if first.is_ascii_digit() || (first == '.' && second.is_some_and(|c| c.is_ascii_digit())) {
                return TokenClass::Literal;
            }
            if quotes.contains(&first) {
                return TokenClass::Literal;
            }
            if language == Language::JavaScript && first == '/' && text.len() > 1 {
                return TokenClass::Literal;
            }
            if language == Language::Python {
                if let Some(q) = text.find(['\'', '"']) {
                    if is_python_string_prefix(&text[..q]) {
                        return TokenClass::Literal;
                    }
                }
            }
            let ident_start = |c: char| is_ident_start(c) || (language == Language::JavaScript && c == '$');
            let ident_char = |c: char| is_word_char(c) || (language == Language::JavaScript && c == '$');
            if ident_start(first) && text.chars().all(ident_char) {
                TokenClass::Identifier
            } else {
                TokenClass::Other
            }
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    set: &'a TokenSet,
    out: Vec<Lexeme>,
}

impl<'a> Lexer<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat_while(&mut self, f: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn line_at(&self, offset: usize) -> usize {
        self.src[..offset].bytes().filter(|b| *b == b'\n').count() + 1
    }

    fn push(&mut self, start: usize, kind: LexemeKind) {
        self.out.push(Lexeme { start, end: self.pos, kind });
    }

    fn push_token(&mut self, start: usize, class: TokenClass) {
        self.push(start, LexemeKind::Token(class));
    }

    fn skip_line(&mut self) {
        self.eat_while(|c| c != '\n');
    }

    fn last_token(&self) -> Option<(&'a str, TokenClass)> {
        self.out.iter().rev().find_map(|l| l.class().map(|c| (&self.src[l.start..l.end], c)))
    }

    /// Matches table punctuation at the cursor, or consumes one `other`
    /// character.
    fn punct(&mut self) {
        let start = self.pos;
        match self.set.match_punct(self.rest()) {
            Some((len, class)) => {
                self.pos += len;
                self.push_token(start, class);
            }
            None => {
                self.bump();
                self.push_token(start, TokenClass::Other);
            }
        }
    }

    fn word_class(&self, word: &str) -> TokenClass {
        self.set.class_of(word).unwrap_or(TokenClass::Identifier)
    }

    /// Consumes a quoted string whose opening quote is at the cursor.
    /// `escapes` enables backslash escapes, `multiline` allows raw newlines.
    fn quoted(&mut self, quote: char, escapes: bool, multiline: bool) -> Result<(), LexError> {
        let start = self.pos;
        self.bump();
        loop {
            match self.bump() {
                None => return Err(LexError::UnterminatedString { line: self.line_at(start) }),
                Some('\\') if escapes => {
                    self.bump();
                }
                Some('\n') if !multiline => return Err(LexError::UnterminatedString { line: self.line_at(start) }),
                Some(c) if c == quote => return Ok(()),
                Some(_) => {}
            }
        }
    }

    fn number(&mut self, js: bool) {
        let start = self.pos;
        let radix_prefix =
            self.peek() == Some('0') && self.peek_at(1).is_some_and(|c| matches!(c, 'x' | 'X' | 'o' | 'O' | 'b' | 'B'));
        if radix_prefix {
            self.pos += 2;
            self.eat_while(|c| c.is_ascii_alphanumeric() || c == '_');
        } else {
            self.eat_while(|c| c.is_ascii_digit() || c == '_');
            if self.peek() == Some('.') && self.peek_at(1) != Some('.') {
                self.bump();
                self.eat_while(|c| c.is_ascii_digit() || c == '_');
            }
            if matches!(self.peek(), Some('e' | 'E')) {
                let signed = matches!(self.peek_at(1), Some('+' | '-'));
                let digit_at = if signed { 2 } else { 1 };
                if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += digit_at;
                    self.eat_while(|c| c.is_ascii_digit() || c == '_');
                }
            }
            let suffixes: &[char] = if js { &['n'] } else { &['j', 'J', 'l', 'L'] };
            if self.peek().is_some_and(|c| suffixes.contains(&c)) {
                self.bump();
            }
        }
        if js && radix_prefix && self.peek() == Some('n') {
            self.bump();
        }
        self.push_token(start, TokenClass::Literal);
    }

    fn starts_number(&self) -> bool {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => true,
            Some('.') => self.peek_at(1).is_some_and(|c| c.is_ascii_digit()),
            _ => false,
        }
    }

    fn generic(&mut self) {
        while let Some(c) = self.peek() {
            let start = self.pos;
            if c.is_whitespace() {
                self.bump();
            } else if is_word_char(c) {
                self.eat_while(is_word_char);
                self.push_token(start, TokenClass::Word);
            } else {
                self.bump();
                self.push_token(start, TokenClass::Word);
            }
        }
    }

    fn python(&mut self) -> Result<(), LexError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            if c.is_whitespace() {
                self.bump();
            } else if c == '\\' && matches!(self.peek_at(1), Some('\n')) {
                self.pos += 2;
            } else if c == '\\' && self.rest().starts_with("\\\r\n") {
                self.pos += 3;
            } else if c == '#' {
                self.skip_line();
                self.push(start, LexemeKind::LineComment);
            } else if c == '\'' || c == '"' {
                self.python_string(start)?;
            } else if self.starts_number() {
                self.number(false);
            } else if is_ident_start(c) {
                self.eat_while(is_word_char);
                let word = &self.src[start..self.pos];
                if matches!(self.peek(), Some('\'' | '"')) && is_python_string_prefix(word) {
                    self.python_string(start)?;
                } else {
                    let class = self.word_class(word);
                    self.push_token(start, class);
                }
            } else {
                self.punct();
            }
        }
        Ok(())
    }

    /// String at the cursor (after any prefix); the lexeme starts at `start`.
    fn python_string(&mut self, start: usize) -> Result<(), LexError> {
        let quote = self.peek().expect("caller saw a quote");
        let triple: String = std::iter::repeat_n(quote, 3).collect();
        if self.rest().starts_with(&triple) {
            self.pos += 3;
            loop {
                if self.rest().starts_with(&triple) {
                    self.pos += 3;
                    break;
                }
                match self.bump() {
                    None => return Err(LexError::UnterminatedString { line: self.line_at(start) }),
                    Some('\\') => {
                        self.bump();
                    }
                    Some(_) => {}
                }
            }
        } else {
            self.quoted(quote, true, false).map_err(|_| LexError::UnterminatedString { line: self.line_at(start) })?;
        }
        self.push_token(start, TokenClass::Literal);
        Ok(())
    }

    fn regex_allowed(&self) -> bool {
        match self.last_token() {
            None => true,
            Some((text, class)) => match class {
                TokenClass::Identifier | TokenClass::Literal => false,
                TokenClass::Keyword => !matches!(text, "this" | "super" | "null" | "true" | "false"),
                _ => !matches!(text, ")" | "]" | "}" | "++" | "--"),
            },
        }
    }

    /// Tries a regex literal at the cursor; leaves the cursor untouched and
    /// returns false when the line ends first.
    fn js_regex(&mut self) -> bool {
        let start = self.pos;
        let mut i = start + 1;
        let bytes = self.src.as_bytes();
        let mut in_class = false;
        while i < bytes.len() {
            match bytes[i] {
                b'\n' => return false,
                b'\\' => i += 1,
                b'[' => in_class = true,
                b']' => in_class = false,
                b'/' if !in_class => {
                    self.pos = i + 1;
                    self.eat_while(|c| c.is_ascii_alphabetic());
                    self.push_token(start, TokenClass::Literal);
                    return true;
                }
                _ => {}
            }
            i += 1;
        }
        false
    }

    fn js_template(&mut self) -> Result<(), LexError> {
        let start = self.pos;
        let err = |lx: &Self| LexError::UnterminatedTemplate { line: lx.line_at(start) };
        self.bump();
        // Depth of `${` nesting; inside an interpolation, braces nest and
        // quoted strings or templates are skipped whole.
        let mut depth: Vec<usize> = Vec::new();
        loop {
            let Some(c) = self.bump() else { return Err(err(self)) };
            match (depth.last_mut(), c) {
                (_, '\\') => {
                    self.bump();
                }
                (None, '`') => break,
                (None, '$') if self.peek() == Some('{') => {
                    self.bump();
                    depth.push(0);
                }
                (None, _) => {}
                (Some(d), '{') => *d += 1,
                (Some(0), '}') => {
                    depth.pop();
                }
                (Some(d), '}') => *d -= 1,
                (Some(_), q @ ('\'' | '"')) => {
                    self.pos -= 1;
                    self.quoted(q, true, false).map_err(|_| err(self))?;
                }
                (Some(_), '`') => {
                    // Nested template: lex it as its own literal, then drop
                    // the lexeme since the outer template covers it.
                    self.pos -= 1;
                    self.js_template()?;
                    self.out.pop();
                }
                (Some(_), _) => {}
            }
        }
        self.push_token(start, TokenClass::Literal);
        Ok(())
    }

    fn javascript(&mut self) -> Result<(), LexError> {
        if self.rest().starts_with("#!") {
            self.skip_line();
            self.push(0, LexemeKind::LineComment);
        }
        while let Some(c) = self.peek() {
            let start = self.pos;
            if c.is_whitespace() {
                self.bump();
            } else if self.rest().starts_with("//") {
                self.skip_line();
                self.push(start, LexemeKind::LineComment);
            } else if self.rest().starts_with("/*") {
                match self.rest()[2..].find("*/") {
                    Some(i) => self.pos += 2 + i + 2,
                    None => return Err(LexError::UnterminatedComment { line: self.line_at(start) }),
                }
                self.push(start, LexemeKind::BlockComment);
            } else if c == '\'' || c == '"' {
                self.quoted(c, true, false)?;
                self.push_token(start, TokenClass::Literal);
            } else if c == '`' {
                self.js_template()?;
            } else if self.starts_number() {
                self.number(true);
            } else if is_ident_start(c) || c == '$' {
                self.eat_while(|c| is_word_char(c) || c == '$');
                let class = self.word_class(&self.src[start..self.pos]);
                self.push_token(start, class);
            } else if c == '/' && self.regex_allowed() && self.js_regex() {
                // pushed by js_regex
            } else {
                self.punct();
            }
        }
        Ok(())
    }

    fn shell(&mut self) -> Result<(), LexError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            let word_start = self.src[..start]
                .chars()
                .next_back()
                .is_none_or(|p| p.is_whitespace() || matches!(p, ';' | '&' | '|' | '(' | ')' | '<' | '>'));
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' && word_start {
                self.skip_line();
                self.push(start, LexemeKind::LineComment);
            } else if c == '\\' {
                self.bump();
                match self.bump() {
                    None | Some('\n') => {}
                    Some(_) => self.push_token(start, TokenClass::Literal),
                }
            } else if c == '\'' {
                self.quoted('\'', false, true)?;
                self.push_token(start, TokenClass::Literal);
            } else if c == '"' {
                self.quoted('"', true, true)?;
                self.push_token(start, TokenClass::Literal);
            } else if is_word_char(c) {
                self.eat_while(is_word_char);
                let word = &self.src[start..self.pos];
                let class =
                    if word.chars().all(|c| c.is_ascii_digit()) { TokenClass::Literal } else { self.word_class(word) };
                self.push_token(start, class);
            } else {
                self.punct();
            }
        }
        Ok(())
    }
}
