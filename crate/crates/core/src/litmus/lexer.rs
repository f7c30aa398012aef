//! Tokenizer and cursor shared by both dialect parsers.

use super::condition::FinalCondition;
use super::{Observable, ParseError, ParseErrorKind, Value, MAX_VALUE};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(super) enum Tok {
    Ident(String),
    Num(u64),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
pub(super) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

const SYMBOLS: [&str; 17] = ["/\\", "\\/", "{", "}", "(", ")", "[", "]", ";", ",", "=", "*", "#", "|", ":", "~", "&"];

pub(super) fn err(line: usize, column: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, column, kind }
}

/// Splits off the `<arch> <name>` header line. Returns (arch, name, rest, line of rest).
pub(super) fn split_header(text: &str) -> Result<(&str, String, &str, usize), ParseError> {
    let mut offset = 0;
    for (idx, line) in text.split_inclusive('\n').enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            offset += line.len();
            continue;
        }
        let mut parts = trimmed.splitn(2, char::is_whitespace);
        let arch = parts.next().unwrap_or_default();
        let name = parts.next().map(str::trim).unwrap_or_default();
        if name.is_empty() {
            return Err(err(idx + 1, 1, ParseErrorKind::Syntax("expected `<arch> <name>` header".into())));
        }
        return Ok((arch, name.to_string(), &text[offset + line.len()..], idx + 2));
    }
    Err(err(1, 1, ParseErrorKind::Syntax("empty input".into())))
}

pub(super) fn tokenize(text: &str, first_line: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0, first_line, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize, chars: &[char]| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1, &chars);
        } else if rest == "//" {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
        } else if rest == "/*" || rest == "(*" {
            let close = if rest == "/*" { "*/" } else { "*)" };
            let (l0, c0) = (line, col);
            advance(&mut i, &mut line, &mut col, 2, &chars);
            loop {
                if i + 1 >= chars.len() {
                    return Err(err(l0, c0, ParseErrorKind::Syntax("unterminated comment".into())));
                }
                let pair: String = chars[i..i + 2].iter().collect();
                if pair == close {
                    advance(&mut i, &mut line, &mut col, 2, &chars);
                    break;
                }
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let (l0, c0) = (line, col);
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            toks.push(Token { tok: Tok::Ident(s), line: l0, column: c0 });
        } else if c.is_ascii_digit() {
            let (l0, c0) = (line, col);
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            let n = s.parse::<u64>().map_err(|_| err(l0, c0, ParseErrorKind::Syntax(format!("bad number `{s}`"))))?;
            toks.push(Token { tok: Tok::Num(n), line: l0, column: c0 });
        } else if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            toks.push(Token { tok: Tok::Sym(sym), line, column: col });
            advance(&mut i, &mut line, &mut col, sym.chars().count(), &chars);
        } else {
            return Err(err(line, col, ParseErrorKind::Syntax(format!("unexpected character `{c}`"))));
        }
    }
    Ok(toks)
}

pub(super) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        let end = toks.last().map(|t| (t.line, t.column + 1)).unwrap_or((1, 1));
        Cursor { toks, pos: 0, end }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, ahead: usize) -> Option<&Tok> {
        self.toks.get(self.pos + ahead).map(|t| &t.tok)
    }

    pub fn position(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.line, t.column)).unwrap_or(self.end)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn error(&self, kind: ParseErrorKind) -> ParseError {
        let (l, c) = self.position();
        err(l, c, kind)
    }

    pub fn syntax(&self, expected: &str) -> ParseError {
        let found = match self.peek() {
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Num(n)) => format!("`{n}`"),
            Some(Tok::Sym(s)) => format!("`{s}`"),
            None => "end of input".to_string(),
        };
        self.error(ParseErrorKind::Syntax(format!("expected {expected}, found {found}")))
    }

    pub fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    pub fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym)
    }

    pub fn eat_sym(&mut self, sym: &str) -> bool {
        if self.is_sym(sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.syntax(&format!("`{sym}`")))
        }
    }

    pub fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == word)
    }

    pub fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.syntax("identifier")),
        }
    }

    pub fn expect_keyword(&mut self, word: &str) -> Result<(), ParseError> {
        if self.is_ident(word) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("`{word}`")))
        }
    }

    pub fn expect_value(&mut self) -> Result<Value, ParseError> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                if n > MAX_VALUE as u64 {
                    return Err(self.error(ParseErrorKind::BoundExceeded(format!("value {n} outside 0..={MAX_VALUE}"))));
                }
                self.pos += 1;
                Ok(n as Value)
            }
            _ => Err(self.syntax("integer value")),
        }
    }

    /// Parses an observable: `P1:r0`, `1:W4`, or a location name.
    pub fn observable(&mut self) -> Result<Observable, ParseError> {
        let thread = match (self.peek(), self.peek_at(1)) {
            (Some(Tok::Num(n)), Some(Tok::Sym(":"))) => Some(*n as usize),
            (Some(Tok::Ident(p)), Some(Tok::Sym(":"))) => {
                match p.strip_prefix('P').and_then(|d| d.parse::<usize>().ok()) {
                    Some(n) => Some(n),
                    None => return Err(self.syntax("thread identifier `Pn`")),
                }
            }
            _ => None,
        };
        match thread {
            Some(t) => {
                self.pos += 2;
                let name = self.expect_ident()?;
                Ok(Observable::register(t, name))
            }
            None => Ok(Observable::memory(self.expect_ident()?)),
        }
    }

    /// Parses `exists (cond)` and requires the input to end there.
    pub fn exists_clause(&mut self) -> Result<(FinalCondition, (usize, usize)), ParseError> {
        if self.is_ident("forall") {
            return Err(self.error(ParseErrorKind::Unsupported("`forall` final condition".into())));
        }
        if self.is_sym("~") && matches!(self.peek_at(1), Some(Tok::Ident(s)) if s == "exists") {
            return Err(self.error(ParseErrorKind::Unsupported("`~exists` final condition".into())));
        }
        self.expect_keyword("exists")?;
        let pos = self.position();
        let cond = self.disjunction()?;
        if !self.at_end() {
            return Err(self.syntax("end of input after final condition"));
        }
        Ok((cond, pos))
    }

    fn disjunction(&mut self) -> Result<FinalCondition, ParseError> {
        let mut parts = vec![self.conjunction()?];
        while self.eat_sym("\\/") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { FinalCondition::Or(parts) })
    }

    fn conjunction(&mut self) -> Result<FinalCondition, ParseError> {
        let mut parts = vec![self.unary()?];
        while self.eat_sym("/\\") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { FinalCondition::And(parts) })
    }

    fn unary(&mut self) -> Result<FinalCondition, ParseError> {
        if self.eat_sym("~") {
            return Ok(FinalCondition::Not(Box::new(self.unary()?)));
        }
        if self.eat_sym("(") {
            let inner = self.disjunction()?;
            self.expect_sym(")")?;
            return Ok(inner);
        }
        let obs = self.observable()?;
        self.expect_sym("=")?;
        let v = self.expect_value()?;
        Ok(FinalCondition::atom(obs, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = tokenize("P0 (x) {\n  r0 /\\ 12; // c\n}", 3).unwrap();
        assert_eq!(toks[0].tok, Tok::Ident("P0".into()));
        assert_eq!((toks[0].line, toks[0].column), (3, 1));
        let and = toks.iter().find(|t| t.tok == Tok::Sym("/\\")).unwrap();
        assert_eq!((and.line, and.column), (4, 6));
        assert!(toks.iter().any(|t| t.tok == Tok::Num(12)));
        assert_eq!(toks.last().unwrap().tok, Tok::Sym("}"));
    }

    #[test]
    fn comments_skipped() {
        let toks = tokenize("a (* herd *) b /* c */ c", 1).unwrap();
        assert_eq!(toks.len(), 3);
        assert!(tokenize("a /* open", 1).is_err());
    }

    #[test]
    fn header_split() {
        let (arch, name, rest, line) = split_header("\nC MP+foo\n{ x = 0; }").unwrap();
        assert_eq!((arch, name.as_str(), rest, line), ("C", "MP+foo", "{ x = 0; }", 3));
        assert!(split_header("C\n").is_err());
    }

    #[test]
    fn condition_precedence() {
        let mut c = Cursor::new(tokenize("exists (x = 1 \\/ P1:r0 = 0 /\\ ~y = 2)", 1).unwrap());
        let (cond, _) = c.exists_clause().unwrap();
        match cond {
            FinalCondition::Or(parts) => {
                assert_eq!(parts.len(), 2);
                assert!(matches!(&parts[1], FinalCondition::And(v) if v.len() == 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
