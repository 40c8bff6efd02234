use std::fmt;
use std::sync::Arc;

use crate::model::SourceSpan;

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(u64),
    Float(f64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    StereoOpen,
    StereoClose,
    Assoc,
    Generalize,
    Compose,
    Arrow,
    Minus,
    Slash,
    Assign,
    EqEq,
    AndAnd,
    Caret,
    Ket0,
    Ket1,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Float(f) => format!("`{f}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{other}`"),
        }
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return f.write_str(s),
            Tok::Int(i) => return write!(f, "{i}"),
            Tok::Float(x) => return write!(f, "{x}"),
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::StereoOpen => "<<",
            Tok::StereoClose => ">>",
            Tok::Assoc => "-->",
            Tok::Generalize => "--|>",
            Tok::Compose => "*-->",
            Tok::Arrow => "->",
            Tok::Minus => "-",
            Tok::Slash => "/",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::AndAnd => "&&",
            Tok::Caret => "^",
            Tok::Ket0 => "|0>",
            Tok::Ket1 => "|1>",
            Tok::Eof => "<eof>",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Lexer<'a> {
    rest: &'a str,
    line: u32,
    col: u32,
    file: Arc<str>,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.rest.chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest.chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.rest.chars().next()?;
        self.rest = &self.rest[c.len_utf8()..];
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> (u32, u32) {
        (self.line, self.col)
    }

    fn span_from(&self, start: (u32, u32)) -> SourceSpan {
        SourceSpan::new(self.file.clone(), start, self.pos())
    }

    fn error(&self, start: (u32, u32), expected: &[&str], found: String) -> ParseError {
        ParseError {
            span: self.span_from(start),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek_at(1) == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn number(&mut self, start: (u32, u32)) -> Result<Tok, ParseError> {
        let begin = self.rest;
        let mut len = 0;
        let mut is_float = false;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
            len += 1;
        }
        if self.peek() == Some('.') && matches!(self.peek_at(1), Some(c) if c.is_ascii_digit()) {
            is_float = true;
            self.bump();
            len += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
                len += 1;
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let sign = usize::from(matches!(self.peek_at(1), Some('+' | '-')));
            if matches!(self.peek_at(1 + sign), Some(c) if c.is_ascii_digit()) {
                is_float = true;
                for _ in 0..=sign {
                    self.bump();
                    len += 1;
                }
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                    len += 1;
                }
            }
        }
        let text = &begin[..len];
        if is_float {
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Tok::Float(v)),
                _ => Err(self.error(start, &["finite number"], format!("`{text}`"))),
            }
        } else {
            text.parse::<u64>()
                .map(Tok::Int)
                .map_err(|_| self.error(start, &["integer that fits in 64 bits"], format!("`{text}`")))
        }
    }

    fn next_token(&mut self) -> Result<Token, ParseError> {
        self.skip_trivia();
        let start = self.pos();
        let Some(c) = self.peek() else {
            return Ok(Token {
                tok: Tok::Eof,
                span: self.span_from(start),
            });
        };
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            self.number(start)?
        } else {
            let two = (c, self.peek_at(1));
            let (tok, len) = match two {
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (',', _) => (Tok::Comma, 1),
                (':', _) => (Tok::Colon, 1),
                ('/', _) => (Tok::Slash, 1),
                ('^', _) => (Tok::Caret, 1),
                ('<', Some('<')) => (Tok::StereoOpen, 2),
                ('>', Some('>')) => (Tok::StereoClose, 2),
                ('=', Some('=')) => (Tok::EqEq, 2),
                ('=', _) => (Tok::Assign, 1),
                ('&', Some('&')) => (Tok::AndAnd, 2),
                ('*', _) if self.rest.starts_with("*-->") => (Tok::Compose, 4),
                ('-', _) if self.rest.starts_with("--|>") => (Tok::Generalize, 4),
                ('-', _) if self.rest.starts_with("-->") => (Tok::Assoc, 3),
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('-', _) => (Tok::Minus, 1),
                ('|', _) if self.rest.starts_with("|0>") => (Tok::Ket0, 3),
                ('|', _) if self.rest.starts_with("|1>") => (Tok::Ket1, 3),
                _ => {
                    self.bump();
                    let found = if c == '\u{feff}' {
                        "byte-order mark".to_string()
                    } else {
                        format!("`{}`", c.escape_debug())
                    };
                    return Err(self.error(start, &["token"], found));
                }
            };
            for _ in 0..len {
                self.bump();
            }
            tok
        };
        Ok(Token {
            tok,
            span: self.span_from(start),
        })
    }
}

/// Splits `text` into tokens, ending with [`Tok::Eof`].
pub(crate) fn tokenize(text: &str, file: Arc<str>) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer {
        rest: text,
        line: 1,
        col: 1,
        file,
    };
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let eof = t.tok == Tok::Eof;
        out.push(t);
        if eof {
            return Ok(out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s, "t".into())
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect()
    }

    #[test]
    fn arrows_and_kets() {
        assert_eq!(
            toks("A --> B --|> C *--> D -> - |0> |1>"),
            vec![
                Tok::Ident("A".into()),
                Tok::Assoc,
                Tok::Ident("B".into()),
                Tok::Generalize,
                Tok::Ident("C".into()),
                Tok::Compose,
                Tok::Ident("D".into()),
                Tok::Arrow,
                Tok::Minus,
                Tok::Ket0,
                Tok::Ket1,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn numbers() {
        assert_eq!(
            toks("12 1.5 2e-3 3pi"),
            vec![
                Tok::Int(12),
                Tok::Float(1.5),
                Tok::Float(2e-3),
                Tok::Int(3),
                Tok::Ident("pi".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("// hi\n  gate", "f".into()).unwrap();
        assert_eq!(t[0].tok, Tok::Ident("gate".into()));
        assert_eq!((t[0].span.start_line, t[0].span.start_col), (2, 3));
        assert_eq!((t[0].span.end_line, t[0].span.end_col), (2, 7));
    }

    #[test]
    fn stray_character() {
        let e = tokenize("model $", "f".into()).unwrap_err();
        assert_eq!((e.span.start_line, e.span.start_col), (1, 7));
        assert_eq!(e.found, "`$`");
    }
}
