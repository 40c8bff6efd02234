//! `.quml` text format: recursive-descent parser and canonical pretty printer.
//!
//! Grammar (whitespace-insensitive, `//` line comments):
//!
//! ```text
//! model      := "model" IDENT "{" (classblock | seqdiag)* "}"
//! classblock := "classes" "{" (classdecl | reldecl)* "}"
//! classdecl  := "class" IDENT stereo? "{" member* "}"
//! member     := "attr" IDENT ":" IDENT
//!             | "op" IDENT "(" paramlist? ")" (":" IDENT)?
//!             | "circuit" IDENT
//! paramlist  := IDENT (":" IDENT)? ("," IDENT (":" IDENT)?)*
//! reldecl    := IDENT ("-->" | "--|>" | "*-->") IDENT
//! stereo     := "<<" IDENT ("," IDENT)* ">>"
//! seqdiag    := "seq" IDENT ("(" identlist ")")? stereo? "{" decl* event* "}"
//! decl       := "qubit" qinit ("," qinit)* | "cbit" identlist
//! qinit      := IDENT ("=" ("|0>" | "|1>"))?
//! event      := "gate" GATE angle? "on" IDENT
//!             | "gate" GATE angle? "control" identlist "target" identlist ("kickback")?
//!             | "swap" IDENT "," IDENT
//!             | "measure" IDENT "->" IDENT
//!             | "alt" cond "{" event* "}" ("else" "{" event* "}")?
//!             | "use" IDENT "on" "(" identlist ")"
//! angle      := "(" ("-"? INT? "pi" ("/" INT)? | "-"? FLOAT) ")"
//! cond       := andexpr ("^" andexpr)*
//! andexpr    := atom ("&&" atom)*
//! atom       := IDENT "==" ("0"|"1") | "(" cond ")"
//! ```

mod lexer;
pub(crate) mod printer;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::*;
use lexer::{tokenize, Tok, Token};

pub use printer::{cond_text, pretty_print};

/// Words that cannot be used as identifiers.
pub const KEYWORDS: &[&str] = &[
    "model", "classes", "class", "attr", "op", "circuit", "seq", "qubit", "cbit", "gate", "on", "control",
    "target", "kickback", "swap", "measure", "alt", "else", "use", "pi",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub span: SourceSpan,
    /// Descriptions of what would have been accepted. Never empty.
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expected.as_slice() {
            [one] => write!(f, "expected {one}, found {}", self.found),
            many => write!(f, "expected one of {}; found {}", many.join(", "), self.found),
        }
    }
}

/// Parses a `.quml` document. Syntax only: names are bound later by [`resolve`].
pub fn parse(text: &str, file: impl AsRef<str>) -> Result<Model, ParseError> {
    let file: Arc<str> = Arc::from(file.as_ref());
    if text.starts_with('\u{feff}') {
        return Err(ParseError {
            span: SourceSpan::new(file, (1, 1), (1, 2)),
            expected: vec!["UTF-8 text without a byte-order mark".into()],
            found: "byte-order mark".into(),
        });
    }
    let toks = tokenize(text, file)?;
    let mut p = Parser { toks, pos: 0 };
    let model = p.model()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(model)
}

/// Like [`parse`] but starts from raw bytes, rejecting a BOM and invalid UTF-8.
pub fn parse_bytes(bytes: &[u8], file: impl AsRef<str>) -> Result<Model, ParseError> {
    let file_ref = file.as_ref();
    if bytes.starts_with(&[0xEF, 0xBB, 0xBF]) {
        return parse("\u{feff}", file_ref);
    }
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text, file_ref),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() as u32 + 1;
            let col = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
            Err(ParseError {
                span: SourceSpan::new(Arc::from(file_ref), (line, col), (line, col + 1)),
                expected: vec!["valid UTF-8".into()],
                found: format!("byte 0x{:02x}", bytes[e.valid_up_to()]),
            })
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_tok(&self) -> &Tok {
        &self.peek().tok
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error<S: AsRef<str>>(&self, expected: &[S]) -> ParseError {
        let t = self.peek();
        ParseError {
            span: t.span.clone(),
            expected: expected.iter().map(|s| s.as_ref().to_string()).collect(),
            found: t.tok.describe(),
        }
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek_tok() == tok
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek_tok(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Token> {
        if self.at(&tok) {
            Ok(self.advance())
        } else {
            Err(self.error(&[what]))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Token> {
        if self.at_kw(kw) {
            Ok(self.advance())
        } else {
            Err(self.error(&[format!("`{kw}`")]))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek_tok() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let t = self.advance();
                let Tok::Ident(name) = t.tok else { unreachable!() };
                Ok(Ident::new(name, t.span))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn ident_list(&mut self) -> PResult<Vec<Ident>> {
        let mut out = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].span.clone()
    }

    fn model(&mut self) -> PResult<Model> {
        let start = self.expect_kw("model")?.span;
        let name = self.ident()?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut model = Model {
            name,
            classes: Vec::new(),
            relations: Vec::new(),
            sequences: Vec::new(),
            span: start.clone(),
        };
        loop {
            if self.at_kw("classes") {
                self.class_block(&mut model)?;
            } else if self.at_kw("seq") {
                model.sequences.push(self.seq_diagram()?);
            } else if self.at(&Tok::RBrace) {
                self.advance();
                break;
            } else {
                return Err(self.error(&["`classes`", "`seq`", "`}`"]));
            }
        }
        model.span = start.to(&self.prev_span());
        Ok(model)
    }

    fn class_block(&mut self, model: &mut Model) -> PResult<()> {
        self.expect_kw("classes")?;
        self.expect(Tok::LBrace, "`{`")?;
        loop {
            if self.at_kw("class") {
                model.classes.push(self.class_decl()?);
            } else if self.eat(&Tok::RBrace) {
                return Ok(());
            } else if matches!(self.peek_tok(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str())) {
                let from = self.ident()?;
                let kind = match self.peek_tok() {
                    Tok::Assoc => RelationKind::Association,
                    Tok::Generalize => RelationKind::Generalization,
                    Tok::Compose => RelationKind::Composition,
                    _ => return Err(self.error(&["`-->`", "`--|>`", "`*-->`"])),
                };
                self.advance();
                let to = self.ident()?;
                model.relations.push(Relation {
                    kind,
                    span: from.span.to(&to.span),
                    from,
                    to,
                });
            } else {
                return Err(self.error(&["`class`", "relation", "`}`"]));
            }
        }
    }

    fn stereotypes(&mut self) -> PResult<BTreeSet<Stereotype>> {
        let mut set = BTreeSet::new();
        if !self.eat(&Tok::StereoOpen) {
            return Ok(set);
        }
        loop {
            let tag = match self.peek_tok() {
                Tok::Ident(s) => s.parse::<Stereotype>().ok(),
                _ => None,
            };
            match tag {
                Some(t) => {
                    self.advance();
                    set.insert(t);
                }
                None => {
                    let tags: Vec<String> = Stereotype::ALL.iter().map(|t| format!("`{t}`")).collect();
                    return Err(self.error(&tags));
                }
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::StereoClose, "`>>`")?;
        Ok(set)
    }

    fn class_decl(&mut self) -> PResult<ClassDecl> {
        let start = self.expect_kw("class")?.span;
        let name = self.ident()?;
        let stereotypes = self.stereotypes()?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut class = ClassDecl {
            name,
            stereotypes,
            attributes: Vec::new(),
            operations: Vec::new(),
            circuit_ref: None,
            span: start.clone(),
        };
        loop {
            if self.eat_kw("attr") {
                let name = self.ident()?;
                self.expect(Tok::Colon, "`:`")?;
                let type_name = self.ident()?;
                class.attributes.push(Attribute { name, type_name });
            } else if self.eat_kw("op") {
                let name = self.ident()?;
                self.expect(Tok::LParen, "`(`")?;
                let mut params = Vec::new();
                if !self.at(&Tok::RParen) {
                    loop {
                        let name = self.ident()?;
                        let type_name = if self.eat(&Tok::Colon) {
                            Some(self.ident()?)
                        } else {
                            None
                        };
                        params.push(Param { name, type_name });
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen, "`)`")?;
                let return_type = if self.eat(&Tok::Colon) {
                    Some(self.ident()?)
                } else {
                    None
                };
                class.operations.push(Operation {
                    name,
                    params,
                    return_type,
                });
            } else if self.at_kw("circuit") {
                if class.circuit_ref.is_some() {
                    return Err(self.error(&["`attr`", "`op`", "`}`"]));
                }
                self.advance();
                class.circuit_ref = Some(self.ident()?);
            } else if self.eat(&Tok::RBrace) {
                break;
            } else {
                return Err(self.error(&["`attr`", "`op`", "`circuit`", "`}`"]));
            }
        }
        class.span = start.to(&self.prev_span());
        Ok(class)
    }

    fn seq_diagram(&mut self) -> PResult<SeqDiagram> {
        let start = self.expect_kw("seq")?.span;
        let name = self.ident()?;
        let formal_qubits = if self.eat(&Tok::LParen) {
            let list = self.ident_list()?;
            self.expect(Tok::RParen, "`)`")?;
            list
        } else {
            Vec::new()
        };
        let stereotypes = self.stereotypes()?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut seq = SeqDiagram {
            name,
            stereotypes,
            formal_qubits,
            qubits: Vec::new(),
            cbits: Vec::new(),
            events: Vec::new(),
            span: start.clone(),
        };
        loop {
            if self.at_kw("qubit") {
                if seq.is_parameterized() {
                    // A sub-diagram binds its qubits through its parameter list.
                    return Err(self.error(&["`cbit`", "event", "`}`"]));
                }
                self.advance();
                loop {
                    let name = self.ident()?;
                    let init = if self.eat(&Tok::Assign) {
                        match self.peek_tok() {
                            Tok::Ket0 => Some(Ket::Zero),
                            Tok::Ket1 => Some(Ket::One),
                            _ => return Err(self.error(&["`|0>`", "`|1>`"])),
                        }
                    } else {
                        None
                    };
                    if init.is_some() {
                        self.advance();
                    }
                    seq.qubits.push(QubitDecl { name, init });
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            } else if self.eat_kw("cbit") {
                seq.cbits.extend(self.ident_list()?);
            } else {
                break;
            }
        }
        seq.events = self.events()?;
        self.expect(Tok::RBrace, "`}`")?;
        seq.span = start.to(&self.prev_span());
        Ok(seq)
    }

    /// Events up to (not including) the closing `}`.
    fn events(&mut self) -> PResult<Vec<Event>> {
        let mut out = Vec::new();
        while !self.at(&Tok::RBrace) {
            out.push(self.event()?);
        }
        Ok(out)
    }

    fn event(&mut self) -> PResult<Event> {
        let start = self.peek().span.clone();
        let kind = if self.eat_kw("gate") {
            self.gate_event()?
        } else if self.eat_kw("swap") {
            let a = self.ident()?;
            self.expect(Tok::Comma, "`,`")?;
            let b = self.ident()?;
            EventKind::Swap { a, b }
        } else if self.eat_kw("measure") {
            let qubit = self.ident()?;
            self.expect(Tok::Arrow, "`->`")?;
            let cbit = self.ident()?;
            EventKind::Measure { qubit, cbit }
        } else if self.eat_kw("alt") {
            let cond = self.cond()?;
            self.expect(Tok::LBrace, "`{`")?;
            let then_events = self.events()?;
            self.expect(Tok::RBrace, "`}`")?;
            let else_events = if self.eat_kw("else") {
                self.expect(Tok::LBrace, "`{`")?;
                let evs = self.events()?;
                self.expect(Tok::RBrace, "`}`")?;
                evs
            } else {
                Vec::new()
            };
            EventKind::Alt {
                cond,
                then_events,
                else_events,
            }
        } else if self.eat_kw("use") {
            let callee = self.ident()?;
            self.expect_kw("on")?;
            self.expect(Tok::LParen, "`(`")?;
            let actuals = self.ident_list()?;
            self.expect(Tok::RParen, "`)`")?;
            EventKind::Use { callee, actuals }
        } else {
            return Err(self.error(&["`gate`", "`swap`", "`measure`", "`alt`", "`use`", "`}`"]));
        };
        Ok(Event {
            kind,
            span: start.to(&self.prev_span()),
        })
    }

    fn gate_event(&mut self) -> PResult<EventKind> {
        let gate = match self.peek_tok() {
            Tok::Ident(s) => s.parse::<GateKind>().ok(),
            _ => None,
        };
        let Some(gate) = gate else {
            let names: Vec<String> = GateKind::ALL.iter().map(|g| format!("`{g}`")).collect();
            return Err(self.error(&names));
        };
        self.advance();
        let angle = if gate.is_parametric() {
            if !self.at(&Tok::LParen) {
                return Err(self.error(&["`(` angle"]));
            }
            Some(self.angle()?)
        } else {
            None
        };
        if self.eat_kw("on") {
            let qubit = self.ident()?;
            return Ok(EventKind::SingleGate { gate, angle, qubit });
        }
        if gate.allows_controls() && self.eat_kw("control") {
            let controls = self.ident_list()?;
            self.expect_kw("target")?;
            let targets = self.ident_list()?;
            let kickback = self.eat_kw("kickback");
            return Ok(EventKind::MultiGate {
                gate,
                angle,
                controls,
                targets,
                kickback,
            });
        }
        if gate.allows_controls() {
            Err(self.error(&["`on`", "`control`"]))
        } else {
            Err(self.error(&["`on`"]))
        }
    }

    fn int(&mut self) -> PResult<u64> {
        match *self.peek_tok() {
            Tok::Int(v) => {
                self.advance();
                Ok(v)
            }
            _ => Err(self.error(&["integer"])),
        }
    }

    fn angle(&mut self) -> PResult<Angle> {
        self.expect(Tok::LParen, "`(`")?;
        let negative = self.eat(&Tok::Minus);
        let angle = match *self.peek_tok() {
            Tok::Float(v) => {
                self.advance();
                Angle::Radians(if negative { -v } else { v })
            }
            Tok::Int(_) | Tok::Ident(_) => {
                let coeff = if matches!(self.peek_tok(), Tok::Int(_)) {
                    let span = self.peek().span.clone();
                    let v = self.int()?;
                    i64::try_from(v).map_err(|_| ParseError {
                        span,
                        expected: vec!["numerator within 64-bit signed range".into()],
                        found: format!("`{v}`"),
                    })?
                } else {
                    1
                };
                self.expect_kw("pi")?;
                let den = if self.eat(&Tok::Slash) {
                    if self.at(&Tok::Int(0)) {
                        return Err(self.error(&["positive integer"]));
                    }
                    self.int()?
                } else {
                    1
                };
                Angle::PiMultiple {
                    num: if negative { -coeff } else { coeff },
                    den,
                }
            }
            _ => return Err(self.error(&["integer", "`pi`", "decimal number"])),
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(angle)
    }

    fn cond(&mut self) -> PResult<CondExpr<Ident>> {
        let mut lhs = self.and_expr()?;
        while self.eat(&Tok::Caret) {
            let rhs = self.and_expr()?;
            lhs = CondExpr::xor(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<CondExpr<Ident>> {
        let mut lhs = self.cond_atom()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.cond_atom()?;
            lhs = CondExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn cond_atom(&mut self) -> PResult<CondExpr<Ident>> {
        if self.eat(&Tok::LParen) {
            let inner = self.cond()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(inner);
        }
        if !matches!(self.peek_tok(), Tok::Ident(_)) {
            return Err(self.error(&["identifier", "`(`"]));
        }
        let cbit = self.ident()?;
        self.expect(Tok::EqEq, "`==`")?;
        let value = match self.peek_tok() {
            Tok::Int(0) => false,
            Tok::Int(1) => true,
            _ => return Err(self.error(&["`0`", "`1`"])),
        };
        self.advance();
        Ok(CondExpr::eq(cbit, value))
    }
}
