//! Abstract syntax of QuanUML models.
//!
//! A [`Model`] holds both modeling levels: the architecture class diagram
//! (classes and relations) and any number of circuit-level sequence
//! diagrams. Every node carries a [`SourceSpan`]; structural comparison
//! ignores spans (see [`Model::structurally_eq`]).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// 1-based source region. `end` points one column past the last character.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(file: Arc<str>, start: (u32, u32), end: (u32, u32)) -> Self {
        debug_assert!(start <= end);
        SourceSpan {
            file,
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        }
    }

    /// Smallest span covering both `self` and `other` (same file assumed).
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        let start = (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let end = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        SourceSpan::new(self.file.clone(), start, end)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

/// A name together with where it was written.
#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: SourceSpan,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: SourceSpan) -> Self {
        Ident {
            name: name.into(),
            span,
        }
    }

    /// Identifier with an empty span, for programmatically built models.
    pub fn bare(name: impl Into<String>) -> Self {
        Ident::new(name, SourceSpan::default())
    }

    pub fn as_str(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stereotype {
    Quantum,
    Qubit,
    ClassicalBit,
    Control,
    Controlled,
}

impl Stereotype {
    pub const ALL: [Stereotype; 5] = [
        Stereotype::Quantum,
        Stereotype::Qubit,
        Stereotype::ClassicalBit,
        Stereotype::Control,
        Stereotype::Controlled,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Stereotype::Quantum => "Quantum",
            Stereotype::Qubit => "qubit",
            Stereotype::ClassicalBit => "classicalbit",
            Stereotype::Control => "control",
            Stereotype::Controlled => "controlled",
        }
    }
}

impl FromStr for Stereotype {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Stereotype::ALL.into_iter().find(|t| t.tag() == s).ok_or(())
    }
}

impl fmt::Display for Stereotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    RX,
    RY,
    RZ,
    P,
}

impl GateKind {
    pub const ALL: [GateKind; 12] = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::P,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::Sdg => "Sdg",
            GateKind::T => "T",
            GateKind::Tdg => "Tdg",
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::P => "P",
        }
    }

    /// Whether the gate takes an angle argument.
    pub fn is_parametric(self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::P)
    }

    /// Whether the gate may appear in the controlled (group message) form.
    pub fn allows_controls(self) -> bool {
        matches!(self, GateKind::X | GateKind::Z | GateKind::P)
    }
}

impl FromStr for GateKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        GateKind::ALL.into_iter().find(|g| g.name() == s).ok_or(())
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Gate rotation angle: a rational multiple of pi or a literal in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Angle {
    PiMultiple { num: i64, den: u64 },
    Radians(f64),
}

impl Angle {
    pub fn pi_fraction(num: i64, den: u64) -> Angle {
        assert!(den > 0, "angle denominator must be positive");
        Angle::PiMultiple { num, den }
    }

    pub fn radians(&self) -> f64 {
        match *self {
            Angle::PiMultiple { num, den } => num as f64 * std::f64::consts::PI / den as f64,
            Angle::Radians(r) => r,
        }
    }

    /// Rational multiples reduced to lowest terms; radians unchanged.
    pub fn canonical(self) -> Angle {
        match self {
            Angle::PiMultiple { num, den } => {
                let g = gcd(num.unsigned_abs(), den);
                if num == 0 {
                    Angle::PiMultiple { num: 0, den: 1 }
                } else {
                    Angle::PiMultiple {
                        num: num / g as i64,
                        den: den / g,
                    }
                }
            }
            r @ Angle::Radians(_) => r,
        }
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ket {
    Zero,
    One,
}

impl Ket {
    pub fn text(self) -> &'static str {
        match self {
            Ket::Zero => "|0>",
            Ket::One => "|1>",
        }
    }
}

/// Boolean condition of an alt fragment, over classical bits of type `B`.
///
/// The model uses [`Ident`] leaves; lowered circuits use register indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CondExpr<B> {
    Eq { cbit: B, value: bool },
    Xor(Box<CondExpr<B>>, Box<CondExpr<B>>),
    And(Box<CondExpr<B>>, Box<CondExpr<B>>),
}

impl<B> CondExpr<B> {
    pub fn eq(cbit: B, value: bool) -> Self {
        CondExpr::Eq { cbit, value }
    }

    pub fn xor(a: Self, b: Self) -> Self {
        CondExpr::Xor(Box::new(a), Box::new(b))
    }

    pub fn and(a: Self, b: Self) -> Self {
        CondExpr::And(Box::new(a), Box::new(b))
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&B> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a B>) {
        match self {
            CondExpr::Eq { cbit, .. } => out.push(cbit),
            CondExpr::Xor(a, b) | CondExpr::And(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }

    pub fn try_map<C, E>(&self, f: &mut impl FnMut(&B) -> Result<C, E>) -> Result<CondExpr<C>, E> {
        Ok(match self {
            CondExpr::Eq { cbit, value } => CondExpr::Eq {
                cbit: f(cbit)?,
                value: *value,
            },
            CondExpr::Xor(a, b) => CondExpr::xor(a.try_map(f)?, b.try_map(f)?),
            CondExpr::And(a, b) => CondExpr::and(a.try_map(f)?, b.try_map(f)?),
        })
    }

    /// Evaluates with `lookup` returning the current value of a bit.
    pub fn eval<E>(&self, lookup: &mut impl FnMut(&B) -> Result<bool, E>) -> Result<bool, E> {
        Ok(match self {
            CondExpr::Eq { cbit, value } => lookup(cbit)? == *value,
            CondExpr::Xor(a, b) => a.eval(lookup)? ^ b.eval(lookup)?,
            CondExpr::And(a, b) => a.eval(lookup)? && b.eval(lookup)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationKind {
    Association,
    Generalization,
    Composition,
}

impl RelationKind {
    pub fn arrow(self) -> &'static str {
        match self {
            RelationKind::Association => "-->",
            RelationKind::Generalization => "--|>",
            RelationKind::Composition => "*-->",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: Ident,
    pub classes: Vec<ClassDecl>,
    pub relations: Vec<Relation>,
    pub sequences: Vec<SeqDiagram>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: Ident,
    pub stereotypes: BTreeSet<Stereotype>,
    pub attributes: Vec<Attribute>,
    pub operations: Vec<Operation>,
    pub circuit_ref: Option<Ident>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: Ident,
    pub type_name: Ident,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operation {
    pub name: Ident,
    pub params: Vec<Param>,
    pub return_type: Option<Ident>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: Ident,
    pub type_name: Option<Ident>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub kind: RelationKind,
    pub from: Ident,
    pub to: Ident,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitDecl {
    pub name: Ident,
    pub init: Option<Ket>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeqDiagram {
    pub name: Ident,
    pub stereotypes: BTreeSet<Stereotype>,
    /// Parameters of a reusable sub-diagram. Empty for top-level diagrams.
    pub formal_qubits: Vec<Ident>,
    pub qubits: Vec<QubitDecl>,
    pub cbits: Vec<Ident>,
    pub events: Vec<Event>,
    pub span: SourceSpan,
}

impl SeqDiagram {
    pub fn is_parameterized(&self) -> bool {
        !self.formal_qubits.is_empty()
    }

    /// All qubit lifeline names: formals first, then declarations.
    pub fn qubit_names(&self) -> impl Iterator<Item = &Ident> {
        self.formal_qubits
            .iter()
            .chain(self.qubits.iter().map(|q| &q.name))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    /// Self-message on one qubit lifeline.
    SingleGate {
        gate: GateKind,
        angle: Option<Angle>,
        qubit: Ident,
    },
    /// Group message from control lifelines to target lifelines.
    MultiGate {
        gate: GateKind,
        angle: Option<Angle>,
        controls: Vec<Ident>,
        targets: Vec<Ident>,
        kickback: bool,
    },
    Swap {
        a: Ident,
        b: Ident,
    },
    /// Asynchronous message from a qubit to a classical bit.
    Measure {
        qubit: Ident,
        cbit: Ident,
    },
    Alt {
        cond: CondExpr<Ident>,
        then_events: Vec<Event>,
        else_events: Vec<Event>,
    },
    Use {
        callee: Ident,
        actuals: Vec<Ident>,
    },
}

impl EventKind {
    /// Qubit lifelines this event acts on directly (not descending into alt).
    pub fn qubit_operands(&self) -> Vec<&Ident> {
        match self {
            EventKind::SingleGate { qubit, .. } => vec![qubit],
            EventKind::MultiGate {
                controls, targets, ..
            } => controls.iter().chain(targets).collect(),
            EventKind::Swap { a, b } => vec![a, b],
            EventKind::Measure { qubit, .. } => vec![qubit],
            EventKind::Alt { .. } => Vec::new(),
            EventKind::Use { actuals, .. } => actuals.iter().collect(),
        }
    }
}

impl Model {
    pub fn sequence(&self, name: &str) -> Option<&SeqDiagram> {
        self.sequences.iter().find(|s| s.name.name == name)
    }

    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name.name == name)
    }

    /// Copy of the model with every span replaced by the default span.
    pub fn without_spans(&self) -> Model {
        let mut m = self.clone();
        m.visit_spans_mut(&mut |s| *s = SourceSpan::default());
        m
    }

    /// Equality that ignores source positions.
    pub fn structurally_eq(&self, other: &Model) -> bool {
        self.without_spans() == other.without_spans()
    }

    pub fn visit_spans_mut(&mut self, f: &mut impl FnMut(&mut SourceSpan)) {
        f(&mut self.span);
        f(&mut self.name.span);
        for c in &mut self.classes {
            f(&mut c.span);
            f(&mut c.name.span);
            for a in &mut c.attributes {
                f(&mut a.name.span);
                f(&mut a.type_name.span);
            }
            for op in &mut c.operations {
                f(&mut op.name.span);
                for p in &mut op.params {
                    f(&mut p.name.span);
                    if let Some(t) = &mut p.type_name {
                        f(&mut t.span);
                    }
                }
                if let Some(r) = &mut op.return_type {
                    f(&mut r.span);
                }
            }
            if let Some(r) = &mut c.circuit_ref {
                f(&mut r.span);
            }
        }
        for r in &mut self.relations {
            f(&mut r.span);
            f(&mut r.from.span);
            f(&mut r.to.span);
        }
        for s in &mut self.sequences {
            f(&mut s.span);
            f(&mut s.name.span);
            s.formal_qubits.iter_mut().for_each(|i| f(&mut i.span));
            s.qubits.iter_mut().for_each(|q| f(&mut q.name.span));
            s.cbits.iter_mut().for_each(|i| f(&mut i.span));
            visit_event_spans(&mut s.events, f);
        }
    }
}

fn visit_event_spans(events: &mut [Event], f: &mut impl FnMut(&mut SourceSpan)) {
    for e in events {
        f(&mut e.span);
        match &mut e.kind {
            EventKind::SingleGate { qubit, .. } => f(&mut qubit.span),
            EventKind::MultiGate {
                controls, targets, ..
            } => controls
                .iter_mut()
                .chain(targets.iter_mut())
                .for_each(|i| f(&mut i.span)),
            EventKind::Swap { a, b } => {
                f(&mut a.span);
                f(&mut b.span);
            }
            EventKind::Measure { qubit, cbit } => {
                f(&mut qubit.span);
                f(&mut cbit.span);
            }
            EventKind::Alt {
                cond,
                then_events,
                else_events,
            } => {
                visit_cond_spans(cond, f);
                visit_event_spans(then_events, f);
                visit_event_spans(else_events, f);
            }
            EventKind::Use { callee, actuals } => {
                f(&mut callee.span);
                actuals.iter_mut().for_each(|i| f(&mut i.span));
            }
        }
    }
}

fn visit_cond_spans(cond: &mut CondExpr<Ident>, f: &mut impl FnMut(&mut SourceSpan)) {
    match cond {
        CondExpr::Eq { cbit, .. } => f(&mut cbit.span),
        CondExpr::Xor(a, b) | CondExpr::And(a, b) => {
            visit_cond_spans(a, f);
            visit_cond_spans(b, f);
        }
    }
}

/// Walks every event in `events`, descending into alt branches, in source order.
pub fn walk_events<'a>(events: &'a [Event], f: &mut impl FnMut(&'a Event)) {
    for e in events {
        f(e);
        if let EventKind::Alt {
            then_events,
            else_events,
            ..
        } = &e.kind
        {
            walk_events(then_events, f);
            walk_events(else_events, f);
        }
    }
}
