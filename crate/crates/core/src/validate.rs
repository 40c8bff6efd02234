//! Semantic rules of QuanUML models, reported as positioned diagnostics.
//!
//! | code | severity | rule |
//! |------|----------|------|
//! | Q001 | error    | qubit operated on after it was measured on every path |
//! | Q002 | error    | measurement into a non-cbit, or into a cbit already assigned on the path |
//! | Q003 | error    | alt condition reads a cbit no preceding measurement assigns |
//! | Q004 | error    | repeated qubit within one gate or swap |
//! | Q005 | error    | `use` arity mismatch or repeated actual |
//! | Q006 | error    | cyclic `use` |
//! | Q007 | error    | class with a circuit but without `<<Quantum>>` |
//! | Q008 | warning  | declared qubit never used |
//! | Q009 | warning  | qubit never measured in a diagram nobody uses |
//! | Q010 | error    | like Q001, for events inside an alt fragment |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Code {
    Q001,
    Q002,
    Q003,
    Q004,
    Q005,
    Q006,
    Q007,
    Q008,
    Q009,
    Q010,
}

impl Code {
    pub const ALL: [Code; 10] = [
        Code::Q001,
        Code::Q002,
        Code::Q003,
        Code::Q004,
        Code::Q005,
        Code::Q006,
        Code::Q007,
        Code::Q008,
        Code::Q009,
        Code::Q010,
    ];

    pub fn severity(self) -> Severity {
        match self {
            Code::Q008 | Code::Q009 => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub message: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    fn new(code: Code, message: String, span: &SourceSpan) -> Self {
        Diagnostic {
            code,
            severity: code.severity(),
            message,
            span: span.clone(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {}[{}]: {}",
            self.span.file, self.span.start_line, self.span.start_col, self.severity, self.code, self.message
        )
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

#[derive(Serialize)]
struct DiagnosticJson<'a> {
    code: Code,
    severity: Severity,
    message: &'a str,
    file: &'a str,
    line: u32,
    col: u32,
    end_line: u32,
    end_col: u32,
}

/// Diagnostics as a JSON array, newline-terminated.
pub fn diagnostics_json(diags: &[Diagnostic]) -> String {
    let rows: Vec<DiagnosticJson> = diags
        .iter()
        .map(|d| DiagnosticJson {
            code: d.code,
            severity: d.severity,
            message: &d.message,
            file: &d.span.file,
            line: d.span.start_line,
            col: d.span.start_col,
            end_line: d.span.end_line,
            end_col: d.span.end_col,
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("diagnostics serialize");
    s.push('\n');
    s
}

/// Resolves names, then validates.
pub fn check(model: &Model) -> Result<Vec<Diagnostic>, ResolveError> {
    let symbols = resolve(model)?;
    Ok(validate(model, &symbols))
}

/// All diagnostics for a resolved model, ordered by (file, line, col, code).
pub fn validate(model: &Model, symbols: &SymbolTable) -> Vec<Diagnostic> {
    let mut v = Validator {
        model,
        symbols,
        diags: Vec::new(),
        summaries: BTreeMap::new(),
    };
    v.classes();
    v.cycles();
    let used: BTreeSet<usize> = symbols.uses.iter().map(|u| u.callee).collect();
    for (i, seq) in model.sequences.iter().enumerate() {
        v.diagram(i, seq, !used.contains(&i));
    }
    let mut diags = v.diags;
    diags.sort_by(|a, b| {
        let key = |d: &Diagnostic| (d.span.file.clone(), d.span.start_line, d.span.start_col, d.code);
        key(a).cmp(&key(b)).then_with(|| a.message.cmp(&b.message))
    });
    diags
}

/// Per-path facts about lifelines, merged at the end of an alt fragment.
#[derive(Debug, Clone, Default)]
struct Flow {
    /// Qubit measured on every path so far.
    ended_all: BTreeSet<String>,
    /// Qubit measured on at least one path so far.
    ended_some: BTreeSet<String>,
    /// Cbit assigned on at least one path so far.
    assigned_some: BTreeSet<String>,
}

impl Flow {
    fn merge(a: Flow, b: Flow) -> Flow {
        Flow {
            ended_all: a.ended_all.intersection(&b.ended_all).cloned().collect(),
            ended_some: a.ended_some.union(&b.ended_some).cloned().collect(),
            assigned_some: a.assigned_some.union(&b.assigned_some).cloned().collect(),
        }
    }
}

/// What a sub-diagram does to its formal qubits, by position.
#[derive(Debug, Clone, Default)]
struct Summary {
    ends_all: Vec<bool>,
    ends_some: Vec<bool>,
}

struct Validator<'a> {
    model: &'a Model,
    symbols: &'a SymbolTable,
    diags: Vec<Diagnostic>,
    /// `None` marks a summary under construction (cycle guard).
    summaries: BTreeMap<usize, Option<Summary>>,
}

impl<'a> Validator<'a> {
    fn push(&mut self, code: Code, message: String, span: &SourceSpan) {
        self.diags.push(Diagnostic::new(code, message, span));
    }

    fn classes(&mut self) {
        for c in &self.model.classes {
            if let Some(circ) = &c.circuit_ref {
                if !c.stereotypes.contains(&Stereotype::Quantum) {
                    self.push(
                        Code::Q007,
                        format!(
                            "class `{}` holds circuit `{}` but lacks the <<Quantum>> stereotype",
                            c.name, circ
                        ),
                        &c.name.span,
                    );
                }
            }
        }
    }

    fn cycles(&mut self) {
        // Colors: 0 unvisited, 1 on stack, 2 done. Back edges close a cycle.
        let n = self.model.sequences.len();
        let mut color = vec![0u8; n];
        let mut edges: Vec<Vec<&UseBinding>> = vec![Vec::new(); n];
        for u in &self.symbols.uses {
            edges[u.caller].push(u);
        }
        fn dfs(v: usize, edges: &[Vec<&UseBinding>], color: &mut [u8], back: &mut Vec<(usize, SourceSpan)>) {
            color[v] = 1;
            for u in &edges[v] {
                match color[u.callee] {
                    0 => dfs(u.callee, edges, color, back),
                    1 => back.push((u.callee, u.span.clone())),
                    _ => {}
                }
            }
            color[v] = 2;
        }
        let mut back = Vec::new();
        for v in 0..n {
            if color[v] == 0 {
                dfs(v, &edges, &mut color, &mut back);
            }
        }
        for (target, span) in back {
            let name = self.model.sequences[target].name.name.clone();
            self.push(
                Code::Q006,
                format!("`use` of `{name}` closes a cycle of sub-diagram inclusions"),
                &span,
            );
        }
    }

    fn summary(&mut self, idx: usize) -> Summary {
        match self.summaries.get(&idx) {
            Some(Some(s)) => return s.clone(),
            Some(None) => return Summary::default(),
            None => {}
        }
        self.summaries.insert(idx, None);
        let seq = &self.model.sequences[idx];
        // Diagnostics are reported when the diagram itself is validated.
        let saved = std::mem::take(&mut self.diags);
        let mut flow = Flow::default();
        self.events(&self.symbols.scopes[idx], &seq.events, &mut flow, false);
        self.diags = saved;
        let s = Summary {
            ends_all: seq
                .formal_qubits
                .iter()
                .map(|f| flow.ended_all.contains(&f.name))
                .collect(),
            ends_some: seq
                .formal_qubits
                .iter()
                .map(|f| flow.ended_some.contains(&f.name))
                .collect(),
        };
        self.summaries.insert(idx, Some(s.clone()));
        s
    }

    fn diagram(&mut self, idx: usize, seq: &'a SeqDiagram, top_level: bool) {
        let mut flow = Flow::default();
        self.events(&self.symbols.scopes[idx], &seq.events, &mut flow, false);

        let mut referenced = BTreeSet::new();
        walk_events(&seq.events, &mut |e| {
            for q in e.kind.qubit_operands() {
                referenced.insert(q.name.as_str());
            }
            // A qubit misused as a measure destination is reported as Q002 instead.
            if let EventKind::Measure { cbit, .. } = &e.kind {
                referenced.insert(cbit.name.as_str());
            }
        });
        for q in &seq.qubits {
            if !referenced.contains(q.name.as_str()) {
                self.push(
                    Code::Q008,
                    format!("qubit `{}` is declared but never used", q.name),
                    &q.name.span,
                );
            } else if top_level && !flow.ended_some.contains(&q.name.name) {
                self.push(
                    Code::Q009,
                    format!("qubit `{}` is never measured; its result is unobservable", q.name),
                    &q.name.span,
                );
            }
        }
    }

    fn lifeline_ended(&mut self, q: &Ident, flow: &Flow, in_alt: bool) {
        if flow.ended_all.contains(&q.name) {
            if in_alt {
                self.push(
                    Code::Q010,
                    format!(
                        "operation inside alt fragment acts on `{}`, whose lifeline ended at measurement",
                        q
                    ),
                    &q.span,
                );
            } else {
                self.push(
                    Code::Q001,
                    format!("operation on `{}` after its lifeline ended at measurement", q),
                    &q.span,
                );
            }
        }
    }

    fn events(&mut self, scope: &'a DiagramScope, events: &'a [Event], flow: &mut Flow, in_alt: bool) {
        for e in events {
            match &e.kind {
                EventKind::SingleGate { qubit, .. } => self.lifeline_ended(qubit, flow, in_alt),
                EventKind::MultiGate {
                    controls, targets, ..
                } => {
                    let mut seen = BTreeSet::new();
                    for q in controls.iter().chain(targets) {
                        if !seen.insert(q.name.as_str()) {
                            self.push(
                                Code::Q004,
                                format!("`{q}` appears more than once among the gate's controls and targets"),
                                &q.span,
                            );
                        }
                    }
                    for q in controls.iter().chain(targets) {
                        self.lifeline_ended(q, flow, in_alt);
                    }
                }
                EventKind::Swap { a, b } => {
                    if a.name == b.name {
                        self.push(Code::Q004, format!("swap applies to `{a}` twice"), &b.span);
                    }
                    self.lifeline_ended(a, flow, in_alt);
                    if a.name != b.name {
                        self.lifeline_ended(b, flow, in_alt);
                    }
                }
                EventKind::Measure { qubit, cbit } => {
                    self.lifeline_ended(qubit, flow, in_alt);
                    let is_cbit = scope
                        .get(&cbit.name)
                        .is_some_and(|l| l.kind == LifelineKind::Cbit);
                    if !is_cbit {
                        self.push(
                            Code::Q002,
                            format!("measurement target `{cbit}` is not a declared classical bit"),
                            &cbit.span,
                        );
                    } else if flow.assigned_some.contains(&cbit.name) {
                        self.push(
                            Code::Q002,
                            format!("classical bit `{cbit}` is measured into more than once on one path"),
                            &cbit.span,
                        );
                    } else {
                        flow.assigned_some.insert(cbit.name.clone());
                    }
                    flow.ended_all.insert(qubit.name.clone());
                    flow.ended_some.insert(qubit.name.clone());
                }
                EventKind::Alt {
                    cond,
                    then_events,
                    else_events,
                } => {
                    let mut reported = BTreeSet::new();
                    for leaf in cond.leaves() {
                        if !flow.assigned_some.contains(&leaf.name) && reported.insert(leaf.name.as_str()) {
                            self.push(
                                Code::Q003,
                                format!("condition reads `{leaf}` before any measurement assigns it"),
                                &leaf.span,
                            );
                        }
                    }
                    let mut then_flow = flow.clone();
                    self.events(scope, then_events, &mut then_flow, true);
                    let mut else_flow = flow.clone();
                    self.events(scope, else_events, &mut else_flow, true);
                    *flow = Flow::merge(then_flow, else_flow);
                }
                EventKind::Use { callee, actuals } => {
                    let Some(&target) = self.symbols.diagrams.get(&callee.name) else {
                        continue;
                    };
                    let formals = self.model.sequences[target].formal_qubits.len();
                    if formals != actuals.len() {
                        self.push(
                            Code::Q005,
                            format!(
                                "`{callee}` takes {formals} qubit(s) but {} were passed",
                                actuals.len()
                            ),
                            &callee.span,
                        );
                    }
                    let mut seen = BTreeSet::new();
                    for q in actuals {
                        if !seen.insert(q.name.as_str()) {
                            self.push(
                                Code::Q005,
                                format!("`{q}` is passed to `{callee}` more than once"),
                                &q.span,
                            );
                        }
                    }
                    for q in actuals {
                        self.lifeline_ended(q, flow, in_alt);
                    }
                    let summary = self.summary(target);
                    for (i, q) in actuals.iter().enumerate() {
                        if summary.ends_all.get(i).copied().unwrap_or(false) {
                            flow.ended_all.insert(q.name.clone());
                        }
                        if summary.ends_some.get(i).copied().unwrap_or(false) {
                            flow.ended_some.insert(q.name.clone());
                        }
                    }
                }
            }
        }
    }
}
