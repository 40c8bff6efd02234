//! Name resolution: binds class, diagram, lifeline and `use` references.

use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolveError {
    #[error("unknown class `{name}`")]
    UnknownClass { name: String, span: SourceSpan },
    #[error("unknown sequence diagram `{name}`")]
    UnknownDiagram { name: String, span: SourceSpan },
    #[error("unknown {expected} lifeline `{name}`")]
    UnknownLifeline {
        name: String,
        expected: &'static str,
        span: SourceSpan,
    },
    #[error("duplicate name `{name}` (first declared at {previous})")]
    DuplicateName {
        name: String,
        span: SourceSpan,
        previous: SourceSpan,
    },
}

impl ResolveError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            ResolveError::UnknownClass { span, .. }
            | ResolveError::UnknownDiagram { span, .. }
            | ResolveError::UnknownLifeline { span, .. }
            | ResolveError::DuplicateName { span, .. } => span,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LifelineKind {
    /// Formal parameter of a sub-diagram; `index` counts formals.
    Formal,
    /// Declared qubit; `index` counts declarations.
    Qubit,
    Cbit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lifeline {
    pub kind: LifelineKind,
    pub index: usize,
    pub span: SourceSpan,
}

impl Lifeline {
    pub fn is_qubit(&self) -> bool {
        matches!(self.kind, LifelineKind::Formal | LifelineKind::Qubit)
    }
}

/// Lifelines of one sequence diagram.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagramScope {
    pub lifelines: BTreeMap<String, Lifeline>,
}

impl DiagramScope {
    pub fn get(&self, name: &str) -> Option<&Lifeline> {
        self.lifelines.get(name)
    }

    pub fn qubit_count(&self) -> usize {
        self.lifelines.values().filter(|l| l.is_qubit()).count()
    }

    pub fn cbit_count(&self) -> usize {
        self.lifelines
            .values()
            .filter(|l| l.kind == LifelineKind::Cbit)
            .count()
    }
}

/// A resolved `use` event: `caller` and `callee` index [`Model::sequences`].
#[derive(Debug, Clone, PartialEq)]
pub struct UseBinding {
    pub caller: usize,
    pub callee: usize,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolTable {
    pub classes: BTreeMap<String, usize>,
    pub diagrams: BTreeMap<String, usize>,
    /// One scope per diagram, parallel to [`Model::sequences`].
    pub scopes: Vec<DiagramScope>,
    pub uses: Vec<UseBinding>,
}

impl SymbolTable {
    pub fn scope(&self, diagram: &str) -> Option<&DiagramScope> {
        self.diagrams.get(diagram).map(|&i| &self.scopes[i])
    }

    pub fn sub_diagram_count(&self, model: &Model) -> usize {
        model.sequences.iter().filter(|s| s.is_parameterized()).count()
    }
}

/// Binds every name in `model`. Fails on the first unresolved or duplicated name.
pub fn resolve(model: &Model) -> Result<SymbolTable, ResolveError> {
    let mut table = SymbolTable::default();
    // Classes and diagrams share one namespace for duplicate detection.
    let mut global: BTreeMap<&str, &SourceSpan> = BTreeMap::new();
    for (i, c) in model.classes.iter().enumerate() {
        declare(&mut global, &c.name)?;
        table.classes.insert(c.name.name.clone(), i);
    }
    for (i, s) in model.sequences.iter().enumerate() {
        declare(&mut global, &s.name)?;
        table.diagrams.insert(s.name.name.clone(), i);
    }

    for r in &model.relations {
        for end in [&r.from, &r.to] {
            if !table.classes.contains_key(&end.name) {
                return Err(ResolveError::UnknownClass {
                    name: end.name.clone(),
                    span: end.span.clone(),
                });
            }
        }
    }
    for c in &model.classes {
        if let Some(circ) = &c.circuit_ref {
            if !table.diagrams.contains_key(&circ.name) {
                return Err(unknown_diagram(circ));
            }
        }
    }

    for (di, seq) in model.sequences.iter().enumerate() {
        let mut scope = DiagramScope::default();
        let mut seen: BTreeMap<&str, &SourceSpan> = BTreeMap::new();
        let groups: [(LifelineKind, Vec<&Ident>); 3] = [
            (LifelineKind::Formal, seq.formal_qubits.iter().collect()),
            (LifelineKind::Qubit, seq.qubits.iter().map(|q| &q.name).collect()),
            (LifelineKind::Cbit, seq.cbits.iter().collect()),
        ];
        for (kind, names) in groups {
            for (index, name) in names.into_iter().enumerate() {
                declare(&mut seen, name)?;
                scope.lifelines.insert(
                    name.name.clone(),
                    Lifeline {
                        kind,
                        index,
                        span: name.span.clone(),
                    },
                );
            }
        }
        resolve_events(&seq.events, &scope, &table.diagrams, di, &mut table.uses)?;
        table.scopes.push(scope);
    }
    Ok(table)
}

fn declare<'a>(seen: &mut BTreeMap<&'a str, &'a SourceSpan>, name: &'a Ident) -> Result<(), ResolveError> {
    if let Some(prev) = seen.insert(&name.name, &name.span) {
        return Err(ResolveError::DuplicateName {
            name: name.name.clone(),
            span: name.span.clone(),
            previous: prev.clone(),
        });
    }
    Ok(())
}

fn unknown_diagram(name: &Ident) -> ResolveError {
    ResolveError::UnknownDiagram {
        name: name.name.clone(),
        span: name.span.clone(),
    }
}

fn resolve_events(
    events: &[Event],
    scope: &DiagramScope,
    diagrams: &BTreeMap<String, usize>,
    caller: usize,
    uses: &mut Vec<UseBinding>,
) -> Result<(), ResolveError> {
    let qubit = |name: &Ident| -> Result<(), ResolveError> {
        match scope.get(&name.name) {
            Some(l) if l.is_qubit() => Ok(()),
            _ => Err(ResolveError::UnknownLifeline {
                name: name.name.clone(),
                expected: "qubit",
                span: name.span.clone(),
            }),
        }
    };
    for e in events {
        match &e.kind {
            EventKind::SingleGate { qubit: q, .. } => qubit(q)?,
            EventKind::MultiGate {
                controls, targets, ..
            } => {
                for q in controls.iter().chain(targets) {
                    qubit(q)?;
                }
            }
            EventKind::Swap { a, b } => {
                qubit(a)?;
                qubit(b)?;
            }
            EventKind::Measure { qubit: q, cbit } => {
                qubit(q)?;
                // Kind of the destination is a semantic rule (Q002), not resolution.
                if scope.get(&cbit.name).is_none() {
                    return Err(ResolveError::UnknownLifeline {
                        name: cbit.name.clone(),
                        expected: "cbit",
                        span: cbit.span.clone(),
                    });
                }
            }
            EventKind::Alt {
                cond,
                then_events,
                else_events,
            } => {
                for leaf in cond.leaves() {
                    match scope.get(&leaf.name) {
                        Some(l) if l.kind == LifelineKind::Cbit => {}
                        _ => {
                            return Err(ResolveError::UnknownLifeline {
                                name: leaf.name.clone(),
                                expected: "cbit",
                                span: leaf.span.clone(),
                            })
                        }
                    }
                }
                resolve_events(then_events, scope, diagrams, caller, uses)?;
                resolve_events(else_events, scope, diagrams, caller, uses)?;
            }
            EventKind::Use { callee, actuals } => {
                let Some(&target) = diagrams.get(&callee.name) else {
                    return Err(unknown_diagram(callee));
                };
                for q in actuals {
                    qubit(q)?;
                }
                uses.push(UseBinding {
                    caller,
                    callee: target,
                    span: e.span.clone(),
                });
            }
        }
    }
    Ok(())
}
