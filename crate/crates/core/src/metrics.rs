//! Diagram element counts under QuanUML rules and under a UML-profile
//! baseline where every gate is a typed node wired to its qubit lanes.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::lower::MAX_INLINE_DEPTH;
use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("unknown sequence diagram `{0}`")]
    UnknownDiagram(String),
    #[error("`use` nesting exceeds {MAX_INLINE_DEPTH} levels at `{0}`")]
    TooDeep(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ElementCount {
    pub lifelines: usize,
    pub messages: usize,
    pub fragments: usize,
    pub stereotype_labels: usize,
    pub total: usize,
}

impl ElementCount {
    fn finish(mut self) -> Self {
        self.total = self.lifelines + self.messages + self.fragments + self.stereotype_labels;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub quanuml: ElementCount,
    pub baseline: ElementCount,
    /// `quanuml.total / baseline.total`.
    pub ratio: f64,
}

fn diagram<'m>(model: &'m Model, name: &str) -> Result<&'m SeqDiagram, MetricsError> {
    model
        .sequence(name)
        .ok_or_else(|| MetricsError::UnknownDiagram(name.to_string()))
}

/// QuanUML: one lifeline per qubit, formal and cbit; one label per declared
/// qubit and cbit; self-messages for single gates; one arrow per control
/// plus an optional kickback reply; fragments for alt, else and use.
pub fn count_quanuml(model: &Model, name: &str) -> Result<ElementCount, MetricsError> {
    let seq = diagram(model, name)?;
    let mut c = ElementCount {
        lifelines: seq.formal_qubits.len() + seq.qubits.len() + seq.cbits.len(),
        stereotype_labels: seq.qubits.len() + seq.cbits.len(),
        ..ElementCount::default()
    };
    walk_events(&seq.events, &mut |e| match &e.kind {
        EventKind::SingleGate { .. } | EventKind::Swap { .. } | EventKind::Measure { .. } => c.messages += 1,
        EventKind::MultiGate {
            controls, kickback, ..
        } => c.messages += controls.len() + usize::from(*kickback),
        EventKind::Alt { else_events, .. } => c.fragments += 1 + usize::from(!else_events.is_empty()),
        EventKind::Use { .. } => c.fragments += 1,
    });
    Ok(c.finish())
}

/// Baseline: one lane per qubit; each gate of arity k is a labeled node
/// with k edges; a measurement is a node with two edges; an alt is a node
/// with one edge per cbit it reads; a use is a node plus the callee's
/// elements inlined.
pub fn count_baseline(model: &Model, name: &str) -> Result<ElementCount, MetricsError> {
    let seq = diagram(model, name)?;
    let lanes = seq.formal_qubits.len() + seq.qubits.len();
    let mut c = ElementCount {
        lifelines: lanes,
        stereotype_labels: lanes,
        ..ElementCount::default()
    };
    baseline_events(model, &seq.events, &mut c, 0)?;
    Ok(c.finish())
}

fn baseline_events(
    model: &Model,
    events: &[Event],
    c: &mut ElementCount,
    depth: usize,
) -> Result<(), MetricsError> {
    for e in events {
        match &e.kind {
            EventKind::SingleGate { .. } => gate_node(c, 1),
            EventKind::MultiGate {
                controls, targets, ..
            } => gate_node(c, controls.len() + targets.len()),
            EventKind::Swap { .. } => gate_node(c, 2),
            EventKind::Measure { .. } => {
                c.fragments += 1;
                c.messages += 2;
            }
            EventKind::Alt {
                cond,
                then_events,
                else_events,
            } => {
                let bits: BTreeSet<&str> = cond.leaves().iter().map(|i| i.as_str()).collect();
                c.fragments += 1;
                c.messages += bits.len();
                baseline_events(model, then_events, c, depth)?;
                baseline_events(model, else_events, c, depth)?;
            }
            EventKind::Use { callee, .. } => {
                if depth + 1 > MAX_INLINE_DEPTH {
                    return Err(MetricsError::TooDeep(callee.name.clone()));
                }
                let sub = diagram(model, &callee.name)?;
                c.fragments += 1;
                baseline_events(model, &sub.events, c, depth + 1)?;
            }
        }
    }
    Ok(())
}

fn gate_node(c: &mut ElementCount, arity: usize) {
    c.fragments += 1;
    c.messages += arity;
    c.stereotype_labels += 1;
}

pub fn compare(model: &Model, name: &str) -> Result<Comparison, MetricsError> {
    let quanuml = count_quanuml(model, name)?;
    let baseline = count_baseline(model, name)?;
    Ok(Comparison {
        quanuml,
        baseline,
        ratio: quanuml.total as f64 / baseline.total as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::parser::parse;

    #[test]
    fn bell_hand_counts() {
        let m = examples::load("bell").unwrap();
        let q = count_quanuml(&m, "BellState").unwrap();
        assert_eq!(
            q,
            ElementCount {
                lifelines: 4,
                messages: 4,
                fragments: 0,
                stereotype_labels: 4,
                total: 12
            }
        );
        assert_eq!(count_baseline(&m, "BellState").unwrap().total, 17);
    }

    #[test]
    fn single_gate_costs() {
        let m = parse("model M { seq S(q) { } seq T(q) { gate H on q } }", "m").unwrap();
        assert_eq!(count_quanuml(&m, "S").unwrap().total, 1);
        assert_eq!(count_baseline(&m, "S").unwrap().total, 2);
        let dq = count_quanuml(&m, "T").unwrap().total - 1;
        let db = count_baseline(&m, "T").unwrap().total - 2;
        assert_eq!((dq, db), (1, 3));
    }

    #[test]
    fn controlled_gate_costs() {
        let m = parse(
            "model M { seq S(a, b, t) { } seq T(a, b, t) { gate X control a, b target t kickback } \
             seq U(a, b, t) { gate X control a target t } }",
            "m",
        )
        .unwrap();
        let base_q = count_quanuml(&m, "S").unwrap().total;
        assert_eq!(count_quanuml(&m, "T").unwrap().total - base_q, 3);
        let base_b = count_baseline(&m, "S").unwrap().total;
        assert_eq!(count_baseline(&m, "U").unwrap().total - base_b, 4);
    }

    #[test]
    fn unknown() {
        let m = parse("model M { }", "m").unwrap();
        assert!(compare(&m, "S").is_err());
    }
}
