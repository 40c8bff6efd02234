use std::fmt::Write;

use thiserror::Error;

use crate::model::*;
use crate::parser::printer::{angle_text, cond_text};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("unknown sequence diagram `{0}`")]
    UnknownDiagram(String),
}

/// PlantUML sequence diagram for one diagram of `model`.
pub fn emit_diagram_text(model: &Model, name: &str) -> Result<String, DiagramError> {
    let seq = model
        .sequence(name)
        .ok_or_else(|| DiagramError::UnknownDiagram(name.to_string()))?;
    let mut out = String::new();
    writeln!(out, "@startuml {}", seq.name).unwrap();
    for f in &seq.formal_qubits {
        writeln!(out, "participant {f}").unwrap();
    }
    for q in &seq.qubits {
        writeln!(out, "participant {} <<qubit>>", q.name).unwrap();
    }
    for c in &seq.cbits {
        writeln!(out, "participant {c} <<classicalbit>>").unwrap();
    }
    for q in &seq.qubits {
        if q.init == Some(Ket::One) {
            writeln!(out, "note over {} : |1>", q.name).unwrap();
        }
    }
    for q in seq.qubit_names() {
        writeln!(out, "activate {q}").unwrap();
    }
    events(&mut out, &seq.events);
    out.push_str("@enduml\n");
    Ok(out)
}

fn label(gate: GateKind, angle: Option<Angle>) -> String {
    match angle {
        Some(a) => format!("{gate}({})", angle_text(a)),
        None => gate.to_string(),
    }
}

fn events(out: &mut String, events: &[Event]) {
    for e in events {
        match &e.kind {
            EventKind::SingleGate { gate, angle, qubit } => {
                writeln!(out, "{qubit} -> {qubit} : {}", label(*gate, *angle)).unwrap();
            }
            EventKind::MultiGate {
                gate,
                angle,
                controls,
                targets,
                kickback,
            } => {
                let text = label(*gate, *angle);
                for c in controls {
                    for t in targets {
                        writeln!(out, "{c} -> {t} : <<control>> {text}").unwrap();
                    }
                }
                if *kickback {
                    writeln!(out, "{} --> {} : <<controlled>>", targets[0], controls[0]).unwrap();
                }
            }
            EventKind::Swap { a, b } => writeln!(out, "{a} <-> {b} : SWAP").unwrap(),
            EventKind::Measure { qubit, cbit } => {
                writeln!(out, "{qubit} -> {cbit} : measure").unwrap();
                writeln!(out, "deactivate {qubit}").unwrap();
            }
            EventKind::Alt {
                cond,
                then_events,
                else_events,
            } => {
                writeln!(out, "alt {}", cond_text(cond)).unwrap();
                self::events(out, then_events);
                if !else_events.is_empty() {
                    out.push_str("else\n");
                    self::events(out, else_events);
                }
                out.push_str("end\n");
            }
            EventKind::Use { callee, actuals } => {
                let over: Vec<&str> = actuals.iter().map(|a| a.as_str()).collect();
                writeln!(out, "ref over {} : {callee}", over.join(", ")).unwrap();
            }
        }
    }
}
