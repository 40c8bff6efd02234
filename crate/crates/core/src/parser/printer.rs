use std::collections::BTreeSet;
use std::fmt::Write;

use crate::model::*;

const INDENT: &str = "  ";

/// Canonical `.quml` text for `model`. Angles are printed in reduced form,
/// so `parse(pretty_print(m))` is structurally equal to `canonicalize(m)`.
pub fn pretty_print(model: &Model) -> String {
    let mut out = String::new();
    writeln!(out, "model {} {{", model.name).unwrap();
    let mut first = true;
    if !model.classes.is_empty() || !model.relations.is_empty() {
        print_classes(&mut out, model);
        first = false;
    }
    for seq in &model.sequences {
        if !first {
            out.push('\n');
        }
        first = false;
        print_seq(&mut out, seq);
    }
    out.push_str("}\n");
    out
}

fn stereo(set: &BTreeSet<Stereotype>) -> String {
    if set.is_empty() {
        return String::new();
    }
    let tags: Vec<&str> = set.iter().map(|s| s.tag()).collect();
    format!(" <<{}>>", tags.join(", "))
}

fn print_classes(out: &mut String, model: &Model) {
    out.push_str("  classes {\n");
    for c in &model.classes {
        writeln!(out, "    class {}{} {{", c.name, stereo(&c.stereotypes)).unwrap();
        for a in &c.attributes {
            writeln!(out, "      attr {} : {}", a.name, a.type_name).unwrap();
        }
        for op in &c.operations {
            let params: Vec<String> = op
                .params
                .iter()
                .map(|p| match &p.type_name {
                    Some(t) => format!("{} : {}", p.name, t),
                    None => p.name.to_string(),
                })
                .collect();
            write!(out, "      op {}({})", op.name, params.join(", ")).unwrap();
            if let Some(r) = &op.return_type {
                write!(out, " : {r}").unwrap();
            }
            out.push('\n');
        }
        if let Some(c) = &c.circuit_ref {
            writeln!(out, "      circuit {c}").unwrap();
        }
        out.push_str("    }\n");
    }
    for r in &model.relations {
        writeln!(out, "    {} {} {}", r.from, r.kind.arrow(), r.to).unwrap();
    }
    out.push_str("  }\n");
}

fn join(names: &[Ident]) -> String {
    names
        .iter()
        .map(|i| i.name.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

fn print_seq(out: &mut String, seq: &SeqDiagram) {
    write!(out, "  seq {}", seq.name).unwrap();
    if seq.is_parameterized() {
        write!(out, "({})", join(&seq.formal_qubits)).unwrap();
    }
    writeln!(out, "{} {{", stereo(&seq.stereotypes)).unwrap();
    if !seq.qubits.is_empty() {
        let decls: Vec<String> = seq
            .qubits
            .iter()
            .map(|q| match q.init {
                Some(k) => format!("{} = {}", q.name, k.text()),
                None => q.name.to_string(),
            })
            .collect();
        writeln!(out, "    qubit {}", decls.join(", ")).unwrap();
    }
    if !seq.cbits.is_empty() {
        writeln!(out, "    cbit {}", join(&seq.cbits)).unwrap();
    }
    print_events(out, &seq.events, 2);
    out.push_str("  }\n");
}

/// Angle in `.quml` syntax, reduced.
pub(crate) fn angle_text(angle: Angle) -> String {
    match angle.canonical() {
        Angle::PiMultiple { num, den } => {
            let mut s = match num {
                1 => "pi".to_string(),
                -1 => "-pi".to_string(),
                n => format!("{n}pi"),
            };
            if den != 1 {
                write!(s, "/{den}").unwrap();
            }
            s
        }
        // Debug formatting is the shortest representation that round-trips.
        Angle::Radians(r) => format!("{r:?}"),
    }
}

fn gate_head(gate: GateKind, angle: Option<Angle>) -> String {
    match angle {
        Some(a) => format!("{gate}({})", angle_text(a)),
        None => gate.to_string(),
    }
}

fn print_events(out: &mut String, events: &[Event], depth: usize) {
    let pad = INDENT.repeat(depth);
    for e in events {
        match &e.kind {
            EventKind::SingleGate { gate, angle, qubit } => {
                writeln!(out, "{pad}gate {} on {qubit}", gate_head(*gate, *angle)).unwrap();
            }
            EventKind::MultiGate {
                gate,
                angle,
                controls,
                targets,
                kickback,
            } => {
                write!(
                    out,
                    "{pad}gate {} control {} target {}",
                    gate_head(*gate, *angle),
                    join(controls),
                    join(targets)
                )
                .unwrap();
                if *kickback {
                    out.push_str(" kickback");
                }
                out.push('\n');
            }
            EventKind::Swap { a, b } => writeln!(out, "{pad}swap {a}, {b}").unwrap(),
            EventKind::Measure { qubit, cbit } => writeln!(out, "{pad}measure {qubit} -> {cbit}").unwrap(),
            EventKind::Alt {
                cond,
                then_events,
                else_events,
            } => {
                writeln!(out, "{pad}alt {} {{", cond_text(cond)).unwrap();
                print_events(out, then_events, depth + 1);
                if else_events.is_empty() {
                    writeln!(out, "{pad}}}").unwrap();
                } else {
                    writeln!(out, "{pad}}} else {{").unwrap();
                    print_events(out, else_events, depth + 1);
                    writeln!(out, "{pad}}}").unwrap();
                }
            }
            EventKind::Use { callee, actuals } => {
                writeln!(out, "{pad}use {callee} on ({})", join(actuals)).unwrap();
            }
        }
    }
}

/// Condition text with the minimal parentheses needed to reparse the same tree.
pub fn cond_text<B: std::fmt::Display>(cond: &CondExpr<B>) -> String {
    fn go<B: std::fmt::Display>(c: &CondExpr<B>, out: &mut String) {
        match c {
            CondExpr::Eq { cbit, value } => {
                write!(out, "{cbit} == {}", u8::from(*value)).unwrap();
            }
            CondExpr::Xor(a, b) => {
                go(a, out);
                out.push_str(" ^ ");
                wrap(b, out, matches!(**b, CondExpr::Xor(..)));
            }
            CondExpr::And(a, b) => {
                wrap(a, out, matches!(**a, CondExpr::Xor(..)));
                out.push_str(" && ");
                wrap(b, out, !matches!(**b, CondExpr::Eq { .. }));
            }
        }
    }
    fn wrap<B: std::fmt::Display>(c: &CondExpr<B>, out: &mut String, parens: bool) {
        if parens {
            out.push('(');
            go(c, out);
            out.push(')');
        } else {
            go(c, out);
        }
    }
    let mut s = String::new();
    go(cond, &mut s);
    s
}
