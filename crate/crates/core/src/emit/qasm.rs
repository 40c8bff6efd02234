use std::fmt::Write;

use crate::ir::{CircuitIR, Instr};
use crate::model::{Angle, CondExpr, GateKind};

/// OpenQASM 3 source for `ir`, using `stdgates.inc` names. Qubit register
/// `q`, bit register `c`, both indexed as in the IR.
pub fn emit_qasm3(ir: &CircuitIR) -> String {
    let mut out = String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n");
    if ir.num_qubits > 0 {
        writeln!(out, "qubit[{}] q;", ir.num_qubits).unwrap();
    }
    if ir.num_cbits > 0 {
        writeln!(out, "bit[{}] c;", ir.num_cbits).unwrap();
    }
    for q in &ir.init_ones {
        writeln!(out, "x q[{q}];").unwrap();
    }
    block(&mut out, &ir.instructions, 0);
    out
}

fn block(out: &mut String, instrs: &[Instr], depth: usize) {
    let pad = "  ".repeat(depth);
    for ins in instrs {
        match ins {
            Instr::Cond {
                cond,
                body,
                else_body,
            } => {
                let test = cond_text(cond);
                // One-liner for the common single-correction form.
                if else_body.is_empty() && body.len() == 1 && !matches!(body[0], Instr::Cond { .. }) {
                    let mut inner = String::new();
                    simple(&mut inner, &body[0], "");
                    if !inner.trim_end().contains('\n') {
                        writeln!(out, "{pad}if ({test}) {{ {} }}", inner.trim_end()).unwrap();
                        continue;
                    }
                }
                writeln!(out, "{pad}if ({test}) {{").unwrap();
                block(out, body, depth + 1);
                if else_body.is_empty() {
                    writeln!(out, "{pad}}}").unwrap();
                } else {
                    writeln!(out, "{pad}}} else {{").unwrap();
                    block(out, else_body, depth + 1);
                    writeln!(out, "{pad}}}").unwrap();
                }
            }
            other => simple(out, other, &pad),
        }
    }
}

fn simple(out: &mut String, ins: &Instr, pad: &str) {
    match ins {
        Instr::Unitary {
            gate,
            angle,
            qubits,
            num_controls,
        } => {
            let (controls, targets) = qubits.split_at(*num_controls);
            let head = gate_head(*gate, *angle, controls.len());
            for t in targets {
                let args: Vec<String> = controls
                    .iter()
                    .chain(std::iter::once(t))
                    .map(|q| format!("q[{q}]"))
                    .collect();
                writeln!(out, "{pad}{head} {};", args.join(", ")).unwrap();
            }
        }
        Instr::Measure { qubit, cbit } => {
            writeln!(out, "{pad}c[{cbit}] = measure q[{qubit}];").unwrap();
        }
        Instr::Swap { a, b } => writeln!(out, "{pad}swap q[{a}], q[{b}];").unwrap(),
        Instr::Cond { .. } => unreachable!("handled by block"),
    }
}

fn gate_head(gate: GateKind, angle: Option<Angle>, controls: usize) -> String {
    let base = match gate {
        GateKind::H => "h",
        GateKind::X => "x",
        GateKind::Y => "y",
        GateKind::Z => "z",
        GateKind::S => "s",
        GateKind::Sdg => "sdg",
        GateKind::T => "t",
        GateKind::Tdg => "tdg",
        GateKind::RX => "rx",
        GateKind::RY => "ry",
        GateKind::RZ => "rz",
        GateKind::P => "p",
    };
    let arg = angle.map(|a| format!("({})", angle_text(a))).unwrap_or_default();
    let name = match (gate, controls) {
        (_, 0) => base.to_string(),
        (GateKind::X, 1) => "cx".into(),
        (GateKind::X, 2) => "ccx".into(),
        (GateKind::Z, 1) => "cz".into(),
        (GateKind::P, 1) => "cp".into(),
        (_, k) => format!("ctrl({k}) @ {base}"),
    };
    format!("{name}{arg}")
}

/// Angle as a QASM expression: symbolic for multiples of pi, otherwise
/// 17 significant digits.
pub(crate) fn angle_text(angle: Angle) -> String {
    match angle.canonical() {
        Angle::PiMultiple { num: 0, .. } => "0".into(),
        Angle::PiMultiple { num, den } => {
            let mut s = match num {
                1 => "pi".to_string(),
                -1 => "-pi".to_string(),
                n => format!("{n}*pi"),
            };
            if den != 1 {
                write!(s, "/{den}").unwrap();
            }
            s
        }
        Angle::Radians(r) => format!("{r:.16e}"),
    }
}

fn cond_text(cond: &CondExpr<usize>) -> String {
    match cond {
        CondExpr::Eq { cbit, value } => format!("c[{cbit}] == {}", u8::from(*value)),
        CondExpr::Xor(a, b) => format!("({}) != ({})", cond_text(a), cond_text(b)),
        CondExpr::And(a, b) => format!("({}) && ({})", cond_text(a), cond_text(b)),
    }
}
