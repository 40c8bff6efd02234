//! Flattens a top-level sequence diagram into [`CircuitIR`].

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ir::{CircuitIR, Instr, MAX_COND_DEPTH};
use crate::model::*;

/// Nested `use` levels allowed before lowering gives up.
pub const MAX_INLINE_DEPTH: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error("unknown sequence diagram `{0}`")]
    UnknownDiagram(String),
    #[error("`{0}` takes qubit parameters and cannot be lowered on its own")]
    NotTopLevel(String),
    #[error("`use` nesting exceeds {MAX_INLINE_DEPTH} levels at `{0}`")]
    InliningDepthExceeded(String),
    #[error("alt fragments nest deeper than {MAX_COND_DEPTH} in `{0}`")]
    CondTooDeep(String),
    #[error("unknown {kind} `{name}` in `{diagram}`")]
    Unresolved {
        kind: &'static str,
        name: String,
        diagram: String,
    },
    #[error("`use {callee}` passes {got} qubits, expected {expected}")]
    ArityMismatch {
        callee: String,
        expected: usize,
        got: usize,
    },
}

/// Lowers diagram `name` of `model`. The model should validate without errors.
pub fn lower(model: &Model, name: &str) -> Result<CircuitIR, LowerError> {
    let seq = model
        .sequence(name)
        .ok_or_else(|| LowerError::UnknownDiagram(name.to_string()))?;
    if seq.is_parameterized() {
        return Err(LowerError::NotTopLevel(name.to_string()));
    }
    let mut ir = CircuitIR {
        name: name.to_string(),
        ..CircuitIR::default()
    };
    let mut frame = Frame::default();
    for (i, q) in seq.qubits.iter().enumerate() {
        frame.qubits.insert(q.name.name.clone(), i);
        ir.qubit_names.push(q.name.name.clone());
        if q.init == Some(Ket::One) {
            ir.init_ones.insert(i);
        }
    }
    for (i, c) in seq.cbits.iter().enumerate() {
        frame.cbits.insert(c.name.clone(), i);
        ir.cbit_names.push(c.name.clone());
    }
    let mut lw = Lowerer {
        model,
        cbit_names: ir.cbit_names.clone(),
        sites: BTreeMap::new(),
    };
    ir.instructions = lw.block(seq, &seq.events, &frame, 0, 0)?;
    ir.num_qubits = ir.qubit_names.len();
    ir.cbit_names = lw.cbit_names;
    ir.num_cbits = ir.cbit_names.len();
    Ok(ir)
}

#[derive(Default)]
struct Frame {
    qubits: BTreeMap<String, usize>,
    cbits: BTreeMap<String, usize>,
}

struct Lowerer<'m> {
    model: &'m Model,
    cbit_names: Vec<String>,
    /// Inlining sites seen so far per callee.
    sites: BTreeMap<String, usize>,
}

impl Lowerer<'_> {
    fn block(
        &mut self,
        seq: &SeqDiagram,
        events: &[Event],
        frame: &Frame,
        use_depth: usize,
        cond_depth: usize,
    ) -> Result<Vec<Instr>, LowerError> {
        let qubit = |id: &Ident| {
            frame
                .qubits
                .get(&id.name)
                .copied()
                .ok_or_else(|| LowerError::Unresolved {
                    kind: "qubit",
                    name: id.name.clone(),
                    diagram: seq.name.name.clone(),
                })
        };
        let cbit = |id: &Ident| {
            frame
                .cbits
                .get(&id.name)
                .copied()
                .ok_or_else(|| LowerError::Unresolved {
                    kind: "cbit",
                    name: id.name.clone(),
                    diagram: seq.name.name.clone(),
                })
        };
        let mut out = Vec::new();
        for e in events {
            match &e.kind {
                EventKind::SingleGate {
                    gate,
                    angle,
                    qubit: q,
                } => out.push(Instr::Unitary {
                    gate: *gate,
                    angle: *angle,
                    qubits: vec![qubit(q)?],
                    num_controls: 0,
                }),
                EventKind::MultiGate {
                    gate,
                    angle,
                    controls,
                    targets,
                    ..
                } => {
                    let qubits = controls
                        .iter()
                        .chain(targets)
                        .map(qubit)
                        .collect::<Result<Vec<_>, _>>()?;
                    out.push(Instr::Unitary {
                        gate: *gate,
                        angle: *angle,
                        qubits,
                        num_controls: controls.len(),
                    });
                }
                EventKind::Swap { a, b } => out.push(Instr::Swap {
                    a: qubit(a)?,
                    b: qubit(b)?,
                }),
                EventKind::Measure { qubit: q, cbit: c } => out.push(Instr::Measure {
                    qubit: qubit(q)?,
                    cbit: cbit(c)?,
                }),
                EventKind::Alt {
                    cond,
                    then_events,
                    else_events,
                } => {
                    if cond_depth + 1 > MAX_COND_DEPTH {
                        return Err(LowerError::CondTooDeep(seq.name.name.clone()));
                    }
                    let cond = cond.try_map(&mut |id| cbit(id))?;
                    let body = self.block(seq, then_events, frame, use_depth, cond_depth + 1)?;
                    let else_body = self.block(seq, else_events, frame, use_depth, cond_depth + 1)?;
                    out.push(Instr::Cond {
                        cond,
                        body,
                        else_body,
                    });
                }
                EventKind::Use { callee, actuals } => {
                    if use_depth + 1 > MAX_INLINE_DEPTH {
                        return Err(LowerError::InliningDepthExceeded(callee.name.clone()));
                    }
                    let target = self
                        .model
                        .sequence(&callee.name)
                        .ok_or_else(|| LowerError::UnknownDiagram(callee.name.clone()))?;
                    if target.formal_qubits.len() != actuals.len() {
                        return Err(LowerError::ArityMismatch {
                            callee: callee.name.clone(),
                            expected: target.formal_qubits.len(),
                            got: actuals.len(),
                        });
                    }
                    let mut inner = Frame::default();
                    for (formal, actual) in target.formal_qubits.iter().zip(actuals) {
                        inner.qubits.insert(formal.name.clone(), qubit(actual)?);
                    }
                    let site = self.sites.entry(callee.name.clone()).or_insert(0);
                    let k = *site;
                    *site += 1;
                    for c in &target.cbits {
                        inner.cbits.insert(c.name.clone(), self.cbit_names.len());
                        self.cbit_names.push(format!("{}[{k}].{}", callee.name, c.name));
                    }
                    let body = self.block(target, &target.events, &inner, use_depth + 1, cond_depth)?;
                    out.extend(body);
                }
            }
        }
        Ok(out)
    }
}

/// Summary figures for a lowered circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IrStats {
    /// Longest dependency chain over shared qubits and cbits. A conditional
    /// block counts 1 plus the deeper of its two branches.
    pub depth: usize,
    /// Unitaries and swaps; inside a conditional only the larger branch counts.
    pub gate_count: usize,
    /// Measurements; inside a conditional only the larger branch counts.
    pub measure_count: usize,
    /// Conditional blocks, including nested ones in either branch.
    pub cond_count: usize,
    /// Depth of multi-qubit gates before the first measurement or conditional.
    pub entangling_depth_before_measure: usize,
    /// Top-level measurements issued before the first conditional block.
    pub measures_before_first_cond: usize,
}

pub fn ir_stats(ir: &CircuitIR) -> IrStats {
    let mut s = block_stats(&ir.instructions);
    s.entangling_depth_before_measure = entangling_prefix_depth(&ir.instructions);
    s.measures_before_first_cond = ir
        .instructions
        .iter()
        .take_while(|i| !matches!(i, Instr::Cond { .. }))
        .filter(|i| matches!(i, Instr::Measure { .. }))
        .count();
    s
}

/// A wire is either a qubit or a cbit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Wire {
    Q(usize),
    C(usize),
}

fn wires(ins: &Instr, out: &mut BTreeSet<Wire>) {
    match ins {
        Instr::Unitary { qubits, .. } => out.extend(qubits.iter().map(|&q| Wire::Q(q))),
        Instr::Measure { qubit, cbit } => {
            out.insert(Wire::Q(*qubit));
            out.insert(Wire::C(*cbit));
        }
        Instr::Swap { a, b } => {
            out.insert(Wire::Q(*a));
            out.insert(Wire::Q(*b));
        }
        Instr::Cond {
            cond,
            body,
            else_body,
        } => {
            out.extend(cond.leaves().into_iter().map(|&c| Wire::C(c)));
            for i in body.iter().chain(else_body) {
                wires(i, out);
            }
        }
    }
}

fn block_stats(block: &[Instr]) -> IrStats {
    let mut level: BTreeMap<Wire, usize> = BTreeMap::new();
    let mut s = IrStats::default();
    for ins in block {
        let mut touched = BTreeSet::new();
        wires(ins, &mut touched);
        let start = touched
            .iter()
            .map(|w| level.get(w).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        let cost = match ins {
            Instr::Unitary { .. } | Instr::Swap { .. } => {
                s.gate_count += 1;
                1
            }
            Instr::Measure { .. } => {
                s.measure_count += 1;
                1
            }
            Instr::Cond { body, else_body, .. } => {
                let a = block_stats(body);
                let b = block_stats(else_body);
                s.gate_count += a.gate_count.max(b.gate_count);
                s.measure_count += a.measure_count.max(b.measure_count);
                s.cond_count += 1 + a.cond_count + b.cond_count;
                1 + a.depth.max(b.depth)
            }
        };
        for w in touched {
            level.insert(w, start + cost);
        }
    }
    s.depth = level.values().copied().max().unwrap_or(0);
    s
}

fn entangling_prefix_depth(block: &[Instr]) -> usize {
    let mut level: BTreeMap<usize, usize> = BTreeMap::new();
    for ins in block {
        let qs: Vec<usize> = match ins {
            Instr::Unitary { qubits, .. } if qubits.len() > 1 => qubits.clone(),
            Instr::Swap { a, b } => vec![*a, *b],
            Instr::Unitary { .. } => continue,
            Instr::Measure { .. } | Instr::Cond { .. } => break,
        };
        let next = 1 + qs
            .iter()
            .map(|q| level.get(q).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        for q in qs {
            level.insert(q, next);
        }
    }
    level.values().copied().max().unwrap_or(0)
}
