//! Proptest strategies for random well-formed models and circuits.
#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use quanuml::ir::{CircuitIR, Instr};
use quanuml::model::*;

pub fn angle() -> impl Strategy<Value = Angle> {
    prop_oneof![
        (-24i64..24, 1u64..17).prop_map(|(num, den)| Angle::PiMultiple { num, den }),
        (-100.0f64..100.0).prop_map(Angle::Radians),
        prop::sample::select(vec![1e-7, -2.5e12, 0.0, 0.1, -3.0]).prop_map(Angle::Radians),
    ]
}

fn gate_with_angle(gates: Vec<GateKind>) -> impl Strategy<Value = (GateKind, Option<Angle>)> {
    (prop::sample::select(gates), angle()).prop_map(|(g, a)| (g, g.is_parametric().then_some(a)))
}

/// Event shape with abstract operand picks; resolved against a scope later.
#[derive(Debug, Clone)]
pub enum Shape {
    Single(GateKind, Option<Angle>, usize),
    Multi(GateKind, Option<Angle>, Vec<usize>, usize, bool),
    Swap(usize, usize),
    Measure(usize, usize),
    Alt(CondShape, Vec<Shape>, Vec<Shape>),
    Use(usize, Vec<usize>),
}

#[derive(Debug, Clone)]
pub enum CondShape {
    Eq(usize, bool),
    Xor(Box<CondShape>, Box<CondShape>),
    And(Box<CondShape>, Box<CondShape>),
}

fn cond_shape() -> impl Strategy<Value = CondShape> {
    let leaf = (0usize..8, any::<bool>()).prop_map(|(c, v)| CondShape::Eq(c, v));
    leaf.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| CondShape::Xor(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| CondShape::And(Box::new(a), Box::new(b))),
        ]
    })
}

fn shape() -> impl Strategy<Value = Shape> {
    let leaf = prop_oneof![
        (gate_with_angle(GateKind::ALL.to_vec()), 0usize..8).prop_map(|((g, a), q)| Shape::Single(g, a, q)),
        (
            gate_with_angle(vec![GateKind::X, GateKind::Z, GateKind::P]),
            prop::collection::vec(0usize..8, 2..5),
            1usize..3,
            any::<bool>()
        )
            .prop_map(|((g, a), qs, k, kb)| Shape::Multi(g, a, qs, k, kb)),
        (0usize..8, 0usize..8).prop_map(|(a, b)| Shape::Swap(a, b)),
        (0usize..8, 0usize..8).prop_map(|(q, c)| Shape::Measure(q, c)),
        (0usize..8, prop::collection::vec(0usize..8, 1..4)).prop_map(|(s, a)| Shape::Use(s, a)),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        (
            cond_shape(),
            prop::collection::vec(inner.clone(), 0..4),
            prop::collection::vec(inner, 0..3),
        )
            .prop_map(|(c, t, e)| Shape::Alt(c, t, e))
    })
}

#[derive(Debug, Clone)]
pub struct DiagramShape {
    formals: usize,
    qubits: Vec<Option<Ket>>,
    cbits: usize,
    stereo: BTreeSet<Stereotype>,
    events: Vec<Shape>,
}

fn stereo_set() -> impl Strategy<Value = BTreeSet<Stereotype>> {
    prop::collection::btree_set(prop::sample::select(Stereotype::ALL.to_vec()), 0..3)
}

fn diagram_shape(sub: bool) -> impl Strategy<Value = DiagramShape> {
    let formals = if sub { 1usize..4 } else { 0usize..1 };
    let qubits = if sub { 0usize..1 } else { 0usize..5 };
    (
        formals,
        prop::collection::vec(
            prop_oneof![Just(None), Just(Some(Ket::Zero)), Just(Some(Ket::One))],
            qubits,
        ),
        0usize..4,
        stereo_set(),
        prop::collection::vec(shape(), 0..8),
    )
        .prop_map(|(formals, qubits, cbits, stereo, events)| DiagramShape {
            formals,
            qubits,
            cbits,
            stereo,
            events,
        })
}

#[derive(Debug, Clone)]
pub struct ClassShape {
    stereo: BTreeSet<Stereotype>,
    attrs: Vec<usize>,
    ops: Vec<(Vec<Option<usize>>, Option<usize>)>,
    circuit: Option<usize>,
}

const TYPES: [&str; 4] = ["int", "bool", "Qubit", "Register"];

fn class_shape() -> impl Strategy<Value = ClassShape> {
    (
        stereo_set(),
        prop::collection::vec(0usize..4, 0..3),
        prop::collection::vec(
            (
                prop::collection::vec(prop::option::of(0usize..4), 0..3),
                prop::option::of(0usize..4),
            ),
            0..3,
        ),
        prop::option::of(0usize..8),
    )
        .prop_map(|(stereo, attrs, ops, circuit)| ClassShape {
            stereo,
            attrs,
            ops,
            circuit,
        })
}

fn id(s: impl Into<String>) -> Ident {
    Ident::bare(s)
}

struct Scope {
    qubits: Vec<String>,
    cbits: Vec<String>,
    /// Earlier sub-diagrams and their arities.
    subs: Vec<(String, usize)>,
}

fn cond(c: &CondShape, cbits: &[String]) -> CondExpr<Ident> {
    match c {
        CondShape::Eq(i, v) => CondExpr::eq(id(cbits[i % cbits.len()].clone()), *v),
        CondShape::Xor(a, b) => CondExpr::xor(cond(a, cbits), cond(b, cbits)),
        CondShape::And(a, b) => CondExpr::and(cond(a, cbits), cond(b, cbits)),
    }
}

fn events(shapes: &[Shape], scope: &Scope) -> Vec<Event> {
    let mut out = Vec::new();
    let nq = scope.qubits.len();
    let q = |i: usize| id(scope.qubits[i % nq].clone());
    for s in shapes {
        let kind = match s {
            _ if nq == 0 => match s {
                Shape::Alt(c, t, e) if !scope.cbits.is_empty() => EventKind::Alt {
                    cond: cond(c, &scope.cbits),
                    then_events: events(t, scope),
                    else_events: events(e, scope),
                },
                _ => continue,
            },
            Shape::Single(g, a, i) => EventKind::SingleGate {
                gate: *g,
                angle: *a,
                qubit: q(*i),
            },
            Shape::Multi(g, a, picks, k, kb) => {
                let mut seen = BTreeSet::new();
                let distinct: Vec<usize> = picks.iter().map(|p| p % nq).filter(|p| seen.insert(*p)).collect();
                if distinct.len() < 2 {
                    EventKind::SingleGate {
                        gate: *g,
                        angle: *a,
                        qubit: q(distinct[0]),
                    }
                } else {
                    let k = (*k).min(distinct.len() - 1);
                    EventKind::MultiGate {
                        gate: *g,
                        angle: *a,
                        controls: distinct[..k].iter().map(|&i| q(i)).collect(),
                        targets: distinct[k..].iter().map(|&i| q(i)).collect(),
                        kickback: *kb,
                    }
                }
            }
            Shape::Swap(a, b) => EventKind::Swap { a: q(*a), b: q(*b) },
            Shape::Measure(a, c) if !scope.cbits.is_empty() => EventKind::Measure {
                qubit: q(*a),
                cbit: id(scope.cbits[c % scope.cbits.len()].clone()),
            },
            Shape::Measure(..) => continue,
            Shape::Alt(c, t, e) if !scope.cbits.is_empty() => EventKind::Alt {
                cond: cond(c, &scope.cbits),
                then_events: events(t, scope),
                else_events: events(e, scope),
            },
            Shape::Alt(..) => continue,
            Shape::Use(s, picks) if !scope.subs.is_empty() => {
                let (name, arity) = &scope.subs[s % scope.subs.len()];
                let actuals = (0..*arity).map(|j| q(picks[j % picks.len()] + j)).collect();
                EventKind::Use {
                    callee: id(name.clone()),
                    actuals,
                }
            }
            Shape::Use(..) => continue,
        };
        out.push(Event {
            kind,
            span: SourceSpan::default(),
        });
    }
    out
}

/// A model whose names all resolve: unique lifelines, acyclic `use`,
/// measure destinations and condition leaves always cbits.
pub fn model() -> impl Strategy<Value = Model> {
    (
        prop::collection::vec(class_shape(), 0..3),
        prop::collection::vec((0usize..3, 0usize..3, 0usize..3), 0..3),
        prop::collection::vec(diagram_shape(true), 0..3),
        prop::collection::vec(diagram_shape(false), 1..3),
    )
        .prop_map(|(classes, relations, subs, tops)| build(classes, relations, subs, tops))
}

fn build(
    class_shapes: Vec<ClassShape>,
    relations: Vec<(usize, usize, usize)>,
    subs: Vec<DiagramShape>,
    tops: Vec<DiagramShape>,
) -> Model {
    let mut sequences = Vec::new();
    let mut known: Vec<(String, usize)> = Vec::new();
    for (i, d) in subs.iter().chain(&tops).enumerate() {
        let name = if d.formals > 0 {
            format!("Sub{i}")
        } else {
            format!("Main{i}")
        };
        let formal_names: Vec<String> = (0..d.formals).map(|j| format!("f{j}")).collect();
        let qubit_names: Vec<String> = (0..d.qubits.len()).map(|j| format!("q{j}")).collect();
        let cbit_names: Vec<String> = (0..d.cbits).map(|j| format!("c{j}")).collect();
        let scope = Scope {
            qubits: formal_names.iter().chain(&qubit_names).cloned().collect(),
            cbits: cbit_names.clone(),
            subs: known.clone(),
        };
        sequences.push(SeqDiagram {
            name: id(name.clone()),
            stereotypes: d.stereo.clone(),
            formal_qubits: formal_names.into_iter().map(id).collect(),
            qubits: qubit_names
                .into_iter()
                .zip(&d.qubits)
                .map(|(n, k)| QubitDecl {
                    name: id(n),
                    init: *k,
                })
                .collect(),
            cbits: cbit_names.into_iter().map(id).collect(),
            events: events(&d.events, &scope),
            span: SourceSpan::default(),
        });
        if d.formals > 0 {
            known.push((name, d.formals));
        }
    }
    let classes: Vec<ClassDecl> = class_shapes
        .iter()
        .enumerate()
        .map(|(i, c)| ClassDecl {
            name: id(format!("K{i}")),
            stereotypes: c.stereo.clone(),
            attributes: c
                .attrs
                .iter()
                .enumerate()
                .map(|(j, t)| Attribute {
                    name: id(format!("a{j}")),
                    type_name: id(TYPES[*t]),
                })
                .collect(),
            operations: c
                .ops
                .iter()
                .enumerate()
                .map(|(j, (params, ret))| Operation {
                    name: id(format!("op{j}")),
                    params: params
                        .iter()
                        .enumerate()
                        .map(|(k, t)| Param {
                            name: id(format!("p{k}")),
                            type_name: t.map(|t| id(TYPES[t])),
                        })
                        .collect(),
                    return_type: ret.map(|t| id(TYPES[t])),
                })
                .collect(),
            circuit_ref: c
                .circuit
                .map(|k| id(sequences[k % sequences.len()].name.name.clone())),
            span: SourceSpan::default(),
        })
        .collect();
    let relations = if classes.is_empty() {
        Vec::new()
    } else {
        relations
            .into_iter()
            .map(|(a, b, k)| Relation {
                kind: [
                    RelationKind::Association,
                    RelationKind::Generalization,
                    RelationKind::Composition,
                ][k],
                from: id(classes[a % classes.len()].name.name.clone()),
                to: id(classes[b % classes.len()].name.name.clone()),
                span: SourceSpan::default(),
            })
            .collect()
    };
    Model {
        name: id("Random"),
        classes,
        relations,
        sequences,
        span: SourceSpan::default(),
    }
}

fn instr(nq: usize, nc: usize) -> impl Strategy<Value = Instr> {
    let leaf = prop_oneof![
        (gate_with_angle(GateKind::ALL.to_vec()), 0..nq).prop_map(|((gate, angle), q)| {
            Instr::Unitary {
                gate,
                angle,
                qubits: vec![q],
                num_controls: 0,
            }
        }),
        (
            gate_with_angle(vec![GateKind::X, GateKind::Z, GateKind::P]),
            Just((0..nq).collect::<Vec<_>>()).prop_shuffle(),
            1usize..4,
            1usize..3
        )
            .prop_map(move |((gate, angle), perm, k, t)| {
                let k = k.min(nq - 1);
                let t = t.min(nq - k);
                Instr::Unitary {
                    gate,
                    angle,
                    qubits: perm[..k + t].to_vec(),
                    num_controls: k,
                }
            }),
        Just((0..nq).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|p| Instr::Swap { a: p[0], b: p[1] }),
        (0..nq, 0..nc).prop_map(|(qubit, cbit)| Instr::Measure { qubit, cbit }),
    ];
    leaf.prop_recursive(3, 16, 3, move |inner| {
        (
            index_cond(nc),
            prop::collection::vec(inner.clone(), 0..3),
            prop::collection::vec(inner, 0..3),
        )
            .prop_map(|(cond, body, else_body)| Instr::Cond {
                cond,
                body,
                else_body,
            })
    })
}

fn index_cond(nc: usize) -> impl Strategy<Value = CondExpr<usize>> {
    let leaf = (0..nc, any::<bool>()).prop_map(|(c, v)| CondExpr::eq(c, v));
    leaf.prop_recursive(2, 4, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| CondExpr::xor(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| CondExpr::and(a, b)),
        ]
    })
}

/// A random IR satisfying [`CircuitIR::check`].
pub fn circuit() -> impl Strategy<Value = CircuitIR> {
    (2usize..7, 1usize..5)
        .prop_flat_map(|(nq, nc)| {
            (
                Just(nq),
                Just(nc),
                prop::collection::vec(instr(nq, nc), 0..12),
                prop::collection::btree_set(0..nq, 0..3),
                "[A-Za-z][A-Za-z0-9_]{0,8}",
            )
        })
        .prop_map(|(nq, nc, instructions, init_ones, name)| CircuitIR {
            name,
            num_qubits: nq,
            num_cbits: nc,
            qubit_names: (0..nq).map(|i| format!("q{i}")).collect(),
            cbit_names: (0..nc).map(|i| format!("c{i}")).collect(),
            instructions,
            init_ones,
        })
}

/// Measurement-free circuits on up to `max_qubits` qubits.
pub fn unitary_circuit(max_qubits: usize) -> impl Strategy<Value = CircuitIR> {
    (2usize..=max_qubits)
        .prop_flat_map(|nq| {
            let gate = prop_oneof![
                (gate_with_angle(GateKind::ALL.to_vec()), 0..nq).prop_map(|((gate, angle), q)| {
                    Instr::Unitary {
                        gate,
                        angle,
                        qubits: vec![q],
                        num_controls: 0,
                    }
                }),
                (
                    gate_with_angle(vec![GateKind::X, GateKind::Z, GateKind::P]),
                    Just((0..nq).collect::<Vec<_>>()).prop_shuffle(),
                    1usize..3
                )
                    .prop_map(move |((gate, angle), perm, k)| {
                        let k = k.min(nq - 1);
                        Instr::Unitary {
                            gate,
                            angle,
                            qubits: perm[..=k].to_vec(),
                            num_controls: k,
                        }
                    }),
                Just((0..nq).collect::<Vec<_>>())
                    .prop_shuffle()
                    .prop_map(|p| Instr::Swap { a: p[0], b: p[1] }),
            ];
            (Just(nq), prop::collection::vec(gate, 0..40))
        })
        .prop_map(|(nq, instructions)| CircuitIR {
            name: "U".into(),
            num_qubits: nq,
            qubit_names: (0..nq).map(|i| format!("q{i}")).collect(),
            instructions,
            ..CircuitIR::default()
        })
}

/// Like [`circuit`], but every cbit is written by a measurement of a
/// superposed qubit before anything else runs, so feedforward always resolves.
pub fn simulable_circuit() -> impl Strategy<Value = CircuitIR> {
    circuit().prop_map(|mut ir| {
        let prefix = (0..ir.num_cbits).flat_map(|c| {
            let q = c % ir.num_qubits;
            [
                Instr::single(GateKind::H, q),
                Instr::Measure { qubit: q, cbit: c },
            ]
        });
        ir.instructions = prefix.chain(ir.instructions).collect();
        ir
    })
}
