//! Flat circuit representation produced by lowering.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Angle, CondExpr, GateKind};

/// Conditional blocks may nest at most this deep.
pub const MAX_COND_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Instr {
    /// `gate` on every target, controlled on all controls. `qubits` lists
    /// the `num_controls` controls first, then the targets.
    Unitary {
        gate: GateKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angle: Option<Angle>,
        qubits: Vec<usize>,
        num_controls: usize,
    },
    Measure {
        qubit: usize,
        cbit: usize,
    },
    Swap {
        a: usize,
        b: usize,
    },
    Cond {
        cond: CondExpr<usize>,
        body: Vec<Instr>,
        else_body: Vec<Instr>,
    },
}

impl Instr {
    pub fn single(gate: GateKind, qubit: usize) -> Instr {
        Instr::Unitary {
            gate,
            angle: None,
            qubits: vec![qubit],
            num_controls: 0,
        }
    }

    pub fn controlled(gate: GateKind, controls: &[usize], target: usize) -> Instr {
        let mut qubits = controls.to_vec();
        qubits.push(target);
        Instr::Unitary {
            gate,
            angle: None,
            qubits,
            num_controls: controls.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitIR {
    pub name: String,
    #[serde(rename = "qubits")]
    pub num_qubits: usize,
    #[serde(rename = "cbits")]
    pub num_cbits: usize,
    pub qubit_names: Vec<String>,
    pub cbit_names: Vec<String>,
    pub instructions: Vec<Instr>,
    /// Qubits prepared in |1> instead of |0>.
    pub init_ones: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IrError {
    #[error("qubit index {0} out of range")]
    QubitOutOfRange(usize),
    #[error("cbit index {0} out of range")]
    CbitOutOfRange(usize),
    #[error("qubit {0} appears twice in one instruction")]
    DuplicateQubit(usize),
    #[error("instruction has {num_controls} controls but only {len} qubits")]
    BadControlCount { num_controls: usize, len: usize },
    #[error("conditional blocks nest deeper than {MAX_COND_DEPTH}")]
    CondTooDeep,
    #[error("register names do not match register sizes")]
    NameCountMismatch,
    #[error("gate {gate} {problem}")]
    BadGate { gate: GateKind, problem: &'static str },
}

impl CircuitIR {
    /// Checks the structural invariants: indices in range, duplicate-free
    /// qubit lists, and the conditional nesting limit.
    pub fn check(&self) -> Result<(), IrError> {
        if self.qubit_names.len() != self.num_qubits || self.cbit_names.len() != self.num_cbits {
            return Err(IrError::NameCountMismatch);
        }
        if let Some(&q) = self.init_ones.iter().find(|&&q| q >= self.num_qubits) {
            return Err(IrError::QubitOutOfRange(q));
        }
        self.check_block(&self.instructions, 0)
    }

    fn check_block(&self, block: &[Instr], depth: usize) -> Result<(), IrError> {
        let qubit = |q: usize| {
            if q < self.num_qubits {
                Ok(())
            } else {
                Err(IrError::QubitOutOfRange(q))
            }
        };
        let cbit = |c: usize| {
            if c < self.num_cbits {
                Ok(())
            } else {
                Err(IrError::CbitOutOfRange(c))
            }
        };
        for ins in block {
            match ins {
                Instr::Unitary {
                    gate,
                    angle,
                    qubits,
                    num_controls,
                } => {
                    if *num_controls >= qubits.len() {
                        return Err(IrError::BadControlCount {
                            num_controls: *num_controls,
                            len: qubits.len(),
                        });
                    }
                    if gate.is_parametric() != angle.is_some() {
                        return Err(IrError::BadGate {
                            gate: *gate,
                            problem: "has the wrong angle arity",
                        });
                    }
                    if *num_controls > 0 && !gate.allows_controls() {
                        return Err(IrError::BadGate {
                            gate: *gate,
                            problem: "cannot be controlled",
                        });
                    }
                    let mut seen = BTreeSet::new();
                    for &q in qubits {
                        qubit(q)?;
                        if !seen.insert(q) {
                            return Err(IrError::DuplicateQubit(q));
                        }
                    }
                }
                Instr::Measure { qubit: q, cbit: c } => {
                    qubit(*q)?;
                    cbit(*c)?;
                }
                Instr::Swap { a, b } => {
                    qubit(*a)?;
                    qubit(*b)?;
                    if a == b {
                        return Err(IrError::DuplicateQubit(*a));
                    }
                }
                Instr::Cond {
                    cond,
                    body,
                    else_body,
                } => {
                    if depth + 1 > MAX_COND_DEPTH {
                        return Err(IrError::CondTooDeep);
                    }
                    for &c in cond.leaves() {
                        cbit(c)?;
                    }
                    self.check_block(body, depth + 1)?;
                    self.check_block(else_body, depth + 1)?;
                }
            }
        }
        Ok(())
    }
}
