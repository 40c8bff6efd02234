//! Exact statevector simulation with branch enumeration at measurements.
//!
//! Qubit 0 is the most significant bit of a basis-state index, so the label
//! of index `i` on `n` qubits reads `q0 q1 ... q(n-1)` left to right.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ir::{CircuitIR, Instr};
use crate::model::{Angle, GateKind};

/// Memory guard on the register size.
pub const MAX_QUBITS: usize = 24;

/// Branches less likely than this are dropped.
pub const PRUNE_BELOW: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("{got} qubits exceeds the simulator limit of {MAX_QUBITS}")]
    TooManyQubits { got: usize },
    #[error("condition reads cbit {0} before any measurement assigned it")]
    UnmeasuredCondBit(usize),
}

/// One classical outcome history and the state it leaves behind.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBranch {
    pub probability: f64,
    /// `None` for cbits no measurement has written on this branch.
    pub cbits: Vec<Option<bool>>,
    /// Normalized state, length `2^num_qubits`.
    pub amplitudes: Vec<Complex64>,
}

impl StateBranch {
    /// Cbit values as text, cbit 0 first, `x` for unset bits.
    pub fn cbit_string(&self) -> String {
        self.cbits
            .iter()
            .map(|b| match b {
                Some(true) => '1',
                Some(false) => '0',
                None => 'x',
            })
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Map from bit string to probability.
pub type OutcomeDistribution = BTreeMap<String, f64>;

/// Map from bit string to shot count.
pub type Counts = BTreeMap<String, u64>;

type Matrix = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2x2 matrix of a gate acting on one target.
pub fn gate_matrix(gate: GateKind, angle: Option<Angle>) -> Matrix {
    let theta = angle.map_or(0.0, |a| a.radians());
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let diag = |p: Complex64| [[one, zero], [zero, p]];
    let (ch, sh) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    match gate {
        GateKind::H => {
            let h = c(FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        GateKind::X => [[zero, one], [one, zero]],
        GateKind::Y => [[zero, c(0.0, -1.0)], [c(0.0, 1.0), zero]],
        GateKind::Z => diag(-one),
        GateKind::S => diag(c(0.0, 1.0)),
        GateKind::Sdg => diag(c(0.0, -1.0)),
        GateKind::T => diag(Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
        GateKind::Tdg => diag(Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
        GateKind::RX => [[c(ch, 0.0), c(0.0, -sh)], [c(0.0, -sh), c(ch, 0.0)]],
        GateKind::RY => [[c(ch, 0.0), c(-sh, 0.0)], [c(sh, 0.0), c(ch, 0.0)]],
        GateKind::RZ => [
            [Complex64::from_polar(1.0, -theta / 2.0), zero],
            [zero, Complex64::from_polar(1.0, theta / 2.0)],
        ],
        GateKind::P => diag(Complex64::from_polar(1.0, theta)),
    }
}

struct Sim {
    n: usize,
}

impl Sim {
    fn mask(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn apply(&self, amps: &mut [Complex64], ins: &Instr) {
        match ins {
            Instr::Unitary {
                gate,
                angle,
                qubits,
                num_controls,
            } => {
                let u = gate_matrix(*gate, *angle);
                let (controls, targets) = qubits.split_at(*num_controls);
                let cmask = controls.iter().fold(0, |m, &q| m | self.mask(q));
                for &t in targets {
                    let tmask = self.mask(t);
                    for i in 0..amps.len() {
                        if i & tmask != 0 || i & cmask != cmask {
                            continue;
                        }
                        let j = i | tmask;
                        let (a, b) = (amps[i], amps[j]);
                        amps[i] = u[0][0] * a + u[0][1] * b;
                        amps[j] = u[1][0] * a + u[1][1] * b;
                    }
                }
            }
            Instr::Swap { a, b } => {
                let (ma, mb) = (self.mask(*a), self.mask(*b));
                for i in 0..amps.len() {
                    if i & ma != 0 && i & mb == 0 {
                        amps.swap(i, i ^ ma ^ mb);
                    }
                }
            }
            Instr::Measure { .. } | Instr::Cond { .. } => unreachable!("not a unitary"),
        }
    }

    /// Probability that qubit `q` reads 1.
    fn prob_one(&self, amps: &[Complex64], q: usize) -> f64 {
        let m = self.mask(q);
        amps.iter()
            .enumerate()
            .filter(|(i, _)| i & m != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects onto `outcome` for qubit `q` and renormalizes.
    fn collapse(&self, amps: &mut [Complex64], q: usize, outcome: bool, p: f64) {
        let m = self.mask(q);
        let scale = 1.0 / p.sqrt();
        for (i, a) in amps.iter_mut().enumerate() {
            if (i & m != 0) == outcome {
                *a *= scale;
            } else {
                *a = c(0.0, 0.0);
            }
        }
    }

    fn exec(&self, block: &[Instr], mut branches: Vec<StateBranch>) -> Result<Vec<StateBranch>, SimError> {
        for ins in block {
            match ins {
                Instr::Unitary { .. } | Instr::Swap { .. } => {
                    for b in &mut branches {
                        self.apply(&mut b.amplitudes, ins);
                    }
                }
                Instr::Measure { qubit, cbit } => {
                    let mut next = Vec::with_capacity(branches.len() * 2);
                    for b in branches {
                        let p1 = self.prob_one(&b.amplitudes, *qubit).clamp(0.0, 1.0);
                        for (outcome, p) in [(false, 1.0 - p1), (true, p1)] {
                            if b.probability * p < PRUNE_BELOW {
                                continue;
                            }
                            let mut child = b.clone();
                            self.collapse(&mut child.amplitudes, *qubit, outcome, p);
                            child.probability *= p;
                            child.cbits[*cbit] = Some(outcome);
                            next.push(child);
                        }
                    }
                    branches = next;
                }
                Instr::Cond {
                    cond,
                    body,
                    else_body,
                } => {
                    let mut yes = Vec::new();
                    let mut no = Vec::new();
                    for b in branches {
                        let hit =
                            cond.eval(&mut |&i: &usize| b.cbits[i].ok_or(SimError::UnmeasuredCondBit(i)))?;
                        if hit {
                            yes.push(b);
                        } else {
                            no.push(b);
                        }
                    }
                    branches = self.exec(body, yes)?;
                    branches.extend(self.exec(else_body, no)?);
                }
            }
        }
        Ok(branches)
    }
}

fn initial(ir: &CircuitIR) -> Result<(Sim, StateBranch), SimError> {
    if ir.num_qubits > MAX_QUBITS {
        return Err(SimError::TooManyQubits { got: ir.num_qubits });
    }
    let sim = Sim { n: ir.num_qubits };
    let mut amplitudes = vec![c(0.0, 0.0); 1 << ir.num_qubits];
    let start = ir.init_ones.iter().fold(0, |i, &q| i | sim.mask(q));
    amplitudes[start] = c(1.0, 0.0);
    let branch = StateBranch {
        probability: 1.0,
        cbits: vec![None; ir.num_cbits],
        amplitudes,
    };
    Ok((sim, branch))
}

/// Runs `ir` exactly, forking at every measurement. Leaf branches are
/// ordered by their cbit strings.
pub fn run_exact(ir: &CircuitIR) -> Result<Vec<StateBranch>, SimError> {
    let (sim, start) = initial(ir)?;
    let mut leaves = sim.exec(&ir.instructions, vec![start])?;
    leaves.sort_by_cached_key(|b| b.cbit_string());
    Ok(leaves)
}

/// Simulates `shots` independent runs, drawing each measurement outcome
/// from a ChaCha generator seeded with `seed`.
pub fn sample(ir: &CircuitIR, shots: u64, seed: u64) -> Result<Counts, SimError> {
    let (sim, start) = initial(ir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Counts::new();
    for _ in 0..shots {
        let mut b = start.clone();
        shot(&sim, &ir.instructions, &mut b, &mut rng)?;
        *counts.entry(b.cbit_string()).or_insert(0) += 1;
    }
    Ok(counts)
}

fn shot(sim: &Sim, block: &[Instr], b: &mut StateBranch, rng: &mut ChaCha8Rng) -> Result<(), SimError> {
    for ins in block {
        match ins {
            Instr::Unitary { .. } | Instr::Swap { .. } => sim.apply(&mut b.amplitudes, ins),
            Instr::Measure { qubit, cbit } => {
                let p1 = sim.prob_one(&b.amplitudes, *qubit).clamp(0.0, 1.0);
                let outcome = rng.random::<f64>() < p1;
                let p = if outcome { p1 } else { 1.0 - p1 };
                sim.collapse(&mut b.amplitudes, *qubit, outcome, p);
                b.probability *= p;
                b.cbits[*cbit] = Some(outcome);
            }
            Instr::Cond {
                cond,
                body,
                else_body,
            } => {
                let cbits = &b.cbits;
                let hit = cond.eval(&mut |&i: &usize| cbits[i].ok_or(SimError::UnmeasuredCondBit(i)))?;
                shot(sim, if hit { body } else { else_body }, b, rng)?;
            }
        }
    }
    Ok(())
}

/// Distribution of the final cbit strings.
pub fn cbit_distribution(branches: &[StateBranch]) -> OutcomeDistribution {
    let mut d = OutcomeDistribution::new();
    for b in branches {
        *d.entry(b.cbit_string()).or_insert(0.0) += b.probability;
    }
    d
}

/// Computational-basis distribution of `qubits` (in the order given),
/// aggregated over all branches.
pub fn marginal(branches: &[StateBranch], qubits: &[usize]) -> OutcomeDistribution {
    let mut d = OutcomeDistribution::new();
    for b in branches {
        let n = b.amplitudes.len().trailing_zeros() as usize;
        for (i, a) in b.amplitudes.iter().enumerate() {
            let p = a.norm_sqr() * b.probability;
            if p == 0.0 {
                continue;
            }
            let key: String = qubits
                .iter()
                .map(|&q| if i >> (n - 1 - q) & 1 == 1 { '1' } else { '0' })
                .collect();
            *d.entry(key).or_insert(0.0) += p;
        }
    }
    d.retain(|_, p| *p >= PRUNE_BELOW);
    d
}

/// Total variation distance between two distributions.
pub fn total_variation(a: &OutcomeDistribution, b: &OutcomeDistribution) -> f64 {
    let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
        / 2.0
}

/// One `bits probability` line per entry, 12 decimals, sorted by bits.
pub fn format_distribution(d: &OutcomeDistribution) -> String {
    let mut s = String::new();
    for (k, p) in d {
        writeln!(s, "{k} {p:.12}").unwrap();
    }
    s
}

/// One `bits count` line per entry, sorted by bits.
pub fn format_counts(counts: &Counts) -> String {
    let mut s = String::new();
    for (k, n) in counts {
        writeln!(s, "{k} {n}").unwrap();
    }
    s
}
