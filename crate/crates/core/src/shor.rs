//! Shor factoring: the classical driver around order finding, with a
//! simulated period-finding circuit for N = 15 and a classical oracle.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::examples;
use crate::lower::lower;
use crate::sim::{run_exact, SimError};

/// Width of the counting register in the bundled circuits.
pub const COUNTING_BITS: u32 = 3;

/// Bases with a bundled period-finding diagram for N = 15.
pub const BUNDLED_BASES: [u64; 6] = [2, 4, 7, 8, 11, 13];

pub const DEFAULT_MAX_ATTEMPTS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Lower and simulate the bundled circuit, then post-process the
    /// measured phase with continued fractions.
    SimulatedCircuit,
    /// Direct modular exponentiation loop.
    ClassicalOracle,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShorError {
    #[error("no bundled period-finding circuit for x = {x}, N = {n}")]
    UnsupportedModulus { n: u64, x: u64 },
    #[error("N must be at least 2, got {0}")]
    ModulusTooSmall(u64),
    #[error("base {x} is not coprime to {n}")]
    NotCoprime { x: u64, n: u64 },
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorStatus {
    /// `p * q == N` with `1 < p <= q < N`.
    Factored(u64, u64),
    /// N is even; 2 is a factor.
    TrivialEven,
    /// N = a^b with the smallest b >= 2.
    PerfectPower(u64, u32),
    /// The chosen base already shares this factor with N.
    GcdShortcut(u64),
    Failed,
}

impl fmt::Display for FactorStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorStatus::Factored(p, q) => write!(f, "factored: {p} x {q}"),
            FactorStatus::TrivialEven => write!(f, "even: factor 2"),
            FactorStatus::PerfectPower(a, b) => write!(f, "perfect power: {a}^{b}"),
            FactorStatus::GcdShortcut(g) => write!(f, "gcd shortcut: factor {g}"),
            FactorStatus::Failed => write!(f, "failed: no nontrivial factor found"),
        }
    }
}

/// One order-finding attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Attempt {
    pub x: u64,
    /// Measured counting-register value; `None` when no circuit ran.
    pub phase_numerator: Option<u64>,
    /// Order candidate after post-processing; `None` when none was produced.
    pub candidate: Option<u64>,
    /// Whether `x^candidate = 1 (mod N)`.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorResult {
    pub status: FactorStatus,
    pub attempts: u32,
    pub transcript: Vec<Attempt>,
}

impl FactorResult {
    /// Transcript as an aligned text table.
    pub fn transcript_table(&self) -> String {
        let cell = |v: Option<u64>| v.map_or("-".to_string(), |v| v.to_string());
        let mut s = format!(
            "{:>7} {:>5} {:>9} {:>9} {:>8}\n",
            "attempt", "x", "phase", "order", "accepted"
        );
        for (i, a) in self.transcript.iter().enumerate() {
            let phase = match a.phase_numerator {
                Some(p) => format!("{p}/{}", 1u64 << COUNTING_BITS),
                None => "-".into(),
            };
            writeln!(
                s,
                "{:>7} {:>5} {:>9} {:>9} {:>8}",
                i + 1,
                a.x,
                phase,
                cell(a.candidate),
                if a.accepted { "yes" } else { "no" }
            )
            .unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorOptions {
    pub max_attempts: u32,
    /// Also try 2r, 3r and 4r when the candidate r fails.
    pub multiple_testing: bool,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions {
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            multiple_testing: true,
        }
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn mod_pow(base: u64, mut exp: u64, n: u64) -> u64 {
    let n = n as u128;
    let mut b = base as u128 % n;
    let mut acc = 1u128 % n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % n;
        }
        b = b * b % n;
        exp >>= 1;
    }
    acc as u64
}

/// Smallest `b >= 2` with `N = a^b`, if any.
pub fn perfect_power(n: u64) -> Option<(u64, u32)> {
    if n < 4 {
        return None;
    }
    let max_b = 63 - n.leading_zeros();
    for b in 2..=max_b {
        let guess = (n as f64).powf(1.0 / b as f64).round() as u64;
        for a in guess.saturating_sub(1).max(2)..=guess + 1 {
            if a.checked_pow(b) == Some(n) {
                return Some((a, b));
            }
        }
    }
    None
}

/// Largest convergent denominator below `n` of `numerator / denominator`.
/// Zero phase carries no information and yields 1.
pub fn continued_fraction_order(numerator: u64, denominator: u64, n: u64) -> u64 {
    if numerator == 0 {
        return 1;
    }
    let (mut num, mut den) = (numerator, denominator);
    // Convergent denominators q_k = a_k q_{k-1} + q_{k-2}.
    let (mut q_prev, mut q) = (1u64, 0u64);
    let mut best = 1;
    while den != 0 {
        let a = num / den;
        (num, den) = (den, num % den);
        let next = a.saturating_mul(q).saturating_add(q_prev);
        (q_prev, q) = (q, next);
        if q >= n {
            break;
        }
        best = q;
    }
    best
}

/// Multiplicative order of `x` modulo `n` by direct iteration.
pub fn classical_order(x: u64, n: u64) -> Result<u64, ShorError> {
    if n < 2 {
        return Err(ShorError::ModulusTooSmall(n));
    }
    if gcd(x, n) != 1 {
        return Err(ShorError::NotCoprime { x, n });
    }
    let mut r = 1;
    let mut v = x % n;
    while v != 1 {
        v = (v as u128 * x as u128 % n as u128) as u64;
        r += 1;
    }
    Ok(r)
}

/// Exact distribution of the counting-register value for base `x`, N = 15,
/// from branch enumeration of the bundled circuit.
pub fn phase_distribution(x: u64, n: u64) -> Result<BTreeMap<u64, f64>, ShorError> {
    if n != 15 || !BUNDLED_BASES.contains(&x) {
        return Err(ShorError::UnsupportedModulus { n, x });
    }
    let model = examples::load("shor15").expect("bundled");
    let ir = lower(&model, &format!("Shor{x}")).expect("bundled circuit lowers");
    let slots: Vec<usize> = (0..COUNTING_BITS)
        .map(|j| {
            ir.cbit_names
                .iter()
                .position(|c| *c == format!("m{j}"))
                .expect("counting cbit")
        })
        .collect();
    let mut dist = BTreeMap::new();
    for b in run_exact(&ir)? {
        let value = slots
            .iter()
            .enumerate()
            .map(|(j, &s)| u64::from(b.cbits[s] == Some(true)) << j)
            .sum::<u64>();
        *dist.entry(value).or_insert(0.0) += b.probability;
    }
    Ok(dist)
}

/// Post-processes one measured phase: continued fractions, then the
/// candidate and (optionally) its small multiples. Zero phase is rejected.
pub fn recover_order(x: u64, n: u64, numerator: u64, multiple_testing: bool) -> Attempt {
    let r = continued_fraction_order(numerator, 1 << COUNTING_BITS, n);
    let mut attempt = Attempt {
        x,
        phase_numerator: Some(numerator),
        candidate: Some(r),
        accepted: false,
    };
    if numerator == 0 {
        return attempt;
    }
    let multiples = if multiple_testing { 4 } else { 1 };
    for k in 1..=multiples {
        if mod_pow(x, k * r, n) == 1 {
            attempt.candidate = Some(k * r);
            attempt.accepted = true;
            break;
        }
    }
    attempt
}

/// Order of `x` mod `n`. The simulated path post-processes every outcome of
/// the exact phase distribution and keeps the smallest accepted candidate.
pub fn find_order(x: u64, n: u64, backend: Backend) -> Result<(u64, Vec<Attempt>), ShorError> {
    match backend {
        Backend::ClassicalOracle => {
            let r = classical_order(x, n)?;
            let a = Attempt {
                x,
                phase_numerator: None,
                candidate: Some(r),
                accepted: true,
            };
            Ok((r, vec![a]))
        }
        Backend::SimulatedCircuit => {
            if gcd(x, n) != 1 {
                return Err(ShorError::NotCoprime { x, n });
            }
            let dist = phase_distribution(x, n)?;
            let transcript: Vec<Attempt> = dist
                .iter()
                .filter(|(_, &p)| p > 0.0)
                .map(|(&k, _)| recover_order(x, n, k, true))
                .collect();
            let r = transcript
                .iter()
                .filter(|a| a.accepted)
                .filter_map(|a| a.candidate)
                .min()
                .ok_or(ShorError::UnsupportedModulus { n, x })?;
            Ok((r, transcript))
        }
    }
}

/// Nontrivial factor from an even order, if `x^(r/2)` is not -1 mod N.
fn split(x: u64, r: u64, n: u64) -> Option<(u64, u64)> {
    if !r.is_multiple_of(2) {
        return None;
    }
    let h = mod_pow(x, r / 2, n);
    if h == n - 1 {
        return None;
    }
    [gcd(h + n - 1, n), gcd(h + 1, n)]
        .into_iter()
        .find(|&f| 1 < f && f < n)
        .map(|f| (f.min(n / f), f.max(n / f)))
}

/// Probability, over the exact phase distribution, that one run of the
/// simulated circuit for base `x` yields a factor of `n`.
pub fn exact_success_probability(x: u64, n: u64, multiple_testing: bool) -> Result<f64, ShorError> {
    let dist = phase_distribution(x, n)?;
    Ok(dist
        .iter()
        .filter(|(&k, _)| {
            let a = recover_order(x, n, k, multiple_testing);
            a.accepted && split(x, a.candidate.unwrap(), n).is_some()
        })
        .map(|(_, p)| p)
        .sum())
}

/// Factors `n`. A forced `x` is used on every attempt; otherwise each
/// attempt draws a base uniformly from `[1, n-1]`.
pub fn factor(
    n: u64,
    x: Option<u64>,
    seed: u64,
    backend: Backend,
    opts: FactorOptions,
) -> Result<FactorResult, ShorError> {
    if n < 2 {
        return Err(ShorError::ModulusTooSmall(n));
    }
    let mut result = FactorResult {
        status: FactorStatus::Failed,
        attempts: 0,
        transcript: Vec::new(),
    };
    if n.is_multiple_of(2) && n > 2 {
        result.status = FactorStatus::TrivialEven;
        return Ok(result);
    }
    if let Some((a, b)) = perfect_power(n) {
        result.status = FactorStatus::PerfectPower(a, b);
        return Ok(result);
    }
    if n < 4 {
        return Ok(result);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dist_cache: BTreeMap<u64, BTreeMap<u64, f64>> = BTreeMap::new();
    while result.attempts < opts.max_attempts {
        result.attempts += 1;
        let base = x.unwrap_or_else(|| rng.random_range(1..n));
        let g = gcd(base, n);
        if g > 1 {
            result.status = FactorStatus::GcdShortcut(g);
            return Ok(result);
        }
        // x = +-1 has order 1 or 2 and never splits N.
        if base % n == 1 || base % n == n - 1 {
            result.transcript.push(Attempt {
                x: base,
                phase_numerator: None,
                candidate: None,
                accepted: false,
            });
            continue;
        }
        let attempt = match backend {
            Backend::ClassicalOracle => find_order(base, n, backend)?.1[0],
            Backend::SimulatedCircuit => {
                if let Entry::Vacant(slot) = dist_cache.entry(base) {
                    slot.insert(phase_distribution(base, n)?);
                }
                let dist = &dist_cache[&base];
                let k = draw(dist, rng.random::<f64>());
                recover_order(base, n, k, opts.multiple_testing)
            }
        };
        result.transcript.push(attempt);
        if !attempt.accepted {
            continue;
        }
        if let Some((p, q)) = split(base, attempt.candidate.unwrap(), n) {
            debug_assert_eq!(p * q, n);
            result.status = FactorStatus::Factored(p, q);
            return Ok(result);
        }
    }
    Ok(result)
}

fn draw(dist: &BTreeMap<u64, f64>, u: f64) -> u64 {
    let mut acc = 0.0;
    let mut last = 0;
    for (&k, &p) in dist {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}
