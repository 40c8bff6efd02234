//! QuanUML toolchain: a textual format for quantum class and sequence
//! diagrams, with validation, lowering to a flat circuit IR, OpenQASM 3 and
//! PlantUML emission, exact simulation, Shor order finding for N = 15, and
//! diagram element metrics.

pub mod emit;
pub mod examples;
pub mod ir;
pub mod lower;
pub mod metrics;
pub mod model;
pub mod parser;
pub mod shor;
pub mod sim;
pub mod validate;

pub use ir::{CircuitIR, Instr};
pub use model::Model;
