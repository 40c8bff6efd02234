//! Text outputs: OpenQASM 3, canonical IR JSON and PlantUML sequence diagrams.

mod diagram;
mod json;
mod qasm;

pub use diagram::{emit_diagram_text, DiagramError};
pub use json::{emit_ir_json, load_ir_json, IrJsonError};
pub use qasm::emit_qasm3;
