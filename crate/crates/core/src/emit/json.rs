use thiserror::Error;

use crate::ir::{CircuitIR, IrError};

#[derive(Debug, Error)]
pub enum IrJsonError {
    #[error("malformed IR JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid IR: {0}")]
    Invalid(#[from] IrError),
}

/// Canonical JSON for `ir`: compact, keys sorted, newline-terminated.
/// Floats use the shortest text that parses back to the same value.
pub fn emit_ir_json(ir: &CircuitIR) -> String {
    // Going through `Value` sorts object keys.
    let value = serde_json::to_value(ir).expect("IR serializes");
    let mut s = value.to_string();
    s.push('\n');
    s
}

/// Parses IR JSON and checks the IR invariants.
pub fn load_ir_json(text: &str) -> Result<CircuitIR, IrJsonError> {
    let ir: CircuitIR = serde_json::from_str(text)?;
    ir.check()?;
    Ok(ir)
}
