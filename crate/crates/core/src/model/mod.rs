//! Model abstract syntax, name resolution and canonical form.

mod ast;
mod resolve;

pub use ast::*;
pub use resolve::*;

/// Returns a structurally equal model with every angle reduced to lowest terms.
///
/// Stereotype sets are ordered by construction. Idempotent.
pub fn canonicalize(model: &Model) -> Model {
    let mut m = model.clone();
    for seq in &mut m.sequences {
        canonicalize_events(&mut seq.events);
    }
    m
}

fn canonicalize_events(events: &mut [Event]) {
    for e in events {
        match &mut e.kind {
            EventKind::SingleGate { angle, .. } | EventKind::MultiGate { angle, .. } => {
                if let Some(a) = angle {
                    *a = a.canonical();
                }
            }
            EventKind::Alt {
                then_events,
                else_events,
                ..
            } => {
                canonicalize_events(then_events);
                canonicalize_events(else_events);
            }
            EventKind::Swap { .. } | EventKind::Measure { .. } | EventKind::Use { .. } => {}
        }
    }
}
