//! Models shipped with the toolchain, embedded at compile time.

/// Bundled model names, in listing order.
pub const NAMES: [&str; 6] = [
    "bell",
    "ghz3",
    "grover2",
    "fulladder4",
    "teleport-cnot-dynamic",
    "shor15",
];

/// Source text of a bundled model.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "bell" => include_str!("../models/bell.quml"),
        "ghz3" => include_str!("../models/ghz3.quml"),
        "grover2" => include_str!("../models/grover2.quml"),
        "fulladder4" => include_str!("../models/fulladder4.quml"),
        "teleport-cnot-dynamic" => include_str!("../models/teleport-cnot-dynamic.quml"),
        "shor15" => include_str!("../models/shor15.quml"),
        _ => return None,
    })
}

/// File name used when a bundled model is exported.
pub fn file_name(name: &str) -> String {
    format!("{name}.quml")
}

/// Parses a bundled model. Panics only if the embedded text is broken.
pub fn load(name: &str) -> Option<crate::model::Model> {
    let text = source(name)?;
    Some(crate::parser::parse(text, file_name(name)).expect("bundled model parses"))
}
