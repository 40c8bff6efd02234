//! `quanuml` command-line front end.
//!
//! Exit codes: 0 success, 1 diagnostics or runtime errors, 2 usage errors.
//! Payload goes to stdout, diagnostics to stderr.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use quanuml::emit::{emit_diagram_text, emit_ir_json, emit_qasm3};
use quanuml::lower::lower;
use quanuml::metrics::{compare, ElementCount};
use quanuml::parser::{parse_bytes, pretty_print};
use quanuml::shor::{factor, Backend, FactorOptions, FactorStatus};
use quanuml::sim::{cbit_distribution, format_counts, format_distribution, run_exact, sample};
use quanuml::validate::{check, diagnostics_json, has_errors};
use quanuml::{examples, Model};

const EXAMPLES_PREFIX: &str = "examples:";

#[derive(Parser)]
#[command(
    name = "quanuml",
    version,
    about = "Quantum UML models: check, render, compile, simulate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model.
    Check {
        file: String,
        /// Print diagnostics to stdout as a JSON array.
        #[arg(long)]
        json: bool,
    },
    /// Pretty-print a model in canonical form.
    Fmt { file: String },
    /// Print a sequence diagram as PlantUML text.
    Render {
        file: String,
        #[arg(long)]
        seq: Option<String>,
    },
    /// Lower a sequence diagram and emit it.
    Compile {
        file: String,
        #[arg(long)]
        seq: Option<String>,
        #[arg(long, value_enum)]
        target: Target,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Simulate a sequence diagram.
    Sim {
        file: String,
        #[arg(long)]
        seq: Option<String>,
        /// Enumerate all measurement branches (the default).
        #[arg(long, conflicts_with = "shots")]
        exact: bool,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0, requires = "shots")]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Element counts against the UML-profile baseline.
    Metrics {
        file: String,
        #[arg(long)]
        seq: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Factor N with period finding.
    Shor {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        x: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = BackendArg::Sim)]
        backend: BackendArg,
    },
    /// Bundled model library.
    Examples {
        #[command(subcommand)]
        action: Option<ExamplesAction>,
    },
}

#[derive(Subcommand)]
enum ExamplesAction {
    List,
    Show { name: String },
    Export { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Qasm3,
    IrJson,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Sim,
    Oracle,
}

/// Why a command stopped early. Messages are already on stderr.
enum Failure {
    Error,
    Usage,
}

type Outcome = Result<String, Failure>;

fn fail(msg: impl std::fmt::Display) -> Failure {
    eprintln!("quanuml: error: {msg}");
    Failure::Error
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    eprintln!("quanuml: usage error: {msg}");
    Failure::Usage
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { file, json } => cmd_check(&file, json),
        Command::Fmt { file } => load(&file).map(|m| pretty_print(&m)),
        Command::Render { file, seq } => cmd_render(&file, seq.as_deref()),
        Command::Compile {
            file,
            seq,
            target,
            output,
        } => cmd_compile(&file, seq.as_deref(), target, output.as_deref()),
        Command::Sim {
            file,
            seq,
            exact: _,
            shots,
            seed,
            json,
        } => cmd_sim(&file, seq.as_deref(), shots, seed, json),
        Command::Metrics { file, seq, json } => cmd_metrics(&file, seq.as_deref(), json),
        Command::Shor { n, x, seed, backend } => cmd_shor(n, x, seed, backend),
        Command::Examples { action } => cmd_examples(action.unwrap_or(ExamplesAction::List)),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Error) => ExitCode::from(1),
        Err(Failure::Usage) => ExitCode::from(2),
    }
}

/// Reads and parses `file`, or a bundled model when it starts with `examples:`.
fn load(file: &str) -> Result<Model, Failure> {
    let (bytes, label) = match file.strip_prefix(EXAMPLES_PREFIX) {
        Some(name) => match examples::source(name) {
            Some(src) => (src.as_bytes().to_vec(), examples::file_name(name)),
            None => {
                return Err(usage(format!(
                    "no bundled model `{name}` (try: {})",
                    examples::NAMES.join(", ")
                )))
            }
        },
        None => match fs::read(file) {
            Ok(b) => (b, file.to_string()),
            Err(e) => return Err(fail(format!("cannot read `{file}`: {e}"))),
        },
    };
    parse_bytes(&bytes, &label).map_err(|e| {
        let s = &e.span;
        eprintln!("{}:{}:{}: error: {e}", s.file, s.start_line, s.start_col);
        Failure::Error
    })
}

/// Loads, resolves and validates. Warnings are reported but do not stop.
fn load_valid(file: &str) -> Result<Model, Failure> {
    let model = load(file)?;
    report(&model)?;
    Ok(model)
}

fn report(model: &Model) -> Result<(), Failure> {
    let diags = match check(model) {
        Ok(d) => d,
        Err(e) => {
            let s = e.span();
            eprintln!("{}:{}:{}: error: {e}", s.file, s.start_line, s.start_col);
            return Err(Failure::Error);
        }
    };
    for d in &diags {
        eprintln!("{d}");
    }
    if has_errors(&diags) {
        Err(Failure::Error)
    } else {
        Ok(())
    }
}

/// Picks `--seq`, or the only top-level diagram when it is omitted.
fn pick_seq(model: &Model, seq: Option<&str>) -> Result<String, Failure> {
    if let Some(name) = seq {
        return match model.sequence(name) {
            Some(_) => Ok(name.to_string()),
            None => Err(usage(format!("no sequence diagram `{name}`"))),
        };
    }
    let tops: Vec<&str> = model
        .sequences
        .iter()
        .filter(|s| !s.is_parameterized())
        .map(|s| s.name.as_str())
        .collect();
    match tops.as_slice() {
        [one] => Ok(one.to_string()),
        [] => Err(usage("model has no top-level sequence diagram")),
        many => Err(usage(format!(
            "--seq is required; choose one of {}",
            many.join(", ")
        ))),
    }
}

fn cmd_check(file: &str, json: bool) -> Outcome {
    let model = load(file)?;
    if !json {
        report(&model)?;
        return Ok(String::new());
    }
    let diags = check(&model).map_err(|e| {
        let s = e.span();
        eprintln!("{}:{}:{}: error: {e}", s.file, s.start_line, s.start_col);
        Failure::Error
    })?;
    let out = diagnostics_json(&diags);
    if has_errors(&diags) {
        print!("{out}");
        return Err(Failure::Error);
    }
    Ok(out)
}

fn cmd_render(file: &str, seq: Option<&str>) -> Outcome {
    let model = load_valid(file)?;
    let name = pick_seq(&model, seq)?;
    emit_diagram_text(&model, &name).map_err(fail)
}

fn cmd_compile(file: &str, seq: Option<&str>, target: Target, output: Option<&Path>) -> Outcome {
    let model = load_valid(file)?;
    let name = pick_seq(&model, seq)?;
    let ir = lower(&model, &name).map_err(fail)?;
    let text = match target {
        Target::Qasm3 => emit_qasm3(&ir),
        Target::IrJson => emit_ir_json(&ir),
    };
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| fail(format!("cannot write `{}`: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn cmd_sim(file: &str, seq: Option<&str>, shots: Option<u64>, seed: u64, json: bool) -> Outcome {
    let model = load_valid(file)?;
    let name = pick_seq(&model, seq)?;
    let ir = lower(&model, &name).map_err(fail)?;
    match shots {
        Some(shots) => {
            let counts = sample(&ir, shots, seed).map_err(fail)?;
            Ok(if json {
                json_line(&counts)
            } else {
                format_counts(&counts)
            })
        }
        None => {
            let dist = cbit_distribution(&run_exact(&ir).map_err(fail)?);
            Ok(if json {
                json_line(&dist)
            } else {
                format_distribution(&dist)
            })
        }
    }
}

fn json_line(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string(v).expect("maps with string keys serialize");
    s.push('\n');
    s
}

type Field = fn(&ElementCount) -> usize;

fn cmd_metrics(file: &str, seq: Option<&str>, json: bool) -> Outcome {
    let model = load_valid(file)?;
    let name = pick_seq(&model, seq)?;
    let c = compare(&model, &name).map_err(fail)?;
    if json {
        return Ok(json_line(&c));
    }
    let rows: [(&str, Field); 5] = [
        ("lifelines", |e| e.lifelines),
        ("messages", |e| e.messages),
        ("fragments", |e| e.fragments),
        ("stereotype_labels", |e| e.stereotype_labels),
        ("total", |e| e.total),
    ];
    let mut out = format!("{:<18} {:>8} {:>8}\n", "element", "quanuml", "baseline");
    for (label, get) in rows {
        writeln!(out, "{label:<18} {:>8} {:>8}", get(&c.quanuml), get(&c.baseline)).unwrap();
    }
    writeln!(out, "{:<18} {:>8.3}", "ratio", c.ratio).unwrap();
    Ok(out)
}

fn cmd_shor(n: u64, x: Option<u64>, seed: u64, backend: BackendArg) -> Outcome {
    let backend = match backend {
        BackendArg::Sim => Backend::SimulatedCircuit,
        BackendArg::Oracle => Backend::ClassicalOracle,
    };
    if let Some(x) = x {
        if x == 0 || x >= n {
            return Err(usage(format!("--x must lie in [1, N-1], got {x}")));
        }
    }
    let result = factor(n, x, seed, backend, FactorOptions::default()).map_err(fail)?;
    let mut out = format!("N = {n}\n");
    if !result.transcript.is_empty() {
        out.push_str(&result.transcript_table());
    }
    match result.status {
        FactorStatus::Factored(p, q) => {
            let r = result
                .transcript
                .last()
                .and_then(|a| a.candidate)
                .expect("a factoring attempt records its order");
            writeln!(out, "order r = {r}").unwrap();
            writeln!(out, "factors: {p} × {q}").unwrap();
            Ok(out)
        }
        FactorStatus::Failed => {
            writeln!(out, "{}", result.status).unwrap();
            print!("{out}");
            Err(Failure::Error)
        }
        other => {
            writeln!(out, "{other}").unwrap();
            Ok(out)
        }
    }
}

fn cmd_examples(action: ExamplesAction) -> Outcome {
    match action {
        ExamplesAction::List => Ok(examples::NAMES.iter().map(|n| format!("{n}\n")).collect()),
        ExamplesAction::Show { name } => examples::source(&name)
            .map(str::to_string)
            .ok_or_else(|| usage(format!("no bundled model `{name}`"))),
        ExamplesAction::Export { dir } => {
            fs::create_dir_all(&dir).map_err(|e| fail(format!("cannot create `{}`: {e}", dir.display())))?;
            let mut out = String::new();
            for name in examples::NAMES {
                let path = dir.join(examples::file_name(name));
                fs::write(&path, examples::source(name).unwrap())
                    .map_err(|e| fail(format!("cannot write `{}`: {e}", path.display())))?;
                writeln!(out, "{}", path.display()).unwrap();
            }
            Ok(out)
        }
    }
}
