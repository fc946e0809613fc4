use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qlam::equational::{normalize_traced, to_amplitude_vector, EvalError, Strategy, SuperposedTerm};
use qlam::machine::{
    build_routing, extract_circuit, run, MachineError, RoutingGraph, Scheduler, TraceEvent,
};
use qlam::mll::{check_correspondence, translate_derivation, MllError, MllMachine, MllProof, MllStep};
use qlam::quantum::{format_register, parse_register, GateLibrary, Register};
use qlam::syntax::parse;
use qlam::typing::{typecheck_closed, Derivation};

#[derive(Parser)]
#[command(name = "qlam", version, about = "Linear quantum lambda calculus toolkit")]
struct Cli {
    /// JSON gate library merged into the built-in gates.
    #[arg(long, global = true, env = "QLAM_GATES")]
    gates: Option<PathBuf>,
    /// Digits after the decimal point when printing amplitudes.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type check a term and print its derivation.
    Check { file: PathBuf },
    /// Run the token machine.
    Run {
        file: PathBuf,
        /// Input register for the negative atoms of the type, e.g. "|01>".
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t = Schedule::Canonical)]
        schedule: Schedule,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Extract the circuit fired by a canonical run.
    Circuit {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Normalize with the equational theory.
    Eval {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long)]
        show_steps: bool,
    },
    /// Print the canonical MLL proof and check the machine against it.
    Mll {
        file: PathBuf,
        #[arg(long)]
        trace: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Schedule {
    Canonical,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

enum Failure {
    /// Bad input: syntax, typing, arity, files.
    User(String),
    /// A broken invariant inside the toolkit.
    Internal(String),
}

impl From<MachineError> for Failure {
    fn from(e: MachineError) -> Self {
        match e {
            MachineError::StepBudgetExceeded(_) | MachineError::Deadlock => Failure::Internal(e.to_string()),
            _ => Failure::User(e.to_string()),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::IllTypedRedex { .. } | EvalError::MixedSummands => Failure::Internal(e.to_string()),
            _ => Failure::User(e.to_string()),
        }
    }
}

impl From<MllError> for Failure {
    fn from(e: MllError) -> Self {
        Failure::Internal(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_gates(path: Option<&Path>) -> Result<GateLibrary, Failure> {
    let Some(path) = path else {
        return Ok(GateLibrary::builtins());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::User(format!("cannot read gate library {}: {e}", path.display())))?;
    GateLibrary::load(&text).map_err(|e| Failure::User(format!("{}: {e}", path.display())))
}

fn load_term(path: &Path, gates: &GateLibrary) -> Result<Derivation, Failure> {
    let src =
        fs::read_to_string(path).map_err(|e| Failure::User(format!("cannot read {}: {e}", path.display())))?;
    let term = parse(&src).map_err(|e| Failure::User(format!("{}: {e}", path.display())))?;
    typecheck_closed(&term, gates).map_err(|e| Failure::User(format!("{}: {e}", path.display())))
}

fn register_json(r: &Register, precision: usize) -> Value {
    json!({
        "qubits": r.qubit_count(),
        "amplitudes": r.amplitudes().iter().map(|a| json!([a.re, a.im])).collect::<Vec<_>>(),
        "text": format_register(r, precision),
    })
}

fn pretty(v: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("JSON values serialize"))
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let gates = load_gates(cli.gates.as_deref())?;
    match &cli.command {
        Command::Check { file } => {
            let d = load_term(file, &gates)?;
            if cli.json {
                Ok(pretty(&json!({ "type": d.ty.to_string(), "derivation": d.to_json() })))
            } else {
                Ok(d.render_tree())
            }
        }
        Command::Run { file, input, trace, schedule, seed } => {
            let d = load_term(file, &gates)?;
            let g = build_routing(&d);
            let input = match input {
                Some(text) => parse_register(text).map_err(|e| Failure::User(format!("--input: {e}")))?,
                None if g.input_count() == 0 => Register::empty(),
                None => {
                    return Err(Failure::User(format!(
                        "the term has type {} and needs --input with {} qubits",
                        d.ty,
                        g.input_count()
                    )))
                }
            };
            let mut scheduler = match schedule {
                Schedule::Canonical => Scheduler::canonical(),
                Schedule::Random => Scheduler::random(*seed),
            };
            let r = run(&d, &input, &gates, &mut scheduler)?;
            if cli.json {
                let mut v = json!({
                    "type": d.ty.to_string(),
                    "output": register_json(&r.output, cli.precision),
                    "sigma": r.sigma.images(),
                });
                if *trace {
                    v["trace"] = r.trace.iter().map(|e| event_json(&g, e)).collect();
                }
                return Ok(pretty(&v));
            }
            let mut out = String::new();
            if *trace {
                for e in &r.trace {
                    out.push_str(&event_text(&g, e));
                    out.push('\n');
                }
            }
            out.push_str(&format_register(&r.output, cli.precision));
            out.push('\n');
            Ok(out)
        }
        Command::Circuit { file, format } => {
            let d = load_term(file, &gates)?;
            let c = extract_circuit(&d)?;
            match (format, cli.json) {
                (Format::Json, _) | (_, true) => Ok(pretty(&c.to_json())),
                (Format::Text, false) => Ok(c.to_text()),
            }
        }
        Command::Eval { file, max_steps, show_steps } => {
            let d = load_term(file, &gates)?;
            let mut steps = Vec::new();
            let start = SuperposedTerm::from_derivation(d);
            let nf = normalize_traced(&start, &gates, *max_steps, Strategy::LeftmostInnermost, |s| {
                if *show_steps {
                    steps.push(s.to_string());
                }
            })?;
            let ground = to_amplitude_vector(&nf).ok();
            if cli.json {
                let mut v = json!({ "normal_form": nf.to_string(), "steps": steps });
                if let Some(r) = &ground {
                    v["output"] = register_json(r, cli.precision);
                }
                return Ok(pretty(&v));
            }
            let mut out = String::new();
            if *show_steps {
                out.push_str(&format!("   {start}\n"));
                for s in &steps {
                    out.push_str(&format!("=  {s}\n"));
                }
            }
            match ground {
                Some(r) => out.push_str(&format_register(&r, cli.precision)),
                None => out.push_str(&nf.to_string()),
            }
            out.push('\n');
            Ok(out)
        }
        Command::Mll { file, trace } => {
            let d = load_term(file, &gates)?;
            let p = translate_derivation(&d);
            let g = build_routing(&d);
            let input = Register::basis(&vec![false; g.input_count()]);
            let r = run(&d, &input, &gates, &mut Scheduler::canonical())?;
            let report = check_correspondence(&d, &g, &r.trace)?;
            let m = MllMachine::new(&p);
            let runs = if *trace { mll_runs(&m)? } else { Vec::new() };
            if cli.json {
                let mut v = json!({
                    "proof": proof_json(&p),
                    "atoms": report.atoms,
                    "cut_free": report.cut_free,
                    "machine_steps": report.machine_steps,
                    "mll_steps": report.mll_steps,
                });
                if *trace {
                    v["runs"] = json!(runs);
                }
                return Ok(pretty(&v));
            }
            let mut out = p.render();
            for run in runs {
                out.push_str(&format!("{}\n", run.join(" -> ")));
            }
            out.push_str(&format!(
                "correspondence: ok ({} machine steps, {} MLL steps, {} atom occurrences)\n",
                report.machine_steps, report.mll_steps, report.atoms
            ));
            Ok(out)
        }
    }
}

fn event_text(g: &RoutingGraph, e: &TraceEvent) -> String {
    match e {
        TraceEvent::Move { slot, from, to } => {
            format!("token {}: {} -> {}", slot + 1, g.occurrence(*from), g.occurrence(*to))
        }
        TraceEvent::Fire { gate, wires, .. } => {
            let ws: Vec<String> = wires.iter().map(usize::to_string).collect();
            format!("fire {gate} {}", ws.join(" "))
        }
    }
}

fn event_json(g: &RoutingGraph, e: &TraceEvent) -> Value {
    match e {
        TraceEvent::Move { slot, from, to } => json!({
            "slot": slot + 1,
            "from": g.occurrence(*from).to_string(),
            "to": g.occurrence(*to).to_string(),
        }),
        TraceEvent::Fire { gate, wires, .. } => json!({ "fire": gate, "wires": wires }),
    }
}

fn mll_runs(m: &MllMachine<'_>) -> Result<Vec<Vec<String>>, Failure> {
    let mut runs = Vec::new();
    for o in m.initial() {
        let mut run: Vec<String> = m.run_from(&o)?.iter().map(ToString::to_string).collect();
        let last = m.run_from(&o)?.pop().expect("runs are nonempty");
        if m.step(&last)? == MllStep::Exit {
            run.push("exit".into());
        }
        runs.push(run);
    }
    Ok(runs)
}

fn proof_json(p: &MllProof) -> Value {
    json!({
        "id": p.id,
        "rule": p.rule.name(),
        "sequent": p.sequent(),
        "children": p.children.iter().map(proof_json).collect::<Vec<_>>(),
    })
}
