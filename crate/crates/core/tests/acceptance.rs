//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qlam::equational::evaluate;
use qlam::machine::{build_routing, eval_circuit, extract_circuit, run, RunResult, Scheduler, TraceEvent};
use qlam::mll::check_correspondence;
use qlam::quantum::{basis_index, index_bits, Gate, GateLibrary, Register};
use qlam::syntax::{generate_term_with, parse, GeneratorConfig, Term};
use qlam::typing::{typecheck, typecheck_closed, Derivation, Env, TypeError};

const AMPLITUDE_TOL: f64 = 1e-9;
const SOUNDNESS_TOL: f64 = 1e-6;
const LIFTING_TOL: f64 = 1e-12;
const GROUND_CORPUS: u64 = 1000;
const SCHEDULE_TERMS: u64 = 100;
const SCHEDULES: u64 = 100;
const EVAL_STEPS: usize = 100_000;

type Outcome = Result<String, String>;

struct Corpus {
    /// Closed terms of type `B ⊗ … ⊗ B`, at most 6 qubits, depth at most 8.
    ground: Vec<(Term, Derivation)>,
    /// Closed terms of any type, for runs on random input registers.
    functional: Vec<(Term, Derivation)>,
}

fn corpus(lib: &GateLibrary) -> Corpus {
    let make = |seed: u64, ground: bool| {
        let mut cfg = GeneratorConfig::new(seed, 8, 6);
        cfg.ground_only = ground;
        let t = generate_term_with(&cfg).expect("generator succeeds");
        let d = typecheck_closed(&t, lib).expect("generated terms are well typed");
        (t, d)
    };
    Corpus {
        ground: (0..GROUND_CORPUS).map(|s| make(s, true)).collect(),
        functional: (0..SCHEDULE_TERMS).map(|s| make(10_000 + s, false)).collect(),
    }
}

fn random_register(n: usize, rng: &mut ChaCha8Rng) -> Register {
    let raw: Vec<Complex64> =
        (0..1usize << n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Register::new(raw.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn canonical(d: &Derivation, input: &Register, lib: &GateLibrary) -> Result<RunResult, String> {
    run(d, input, lib, &mut Scheduler::canonical()).map_err(|e| e.to_string())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

type Matrix = Vec<Vec<Complex64>>;

fn mat_vec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = b[0].len();
    a.iter().map(|row| (0..n).map(|j| row.iter().enumerate().map(|(k, x)| x * b[k][j]).sum()).collect()).collect()
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![c(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn identity(dim: usize) -> Matrix {
    (0..dim).map(|i| (0..dim).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()).collect()
}

fn transpose(m: &Matrix) -> Matrix {
    (0..m[0].len()).map(|j| m.iter().map(|row| row[j]).collect()).collect()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn criterion_1(lib: &GateLibrary) -> Outcome {
    let start = Instant::now();
    let t = parse(r"(\<x,y>. CNOT ((H x) * y)) (|0> * |1>)").map_err(|e| e.to_string())?;
    let d = typecheck_closed(&t, lib).map_err(|e| e.to_string())?;
    let out = canonical(&d, &Register::empty(), lib)?.output;
    let elapsed = start.elapsed();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let expected = [c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)];
    let err = max_diff(out.amplitudes(), &expected);
    if out.qubit_count() != 2 || err > AMPLITUDE_TOL {
        return Err(format!("got {:?}, error {err:e}", out.amplitudes()));
    }
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("max error {err:e}, {elapsed:?}"))
}

fn criterion_2(lib: &GateLibrary) -> Outcome {
    let t = parse(r"\<x,y>. CNOT ((H x) * y)").map_err(|e| e.to_string())?;
    let d = typecheck_closed(&t, lib).map_err(|e| e.to_string())?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = vec![vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]];
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let cnot = vec![
        vec![one, zero, zero, zero],
        vec![zero, one, zero, zero],
        vec![zero, zero, zero, one],
        vec![zero, zero, one, zero],
    ];
    let oracle = mat_mul(&cnot, &kron(&hadamard, &identity(2)));
    let mut worst: f64 = 0.0;
    for q in 0..4 {
        let input = Register::basis(&index_bits(q, 2));
        let r = canonical(&d, &input, lib)?;
        let fires: Vec<(String, Vec<usize>)> = r
            .trace
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Fire { gate, wires, .. } => Some((gate.clone(), wires.clone())),
                TraceEvent::Move { .. } => None,
            })
            .collect();
        if fires != [("H".to_string(), vec![1]), ("CNOT".to_string(), vec![1, 2])] {
            return Err(format!("firing order {fires:?}"));
        }
        let column: Vec<Complex64> = oracle.iter().map(|row| row[q]).collect();
        worst = worst.max(max_diff(r.output.amplitudes(), &column));
    }
    if worst > AMPLITUDE_TOL {
        return Err(format!("max error {worst:e}"));
    }
    Ok(format!("H@[1] then CNOT@[1,2] on 4 basis inputs, max error {worst:e}"))
}

fn criterion_3(corpus: &Corpus, lib: &GateLibrary, elapsed: Duration) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (t, d) in &corpus.ground {
        let machine = canonical(d, &Register::empty(), lib).map_err(|e| format!("{t}: {e}"))?.output;
        let nf = evaluate(t, lib, EVAL_STEPS).map_err(|e| format!("{t}: {e}"))?;
        let err = machine.max_distance(&nf).ok_or_else(|| format!("{t}: width mismatch"))?;
        if err > SOUNDNESS_TOL {
            return Err(format!("{t}: error {err:e}"));
        }
        worst = worst.max(err);
    }
    let total = elapsed + start.elapsed();
    if total >= Duration::from_secs(60) {
        return Err(format!("took {total:?}"));
    }
    Ok(format!("{} terms, max error {worst:e}, {total:?}", corpus.ground.len()))
}

fn criterion_4(corpus: &Corpus, lib: &GateLibrary) -> Outcome {
    let mut max_moves = 0;
    for (t, d) in &corpus.ground {
        let g = build_routing(d);
        let r = canonical(d, &Register::empty(), lib).map_err(|e| format!("{t}: {e}"))?;
        let mut visited = BTreeSet::from_iter(g.initial().iter().copied());
        let mut moves = 0;
        for e in &r.trace {
            match e {
                TraceEvent::Move { to, .. } => {
                    moves += 1;
                    if !visited.insert(*to) {
                        return Err(format!("{t}: occurrence {to} visited twice"));
                    }
                }
                TraceEvent::Fire { sync, .. } => {
                    for &o in &g.syncs()[*sync].outputs {
                        moves += 1;
                        if !visited.insert(o) {
                            return Err(format!("{t}: occurrence {o} visited twice"));
                        }
                    }
                }
            }
        }
        if moves > g.occurrences().len() {
            return Err(format!("{t}: {moves} token moves for {} occurrences", g.occurrences().len()));
        }
        // `run` only returns after every token reached a final position.
        if r.sigma.len() != g.width() {
            return Err(format!("{t}: {} final tokens of {}", r.sigma.len(), g.width()));
        }
        max_moves = max_moves.max(moves);
    }
    Ok(format!("{} runs halted with all tokens final, at most {max_moves} moves", corpus.ground.len()))
}

fn criterion_5(corpus: &Corpus, lib: &GateLibrary) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for (t, d) in &corpus.functional {
        let input = random_register(build_routing(d).input_count(), &mut rng);
        let reference = canonical(d, &input, lib).map_err(|e| format!("{t}: {e}"))?;
        for seed in 0..SCHEDULES {
            let r = run(d, &input, lib, &mut Scheduler::random(seed)).map_err(|e| format!("{t}: {e}"))?;
            if r.sigma != reference.sigma {
                return Err(format!("{t}: schedule {seed} gives σ = {:?}", r.sigma.images()));
            }
            let err = r.output.max_distance(&reference.output).unwrap_or(f64::INFINITY);
            if err > AMPLITUDE_TOL {
                return Err(format!("{t}: schedule {seed} differs by {err:e}"));
            }
            worst = worst.max(err);
        }
    }
    Ok(format!("{} terms x {SCHEDULES} schedules, max error {worst:e}", corpus.functional.len()))
}

fn criterion_6(corpus: &Corpus, lib: &GateLibrary) -> Outcome {
    let mut machine_steps = 0;
    let mut mll_steps = 0;
    for (t, d) in corpus.ground.iter().chain(&corpus.functional) {
        let g = build_routing(d);
        let input = Register::basis(&vec![false; g.input_count()]);
        let r = canonical(d, &input, lib).map_err(|e| format!("{t}: {e}"))?;
        let report = check_correspondence(d, &g, &r.trace).map_err(|e| format!("{t}: {e}"))?;
        machine_steps += report.machine_steps;
        mll_steps += report.mll_steps;
    }
    Ok(format!(
        "{} derivations, {machine_steps} machine steps matched by {mll_steps} MLL steps",
        corpus.ground.len() + corpus.functional.len()
    ))
}

fn criterion_7(corpus: &Corpus, lib: &GateLibrary) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for (t, d) in corpus.ground.iter().chain(&corpus.functional) {
        let circuit = extract_circuit(d).map_err(|e| format!("{t}: {e}"))?;
        let mut extracted: Vec<String> = circuit.gates.iter().map(|(name, _)| name.clone()).collect();
        let mut constants = t.gate_names();
        extracted.sort();
        constants.sort();
        if extracted != constants {
            return Err(format!("{t}: circuit gates {extracted:?}, term gates {constants:?}"));
        }
        let input = random_register(circuit.free_inputs(), &mut rng);
        let via_circuit = eval_circuit(&circuit, &input, lib).map_err(|e| format!("{t}: {e}"))?;
        let via_machine = canonical(d, &input, lib)?.output;
        let err = via_circuit.max_distance(&via_machine).unwrap_or(f64::INFINITY);
        if err > AMPLITUDE_TOL {
            return Err(format!("{t}: circuit differs by {err:e}"));
        }
        worst = worst.max(err);
    }
    Ok(format!("{} circuits, max error {worst:e}", corpus.ground.len() + corpus.functional.len()))
}

/// Ordered tuples of `k` distinct wires from `1..=n`.
fn wire_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for prefix in wire_tuples(n, k - 1) {
        for w in 1..=n {
            if !prefix.contains(&w) {
                let mut t = prefix.clone();
                t.push(w);
                out.push(t);
            }
        }
    }
    out
}

/// `P` with `P|b₁…bₙ⟩ = |b_{j₁}…b_{jₘ} rest⟩`, qubit 1 most significant.
fn gather_matrix(n: usize, wires: &[usize]) -> Matrix {
    let mut order: Vec<usize> = wires.iter().map(|w| w - 1).collect();
    order.extend((0..n).filter(|i| !wires.contains(&(i + 1))));
    let dim = 1 << n;
    (0..dim)
        .map(|row| {
            let moved = index_bits(row, n);
            let mut bits = vec![false; n];
            for (k, &i) in order.iter().enumerate() {
                bits[i] = moved[k];
            }
            let col = basis_index(&bits);
            (0..dim).map(|j| c(if j == col { 1.0 } else { 0.0 }, 0.0)).collect()
        })
        .collect()
}

fn gate_matrix(g: &Gate) -> Matrix {
    (0..g.dim()).map(|r| (0..g.dim()).map(|col| g.entry(r, col)).collect()).collect()
}

fn criterion_8(lib: &GateLibrary) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for gate in lib.iter() {
        let name = gate.name();
        let u = gate_matrix(gate);
        for n in gate.arity()..=5 {
            let lifted_u = kron(&u, &identity(1 << (n - gate.arity())));
            for wires in wire_tuples(n, gate.arity()) {
                let p = gather_matrix(n, &wires);
                let oracle = mat_mul(&transpose(&p), &mat_mul(&lifted_u, &p));
                for _ in 0..50 {
                    let r = random_register(n, &mut rng);
                    let got = r.apply_lifted(gate, &wires).map_err(|e| e.to_string())?;
                    let err = max_diff(got.amplitudes(), &mat_vec(&oracle, r.amplitudes()));
                    if err > LIFTING_TOL {
                        return Err(format!("{name} on {wires:?} of {n}: error {err:e}"));
                    }
                    worst = worst.max(err);
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} lifted applications, max error {worst:e}"))
}

fn criterion_9(lib: &GateLibrary) -> Outcome {
    let check = |src: &str, ok: &dyn Fn(&TypeError) -> bool| -> Result<String, String> {
        let t = parse(src).map_err(|e| e.to_string())?;
        match typecheck(&Env::new(), &t, lib) {
            Err(e) if ok(&e) => Ok(format!("{src} rejected: {e}")),
            Err(e) => Err(format!("{src}: wrong error {e:?}")),
            Ok(_) => Err(format!("{src}: accepted")),
        }
    };
    let a = check(r"\x. x*x", &|e| matches!(e, TypeError::VariableUsedTwice(x) if x == "x"))?;
    let b = check(r"\x. |0>", &|e| matches!(e, TypeError::VariableUnused(x) if x == "x"))?;
    let c = check(r"\x. y", &|e| matches!(e, TypeError::UnboundVariable(y) if y == "y"))?;
    Ok(format!("{a}; {b}; {c}"))
}

fn main() -> ExitCode {
    let lib = GateLibrary::builtins();
    let start = Instant::now();
    let corpus = corpus(&lib);
    let generation = start.elapsed();

    let results: Vec<(&str, Outcome)> = vec![
        ("1 EPR reproduction", criterion_1(&lib)),
        ("2 golden trace", criterion_2(&lib)),
        ("3 soundness", criterion_3(&corpus, &lib, generation)),
        ("4 termination and progress", criterion_4(&corpus, &lib)),
        ("5 scheduler independence", criterion_5(&corpus, &lib)),
        ("6 MLL correspondence", criterion_6(&corpus, &lib)),
        ("7 circuit equivalence", criterion_7(&corpus, &lib)),
        ("8 lifting oracle", criterion_8(&lib)),
        ("9 linearity rejection", criterion_9(&lib)),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
