//! Random closed well-typed terms for property tests.
//!
//! Terms are synthesized from a random circuit: a handful of wires, each
//! either a bound input or a labelled bit, then a sequence of gate
//! applications. Multi-qubit gates are threaded through pair-pattern
//! abstractions, and some single-qubit steps are written as beta-redexes
//! or go through function-typed inputs so that the higher-order rules get
//! exercised too. Candidates deeper than the limit are retried with smaller
//! size parameters.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::Term;
use crate::quantum::GateLibrary;
use crate::typing::{noccs, typecheck_closed};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("no term found within {attempts} attempts")]
    GenerationExhausted { attempts: usize },
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Bound on [`Term::depth`].
    pub max_depth: usize,
    /// Bound on the register width: negative atoms of the type plus bits.
    pub max_qubits: usize,
    /// Only produce terms whose type is a tensor of `B`.
    pub ground_only: bool,
    pub gates: GateLibrary,
    pub attempts: usize,
}

impl GeneratorConfig {
    pub fn new(seed: u64, max_depth: usize, max_qubits: usize) -> GeneratorConfig {
        GeneratorConfig {
            seed,
            max_depth,
            max_qubits,
            ground_only: false,
            gates: GateLibrary::builtins(),
            attempts: 2000,
        }
    }

    pub fn ground(mut self) -> GeneratorConfig {
        self.ground_only = true;
        self
    }
}

/// Deterministic in `seed`.
pub fn generate_term(seed: u64, max_depth: usize, max_qubits: usize) -> Result<Term, GenerateError> {
    generate_term_with(&GeneratorConfig::new(seed, max_depth, max_qubits))
}

pub fn generate_term_with(cfg: &GeneratorConfig) -> Result<Term, GenerateError> {
    if cfg.max_depth == 0 || cfg.max_qubits == 0 {
        return Err(GenerateError::InvalidConfig("depth and qubit bounds must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut gates: Vec<(String, usize)> = cfg
        .gates
        .iter()
        .filter(|g| g.arity() <= cfg.max_qubits)
        .map(|g| (g.name().to_string(), g.arity()))
        .collect();
    gates.sort();
    for attempt in 0..cfg.attempts {
        // Shrink the size parameters as failures accumulate.
        let shrink = 1 + attempt / 16;
        let max_wires = (cfg.max_qubits / shrink).max(1);
        let max_ops = cfg.max_depth / shrink;
        let t = Builder::new(&mut rng, cfg, &gates).build(max_wires, max_ops);
        if t.depth() > cfg.max_depth {
            continue;
        }
        let Ok(d) = typecheck_closed(&t, &cfg.gates) else {
            continue;
        };
        if noccs(&d.ty).len() + d.bit_count() > cfg.max_qubits {
            continue;
        }
        if cfg.ground_only && !d.ty.is_ground() {
            continue;
        }
        return Ok(t);
    }
    Err(GenerateError::GenerationExhausted { attempts: cfg.attempts })
}

/// An abstraction waiting for the rest of the circuit as its body.
enum Frame {
    /// `(\<a,b>. [·]) arg`; deeper tuples destructure through `rest` chains.
    Pattern { vars: Vec<String>, arg: Term },
    /// `(\a. [·]) arg`
    Let { var: String, arg: Term },
}

struct Builder<'a, R: Rng> {
    rng: &'a mut R,
    cfg: &'a GeneratorConfig,
    gates: &'a [(String, usize)],
    fresh: usize,
}

impl<'a, R: Rng> Builder<'a, R> {
    fn new(rng: &'a mut R, cfg: &'a GeneratorConfig, gates: &'a [(String, usize)]) -> Self {
        Builder { rng, cfg, gates, fresh: 0 }
    }

    fn var(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn gate_of_arity(&mut self, arity: usize) -> Option<String> {
        let options: Vec<&String> =
            self.gates.iter().filter(|(_, a)| *a == arity).map(|(n, _)| n).collect();
        options.choose(self.rng).map(|s| (*s).clone())
    }

    fn build(&mut self, max_wires: usize, max_ops: usize) -> Term {
        let n = self.rng.gen_range(1..=max_wires);
        let mut inputs: Vec<String> = Vec::new();
        let mut wires: Vec<Term> = Vec::new();
        let mut bits = 0;
        for _ in 0..n {
            if !self.cfg.ground_only && self.rng.gen_bool(0.5) {
                let x = self.var("x");
                inputs.push(x.clone());
                wires.push(Term::var(x));
            } else {
                bits += 1;
                wires.push(Term::bit(false, 0));
            }
        }
        self.label_bits(&mut wires, bits);

        // A function-typed input stands in for a single-qubit gate.
        let mut fun_input = None;
        if !self.cfg.ground_only && n < self.cfg.max_qubits && self.rng.gen_bool(0.25) {
            fun_input = Some(self.var("f"));
        }

        let mut frames = Vec::new();
        let ops = self.rng.gen_range(0..=max_ops);
        for _ in 0..ops {
            self.step(&mut wires, &mut frames);
        }
        if let Some(f) = &fun_input {
            let i = self.rng.gen_range(0..wires.len());
            let w = std::mem::replace(&mut wires[i], Term::var(""));
            wires[i] = Term::app(Term::var(f.clone()), w);
        }

        let mut body = self.output(wires);
        for frame in frames.into_iter().rev() {
            body = match frame {
                Frame::Let { var, arg } => Term::app(Term::lam(var, body), arg),
                Frame::Pattern { vars, arg } => Term::app(self.destructure(&vars, body), arg),
            };
        }

        let mut binders: Vec<String> = inputs;
        if let Some(f) = fun_input {
            let at = self.rng.gen_range(0..=binders.len());
            binders.insert(at, f);
        }
        self.abstract_inputs(binders, body)
    }

    fn label_bits(&mut self, wires: &mut [Term], bits: usize) {
        let mut labels: Vec<u32> = (1..=(2 * bits as u32).max(1)).collect();
        labels.shuffle(self.rng);
        let mut next = labels.into_iter();
        for w in wires.iter_mut() {
            if let Term::Bit { .. } = w {
                let value = self.rng.gen_bool(0.5);
                *w = Term::bit(value, next.next().expect("enough labels"));
            }
        }
    }

    fn step(&mut self, wires: &mut [Term], frames: &mut Vec<Frame>) {
        let n = wires.len();
        let choice = self.rng.gen_range(0..10);
        match choice {
            0..=3 => {
                let i = self.rng.gen_range(0..n);
                let Some(g) = self.gate_of_arity(1) else { return };
                let w = take(&mut wires[i]);
                wires[i] = match self.rng.gen_range(0..4) {
                    0 => {
                        let f = self.var("g");
                        Term::app(Term::lam(f.clone(), Term::app(Term::var(f), w)), Term::gate(g))
                    }
                    1 => {
                        let x = self.var("y");
                        Term::app(Term::lam(x.clone(), Term::app(Term::gate(g), Term::var(x))), w)
                    }
                    _ => Term::app(Term::gate(g), w),
                };
            }
            4..=7 => {
                let arity = self.rng.gen_range(2..=n.max(2));
                if arity > n {
                    return;
                }
                let Some(g) = self.gate_of_arity(arity) else { return };
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(self.rng);
                idx.truncate(arity);
                let args: Vec<Term> = idx.iter().map(|&i| take(&mut wires[i])).collect();
                let arg = Term::app(Term::gate(g), Term::tuple(args));
                let vars: Vec<String> = (0..arity).map(|_| self.var("q")).collect();
                // Outputs go back to the input wires in order.
                for (k, &i) in idx.iter().enumerate() {
                    wires[i] = Term::var(vars[k].clone());
                }
                frames.push(Frame::Pattern { vars, arg });
            }
            8 => {
                let i = self.rng.gen_range(0..n);
                let var = self.var("z");
                let arg = take(&mut wires[i]);
                wires[i] = Term::var(var.clone());
                frames.push(Frame::Let { var, arg });
            }
            _ => {
                let (i, j) = (self.rng.gen_range(0..n), self.rng.gen_range(0..n));
                wires.swap(i, j);
            }
        }
    }

    /// Binds the components of a right-nested tuple of `vars` around `body`.
    fn destructure(&mut self, vars: &[String], body: Term) -> Term {
        match vars {
            [a, b] => Term::lam_pair(a.clone(), b.clone(), body),
            [a, rest @ ..] => {
                let r = self.var("r");
                let inner = self.destructure(rest, body);
                Term::lam_pair(a.clone(), r.clone(), Term::app(inner, Term::var(r)))
            }
            [] => unreachable!("gates have positive arity"),
        }
    }

    /// A random bracketing of the wires, left to right.
    fn output(&mut self, mut wires: Vec<Term>) -> Term {
        if wires.len() == 1 {
            return wires.pop().expect("one wire");
        }
        let split = self.rng.gen_range(1..wires.len());
        let right = wires.split_off(split);
        let l = self.output(wires);
        let r = self.output(right);
        Term::tensor(l, r)
    }

    fn abstract_inputs(&mut self, mut binders: Vec<String>, mut body: Term) -> Term {
        while let Some(x) = binders.pop() {
            if !binders.is_empty() && self.rng.gen_bool(0.4) {
                let y = x;
                let x = binders.pop().expect("nonempty");
                body = Term::lam_pair(x, y, body);
            } else {
                body = Term::lam(x, body);
            }
        }
        body
    }
}

fn take(t: &mut Term) -> Term {
    std::mem::replace(t, Term::var(""))
}
