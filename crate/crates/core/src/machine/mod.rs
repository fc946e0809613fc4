//! The token machine: one token per qubit travels along the occurrences of a
//! closed derivation, tokens synchronize at gate axioms, and a gate fires on
//! the shared register once all of its inputs have arrived.
//!
//! Tokens on positive occurrences travel towards the root of the derivation,
//! tokens on negative ones towards the leaves. A run starts with one token
//! per negative atom of the conclusion type followed by one per bit leaf (by
//! label), and ends when every token sits on a positive atom of the
//! conclusion.

mod circuit;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use circuit::{eval_circuit, extract_circuit, Circuit, CircuitInput};

use crate::quantum::{GateLibrary, Permutation, QuantumError, Register};
use crate::syntax::{Term, Type};
use crate::typing::{
    atom_paths, bitocc, bitval, noccs, poccs, Derivation, Occurrence, OccurrenceTable, Polarity,
    Rule, Slot, Step,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MachineError {
    #[error("the machine only runs closed terms")]
    OpenTerm,
    #[error("input register has {found} qubits but the term expects {expected}")]
    InputArityMismatch { expected: usize, found: usize },
    #[error("run exceeded the step budget of {0}")]
    StepBudgetExceeded(usize),
    #[error("no token can move but the run is not finished")]
    Deadlock,
    #[error("unknown gate {0}")]
    UnknownGate(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Where a token goes from an occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Successor {
    /// Index of the next occurrence.
    Move(usize),
    /// The occurrence is input `input` of a gate axiom.
    SyncInput { sync: usize, input: usize },
    /// Positive atom of the root conclusion, at this position of `poccs`.
    FinalSlot(usize),
    /// Positive atom of a root hypothesis; only in open derivations.
    OpenEnd,
}

/// A gate axiom: its inputs and outputs as occurrence indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncNode {
    pub node: usize,
    pub gate: String,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

/// Successor relation over the occurrences of a derivation.
#[derive(Debug, Clone)]
pub struct RoutingGraph {
    occurrences: OccurrenceTable,
    successors: Vec<Successor>,
    syncs: Vec<SyncNode>,
    closed: bool,
    inputs: usize,
    initial: Vec<usize>,
    bits: Vec<bool>,
}

impl RoutingGraph {
    pub fn occurrences(&self) -> &OccurrenceTable {
        &self.occurrences
    }

    pub fn occurrence(&self, i: usize) -> &Occurrence {
        self.occurrences.get(i)
    }

    pub fn index_of(&self, o: &Occurrence) -> Option<usize> {
        self.occurrences.index_of(o)
    }

    pub fn successor(&self, i: usize) -> Successor {
        self.successors[i]
    }

    /// Overrides one edge. Only meant for testing the checkers.
    pub fn set_successor(&mut self, i: usize, s: Successor) {
        self.successors[i] = s;
    }

    pub fn syncs(&self) -> &[SyncNode] {
        &self.syncs
    }

    /// Occurrence indices of the initial tokens.
    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    /// Number of free input qubits, `|noccs(A)|`.
    pub fn input_count(&self) -> usize {
        self.inputs
    }

    pub fn width(&self) -> usize {
        self.initial.len()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    fn position(&self, i: usize) -> Position {
        match self.successors[i] {
            Successor::SyncInput { sync, input } => Position::Waiting { occ: i, sync, input },
            Successor::FinalSlot(pos) => Position::Final { occ: i, pos },
            Successor::Move(_) | Successor::OpenEnd => Position::Active(i),
        }
    }
}

fn prepend(step: Step, path: &[Step]) -> Vec<Step> {
    let mut out = Vec::with_capacity(path.len() + 1);
    out.push(step);
    out.extend_from_slice(path);
    out
}

/// Wires every occurrence of `d` to its successor.
pub fn build_routing(d: &Derivation) -> RoutingGraph {
    let table = OccurrenceTable::new(d);
    let nodes = d.nodes();
    let parents = d.parents();
    let mut syncs = Vec::new();
    let mut sync_of_node = vec![None; nodes.len()];
    for n in &nodes {
        if let (Rule::Gate, Term::Gate(g)) = (n.rule, &n.term) {
            let Type::Lolli(dom, _) = &n.ty else { unreachable!("gate axioms have arrow type") };
            let paths = atom_paths(dom);
            let idx = |step: Step, p: &Vec<Step>| {
                table
                    .index_of(&Occurrence::new(n.id, Slot::Conclusion, prepend(step, p)))
                    .expect("gate occurrence exists")
            };
            sync_of_node[n.id] = Some(syncs.len());
            syncs.push(SyncNode {
                node: n.id,
                gate: g.clone(),
                inputs: paths.iter().map(|p| idx(Step::LolliLeft, p)).collect(),
                outputs: paths.iter().map(|p| idx(Step::LolliRight, p)).collect(),
            });
        }
    }

    let mv = |o: Occurrence| {
        Successor::Move(table.index_of(&o).unwrap_or_else(|| panic!("routing target {o} missing")))
    };
    let root_poccs = poccs(&d.ty);

    let successors = table
        .iter()
        .map(|o| {
            let n = nodes[o.node];
            match (o.slot, o.polarity()) {
                (Slot::Conclusion, Polarity::Positive) => match parents[o.node] {
                    None => Successor::FinalSlot(
                        root_poccs.iter().position(|p| *p == o.path).expect("positive root atom"),
                    ),
                    Some((p, k)) => {
                        let parent = nodes[p];
                        match parent.rule {
                            Rule::LolliIntro | Rule::LolliIntroPair => {
                                mv(Occurrence::new(p, Slot::Conclusion, prepend(Step::LolliRight, &o.path)))
                            }
                            Rule::TensorIntro => {
                                let s = if k == 0 { Step::TensorLeft } else { Step::TensorRight };
                                mv(Occurrence::new(p, Slot::Conclusion, prepend(s, &o.path)))
                            }
                            Rule::LolliElim if k == 0 => match o.path.split_first() {
                                Some((Step::LolliLeft, q)) => {
                                    mv(Occurrence::new(parent.children[1].id, Slot::Conclusion, q.to_vec()))
                                }
                                Some((Step::LolliRight, q)) => {
                                    mv(Occurrence::new(p, Slot::Conclusion, q.to_vec()))
                                }
                                _ => unreachable!("function premise has arrow type"),
                            },
                            Rule::LolliElim => mv(Occurrence::new(
                                parent.children[0].id,
                                Slot::Conclusion,
                                prepend(Step::LolliLeft, &o.path),
                            )),
                            _ => unreachable!("leaf rules have no premises"),
                        }
                    }
                },
                (Slot::Conclusion, Polarity::Negative) => match n.rule {
                    Rule::Var => mv(Occurrence::new(n.id, Slot::Hypothesis(0), o.path.clone())),
                    Rule::Gate => {
                        let sync = sync_of_node[n.id].expect("gate node has a sync id");
                        let me = table.index_of(o).expect("own index");
                        let input = syncs[sync].inputs.iter().position(|&i| i == me).expect("gate input");
                        Successor::SyncInput { sync, input }
                    }
                    Rule::LolliIntro | Rule::LolliIntroPair => {
                        let premise = &n.children[0];
                        let last = premise.env.len() - 1;
                        match (n.rule, o.path.as_slice()) {
                            (_, [Step::LolliRight, q @ ..]) => {
                                mv(Occurrence::new(premise.id, Slot::Conclusion, q.to_vec()))
                            }
                            (Rule::LolliIntro, [Step::LolliLeft, q @ ..]) => {
                                mv(Occurrence::new(premise.id, Slot::Hypothesis(last), q.to_vec()))
                            }
                            (_, [Step::LolliLeft, Step::TensorLeft, q @ ..]) => {
                                mv(Occurrence::new(premise.id, Slot::Hypothesis(last - 1), q.to_vec()))
                            }
                            (_, [Step::LolliLeft, Step::TensorRight, q @ ..]) => {
                                mv(Occurrence::new(premise.id, Slot::Hypothesis(last), q.to_vec()))
                            }
                            _ => unreachable!("malformed abstraction path"),
                        }
                    }
                    Rule::LolliElim => mv(Occurrence::new(
                        n.children[0].id,
                        Slot::Conclusion,
                        prepend(Step::LolliRight, &o.path),
                    )),
                    Rule::TensorIntro => match o.path.split_first() {
                        Some((Step::TensorLeft, q)) => {
                            mv(Occurrence::new(n.children[0].id, Slot::Conclusion, q.to_vec()))
                        }
                        Some((Step::TensorRight, q)) => {
                            mv(Occurrence::new(n.children[1].id, Slot::Conclusion, q.to_vec()))
                        }
                        _ => unreachable!("tensor path starts with a tensor step"),
                    },
                    Rule::Bit0 | Rule::Bit1 => unreachable!("bits have no negative atoms"),
                },
                (Slot::Hypothesis(i), Polarity::Negative) => {
                    let name = &n.env.entries()[i].0;
                    match n.rule {
                        Rule::Var => mv(Occurrence::new(n.id, Slot::Conclusion, o.path.clone())),
                        Rule::LolliIntro | Rule::LolliIntroPair => {
                            mv(Occurrence::new(n.children[0].id, Slot::Hypothesis(i), o.path.clone()))
                        }
                        Rule::LolliElim | Rule::TensorIntro => {
                            let (c, j) = n
                                .children
                                .iter()
                                .find_map(|c| c.env.position(name).map(|j| (c, j)))
                                .expect("variable belongs to one premise");
                            mv(Occurrence::new(c.id, Slot::Hypothesis(j), o.path.clone()))
                        }
                        _ => unreachable!("constants have empty environments"),
                    }
                }
                (Slot::Hypothesis(i), Polarity::Positive) => match parents[o.node] {
                    None => Successor::OpenEnd,
                    Some((p, _)) => {
                        let parent = nodes[p];
                        let name = &n.env.entries()[i].0;
                        match parent.env.position(name) {
                            Some(j) => mv(Occurrence::new(p, Slot::Hypothesis(j), o.path.clone())),
                            None => {
                                let binder = match &parent.term {
                                    Term::Lam(..) => vec![Step::LolliLeft],
                                    Term::LamPair(x, _, _) if x == name => {
                                        vec![Step::LolliLeft, Step::TensorLeft]
                                    }
                                    Term::LamPair(..) => vec![Step::LolliLeft, Step::TensorRight],
                                    _ => unreachable!("variable bound by its parent"),
                                };
                                let mut path = binder;
                                path.extend_from_slice(&o.path);
                                mv(Occurrence::new(p, Slot::Conclusion, path))
                            }
                        }
                    }
                },
            }
        })
        .collect();

    let inputs = noccs(&d.ty);
    let mut initial: Vec<usize> = inputs
        .iter()
        .map(|p| table.index_of(&Occurrence::new(d.id, Slot::Conclusion, p.clone())).expect("root atom"))
        .collect();
    initial.extend(bitocc(d).iter().map(|o| table.index_of(o).expect("bit atom")));

    RoutingGraph {
        occurrences: table,
        successors,
        syncs,
        closed: d.env.is_empty(),
        inputs: inputs.len(),
        initial,
        bits: bitocc_values(d),
    }
}

fn bitocc_values(d: &Derivation) -> Vec<bool> {
    let r = bitval(d);
    let idx = r.amplitudes().iter().position(|a| a.norm() > 0.5).expect("basis state");
    crate::quantum::index_bits(idx, r.qubit_count())
}

/// Where a token is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Active(usize),
    /// On input `input` of sync node `sync`.
    Waiting { occ: usize, sync: usize, input: usize },
    /// On the root atom at position `pos` of `poccs`.
    Final { occ: usize, pos: usize },
}

impl Position {
    pub fn occurrence(self) -> usize {
        match self {
            Position::Active(o) | Position::Waiting { occ: o, .. } | Position::Final { occ: o, .. } => o,
        }
    }

    pub fn is_final(self) -> bool {
        matches!(self, Position::Final { .. })
    }
}

/// Token positions (slot `i` carries qubit `i` of the register) and the
/// register. Symbolic runs carry no register.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineState {
    pub slots: Vec<Position>,
    pub register: Option<Register>,
    fired: Vec<bool>,
}

impl MachineState {
    pub fn is_done(&self) -> bool {
        self.slots.iter().all(|p| p.is_final())
    }

    /// Sync nodes whose inputs are all occupied and that have not fired.
    pub fn ready_syncs(&self, g: &RoutingGraph) -> Vec<usize> {
        (0..g.syncs.len())
            .filter(|&k| !self.fired[k] && self.sync_slots(g, k).is_some())
            .collect()
    }

    /// Slot indices at the inputs of `sync`, in input order.
    fn sync_slots(&self, g: &RoutingGraph, sync: usize) -> Option<Vec<usize>> {
        let arity = g.syncs[sync].inputs.len();
        (0..arity)
            .map(|input| {
                self.slots.iter().position(|p| {
                    matches!(p, Position::Waiting { sync: s, input: j, .. } if *s == sync && *j == input)
                })
            })
            .collect()
    }

    /// Final permutation: slot `i` ends at position `σ(i)` of `poccs`.
    pub fn sigma(&self) -> Option<Permutation> {
        let images: Option<Vec<usize>> = self
            .slots
            .iter()
            .map(|p| match p {
                Position::Final { pos, .. } => Some(pos + 1),
                _ => None,
            })
            .collect();
        Permutation::from_images(&images?)
    }
}

/// `(noccs(A) · bitocc(d), input ⊗ bitval(d))`.
pub fn initial_state(g: &RoutingGraph, input: &Register) -> Result<MachineState, MachineError> {
    let mut s = initial_symbolic_state(g)?;
    if input.qubit_count() != g.inputs {
        return Err(MachineError::InputArityMismatch { expected: g.inputs, found: input.qubit_count() });
    }
    s.register = Some(input.tensor(&Register::basis(&g.bits)));
    Ok(s)
}

/// Initial positions without a register.
pub fn initial_symbolic_state(g: &RoutingGraph) -> Result<MachineState, MachineError> {
    if !g.closed {
        return Err(MachineError::OpenTerm);
    }
    Ok(MachineState {
        slots: g.initial.iter().map(|&o| g.position(o)).collect(),
        register: None,
        fired: vec![false; g.syncs.len()],
    })
}

/// Something the machine can do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Advance(usize),
    Fire(usize),
}

/// Picks the next action among the enabled ones.
#[derive(Debug, Clone)]
pub enum Scheduler {
    /// Fire ready gates first (lowest sync id), otherwise advance the
    /// next active slot after the last one moved, round-robin.
    Canonical { cursor: usize },
    /// Uniform choice among all enabled actions.
    Random(Box<ChaCha8Rng>),
}

impl Scheduler {
    pub fn canonical() -> Scheduler {
        Scheduler::Canonical { cursor: 0 }
    }

    pub fn random(seed: u64) -> Scheduler {
        Scheduler::Random(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    fn choose(&mut self, s: &MachineState, g: &RoutingGraph) -> Option<Action> {
        let ready = s.ready_syncs(g);
        let active: Vec<usize> = (0..s.slots.len())
            .filter(|&i| matches!(s.slots[i], Position::Active(_)))
            .collect();
        match self {
            Scheduler::Canonical { cursor } => {
                if let Some(&k) = ready.first() {
                    return Some(Action::Fire(k));
                }
                let n = s.slots.len();
                let i = (0..n).map(|k| (*cursor + k) % n).find(|i| active.contains(i))?;
                *cursor = i + 1;
                Some(Action::Advance(i))
            }
            Scheduler::Random(rng) => {
                let total = ready.len() + active.len();
                if total == 0 {
                    return None;
                }
                let k = rng.gen_range(0..total);
                Some(if k < ready.len() { Action::Fire(ready[k]) } else { Action::Advance(active[k - ready.len()]) })
            }
        }
    }
}

/// One recorded transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Move { slot: usize, from: usize, to: usize },
    /// `wires` are the 1-based slots at the inputs, in input order.
    Fire { sync: usize, gate: String, wires: Vec<usize> },
}

/// Performs one action. Returns `None` once every token is final.
pub fn step(
    g: &RoutingGraph,
    s: &mut MachineState,
    scheduler: &mut Scheduler,
    gates: &GateLibrary,
) -> Result<Option<TraceEvent>, MachineError> {
    if s.is_done() {
        return Ok(None);
    }
    match scheduler.choose(s, g).ok_or(MachineError::Deadlock)? {
        Action::Advance(slot) => {
            let Position::Active(from) = s.slots[slot] else { unreachable!("scheduler picks active slots") };
            let to = match g.successors[from] {
                Successor::Move(to) => to,
                _ => return Err(MachineError::Deadlock),
            };
            s.slots[slot] = g.position(to);
            Ok(Some(TraceEvent::Move { slot, from, to }))
        }
        Action::Fire(sync) => {
            let slots = s.sync_slots(g, sync).expect("scheduler fires ready syncs");
            let node = &g.syncs[sync];
            let wires: Vec<usize> = slots.iter().map(|i| i + 1).collect();
            if let Some(r) = &mut s.register {
                let gate = gates.get(&node.gate).ok_or_else(|| MachineError::UnknownGate(node.gate.clone()))?;
                r.apply_lifted_in_place(gate, &wires)?;
            }
            for (input, &slot) in slots.iter().enumerate() {
                s.slots[slot] = g.position(node.outputs[input]);
            }
            s.fired[sync] = true;
            Ok(Some(TraceEvent::Fire { sync, gate: node.gate.clone(), wires }))
        }
    }
}

/// Result of a complete run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Final register reordered so qubit `j` is the atom `poccs(A)[j]`.
    pub output: Register,
    /// Slot `i` ends at position `σ(i)` of `poccs(A)`.
    pub sigma: Permutation,
    pub trace: Vec<TraceEvent>,
}

/// Runs a closed derivation on an input register.
pub fn run(
    d: &Derivation,
    input: &Register,
    gates: &GateLibrary,
    scheduler: &mut Scheduler,
) -> Result<RunResult, MachineError> {
    run_graph(&build_routing(d), input, gates, scheduler)
}

pub fn run_graph(
    g: &RoutingGraph,
    input: &Register,
    gates: &GateLibrary,
    scheduler: &mut Scheduler,
) -> Result<RunResult, MachineError> {
    let mut s = initial_state(g, input)?;
    let trace = drive(g, &mut s, scheduler, gates)?;
    let sigma = s.sigma().ok_or(MachineError::Deadlock)?;
    let register = s.register.expect("concrete run has a register");
    let output = register.apply_permutation(&sigma.inverse())?;
    Ok(RunResult { output, sigma, trace })
}

/// Steps until done, bounded by the occurrence count.
pub(crate) fn drive(
    g: &RoutingGraph,
    s: &mut MachineState,
    scheduler: &mut Scheduler,
    gates: &GateLibrary,
) -> Result<Vec<TraceEvent>, MachineError> {
    let budget = g.occurrences.len() + 1;
    let mut trace = Vec::new();
    while let Some(ev) = step(g, s, scheduler, gates)? {
        trace.push(ev);
        if trace.len() > budget {
            return Err(MachineError::StepBudgetExceeded(budget));
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::parse_register;
    use crate::syntax::parse;
    use crate::typing::typecheck_closed;

    fn derive(src: &str) -> Derivation {
        typecheck_closed(&parse(src).unwrap(), &GateLibrary::builtins()).unwrap()
    }

    fn run_canonical(src: &str, input: &str) -> RunResult {
        let d = derive(src);
        let input = parse_register(input).unwrap();
        run(&d, &input, &GateLibrary::builtins(), &mut Scheduler::canonical()).unwrap()
    }

    #[test]
    fn axiom_routes_both_ways() {
        let d = derive(r"\x. x");
        let g = build_routing(&d);
        // Node 1 is `x:B ⊢ x:B`.
        let hyp = g.index_of(&Occurrence::new(1, Slot::Hypothesis(0), vec![])).unwrap();
        let concl = g.index_of(&Occurrence::new(1, Slot::Conclusion, vec![])).unwrap();
        assert_eq!(g.successor(hyp), Successor::Move(concl));
        let root_left = g.index_of(&Occurrence::new(0, Slot::Conclusion, vec![Step::LolliLeft])).unwrap();
        let root_right = g.index_of(&Occurrence::new(0, Slot::Conclusion, vec![Step::LolliRight])).unwrap();
        assert_eq!(g.successor(root_left), Successor::Move(hyp));
        assert_eq!(g.successor(concl), Successor::Move(root_right));
        assert_eq!(g.successor(root_right), Successor::FinalSlot(0));
    }

    #[test]
    fn single_bit_is_final() {
        let d = derive("|0>");
        let g = build_routing(&d);
        assert_eq!(g.occurrences().len(), 1);
        assert_eq!(g.successor(0), Successor::FinalSlot(0));
        let r = run(&d, &Register::empty(), &GateLibrary::builtins(), &mut Scheduler::canonical()).unwrap();
        assert!(r.trace.is_empty());
        assert_eq!(r.output, Register::basis(&[false]));
    }

    #[test]
    fn epr_initial_state() {
        let d = derive(r"\<x,y>. CNOT ((H x) * y)");
        let g = build_routing(&d);
        let q = parse_register("|01>").unwrap();
        let s = initial_state(&g, &q).unwrap();
        let occs: Vec<&Occurrence> = s.slots.iter().map(|p| g.occurrence(p.occurrence())).collect();
        assert_eq!(occs[0], &Occurrence::new(0, Slot::Conclusion, vec![Step::LolliLeft, Step::TensorLeft]));
        assert_eq!(occs[1], &Occurrence::new(0, Slot::Conclusion, vec![Step::LolliLeft, Step::TensorRight]));
        assert_eq!(s.register, Some(q));
        assert_eq!(
            initial_state(&g, &Register::basis(&[false])),
            Err(MachineError::InputArityMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn epr_applied_to_bits() {
        let r = run_canonical(r"(\<x,y>. CNOT ((H x) * y)) (|0> * |1>)", "|>");
        let expected = parse_register("1/sqrt(2)|01> + 1/sqrt(2)|10>").unwrap();
        assert!(r.output.approx_eq(&expected, 1e-12));
        assert!(r.sigma.is_identity());
    }

    #[test]
    fn epr_gate_order() {
        let r = run_canonical(r"\<x,y>. CNOT ((H x) * y)", "|11>");
        let fires: Vec<(&str, Vec<usize>)> = r
            .trace
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Fire { gate, wires, .. } => Some((gate.as_str(), wires.clone())),
                _ => None,
            })
            .collect();
        assert_eq!(fires, vec![("H", vec![1]), ("CNOT", vec![1, 2])]);
        let expected = parse_register("1/sqrt(2)|01> - 1/sqrt(2)|10>").unwrap();
        assert!(r.output.approx_eq(&expected, 1e-12));
    }

    #[test]
    fn swap_by_pattern_gives_permutation() {
        let r = run_canonical(r"\<x,y>. y * x", "|10>");
        assert_eq!(r.sigma.images(), vec![2, 1]);
        assert_eq!(r.output, Register::basis(&[false, true]));
    }

    #[test]
    fn open_terms_rejected() {
        let env = crate::typing::Env::from_pairs(vec![("x".into(), Type::Qubit)]).unwrap();
        let d = crate::typing::typecheck(&env, &crate::syntax::Term::var("x"), &GateLibrary::builtins()).unwrap();
        let g = build_routing(&d);
        assert_eq!(initial_state(&g, &Register::empty()), Err(MachineError::OpenTerm));
    }

    #[test]
    fn random_schedules_agree() {
        let d = derive(r"\<x,y>. CNOT ((H x) * y)");
        let q = parse_register("0.6|00> + 0.8i|11>").unwrap();
        let lib = GateLibrary::builtins();
        let reference = run(&d, &q, &lib, &mut Scheduler::canonical()).unwrap();
        for seed in 0..20 {
            let r = run(&d, &q, &lib, &mut Scheduler::random(seed)).unwrap();
            assert!(r.output.approx_eq(&reference.output, 1e-12));
            assert_eq!(r.sigma, reference.sigma);
        }
    }

    #[test]
    fn bare_gate_waits_immediately() {
        let d = derive("H");
        let g = build_routing(&d);
        let s = initial_symbolic_state(&g).unwrap();
        assert!(matches!(s.slots[0], Position::Waiting { sync: 0, input: 0, .. }));
        let r = run(&d, &Register::basis(&[true]), &GateLibrary::builtins(), &mut Scheduler::canonical()).unwrap();
        assert_eq!(r.trace.len(), 1);
    }
}
