//! Multiplicative linear logic: formulas, one-sided sequent proofs, the
//! single-token machine on proofs, and the canonical translation of typing
//! derivations into proofs.
//!
//! A proof node lists its conclusion explicitly together with where each
//! conclusion formula comes from (the rule's principal formula or a premise
//! formula), so exchange is implicit and token routing is positional.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::machine::{RoutingGraph, TraceEvent};
use crate::syntax::Type;
use crate::typing::{Derivation, Occurrence, Rule, Slot, Step};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MllError {
    #[error("invalid proof at node {node}: {message}")]
    InvalidProof { node: usize, message: String },
    #[error("invalid atom occurrence {0}")]
    InvalidOccurrence(String),
    #[error("machine step {step} has no matching MLL run: {message}")]
    CorrespondenceViolation { step: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MllFormula {
    Atom(u32),
    NegAtom(u32),
    Tensor(Box<MllFormula>, Box<MllFormula>),
    Par(Box<MllFormula>, Box<MllFormula>),
}

impl MllFormula {
    pub fn tensor(a: MllFormula, b: MllFormula) -> MllFormula {
        MllFormula::Tensor(Box::new(a), Box::new(b))
    }

    pub fn par(a: MllFormula, b: MllFormula) -> MllFormula {
        MllFormula::Par(Box::new(a), Box::new(b))
    }

    /// De Morgan dual.
    pub fn neg(&self) -> MllFormula {
        match self {
            MllFormula::Atom(i) => MllFormula::NegAtom(*i),
            MllFormula::NegAtom(i) => MllFormula::Atom(*i),
            MllFormula::Tensor(a, b) => MllFormula::par(a.neg(), b.neg()),
            MllFormula::Par(a, b) => MllFormula::tensor(a.neg(), b.neg()),
        }
    }

    pub fn at(&self, path: &[Dir]) -> Option<&MllFormula> {
        match (self, path.split_first()) {
            (_, None) => Some(self),
            (MllFormula::Tensor(a, _) | MllFormula::Par(a, _), Some((Dir::Left, rest))) => a.at(rest),
            (MllFormula::Tensor(_, b) | MllFormula::Par(_, b), Some((Dir::Right, rest))) => b.at(rest),
            _ => None,
        }
    }

    /// Paths to the atoms and co-atoms, left to right.
    pub fn atom_paths(&self) -> Vec<Vec<Dir>> {
        match self {
            MllFormula::Atom(_) | MllFormula::NegAtom(_) => vec![vec![]],
            MllFormula::Tensor(a, b) | MllFormula::Par(a, b) => {
                let mut out: Vec<Vec<Dir>> =
                    a.atom_paths().into_iter().map(|p| [vec![Dir::Left], p].concat()).collect();
                out.extend(b.atom_paths().into_iter().map(|p| [vec![Dir::Right], p].concat()));
                out
            }
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MllFormula::Atom(_) | MllFormula::NegAtom(_) => write!(f, "{self}"),
            _ => write!(f, "({self})"),
        }
    }
}

impl fmt::Display for MllFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MllFormula::Atom(0) => f.write_str("α"),
            MllFormula::NegAtom(0) => f.write_str("α⊥"),
            MllFormula::Atom(i) => write!(f, "α{i}"),
            MllFormula::NegAtom(i) => write!(f, "α{i}⊥"),
            MllFormula::Tensor(a, b) => {
                a.fmt_operand(f)?;
                f.write_str(" ⊗ ")?;
                b.fmt_operand(f)
            }
            MllFormula::Par(a, b) => {
                a.fmt_operand(f)?;
                f.write_str(" ⅋ ")?;
                b.fmt_operand(f)
            }
        }
    }
}

/// `⌊B⌋ = α`, `⌊A ⊸ B⌋ = ⌊A⌋⊥ ⅋ ⌊B⌋`, `⌊A ⊗ B⌋ = ⌊A⌋ ⊗ ⌊B⌋`.
pub fn translate_type(t: &Type) -> MllFormula {
    match t {
        Type::Qubit => MllFormula::Atom(0),
        Type::Lolli(a, b) => MllFormula::par(translate_type(a).neg(), translate_type(b)),
        Type::Tensor(a, b) => MllFormula::tensor(translate_type(a), translate_type(b)),
    }
}

/// Direction into a binary connective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Left,
    Right,
}

/// Rule at a proof node; indices refer to formulas of the premises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MllRule {
    Axiom,
    /// Cut between formula `left` of premise 0 and `right` of premise 1.
    Cut { left: usize, right: usize },
    /// `left` of premise 0 tensored with `right` of premise 1.
    Tensor { left: usize, right: usize },
    /// `left` and `right` of the single premise.
    Par { left: usize, right: usize },
}

impl MllRule {
    pub fn name(self) -> &'static str {
        match self {
            MllRule::Axiom => "ax",
            MllRule::Cut { .. } => "cut",
            MllRule::Tensor { .. } => "⊗",
            MllRule::Par { .. } => "⅋",
        }
    }
}

/// Where a conclusion formula comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// Introduced by the rule (both formulas of an axiom).
    Principal,
    Premise { child: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MllProof {
    pub id: usize,
    pub rule: MllRule,
    pub conclusion: Vec<MllFormula>,
    pub sources: Vec<Source>,
    pub children: Vec<MllProof>,
    /// The derivation node whose judgment this node proves, if any.
    pub origin: Option<usize>,
}

impl MllProof {
    fn build(rule: MllRule, children: Vec<MllProof>, sources: Vec<Source>) -> MllProof {
        let principal = match rule {
            MllRule::Axiom | MllRule::Cut { .. } => None,
            MllRule::Tensor { left, right } => Some(MllFormula::tensor(
                children[0].conclusion[left].clone(),
                children[1].conclusion[right].clone(),
            )),
            MllRule::Par { left, right } => Some(MllFormula::par(
                children[0].conclusion[left].clone(),
                children[0].conclusion[right].clone(),
            )),
        };
        let conclusion = sources
            .iter()
            .map(|s| match s {
                Source::Principal => principal.clone().expect("rule has a principal formula"),
                Source::Premise { child, index } => children[*child].conclusion[*index].clone(),
            })
            .collect();
        MllProof { id: 0, rule, conclusion, sources, children, origin: None }
    }

    pub fn axiom(f: MllFormula) -> MllProof {
        MllProof {
            id: 0,
            rule: MllRule::Axiom,
            conclusion: vec![f.neg(), f],
            sources: vec![Source::Principal, Source::Principal],
            children: vec![],
            origin: None,
        }
    }

    /// Pre-order nodes, so `nodes()[k].id == k` after [`MllProof::renumber`].
    pub fn nodes(&self) -> Vec<&MllProof> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a MllProof, out: &mut Vec<&'a MllProof>) {
            out.push(p);
            for c in &p.children {
                go(c, out);
            }
        }
        go(self, &mut out);
        out
    }

    pub fn renumber(&mut self, start: usize) -> usize {
        self.id = start;
        let mut next = start + 1;
        for c in &mut self.children {
            next = c.renumber(next);
        }
        next
    }

    pub fn count_rule(&self, pred: impl Fn(MllRule) -> bool) -> usize {
        self.nodes().iter().filter(|n| pred(n.rule)).count()
    }

    pub fn is_cut_free(&self) -> bool {
        self.count_rule(|r| matches!(r, MllRule::Cut { .. })) == 0
    }

    /// Every atom occurrence in every sequent of the proof.
    pub fn atom_occurrences(&self) -> Vec<AtomOccurrence> {
        let mut out = Vec::new();
        for n in self.nodes() {
            for (i, f) in n.conclusion.iter().enumerate() {
                for p in f.atom_paths() {
                    out.push(AtomOccurrence { node: n.id, formula: i, path: p });
                }
            }
        }
        out
    }

    pub fn sequent(&self) -> String {
        let fs: Vec<String> = self.conclusion.iter().map(|f| f.to_string()).collect();
        format!("⊢ {}", fs.join(", "))
    }

    /// Indented sequents, conclusion first.
    pub fn render(&self) -> String {
        let mut out = String::new();
        fn go(p: &MllProof, depth: usize, out: &mut String) {
            out.push_str(&"  ".repeat(depth));
            out.push_str(&format!("[{}] ({}) {}\n", p.id, p.rule.name(), p.sequent()));
            for c in &p.children {
                go(c, depth + 1, out);
            }
        }
        go(self, 0, &mut out);
        out
    }
}

/// Rule-by-rule validation.
pub fn check_proof(p: &MllProof) -> Result<(), MllError> {
    let bad = |message: String| Err(MllError::InvalidProof { node: p.id, message });
    let arity = match p.rule {
        MllRule::Axiom => 0,
        MllRule::Par { .. } => 1,
        MllRule::Cut { .. } | MllRule::Tensor { .. } => 2,
    };
    if p.children.len() != arity {
        return bad(format!("{} expects {arity} premises", p.rule.name()));
    }
    if p.sources.len() != p.conclusion.len() {
        return bad("every conclusion formula needs a source".into());
    }
    let premise = |child: usize, index: usize| p.children.get(child).and_then(|c| c.conclusion.get(index));
    let (active, principal): (Vec<(usize, usize)>, Option<MllFormula>) = match p.rule {
        MllRule::Axiom => {
            if p.conclusion.len() != 2 || p.conclusion[0] != p.conclusion[1].neg() {
                return bad("axiom needs two dual formulas".into());
            }
            if p.sources.iter().any(|s| *s != Source::Principal) {
                return bad("axiom formulas are principal".into());
            }
            return Ok(());
        }
        MllRule::Cut { left, right } => {
            let (Some(a), Some(b)) = (premise(0, left), premise(1, right)) else {
                return bad("cut formula out of range".into());
            };
            if *a != b.neg() {
                return bad(format!("cut formulas {a} and {b} are not dual"));
            }
            (vec![(0, left), (1, right)], None)
        }
        MllRule::Tensor { left, right } => {
            let (Some(a), Some(b)) = (premise(0, left), premise(1, right)) else {
                return bad("tensor formula out of range".into());
            };
            (vec![(0, left), (1, right)], Some(MllFormula::tensor(a.clone(), b.clone())))
        }
        MllRule::Par { left, right } => {
            let (Some(a), Some(b)) = (premise(0, left), premise(0, right)) else {
                return bad("par formula out of range".into());
            };
            if left == right {
                return bad("par needs two distinct formulas".into());
            }
            (vec![(0, left), (0, right)], Some(MllFormula::par(a.clone(), b.clone())))
        }
    };
    let mut used: HashSet<(usize, usize)> = active.iter().copied().collect();
    let mut principals = 0;
    for (f, s) in p.conclusion.iter().zip(&p.sources) {
        match s {
            Source::Principal => {
                principals += 1;
                if Some(f) != principal.as_ref() {
                    return bad(format!("{f} is not the principal formula"));
                }
            }
            Source::Premise { child, index } => {
                if premise(*child, *index) != Some(f) {
                    return bad(format!("{f} does not match its premise formula"));
                }
                if !used.insert((*child, *index)) {
                    return bad("premise formula used twice".into());
                }
            }
        }
    }
    if principals != usize::from(principal.is_some()) {
        return bad("wrong number of principal formulas".into());
    }
    let total: usize = p.children.iter().map(|c| c.conclusion.len()).sum();
    if used.len() != total {
        return bad("premise formula dropped".into());
    }
    p.children.iter().try_for_each(check_proof)
}

// ---------------------------------------------------------------------------
// Translation

/// The canonical proof of the sequent `⊢ α⊥ (one per bit), ⌊Γ⌋⊥, ⌊A⌋` of a
/// derivation; gate axioms use the identity permutation.
pub fn translate_derivation(d: &Derivation) -> MllProof {
    let mut p = translate(d);
    p.renumber(0);
    p
}

fn sources(child: usize, range: std::ops::Range<usize>) -> Vec<Source> {
    range.map(|index| Source::Premise { child, index }).collect()
}

fn translate(d: &Derivation) -> MllProof {
    let mut p = match d.rule {
        Rule::Bit0 | Rule::Bit1 => MllProof::axiom(MllFormula::Atom(0)),
        Rule::Var => MllProof::axiom(translate_type(&d.ty)),
        Rule::Gate => {
            let Type::Lolli(dom, _) = &d.ty else { unreachable!("gates have arrow type") };
            gate_proof(dom.atom_count())
        }
        Rule::LolliIntro => {
            let premise = translate(&d.children[0]);
            let k = premise.conclusion.len();
            let mut srcs = sources(0, 0..k - 2);
            srcs.push(Source::Principal);
            MllProof::build(MllRule::Par { left: k - 2, right: k - 1 }, vec![premise], srcs)
        }
        Rule::LolliIntroPair => {
            let premise = translate(&d.children[0]);
            let k = premise.conclusion.len();
            let mut srcs = sources(0, 0..k - 3);
            srcs.push(Source::Principal);
            srcs.push(Source::Premise { child: 0, index: k - 1 });
            let inner = MllProof::build(MllRule::Par { left: k - 3, right: k - 2 }, vec![premise], srcs);
            let mut srcs = sources(0, 0..k - 3);
            srcs.push(Source::Principal);
            MllProof::build(MllRule::Par { left: k - 3, right: k - 2 }, vec![inner], srcs)
        }
        Rule::TensorIntro => {
            let (l, r) = (&d.children[0], &d.children[1]);
            let (pl, pr) = (translate(l), translate(r));
            let mut srcs = context_sources(d, [l, r]);
            srcs.push(Source::Principal);
            let (left, right) = (pl.conclusion.len() - 1, pr.conclusion.len() - 1);
            MllProof::build(MllRule::Tensor { left, right }, vec![pl, pr], srcs)
        }
        Rule::LolliElim => {
            let (f, a) = (&d.children[0], &d.children[1]);
            let (pf, pa) = (translate(f), translate(a));
            let Type::Lolli(_, cod) = &f.ty else { unreachable!("function has arrow type") };
            // ⊢ …, ⌊A⌋ ⊗ ⌊B⌋⊥, ⌊B⌋ from the argument and an axiom on ⌊B⌋.
            let ka = pa.conclusion.len();
            let mut srcs = sources(0, 0..ka - 1);
            srcs.push(Source::Principal);
            srcs.push(Source::Premise { child: 1, index: 1 });
            let ax = MllProof::axiom(translate_type(cod));
            let t = MllProof::build(MllRule::Tensor { left: ka - 1, right: 0 }, vec![pa, ax], srcs);
            let mut srcs = context_sources(d, [f, a]);
            srcs.push(Source::Premise { child: 1, index: ka });
            let left = pf.conclusion.len() - 1;
            MllProof::build(MllRule::Cut { left, right: ka - 1 }, vec![pf, t], srcs)
        }
    };
    p.origin = Some(d.id);
    p
}

/// Bits of the left premise, then of the right one, then the environment in
/// `d`'s order. Both premise proofs start with their bits and environment.
fn context_sources(d: &Derivation, premises: [&Derivation; 2]) -> Vec<Source> {
    let mut out = Vec::new();
    for (child, c) in premises.iter().enumerate() {
        out.extend(sources(child, 0..c.bit_count()));
    }
    for (x, _) in d.env.entries() {
        let (child, j) = premises
            .iter()
            .enumerate()
            .find_map(|(child, c)| c.env.position(x).map(|j| (child, j)))
            .expect("variable comes from a premise");
        out.push(Source::Premise { child, index: premises[child].bit_count() + j });
    }
    out
}

/// `n` atomic axioms, right-nested tensors on the atoms, right-nested pars on
/// the co-atoms, then one last par.
fn gate_proof(n: usize) -> MllProof {
    let alpha = MllFormula::Atom(0);
    // Tensor chain: ⊢ α⊥_k, …, α⊥_{n-1}, α ⊗ (… ⊗ α).
    let mut t = MllProof::axiom(alpha.clone());
    for _ in 1..n {
        let rest = t;
        let m = rest.conclusion.len();
        let mut srcs = vec![Source::Premise { child: 0, index: 0 }];
        srcs.extend(sources(1, 0..m - 1));
        srcs.push(Source::Principal);
        t = MllProof::build(MllRule::Tensor { left: 1, right: m - 1 }, vec![MllProof::axiom(alpha.clone()), rest], srcs);
    }
    // Par chain over the co-atoms, innermost (rightmost) first.
    let mut p = t;
    for k in (0..n.saturating_sub(1)).rev() {
        // ⊢ α⊥_0, …, α⊥_k, P, ⌊B^n⌋ where P pairs up α⊥_{k+1}, ….
        let m = p.conclusion.len();
        let mut srcs = sources(0, 0..k);
        srcs.push(Source::Principal);
        srcs.push(Source::Premise { child: 0, index: m - 1 });
        p = MllProof::build(MllRule::Par { left: k, right: k + 1 }, vec![p], srcs);
    }
    MllProof::build(MllRule::Par { left: 0, right: 1 }, vec![p], vec![Source::Principal])
}

// ---------------------------------------------------------------------------
// The MLL machine

/// An atom or co-atom inside a sequent of a proof.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomOccurrence {
    pub node: usize,
    pub formula: usize,
    pub path: Vec<Dir>,
}

impl fmt::Display for AtomOccurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}.{}[", self.node, self.formula)?;
        for d in &self.path {
            f.write_str(if *d == Dir::Left { "l" } else { "r" })?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MllStep {
    Next(AtomOccurrence),
    Exit,
}

/// Indexed view of a proof for stepping tokens.
#[derive(Debug)]
pub struct MllMachine<'a> {
    nodes: Vec<&'a MllProof>,
    parents: Vec<Option<(usize, usize)>>,
}

impl<'a> MllMachine<'a> {
    pub fn new(p: &'a MllProof) -> MllMachine<'a> {
        let nodes = p.nodes();
        let mut parents = vec![None; nodes.len()];
        for n in &nodes {
            for (k, c) in n.children.iter().enumerate() {
                parents[c.id] = Some((n.id, k));
            }
        }
        MllMachine { nodes, parents }
    }

    pub fn root(&self) -> &'a MllProof {
        self.nodes[0]
    }

    fn formula(&self, o: &AtomOccurrence) -> Option<&'a MllFormula> {
        self.nodes.get(o.node)?.conclusion.get(o.formula)?.at(&o.path)
    }

    /// Occurrences the runs start from: the co-atoms of the conclusion.
    pub fn initial(&self) -> Vec<AtomOccurrence> {
        self.root()
            .conclusion
            .iter()
            .enumerate()
            .flat_map(|(i, f)| {
                f.atom_paths()
                    .into_iter()
                    .filter(|p| matches!(f.at(p), Some(MllFormula::NegAtom(_))))
                    .map(move |p| AtomOccurrence { node: 0, formula: i, path: p })
            })
            .collect()
    }

    /// Atoms move towards the conclusion, co-atoms towards the axioms.
    pub fn step(&self, o: &AtomOccurrence) -> Result<MllStep, MllError> {
        let invalid = || MllError::InvalidOccurrence(o.to_string());
        let node = self.nodes.get(o.node).ok_or_else(invalid)?;
        match self.formula(o).ok_or_else(invalid)? {
            MllFormula::Atom(_) => {
                let Some((parent, child)) = self.parents[o.node] else {
                    return Ok(MllStep::Exit);
                };
                let p = self.nodes[parent];
                let here = Source::Premise { child, index: o.formula };
                if let Some(j) = p.sources.iter().position(|s| *s == here) {
                    return Ok(MllStep::Next(AtomOccurrence { node: parent, formula: j, path: o.path.clone() }));
                }
                let principal = || p.sources.iter().position(|s| *s == Source::Principal).expect("principal");
                let into = |dir: Dir| [vec![dir], o.path.clone()].concat();
                let next = match p.rule {
                    MllRule::Tensor { left, .. } if child == 0 && o.formula == left => {
                        AtomOccurrence { node: parent, formula: principal(), path: into(Dir::Left) }
                    }
                    MllRule::Tensor { right, .. } if child == 1 && o.formula == right => {
                        AtomOccurrence { node: parent, formula: principal(), path: into(Dir::Right) }
                    }
                    MllRule::Par { left, .. } if o.formula == left => {
                        AtomOccurrence { node: parent, formula: principal(), path: into(Dir::Left) }
                    }
                    MllRule::Par { right, .. } if o.formula == right => {
                        AtomOccurrence { node: parent, formula: principal(), path: into(Dir::Right) }
                    }
                    MllRule::Cut { left, right } if child == 0 && o.formula == left => {
                        AtomOccurrence { node: p.children[1].id, formula: right, path: o.path.clone() }
                    }
                    MllRule::Cut { left, right } if child == 1 && o.formula == right => {
                        AtomOccurrence { node: p.children[0].id, formula: left, path: o.path.clone() }
                    }
                    _ => return Err(invalid()),
                };
                Ok(MllStep::Next(next))
            }
            MllFormula::NegAtom(_) => {
                let next = match (node.rule, node.sources[o.formula]) {
                    (MllRule::Axiom, _) => {
                        AtomOccurrence { node: o.node, formula: 1 - o.formula, path: o.path.clone() }
                    }
                    (_, Source::Premise { child, index }) => {
                        AtomOccurrence { node: node.children[child].id, formula: index, path: o.path.clone() }
                    }
                    (rule, Source::Principal) => {
                        let (dir, rest) = o.path.split_first().ok_or_else(invalid)?;
                        let (child, index) = match (rule, dir) {
                            (MllRule::Tensor { left, .. }, Dir::Left) => (0, left),
                            (MllRule::Tensor { right, .. }, Dir::Right) => (1, right),
                            (MllRule::Par { left, .. }, Dir::Left) => (0, left),
                            (MllRule::Par { right, .. }, Dir::Right) => (0, right),
                            _ => return Err(invalid()),
                        };
                        AtomOccurrence { node: node.children[child].id, formula: index, path: rest.to_vec() }
                    }
                };
                Ok(MllStep::Next(next))
            }
            _ => Err(invalid()),
        }
    }

    /// The maximal run from `o`, `o` included. Fails on a cycle.
    pub fn run_from(&self, o: &AtomOccurrence) -> Result<Vec<AtomOccurrence>, MllError> {
        let bound = self.nodes.iter().map(|n| n.conclusion.iter().map(|f| f.atom_paths().len()).sum::<usize>()).sum::<usize>();
        let mut out = vec![o.clone()];
        let mut cur = o.clone();
        while let MllStep::Next(next) = self.step(&cur)? {
            if out.len() > bound {
                return Err(MllError::InvalidOccurrence(format!("run from {o} does not terminate")));
            }
            out.push(next.clone());
            cur = next;
        }
        Ok(out)
    }
}

/// One step of the MLL machine on `p`.
pub fn mll_step(p: &MllProof, o: &AtomOccurrence) -> Result<MllStep, MllError> {
    MllMachine::new(p).step(o)
}

/// Maps a machine occurrence of `d` to its atom occurrence in the canonical
/// proof.
pub fn project_occurrence(d: &Derivation, p: &MllProof, o: &Occurrence) -> Option<AtomOccurrence> {
    let dn = d.nodes().into_iter().find(|n| n.id == o.node)?;
    let node = p.nodes().into_iter().find(|n| n.origin == Some(o.node))?.id;
    let bits = dn.bit_count();
    let formula = match o.slot {
        Slot::Conclusion => bits + dn.env.len(),
        Slot::Hypothesis(i) => bits + i,
    };
    let path = o
        .path
        .iter()
        .map(|s| match s {
            Step::LolliLeft | Step::TensorLeft => Dir::Left,
            Step::LolliRight | Step::TensorRight => Dir::Right,
        })
        .collect();
    Some(AtomOccurrence { node, formula, path })
}

/// Projects a list of machine occurrences (e.g. a state's slots).
pub fn project_state(d: &Derivation, p: &MllProof, occs: &[Occurrence]) -> Vec<AtomOccurrence> {
    occs.iter().map(|o| project_occurrence(d, p, o).expect("occurrence of d")).collect()
}

/// Summary of a successful correspondence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceReport {
    pub machine_steps: usize,
    pub mll_steps: usize,
    pub atoms: usize,
    pub cut_free: bool,
}

/// Checks that every machine move of `trace` is matched by a nonempty MLL run
/// between the projected occurrences, and that the maximal MLL runs from the
/// initial occurrences visit every atom occurrence exactly once.
pub fn check_correspondence(
    d: &Derivation,
    g: &RoutingGraph,
    trace: &[TraceEvent],
) -> Result<CorrespondenceReport, MllError> {
    let p = translate_derivation(d);
    check_proof(&p)?;
    let m = MllMachine::new(&p);

    let all = p.atom_occurrences();
    let mut seen = HashSet::new();
    for o in m.initial() {
        for v in m.run_from(&o)? {
            if !seen.insert(v.clone()) {
                return Err(MllError::CorrespondenceViolation {
                    step: 0,
                    message: format!("atom occurrence {v} visited twice"),
                });
            }
        }
    }
    if seen.len() != all.len() {
        return Err(MllError::CorrespondenceViolation {
            step: 0,
            message: format!("{} of {} atom occurrences visited", seen.len(), all.len()),
        });
    }

    let project = |i: usize| project_occurrence(d, &p, g.occurrence(i)).expect("occurrence of d");
    let mut moves: Vec<(usize, usize, usize)> = Vec::new();
    for (k, ev) in trace.iter().enumerate() {
        match ev {
            TraceEvent::Move { from, to, .. } => moves.push((k, *from, *to)),
            TraceEvent::Fire { sync, .. } => {
                let node = &g.syncs()[*sync];
                moves.extend(node.inputs.iter().zip(&node.outputs).map(|(&i, &o)| (k, i, o)));
            }
        }
    }
    let mut mll_steps = 0;
    for (k, from, to) in moves {
        let (a, b) = (project(from), project(to));
        let run = m.run_from(&a)?;
        match run.iter().skip(1).position(|o| *o == b) {
            Some(n) => mll_steps += n + 1,
            None => {
                return Err(MllError::CorrespondenceViolation {
                    step: k,
                    message: format!(
                        "{} -> {} projects to {a} -> {b}, which the MLL run does not reach",
                        g.occurrence(from),
                        g.occurrence(to)
                    ),
                })
            }
        }
    }
    Ok(CorrespondenceReport { machine_steps: trace.len(), mll_steps, atoms: all.len(), cut_free: p.is_cut_free() })
}
