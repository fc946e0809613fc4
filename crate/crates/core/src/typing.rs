//! Linear type checking into explicit derivation trees, and the occurrence
//! machinery the token machine runs on.
//!
//! Derivations record one judgment `Γ ⊢ M : A` per node. Node ids are
//! assigned in pre-order starting from 0. Child environments list their
//! variables in the order of the parent environment; abstraction premises
//! append the bound variable(s) at the end.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::quantum::{GateLibrary, Register};
use crate::syntax::{Term, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("variable {0} used twice")]
    VariableUsedTwice(String),
    #[error("variable {0} is never used")]
    VariableUnused(String),
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: String, found: String },
    #[error("term of type {0} is applied as a function")]
    NonFunctionApplied(String),
    #[error("pair pattern applied to an argument of type {0}")]
    PairPatternOnNonTensor(String),
    #[error("unknown gate {0}")]
    UnknownGate(String),
    #[error("bit label {0} is used more than once")]
    DuplicateBitLabel(u32),
    #[error("environment lists {0} twice")]
    DuplicateEnvironmentEntry(String),
}

/// Ordered linear environment with distinct names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Env(Vec<(String, Type)>);

impl Env {
    pub fn new() -> Env {
        Env(Vec::new())
    }

    pub fn from_pairs(pairs: Vec<(String, Type)>) -> Result<Env, TypeError> {
        let mut seen = BTreeSet::new();
        for (x, _) in &pairs {
            if !seen.insert(x.clone()) {
                return Err(TypeError::DuplicateEnvironmentEntry(x.clone()));
            }
        }
        Ok(Env(pairs))
    }

    pub fn entries(&self) -> &[(String, Type)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|(x, _)| x == name)
    }

    pub fn get(&self, name: &str) -> Option<&Type> {
        self.0.iter().find(|(x, _)| x == name).map(|(_, t)| t)
    }

    pub(crate) fn push(&mut self, name: String, ty: Type) {
        debug_assert!(self.position(&name).is_none());
        self.0.push((name, ty));
    }

    /// Entries whose names occur in `names`, in this environment's order.
    pub(crate) fn restrict(&self, names: &[String]) -> Env {
        Env(self.0.iter().filter(|(x, _)| names.contains(x)).cloned().collect())
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}:{t}")?;
        }
        Ok(())
    }
}

/// Typing rule at a derivation node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// `x:A ⊢ x:A`
    Var,
    /// `⊢ |0> : B`
    Bit0,
    /// `⊢ |1> : B`
    Bit1,
    /// `⊢ U : B^n ⊸ B^n`
    Gate,
    /// `λx.M`
    LolliIntro,
    /// `λ<x,y>.M`
    LolliIntroPair,
    /// application
    LolliElim,
    /// `M ⊗ N`
    TensorIntro,
}

impl Rule {
    pub fn tag(self) -> &'static str {
        match self {
            Rule::Var => "a_v",
            Rule::Bit0 => "a_q0",
            Rule::Bit1 => "a_q1",
            Rule::Gate => "a_U",
            Rule::LolliIntro => "I_lolli1",
            Rule::LolliIntroPair => "I_lolli2",
            Rule::LolliElim => "E_lolli",
            Rule::TensorIntro => "I_tensor",
        }
    }
}

/// A typing derivation. See the module docs for id and environment order.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub id: usize,
    pub rule: Rule,
    pub env: Env,
    pub term: Term,
    pub ty: Type,
    pub children: Vec<Derivation>,
}

impl Derivation {
    /// Nodes in pre-order, so `nodes()[k].id == k`.
    pub fn nodes(&self) -> Vec<&Derivation> {
        let mut out = Vec::new();
        fn go<'a>(d: &'a Derivation, out: &mut Vec<&'a Derivation>) {
            out.push(d);
            for c in &d.children {
                go(c, out);
            }
        }
        go(self, &mut out);
        out
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Derivation::size).sum::<usize>()
    }

    /// Reassigns ids in pre-order starting at `start`; returns the next free id.
    pub fn renumber(&mut self, start: usize) -> usize {
        self.id = start;
        let mut next = start + 1;
        for c in &mut self.children {
            next = c.renumber(next);
        }
        next
    }

    /// Parent of every node, indexed by id (`None` for the root).
    pub fn parents(&self) -> Vec<Option<(usize, usize)>> {
        let mut out = vec![None; self.size()];
        fn go(d: &Derivation, out: &mut Vec<Option<(usize, usize)>>) {
            for (k, c) in d.children.iter().enumerate() {
                out[c.id] = Some((d.id, k));
                go(c, out);
            }
        }
        go(self, &mut out);
        out
    }

    /// Bit leaves in pre-order.
    pub fn bit_leaves(&self) -> Vec<&Derivation> {
        self.nodes()
            .into_iter()
            .filter(|d| matches!(d.rule, Rule::Bit0 | Rule::Bit1))
            .collect()
    }

    pub fn bit_count(&self) -> usize {
        self.bit_leaves().len()
    }

    /// Gate leaves in pre-order.
    pub fn gate_leaves(&self) -> Vec<&Derivation> {
        self.nodes().into_iter().filter(|d| d.rule == Rule::Gate).collect()
    }

    pub fn judgment(&self) -> String {
        if self.env.is_empty() {
            format!("⊢ {} : {}", self.term, self.ty)
        } else {
            format!("{} ⊢ {} : {}", self.env, self.term, self.ty)
        }
    }

    /// Indented rule tree, one judgment per line, conclusion first.
    pub fn render_tree(&self) -> String {
        let mut out = String::new();
        fn go(d: &Derivation, depth: usize, out: &mut String) {
            out.push_str(&"  ".repeat(depth));
            out.push_str(&format!("[{}] ({}) {}\n", d.id, d.rule.tag(), d.judgment()));
            for c in &d.children {
                go(c, depth + 1, out);
            }
        }
        go(self, 0, &mut out);
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "rule": self.rule.tag(),
            "env": self.env.entries().iter()
                .map(|(x, t)| json!({ "var": x, "type": t.to_string() }))
                .collect::<Vec<_>>(),
            "term": self.term.to_string(),
            "type": self.ty.to_string(),
            "children": self.children.iter().map(Derivation::to_json).collect::<Vec<_>>(),
        })
    }
}

// ---------------------------------------------------------------------------
// Inference

#[derive(Debug, Clone)]
enum Ty {
    Meta(usize),
    Qubit,
    Lolli(Box<Ty>, Box<Ty>),
    Tensor(Box<Ty>, Box<Ty>),
}

impl Ty {
    fn from_type(t: &Type) -> Ty {
        match t {
            Type::Qubit => Ty::Qubit,
            Type::Lolli(a, b) => Ty::Lolli(Box::new(Ty::from_type(a)), Box::new(Ty::from_type(b))),
            Type::Tensor(a, b) => Ty::Tensor(Box::new(Ty::from_type(a)), Box::new(Ty::from_type(b))),
        }
    }
}

#[derive(Default)]
struct Solver {
    subst: Vec<Option<Ty>>,
}

impl Solver {
    fn fresh(&mut self) -> Ty {
        self.subst.push(None);
        Ty::Meta(self.subst.len() - 1)
    }

    fn shallow(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Meta(m) = t {
            match &self.subst[m] {
                Some(s) => t = s.clone(),
                None => break,
            }
        }
        t
    }

    fn occurs(&self, m: usize, t: &Ty) -> bool {
        match self.shallow(t) {
            Ty::Meta(n) => n == m,
            Ty::Qubit => false,
            Ty::Lolli(a, b) | Ty::Tensor(a, b) => self.occurs(m, &a) || self.occurs(m, &b),
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> bool {
        match (self.shallow(a), self.shallow(b)) {
            (Ty::Meta(m), Ty::Meta(n)) if m == n => true,
            (Ty::Meta(m), t) | (t, Ty::Meta(m)) => {
                if self.occurs(m, &t) {
                    return false;
                }
                self.subst[m] = Some(t);
                true
            }
            (Ty::Qubit, Ty::Qubit) => true,
            (Ty::Lolli(a1, b1), Ty::Lolli(a2, b2)) | (Ty::Tensor(a1, b1), Ty::Tensor(a2, b2)) => {
                self.unify(&a1, &a2) && self.unify(&b1, &b2)
            }
            _ => false,
        }
    }

    /// Concrete type; unconstrained parts default to `B`.
    fn zonk(&self, t: &Ty) -> Type {
        match self.shallow(t) {
            Ty::Meta(_) | Ty::Qubit => Type::Qubit,
            Ty::Lolli(a, b) => Type::lolli(self.zonk(&a), self.zonk(&b)),
            Ty::Tensor(a, b) => Type::tensor(self.zonk(&a), self.zonk(&b)),
        }
    }

    fn show(&self, t: &Ty) -> String {
        match self.shallow(t) {
            Ty::Meta(m) => format!("?{m}"),
            Ty::Qubit => "B".into(),
            Ty::Lolli(a, b) => format!("({} ⊸ {})", self.show(&a), self.show(&b)),
            Ty::Tensor(a, b) => format!("({} ⊗ {})", self.show(&a), self.show(&b)),
        }
    }
}

struct Binding {
    name: String,
    ty: Ty,
    used: bool,
}

/// Inference tree mirroring the final derivation.
struct Node {
    rule: Rule,
    term: Term,
    ty: Ty,
    binders: Vec<(String, Ty)>,
    children: Vec<Node>,
}

struct Checker<'a> {
    gates: &'a GateLibrary,
    solver: Solver,
    scope: Vec<Binding>,
}

impl Checker<'_> {
    fn use_var(&mut self, x: &str) -> Result<Ty, TypeError> {
        let b = self
            .scope
            .iter_mut()
            .rev()
            .find(|b| b.name == x)
            .ok_or_else(|| TypeError::UnboundVariable(x.to_string()))?;
        if b.used {
            return Err(TypeError::VariableUsedTwice(x.to_string()));
        }
        b.used = true;
        Ok(b.ty.clone())
    }

    fn with_binders(
        &mut self,
        binders: &[(String, Ty)],
        body: &Term,
    ) -> Result<Node, TypeError> {
        for (x, t) in binders {
            self.scope.push(Binding { name: x.clone(), ty: t.clone(), used: false });
        }
        let node = self.infer(body)?;
        for (x, _) in binders.iter().rev() {
            let b = self.scope.pop().expect("scope underflow");
            if !b.used {
                return Err(TypeError::VariableUnused(x.clone()));
            }
        }
        Ok(node)
    }

    fn infer(&mut self, t: &Term) -> Result<Node, TypeError> {
        let leaf = |rule, ty| Node { rule, term: t.clone(), ty, binders: vec![], children: vec![] };
        match t {
            Term::Var(x) => {
                let ty = self.use_var(x)?;
                Ok(leaf(Rule::Var, ty))
            }
            Term::Bit { value, .. } => Ok(leaf(if *value { Rule::Bit1 } else { Rule::Bit0 }, Ty::Qubit)),
            Term::Gate(g) => {
                let arity = self.gates.arity(g).ok_or_else(|| TypeError::UnknownGate(g.clone()))?;
                Ok(leaf(Rule::Gate, Ty::from_type(&Type::gate(arity))))
            }
            Term::Tensor(a, b) => {
                let na = self.infer(a)?;
                let nb = self.infer(b)?;
                let ty = Ty::Tensor(Box::new(na.ty.clone()), Box::new(nb.ty.clone()));
                Ok(Node { rule: Rule::TensorIntro, term: t.clone(), ty, binders: vec![], children: vec![na, nb] })
            }
            Term::App(f, a) => {
                let nf = self.infer(f)?;
                let na = self.infer(a)?;
                let fty = self.solver.shallow(&nf.ty);
                let (dom, cod) = match fty {
                    Ty::Lolli(d, c) => (*d, *c),
                    Ty::Meta(_) => {
                        let (d, c) = (self.solver.fresh(), self.solver.fresh());
                        let arrow = Ty::Lolli(Box::new(d.clone()), Box::new(c.clone()));
                        self.solver.unify(&nf.ty, &arrow);
                        (d, c)
                    }
                    other => return Err(TypeError::NonFunctionApplied(self.solver.show(&other))),
                };
                if !self.solver.unify(&dom, &na.ty) {
                    let found = self.solver.shallow(&na.ty);
                    let dom_now = self.solver.shallow(&dom);
                    if matches!(**f, Term::LamPair(..))
                        && matches!(dom_now, Ty::Tensor(..))
                        && !matches!(found, Ty::Tensor(..) | Ty::Meta(_))
                    {
                        return Err(TypeError::PairPatternOnNonTensor(self.solver.show(&found)));
                    }
                    return Err(TypeError::TypeMismatch {
                        expected: self.solver.show(&dom),
                        found: self.solver.show(&na.ty),
                    });
                }
                Ok(Node { rule: Rule::LolliElim, term: t.clone(), ty: cod, binders: vec![], children: vec![nf, na] })
            }
            Term::Lam(x, body) => {
                let a = self.solver.fresh();
                let binders = vec![(x.clone(), a.clone())];
                let nb = self.with_binders(&binders, body)?;
                let ty = Ty::Lolli(Box::new(a), Box::new(nb.ty.clone()));
                Ok(Node { rule: Rule::LolliIntro, term: t.clone(), ty, binders, children: vec![nb] })
            }
            Term::LamPair(x, y, body) => {
                if x == y {
                    return Err(TypeError::VariableUsedTwice(x.clone()));
                }
                let (a, b) = (self.solver.fresh(), self.solver.fresh());
                let binders = vec![(x.clone(), a.clone()), (y.clone(), b.clone())];
                let nb = self.with_binders(&binders, body)?;
                let dom = Ty::Tensor(Box::new(a), Box::new(b));
                let ty = Ty::Lolli(Box::new(dom), Box::new(nb.ty.clone()));
                Ok(Node { rule: Rule::LolliIntroPair, term: t.clone(), ty, binders, children: vec![nb] })
            }
        }
    }

    fn build(&self, node: &Node, env: Env) -> Derivation {
        let ty = self.solver.zonk(&node.ty);
        let children = match node.rule {
            Rule::LolliIntro | Rule::LolliIntroPair => {
                let mut inner = env.clone();
                for (x, t) in &node.binders {
                    inner.push(x.clone(), self.solver.zonk(t));
                }
                vec![self.build(&node.children[0], inner)]
            }
            Rule::LolliElim | Rule::TensorIntro => node
                .children
                .iter()
                .map(|c| self.build(c, env.restrict(&c.term.free_vars())))
                .collect(),
            _ => vec![],
        };
        Derivation { id: 0, rule: node.rule, env, term: node.term.clone(), ty, children }
    }
}

/// Infers the derivation of `env ⊢ t : A`. Every environment variable must be
/// used exactly once; binder types that nothing constrains default to `B`.
pub fn typecheck(env: &Env, t: &Term, gates: &GateLibrary) -> Result<Derivation, TypeError> {
    let mut labels = BTreeSet::new();
    for l in t.bit_labels() {
        if !labels.insert(l) {
            return Err(TypeError::DuplicateBitLabel(l));
        }
    }
    let mut checker = Checker { gates, solver: Solver::default(), scope: Vec::new() };
    for (x, ty) in env.entries() {
        checker.scope.push(Binding { name: x.clone(), ty: Ty::from_type(ty), used: false });
    }
    let root = checker.infer(t)?;
    for b in &checker.scope {
        if !b.used {
            return Err(TypeError::VariableUnused(b.name.clone()));
        }
    }
    let mut d = checker.build(&root, env.clone());
    d.renumber(0);
    Ok(d)
}

/// Type checks a closed term.
pub fn typecheck_closed(t: &Term, gates: &GateLibrary) -> Result<Derivation, TypeError> {
    typecheck(&Env::new(), t, gates)
}

// ---------------------------------------------------------------------------
// Occurrences

/// One step from a type into an immediate subtype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    LolliLeft,
    LolliRight,
    TensorLeft,
    TensorRight,
}

/// Address of a `B` inside a type.
pub type TypePath = Vec<Step>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Positive,
    Negative,
}

/// Which type of a judgment an occurrence lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Conclusion,
    /// Index into the node's environment.
    Hypothesis(usize),
}

/// A `B` atom inside a judgment of a derivation.
///
/// Positive occurrences are the ones a token traverses towards the root of
/// the derivation; negative ones are traversed towards the leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occurrence {
    pub node: usize,
    pub slot: Slot,
    pub path: TypePath,
}

impl Occurrence {
    pub fn new(node: usize, slot: Slot, path: TypePath) -> Occurrence {
        Occurrence { node, slot, path }
    }

    pub fn polarity(&self) -> Polarity {
        let flips = self.path.iter().filter(|s| **s == Step::LolliLeft).count()
            + usize::from(matches!(self.slot, Slot::Hypothesis(_)));
        if flips % 2 == 1 {
            Polarity::Negative
        } else {
            Polarity::Positive
        }
    }
}

impl fmt::Display for Occurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slot {
            Slot::Conclusion => write!(f, "#{}:concl", self.node)?,
            Slot::Hypothesis(i) => write!(f, "#{}:hyp{}", self.node, i)?,
        }
        f.write_str("[")?;
        for s in &self.path {
            f.write_str(match s {
                Step::LolliLeft => "<",
                Step::LolliRight => ">",
                Step::TensorLeft => "l",
                Step::TensorRight => "r",
            })?;
        }
        f.write_str("]")
    }
}

/// Subtype at `path`, if the path is valid.
pub fn subtype<'a>(t: &'a Type, path: &[Step]) -> Option<&'a Type> {
    let Some((first, rest)) = path.split_first() else {
        return Some(t);
    };
    match (t, first) {
        (Type::Lolli(a, _), Step::LolliLeft) | (Type::Tensor(a, _), Step::TensorLeft) => subtype(a, rest),
        (Type::Lolli(_, b), Step::LolliRight) | (Type::Tensor(_, b), Step::TensorRight) => subtype(b, rest),
        _ => None,
    }
}

fn prefixed(step: Step, paths: Vec<TypePath>) -> Vec<TypePath> {
    paths
        .into_iter()
        .map(|mut p| {
            p.insert(0, step);
            p
        })
        .collect()
}

/// Positive `B` positions of `A`: tensors left then right; implications the
/// negatives of the domain then the positives of the codomain.
pub fn poccs(t: &Type) -> Vec<TypePath> {
    match t {
        Type::Qubit => vec![vec![]],
        Type::Tensor(a, b) => {
            let mut out = prefixed(Step::TensorLeft, poccs(a));
            out.extend(prefixed(Step::TensorRight, poccs(b)));
            out
        }
        Type::Lolli(a, b) => {
            let mut out = prefixed(Step::LolliLeft, noccs(a));
            out.extend(prefixed(Step::LolliRight, poccs(b)));
            out
        }
    }
}

/// Negative `B` positions of `A`, dual to [`poccs`].
pub fn noccs(t: &Type) -> Vec<TypePath> {
    match t {
        Type::Qubit => vec![],
        Type::Tensor(a, b) => {
            let mut out = prefixed(Step::TensorLeft, noccs(a));
            out.extend(prefixed(Step::TensorRight, noccs(b)));
            out
        }
        Type::Lolli(a, b) => {
            let mut out = prefixed(Step::LolliLeft, poccs(a));
            out.extend(prefixed(Step::LolliRight, noccs(b)));
            out
        }
    }
}

/// Every `B` position of `A`, left to right.
pub fn atom_paths(t: &Type) -> Vec<TypePath> {
    match t {
        Type::Qubit => vec![vec![]],
        Type::Lolli(a, b) => {
            let mut out = prefixed(Step::LolliLeft, atom_paths(a));
            out.extend(prefixed(Step::LolliRight, atom_paths(b)));
            out
        }
        Type::Tensor(a, b) => {
            let mut out = prefixed(Step::TensorLeft, atom_paths(a));
            out.extend(prefixed(Step::TensorRight, atom_paths(b)));
            out
        }
    }
}

/// Conclusion occurrences of the bit leaves, by increasing label.
pub fn bitocc(d: &Derivation) -> Vec<Occurrence> {
    sorted_bits(d)
        .into_iter()
        .map(|(_, _, id)| Occurrence::new(id, Slot::Conclusion, vec![]))
        .collect()
}

/// Basis state of the bit leaves, by increasing label.
pub fn bitval(d: &Derivation) -> Register {
    let bits: Vec<bool> = sorted_bits(d).into_iter().map(|(_, v, _)| v).collect();
    Register::basis(&bits)
}

fn sorted_bits(d: &Derivation) -> Vec<(u32, bool, usize)> {
    let mut bits: Vec<(u32, bool, usize)> = d
        .bit_leaves()
        .into_iter()
        .filter_map(|leaf| match leaf.term {
            Term::Bit { value, label } => Some((label, value, leaf.id)),
            _ => None,
        })
        .collect();
    bits.sort();
    bits
}

/// Every `B` atom of every judgment: per node in pre-order, hypotheses in
/// environment order, then the conclusion.
pub fn enumerate_occurrences(d: &Derivation) -> Vec<Occurrence> {
    let mut out = Vec::new();
    for node in d.nodes() {
        for (i, (_, t)) in node.env.entries().iter().enumerate() {
            for p in atom_paths(t) {
                out.push(Occurrence::new(node.id, Slot::Hypothesis(i), p));
            }
        }
        for p in atom_paths(&node.ty) {
            out.push(Occurrence::new(node.id, Slot::Conclusion, p));
        }
    }
    out
}

/// Dense numbering of the occurrences of a derivation.
#[derive(Debug, Clone)]
pub struct OccurrenceTable {
    list: Vec<Occurrence>,
    index: HashMap<Occurrence, usize>,
}

impl OccurrenceTable {
    pub fn new(d: &Derivation) -> OccurrenceTable {
        let list = enumerate_occurrences(d);
        let index = list.iter().cloned().enumerate().map(|(i, o)| (o, i)).collect();
        OccurrenceTable { list, index }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn get(&self, i: usize) -> &Occurrence {
        &self.list[i]
    }

    pub fn index_of(&self, o: &Occurrence) -> Option<usize> {
        self.index.get(o).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Occurrence> {
        self.list.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn check(src: &str) -> Result<Derivation, TypeError> {
        typecheck_closed(&parse(src).unwrap(), &GateLibrary::builtins())
    }

    fn b() -> Type {
        Type::Qubit
    }

    #[test]
    fn epr_type() {
        let d = check(r"\<x,y>. CNOT ((H x) * y)").unwrap();
        assert_eq!(d.ty, Type::lolli(Type::qubits(2), Type::qubits(2)));
        assert_eq!(d.rule, Rule::LolliIntroPair);
        assert_eq!(d.size(), 8);
    }

    #[test]
    fn epr_derivation_shape() {
        let d = check(r"\<x,y>. CNOT ((H x) * y)").unwrap();
        let rules: Vec<&str> = d.nodes().iter().map(|n| n.rule.tag()).collect();
        assert_eq!(rules, ["I_lolli2", "E_lolli", "a_U", "I_tensor", "E_lolli", "a_U", "a_v", "a_v"]);
        let premise = &d.children[0];
        assert_eq!(premise.env.to_string(), "x:B, y:B");
        assert_eq!(premise.children[1].env.to_string(), "x:B, y:B");
        assert_eq!(premise.children[1].children[0].env.to_string(), "x:B");
        for (k, n) in d.nodes().iter().enumerate() {
            assert_eq!(n.id, k);
        }
    }

    #[test]
    fn linearity_errors() {
        assert_eq!(check(r"\x. x * x"), Err(TypeError::VariableUsedTwice("x".into())));
        assert_eq!(check(r"\x. |0>"), Err(TypeError::VariableUnused("x".into())));
        assert_eq!(check("y"), Err(TypeError::UnboundVariable("y".into())));
        assert_eq!(check(r"\x. \x. x"), Err(TypeError::VariableUnused("x".into())));
    }

    #[test]
    fn gate_axiom() {
        let d = check("CNOT").unwrap();
        assert_eq!(d.ty, Type::gate(2));
        assert_eq!(d.rule, Rule::Gate);
        assert_eq!(check("FOO"), Err(TypeError::UnknownGate("FOO".into())));
    }

    #[test]
    fn application_errors() {
        assert!(matches!(check("|0> |1>"), Err(TypeError::NonFunctionApplied(_))));
        assert!(matches!(check("H (|0> * |1>)"), Err(TypeError::TypeMismatch { .. })));
        assert!(matches!(
            check(r"(\<x,y>. x * y) |0>"),
            Err(TypeError::PairPatternOnNonTensor(_))
        ));
        assert!(matches!(check(r"(\x. x) H |0> |1>"), Err(TypeError::NonFunctionApplied(_))));
    }

    #[test]
    fn unconstrained_binder_defaults_to_qubit() {
        let d = check(r"\x. x").unwrap();
        assert_eq!(d.ty, Type::lolli(b(), b()));
        let d = check(r"\f. f |0>").unwrap();
        assert_eq!(d.ty, Type::lolli(Type::lolli(b(), b()), b()));
    }

    #[test]
    fn open_terms() {
        let env = Env::from_pairs(vec![("x".into(), b()), ("y".into(), b())]).unwrap();
        let t = parse("y * x").unwrap();
        let d = typecheck(&env, &t, &GateLibrary::builtins()).unwrap();
        assert_eq!(d.children[0].env.to_string(), "y:B");
        let t = parse("x").unwrap();
        assert_eq!(
            typecheck(&env, &t, &GateLibrary::builtins()),
            Err(TypeError::VariableUnused("y".into()))
        );
        let env = Env::from_pairs(vec![("f".into(), b())]).unwrap();
        assert!(matches!(
            typecheck(&env, &parse("f |0>").unwrap(), &GateLibrary::builtins()),
            Err(TypeError::NonFunctionApplied(_))
        ));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let t = Term::tensor(Term::bit(false, 1), Term::bit(true, 1));
        assert_eq!(
            typecheck_closed(&t, &GateLibrary::builtins()),
            Err(TypeError::DuplicateBitLabel(1))
        );
    }

    #[test]
    fn poccs_of_b_lolli_bb() {
        let t = Type::lolli(b(), Type::qubits(2));
        assert_eq!(
            poccs(&t),
            vec![
                vec![Step::LolliRight, Step::TensorLeft],
                vec![Step::LolliRight, Step::TensorRight]
            ]
        );
        assert_eq!(poccs(&b()), vec![Vec::<Step>::new()]);
        assert!(noccs(&b()).is_empty());
    }

    #[test]
    fn noccs_examples() {
        let epr = Type::gate(2);
        assert_eq!(
            noccs(&epr),
            vec![
                vec![Step::LolliLeft, Step::TensorLeft],
                vec![Step::LolliLeft, Step::TensorRight]
            ]
        );
        assert_eq!(noccs(&Type::lolli(b(), b())), vec![vec![Step::LolliLeft]]);
    }

    #[test]
    fn bits_sorted_by_label() {
        let d = check("|0>_2 * |1>_1").unwrap();
        let occs = bitocc(&d);
        // Node 1 is the |0>_2 leaf, node 2 the |1>_1 leaf.
        assert_eq!(
            occs,
            vec![Occurrence::new(2, Slot::Conclusion, vec![]), Occurrence::new(1, Slot::Conclusion, vec![])]
        );
        assert_eq!(bitval(&d), Register::basis(&[true, false]));

        let epr = check(r"\<x,y>. CNOT ((H x) * y)").unwrap();
        assert!(bitocc(&epr).is_empty());
        assert_eq!(bitval(&epr), Register::empty());

        let one = check("|1>").unwrap();
        assert_eq!(bitocc(&one).len(), 1);
        assert_eq!(bitval(&one), Register::basis(&[true]));
    }

    #[test]
    fn occurrence_counts() {
        assert_eq!(enumerate_occurrences(&check(r"\<x,y>. CNOT ((H x) * y)").unwrap()).len(), 24);
        assert_eq!(enumerate_occurrences(&check("|0>").unwrap()).len(), 1);
        let env = Env::from_pairs(vec![("x".into(), b())]).unwrap();
        let d = typecheck(&env, &Term::var("x"), &GateLibrary::builtins()).unwrap();
        let occs = enumerate_occurrences(&d);
        assert_eq!(occs.len(), 2);
        assert_eq!(occs[0].polarity(), Polarity::Negative);
        assert_eq!(occs[1].polarity(), Polarity::Positive);
    }

    #[test]
    fn deterministic() {
        let a = check(r"\<x,y>. CNOT ((H x) * y)").unwrap();
        let b = check(r"\<x,y>. CNOT ((H x) * y)").unwrap();
        assert_eq!(a, b);
    }
}
