//! Superposed derivations and the oriented equational theory: `beta`,
//! `beta.pair` and `quant` used as rewrites, closed under every context.
//!
//! Rewriting is done on the terms; each reduct gets its canonical
//! derivation back from [`typecheck`] against the original environment, and
//! the conclusion is required to be unchanged.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::quantum::{basis_index, format_amplitude, index_bits, GateLibrary, Register};
use crate::syntax::{Term, Type};
use crate::typing::{typecheck, Derivation, Env, TypeError};

/// Coefficients below this modulus are dropped.
pub const PRUNE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no normal form within {0} steps")]
    StepLimitExceeded(usize),
    #[error("reduct of {redex} does not keep its type: {message}")]
    IllTypedRedex { redex: String, message: String },
    #[error("not a sum of bit tuples: {0}")]
    NotGroundNormalForm(String),
    #[error("summands of a superposition must share environment and type")]
    MixedSummands,
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// One weighted derivation of a superposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Summand {
    pub coeff: Complex64,
    pub derivation: Derivation,
}

impl Summand {
    pub fn term(&self) -> &Term {
        &self.derivation.term
    }
}

/// A formal sum of derivations of one judgment `Γ ⊢ - : A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperposedTerm {
    env: Env,
    ty: Type,
    summands: Vec<Summand>,
}

impl SuperposedTerm {
    /// The single summand `1 · d`.
    pub fn from_derivation(d: Derivation) -> SuperposedTerm {
        SuperposedTerm {
            env: d.env.clone(),
            ty: d.ty.clone(),
            summands: vec![Summand { coeff: Complex64::new(1.0, 0.0), derivation: d }],
        }
    }

    pub fn from_summands(summands: Vec<Summand>) -> Result<SuperposedTerm, EvalError> {
        let first = summands.first().ok_or(EvalError::MixedSummands)?;
        let (env, ty) = (first.derivation.env.clone(), first.derivation.ty.clone());
        if summands.iter().any(|s| s.derivation.env != env || s.derivation.ty != ty) {
            return Err(EvalError::MixedSummands);
        }
        let mut s = SuperposedTerm { env, ty, summands };
        s.merge();
        Ok(s)
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn ty(&self) -> &Type {
        &self.ty
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    /// Sum of squared moduli of the coefficients.
    pub fn weight(&self) -> f64 {
        self.summands.iter().map(|s| s.coeff.norm_sqr()).sum()
    }

    pub fn is_normal(&self) -> bool {
        self.summands.iter().all(|s| find_redex(s.term(), Strategy::LeftmostInnermost).is_none())
    }

    /// Merges summands equal up to bit labels and bound names, and prunes
    /// vanishing coefficients.
    fn merge(&mut self) {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut out: Vec<Summand> = Vec::new();
        for s in self.summands.drain(..) {
            let key = shape_key(s.term());
            match index.get(&key) {
                Some(&i) => out[i].coeff += s.coeff,
                None => {
                    index.insert(key, out.len());
                    out.push(s);
                }
            }
        }
        out.retain(|s| s.coeff.norm() >= PRUNE_TOLERANCE);
        self.summands = out;
    }
}

impl fmt::Display for SuperposedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.summands.is_empty() {
            return f.write_str("0");
        }
        for (i, s) in self.summands.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{} · ({})", format_amplitude(s.coeff, 6), s.term())?;
        }
        Ok(())
    }
}

/// Which innermost redex a step fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    LeftmostInnermost,
    RightmostInnermost,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reduced {
    Step(SuperposedTerm),
    NormalForm,
}

/// Fires one innermost redex in every summand that has one.
pub fn reduce_once(s: &SuperposedTerm, gates: &GateLibrary, strategy: Strategy) -> Result<Reduced, EvalError> {
    let mut progressed = false;
    let mut out = Vec::new();
    for summand in &s.summands {
        let t = summand.term();
        let Some(path) = find_redex(t, strategy) else {
            out.push(summand.clone());
            continue;
        };
        progressed = true;
        let redex = subterm(t, &path);
        for (coeff, reduct) in contract(redex, t, gates)? {
            let term = replace_at(t, &path, reduct);
            let derivation = typecheck(&s.env, &term, gates).map_err(|e| EvalError::IllTypedRedex {
                redex: redex.to_string(),
                message: e.to_string(),
            })?;
            if derivation.ty != s.ty {
                return Err(EvalError::IllTypedRedex {
                    redex: redex.to_string(),
                    message: format!("type changed from {} to {}", s.ty, derivation.ty),
                });
            }
            out.push(Summand { coeff: summand.coeff * coeff, derivation });
        }
    }
    if !progressed {
        return Ok(Reduced::NormalForm);
    }
    let mut next = SuperposedTerm { env: s.env.clone(), ty: s.ty.clone(), summands: out };
    next.merge();
    Ok(Reduced::Step(next))
}

/// Reduces to normal form in at most `max_steps` steps.
pub fn normalize(
    s: &SuperposedTerm,
    gates: &GateLibrary,
    max_steps: usize,
    strategy: Strategy,
) -> Result<SuperposedTerm, EvalError> {
    normalize_traced(s, gates, max_steps, strategy, |_| {})
}

/// Like [`normalize`], calling `observe` on every intermediate sum.
pub fn normalize_traced(
    s: &SuperposedTerm,
    gates: &GateLibrary,
    max_steps: usize,
    strategy: Strategy,
    mut observe: impl FnMut(&SuperposedTerm),
) -> Result<SuperposedTerm, EvalError> {
    let mut current = s.clone();
    for _ in 0..=max_steps {
        match reduce_once(&current, gates, strategy)? {
            Reduced::NormalForm => return Ok(current),
            Reduced::Step(next) => {
                observe(&next);
                current = next;
            }
        }
    }
    Err(EvalError::StepLimitExceeded(max_steps))
}

/// Reads a sum of `⊗`-trees of bits as a state vector, left to right.
pub fn to_amplitude_vector(s: &SuperposedTerm) -> Result<Register, EvalError> {
    let mut width = None;
    let mut amps: Vec<Complex64> = Vec::new();
    for summand in &s.summands {
        let bits = bit_leaves(summand.term())
            .ok_or_else(|| EvalError::NotGroundNormalForm(summand.term().to_string()))?;
        let n = *width.get_or_insert(bits.len());
        if n != bits.len() {
            return Err(EvalError::NotGroundNormalForm("summands of different widths".into()));
        }
        if amps.is_empty() {
            amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        }
        amps[basis_index(&bits)] += summand.coeff;
    }
    let Some(n) = width else {
        return Err(EvalError::NotGroundNormalForm("empty sum".into()));
    };
    debug_assert_eq!(amps.len(), 1 << n);
    Register::from_raw(amps).map_err(|e| EvalError::NotGroundNormalForm(e.to_string()))
}

fn bit_leaves(t: &Term) -> Option<Vec<bool>> {
    match t {
        Term::Bit { value, .. } => Some(vec![*value]),
        Term::Tensor(a, b) => {
            let mut out = bit_leaves(a)?;
            out.extend(bit_leaves(b)?);
            Some(out)
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Redexes

fn children(t: &Term) -> Vec<&Term> {
    match t {
        Term::App(a, b) | Term::Tensor(a, b) => vec![a, b],
        Term::Lam(_, b) | Term::LamPair(_, _, b) => vec![b],
        _ => vec![],
    }
}

/// Path (child indices) to the innermost redex picked by `strategy`.
fn find_redex(t: &Term, strategy: Strategy) -> Option<Vec<usize>> {
    find_redex_with(t, strategy, &is_redex)
}

/// Well-typed gate arguments that are bit tuples have the gate's arity.
fn is_redex(t: &Term) -> bool {
    match t {
        Term::App(f, a) => match (&**f, &**a) {
            (Term::Lam(..), _) => true,
            (Term::LamPair(..), Term::Tensor(..)) => true,
            (Term::Gate(_), arg) => arg.as_bit_tuple().is_some(),
            _ => false,
        },
        _ => false,
    }
}

fn find_redex_with(t: &Term, strategy: Strategy, pred: &dyn Fn(&Term) -> bool) -> Option<Vec<usize>> {
    let kids = children(t);
    let order: Vec<usize> = match strategy {
        Strategy::LeftmostInnermost => (0..kids.len()).collect(),
        Strategy::RightmostInnermost => (0..kids.len()).rev().collect(),
    };
    for i in order {
        if let Some(mut p) = find_redex_with(kids[i], strategy, pred) {
            p.insert(0, i);
            return Some(p);
        }
    }
    pred(t).then(Vec::new)
}

fn subterm<'a>(t: &'a Term, path: &[usize]) -> &'a Term {
    match path.split_first() {
        None => t,
        Some((&i, rest)) => subterm(children(t)[i], rest),
    }
}

fn replace_at(t: &Term, path: &[usize], new: Term) -> Term {
    let Some((&i, rest)) = path.split_first() else {
        return new;
    };
    match (t, i) {
        (Term::App(a, b), 0) => Term::app(replace_at(a, rest, new), (**b).clone()),
        (Term::App(a, b), _) => Term::app((**a).clone(), replace_at(b, rest, new)),
        (Term::Tensor(a, b), 0) => Term::tensor(replace_at(a, rest, new), (**b).clone()),
        (Term::Tensor(a, b), _) => Term::tensor((**a).clone(), replace_at(b, rest, new)),
        (Term::Lam(x, b), _) => Term::lam(x.clone(), replace_at(b, rest, new)),
        (Term::LamPair(x, y, b), _) => Term::lam_pair(x.clone(), y.clone(), replace_at(b, rest, new)),
        _ => unreachable!("path leads into a leaf"),
    }
}

/// Contracts a redex; `whole` is the enclosing summand, used to pick fresh
/// bit labels.
fn contract(redex: &Term, whole: &Term, gates: &GateLibrary) -> Result<Vec<(Complex64, Term)>, EvalError> {
    let one = Complex64::new(1.0, 0.0);
    let ill = |message: &str| EvalError::IllTypedRedex { redex: redex.to_string(), message: message.into() };
    let Term::App(f, a) = redex else { return Err(ill("not an application")) };
    match (&**f, &**a) {
        (Term::Lam(x, body), arg) => Ok(vec![(one, substitute(body, x, arg))]),
        (Term::LamPair(x, y, body), Term::Tensor(l, r)) => {
            let mut avoid = body.all_names();
            avoid.extend(l.all_names());
            avoid.extend(r.all_names());
            let x2 = fresh_name(x, &avoid);
            avoid.insert(x2.clone());
            let y2 = fresh_name(y, &avoid);
            let body = substitute(&substitute(body, x, &Term::var(x2.clone())), y, &Term::var(y2.clone()));
            Ok(vec![(one, substitute(&substitute(&body, &x2, l), &y2, r))])
        }
        (Term::Gate(g), arg) => {
            let gate = gates.get(g).ok_or_else(|| ill("unknown gate"))?;
            let bits = arg.as_bit_tuple().ok_or_else(|| ill("argument is not a bit tuple"))?;
            if bits.len() != gate.arity() {
                return Err(ill("gate applied to the wrong number of bits"));
            }
            let col = basis_index(&bits);
            let base = whole.bit_labels().into_iter().max().unwrap_or(0);
            let mut out = Vec::new();
            for row in 0..gate.dim() {
                let c = gate.entry(row, col);
                if c.norm() < PRUNE_TOLERANCE {
                    continue;
                }
                let items = index_bits(row, gate.arity())
                    .into_iter()
                    .enumerate()
                    .map(|(k, b)| Term::bit(b, base + 1 + k as u32))
                    .collect();
                out.push((c, Term::tuple(items)));
            }
            Ok(out)
        }
        _ => Err(ill("not a redex")),
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (1..).map(|k| format!("{stem}{k}")).find(|n| !avoid.contains(n)).expect("infinitely many names")
}

/// Capture-avoiding `m[n/x]`.
pub fn substitute(m: &Term, x: &str, n: &Term) -> Term {
    match m {
        Term::Var(y) if y == x => n.clone(),
        Term::Var(_) | Term::Bit { .. } | Term::Gate(_) => m.clone(),
        Term::App(a, b) => Term::app(substitute(a, x, n), substitute(b, x, n)),
        Term::Tensor(a, b) => Term::tensor(substitute(a, x, n), substitute(b, x, n)),
        Term::Lam(y, body) => {
            if y == x {
                return m.clone();
            }
            let (y, body) = avoid_capture(y, body, x, n);
            Term::lam(y, substitute(&body, x, n))
        }
        Term::LamPair(y, z, body) => {
            if y == x || z == x {
                return m.clone();
            }
            let (y, body) = avoid_capture(y, body, x, n);
            let (z, body) = avoid_capture(z, &body, x, n);
            Term::lam_pair(y, z, substitute(&body, x, n))
        }
    }
}

fn avoid_capture(binder: &str, body: &Term, x: &str, n: &Term) -> (String, Term) {
    if !n.free_vars().iter().any(|v| v == binder) {
        return (binder.to_string(), body.clone());
    }
    let mut avoid = body.all_names();
    avoid.extend(n.all_names());
    avoid.insert(x.to_string());
    let fresh = fresh_name(binder, &avoid);
    let body = substitute(body, binder, &Term::var(fresh.clone()));
    (fresh, body)
}

/// Structure of a term with bit labels dropped and bound variables numbered
/// by binding order.
fn shape_key(t: &Term) -> String {
    fn go(t: &Term, bound: &mut Vec<(String, usize)>, next: &mut usize, out: &mut String) {
        match t {
            Term::Var(x) => match bound.iter().rev().find(|(y, _)| y == x) {
                Some((_, k)) => out.push_str(&format!("#{k}")),
                None => out.push_str(x),
            },
            Term::Bit { value, .. } => out.push_str(if *value { "1" } else { "0" }),
            Term::Gate(g) => out.push_str(g),
            Term::App(a, b) | Term::Tensor(a, b) => {
                out.push(if matches!(t, Term::App(..)) { '@' } else { '*' });
                out.push('(');
                go(a, bound, next, out);
                out.push(',');
                go(b, bound, next, out);
                out.push(')');
            }
            Term::Lam(x, b) => {
                bound.push((x.clone(), *next));
                *next += 1;
                out.push_str("L(");
                go(b, bound, next, out);
                out.push(')');
                bound.pop();
            }
            Term::LamPair(x, y, b) => {
                bound.push((x.clone(), *next));
                bound.push((y.clone(), *next + 1));
                *next += 2;
                out.push_str("P(");
                go(b, bound, next, out);
                out.push(')');
                bound.pop();
                bound.pop();
            }
        }
    }
    let mut out = String::new();
    go(t, &mut Vec::new(), &mut 0, &mut out);
    out
}

/// Normalizes a closed ground term to a state vector.
pub fn evaluate(t: &Term, gates: &GateLibrary, max_steps: usize) -> Result<Register, EvalError> {
    let d = typecheck(&Env::new(), t, gates)?;
    let nf = normalize(&SuperposedTerm::from_derivation(d), gates, max_steps, Strategy::default())?;
    to_amplitude_vector(&nf)
}
