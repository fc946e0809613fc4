//! Abstract syntax of terms and types, the concrete text grammar, and a
//! generator of well-typed closed terms.
//!
//! Concrete grammar (`.qlam` files):
//!
//! ```text
//! term   ::= lambda | tensor
//! lambda ::= '\' ident '.' term | '\' '<' ident ',' ident '>' '.' term
//! tensor ::= app ('*' term)?            -- right associative
//! app    ::= atom+ lambda?              -- left associative
//! atom   ::= ident | Gate | bit | '(' term ')'
//! bit    ::= '|0>' | '|1>' followed by an optional '_' label
//! ```
//!
//! Variables start with a lowercase letter or `_`, gates with an uppercase
//! letter, so a variable can never shadow a gate. `--` starts a line comment.

mod generate;
mod parser;
mod printer;

use std::collections::BTreeSet;
use std::fmt;

pub use generate::{generate_term, generate_term_with, GenerateError, GeneratorConfig};
pub use parser::{parse, ParseError, Position};

/// A term of the calculus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Bit { value: bool, label: u32 },
    Gate(String),
    Tensor(Box<Term>, Box<Term>),
    App(Box<Term>, Box<Term>),
    Lam(String, Box<Term>),
    LamPair(String, String, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn bit(value: bool, label: u32) -> Term {
        Term::Bit { value, label }
    }

    pub fn gate(name: impl Into<String>) -> Term {
        Term::Gate(name.into())
    }

    pub fn tensor(left: Term, right: Term) -> Term {
        Term::Tensor(Box::new(left), Box::new(right))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    pub fn lam(var: impl Into<String>, body: Term) -> Term {
        Term::Lam(var.into(), Box::new(body))
    }

    pub fn lam_pair(left: impl Into<String>, right: impl Into<String>, body: Term) -> Term {
        Term::LamPair(left.into(), right.into(), Box::new(body))
    }

    /// Right-nested tensor of the given terms; panics on an empty list.
    pub fn tuple(mut items: Vec<Term>) -> Term {
        let mut acc = items.pop().expect("tuple of at least one term");
        while let Some(t) = items.pop() {
            acc = Term::tensor(t, acc);
        }
        acc
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) && !out.contains(x) {
                    out.push(x.clone());
                }
            }
            Term::Bit { .. } | Term::Gate(_) => {}
            Term::Tensor(a, b) | Term::App(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::Lam(x, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Term::LamPair(x, y, body) => {
                bound.push(x.clone());
                bound.push(y.clone());
                body.collect_free(bound, out);
                bound.pop();
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Bit labels in left-to-right order.
    pub fn bit_labels(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let Term::Bit { label, .. } = t {
                out.push(*label);
            }
        });
        out
    }

    /// Gate constants in left-to-right order, with repetitions.
    pub fn gate_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let Term::Gate(g) = t {
                out.push(g.clone());
            }
        });
        out
    }

    /// Every variable name appearing anywhere (bound or free).
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| match t {
            Term::Var(x) | Term::Lam(x, _) => {
                out.insert(x.clone());
            }
            Term::LamPair(x, y, _) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::Tensor(a, b) | Term::App(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::Lam(_, body) | Term::LamPair(_, _, body) => body.visit(f),
            _ => {}
        }
    }

    /// Nesting depth of the syntax tree; leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Bit { .. } | Term::Gate(_) => 1,
            Term::Tensor(a, b) | Term::App(a, b) => 1 + a.depth().max(b.depth()),
            Term::Lam(_, body) | Term::LamPair(_, _, body) => 1 + body.depth(),
        }
    }

    /// If this term is a (possibly nested) tensor of bit literals, its bits
    /// read left to right.
    pub fn as_bit_tuple(&self) -> Option<Vec<bool>> {
        match self {
            Term::Bit { value, .. } => Some(vec![*value]),
            Term::Tensor(a, b) => {
                let mut bits = a.as_bit_tuple()?;
                bits.extend(b.as_bit_tuple()?);
                Some(bits)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&printer::print(self))
    }
}

/// Linear types: qubits, linear implication and tensor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Qubit,
    Lolli(Box<Type>, Box<Type>),
    Tensor(Box<Type>, Box<Type>),
}

impl Type {
    pub fn lolli(a: Type, b: Type) -> Type {
        Type::Lolli(Box::new(a), Box::new(b))
    }

    pub fn tensor(a: Type, b: Type) -> Type {
        Type::Tensor(Box::new(a), Box::new(b))
    }

    /// `B^n`, nested to the right: `B ⊗ (B ⊗ B)`.
    pub fn qubits(n: usize) -> Type {
        assert!(n >= 1, "B^0 is not a type");
        let mut acc = Type::Qubit;
        for _ in 1..n {
            acc = Type::tensor(Type::Qubit, acc);
        }
        acc
    }

    /// `B^n ⊸ B^n`, the type of an arity-`n` gate.
    pub fn gate(arity: usize) -> Type {
        Type::lolli(Type::qubits(arity), Type::qubits(arity))
    }

    /// Number of `B` leaves.
    pub fn atom_count(&self) -> usize {
        match self {
            Type::Qubit => 1,
            Type::Lolli(a, b) | Type::Tensor(a, b) => a.atom_count() + b.atom_count(),
        }
    }

    /// True for tensors of qubits in any bracketing, including `B` itself.
    pub fn is_ground(&self) -> bool {
        match self {
            Type::Qubit => true,
            Type::Tensor(a, b) => a.is_ground() && b.is_ground(),
            Type::Lolli(..) => false,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // ⊗ binds tighter than ⊸; both associate to the right.
        fn go(t: &Type, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
            match t {
                Type::Qubit => f.write_str("B"),
                Type::Lolli(a, b) => {
                    if ctx > 0 {
                        f.write_str("(")?;
                    }
                    go(a, f, 1)?;
                    f.write_str(" ⊸ ")?;
                    go(b, f, 0)?;
                    if ctx > 0 {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
                Type::Tensor(a, b) => {
                    if ctx > 1 {
                        f.write_str("(")?;
                    }
                    go(a, f, 2)?;
                    f.write_str(" ⊗ ")?;
                    go(b, f, 1)?;
                    if ctx > 1 {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, f, 0)
    }
}

/// Pretty-prints a term in the concrete grammar. Labels are always written.
pub fn print(t: &Term) -> String {
    printer::print(t)
}
