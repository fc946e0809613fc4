use std::collections::BTreeSet;

use num_complex::Complex64;
use proptest::prelude::*;

use qlam::equational::{
    normalize, reduce_once, substitute, to_amplitude_vector, Reduced, Strategy as Order, SuperposedTerm,
};
use qlam::machine::{build_routing, run, Scheduler, TraceEvent};
use qlam::mll::{translate_type, Dir, MllFormula};
use qlam::quantum::{GateLibrary, Permutation, Register};
use qlam::syntax::{generate_term_with, parse, print, GeneratorConfig, Term, Type};
use qlam::typing::{
    atom_paths, noccs, poccs, typecheck, typecheck_closed, Env, Occurrence, Polarity, Slot, Step,
};

fn term(seed: u64, ground: bool) -> Term {
    let mut cfg = GeneratorConfig::new(seed, 8, 6);
    cfg.ground_only = ground;
    generate_term_with(&cfg).unwrap()
}

fn arb_type() -> impl Strategy<Value = Type> {
    Just(Type::Qubit).prop_recursive(5, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::lolli(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Type::tensor(a, b)),
        ]
    })
}

fn arb_register_of(n: usize) -> impl Strategy<Value = Register> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("zero vector", |raw| {
        let amps: Vec<Complex64> = raw.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| Register::new(amps.into_iter().map(|a| a / norm).collect()).unwrap())
    })
}

fn arb_register(max_qubits: usize) -> impl Strategy<Value = Register> {
    (0..=max_qubits).prop_flat_map(arb_register_of)
}

fn arb_permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((1..=n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|images| Permutation::from_images(&images).unwrap())
}

/// Polarity by walking the type with a sign flag, independent of path counting.
fn signed_atoms(t: &Type, positive: bool, prefix: Vec<Step>, out: &mut Vec<(Vec<Step>, bool)>) {
    match t {
        Type::Qubit => out.push((prefix, positive)),
        Type::Lolli(a, b) => {
            let mut l = prefix.clone();
            l.push(Step::LolliLeft);
            signed_atoms(a, !positive, l, out);
            let mut r = prefix;
            r.push(Step::LolliRight);
            signed_atoms(b, positive, r, out);
        }
        Type::Tensor(a, b) => {
            let mut l = prefix.clone();
            l.push(Step::TensorLeft);
            signed_atoms(a, positive, l, out);
            let mut r = prefix;
            r.push(Step::TensorRight);
            signed_atoms(b, positive, r, out);
        }
    }
}

fn dirs(path: &[Step]) -> Vec<Dir> {
    path.iter()
        .map(|s| match s {
            Step::LolliLeft | Step::TensorLeft => Dir::Left,
            Step::LolliRight | Step::TensorRight => Dir::Right,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>(), ground in any::<bool>()) {
        let t = term(seed, ground);
        prop_assert_eq!(parse(&print(&t)).unwrap(), t);
    }

    #[test]
    fn generated_terms_typecheck_deterministically(seed in any::<u64>()) {
        let t = term(seed, false);
        let lib = GateLibrary::builtins();
        let d = typecheck_closed(&t, &lib).unwrap();
        prop_assert_eq!(d, typecheck_closed(&t, &lib).unwrap());
        let labels = t.bit_labels();
        prop_assert_eq!(labels.iter().collect::<BTreeSet<_>>().len(), labels.len());
    }

    #[test]
    fn polarity_matches_sign_flag(t in arb_type()) {
        let mut oracle = Vec::new();
        signed_atoms(&t, true, Vec::new(), &mut oracle);
        prop_assert!(oracle.len() <= 64);
        for (path, positive) in oracle {
            let concl = Occurrence { node: 0, slot: Slot::Conclusion, path: path.clone() };
            let hyp = Occurrence { node: 0, slot: Slot::Hypothesis(0), path };
            let expect = if positive { Polarity::Positive } else { Polarity::Negative };
            prop_assert_eq!(concl.polarity(), expect);
            prop_assert_ne!(hyp.polarity(), expect);
        }
    }

    #[test]
    fn poccs_noccs_partition_atoms(t in arb_type()) {
        let p = poccs(&t);
        let n = noccs(&t);
        let all = atom_paths(&t);
        prop_assert_eq!(p.len() + n.len(), t.atom_count());
        prop_assert_eq!(all.len(), t.atom_count());
        let ps: BTreeSet<_> = p.iter().cloned().collect();
        let ns: BTreeSet<_> = n.iter().cloned().collect();
        prop_assert!(ps.is_disjoint(&ns));
        prop_assert_eq!(ps.union(&ns).cloned().collect::<BTreeSet<_>>(), all.into_iter().collect());
        // Positive atoms of A are exactly the unnegated atoms of its translation.
        let f = translate_type(&t);
        for path in &p {
            prop_assert!(matches!(f.at(&dirs(path)), Some(MllFormula::Atom(_))));
        }
        for path in &n {
            prop_assert!(matches!(f.at(&dirs(path)), Some(MllFormula::NegAtom(_))));
        }
    }

    #[test]
    fn negation_is_an_involution(t in arb_type()) {
        let f = translate_type(&t);
        prop_assert_eq!(f.neg().neg(), f.clone());
        for path in f.atom_paths() {
            prop_assert_eq!(f.neg().at(&path).cloned(), f.at(&path).map(MllFormula::neg));
        }
    }

    #[test]
    fn lifted_gates_preserve_norm(
        r in arb_register(5),
        pick in any::<prop::sample::Index>(),
        wires_seed in any::<u64>(),
    ) {
        let lib = GateLibrary::builtins();
        let gates: Vec<_> = lib.iter().filter(|g| g.arity() <= r.qubit_count()).collect();
        prop_assume!(!gates.is_empty());
        let g = gates[pick.index(gates.len())];
        let mut wires: Vec<usize> = (1..=r.qubit_count()).collect();
        let n = wires.len();
        for i in (1..n).rev() {
            wires.swap(i, (wires_seed as usize >> (i % 16)) % (i + 1));
        }
        wires.truncate(g.arity());
        let out = r.apply_lifted(g, &wires).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn permutations_compose_and_invert(
        (r, p, q) in (1usize..=5).prop_flat_map(|n| (arb_register_of(n), arb_permutation(n), arb_permutation(n)))
    ) {
        let back = r.apply_permutation(&p).unwrap().apply_permutation(&p.inverse()).unwrap();
        prop_assert!(back.approx_eq(&r, 1e-12));
        prop_assert!(p.compose(&p.inverse()).is_identity());
        let stepwise = r.apply_permutation(&q).unwrap().apply_permutation(&p).unwrap();
        let composed = r.apply_permutation(&p.compose(&q)).unwrap();
        prop_assert!(stepwise.approx_eq(&composed, 1e-12));
        prop_assert!((composed.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tensor_is_associative(a in arb_register(2), b in arb_register(2), c in arb_register(2)) {
        let left = a.tensor(&b).tensor(&c);
        let right = a.tensor(&b.tensor(&c));
        prop_assert!(left.approx_eq(&right, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_conserves_squared_modulus(seed in any::<u64>()) {
        let lib = GateLibrary::builtins();
        let d = typecheck_closed(&term(seed, true), &lib).unwrap();
        let mut s = SuperposedTerm::from_derivation(d);
        for _ in 0..10_000 {
            match reduce_once(&s, &lib, Order::LeftmostInnermost).unwrap() {
                Reduced::Step(next) => {
                    prop_assert!((next.weight() - 1.0).abs() < 1e-9, "weight {} at {}", next.weight(), next);
                    s = next;
                }
                Reduced::NormalForm => break,
            }
        }
        prop_assert!(s.is_normal());
    }

    #[test]
    fn strategies_agree(seed in any::<u64>()) {
        let lib = GateLibrary::builtins();
        let s = SuperposedTerm::from_derivation(typecheck_closed(&term(seed, true), &lib).unwrap());
        let left = normalize(&s, &lib, 10_000, Order::LeftmostInnermost).unwrap();
        let right = normalize(&s, &lib, 10_000, Order::RightmostInnermost).unwrap();
        let (l, r) = (to_amplitude_vector(&left).unwrap(), to_amplitude_vector(&right).unwrap());
        prop_assert!(l.approx_eq(&r, 1e-9));
    }

    #[test]
    fn beta_reducts_keep_their_type(seed in any::<u64>()) {
        let lib = GateLibrary::builtins();
        let t = term(seed, false);
        let ty = typecheck_closed(&t, &lib).unwrap().ty;
        let mut redexes = Vec::new();
        t.visit(&mut |s| {
            if let Term::App(f, n) = s {
                if let Term::Lam(x, m) = f.as_ref() {
                    redexes.push((s.clone(), substitute(m, x, n)));
                }
            }
        });
        for (redex, reduct) in redexes {
            let mut replaced = false;
            let whole = replace_first(&t, &redex, &reduct, &mut replaced);
            prop_assert!(replaced);
            let d = typecheck(&Env::new(), &whole, &lib).unwrap();
            prop_assert_eq!(&d.ty, &ty);
        }
    }

    #[test]
    fn tokens_visit_each_occurrence_once(seed in any::<u64>(), schedule in any::<u64>()) {
        let lib = GateLibrary::builtins();
        let d = typecheck_closed(&term(seed, false), &lib).unwrap();
        let g = build_routing(&d);
        let input = Register::basis(&vec![true; g.input_count()]);
        let r = run(&d, &input, &lib, &mut Scheduler::random(schedule)).unwrap();
        let mut visited: BTreeSet<usize> = g.initial().iter().copied().collect();
        let mut fired = vec![0; g.syncs().len()];
        for e in &r.trace {
            match e {
                TraceEvent::Move { to, .. } => prop_assert!(visited.insert(*to)),
                TraceEvent::Fire { sync, .. } => {
                    fired[*sync] += 1;
                    for o in &g.syncs()[*sync].outputs {
                        prop_assert!(visited.insert(*o));
                    }
                }
            }
        }
        prop_assert!(fired.iter().all(|&k| k == 1));
        prop_assert!((r.output.norm() - 1.0).abs() < 1e-9);
    }
}

/// Replaces the first subterm equal to `from`, in pre-order.
fn replace_first(t: &Term, from: &Term, to: &Term, done: &mut bool) -> Term {
    if *done {
        return t.clone();
    }
    if t == from {
        *done = true;
        return to.clone();
    }
    match t {
        Term::Var(_) | Term::Bit { .. } | Term::Gate(_) => t.clone(),
        Term::Tensor(a, b) => {
            let a = replace_first(a, from, to, done);
            Term::tensor(a, replace_first(b, from, to, done))
        }
        Term::App(a, b) => {
            let a = replace_first(a, from, to, done);
            Term::app(a, replace_first(b, from, to, done))
        }
        Term::Lam(x, m) => Term::lam(x.clone(), replace_first(m, from, to, done)),
        Term::LamPair(x, y, m) => Term::lam_pair(x.clone(), y.clone(), replace_first(m, from, to, done)),
    }
}
