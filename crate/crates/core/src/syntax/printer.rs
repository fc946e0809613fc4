use super::Term;

fn is_atom(t: &Term) -> bool {
    matches!(t, Term::Var(_) | Term::Bit { .. } | Term::Gate(_))
}

pub(super) fn print(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, &mut out);
    out
}

fn write_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Gate(g) => out.push_str(g),
        Term::Bit { value, label } => {
            out.push_str(if *value { "|1>_" } else { "|0>_" });
            out.push_str(&label.to_string());
        }
        Term::Lam(x, body) => {
            out.push('\\');
            out.push_str(x);
            out.push_str(". ");
            write_term(body, out);
        }
        Term::LamPair(x, y, body) => {
            out.push_str("\\<");
            out.push_str(x);
            out.push(',');
            out.push_str(y);
            out.push_str(">. ");
            write_term(body, out);
        }
        Term::App(f, a) => {
            match **f {
                Term::App(..) => write_term(f, out),
                _ => write_operand(f, out),
            }
            out.push(' ');
            write_operand(a, out);
        }
        Term::Tensor(l, r) => {
            write_operand(l, out);
            out.push_str(" * ");
            match **r {
                Term::Tensor(..) => write_term(r, out),
                _ => write_operand(r, out),
            }
        }
    }
}

fn write_operand(t: &Term, out: &mut String) {
    if is_atom(t) {
        write_term(t, out);
    } else {
        out.push('(');
        write_term(t, out);
        out.push(')');
    }
}
