use std::fmt;

use super::Formula;

// Binding strength; a child weaker than its slot requires is parenthesised.
const QUANT: u8 = 0;
const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 5;

fn strength(f: &Formula) -> u8 {
    match f {
        Formula::Exists(..) | Formula::Forall(..) | Formula::ExistsSet(..) | Formula::ForallSet(..) => QUANT,
        Formula::Iff(..) => IFF,
        Formula::Implies(..) => IMPLIES,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        _ => UNARY,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, min: u8) -> fmt::Result {
    if strength(child) < min {
        write!(f, "(")?;
        write_formula(f, child)?;
        write!(f, ")")
    } else {
        write_formula(f, child)
    }
}

fn write_binary(f: &mut fmt::Formatter<'_>, a: &Formula, op: &str, b: &Formula, left: u8, right: u8) -> fmt::Result {
    write_child(f, a, left)?;
    write!(f, " {op} ")?;
    write_child(f, b, right)
}

fn write_formula(f: &mut fmt::Formatter<'_>, phi: &Formula) -> fmt::Result {
    use Formula::*;
    match phi {
        True => f.write_str("true"),
        False => f.write_str("false"),
        Label(a, x) => write!(f, "{a}({x})"),
        Source(x) => write!(f, "s({x})"),
        Target(x) => write!(f, "t({x})"),
        Letter(l, x) => write!(f, "L\"{l}\"({x})"),
        Less(x, y) => write!(f, "{x} < {y}"),
        EventOrder(x, y) => write!(f, "{x} ~> {y}"),
        Equal(x, y) => write!(f, "{x} = {y}"),
        Succ(x, y) => write!(f, "{x} -> {y}"),
        In(x, s) => write!(f, "{x} in {s}"),
        Not(a) => {
            f.write_str("!")?;
            write_child(f, a, UNARY)
        }
        And(a, b) => write_binary(f, a, "&", b, AND, UNARY),
        Or(a, b) => write_binary(f, a, "|", b, OR, AND),
        Implies(a, b) => write_binary(f, a, "->", b, OR, IMPLIES),
        Iff(a, b) => write_binary(f, a, "<->", b, IMPLIES, IMPLIES),
        Exists(x, a) | ExistsSet(x, a) => {
            write!(f, "exists {x}. ")?;
            write_formula(f, a)
        }
        Forall(x, a) | ForallSet(x, a) => {
            write!(f, "forall {x}. ")?;
            write_formula(f, a)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self)
    }
}
