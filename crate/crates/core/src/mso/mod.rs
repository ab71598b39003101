//! Monadic second-order logic over ipomsets and over step words.
//!
//! One abstract syntax serves both signatures. Over ipomsets the atoms are
//! labels `a(x)`, interface predicates `s(x)`/`t(x)`, precedence `x < y` and
//! event order `x ~> y`; over words they are letter atoms `L"[..]"(x)` and
//! the position order. Equality, successor and membership are shared.
//! Variables starting with an uppercase letter are second-order.

mod dpll;
mod eval;
mod parse;
mod print;
mod program;

pub(crate) use program::{Node, NodeId, Program, VarId};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ipomset::Label;
use crate::steps::StepLetter;

pub use eval::{eval_ipomset, eval_word, eval_word_over, CompiledFormula, EvalError, EvalOptions, Valuation};
pub use parse::{parse_formula, ParseError};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Label(Label, String),
    Source(String),
    Target(String),
    Letter(StepLetter, String),
    Less(String, String),
    EventOrder(String, String),
    Equal(String, String),
    /// `x -> y`: `x < y` with nothing in between.
    Succ(String, String),
    In(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    ExistsSet(String, Box<Formula>),
    ForallSet(String, Box<Formula>),
}

/// Which vocabulary a formula speaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signature {
    IPomset,
    Word,
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Signature::IPomset => "ipomset",
            Signature::Word => "word",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("atom {atom} does not belong to the {signature} signature")]
    WrongSignature { atom: String, signature: Signature },
    #[error("variable {0} is bound twice in one scope")]
    Rebound(String),
    #[error("variable {name} used with the wrong sort")]
    BadSort { name: String },
}

pub fn is_set_variable(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_uppercase())
}

impl Formula {
    pub fn label(a: &str, x: &str) -> Formula {
        Formula::Label(Label::new(a), x.into())
    }

    pub fn source(x: &str) -> Formula {
        Formula::Source(x.into())
    }

    pub fn target(x: &str) -> Formula {
        Formula::Target(x.into())
    }

    pub fn letter(l: &StepLetter, x: &str) -> Formula {
        Formula::Letter(l.clone(), x.into())
    }

    pub fn less(x: &str, y: &str) -> Formula {
        Formula::Less(x.into(), y.into())
    }

    pub fn event_order(x: &str, y: &str) -> Formula {
        Formula::EventOrder(x.into(), y.into())
    }

    pub fn equal(x: &str, y: &str) -> Formula {
        Formula::Equal(x.into(), y.into())
    }

    pub fn succ(x: &str, y: &str) -> Formula {
        Formula::Succ(x.into(), y.into())
    }

    pub fn member(x: &str, set: &str) -> Formula {
        Formula::In(x.into(), set.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn and_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn or_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    pub fn exists(x: &str, f: Formula) -> Formula {
        Formula::Exists(x.into(), Box::new(f))
    }

    pub fn forall(x: &str, f: Formula) -> Formula {
        Formula::Forall(x.into(), Box::new(f))
    }

    pub fn exists_set(x: &str, f: Formula) -> Formula {
        Formula::ExistsSet(x.into(), Box::new(f))
    }

    pub fn forall_set(x: &str, f: Formula) -> Formula {
        Formula::ForallSet(x.into(), Box::new(f))
    }

    /// Quantifies the first-order variables in order, outermost first.
    pub fn exists_many<S: AsRef<str>>(vars: &[S], f: Formula) -> Formula {
        vars.iter().rev().fold(f, |acc, v| Formula::exists(v.as_ref(), acc))
    }

    pub fn forall_many<S: AsRef<str>>(vars: &[S], f: Formula) -> Formula {
        vars.iter().rev().fold(f, |acc, v| Formula::forall(v.as_ref(), acc))
    }

    pub fn exists_sets<S: AsRef<str>>(vars: &[S], f: Formula) -> Formula {
        vars.iter().rev().fold(f, |acc, v| Formula::exists_set(v.as_ref(), acc))
    }

    pub fn forall_sets<S: AsRef<str>>(vars: &[S], f: Formula) -> Formula {
        vars.iter().rev().fold(f, |acc, v| Formula::forall_set(v.as_ref(), acc))
    }

    /// Free first-order and second-order variables.
    pub fn free_vars(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut fo = BTreeSet::new();
        let mut so = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut fo, &mut so);
        (fo, so)
    }

    fn collect_free(&self, bound: &mut Vec<String>, fo: &mut BTreeSet<String>, so: &mut BTreeSet<String>) {
        use Formula::*;
        let mut fo_use = |x: &String, bound: &Vec<String>| {
            if !bound.contains(x) {
                fo.insert(x.clone());
            }
        };
        match self {
            True | False => {}
            Label(_, x) | Source(x) | Target(x) | Letter(_, x) => fo_use(x, bound),
            Less(x, y) | EventOrder(x, y) | Equal(x, y) | Succ(x, y) => {
                fo_use(x, bound);
                fo_use(y, bound);
            }
            In(x, s) => {
                fo_use(x, bound);
                if !bound.contains(s) {
                    so.insert(s.clone());
                }
            }
            Not(f) => f.collect_free(bound, fo, so),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                a.collect_free(bound, fo, so);
                b.collect_free(bound, fo, so);
            }
            Exists(x, f) | Forall(x, f) | ExistsSet(x, f) | ForallSet(x, f) => {
                bound.push(x.clone());
                f.collect_free(bound, fo, so);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        let (fo, so) = self.free_vars();
        fo.is_empty() && so.is_empty()
    }

    /// Labels mentioned by label atoms.
    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Label(a, _) = f {
                out.insert(a.clone());
            }
        });
        out
    }

    /// Letters mentioned by letter atoms.
    pub fn letters(&self) -> BTreeSet<StepLetter> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Letter(l, _) = f {
                out.insert(l.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut dyn FnMut(&Formula)) {
        use Formula::*;
        f(self);
        match self {
            Not(a) | Exists(_, a) | Forall(_, a) | ExistsSet(_, a) | ForallSet(_, a) => a.visit(f),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Checks that every atom belongs to `signature`.
    pub fn check_signature(&self, signature: Signature) -> Result<(), SortError> {
        let mut err = None;
        self.visit(&mut |f| {
            if err.is_some() {
                return;
            }
            let foreign = match (f, signature) {
                (Formula::Label(..) | Formula::Source(_) | Formula::Target(_) | Formula::EventOrder(..), Signature::Word) => true,
                (Formula::Letter(..), Signature::IPomset) => true,
                _ => false,
            };
            if foreign {
                let atom = match f {
                    Formula::Label(a, x) => format!("{a}({x})"),
                    other => other.to_string(),
                };
                err = Some(SortError::WrongSignature { atom, signature });
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// Checks variable sorts against capitalisation and that no variable is
    /// rebound inside its own scope.
    pub fn check_scopes(&self) -> Result<(), SortError> {
        fn go(f: &Formula, bound: &mut Vec<String>) -> Result<(), SortError> {
            use Formula::*;
            let fo = |x: &String| {
                if is_set_variable(x) {
                    Err(SortError::BadSort { name: x.clone() })
                } else {
                    Ok(())
                }
            };
            match f {
                True | False => Ok(()),
                Label(_, x) | Source(x) | Target(x) | Letter(_, x) => fo(x),
                Less(x, y) | EventOrder(x, y) | Equal(x, y) | Succ(x, y) => fo(x).and(fo(y)),
                In(x, s) => {
                    fo(x)?;
                    if is_set_variable(s) {
                        Ok(())
                    } else {
                        Err(SortError::BadSort { name: s.clone() })
                    }
                }
                Not(a) => go(a, bound),
                And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                    go(a, bound)?;
                    go(b, bound)
                }
                Exists(x, a) | Forall(x, a) | ExistsSet(x, a) | ForallSet(x, a) => {
                    let set = matches!(f, ExistsSet(..) | ForallSet(..));
                    if set != is_set_variable(x) {
                        return Err(SortError::BadSort { name: x.clone() });
                    }
                    if bound.contains(x) {
                        return Err(SortError::Rebound(x.clone()));
                    }
                    bound.push(x.clone());
                    let r = go(a, bound);
                    bound.pop();
                    r
                }
            }
        }
        go(self, &mut Vec::new())
    }
}

/// The concurrency sentence `∃x∃y. a(x) ∧ b(y) ∧ ¬(x<y) ∧ ¬(y<x)`.
pub fn concurrency_formula(a: &str, b: &str) -> Formula {
    Formula::exists(
        "x",
        Formula::exists(
            "y",
            Formula::and_all([
                Formula::label(a, "x"),
                Formula::label(b, "y"),
                Formula::not(Formula::less("x", "y")),
                Formula::not(Formula::less("y", "x")),
            ]),
        ),
    )
}
