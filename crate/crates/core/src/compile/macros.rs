//! First-order definitions of comparisons between start and end indices.
//!
//! `St x` is the position of the starter that starts `x` in the sparse
//! decomposition and `Te x` the terminator that ends it; sources start at
//! `-∞` and targets end at `+∞`. Infinite indices compare below or above all
//! finite ones and are never equal to anything.

use std::fmt;

use crate::ipomset::IPomset;
use crate::mso::{CompiledFormula, EvalError, Formula, Valuation};
use crate::steps::{st_te_indices, StepIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MacroPredicate {
    /// `St x < St y`
    StLtSt,
    /// `St x < Te y`
    StLtTe,
    /// `Te x < St y`
    TeLtSt,
    /// `Te x < Te y`
    TeLtTe,
    /// `St x = St y`
    StEqSt,
    /// `Te x = Te y`
    TeEqTe,
    /// `St x = Te y`
    StEqTe,
    /// `St x` is the first letter.
    MinSt,
    /// `Te x` is the first letter.
    MinTe,
    /// `St x` is the last letter.
    MaxSt,
    /// `Te x` is the last letter.
    MaxTe,
    /// `St y = Te x + 1`
    StSuccTe,
    /// `Te y = St x + 1`
    TeSuccSt,
}

impl MacroPredicate {
    pub const ALL: [MacroPredicate; 13] = [
        MacroPredicate::StLtSt,
        MacroPredicate::StLtTe,
        MacroPredicate::TeLtSt,
        MacroPredicate::TeLtTe,
        MacroPredicate::StEqSt,
        MacroPredicate::TeEqTe,
        MacroPredicate::StEqTe,
        MacroPredicate::MinSt,
        MacroPredicate::MinTe,
        MacroPredicate::MaxSt,
        MacroPredicate::MaxTe,
        MacroPredicate::StSuccTe,
        MacroPredicate::TeSuccSt,
    ];

    pub fn is_unary(self) -> bool {
        matches!(self, MacroPredicate::MinSt | MacroPredicate::MinTe | MacroPredicate::MaxSt | MacroPredicate::MaxTe)
    }
}

impl fmt::Display for MacroPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use MacroPredicate as M;
        f.write_str(match self {
            M::StLtSt => "St x < St y",
            M::StLtTe => "St x < Te y",
            M::TeLtSt => "Te x < St y",
            M::TeLtTe => "Te x < Te y",
            M::StEqSt => "St x = St y",
            M::TeEqTe => "Te x = Te y",
            M::StEqTe => "St x = Te y",
            M::MinSt => "min St x",
            M::MinTe => "min Te x",
            M::MaxSt => "max St x",
            M::MaxTe => "max Te x",
            M::StSuccTe => "St y = Te x + 1",
            M::TeSuccSt => "Te y = St x + 1",
        })
    }
}

/// The defining formula of `pred` with free variables `x` and `y` (`y` is
/// ignored by the unary predicates). Bound variables are `z{depth}`,
/// `z{depth+1}`, ..., so callers nesting macros pass increasing depths.
pub fn macro_formula(pred: MacroPredicate, x: &str, y: &str, depth: usize) -> Formula {
    use MacroPredicate as M;
    use Formula as F;
    let z = format!("z{depth}");
    let z = z.as_str();
    let inner = |p: MacroPredicate, a: &str, b: &str| macro_formula(p, a, b, depth + 1);
    match pred {
        M::TeLtSt => F::less(x, y),
        M::StLtTe => F::not(F::less(y, x)),
        M::StLtSt => F::and(
            F::not(F::source(y)),
            F::or(F::source(x), F::exists(z, F::and(F::not(F::less(z, x)), F::less(z, y)))),
        ),
        M::TeLtTe => F::and(
            F::not(F::target(x)),
            F::or(F::target(y), F::exists(z, F::and(F::less(x, z), F::not(F::less(y, z))))),
        ),
        M::StEqSt => F::and_all([
            F::not(F::source(x)),
            F::not(inner(M::StLtSt, x, y)),
            F::not(inner(M::StLtSt, y, x)),
        ]),
        M::TeEqTe => F::and_all([
            F::not(F::target(x)),
            F::not(inner(M::TeLtTe, x, y)),
            F::not(inner(M::TeLtTe, y, x)),
        ]),
        M::StEqTe => F::False,
        M::MinSt => F::and(F::not(F::source(x)), F::not(F::exists(z, F::less(z, x)))),
        M::MinTe => F::and(
            F::not(F::target(x)),
            F::not(F::exists(z, F::and(F::not(F::source(z)), inner(M::StLtTe, z, x)))),
        ),
        M::MaxSt => F::and(
            F::not(F::source(x)),
            F::not(F::exists(z, F::and(F::not(F::target(z)), inner(M::StLtTe, x, z)))),
        ),
        M::MaxTe => F::and(F::not(F::target(x)), F::not(F::exists(z, F::less(x, z)))),
        M::StSuccTe => F::and(
            F::less(x, y),
            F::not(F::exists(z, F::and(F::less(x, z), inner(M::StLtSt, z, y)))),
        ),
        M::TeSuccSt => F::and_all([
            F::not(F::source(x)),
            F::not(F::target(y)),
            inner(M::StLtTe, x, y),
            F::not(F::exists(z, F::and(inner(M::StLtTe, x, z), inner(M::TeLtTe, z, y)))),
        ]),
    }
}

/// Evaluates the defining formula of `pred` on events `x` and `y` of `p`.
pub fn eval_macro(p: &IPomset, pred: MacroPredicate, x: usize, y: usize) -> Result<bool, EvalError> {
    let f = CompiledFormula::new(&macro_formula(pred, "x", "y", 0))?;
    let nu = Valuation::new().element("x", x);
    let nu = if pred.is_unary() { nu } else { nu.element("y", y) };
    f.eval_ipomset(p, &nu)
}

/// `pred` computed from the sparse decomposition of `p`.
pub fn macro_oracle(p: &IPomset, pred: MacroPredicate, x: usize, y: usize) -> bool {
    use MacroPredicate as M;
    use StepIndex::At;
    let idx = st_te_indices(p);
    let (st, te) = (&idx.start, &idx.end);
    let finite = |i: StepIndex| matches!(i, At(_));
    let eq = |a: StepIndex, b: StepIndex| finite(a) && a == b;
    let last = At(idx.word.len());
    let plus_one = |a: StepIndex, b: StepIndex| matches!((a, b), (At(a), At(b)) if a == b + 1);
    match pred {
        M::StLtSt => st[x] < st[y],
        M::StLtTe => st[x] < te[y],
        M::TeLtSt => te[x] < st[y],
        M::TeLtTe => te[x] < te[y],
        M::StEqSt => eq(st[x], st[y]),
        M::TeEqTe => eq(te[x], te[y]),
        M::StEqTe => eq(st[x], te[y]),
        M::MinSt => st[x] == At(1),
        M::MinTe => te[x] == At(1),
        M::MaxSt => st[x] == last,
        M::MaxTe => te[x] == last,
        M::StSuccTe => plus_one(st[y], te[x]),
        M::TeSuccSt => plus_one(te[y], st[x]),
    }
}
