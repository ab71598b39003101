//! An ipomset sentence defining the language of an HDA.
//!
//! The sentence guesses a run labelling of the sparse decomposition: one
//! set `X_i` per upstep holding the events whose starter is read by that
//! upstep, and one set `Y_j` per downstep for terminators. Identities are
//! handled separately since they have no steps.

use crate::hda::{Downstep, Hda, Upstep};
use crate::ipomset::Label;
use crate::mso::Formula;

use super::macros::{macro_formula, MacroPredicate as M};

/// The sentence with the step tables that name its set variables.
#[derive(Clone, Debug)]
pub struct HdaMsoBundle {
    pub sentence: Formula,
    /// Upstep `i` (0-based) is tracked by `X{i+1}`.
    pub upsteps: Vec<Upstep>,
    /// Downstep `j` (0-based) is tracked by `Y{j+1}`.
    pub downsteps: Vec<Downstep>,
}

fn m(pred: M, x: &str, y: &str) -> Formula {
    macro_formula(pred, x, y, 0)
}

/// `y₁ … y_r` carry the labels `ev` and are ordered by `⇝` in that order.
fn conclist(ev: &[Label], ys: &[String]) -> Formula {
    let mut parts: Vec<Formula> = ev.iter().zip(ys).map(|(l, y)| Formula::label(l.as_str(), y)).collect();
    for a in 0..ys.len() {
        for b in a + 1..ys.len() {
            parts.push(Formula::event_order(&ys[a], &ys[b]));
        }
    }
    Formula::and_all(parts)
}

fn exactly_one(x: &str, sets: &[String], shapes: &[Formula]) -> Formula {
    let mut parts =
        vec![Formula::or_all(sets.iter().zip(shapes).map(|(s, shape)| Formula::and(Formula::member(x, s), shape.clone())))];
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            parts.push(Formula::not(Formula::and(Formula::member(x, &sets[a]), Formula::member(x, &sets[b]))));
        }
    }
    Formula::and_all(parts)
}

fn none_of(x: &str, sets: &[String]) -> Formula {
    Formula::and_all(sets.iter().map(|s| Formula::not(Formula::member(x, s))))
}

/// The letter read at `x`: its events form the conclist `ev`, the rows in
/// `rows` are those sharing the index of `x` under `same`, and `active`
/// describes membership.
fn letter_shape(ev: &[Label], rows: u32, same: M, x: &str, active: impl Fn(&str) -> Formula) -> Formula {
    let ys: Vec<String> = (1..=ev.len()).map(|r| format!("r{r}")).collect();
    let mut parts = vec![conclist(ev, &ys)];
    for (r, y) in ys.iter().enumerate() {
        let eq = m(same, y, x);
        parts.push(if rows >> r & 1 == 1 { eq } else { Formula::not(eq) });
    }
    parts.push(Formula::forall(
        "w",
        Formula::iff(active("w"), Formula::or_all(ys.iter().map(|y| Formula::equal("w", y)))),
    ));
    Formula::exists_many(&ys, Formula::and_all(parts))
}

/// A sentence whose models are exactly the ipomsets accepted by `h`.
pub fn hda_to_mso(h: &Hda) -> HdaMsoBundle {
    let ups = h.upsteps();
    let downs = h.downsteps();
    let xs: Vec<String> = (1..=ups.len()).map(|i| format!("X{i}")).collect();
    let ys: Vec<String> = (1..=downs.len()).map(|j| format!("Y{j}")).collect();
    let (x, y) = ("x", "y");
    let mut parts = Vec::new();

    let up_shapes: Vec<Formula> = ups
        .iter()
        .map(|u| {
            let active =
                |w: &str| Formula::and(Formula::or(m(M::StLtSt, w, x), m(M::StEqSt, w, x)), m(M::StLtTe, x, w));
            letter_shape(h.ev(u.to), u.rows, M::StEqSt, x, active)
        })
        .collect();
    let down_shapes: Vec<Formula> = downs
        .iter()
        .map(|d| {
            let active =
                |w: &str| Formula::and(m(M::StLtTe, w, x), Formula::or(m(M::TeLtTe, x, w), m(M::TeEqTe, x, w)));
            letter_shape(h.ev(d.from), d.rows, M::TeEqTe, x, active)
        })
        .collect();
    // With at most one set per event, pairing each membership with its
    // letter shape also forces the shape of the chosen step.
    parts.push(Formula::forall(
        x,
        Formula::and_all([
            Formula::implies(Formula::source(x), none_of(x, &xs)),
            Formula::implies(Formula::not(Formula::source(x)), exactly_one(x, &xs, &up_shapes)),
            Formula::implies(Formula::target(x), none_of(x, &ys)),
            Formula::implies(Formula::not(Formula::target(x)), exactly_one(x, &ys, &down_shapes)),
        ]),
    ));
    // one direction suffices as both orders of each pair are quantified
    let same_set =
        |sets: &[String]| Formula::and_all(sets.iter().map(|s| Formula::implies(Formula::member(x, s), Formula::member(y, s))));
    parts.push(Formula::forall_many(&[x, y], Formula::implies(m(M::StEqSt, x, y), same_set(&xs))));
    parts.push(Formula::forall_many(&[x, y], Formula::implies(m(M::TeEqTe, x, y), same_set(&ys))));

    let mut after_down = Vec::new();
    let mut after_up = Vec::new();
    for (i, u) in ups.iter().enumerate() {
        for (j, d) in downs.iter().enumerate() {
            if u.from == d.to {
                after_down.push(Formula::and(Formula::member(y, &xs[i]), Formula::member(x, &ys[j])));
            }
            if d.from == u.to {
                after_up.push(Formula::and(Formula::member(x, &xs[i]), Formula::member(y, &ys[j])));
            }
        }
    }
    parts.push(Formula::forall_many(&[x, y], Formula::implies(m(M::StSuccTe, x, y), Formula::or_all(after_down))));
    parts.push(Formula::forall_many(&[x, y], Formula::implies(m(M::TeSuccSt, x, y), Formula::or_all(after_up))));

    let ends = |pred: M, sets: &[String], keep: &dyn Fn(usize) -> bool| {
        let allowed = sets.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, s)| Formula::member(x, s));
        Formula::forall(x, Formula::implies(m(pred, x, y), Formula::or_all(allowed)))
    };
    parts.push(ends(M::MinSt, &xs, &|i| h.is_start(ups[i].from)));
    parts.push(ends(M::MinTe, &ys, &|j| h.is_start(downs[j].from)));
    parts.push(ends(M::MaxSt, &xs, &|i| h.is_accept(ups[i].to)));
    parts.push(ends(M::MaxTe, &ys, &|j| h.is_accept(downs[j].to)));

    let sets: Vec<String> = xs.iter().chain(&ys).cloned().collect();
    let nonident = Formula::exists(x, Formula::or(Formula::not(Formula::source(x)), Formula::not(Formula::target(x))));
    let mut disjuncts = vec![Formula::and(nonident, Formula::exists_sets(&sets, Formula::and_all(parts)))];

    let mut empty_identity = false;
    for &q in h.start_cells() {
        if !h.is_accept(q) {
            continue;
        }
        let ev = h.ev(q);
        if ev.is_empty() {
            empty_identity = true;
            continue;
        }
        let names: Vec<String> = (1..=ev.len()).map(|r| format!("r{r}")).collect();
        let mut body = vec![conclist(ev, &names)];
        body.extend(names.iter().map(|n| Formula::and(Formula::source(n), Formula::target(n))));
        body.push(Formula::forall("w", Formula::or_all(names.iter().map(|n| Formula::equal("w", n)))));
        disjuncts.push(Formula::exists_many(&names, Formula::and_all(body)));
    }
    if empty_identity {
        disjuncts.push(Formula::not(Formula::exists(x, Formula::True)));
    }
    HdaMsoBundle { sentence: Formula::or_all(disjuncts), upsteps: ups, downsteps: downs }
}
