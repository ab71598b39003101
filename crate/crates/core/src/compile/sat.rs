//! Satisfiability of ipomset sentences up to a width bound.

use thiserror::Error;

use crate::ipomset::{relaxations, width, IPomset, Label, LimitError, RelaxLimits};
use crate::mso::{eval_ipomset, EvalError, Formula, Valuation};
use crate::steps::{compose_word, StepWord};

use super::automaton::{word_mso_to_nfa, AutomatonError, CompileOptions, StepNfa};
use super::{omega_table, translate, TranslateError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SatError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Limit(#[from] LimitError),
}

#[derive(Clone, Debug)]
pub struct SatOptions {
    /// Width bound.
    pub k: usize,
    /// Labels models may use besides those of the sentence.
    pub labels: Vec<Label>,
    pub compile: CompileOptions,
}

impl SatOptions {
    pub fn new(k: usize) -> SatOptions {
        SatOptions { k, labels: Vec::new(), compile: CompileOptions::default() }
    }
}

#[derive(Clone, Debug)]
pub enum SatResult {
    /// A model and the word it was read from (empty for `id_∅`).
    Sat { model: IPomset, word: StepWord },
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat { .. })
    }
}

/// The automaton of the translated sentence over `Ω≤k∖{id_∅}`.
pub fn sentence_automaton(phi: &Formula, opts: &SatOptions) -> Result<StepNfa, SatError> {
    let psi = translate(phi, opts.k, &opts.labels)?;
    let mut labels: Vec<Label> = opts.labels.iter().cloned().chain(phi.labels()).collect();
    labels.sort();
    labels.dedup();
    let table = omega_table(&labels, opts.k)?;
    Ok(word_mso_to_nfa(&psi, table.letters(), opts.compile)?)
}

/// Decides whether `phi` has a model of width at most `k` whose labels are
/// drawn from the sentence and `opts.labels`, returning one if so.
///
/// Witnesses prefer words that start without sources and end without
/// targets, then shorter words.
pub fn sat(phi: &Formula, opts: &SatOptions) -> Result<SatResult, SatError> {
    let empty = IPomset::empty();
    if eval_ipomset(phi, &empty, &Valuation::new())? {
        return Ok(SatResult::Sat { model: empty, word: StepWord::default() });
    }
    let nfa = sentence_automaton(phi, opts)?;
    let word = nfa
        .shortest_word(|l| l.sources() == 0, |l| l.targets() == 0)
        .or_else(|| nfa.shortest_word(|_| true, |_| true));
    Ok(match word {
        Some(w) => SatResult::Sat { model: compose_word(&w).expect("accepted words are coherent"), word: StepWord(w) },
        None => SatResult::Unsat,
    })
}

/// Membership of `p` in the language defined by `phi` at width `k`: the
/// models of width at most `k`, or with `closed` their subsumption closure.
pub fn in_defined_language(phi: &Formula, k: usize, p: &IPomset, closed: bool) -> Result<bool, SatError> {
    if width(p) > k {
        return Ok(false);
    }
    let nu = Valuation::new();
    if !closed {
        return Ok(eval_ipomset(phi, p, &nu)?);
    }
    for q in relaxations(p, RelaxLimits::default())? {
        if width(&q) <= k && eval_ipomset(phi, &q, &nu)? {
            return Ok(true);
        }
    }
    Ok(false)
}
