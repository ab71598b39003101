//! From ipomset sentences to step-word sentences and automata, and from
//! HDAs back to ipomset sentences.
//!
//! An ipomset of width at most `k` is represented by the coherent words
//! over `Ω≤k` that compose to it. A first-order variable becomes a pair of
//! a word position and a row of the letter there; two pairs denote the same
//! event when they are related by `~`, the closure of the row
//! identifications made by gluing adjacent letters.

mod automaton;
mod hda_to_mso;
mod macros;
mod sat;

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::ipomset::Label;
use crate::mso::{Formula, Signature, SortError};
use crate::steps::{composable, enumerate_omega, rows_of, StepLetter};

pub use automaton::{word_mso_to_nfa, AutomatonError, CompileOptions, StepNfa};
pub use hda_to_mso::{hda_to_mso, HdaMsoBundle};
pub use macros::{eval_macro, macro_formula, macro_oracle, MacroPredicate};
pub use sat::{in_defined_language, sat, sentence_automaton, SatError, SatOptions, SatResult};

/// Letters of `Ω≤k` over a label set without `id_∅`, with the composable
/// pairs and the row identification tables.
#[derive(Debug)]
pub struct OmegaTable {
    labels: Vec<Label>,
    k: usize,
    letters: Vec<StepLetter>,
    composable: Vec<(usize, usize)>,
    /// `glue[i][j]`: pairs whose row `i` of the first letter is glued to row
    /// `j` of the second (0-based rows).
    glue: Vec<Vec<Vec<(usize, usize)>>>,
}

/// Largest `Ω≤k` the translation accepts.
pub const MAX_OMEGA: usize = 4096;

impl OmegaTable {
    fn build(labels: Vec<Label>, k: usize) -> OmegaTable {
        let letters: Vec<StepLetter> =
            enumerate_omega(&labels, k, true).into_iter().filter(|l| !l.carrier().is_empty()).collect();
        let mut pairs = Vec::new();
        let mut glue = vec![vec![Vec::new(); k]; k];
        for (a, x) in letters.iter().enumerate() {
            for (b, y) in letters.iter().enumerate() {
                if !composable(x, y) {
                    continue;
                }
                pairs.push((a, b));
                for (i, j) in rows_of(x.targets()).zip(rows_of(y.sources())) {
                    glue[i][j].push((a, b));
                }
            }
        }
        OmegaTable { labels, k, letters, composable: pairs, glue }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn letters(&self) -> &[StepLetter] {
        &self.letters
    }

    pub fn composable_pairs(&self) -> &[(usize, usize)] {
        &self.composable
    }

    /// Pairs in `M_{i,j}` (rows 1-based).
    pub fn glue_pairs(&self, i: usize, j: usize) -> &[(usize, usize)] {
        &self.glue[i - 1][j - 1]
    }
}

type TableKey = (Vec<Label>, usize);

/// The table for `labels` and `k`, built once per process.
pub fn omega_table(labels: &[Label], k: usize) -> Result<Arc<OmegaTable>, TranslateError> {
    let mut labels = labels.to_vec();
    labels.sort();
    labels.dedup();
    let size: f64 = (0..=k).map(|m| (labels.len() as f64).powi(m as i32) * (2f64.powi(m as i32 + 1) - 1.0)).sum();
    if size > MAX_OMEGA as f64 {
        return Err(TranslateError::AlphabetTooLarge { size: size as usize, limit: MAX_OMEGA });
    }
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<OmegaTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (labels, k);
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let table = Arc::new(OmegaTable::build(key.0.clone(), k));
    Ok(cache.lock().unwrap().entry(key).or_insert(table).clone())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("formula has free variables: {0}")]
    NotASentence(String),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("alphabet has {size} letters, limit is {limit}")]
    AlphabetTooLarge { size: usize, limit: usize },
    #[error("row {row} out of range for k = {k}")]
    RowOutOfRange { row: usize, k: usize },
}

fn letters_where(t: &OmegaTable, x: &str, keep: impl Fn(&StepLetter) -> bool) -> Formula {
    Formula::or_all(t.letters.iter().filter(|l| keep(l)).map(|l| Formula::letter(l, x)))
}

fn check_row(t: &OmegaTable, row: usize) -> Result<(), TranslateError> {
    if row == 0 || row > t.k {
        Err(TranslateError::RowOutOfRange { row, k: t.k })
    } else {
        Ok(())
    }
}

/// `Coh_k`: adjacent letters compose.
pub fn coh_formula(t: &OmegaTable) -> Formula {
    let pairs = t.composable.iter().map(|&(a, b)| {
        Formula::and(Formula::letter(&t.letters[a], "_p"), Formula::letter(&t.letters[b], "_q"))
    });
    Formula::forall_many(&["_p", "_q"], Formula::implies(Formula::succ("_p", "_q"), Formula::or_all(pairs)))
}

/// `glue_{i,j}(x, y)`: `y` follows `x` and row `i` at `x` is glued to row
/// `j` at `y` (rows 1-based).
pub fn glue_formula(t: &OmegaTable, i: usize, j: usize, x: &str, y: &str) -> Result<Formula, TranslateError> {
    check_row(t, i)?;
    check_row(t, j)?;
    let pairs = t
        .glue_pairs(i, j)
        .iter()
        .map(|&(a, b)| Formula::and(Formula::letter(&t.letters[a], x), Formula::letter(&t.letters[b], y)));
    Ok(Formula::and(Formula::succ(x, y), Formula::or_all(pairs)))
}

/// `Gclosed(X₁,…,X_k)`: the sets are closed under gluing in both
/// directions.
pub fn gclosed_formula(t: &OmegaTable, sets: &[String]) -> Formula {
    let mut parts = Vec::new();
    for i in 1..=t.k {
        for j in 1..=t.k {
            let glued = Formula::or(
                glue_formula(t, i, j, "_u", "_v").unwrap(),
                glue_formula(t, j, i, "_v", "_u").unwrap(),
            );
            parts.push(Formula::forall_many(
                &["_u", "_v"],
                Formula::implies(
                    Formula::and(Formula::member("_u", &sets[i - 1]), glued),
                    Formula::member("_v", &sets[j - 1]),
                ),
            ));
        }
    }
    Formula::and_all(parts)
}

fn closure_sets(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("Z_{i}")).collect()
}

/// `(x,i) ~ (y,j)`: every glue-closed family of sets containing row `i` at
/// `x` contains row `j` at `y` (rows 1-based).
pub fn sim_formula(t: &OmegaTable, i: usize, x: &str, j: usize, y: &str) -> Result<Formula, TranslateError> {
    check_row(t, i)?;
    check_row(t, j)?;
    let sets = closure_sets(t.k);
    Ok(Formula::forall_sets(
        &sets,
        Formula::implies(
            Formula::and(Formula::member(x, &sets[i - 1]), gclosed_formula(t, &sets)),
            Formula::member(y, &sets[j - 1]),
        ),
    ))
}

struct Translator<'t> {
    t: &'t OmegaTable,
    rows: HashMap<String, usize>,
}

impl Translator<'_> {
    fn row(&self, x: &str) -> usize {
        self.rows[x]
    }

    fn sim(&self, x: &str, i: usize, y: &str, j: usize) -> Formula {
        sim_formula(self.t, i, x, j, y).expect("rows are in range")
    }

    /// Letters with at least `i` rows.
    fn defined(&self, x: &str, i: usize) -> Formula {
        letters_where(self.t, x, |l| l.width() >= i)
    }

    fn set_names(&self, set: &str) -> Vec<String> {
        (1..=self.t.k).map(|j| format!("{set}_{j}")).collect()
    }

    fn tr(&mut self, f: &Formula) -> Formula {
        use Formula as F;
        let k = self.t.k;
        match f {
            F::True | F::False => f.clone(),
            F::Label(a, x) => {
                let i = self.row(x);
                letters_where(self.t, x, |l| l.carrier().get(i - 1) == Some(a))
            }
            F::Source(x) | F::Target(x) => {
                let i = self.row(x);
                let source = matches!(f, F::Source(_));
                Formula::and_all((1..=k).map(|j| {
                    let side = letters_where(self.t, "_s", |l| {
                        j <= l.width() && if source { l.is_source(j - 1) } else { l.is_target(j - 1) }
                    });
                    Formula::forall("_s", Formula::implies(self.sim(x, i, "_s", j), side))
                }))
            }
            F::Letter(..) => unreachable!("signature checked"),
            F::Less(x, y) => {
                let (i, j) = (self.row(x), self.row(y));
                let mut parts = Vec::new();
                for a in 1..=k {
                    for b in 1..=k {
                        parts.push(Formula::forall_many(
                            &["_l1", "_l2"],
                            Formula::implies(
                                Formula::and(self.sim(x, i, "_l1", a), self.sim(y, j, "_l2", b)),
                                Formula::less("_l1", "_l2"),
                            ),
                        ));
                    }
                }
                Formula::and_all(parts)
            }
            F::EventOrder(x, y) => {
                let (i, j) = (self.row(x), self.row(y));
                let mut parts = Vec::new();
                for a in 1..=k {
                    for b in a + 1..=k {
                        parts.push(Formula::exists(
                            "_e",
                            Formula::and(self.sim(x, i, "_e", a), self.sim(y, j, "_e", b)),
                        ));
                    }
                }
                Formula::or_all(parts)
            }
            F::Equal(x, y) => self.sim(x, self.row(x), y, self.row(y)),
            F::Succ(x, y) => {
                let z = "_n";
                let sugar = Formula::and(
                    Formula::less(x, y),
                    Formula::not(Formula::exists(z, Formula::and(Formula::less(x, z), Formula::less(z, y)))),
                );
                self.tr(&sugar)
            }
            F::In(x, set) => {
                let i = self.row(x);
                let names = self.set_names(set);
                Formula::or_all((1..=k).map(|j| {
                    Formula::exists("_m", Formula::and(self.sim(x, i, "_m", j), Formula::member("_m", &names[j - 1])))
                }))
            }
            F::Not(a) => Formula::not(self.tr(a)),
            F::And(a, b) => Formula::and(self.tr(a), self.tr(b)),
            F::Or(a, b) => Formula::or(self.tr(a), self.tr(b)),
            F::Implies(a, b) => Formula::implies(self.tr(a), self.tr(b)),
            F::Iff(a, b) => Formula::iff(self.tr(a), self.tr(b)),
            F::Exists(x, body) | F::Forall(x, body) => {
                let exists = matches!(f, F::Exists(..));
                let saved = self.rows.get(x).copied();
                let mut parts = Vec::new();
                for i in 1..=k {
                    self.rows.insert(x.clone(), i);
                    let inner = self.tr(body);
                    let def = self.defined(x, i);
                    parts.push(if exists {
                        Formula::exists(x, Formula::and(def, inner))
                    } else {
                        Formula::forall(x, Formula::implies(def, inner))
                    });
                }
                match saved {
                    Some(r) => self.rows.insert(x.clone(), r),
                    None => self.rows.remove(x),
                };
                if exists {
                    Formula::or_all(parts)
                } else {
                    Formula::and_all(parts)
                }
            }
            F::ExistsSet(set, body) => Formula::exists_sets(&self.set_names(set), self.tr(body)),
            F::ForallSet(set, body) => Formula::forall_sets(&self.set_names(set), self.tr(body)),
        }
    }
}

/// `φ̂ = Coh_k ∧ φ′`: on nonempty coherent words over `Ω≤k∖{id_∅}` built
/// from `labels`, it holds exactly when the composed ipomset satisfies `φ`,
/// and it fails on every incoherent word.
pub fn translate(phi: &Formula, k: usize, labels: &[Label]) -> Result<Formula, TranslateError> {
    phi.check_signature(Signature::IPomset)?;
    let (fo, so) = phi.free_vars();
    if !fo.is_empty() || !so.is_empty() {
        let names: Vec<String> = fo.into_iter().chain(so).collect();
        return Err(TranslateError::NotASentence(names.join(", ")));
    }
    let labels: BTreeSet<Label> = labels.iter().cloned().chain(phi.labels()).collect();
    let labels: Vec<Label> = labels.into_iter().collect();
    let t = omega_table(&labels, k)?;
    let mut tr = Translator { t: &t, rows: HashMap::new() };
    let body = tr.tr(phi);
    Ok(Formula::and(coh_formula(&t), body))
}
