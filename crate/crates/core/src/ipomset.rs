//! Interval pomsets with interfaces.
//!
//! An [`IPomset`] is a finite set of events carrying a strict partial order
//! `<` (precedence), an event order `⇝` relating exactly the `<`-incomparable
//! pairs, source and target interfaces, and a labelling. Values are validated
//! on construction and immutable afterwards.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::steps::{sparse_decompose, StepWord};

/// Default cap on the number of events accepted by the exponential searches.
pub const DEFAULT_EVENT_LIMIT: usize = 12;

/// An action label.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(name: &str) -> Label {
        Label(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Label {
    fn from(name: &str) -> Label {
        Label::new(name)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Dense boolean relation on `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    n: usize,
    bits: Vec<bool>,
}

impl Relation {
    pub fn empty(n: usize) -> Relation {
        Relation { n, bits: vec![false; n * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.n + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, value: bool) {
        self.bits[a * self.n + b] = value;
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n * n).filter(move |&i| self.bits[i]).map(move |i| (i / n, i % n))
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Warshall closure.
    pub fn transitive_closure(&self) -> Relation {
        let mut r = self.clone();
        let n = self.n;
        for k in 0..n {
            for i in 0..n {
                if r.get(i, k) {
                    for j in 0..n {
                        if r.get(k, j) {
                            r.set(i, j, true);
                        }
                    }
                }
            }
        }
        r
    }

    pub fn is_transitive(&self) -> bool {
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                if !self.get(a, b) {
                    continue;
                }
                for c in 0..n {
                    if self.get(b, c) && !self.get(a, c) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}

/// An unchecked ipomset candidate, indices refer to `events`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawIPomset {
    pub events: Vec<(String, Label)>,
    pub precedence: Vec<(usize, usize)>,
    pub event_order: Vec<(usize, usize)>,
    pub sources: Vec<usize>,
    pub targets: Vec<usize>,
}

/// A broken ipomset invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateEvent(String),
    UnknownIndex(usize),
    PrecedenceReflexive(String),
    EventOrderReflexive(String),
    PrecedenceAsymmetry(String, String),
    EventOrderAsymmetry(String, String),
    PrecedenceNotTransitive(String, String, String),
    Unrelated(String, String),
    MultiplyRelated(String, String),
    SourceNotMinimal { source: String, predecessor: String },
    TargetNotMaximal { target: String, successor: String },
    NotInterval([String; 4]),
    EventOrderCycle(String, String, String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateEvent(e) => write!(f, "duplicate event {e}"),
            UnknownIndex(i) => write!(f, "event index {i} out of range"),
            PrecedenceReflexive(e) => write!(f, "precedence is not irreflexive: {e}<{e}"),
            EventOrderReflexive(e) => write!(f, "event order is not irreflexive: {e}~>{e}"),
            PrecedenceAsymmetry(a, b) => write!(f, "precedence is not asymmetric: {a}<{b} and {b}<{a}"),
            EventOrderAsymmetry(a, b) => {
                write!(f, "event order is not asymmetric: {a}~>{b} and {b}~>{a}")
            }
            PrecedenceNotTransitive(a, b, c) => {
                write!(f, "precedence is not transitive: {a}<{b}<{c} but not {a}<{c}")
            }
            Unrelated(a, b) => write!(f, "events {a} and {b} are related by neither < nor ~>"),
            MultiplyRelated(a, b) => write!(f, "events {a} and {b} are related more than once"),
            SourceNotMinimal { source, predecessor } => {
                write!(f, "source {source} is not minimal: {predecessor}<{source}")
            }
            TargetNotMaximal { target, successor } => {
                write!(f, "target {target} is not maximal: {target}<{successor}")
            }
            NotInterval([a, b, c, d]) => {
                write!(f, "not interval (2+2): {a}<{b} and {c}<{d} with {a},{d} and {c},{b} unordered")
            }
            EventOrderCycle(a, b, c) => {
                write!(f, "event order cycles on concurrent events: {a}~>{b}~>{c}~>{a}")
            }
        }
    }
}

/// Outcome of [`validate_ipomset`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GlueError {
    #[error("interface mismatch at position {position}: target has {left}, source has {right}")]
    InterfaceMismatch { position: usize, left: String, right: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LimitError {
    #[error("{what} ({actual}) exceeds the configured limit of {limit}")]
    TooLarge { what: &'static str, actual: usize, limit: usize },
}

/// Checks every ipomset invariant of `raw`.
pub fn validate_ipomset(raw: &RawIPomset) -> ValidationReport {
    let mut out = Vec::new();
    let n = raw.events.len();
    let mut seen = HashSet::new();
    for (name, _) in &raw.events {
        if !seen.insert(name.as_str()) {
            out.push(Violation::DuplicateEvent(name.clone()));
        }
    }
    let all = raw
        .precedence
        .iter()
        .chain(&raw.event_order)
        .flat_map(|&(a, b)| [a, b])
        .chain(raw.sources.iter().copied())
        .chain(raw.targets.iter().copied());
    let mut bad: BTreeSet<usize> = BTreeSet::new();
    for i in all {
        if i >= n {
            bad.insert(i);
        }
    }
    if !bad.is_empty() {
        out.extend(bad.into_iter().map(Violation::UnknownIndex));
        return ValidationReport { violations: out };
    }
    let name = |i: usize| raw.events[i].0.clone();
    let mut lt = Relation::empty(n);
    let mut ev = Relation::empty(n);
    for &(a, b) in &raw.precedence {
        lt.set(a, b, true);
    }
    for &(a, b) in &raw.event_order {
        ev.set(a, b, true);
    }
    let mut src = vec![false; n];
    let mut tgt = vec![false; n];
    for &s in &raw.sources {
        src[s] = true;
    }
    for &t in &raw.targets {
        tgt[t] = true;
    }
    check_relations(&lt, &ev, &src, &tgt, &name, &mut out);
    ValidationReport { violations: out }
}

fn check_relations(
    lt: &Relation,
    ev: &Relation,
    src: &[bool],
    tgt: &[bool],
    name: &dyn Fn(usize) -> String,
    out: &mut Vec<Violation>,
) {
    let n = lt.size();
    for a in 0..n {
        if lt.get(a, a) {
            out.push(Violation::PrecedenceReflexive(name(a)));
        }
        if ev.get(a, a) {
            out.push(Violation::EventOrderReflexive(name(a)));
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if lt.get(a, b) && lt.get(b, a) {
                out.push(Violation::PrecedenceAsymmetry(name(a), name(b)));
            }
            if ev.get(a, b) && ev.get(b, a) {
                out.push(Violation::EventOrderAsymmetry(name(a), name(b)));
            }
            let count = [lt.get(a, b), lt.get(b, a), ev.get(a, b), ev.get(b, a)]
                .iter()
                .filter(|x| **x)
                .count();
            match count {
                0 => out.push(Violation::Unrelated(name(a), name(b))),
                1 => {}
                _ => out.push(Violation::MultiplyRelated(name(a), name(b))),
            }
        }
    }
    'trans: for a in 0..n {
        for b in 0..n {
            if !lt.get(a, b) || a == b {
                continue;
            }
            for c in 0..n {
                if lt.get(b, c) && !lt.get(a, c) && a != c {
                    out.push(Violation::PrecedenceNotTransitive(name(a), name(b), name(c)));
                    break 'trans;
                }
            }
        }
    }
    for e in 0..n {
        for f in 0..n {
            if lt.get(f, e) && src[e] {
                out.push(Violation::SourceNotMinimal { source: name(e), predecessor: name(f) });
            }
            if lt.get(e, f) && tgt[e] {
                out.push(Violation::TargetNotMaximal { target: name(e), successor: name(f) });
            }
        }
    }
    if let Some([a, b, c, d]) = find_two_plus_two(lt) {
        out.push(Violation::NotInterval([name(a), name(b), name(c), name(d)]));
    }
    if let Some([a, b, c]) = find_event_order_cycle(lt, ev) {
        out.push(Violation::EventOrderCycle(name(a), name(b), name(c)));
    }
}

fn find_two_plus_two(lt: &Relation) -> Option<[usize; 4]> {
    let pairs: Vec<(usize, usize)> = lt.pairs().collect();
    for &(a, b) in &pairs {
        for &(c, d) in &pairs {
            if a != c && b != d && !lt.get(a, d) && !lt.get(c, b) && a != d && c != b {
                return Some([a, b, c, d]);
            }
        }
    }
    None
}

fn find_event_order_cycle(lt: &Relation, ev: &Relation) -> Option<[usize; 3]> {
    let n = lt.size();
    let conc = |a: usize, b: usize| a != b && !lt.get(a, b) && !lt.get(b, a);
    for a in 0..n {
        for b in 0..n {
            if !ev.get(a, b) || !conc(a, b) {
                continue;
            }
            for c in 0..n {
                if ev.get(b, c) && conc(b, c) && conc(a, c) && ev.get(c, a) {
                    return Some([a, b, c]);
                }
            }
        }
    }
    None
}

/// Cheap validity test for candidates that already satisfy the
/// one-relation-per-pair and interface conditions by construction.
pub(crate) fn interval_and_acyclic(lt: &Relation, ev: &Relation) -> bool {
    find_two_plus_two(lt).is_none() && find_event_order_cycle(lt, ev).is_none()
}

/// A validated interval ipomset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IPomset {
    names: Vec<String>,
    labels: Vec<Label>,
    lt: Relation,
    ev: Relation,
    sources: Vec<bool>,
    targets: Vec<bool>,
}

impl IPomset {
    /// Validates `raw` and builds the ipomset.
    pub fn from_raw(raw: &RawIPomset) -> Result<IPomset, ValidationReport> {
        let report = validate_ipomset(raw);
        if !report.is_ok() {
            return Err(report);
        }
        let n = raw.events.len();
        let mut p = IPomset {
            names: raw.events.iter().map(|(e, _)| e.clone()).collect(),
            labels: raw.events.iter().map(|(_, l)| l.clone()).collect(),
            lt: Relation::empty(n),
            ev: Relation::empty(n),
            sources: vec![false; n],
            targets: vec![false; n],
        };
        for &(a, b) in &raw.precedence {
            p.lt.set(a, b, true);
        }
        for &(a, b) in &raw.event_order {
            p.ev.set(a, b, true);
        }
        for &s in &raw.sources {
            p.sources[s] = true;
        }
        for &t in &raw.targets {
            p.targets[t] = true;
        }
        Ok(p)
    }

    pub(crate) fn from_parts(
        names: Vec<String>,
        labels: Vec<Label>,
        lt: Relation,
        ev: Relation,
        sources: Vec<bool>,
        targets: Vec<bool>,
    ) -> IPomset {
        let p = IPomset { names, labels, lt, ev, sources, targets };
        debug_assert!(validate_ipomset(&p.to_raw()).is_ok(), "{:?}", validate_ipomset(&p.to_raw()));
        p
    }

    pub fn to_raw(&self) -> RawIPomset {
        RawIPomset {
            events: self.names.iter().cloned().zip(self.labels.iter().cloned()).collect(),
            precedence: self.lt.pairs().collect(),
            event_order: self.ev.pairs().collect(),
            sources: (0..self.len()).filter(|&e| self.sources[e]).collect(),
            targets: (0..self.len()).filter(|&e| self.targets[e]).collect(),
        }
    }

    /// The empty ipomset `id_∅`.
    pub fn empty() -> IPomset {
        IPomset::conclist_with(&[], true, true)
    }

    /// Conclist `a ⇝ b ⇝ …` without interfaces.
    pub fn conclist(labels: &[&str]) -> IPomset {
        IPomset::conclist_with(labels, false, false)
    }

    /// Identity `id_U` on the conclist `labels`.
    pub fn identity(labels: &[&str]) -> IPomset {
        IPomset::conclist_with(labels, true, true)
    }

    fn conclist_with(labels: &[&str], src: bool, tgt: bool) -> IPomset {
        let n = labels.len();
        let mut ev = Relation::empty(n);
        for a in 0..n {
            for b in a + 1..n {
                ev.set(a, b, true);
            }
        }
        IPomset::from_parts(
            default_names(n),
            labels.iter().map(|l| Label::new(l)).collect(),
            Relation::empty(n),
            ev,
            vec![src; n],
            vec![tgt; n],
        )
    }

    /// Totally ordered pomset `a < b < …` without interfaces.
    pub fn word(labels: &[&str]) -> IPomset {
        let n = labels.len();
        let mut lt = Relation::empty(n);
        for a in 0..n {
            for b in a + 1..n {
                lt.set(a, b, true);
            }
        }
        IPomset::from_parts(
            default_names(n),
            labels.iter().map(|l| Label::new(l)).collect(),
            lt,
            Relation::empty(n),
            vec![false; n],
            vec![false; n],
        )
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, e: usize) -> &str {
        &self.names[e]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn event(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn label(&self, e: usize) -> &Label {
        &self.labels[e]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    #[inline]
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.lt.get(a, b)
    }

    #[inline]
    pub fn event_order(&self, a: usize, b: usize) -> bool {
        self.ev.get(a, b)
    }

    pub fn concurrent(&self, a: usize, b: usize) -> bool {
        a != b && !self.lt.get(a, b) && !self.lt.get(b, a)
    }

    pub fn precedence(&self) -> &Relation {
        &self.lt
    }

    pub fn event_order_relation(&self) -> &Relation {
        &self.ev
    }

    #[inline]
    pub fn is_source(&self, e: usize) -> bool {
        self.sources[e]
    }

    #[inline]
    pub fn is_target(&self, e: usize) -> bool {
        self.targets[e]
    }

    /// Whether `S = T = P`.
    pub fn is_identity(&self) -> bool {
        (0..self.len()).all(|e| self.sources[e] && self.targets[e])
    }

    /// Source interface sorted by event order.
    pub fn source_conclist(&self) -> Vec<usize> {
        self.sort_by_event_order((0..self.len()).filter(|&e| self.sources[e]).collect())
    }

    /// Target interface sorted by event order.
    pub fn target_conclist(&self) -> Vec<usize> {
        self.sort_by_event_order((0..self.len()).filter(|&e| self.targets[e]).collect())
    }

    /// Sorts a set of pairwise concurrent events along `⇝`.
    pub fn sort_by_event_order(&self, mut events: Vec<usize>) -> Vec<usize> {
        events.sort_by(|&a, &b| {
            if a == b {
                std::cmp::Ordering::Equal
            } else if self.ev.get(a, b) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        events
    }

    /// Returns a copy with the events renamed.
    pub fn renamed(&self, names: Vec<String>) -> IPomset {
        assert_eq!(names.len(), self.len());
        IPomset { names, ..self.clone() }
    }

    /// Returns an isomorphic copy whose events are permuted: event `e` of
    /// `self` becomes event `perm[e]`.
    pub fn permuted(&self, perm: &[usize]) -> IPomset {
        let n = self.len();
        let mut names = vec![String::new(); n];
        let mut labels = vec![Label::new(""); n];
        let mut lt = Relation::empty(n);
        let mut ev = Relation::empty(n);
        let mut sources = vec![false; n];
        let mut targets = vec![false; n];
        for e in 0..n {
            names[perm[e]] = self.names[e].clone();
            labels[perm[e]] = self.labels[e].clone();
            sources[perm[e]] = self.sources[e];
            targets[perm[e]] = self.targets[e];
            for f in 0..n {
                lt.set(perm[e], perm[f], self.lt.get(e, f));
                ev.set(perm[e], perm[f], self.ev.get(e, f));
            }
        }
        IPomset { names, labels, lt, ev, sources, targets }
    }

    /// Canonical form: the sparse step decomposition.
    pub fn canonical(&self) -> StepWord {
        sparse_decompose(self)
    }

    /// Set of labels used by the events.
    pub fn alphabet(&self) -> BTreeSet<Label> {
        self.labels.iter().cloned().collect()
    }
}

pub(crate) fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("e{i}")).collect()
}

/// Gluing composition `P * Q`.
pub fn glue(p: &IPomset, q: &IPomset) -> Result<IPomset, GlueError> {
    glue_traced(p, q).map(|(r, _, _)| r)
}

/// Like [`glue`], also returning where the events of `p` and `q` land.
pub fn glue_traced(p: &IPomset, q: &IPomset) -> Result<(IPomset, Vec<usize>, Vec<usize>), GlueError> {
    let tp = p.target_conclist();
    let sq = q.source_conclist();
    for i in 0..tp.len().max(sq.len()) {
        let left = tp.get(i).map(|&e| p.label(e).to_string());
        let right = sq.get(i).map(|&e| q.label(e).to_string());
        if left != right {
            return Err(GlueError::InterfaceMismatch {
                position: i + 1,
                left: left.unwrap_or_else(|| "nothing".into()),
                right: right.unwrap_or_else(|| "nothing".into()),
            });
        }
    }
    let mut names: Vec<String> = p.names.clone();
    let mut labels = p.labels.clone();
    let p_map: Vec<usize> = (0..p.len()).collect();
    let mut q_map = vec![usize::MAX; q.len()];
    for (i, &e) in sq.iter().enumerate() {
        q_map[e] = tp[i];
    }
    let mut used: HashSet<String> = names.iter().cloned().collect();
    for e in 0..q.len() {
        if q.sources[e] {
            continue;
        }
        let mut name = q.names[e].clone();
        while used.contains(&name) {
            name.push('\'');
        }
        used.insert(name.clone());
        q_map[e] = names.len();
        names.push(name);
        labels.push(q.labels[e].clone());
    }
    let n = names.len();
    let mut lt = Relation::empty(n);
    let mut ev = Relation::empty(n);
    for (a, b) in p.lt.pairs() {
        lt.set(a, b, true);
    }
    for (a, b) in p.ev.pairs() {
        ev.set(a, b, true);
    }
    for (a, b) in q.lt.pairs() {
        lt.set(q_map[a], q_map[b], true);
    }
    for (a, b) in q.ev.pairs() {
        ev.set(q_map[a], q_map[b], true);
    }
    for a in 0..p.len() {
        if p.targets[a] {
            continue;
        }
        for b in 0..q.len() {
            if !q.sources[b] {
                lt.set(a, q_map[b], true);
            }
        }
    }
    let lt = lt.transitive_closure();
    let mut sources = vec![false; n];
    let mut targets = vec![false; n];
    for e in 0..p.len() {
        sources[e] = p.sources[e];
    }
    for e in 0..q.len() {
        if q.targets[e] {
            targets[q_map[e]] = true;
        }
    }
    Ok((IPomset::from_parts(names, labels, lt, ev, sources, targets), p_map, q_map))
}

/// Subsumption `P ⊑ Q`: returns a witness bijection from events of `p` to
/// events of `q`.
pub fn subsumes(p: &IPomset, q: &IPomset) -> Option<Vec<usize>> {
    if p.len() != q.len() {
        return None;
    }
    let n = p.len();
    let mut f = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if extend_subsumption(p, q, 0, &mut f, &mut used) {
        Some(f)
    } else {
        None
    }
}

fn extend_subsumption(p: &IPomset, q: &IPomset, e: usize, f: &mut [usize], used: &mut [bool]) -> bool {
    if e == p.len() {
        return true;
    }
    for c in 0..q.len() {
        if used[c]
            || q.labels[c] != p.labels[e]
            || q.sources[c] != p.sources[e]
            || q.targets[c] != p.targets[e]
        {
            continue;
        }
        let fits = (0..e).all(|d| {
            let fd = f[d];
            (!q.lt.get(fd, c) || p.lt.get(d, e))
                && (!q.lt.get(c, fd) || p.lt.get(e, d))
                && (!p.ev.get(d, e) || q.ev.get(fd, c))
                && (!p.ev.get(e, d) || q.ev.get(c, fd))
        });
        if !fits {
            continue;
        }
        f[e] = c;
        used[c] = true;
        if extend_subsumption(p, q, e + 1, f, used) {
            return true;
        }
        used[c] = false;
    }
    f[e] = usize::MAX;
    false
}

/// The unique isomorphism between two ipomsets, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoWitness {
    /// `mapping[e]` is the image of event `e`.
    pub mapping: Vec<usize>,
}

/// Decides isomorphism by comparing canonical forms.
pub fn isomorphic(p: &IPomset, q: &IPomset) -> Option<IsoWitness> {
    if p.len() != q.len() {
        return None;
    }
    let ip = crate::steps::st_te_indices(p);
    let iq = crate::steps::st_te_indices(q);
    if ip.word != iq.word {
        return None;
    }
    // An event is pinned down by its first letter and its row there.
    let key = |idx: &crate::steps::StTeIndex, pom: &IPomset, e: usize| -> (usize, usize) {
        let first = idx.first_letter(e);
        let row = idx.letter_events(pom, first).iter().position(|&x| x == e).unwrap();
        (first, row)
    };
    let mut by_key = std::collections::HashMap::new();
    for e in 0..q.len() {
        by_key.insert(key(&iq, q, e), e);
    }
    let mapping: Vec<usize> = (0..p.len()).map(|e| by_key[&key(&ip, p, e)]).collect();
    debug_assert!(is_isomorphism(p, q, &mapping));
    Some(IsoWitness { mapping })
}

/// Checks that `f` is an isomorphism from `p` to `q`.
pub fn is_isomorphism(p: &IPomset, q: &IPomset, f: &[usize]) -> bool {
    let n = p.len();
    if q.len() != n || f.len() != n {
        return false;
    }
    let mut hit = vec![false; n];
    for &x in f {
        if x >= n || hit[x] {
            return false;
        }
        hit[x] = true;
    }
    (0..n).all(|a| {
        p.labels[a] == q.labels[f[a]]
            && p.sources[a] == q.sources[f[a]]
            && p.targets[a] == q.targets[f[a]]
            && (0..n).all(|b| p.lt.get(a, b) == q.lt.get(f[a], f[b]) && p.ev.get(a, b) == q.ev.get(f[a], f[b]))
    })
}

/// Size of the largest `<`-antichain.
pub fn width(p: &IPomset) -> usize {
    fn grow(p: &IPomset, chosen: usize, candidates: &[usize], best: &mut usize) {
        if chosen + candidates.len() <= *best {
            return;
        }
        if candidates.is_empty() {
            *best = chosen;
            return;
        }
        for (i, &c) in candidates.iter().enumerate() {
            if chosen + candidates.len() - i <= *best {
                return;
            }
            let rest: Vec<usize> =
                candidates[i + 1..].iter().copied().filter(|&d| p.concurrent(c, d)).collect();
            grow(p, chosen + 1, &rest, best);
        }
    }
    let all: Vec<usize> = (0..p.len()).collect();
    let mut best = 0;
    grow(p, 0, &all, &mut best);
    best
}

/// Limits for [`relaxations`].
#[derive(Clone, Copy, Debug)]
pub struct RelaxLimits {
    pub max_events: usize,
    pub max_precedence_pairs: usize,
}

impl Default for RelaxLimits {
    fn default() -> Self {
        RelaxLimits { max_events: DEFAULT_EVENT_LIMIT, max_precedence_pairs: 20 }
    }
}

/// All `Q` with `P ⊑ Q`, one per isomorphism class, sorted by canonical form.
pub fn relaxations(p: &IPomset, limits: RelaxLimits) -> Result<Vec<IPomset>, LimitError> {
    if p.len() > limits.max_events {
        return Err(LimitError::TooLarge { what: "event count", actual: p.len(), limit: limits.max_events });
    }
    let pairs: Vec<(usize, usize)> = p.lt.pairs().collect();
    if pairs.len() > limits.max_precedence_pairs {
        return Err(LimitError::TooLarge {
            what: "precedence pair count",
            actual: pairs.len(),
            limit: limits.max_precedence_pairs,
        });
    }
    let n = p.len();
    let mut found: std::collections::BTreeMap<StepWord, IPomset> = std::collections::BTreeMap::new();
    for keep in 0u64..(1u64 << pairs.len()) {
        let mut lt = Relation::empty(n);
        let mut dropped = Vec::new();
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if keep >> i & 1 == 1 {
                lt.set(a, b, true);
            } else {
                dropped.push((a, b));
            }
        }
        if !lt.is_transitive() {
            continue;
        }
        for orient in 0u64..(1u64 << dropped.len()) {
            let mut ev = p.ev.clone();
            for (i, &(a, b)) in dropped.iter().enumerate() {
                if orient >> i & 1 == 0 {
                    ev.set(a, b, true);
                } else {
                    ev.set(b, a, true);
                }
            }
            if !interval_and_acyclic(&lt, &ev) {
                continue;
            }
            let q = IPomset::from_parts(
                p.names.clone(),
                p.labels.clone(),
                lt.clone(),
                ev,
                p.sources.clone(),
                p.targets.clone(),
            );
            found.entry(q.canonical()).or_insert(q);
        }
    }
    Ok(found.into_values().collect())
}
