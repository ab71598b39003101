//! Starters, terminators and step words.
//!
//! Every interval ipomset factors uniquely as a gluing of alternating
//! starters and terminators (its sparse step decomposition), which doubles
//! as the canonical form used for isomorphism tests throughout the crate.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ipomset::{default_names, IPomset, Label, Relation};

/// Bit `i` stands for row `i` of a carrier, rows ordered by `⇝`.
pub type RowMask = u32;

/// Maximum carrier size of a letter.
pub const MAX_CARRIER: usize = 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepKind {
    Starter,
    Terminator,
}

/// A starter `U↑A` or terminator `U↓B`, stored canonically: the carrier's
/// labels in `⇝` order plus the set of started or terminated rows.
/// Identities are stored as starters with an empty delta.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StepLetter {
    carrier: Vec<Label>,
    kind: StepKind,
    delta: RowMask,
}

impl StepLetter {
    pub fn new(carrier: Vec<Label>, kind: StepKind, delta: RowMask) -> StepLetter {
        assert!(carrier.len() <= MAX_CARRIER, "carrier too large");
        assert!(delta & !full_mask(carrier.len()) == 0, "delta outside carrier");
        let kind = if delta == 0 { StepKind::Starter } else { kind };
        StepLetter { carrier, kind, delta }
    }

    pub fn starter(carrier: &[&str], delta: RowMask) -> StepLetter {
        StepLetter::new(carrier.iter().map(|l| Label::new(l)).collect(), StepKind::Starter, delta)
    }

    pub fn terminator(carrier: &[&str], delta: RowMask) -> StepLetter {
        StepLetter::new(carrier.iter().map(|l| Label::new(l)).collect(), StepKind::Terminator, delta)
    }

    pub fn identity(carrier: Vec<Label>) -> StepLetter {
        StepLetter::new(carrier, StepKind::Starter, 0)
    }

    /// Builds the letter with the given interfaces, if it is one.
    pub fn from_interfaces(carrier: Vec<Label>, sources: RowMask, targets: RowMask) -> Option<StepLetter> {
        if carrier.len() > MAX_CARRIER {
            return None;
        }
        let all = full_mask(carrier.len());
        if sources & !all != 0 || targets & !all != 0 {
            return None;
        }
        if targets == all {
            Some(StepLetter::new(carrier, StepKind::Starter, all & !sources))
        } else if sources == all {
            Some(StepLetter::new(carrier, StepKind::Terminator, all & !targets))
        } else {
            None
        }
    }

    pub fn carrier(&self) -> &[Label] {
        &self.carrier
    }

    pub fn kind(&self) -> StepKind {
        self.kind
    }

    pub fn delta(&self) -> RowMask {
        self.delta
    }

    pub fn width(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_identity(&self) -> bool {
        self.delta == 0
    }

    pub fn is_starter(&self) -> bool {
        self.kind == StepKind::Starter && self.delta != 0
    }

    pub fn is_terminator(&self) -> bool {
        self.kind == StepKind::Terminator
    }

    pub fn sources(&self) -> RowMask {
        match self.kind {
            StepKind::Starter => full_mask(self.width()) & !self.delta,
            StepKind::Terminator => full_mask(self.width()),
        }
    }

    pub fn targets(&self) -> RowMask {
        match self.kind {
            StepKind::Starter => full_mask(self.width()),
            StepKind::Terminator => full_mask(self.width()) & !self.delta,
        }
    }

    pub fn is_source(&self, row: usize) -> bool {
        self.sources() >> row & 1 == 1
    }

    pub fn is_target(&self, row: usize) -> bool {
        self.targets() >> row & 1 == 1
    }

    pub fn source_labels(&self) -> Vec<&Label> {
        rows_of(self.sources()).map(|r| &self.carrier[r]).collect()
    }

    pub fn target_labels(&self) -> Vec<&Label> {
        rows_of(self.targets()).map(|r| &self.carrier[r]).collect()
    }

    /// The letter as a discrete ipomset.
    pub fn to_ipomset(&self) -> IPomset {
        let n = self.width();
        let mut ev = Relation::empty(n);
        for a in 0..n {
            for b in a + 1..n {
                ev.set(a, b, true);
            }
        }
        IPomset::from_parts(
            default_names(n),
            self.carrier.clone(),
            Relation::empty(n),
            ev,
            (0..n).map(|r| self.is_source(r)).collect(),
            (0..n).map(|r| self.is_target(r)).collect(),
        )
    }
}

impl Ord for StepLetter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.carrier
            .len()
            .cmp(&other.carrier.len())
            .then_with(|| self.carrier.cmp(&other.carrier))
            .then_with(|| self.kind.cmp(&other.kind))
            .then_with(|| self.delta.cmp(&other.delta))
    }
}

impl PartialOrd for StepLetter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for StepLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (r, l) in self.carrier.iter().enumerate() {
            if r > 0 {
                f.write_str(" ")?;
            }
            if self.is_source(r) {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
            if self.is_target(r) {
                f.write_str(".")?;
            }
        }
        f.write_str("]")
    }
}

impl fmt::Debug for StepLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub(crate) fn full_mask(n: usize) -> RowMask {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

pub(crate) fn rows_of(mask: RowMask) -> impl Iterator<Item = usize> {
    (0..32).filter(move |r| mask >> r & 1 == 1)
}

/// A sequence of letters.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepWord(pub Vec<StepLetter>);

impl StepWord {
    pub fn letters(&self) -> &[StepLetter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether every adjacent pair is composable.
    pub fn is_coherent(&self) -> bool {
        self.0.windows(2).all(|w| composable(&w[0], &w[1]))
    }
}

impl fmt::Display for StepWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for StepWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepParseError {
    #[error("at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
}

fn syntax(offset: usize, message: impl Into<String>) -> StepParseError {
    StepParseError::Syntax { offset, message: message.into() }
}

/// Parses one letter starting at `offset`; returns the letter and the
/// offset just past its closing bracket.
pub(crate) fn parse_letter_at(text: &str, offset: usize) -> Result<(StepLetter, usize), StepParseError> {
    let bytes = text.as_bytes();
    let mut i = offset;
    if bytes.get(i) != Some(&b'[') {
        return Err(syntax(i, "expected '['"));
    }
    i += 1;
    let mut carrier = Vec::new();
    let mut sources = 0u32;
    let mut targets = 0u32;
    loop {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        match bytes.get(i) {
            None => return Err(syntax(i, "unterminated letter")),
            Some(b']') => {
                i += 1;
                break;
            }
            _ => {}
        }
        let row = carrier.len();
        if row >= MAX_CARRIER {
            return Err(syntax(i, "carrier too large"));
        }
        if bytes[i] == b'.' {
            sources |= 1 << row;
            i += 1;
        }
        let start = i;
        while i < bytes.len() && is_label_byte(bytes[i]) {
            i += 1;
        }
        if start == i {
            return Err(syntax(i, "expected a label"));
        }
        carrier.push(Label::new(&text[start..i]));
        if bytes.get(i) == Some(&b'.') {
            targets |= 1 << row;
            i += 1;
        }
        match bytes.get(i) {
            Some(b']') => {}
            Some(c) if c.is_ascii_whitespace() => {}
            _ => return Err(syntax(i, "expected whitespace or ']' after a row")),
        }
    }
    if carrier.is_empty() {
        return Ok((StepLetter::identity(Vec::new()), i));
    }
    StepLetter::from_interfaces(carrier, sources, targets)
        .map(|l| (l, i))
        .ok_or_else(|| syntax(offset, "neither a starter nor a terminator"))
}

pub(crate) fn is_label_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

impl FromStr for StepLetter {
    type Err = StepParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let start = s.len() - s.trim_start().len();
        let (l, end) = parse_letter_at(s, start)?;
        if !s[end..].trim().is_empty() {
            return Err(syntax(end, "trailing input"));
        }
        Ok(l)
    }
}

impl FromStr for StepWord {
    type Err = StepParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut letters = Vec::new();
        let mut i = 0;
        let bytes = s.as_bytes();
        loop {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i == bytes.len() {
                break;
            }
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            let (l, end) = parse_letter_at(s, i)?;
            letters.push(l);
            i = end;
        }
        Ok(StepWord(letters))
    }
}

/// Whether `x * y` is defined.
pub fn composable(x: &StepLetter, y: &StepLetter) -> bool {
    let tx = x.targets();
    let sy = y.sources();
    if tx.count_ones() != sy.count_ones() {
        return false;
    }
    rows_of(tx).zip(rows_of(sy)).all(|(a, b)| x.carrier[a] == y.carrier[b])
}

/// All letters of `Ω≤k` over `labels`, in the canonical enumeration order.
pub fn enumerate_omega(labels: &[Label], k: usize, include_identities: bool) -> Vec<StepLetter> {
    let mut labels = labels.to_vec();
    labels.sort();
    labels.dedup();
    let mut out = Vec::new();
    for m in 0..=k.min(MAX_CARRIER) {
        for carrier in sequences(&labels, m) {
            for delta in 0..=full_mask(m) {
                if delta == 0 && !include_identities {
                    continue;
                }
                out.push(StepLetter::new(carrier.clone(), StepKind::Starter, delta));
            }
            for delta in 1..=full_mask(m) {
                out.push(StepLetter::new(carrier.clone(), StepKind::Terminator, delta));
            }
        }
    }
    out.sort();
    out
}

/// All length-`m` sequences over `labels`, lexicographically.
pub(crate) fn sequences(labels: &[Label], m: usize) -> Vec<Vec<Label>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(out.len() * labels.len());
        for s in &out {
            for l in labels {
                let mut t = s.clone();
                t.push(l.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComposeError {
    #[error("cannot compose the empty word")]
    Empty,
    #[error("letters {position} and {} are not composable", position + 1)]
    Incoherent { position: usize },
}

/// Gluing of all letters of `w`. Event `i` of the result is the `i`-th
/// event to appear when scanning letters left to right and rows top down.
pub fn compose_word(w: &[StepLetter]) -> Result<IPomset, ComposeError> {
    compose_word_traced(w).map(|(p, _)| p)
}

/// Like [`compose_word`], also returning, per letter, the event of each row.
pub fn compose_word_traced(w: &[StepLetter]) -> Result<(IPomset, Vec<Vec<usize>>), ComposeError> {
    if w.is_empty() {
        return Err(ComposeError::Empty);
    }
    for (i, pair) in w.windows(2).enumerate() {
        if !composable(&pair[0], &pair[1]) {
            return Err(ComposeError::Incoherent { position: i + 1 });
        }
    }
    let mut labels: Vec<Label> = Vec::new();
    let mut first: Vec<usize> = Vec::new();
    let mut last: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(w.len());
    let mut sources = Vec::new();
    let mut concurrent_pairs: Vec<(usize, usize)> = Vec::new();
    for (pos, letter) in w.iter().enumerate() {
        let mut events = vec![usize::MAX; letter.width()];
        if pos > 0 {
            let prev = &w[pos - 1];
            let carried: Vec<usize> = rows_of(prev.targets()).map(|r| rows[pos - 1][r]).collect();
            for (r, e) in rows_of(letter.sources()).zip(carried) {
                events[r] = e;
            }
        }
        for (r, slot) in events.iter_mut().enumerate() {
            if *slot == usize::MAX {
                *slot = labels.len();
                labels.push(letter.carrier[r].clone());
                first.push(pos);
                last.push(pos);
                sources.push(pos == 0 && letter.is_source(r));
            } else {
                last[*slot] = pos;
            }
        }
        for a in 0..events.len() {
            for b in a + 1..events.len() {
                concurrent_pairs.push((events[a], events[b]));
            }
        }
        rows.push(events);
    }
    let n = labels.len();
    let mut lt = Relation::empty(n);
    let mut ev = Relation::empty(n);
    for (a, b) in concurrent_pairs {
        ev.set(a, b, true);
    }
    for a in 0..n {
        for b in 0..n {
            if last[a] < first[b] {
                lt.set(a, b, true);
            }
        }
    }
    let end = w.len() - 1;
    let mut targets = vec![false; n];
    for r in rows_of(w[end].targets()) {
        targets[rows[end][r]] = true;
    }
    let p = IPomset::from_parts(default_names(n), labels, lt, ev, sources, targets);
    Ok((p, rows))
}

/// A start or end index, with `±∞` for interface events.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepIndex {
    NegInf,
    At(usize),
    PosInf,
}

impl fmt::Display for StepIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepIndex::NegInf => f.write_str("-inf"),
            StepIndex::At(i) => write!(f, "{i}"),
            StepIndex::PosInf => f.write_str("+inf"),
        }
    }
}

/// `St` and `Te` for every event, relative to the sparse decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StTeIndex {
    /// 1-based index of the starter starting each event.
    pub start: Vec<StepIndex>,
    /// 1-based index of the terminator terminating each event.
    pub end: Vec<StepIndex>,
    pub word: StepWord,
}

impl StTeIndex {
    /// 0-based index of the first letter containing `e`.
    pub fn first_letter(&self, e: usize) -> usize {
        match self.start[e] {
            StepIndex::At(i) => i - 1,
            _ => 0,
        }
    }

    /// Events of 0-based letter `l`, in row order.
    pub fn letter_events(&self, p: &IPomset, l: usize) -> Vec<usize> {
        let i = StepIndex::At(l + 1);
        let members: Vec<usize> = (0..p.len())
            .filter(|&e| self.start[e] <= i && i <= self.end[e])
            .collect();
        p.sort_by_event_order(members)
    }
}

/// The unique sparse step decomposition of `p`.
pub fn sparse_decompose(p: &IPomset) -> StepWord {
    st_te_indices(p).word
}

/// Computes `St`/`Te` and the sparse decomposition together.
///
/// Non-source events are grouped by their set of predecessors and
/// non-target events by their set of successors. In an interval order both
/// families are chains under inclusion, and a terminator group precedes a
/// starter group exactly when its events precede the starter's events.
pub fn st_te_indices(p: &IPomset) -> StTeIndex {
    let n = p.len();
    let pred: Vec<Vec<bool>> = (0..n).map(|e| (0..n).map(|f| p.precedes(f, e)).collect()).collect();
    let succ: Vec<Vec<bool>> = (0..n).map(|e| (0..n).map(|f| p.precedes(e, f)).collect()).collect();
    let mut starts: Vec<Vec<usize>> = Vec::new();
    let mut ends: Vec<Vec<usize>> = Vec::new();
    let mut start_key: HashMap<&Vec<bool>, usize> = HashMap::new();
    let mut end_key: HashMap<&Vec<bool>, usize> = HashMap::new();
    for e in 0..n {
        if !p.is_source(e) {
            let g = *start_key.entry(&pred[e]).or_insert_with(|| {
                starts.push(Vec::new());
                starts.len() - 1
            });
            starts[g].push(e);
        }
        if !p.is_target(e) {
            let g = *end_key.entry(&succ[e]).or_insert_with(|| {
                ends.push(Vec::new());
                ends.len() - 1
            });
            ends[g].push(e);
        }
    }
    let count = |v: &Vec<bool>| v.iter().filter(|b| **b).count();
    starts.sort_by_key(|g| count(&pred[g[0]]));
    ends.sort_by_key(|g| std::cmp::Reverse(count(&succ[g[0]])));

    let mut start = vec![StepIndex::NegInf; n];
    let mut end = vec![StepIndex::PosInf; n];
    let mut kinds = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < starts.len() || j < ends.len() {
        let pos = kinds.len() + 1;
        let take_end = j < ends.len() && (i == starts.len() || p.precedes(ends[j][0], starts[i][0]));
        if take_end {
            for &e in &ends[j] {
                end[e] = StepIndex::At(pos);
            }
            kinds.push(StepKind::Terminator);
            j += 1;
        } else {
            for &e in &starts[i] {
                start[e] = StepIndex::At(pos);
            }
            kinds.push(StepKind::Starter);
            i += 1;
        }
    }
    let mut idx = StTeIndex { start, end, word: StepWord::default() };
    if kinds.is_empty() {
        let all = p.sort_by_event_order((0..n).collect());
        idx.word = StepWord(vec![StepLetter::identity(all.iter().map(|&e| p.label(e).clone()).collect())]);
        return idx;
    }
    let mut letters = Vec::with_capacity(kinds.len());
    for (l, kind) in kinds.iter().enumerate() {
        let events = idx.letter_events(p, l);
        let here = StepIndex::At(l + 1);
        let mut delta = 0;
        for (r, &e) in events.iter().enumerate() {
            let hit = match kind {
                StepKind::Starter => idx.start[e] == here,
                StepKind::Terminator => idx.end[e] == here,
            };
            if hit {
                delta |= 1 << r;
            }
        }
        letters.push(StepLetter::new(events.iter().map(|&e| p.label(e).clone()).collect(), *kind, delta));
    }
    idx.word = StepWord(letters);
    idx
}

/// The map `evt` from (letter, row) to events and the induced `~`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionEventIndex {
    evt: Vec<Vec<usize>>,
}

impl PositionEventIndex {
    /// Event at 0-based letter `l`, 0-based row `i`, if the row exists.
    pub fn evt(&self, l: usize, i: usize) -> Option<usize> {
        self.evt.get(l).and_then(|r| r.get(i)).copied()
    }

    /// `(l1,i) ~ (l2,j)`; undefined positions are related only to themselves.
    pub fn related(&self, l1: usize, i: usize, l2: usize, j: usize) -> bool {
        match (self.evt(l1, i), self.evt(l2, j)) {
            (Some(a), Some(b)) => a == b,
            _ => l1 == l2 && i == j,
        }
    }

    pub fn letters(&self) -> usize {
        self.evt.len()
    }
}

/// Builds `evt` by closing adjacent interface matches under union-find.
pub fn position_event_index(w: &[StepLetter]) -> Result<PositionEventIndex, ComposeError> {
    for (i, pair) in w.windows(2).enumerate() {
        if !composable(&pair[0], &pair[1]) {
            return Err(ComposeError::Incoherent { position: i + 1 });
        }
    }
    let mut offset = Vec::with_capacity(w.len());
    let mut total = 0;
    for l in w {
        offset.push(total);
        total += l.width();
    }
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for l in 1..w.len() {
        for (a, b) in rows_of(w[l - 1].targets()).zip(rows_of(w[l].sources())) {
            let x = find(&mut parent, offset[l - 1] + a);
            let y = find(&mut parent, offset[l] + b);
            if x != y {
                parent[x.max(y)] = x.min(y);
            }
        }
    }
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut evt = Vec::with_capacity(w.len());
    for (l, letter) in w.iter().enumerate() {
        let mut row = Vec::with_capacity(letter.width());
        for r in 0..letter.width() {
            let root = find(&mut parent, offset[l] + r);
            let next = ids.len();
            row.push(*ids.entry(root).or_insert(next));
        }
        evt.push(row);
    }
    Ok(PositionEventIndex { evt })
}
