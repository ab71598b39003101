//! Higher-dimensional automata: finite precubical sets with start and
//! accept cells, their paths, and the languages they accept.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::ipomset::{IPomset, Label};
use crate::steps::{
    compose_word, full_mask, rows_of, sparse_decompose, st_te_indices, RowMask, StepIndex, StepKind, StepLetter,
    StepWord,
};

/// Largest cell dimension accepted by the face tables.
pub const MAX_DIMENSION: usize = 8;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawCell {
    pub name: String,
    /// Labels of the active events in `⇝` order.
    pub ev: Vec<Label>,
}

/// `δ^ν_A(cell) = target` with `A` given as rows of `ev(cell)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawFace {
    pub cell: String,
    pub upper: bool,
    pub rows: RowMask,
    pub target: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawHda {
    pub cells: Vec<RawCell>,
    pub faces: Vec<RawFace>,
    pub start: Vec<String>,
    pub accept: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HdaViolation {
    DuplicateCell(String),
    UnknownCell(String),
    DimensionTooLarge { cell: String, dimension: usize },
    RowsOutOfRange { cell: String, rows: RowMask },
    EmptyFace { cell: String },
    MissingFace { cell: String, upper: bool, row: usize },
    ConflictingFaces { cell: String, upper: bool, rows: RowMask, first: String, second: String },
    WrongFaceType { cell: String, upper: bool, rows: RowMask, target: String },
    NotCommuting { cell: String, first: (bool, usize), second: (bool, usize) },
}

fn face_name(upper: bool, rows: RowMask) -> String {
    let rows: Vec<String> = rows_of(rows).map(|r| (r + 1).to_string()).collect();
    format!("d{}{{{}}}", upper as u8, rows.join(","))
}

impl fmt::Display for HdaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use HdaViolation::*;
        match self {
            DuplicateCell(c) => write!(f, "cell {c} declared twice"),
            UnknownCell(c) => write!(f, "unknown cell {c}"),
            DimensionTooLarge { cell, dimension } => {
                write!(f, "cell {cell} has dimension {dimension}, limit is {MAX_DIMENSION}")
            }
            RowsOutOfRange { cell, rows } => write!(f, "face rows {rows:#b} out of range for {cell}"),
            EmptyFace { cell } => write!(f, "face of {cell} with an empty row set"),
            MissingFace { cell, upper, row } => {
                write!(f, "missing face {} of {cell}", face_name(*upper, 1 << row))
            }
            ConflictingFaces { cell, upper, rows, first, second } => {
                write!(f, "face {} of {cell} is both {first} and {second}", face_name(*upper, *rows))
            }
            WrongFaceType { cell, upper, rows, target } => write!(
                f,
                "face {} of {cell} is {target}, whose ev is not ev({cell}) minus those rows",
                face_name(*upper, *rows)
            ),
            NotCommuting { cell, first, second } => write!(
                f,
                "faces {} and {} of {cell} do not commute",
                face_name(first.0, 1 << first.1),
                face_name(second.0, 1 << second.1)
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HdaReport {
    pub violations: Vec<HdaViolation>,
}

impl HdaReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for HdaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
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

impl std::error::Error for HdaReport {}

/// Removes row `r` from `mask`, shifting higher rows down.
pub(crate) fn drop_row(mask: RowMask, r: usize) -> RowMask {
    (mask & ((1 << r) - 1)) | ((mask >> (r + 1)) << r)
}

/// Maps rows of a conclist with the rows `gap` removed back into the
/// larger conclist.
pub(crate) fn lift(mask: RowMask, gap: RowMask) -> RowMask {
    let mut out = 0;
    let mut i = 0;
    let mut r = 0;
    while mask >> i != 0 {
        while gap >> r & 1 == 1 {
            r += 1;
        }
        if mask >> i & 1 == 1 {
            out |= 1 << r;
        }
        i += 1;
        r += 1;
    }
    out
}

fn remaining<T: Clone>(items: &[T], rows: RowMask) -> Vec<T> {
    items.iter().enumerate().filter(|(i, _)| rows >> i & 1 == 0).map(|(_, x)| x.clone()).collect()
}

/// A validated HDA with total face tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hda {
    names: Vec<String>,
    ev: Vec<Vec<Label>>,
    /// `faces[ν][q][A]`.
    faces: [Vec<Vec<usize>>; 2],
    start: Vec<usize>,
    accept: Vec<usize>,
    is_start: Vec<bool>,
    is_accept: Vec<bool>,
}

pub fn validate_hda(raw: &RawHda) -> HdaReport {
    match Hda::build(raw) {
        Ok(_) => HdaReport::default(),
        Err(r) => r,
    }
}

impl Hda {
    pub fn from_raw(raw: &RawHda) -> Result<Hda, HdaReport> {
        Hda::build(raw)
    }

    fn build(raw: &RawHda) -> Result<Hda, HdaReport> {
        use HdaViolation::*;
        let mut v = Vec::new();
        let mut index = HashMap::new();
        for (i, c) in raw.cells.iter().enumerate() {
            if index.insert(c.name.clone(), i).is_some() {
                v.push(DuplicateCell(c.name.clone()));
            }
            if c.ev.len() > MAX_DIMENSION {
                v.push(DimensionTooLarge { cell: c.name.clone(), dimension: c.ev.len() });
            }
        }
        if !v.is_empty() {
            return Err(HdaReport { violations: v });
        }
        let n = raw.cells.len();
        let ev: Vec<Vec<Label>> = raw.cells.iter().map(|c| c.ev.clone()).collect();
        let lookup = |name: &str, v: &mut Vec<HdaViolation>| match index.get(name) {
            Some(&i) => Some(i),
            None => {
                v.push(UnknownCell(name.to_string()));
                None
            }
        };
        const UNSET: usize = usize::MAX;
        let mut faces: [Vec<Vec<usize>>; 2] = [
            ev.iter().map(|e| vec![UNSET; 1 << e.len()]).collect(),
            ev.iter().map(|e| vec![UNSET; 1 << e.len()]).collect(),
        ];
        for face in &raw.faces {
            let (Some(c), Some(t)) = (lookup(&face.cell, &mut v), lookup(&face.target, &mut v)) else {
                continue;
            };
            if face.rows & !full_mask(ev[c].len()) != 0 {
                v.push(RowsOutOfRange { cell: face.cell.clone(), rows: face.rows });
                continue;
            }
            if face.rows == 0 {
                v.push(EmptyFace { cell: face.cell.clone() });
                continue;
            }
            let slot = &mut faces[face.upper as usize][c][face.rows as usize];
            if *slot != UNSET && *slot != t {
                v.push(ConflictingFaces {
                    cell: face.cell.clone(),
                    upper: face.upper,
                    rows: face.rows,
                    first: raw.cells[*slot].name.clone(),
                    second: face.target.clone(),
                });
                continue;
            }
            *slot = t;
            if ev[t] != remaining(&ev[c], face.rows) {
                v.push(WrongFaceType { cell: face.cell.clone(), upper: face.upper, rows: face.rows, target: face.target.clone() });
            }
        }
        let start: Vec<usize> = raw.start.iter().filter_map(|s| lookup(s, &mut v)).collect();
        let accept: Vec<usize> = raw.accept.iter().filter_map(|s| lookup(s, &mut v)).collect();
        for q in 0..n {
            for nu in 0..2 {
                faces[nu][q][0] = q;
                for r in 0..ev[q].len() {
                    if faces[nu][q][1 << r] == UNSET {
                        v.push(MissingFace { cell: raw.cells[q].name.clone(), upper: nu == 1, row: r });
                    }
                }
            }
        }
        if !v.is_empty() {
            return Err(HdaReport { violations: v });
        }
        // Singleton faces commute pairwise.
        for q in 0..n {
            let d = ev[q].len();
            for r in 0..d {
                for s in r + 1..d {
                    for nu in 0..2 {
                        for mu in 0..2 {
                            // δ^ν_r δ^μ_s versus δ^μ_s δ^ν_r, rows renumbered after each face.
                            let a = faces[nu][faces[mu][q][1 << s]][1 << r];
                            let b = faces[mu][faces[nu][q][1 << r]][1 << (s - 1)];
                            if a != b {
                                v.push(NotCommuting { cell: raw.cells[q].name.clone(), first: (nu == 1, r), second: (mu == 1, s) });
                            }
                        }
                    }
                }
            }
        }
        if !v.is_empty() {
            return Err(HdaReport { violations: v });
        }
        // Larger faces by peeling off the lowest row; cells are processed in
        // order of dimension so that the smaller tables are complete.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&q| ev[q].len());
        for &q in &order {
            for nu in 0..2 {
                for mask in 1..(1u32 << ev[q].len()) {
                    if mask.count_ones() < 2 {
                        continue;
                    }
                    let r = mask.trailing_zeros() as usize;
                    let derived = faces[nu][faces[nu][q][1 << r]][drop_row(mask, r) as usize];
                    let slot = faces[nu][q][mask as usize];
                    if slot != UNSET && slot != derived {
                        v.push(ConflictingFaces {
                            cell: raw.cells[q].name.clone(),
                            upper: nu == 1,
                            rows: mask,
                            first: raw.cells[slot].name.clone(),
                            second: raw.cells[derived].name.clone(),
                        });
                    }
                    faces[nu][q][mask as usize] = derived;
                }
            }
        }
        if !v.is_empty() {
            return Err(HdaReport { violations: v });
        }
        let mut is_start = vec![false; n];
        let mut is_accept = vec![false; n];
        for &s in &start {
            is_start[s] = true;
        }
        for &a in &accept {
            is_accept[a] = true;
        }
        let start = (0..n).filter(|&q| is_start[q]).collect();
        let accept = (0..n).filter(|&q| is_accept[q]).collect();
        Ok(Hda { names: raw.cells.iter().map(|c| c.name.clone()).collect(), ev, faces, start, accept, is_start, is_accept })
    }

    /// Raw form with singleton faces only.
    pub fn to_raw(&self) -> RawHda {
        let mut faces = Vec::new();
        for q in 0..self.len() {
            for upper in [false, true] {
                for r in 0..self.ev[q].len() {
                    faces.push(RawFace {
                        cell: self.names[q].clone(),
                        upper,
                        rows: 1 << r,
                        target: self.names[self.face(q, upper, 1 << r)].clone(),
                    });
                }
            }
        }
        RawHda {
            cells: self.names.iter().zip(&self.ev).map(|(n, e)| RawCell { name: n.clone(), ev: e.clone() }).collect(),
            faces,
            start: self.start.iter().map(|&q| self.names[q].clone()).collect(),
            accept: self.accept.iter().map(|&q| self.names[q].clone()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty_set(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn cell(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn ev(&self, q: usize) -> &[Label] {
        &self.ev[q]
    }

    pub fn dimension(&self, q: usize) -> usize {
        self.ev[q].len()
    }

    /// `δ⁰_A(q)` or `δ¹_A(q)`.
    pub fn face(&self, q: usize, upper: bool, rows: RowMask) -> usize {
        self.faces[upper as usize][q][rows as usize]
    }

    pub fn start_cells(&self) -> &[usize] {
        &self.start
    }

    pub fn accept_cells(&self) -> &[usize] {
        &self.accept
    }

    pub fn is_start(&self, q: usize) -> bool {
        self.is_start[q]
    }

    pub fn is_accept(&self, q: usize) -> bool {
        self.is_accept[q]
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        self.ev.iter().flatten().cloned().collect()
    }

    /// All upsteps `δ⁰_A(q) ↗A q` with `A` nonempty.
    pub fn upsteps(&self) -> Vec<Upstep> {
        let mut out = Vec::new();
        for q in 0..self.len() {
            for a in 1..(1u32 << self.ev[q].len()) {
                out.push(Upstep { from: self.face(q, false, a), rows: a, to: q });
            }
        }
        out
    }

    /// All downsteps `q ↘A δ¹_A(q)` with `A` nonempty.
    pub fn downsteps(&self) -> Vec<Downstep> {
        let mut out = Vec::new();
        for q in 0..self.len() {
            for a in 1..(1u32 << self.ev[q].len()) {
                out.push(Downstep { from: q, rows: a, to: self.face(q, true, a) });
            }
        }
        out
    }
}

/// `from ↗A to`, where `A` indexes rows of `ev(to)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Upstep {
    pub from: usize,
    pub rows: RowMask,
    pub to: usize,
}

/// `from ↘A to`, where `A` indexes rows of `ev(from)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Downstep {
    pub from: usize,
    pub rows: RowMask,
    pub to: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    /// Rows of the cell entered.
    Up(RowMask),
    /// Rows of the cell left.
    Down(RowMask),
}

/// A path `q₀ s₁ q₁ … sₙ qₙ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    pub start: usize,
    pub steps: Vec<(Step, usize)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("cell index {0} out of range")]
    UnknownCell(usize),
    #[error("step {step}: empty event set")]
    EmptyStep { step: usize },
    #[error("step {step}: rows outside the cell's events")]
    RowsOutOfRange { step: usize },
    #[error("step {step}: cells are not related by that face")]
    NotAFace { step: usize },
}

impl Path {
    pub fn single(q: usize) -> Path {
        Path { start: q, steps: Vec::new() }
    }

    pub fn end(&self) -> usize {
        self.steps.last().map_or(self.start, |s| s.1)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.start).chain(self.steps.iter().map(|s| s.1))
    }

    pub fn display<'a>(&'a self, h: &'a Hda) -> impl fmt::Display + 'a {
        PathDisplay { path: self, hda: h }
    }
}

struct PathDisplay<'a> {
    path: &'a Path,
    hda: &'a Hda,
}

fn write_rows(f: &mut fmt::Formatter<'_>, ev: &[Label], rows: RowMask) -> fmt::Result {
    let items: Vec<String> = rows_of(rows)
        .map(|r| if ev.iter().filter(|l| **l == ev[r]).count() == 1 { ev[r].to_string() } else { format!("#{}", r + 1) })
        .collect();
    write!(f, "{{{}}}", items.join(","))
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.hda;
        write!(f, "{}", h.name(self.path.start))?;
        let mut cur = self.path.start;
        for &(step, next) in &self.path.steps {
            match step {
                Step::Up(a) => {
                    write!(f, " +")?;
                    write_rows(f, h.ev(next), a)?;
                }
                Step::Down(a) => {
                    write!(f, " -")?;
                    write_rows(f, h.ev(cur), a)?;
                }
            }
            write!(f, " {}", h.name(next))?;
            cur = next;
        }
        Ok(())
    }
}

pub fn validate_path(h: &Hda, path: &Path) -> Result<(), PathError> {
    if path.start >= h.len() {
        return Err(PathError::UnknownCell(path.start));
    }
    let mut cur = path.start;
    for (i, &(step, next)) in path.steps.iter().enumerate() {
        let step_no = i + 1;
        if next >= h.len() {
            return Err(PathError::UnknownCell(next));
        }
        let (big, rows) = match step {
            Step::Up(a) => (next, a),
            Step::Down(a) => (cur, a),
        };
        if rows == 0 {
            return Err(PathError::EmptyStep { step: step_no });
        }
        if rows & !full_mask(h.dimension(big)) != 0 {
            return Err(PathError::RowsOutOfRange { step: step_no });
        }
        let ok = match step {
            Step::Up(a) => h.face(next, false, a) == cur,
            Step::Down(a) => h.face(cur, true, a) == next,
        };
        if !ok {
            return Err(PathError::NotAFace { step: step_no });
        }
        cur = next;
    }
    Ok(())
}

pub fn is_accepting(h: &Hda, path: &Path) -> bool {
    h.is_start(path.start) && h.is_accept(path.end())
}

/// The word of step letters read along a path.
pub fn ev_of_path(h: &Hda, path: &Path) -> Result<StepWord, PathError> {
    validate_path(h, path)?;
    if path.steps.is_empty() {
        return Ok(StepWord(vec![StepLetter::identity(h.ev(path.start).to_vec())]));
    }
    let mut cur = path.start;
    let mut out = Vec::new();
    for &(step, next) in &path.steps {
        out.push(match step {
            Step::Up(a) => StepLetter::new(h.ev(next).to_vec(), StepKind::Starter, a),
            Step::Down(a) => StepLetter::new(h.ev(cur).to_vec(), StepKind::Terminator, a),
        });
        cur = next;
    }
    Ok(StepWord(out))
}

/// The event ipomset of a path.
pub fn path_ipomset(h: &Hda, path: &Path) -> Result<IPomset, PathError> {
    let w = ev_of_path(h, path)?;
    Ok(compose_word(w.letters()).expect("paths induce coherent words"))
}

/// Merges adjacent steps of the same direction.
pub fn normalize_path(h: &Hda, path: &Path) -> Result<Path, PathError> {
    validate_path(h, path)?;
    let mut out: Vec<(Step, usize)> = Vec::new();
    for &(step, next) in &path.steps {
        match (out.last().copied(), step) {
            (Some((Step::Up(a), _)), Step::Up(b)) => {
                *out.last_mut().unwrap() = (Step::Up(b | lift(a, b)), next);
            }
            (Some((Step::Down(a), _)), Step::Down(b)) => {
                *out.last_mut().unwrap() = (Step::Down(a | lift(b, a)), next);
            }
            _ => out.push((step, next)),
        }
    }
    Ok(Path { start: path.start, steps: out })
}

/// Result of a membership query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub accepted: bool,
    /// A sparse accepting path whose event ipomset is the query.
    pub witness: Option<Path>,
}

/// `P ∈ L(H)`, with a witness path.
pub fn membership(h: &Hda, p: &IPomset) -> Membership {
    if p.is_identity() {
        let conclist: Vec<Label> = p.sort_by_event_order(p.source_conclist()).into_iter().map(|e| p.label(e).clone()).collect();
        let witness = h.start_cells().iter().copied().find(|&q| h.is_accept(q) && h.ev(q) == conclist.as_slice());
        return Membership { accepted: witness.is_some(), witness: witness.map(Path::single) };
    }
    let w = sparse_decompose(p);
    let n = h.len();
    // lowered[p] lists the upsteps leaving p.
    let mut raised: Vec<Vec<(RowMask, usize)>> = vec![Vec::new(); n];
    for u in h.upsteps() {
        raised[u.from].push((u.rows, u.to));
    }
    let mut parent: Vec<HashMap<usize, usize>> = vec![HashMap::new(); w.len() + 1];
    let mut frontier: Vec<usize> = h.start_cells().to_vec();
    for &q in &frontier {
        parent[0].insert(q, usize::MAX);
    }
    for (i, letter) in w.letters().iter().enumerate() {
        let mut next = Vec::new();
        for &q in &frontier {
            let targets: Vec<usize> = if letter.is_starter() {
                raised[q]
                    .iter()
                    .filter(|&&(a, r)| a == letter.delta() && h.ev(r) == letter.carrier())
                    .map(|&(_, r)| r)
                    .collect()
            } else if h.ev(q) == letter.carrier() {
                vec![h.face(q, true, letter.delta())]
            } else {
                Vec::new()
            };
            for r in targets {
                if let std::collections::hash_map::Entry::Vacant(e) = parent[i + 1].entry(r) {
                    e.insert(q);
                    next.push(r);
                }
            }
        }
        next.sort_unstable();
        frontier = next;
    }
    let Some(&end) = frontier.iter().find(|&&q| h.is_accept(q)) else {
        return Membership { accepted: false, witness: None };
    };
    let mut cells = vec![end];
    for i in (1..=w.len()).rev() {
        cells.push(parent[i][cells.last().unwrap()]);
    }
    cells.reverse();
    let steps = w
        .letters()
        .iter()
        .zip(&cells[1..])
        .map(|(l, &q)| (if l.is_starter() { Step::Up(l.delta()) } else { Step::Down(l.delta()) }, q))
        .collect();
    Membership { accepted: true, witness: Some(Path { start: cells[0], steps }) }
}

/// Whether `L(H) = ∅`.
pub fn is_empty(h: &Hda) -> bool {
    let n = h.len();
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = h.start_cells().iter().copied().collect();
    for &q in &queue {
        seen[q] = true;
    }
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in h.upsteps() {
        succ[u.from].push(u.to);
    }
    for d in h.downsteps() {
        succ[d.from].push(d.to);
    }
    while let Some(q) = queue.pop_front() {
        if h.is_accept(q) {
            return false;
        }
        for &r in &succ[q] {
            if !seen[r] {
                seen[r] = true;
                queue.push_back(r);
            }
        }
    }
    true
}

/// Accepted ipomsets found by bounded path search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageSample {
    /// Canonical forms, sorted.
    pub members: Vec<StepWord>,
    /// Set when some sparse path reached the bound and could have continued.
    pub truncated: bool,
}

/// `ev(α)` for all accepting sparse paths with at most `max_steps` steps.
pub fn enumerate_language(h: &Hda, max_steps: usize) -> LanguageSample {
    let mut members = BTreeSet::new();
    let mut truncated = false;
    let ups = h.upsteps();
    let downs = h.downsteps();
    let mut up_from: Vec<Vec<Upstep>> = vec![Vec::new(); h.len()];
    for u in ups {
        up_from[u.from].push(u);
    }
    let mut down_from: Vec<Vec<Downstep>> = vec![Vec::new(); h.len()];
    for d in downs {
        down_from[d.from].push(d);
    }
    fn go(
        h: &Hda,
        up_from: &[Vec<Upstep>],
        down_from: &[Vec<Downstep>],
        word: &mut Vec<StepLetter>,
        cur: usize,
        last_up: Option<bool>,
        budget: usize,
        members: &mut BTreeSet<StepWord>,
        truncated: &mut bool,
    ) {
        if !word.is_empty() && h.is_accept(cur) {
            let p = compose_word(word).expect("paths induce coherent words");
            members.insert(p.canonical());
        }
        let can_up = last_up != Some(true) && !up_from[cur].is_empty();
        let can_down = last_up != Some(false) && !down_from[cur].is_empty();
        if budget == 0 {
            *truncated |= can_up || can_down;
            return;
        }
        if can_up {
            for u in &up_from[cur] {
                word.push(StepLetter::new(h.ev(u.to).to_vec(), StepKind::Starter, u.rows));
                go(h, up_from, down_from, word, u.to, Some(true), budget - 1, members, truncated);
                word.pop();
            }
        }
        if can_down {
            for d in &down_from[cur] {
                word.push(StepLetter::new(h.ev(d.from).to_vec(), StepKind::Terminator, d.rows));
                go(h, up_from, down_from, word, d.to, Some(false), budget - 1, members, truncated);
                word.pop();
            }
        }
    }
    for &q in h.start_cells() {
        if h.is_accept(q) {
            members.insert(StepWord(vec![StepLetter::identity(h.ev(q).to_vec())]));
        }
        go(h, &up_from, &down_from, &mut Vec::new(), q, None, max_steps, &mut members, &mut truncated);
    }
    LanguageSample { members: members.into_iter().collect(), truncated }
}

/// Labellings of started and terminated events by steps, as in the
/// accepting-run characterisation of membership.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunLabelling {
    /// Indexed by event; `None` exactly on sources.
    pub rup: Vec<Option<Upstep>>,
    /// Indexed by event; `None` exactly on targets.
    pub rdwn: Vec<Option<Downstep>>,
}

fn conclist_of(p: &IPomset, events: Vec<usize>) -> Vec<usize> {
    p.sort_by_event_order(events)
}

/// Checks the ten run conditions; returns the numbers of those that fail.
///
/// Conditions 5 and 6 are read position-wise: the rows of the step must
/// sit where the started (terminated) events sit in the active conclist.
pub fn check_run_labelling(h: &Hda, p: &IPomset, run: &RunLabelling) -> Vec<u8> {
    let idx = st_te_indices(p);
    let n = idx.word.len();
    let events = p.len();
    let mut failed = BTreeSet::new();
    for e in 0..events {
        if (run.rup[e].is_some()) == p.is_source(e) {
            failed.insert(0);
        }
        if (run.rdwn[e].is_some()) == p.is_target(e) {
            failed.insert(0);
        }
    }
    if failed.contains(&0) {
        return vec![0];
    }
    let at = |i: StepIndex| match i {
        StepIndex::At(k) => Some(k),
        _ => None,
    };
    for e1 in 0..events {
        let st1 = at(idx.start[e1]);
        let te1 = at(idx.end[e1]);
        for e2 in 0..events {
            let st2 = at(idx.start[e2]);
            let te2 = at(idx.end[e2]);
            if st1.is_some() && st1 == st2 && run.rup[e1] != run.rup[e2] {
                failed.insert(1);
            }
            if te1.is_some() && te1 == te2 && run.rdwn[e1] != run.rdwn[e2] {
                failed.insert(2);
            }
            if let (Some(s2), Some(t1)) = (st2, te1) {
                if s2 == t1 + 1 && run.rup[e2].unwrap().from != run.rdwn[e1].unwrap().to {
                    failed.insert(3);
                }
            }
            if let (Some(t2), Some(s1)) = (te2, st1) {
                if t2 == s1 + 1 && run.rdwn[e2].unwrap().from != run.rup[e1].unwrap().to {
                    failed.insert(4);
                }
            }
        }
        if let Some(s1) = st1 {
            let u = run.rup[e1].unwrap();
            let started: Vec<usize> = (0..events).filter(|&e| at(idx.start[e]) == Some(s1)).collect();
            let active = conclist_of(
                p,
                (0..events).filter(|&e| idx.start[e] <= StepIndex::At(s1) && StepIndex::At(s1) < idx.end[e]).collect(),
            );
            if !step_matches(h, p, u.to, u.rows, &active, &started) {
                failed.insert(5);
            }
            if s1 == 1 && !h.is_start(u.from) {
                failed.insert(7);
            }
            if s1 == n && !h.is_accept(u.to) {
                failed.insert(9);
            }
        }
        if let Some(t1) = te1 {
            let d = run.rdwn[e1].unwrap();
            let ended: Vec<usize> = (0..events).filter(|&e| at(idx.end[e]) == Some(t1)).collect();
            let active = conclist_of(
                p,
                (0..events).filter(|&e| idx.start[e] < StepIndex::At(t1) && StepIndex::At(t1) <= idx.end[e]).collect(),
            );
            if !step_matches(h, p, d.from, d.rows, &active, &ended) {
                failed.insert(6);
            }
            if t1 == 1 && !h.is_start(d.from) {
                failed.insert(8);
            }
            if t1 == n && !h.is_accept(d.to) {
                failed.insert(10);
            }
        }
    }
    failed.into_iter().collect()
}

/// Whether `ev(cell)` is the conclist `active` with `rows` at the positions
/// of `chosen`.
fn step_matches(h: &Hda, p: &IPomset, cell: usize, rows: RowMask, active: &[usize], chosen: &[usize]) -> bool {
    let labels: Vec<&Label> = active.iter().map(|&e| p.label(e)).collect();
    if h.ev(cell).iter().collect::<Vec<_>>() != labels {
        return false;
    }
    let want: RowMask = active.iter().enumerate().filter(|(_, e)| chosen.contains(e)).map(|(i, _)| 1 << i).sum();
    want == rows
}

/// Searches for a run labelling by backtracking over one step per letter
/// of the sparse decomposition. Identity ipomsets have none.
pub fn find_run_labelling(h: &Hda, p: &IPomset) -> Option<RunLabelling> {
    if p.is_identity() {
        return None;
    }
    let idx = st_te_indices(p);
    let n = idx.word.len();
    let ups = h.upsteps();
    let downs = h.downsteps();
    // Per letter, the candidate steps as (from, to) with their identity.
    #[derive(Clone, Copy)]
    enum Choice {
        Up(Upstep),
        Down(Downstep),
    }
    let mut candidates: Vec<Vec<Choice>> = Vec::with_capacity(n);
    for (l, letter) in idx.word.letters().iter().enumerate() {
        let c: Vec<Choice> = if letter.is_starter() {
            ups.iter()
                .filter(|u| u.rows == letter.delta() && h.ev(u.to) == letter.carrier())
                .filter(|u| l != 0 || h.is_start(u.from))
                .filter(|u| l + 1 != n || h.is_accept(u.to))
                .map(|&u| Choice::Up(u))
                .collect()
        } else {
            downs
                .iter()
                .filter(|d| d.rows == letter.delta() && h.ev(d.from) == letter.carrier())
                .filter(|d| l != 0 || h.is_start(d.from))
                .filter(|d| l + 1 != n || h.is_accept(d.to))
                .map(|&d| Choice::Down(d))
                .collect()
        };
        candidates.push(c);
    }
    let ends = |c: Choice| match c {
        Choice::Up(u) => (u.from, u.to),
        Choice::Down(d) => (d.from, d.to),
    };
    let mut chosen: Vec<Choice> = Vec::with_capacity(n);
    fn search(
        l: usize,
        candidates: &[Vec<Choice>],
        chosen: &mut Vec<Choice>,
        ends: &dyn Fn(Choice) -> (usize, usize),
    ) -> bool {
        if l == candidates.len() {
            return true;
        }
        for &c in &candidates[l] {
            if l > 0 && ends(chosen[l - 1]).1 != ends(c).0 {
                continue;
            }
            chosen.push(c);
            if search(l + 1, candidates, chosen, ends) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    if !search(0, &candidates, &mut chosen, &ends) {
        return None;
    }
    let mut run = RunLabelling { rup: vec![None; p.len()], rdwn: vec![None; p.len()] };
    for e in 0..p.len() {
        if let StepIndex::At(s) = idx.start[e] {
            if let Choice::Up(u) = chosen[s - 1] {
                run.rup[e] = Some(u);
            }
        }
        if let StepIndex::At(t) = idx.end[e] {
            if let Choice::Down(d) = chosen[t - 1] {
                run.rdwn[e] = Some(d);
            }
        }
    }
    Some(run)
}

/// Graphviz rendering: vertices as nodes, edges as arrows from their lower
/// to their upper face, higher cells as dashed boxes tied to their corners.
pub fn hda_to_dot(h: &Hda) -> String {
    let mut out = String::from("digraph hda {\n  rankdir=LR;\n");
    let label = |q: usize| {
        let ev: Vec<&str> = h.ev(q).iter().map(|l| l.as_str()).collect();
        format!("{} [{}]", h.name(q), ev.join(" "))
    };
    for q in 0..h.len() {
        let mut attrs = Vec::new();
        match h.dimension(q) {
            0 => {
                attrs.push(format!("label=\"{}\"", h.name(q)));
                attrs.push(if h.is_accept(q) { "shape=doublecircle".into() } else { "shape=circle".to_string() });
            }
            1 => continue,
            _ => {
                attrs.push(format!("label=\"{}\"", label(q)));
                attrs.push("shape=box".into());
                attrs.push("style=dashed".into());
            }
        }
        if h.is_start(q) {
            attrs.push("penwidth=2".into());
        }
        out.push_str(&format!("  \"{}\" [{}];\n", h.name(q), attrs.join(", ")));
    }
    for q in 0..h.len() {
        match h.dimension(q) {
            0 => {}
            1 => {
                let mut attrs = vec![format!("label=\"{}\"", label(q))];
                if h.is_start(q) {
                    attrs.push("penwidth=2".into());
                }
                if h.is_accept(q) {
                    attrs.push("style=bold".into());
                }
                out.push_str(&format!(
                    "  \"{}\" -> \"{}\" [{}];\n",
                    h.name(h.face(q, false, 1)),
                    h.name(h.face(q, true, 1)),
                    attrs.join(", ")
                ));
            }
            d => {
                let all = full_mask(d);
                out.push_str(&format!("  \"{}\" -> \"{}\" [style=dotted, arrowhead=none];\n", h.name(h.face(q, false, all)), h.name(q)));
                out.push_str(&format!("  \"{}\" -> \"{}\" [style=dotted, arrowhead=none];\n", h.name(q), h.name(h.face(q, true, all))));
            }
        }
    }
    out.push_str("}\n");
    out
}
