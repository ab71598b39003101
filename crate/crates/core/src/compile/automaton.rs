//! Word sentences to finite automata over step letters.
//!
//! Each subformula becomes a complete DFA over letters extended with one
//! bit per free variable ("track"). Connectives are products, negation
//! flips acceptance, and quantifiers project a track away followed by
//! subset construction; first-order tracks are first restricted to words
//! with exactly one marked position.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::rc::Rc;

use thiserror::Error;

use crate::mso::{Formula, Signature, SortError};
use crate::mso::{Node, NodeId, Program, VarId};
use crate::steps::StepLetter;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("formula has free variables: {0}")]
    NotASentence(String),
    #[error("automaton exceeded {limit} states")]
    TooManyStates { limit: usize },
    #[error("too many variables in scope ({0})")]
    TooManyTracks(usize),
}

#[derive(Clone, Copy, Debug)]
pub struct CompileOptions {
    /// Cap on the states of any intermediate automaton.
    pub max_states: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { max_states: 1_000_000 }
    }
}

const MAX_TRACKS: usize = 16;

/// A complete DFA; symbol `letter << tracks.len() | bits`, where bit `b`
/// is the value of `tracks[b]`. State 0 is initial.
#[derive(Clone, Debug)]
struct Dfa {
    tracks: Vec<VarId>,
    delta: Vec<u32>,
    accept: Vec<bool>,
}

impl Dfa {
    fn states(&self) -> usize {
        self.accept.len()
    }

    fn constant(letters: usize, value: bool) -> Dfa {
        Dfa { tracks: Vec::new(), delta: vec![0; letters], accept: vec![value] }
    }
}

struct Compiler<'p> {
    prog: &'p Program,
    letters: usize,
    letter_of: Vec<Option<usize>>,
    cache: HashMap<NodeId, Rc<Dfa>>,
    opts: CompileOptions,
}

impl Compiler<'_> {
    fn nsym(&self, tracks: usize) -> usize {
        self.letters << tracks
    }

    /// Builds an atom automaton over `tracks` from a transition function of
    /// (state, letter, bits).
    fn atom(&self, tracks: Vec<VarId>, accept: Vec<bool>, step: impl Fn(u32, usize, u32) -> u32) -> Dfa {
        let t = tracks.len();
        let nsym = self.nsym(t);
        let mut delta = vec![0; accept.len() * nsym];
        for s in 0..accept.len() {
            for sym in 0..nsym {
                delta[s * nsym + sym] = step(s as u32, sym >> t, (sym & ((1 << t) - 1)) as u32);
            }
        }
        Dfa { tracks, delta, accept }
    }

    fn binary(&self, x: VarId, y: VarId, accept: Vec<bool>, step: impl Fn(u32, bool, bool) -> u32) -> Dfa {
        let swap = x > y;
        let tracks = if swap { vec![y, x] } else { vec![x, y] };
        self.atom(tracks, accept, |s, _, bits| {
            let (b0, b1) = (bits & 1 == 1, bits & 2 == 2);
            if swap {
                step(s, b1, b0)
            } else {
                step(s, b0, b1)
            }
        })
    }

    fn singleton(&self, x: VarId) -> Dfa {
        // 0: unmarked so far, 1: marked once, 2: dead
        self.atom(vec![x], vec![false, true, false], |s, _, bits| match (s, bits) {
            (0, 0) => 0,
            (0, _) => 1,
            (1, 0) => 1,
            _ => 2,
        })
    }

    fn check(&self, d: &Dfa) -> Result<(), AutomatonError> {
        if d.states() > self.opts.max_states {
            return Err(AutomatonError::TooManyStates { limit: self.opts.max_states });
        }
        Ok(())
    }

    fn product(&self, a: &Dfa, b: &Dfa, conj: bool) -> Result<Dfa, AutomatonError> {
        let mut tracks: Vec<VarId> = a.tracks.iter().chain(&b.tracks).copied().collect();
        tracks.sort_unstable();
        tracks.dedup();
        if tracks.len() > MAX_TRACKS {
            return Err(AutomatonError::TooManyTracks(tracks.len()));
        }
        let t = tracks.len();
        let project = |sub: &[VarId]| -> Vec<u32> {
            let pos: Vec<usize> = sub.iter().map(|v| tracks.binary_search(v).unwrap()).collect();
            (0..1u32 << t)
                .map(|bits| pos.iter().enumerate().map(|(i, &p)| (bits >> p & 1) << i).sum())
                .collect()
        };
        let (pa, pb) = (project(&a.tracks), project(&b.tracks));
        let (ta, tb) = (a.tracks.len(), b.tracks.len());
        let (na, nb) = (self.nsym(ta), self.nsym(tb));
        let nsym = self.nsym(t);
        let mut index: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs = vec![(0u32, 0u32)];
        index.insert((0, 0), 0);
        let mut delta = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (sa, sb) = pairs[i];
            for sym in 0..nsym {
                let letter = sym >> t;
                let bits = sym & ((1 << t) - 1);
                let ya = (letter << ta) | pa[bits] as usize;
                let yb = (letter << tb) | pb[bits] as usize;
                let next = (a.delta[sa as usize * na + ya], b.delta[sb as usize * nb + yb]);
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = pairs.len() as u32;
                        if pairs.len() >= self.opts.max_states {
                            return Err(AutomatonError::TooManyStates { limit: self.opts.max_states });
                        }
                        index.insert(next, id);
                        pairs.push(next);
                        id
                    }
                };
                delta.push(id);
            }
            i += 1;
        }
        let accept = pairs
            .iter()
            .map(|&(x, y)| {
                let (x, y) = (a.accept[x as usize], b.accept[y as usize]);
                if conj {
                    x && y
                } else {
                    x || y
                }
            })
            .collect();
        Ok(minimize(Dfa { tracks, delta, accept }, self.letters))
    }

    fn complement(&self, a: &Dfa) -> Dfa {
        Dfa { tracks: a.tracks.clone(), delta: a.delta.clone(), accept: a.accept.iter().map(|x| !x).collect() }
    }

    /// `∃v` by dropping the track and determinising.
    fn project(&self, a: &Dfa, v: VarId) -> Result<Dfa, AutomatonError> {
        let Ok(pos) = a.tracks.binary_search(&v) else {
            return Ok(a.clone());
        };
        let tracks: Vec<VarId> = a.tracks.iter().copied().filter(|&x| x != v).collect();
        let t = tracks.len();
        let old_t = a.tracks.len();
        let old_nsym = self.nsym(old_t);
        let nsym = self.nsym(t);
        let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut sets = vec![vec![0u32]];
        index.insert(vec![0], 0);
        let mut delta = Vec::new();
        let low = (1u32 << pos) - 1;
        let mut i = 0;
        while i < sets.len() {
            for sym in 0..nsym {
                let letter = sym >> t;
                let bits = (sym & ((1 << t) - 1)) as u32;
                let base = ((bits & !low) << 1) | (bits & low);
                let y0 = (letter << old_t) | base as usize;
                let y1 = y0 | (1 << pos);
                let mut next: Vec<u32> = Vec::with_capacity(sets[i].len() * 2);
                for &s in &sets[i] {
                    next.push(a.delta[s as usize * old_nsym + y0]);
                    next.push(a.delta[s as usize * old_nsym + y1]);
                }
                next.sort_unstable();
                next.dedup();
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = sets.len() as u32;
                        if sets.len() >= self.opts.max_states {
                            return Err(AutomatonError::TooManyStates { limit: self.opts.max_states });
                        }
                        index.insert(next.clone(), id);
                        sets.push(next);
                        id
                    }
                };
                delta.push(id);
            }
            i += 1;
        }
        let accept = sets.iter().map(|s| s.iter().any(|&q| a.accept[q as usize])).collect();
        Ok(minimize(Dfa { tracks, delta, accept }, self.letters))
    }

    fn compile(&mut self, id: NodeId) -> Result<Rc<Dfa>, AutomatonError> {
        if let Some(d) = self.cache.get(&id) {
            return Ok(d.clone());
        }
        let d = self.build(id)?;
        self.check(&d)?;
        let d = Rc::new(d);
        self.cache.insert(id, d.clone());
        Ok(d)
    }

    fn build(&mut self, id: NodeId) -> Result<Dfa, AutomatonError> {
        let node = self.prog.node(id).clone();
        Ok(match node {
            Node::Const(b) => Dfa::constant(self.letters, b),
            Node::Letter(l, x) => {
                let want = self.letter_of[l as usize];
                self.atom(vec![x], vec![true, false], |s, letter, bits| {
                    if s == 1 || (bits == 1 && Some(letter) != want) {
                        1
                    } else {
                        0
                    }
                })
            }
            Node::Less(x, y) | Node::Succ(x, y) if x == y => Dfa::constant(self.letters, false),
            Node::Equal(x, y) if x == y => Dfa::constant(self.letters, true),
            Node::Less(x, y) => self.binary(x, y, vec![false, false, true, false], |s, bx, by| match s {
                0 if by => 3,
                0 if bx => 1,
                0 => 0,
                1 if by => 2,
                1 => 1,
                2 => 2,
                _ => 3,
            }),
            Node::Succ(x, y) => self.binary(x, y, vec![false, false, true, false], |s, bx, by| match s {
                0 if by => 3,
                0 if bx => 1,
                0 => 0,
                1 if by => 2,
                2 => 2,
                _ => 3,
            }),
            Node::Equal(x, y) => self.binary(x, y, vec![false, true, false], |s, bx, by| match s {
                0 if bx && by => 1,
                0 if bx || by => 2,
                0 => 0,
                1 => 1,
                _ => 2,
            }),
            Node::In(x, set) => self.binary(x, set, vec![true, false], |s, bx, bs| if s == 1 || (bx && !bs) { 1 } else { 0 }),
            Node::Label(..) | Node::Source(_) | Node::Target(_) | Node::EventOrder(..) => {
                unreachable!("signature checked")
            }
            Node::Not(c) => {
                let d = self.compile(c)?;
                self.complement(&d)
            }
            Node::And(cs) | Node::Or(cs) => {
                let conj = matches!(self.prog.node(id), Node::And(_));
                let mut acc = (*self.compile(cs[0])?).clone();
                for &c in &cs[1..] {
                    let d = self.compile(c)?;
                    acc = self.product(&acc, &d, conj)?;
                    self.check(&acc)?;
                }
                acc
            }
            Node::Exists(v, c) | Node::Forall(v, c) => {
                let exists = matches!(self.prog.node(id), Node::Exists(..));
                let body = self.compile(c)?;
                let body = if exists { (*body).clone() } else { self.complement(&body) };
                let restricted = if self.prog.vars[v as usize].second_order {
                    body
                } else {
                    self.product(&body, &self.singleton(v), true)?
                };
                let projected = self.project(&restricted, v)?;
                if exists {
                    projected
                } else {
                    self.complement(&projected)
                }
            }
        })
    }
}

/// Moore partition refinement; also drops unreachable states.
fn minimize(d: Dfa, letters: usize) -> Dfa {
    let nsym = letters << d.tracks.len();
    let n = d.states();
    // reachable states from 0
    let mut order = vec![u32::MAX; n];
    let mut reach = vec![0u32];
    order[0] = 0;
    let mut i = 0;
    while i < reach.len() {
        let s = reach[i] as usize;
        for sym in 0..nsym {
            let t = d.delta[s * nsym + sym] as usize;
            if order[t] == u32::MAX {
                order[t] = reach.len() as u32;
                reach.push(t as u32);
            }
        }
        i += 1;
    }
    let m = reach.len();
    let mut class: Vec<u32> = reach.iter().map(|&s| d.accept[s as usize] as u32).collect();
    let mut classes = if class.iter().all(|&c| c == class[0]) { 1 } else { 2 };
    loop {
        let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut next = vec![0u32; m];
        for (k, &s) in reach.iter().enumerate() {
            let mut sig = Vec::with_capacity(nsym + 1);
            sig.push(class[k]);
            for sym in 0..nsym {
                sig.push(class[order[d.delta[s as usize * nsym + sym] as usize] as usize]);
            }
            let len = index.len() as u32;
            next[k] = *index.entry(sig).or_insert(len);
        }
        let count = index.len();
        class = next;
        if count == classes {
            break;
        }
        classes = count;
    }
    // renumber so that the initial state is 0
    let mut rename = vec![u32::MAX; classes];
    let mut count = 0;
    for &c in &class {
        if rename[c as usize] == u32::MAX {
            rename[c as usize] = count;
            count += 1;
        }
    }
    let mut delta = vec![0; classes * nsym];
    let mut accept = vec![false; classes];
    for (k, &s) in reach.iter().enumerate() {
        let c = rename[class[k] as usize] as usize;
        accept[c] = d.accept[s as usize];
        for sym in 0..nsym {
            let t = order[d.delta[s as usize * nsym + sym] as usize] as usize;
            delta[c * nsym + sym] = rename[class[t] as usize];
        }
    }
    Dfa { tracks: d.tracks, delta, accept }
}

/// A finite automaton over step letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepNfa {
    pub alphabet: Vec<StepLetter>,
    pub states: usize,
    pub initial: Vec<usize>,
    pub accepting: Vec<usize>,
    /// `(from, letter index, to)`, sorted.
    pub transitions: Vec<(usize, usize, usize)>,
    pub deterministic: bool,
}

impl StepNfa {
    fn letter_index(&self) -> HashMap<&StepLetter, usize> {
        self.alphabet.iter().enumerate().map(|(i, l)| (l, i)).collect()
    }

    fn successors(&self) -> Vec<Vec<(usize, usize)>> {
        let mut succ = vec![Vec::new(); self.states];
        for &(p, a, q) in &self.transitions {
            succ[p].push((a, q));
        }
        succ
    }

    pub fn accepts(&self, word: &[StepLetter]) -> bool {
        let index = self.letter_index();
        let succ = self.successors();
        let mut current: Vec<bool> = vec![false; self.states];
        for &q in &self.initial {
            current[q] = true;
        }
        for l in word {
            let Some(&a) = index.get(l) else {
                return false;
            };
            let mut next = vec![false; self.states];
            for (p, on) in current.iter().enumerate() {
                if *on {
                    for &(b, q) in &succ[p] {
                        if a == b {
                            next[q] = true;
                        }
                    }
                }
            }
            current = next;
        }
        self.accepting.iter().any(|&q| current[q])
    }

    pub fn is_empty(&self) -> bool {
        self.shortest_word(|_| true, |_| true).is_none()
    }

    /// A shortest accepted word whose first letter satisfies `first` and
    /// whose last letter satisfies `last`.
    pub fn shortest_word(
        &self,
        first: impl Fn(&StepLetter) -> bool,
        last: impl Fn(&StepLetter) -> bool,
    ) -> Option<Vec<StepLetter>> {
        // node flag: 0 before any letter, 1 last letter rejected, 2 accepted
        type N = (usize, u8);
        let succ = self.successors();
        let mut parent: HashMap<N, (N, usize)> = HashMap::new();
        let mut seen: std::collections::HashSet<N> = std::collections::HashSet::new();
        let mut queue = VecDeque::new();
        for &q in &self.initial {
            if seen.insert((q, 0)) {
                queue.push_back((q, 0));
            }
        }
        while let Some(node) = queue.pop_front() {
            if node.1 == 2 && self.accepting.contains(&node.0) {
                let mut word = Vec::new();
                let mut cur = node;
                while let Some(&(prev, a)) = parent.get(&cur) {
                    word.push(self.alphabet[a].clone());
                    cur = prev;
                }
                word.reverse();
                return Some(word);
            }
            for &(a, r) in &succ[node.0] {
                let l = &self.alphabet[a];
                if node.1 == 0 && !first(l) {
                    continue;
                }
                let next = (r, if last(l) { 2 } else { 1 });
                if seen.insert(next) {
                    parent.insert(next, (node, a));
                    queue.push_back(next);
                }
            }
        }
        None
    }

    /// One `state letter state` line per transition, then the initial and
    /// accepting states.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for &(p, a, q) in &self.transitions {
            let _ = writeln!(out, "{p} {} {q}", self.alphabet[a]);
        }
        let list = |v: &[usize]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "initial: {}", list(&self.initial));
        let _ = writeln!(out, "accepting: {}", list(&self.accepting));
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph nfa {\n  rankdir=LR;\n  init [shape=point];\n");
        for q in 0..self.states {
            let shape = if self.accepting.contains(&q) { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  q{q} [shape={shape}, label=\"{q}\"];");
        }
        for &q in &self.initial {
            let _ = writeln!(out, "  init -> q{q};");
        }
        // one edge per state pair, letters joined
        let mut edges: Vec<((usize, usize), Vec<String>)> = Vec::new();
        for &(p, a, q) in &self.transitions {
            match edges.last_mut() {
                Some((key, labels)) if *key == (p, q) => labels.push(self.alphabet[a].to_string()),
                _ => edges.push(((p, q), vec![self.alphabet[a].to_string()])),
            }
        }
        for ((p, q), labels) in edges {
            let _ = writeln!(out, "  q{p} -> q{q} [label=\"{}\"];", labels.join("\\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Compiles a word sentence to an automaton accepting exactly the words
/// over `alphabet` that satisfy it.
pub fn word_mso_to_nfa(psi: &Formula, alphabet: &[StepLetter], opts: CompileOptions) -> Result<StepNfa, AutomatonError> {
    psi.check_signature(Signature::Word)?;
    let (fo, so) = psi.free_vars();
    if !fo.is_empty() || !so.is_empty() {
        let names: Vec<String> = fo.into_iter().chain(so).collect();
        return Err(AutomatonError::NotASentence(names.join(", ")));
    }
    let prog = Program::new(psi)?;
    let index: HashMap<&StepLetter, usize> = alphabet.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let letter_of = prog.letters.iter().map(|l| index.get(l).copied()).collect();
    let mut c = Compiler { prog: &prog, letters: alphabet.len(), letter_of, cache: HashMap::new(), opts };
    let d = c.compile(prog.root)?;
    Ok(to_nfa(&d, alphabet))
}

/// Drops states that cannot reach acceptance (keeping the initial one).
fn to_nfa(d: &Dfa, alphabet: &[StepLetter]) -> StepNfa {
    let letters = alphabet.len();
    let n = d.states();
    let mut live = d.accept.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            if !live[s] && (0..letters).any(|a| live[d.delta[s * letters + a] as usize]) {
                live[s] = true;
                changed = true;
            }
        }
    }
    let mut rename = vec![usize::MAX; n];
    let mut count = 0;
    for s in 0..n {
        if live[s] || s == 0 {
            rename[s] = count;
            count += 1;
        }
    }
    let mut transitions = Vec::new();
    for s in 0..n {
        if rename[s] == usize::MAX {
            continue;
        }
        for a in 0..letters {
            let t = d.delta[s * letters + a] as usize;
            if live[t] {
                transitions.push((rename[s], a, rename[t]));
            }
        }
    }
    transitions.sort_unstable();
    StepNfa {
        alphabet: alphabet.to_vec(),
        states: count,
        initial: vec![0],
        accepting: (0..n).filter(|&s| d.accept[s]).map(|s| rename[s]).collect(),
        transitions,
        deterministic: true,
    }
}
