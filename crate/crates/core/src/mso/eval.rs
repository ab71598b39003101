//! Model checking.
//!
//! Evaluation runs over the hash-consed [`Program`]. Quantifier nodes are
//! memoised on the values of their free variables, so a subformula is
//! evaluated at most once per relevant valuation. Blocks of second-order
//! quantifiers too large to enumerate are grounded into a propositional
//! clauses over membership bits and handed to a small DPLL solver.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use super::dpll::{lit, solve, Cnf};
use super::program::{Node, NodeId, Program, VarId};
use super::{Formula, Signature, SortError};
use crate::ipomset::IPomset;
use crate::steps::StepLetter;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("free variable {0} has no value")]
    Unbound(String),
    #[error("value of {0} is out of range")]
    OutOfRange(String),
    #[error("structure has {actual} elements, second-order evaluation is capped at {limit}")]
    TooLarge { actual: usize, limit: usize },
    #[error("letter {0} is not in the configured alphabet")]
    LetterNotInAlphabet(String),
    #[error("cannot ground a second-order quantifier over {0} elements")]
    GroundingTooLarge(usize),
}

/// Resource settings for evaluation.
#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    /// Largest structure on which second-order variables are allowed.
    pub max_elements: usize,
    /// Blocks of set quantifiers with at most this many membership bits are
    /// enumerated directly; larger ones go through the SAT path.
    pub brute_force_bits: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { max_elements: 16, brute_force_bits: 4 }
    }
}

/// Values of free variables: elements are 0-based event indices or word
/// positions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Valuation {
    pub first: BTreeMap<String, usize>,
    pub second: BTreeMap<String, BTreeSet<usize>>,
}

impl Valuation {
    pub fn new() -> Valuation {
        Valuation::default()
    }

    pub fn element(mut self, var: &str, e: usize) -> Valuation {
        self.first.insert(var.to_string(), e);
        self
    }

    pub fn set(mut self, var: &str, elements: impl IntoIterator<Item = usize>) -> Valuation {
        self.second.insert(var.to_string(), elements.into_iter().collect());
        self
    }
}

/// A formula prepared for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledFormula {
    program: Program,
    memoize: Vec<bool>,
    uses_sets: bool,
    word_atoms: bool,
    ipomset_atoms: bool,
}

impl CompiledFormula {
    pub fn new(f: &Formula) -> Result<CompiledFormula, EvalError> {
        let program = Program::new(f)?;
        Ok(CompiledFormula::from_program(program))
    }

    pub(crate) fn from_program(program: Program) -> CompiledFormula {
        let memoize = program
            .nodes
            .iter()
            .map(|n| match n {
                Node::Exists(..) | Node::Forall(..) => true,
                Node::And(cs) | Node::Or(cs) => cs.len() >= 8,
                _ => false,
            })
            .collect();
        let uses_sets = program.vars.iter().any(|v| v.second_order);
        let word_atoms = program.nodes.iter().any(|n| matches!(n, Node::Letter(..)));
        let ipomset_atoms = program
            .nodes
            .iter()
            .any(|n| matches!(n, Node::Label(..) | Node::Source(_) | Node::Target(_) | Node::EventOrder(..)));
        CompiledFormula { program, memoize, uses_sets, word_atoms, ipomset_atoms }
    }

    pub fn eval_ipomset(&self, p: &IPomset, nu: &Valuation) -> Result<bool, EvalError> {
        self.eval_ipomset_with(p, nu, EvalOptions::default())
    }

    pub fn eval_ipomset_with(&self, p: &IPomset, nu: &Valuation, opts: EvalOptions) -> Result<bool, EvalError> {
        if self.word_atoms {
            return Err(self.signature_error(Signature::IPomset));
        }
        let n = p.len();
        let label_ids: HashMap<_, u32> =
            self.program.labels.iter().enumerate().map(|(i, l)| (l.clone(), i as u32)).collect();
        let mut lt = vec![false; n * n];
        let mut ev = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                lt[a * n + b] = p.precedes(a, b);
                ev[a * n + b] = p.event_order(a, b);
            }
        }
        let mut succ = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                succ[a * n + b] = lt[a * n + b] && !(0..n).any(|z| lt[a * n + z] && lt[z * n + b]);
            }
        }
        let model = Model {
            n,
            label: (0..n).map(|e| label_ids.get(p.label(e)).copied().unwrap_or(NONE)).collect(),
            letter: Vec::new(),
            src: (0..n).map(|e| p.is_source(e)).collect(),
            tgt: (0..n).map(|e| p.is_target(e)).collect(),
            lt,
            ev,
            succ,
        };
        self.run(model, nu, opts)
    }

    pub fn eval_word(&self, w: &[StepLetter], nu: &Valuation) -> Result<bool, EvalError> {
        self.eval_word_with(w, nu, EvalOptions::default())
    }

    pub fn eval_word_with(&self, w: &[StepLetter], nu: &Valuation, opts: EvalOptions) -> Result<bool, EvalError> {
        if self.ipomset_atoms {
            return Err(self.signature_error(Signature::Word));
        }
        let n = w.len();
        let letter_ids: HashMap<&StepLetter, u32> =
            self.program.letters.iter().enumerate().map(|(i, l)| (l, i as u32)).collect();
        let mut lt = vec![false; n * n];
        let mut succ = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                lt[a * n + b] = a < b;
                succ[a * n + b] = b == a + 1;
            }
        }
        let model = Model {
            n,
            label: Vec::new(),
            letter: w.iter().map(|l| letter_ids.get(l).copied().unwrap_or(NONE)).collect(),
            src: Vec::new(),
            tgt: Vec::new(),
            lt,
            ev: Vec::new(),
            succ,
        };
        self.run(model, nu, opts)
    }

    fn signature_error(&self, signature: Signature) -> EvalError {
        let atom = self
            .program
            .nodes
            .iter()
            .find_map(|n| match (n, signature) {
                (Node::Letter(l, _), Signature::IPomset) => Some(format!("L\"{}\"", self.program.letters[*l as usize])),
                (Node::Label(l, _), Signature::Word) => Some(self.program.labels[*l as usize].to_string()),
                (Node::Source(_), Signature::Word) => Some("s".into()),
                (Node::Target(_), Signature::Word) => Some("t".into()),
                (Node::EventOrder(..), Signature::Word) => Some("~>".into()),
                _ => None,
            })
            .unwrap_or_default();
        EvalError::Sort(SortError::WrongSignature { atom, signature })
    }

    fn run(&self, model: Model, nu: &Valuation, opts: EvalOptions) -> Result<bool, EvalError> {
        let n = model.n;
        if self.uses_sets && n > opts.max_elements.min(32) {
            return Err(EvalError::TooLarge { actual: n, limit: opts.max_elements.min(32) });
        }
        let mut val = vec![0u32; self.program.vars.len()];
        for &v in self.program.free_vars(self.program.root) {
            let info = &self.program.vars[v as usize];
            if info.second_order {
                let set = nu.second.get(&info.name).ok_or_else(|| EvalError::Unbound(info.name.clone()))?;
                let mut mask = 0u32;
                for &e in set {
                    if e >= n {
                        return Err(EvalError::OutOfRange(info.name.clone()));
                    }
                    mask |= 1 << e;
                }
                val[v as usize] = mask;
            } else {
                let e = *nu.first.get(&info.name).ok_or_else(|| EvalError::Unbound(info.name.clone()))?;
                if e >= n {
                    return Err(EvalError::OutOfRange(info.name.clone()));
                }
                val[v as usize] = e as u32;
            }
        }
        let mut ev = Evaluator {
            prog: &self.program,
            memoize: &self.memoize,
            m: model,
            val,
            memo: (0..self.program.nodes.len()).map(|_| None).collect(),
            arena: Vec::new(),
            opts,
        };
        ev.eval(self.program.root)
    }
}

const NONE: u32 = u32::MAX;

struct Model {
    n: usize,
    label: Vec<u32>,
    letter: Vec<u32>,
    src: Vec<bool>,
    tgt: Vec<bool>,
    lt: Vec<bool>,
    ev: Vec<bool>,
    succ: Vec<bool>,
}

enum Table {
    /// Offset into the evaluator's arena.
    Dense(usize),
    Sparse(HashMap<u128, bool>),
}

struct Memo {
    strides: Vec<(VarId, u128)>,
    table: Table,
}

struct Evaluator<'p> {
    prog: &'p Program,
    memoize: &'p [bool],
    m: Model,
    val: Vec<u32>,
    memo: Vec<Option<Memo>>,
    arena: Vec<u8>,
    opts: EvalOptions,
}

/// Result of grounding: a constant or a literal of the clause store.
enum Ground {
    Const(bool),
    Lit(u32),
}

struct Block {
    /// Position of each variable in the block, or `NONE`.
    slot: Vec<u32>,
    cnf: Cnf,
    /// Literals of the junctions being grounded.
    stack: Vec<u32>,
}

impl Block {
    /// A literal implying the conjunction or disjunction of `stack[mark..]`
    /// (one-sided definitions suffice as every literal occurs positively).
    fn junction(&mut self, conj: bool, mark: usize) -> Ground {
        let g = match self.stack.len() - mark {
            0 => Ground::Const(conj),
            1 => Ground::Lit(self.stack[mark]),
            _ => {
                let t = self.cnf.fresh();
                if conj {
                    for i in mark..self.stack.len() {
                        self.cnf.clause(&[lit(t, false), self.stack[i]]);
                    }
                } else {
                    self.stack.push(lit(t, false));
                    self.cnf.clause(&self.stack[mark..]);
                }
                Ground::Lit(lit(t, true))
            }
        };
        self.stack.truncate(mark);
        g
    }
}

impl Evaluator<'_> {
    fn domain(&self, v: VarId) -> u128 {
        if self.prog.vars[v as usize].second_order {
            1u128 << self.m.n
        } else {
            self.m.n.max(1) as u128
        }
    }

    fn memo_key(&self, memo: &Memo) -> u128 {
        memo.strides.iter().map(|&(v, s)| self.val[v as usize] as u128 * s).sum()
    }

    fn new_memo(&mut self, id: NodeId) -> Memo {
        let mut strides = Vec::new();
        let mut total: u128 = 1;
        let mut fits = true;
        for &v in self.prog.free_vars(id) {
            strides.push((v, total));
            match total.checked_mul(self.domain(v)) {
                Some(t) => total = t,
                None => fits = false,
            }
        }
        let table = if fits && total <= 1 << 16 {
            let offset = self.arena.len();
            self.arena.resize(offset + total as usize, 0);
            Table::Dense(offset)
        } else {
            Table::Sparse(HashMap::new())
        };
        Memo { strides, table }
    }

    fn eval(&mut self, id: NodeId) -> Result<bool, EvalError> {
        if !self.memoize[id as usize] {
            return self.compute(id);
        }
        let key = match &self.memo[id as usize] {
            Some(memo) => {
                let key = self.memo_key(memo);
                let hit = match &memo.table {
                    Table::Dense(o) => match self.arena[o + key as usize] {
                        0 => None,
                        x => Some(x == 2),
                    },
                    Table::Sparse(t) => t.get(&key).copied(),
                };
                if let Some(r) = hit {
                    return Ok(r);
                }
                key
            }
            None => {
                let memo = self.new_memo(id);
                let key = self.memo_key(&memo);
                self.memo[id as usize] = Some(memo);
                key
            }
        };
        let r = self.compute(id)?;
        match &mut self.memo[id as usize].as_mut().unwrap().table {
            Table::Dense(o) => self.arena[*o + key as usize] = 1 + r as u8,
            Table::Sparse(t) => {
                t.insert(key, r);
            }
        }
        Ok(r)
    }

    fn compute(&mut self, id: NodeId) -> Result<bool, EvalError> {
        let n = self.m.n;
        let val = |v: &VarId| self.val[*v as usize] as usize;
        Ok(match self.prog.node(id) {
            Node::Const(b) => *b,
            Node::Label(l, x) => self.m.label[val(x)] == *l,
            Node::Source(x) => self.m.src[val(x)],
            Node::Target(x) => self.m.tgt[val(x)],
            Node::Letter(l, x) => self.m.letter[val(x)] == *l,
            Node::Less(x, y) => self.m.lt[val(x) * n + val(y)],
            Node::EventOrder(x, y) => self.m.ev[val(x) * n + val(y)],
            Node::Equal(x, y) => val(x) == val(y),
            Node::Succ(x, y) => self.m.succ[val(x) * n + val(y)],
            Node::In(x, s) => self.val[*s as usize] >> val(x) & 1 == 1,
            Node::Not(c) => !self.eval(*c)?,
            Node::And(cs) => {
                for &c in cs {
                    if !self.eval(c)? {
                        return Ok(false);
                    }
                }
                true
            }
            Node::Or(cs) => {
                for &c in cs {
                    if self.eval(c)? {
                        return Ok(true);
                    }
                }
                false
            }
            Node::Exists(v, c) | Node::Forall(v, c) => {
                let exists = matches!(self.prog.node(id), Node::Exists(..));
                let (v, c) = (*v, *c);
                if self.prog.vars[v as usize].second_order {
                    return self.set_quantifier(id, exists);
                }
                let saved = self.val[v as usize];
                let mut result = !exists;
                for e in 0..n {
                    self.val[v as usize] = e as u32;
                    if self.eval(c)? == exists {
                        result = exists;
                        break;
                    }
                }
                self.val[v as usize] = saved;
                result
            }
        })
    }

    /// Evaluates a maximal block of like set quantifiers starting at `id`.
    fn set_quantifier(&mut self, id: NodeId, exists: bool) -> Result<bool, EvalError> {
        let mut vars = Vec::new();
        let mut cur = id;
        loop {
            match self.prog.node(cur) {
                Node::Exists(v, c) if exists && self.prog.vars[*v as usize].second_order => {
                    vars.push(*v);
                    cur = *c;
                }
                Node::Forall(v, c) if !exists && self.prog.vars[*v as usize].second_order => {
                    vars.push(*v);
                    cur = *c;
                }
                _ => break,
            }
        }
        let n = self.m.n;
        let saved: Vec<u32> = vars.iter().map(|&v| self.val[v as usize]).collect();
        let result = if vars.len() * n <= self.opts.brute_force_bits {
            self.enumerate_sets(&vars, cur, exists)
        } else {
            let mut slot = vec![NONE; self.prog.vars.len()];
            for (i, &v) in vars.iter().enumerate() {
                slot[v as usize] = i as u32;
            }
            let mut block = Block { slot, cnf: Cnf::new((vars.len() * n) as u32), stack: Vec::new() };
            // ∃ asks for a model of the body, ∀ for a model of its negation.
            let sat = match self.ground(cur, exists, &mut block)? {
                Ground::Const(b) => b,
                Ground::Lit(l) => {
                    block.cnf.clause(&[l]);
                    solve(block.cnf)
                }
            };
            Ok(if exists { sat } else { !sat })
        };
        for (&v, s) in vars.iter().zip(saved) {
            self.val[v as usize] = s;
        }
        result
    }

    fn enumerate_sets(&mut self, vars: &[VarId], body: NodeId, exists: bool) -> Result<bool, EvalError> {
        let Some((&v, rest)) = vars.split_first() else {
            return self.eval(body);
        };
        for mask in 0..(1u64 << self.m.n) {
            self.val[v as usize] = mask as u32;
            if self.enumerate_sets(rest, body, exists)? == exists {
                return Ok(exists);
            }
        }
        Ok(!exists)
    }

    fn mentions(&self, id: NodeId, block: &Block) -> bool {
        self.prog.free_vars(id).iter().any(|&v| block.slot[v as usize] != NONE)
    }

    /// Grounds `id` (or its negation when `positive` is false) under the
    /// current valuation into the block's clause store.
    fn ground(&mut self, id: NodeId, positive: bool, block: &mut Block) -> Result<Ground, EvalError> {
        if !self.mentions(id, block) {
            return Ok(Ground::Const(self.eval(id)? == positive));
        }
        let n = self.m.n;
        match self.prog.node(id) {
            &Node::In(x, s) => {
                let bit = block.slot[s as usize] as usize * n + self.val[x as usize] as usize;
                Ok(Ground::Lit(lit(bit as u32, positive)))
            }
            &Node::Not(c) => self.ground(c, !positive, block),
            Node::And(cs) | Node::Or(cs) => {
                let conj = matches!(self.prog.node(id), Node::And(..)) == positive;
                let mark = block.stack.len();
                for &c in cs {
                    match self.ground(c, positive, block)? {
                        Ground::Const(b) if b != conj => {
                            block.stack.truncate(mark);
                            return Ok(Ground::Const(b));
                        }
                        Ground::Const(_) => {}
                        Ground::Lit(l) => block.stack.push(l),
                    }
                }
                Ok(block.junction(conj, mark))
            }
            &Node::Exists(v, c) | &Node::Forall(v, c) => {
                let disj = matches!(self.prog.node(id), Node::Exists(..)) == positive;
                let second = self.prog.vars[v as usize].second_order;
                if second && n > 6 {
                    return Err(EvalError::GroundingTooLarge(n));
                }
                let range = if second { 1u32 << n } else { n as u32 };
                let saved = self.val[v as usize];
                let mark = block.stack.len();
                let mut short = None;
                for e in 0..range {
                    self.val[v as usize] = e;
                    match self.ground(c, positive, block)? {
                        Ground::Const(b) if b == disj => {
                            short = Some(b);
                            break;
                        }
                        Ground::Const(_) => {}
                        Ground::Lit(l) => block.stack.push(l),
                    }
                }
                self.val[v as usize] = saved;
                Ok(match short {
                    Some(b) => {
                        block.stack.truncate(mark);
                        Ground::Const(b)
                    }
                    None => block.junction(!disj, mark),
                })
            }
            _ => unreachable!("only membership atoms mention set variables"),
        }
    }
}

/// `P ⊨_ν φ`.
pub fn eval_ipomset(phi: &Formula, p: &IPomset, nu: &Valuation) -> Result<bool, EvalError> {
    phi.check_signature(Signature::IPomset)?;
    CompiledFormula::new(phi)?.eval_ipomset(p, nu)
}

/// `w ⊨_ν ψ` with positions numbered from 0.
pub fn eval_word(psi: &Formula, w: &[StepLetter], nu: &Valuation) -> Result<bool, EvalError> {
    psi.check_signature(Signature::Word)?;
    CompiledFormula::new(psi)?.eval_word(w, nu)
}

/// Like [`eval_word`], rejecting letters outside `alphabet` in either the
/// word or the formula.
pub fn eval_word_over(
    psi: &Formula,
    w: &[StepLetter],
    alphabet: &[StepLetter],
    nu: &Valuation,
) -> Result<bool, EvalError> {
    let known: BTreeSet<&StepLetter> = alphabet.iter().collect();
    for l in w.iter().chain(psi.letters().iter()) {
        if !known.contains(l) {
            return Err(EvalError::LetterNotInAlphabet(l.to_string()));
        }
    }
    eval_word(psi, w, nu)
}
