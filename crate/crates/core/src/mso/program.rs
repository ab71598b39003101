//! Hash-consed form of a formula shared by the evaluator and the automaton
//! compiler. Sugar is removed, conjunctions and disjunctions are flattened
//! and constants folded, and structurally equal subformulas share one node.

use std::collections::HashMap;

use super::{Formula, SortError};
use crate::ipomset::Label;
use crate::steps::StepLetter;

pub(crate) type NodeId = u32;
pub(crate) type VarId = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Node {
    Const(bool),
    Label(u32, VarId),
    Source(VarId),
    Target(VarId),
    Letter(u32, VarId),
    Less(VarId, VarId),
    EventOrder(VarId, VarId),
    Equal(VarId, VarId),
    Succ(VarId, VarId),
    In(VarId, VarId),
    Not(NodeId),
    And(Vec<NodeId>),
    Or(Vec<NodeId>),
    Exists(VarId, NodeId),
    Forall(VarId, NodeId),
}

#[derive(Clone, Debug)]
pub(crate) struct VarInfo {
    pub name: String,
    pub second_order: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct Program {
    pub nodes: Vec<Node>,
    /// Free variables of each node, sorted.
    pub free: Vec<Vec<VarId>>,
    pub vars: Vec<VarInfo>,
    pub labels: Vec<Label>,
    pub letters: Vec<StepLetter>,
    pub root: NodeId,
}

struct Builder {
    nodes: Vec<Node>,
    free: Vec<Vec<VarId>>,
    index: HashMap<Node, NodeId>,
    vars: Vec<VarInfo>,
    var_index: HashMap<String, VarId>,
    labels: Vec<Label>,
    label_index: HashMap<Label, u32>,
    letters: Vec<StepLetter>,
    letter_index: HashMap<StepLetter, u32>,
}

impl Program {
    pub fn new(f: &Formula) -> Result<Program, SortError> {
        let mut b = Builder {
            nodes: Vec::new(),
            free: Vec::new(),
            index: HashMap::new(),
            vars: Vec::new(),
            var_index: HashMap::new(),
            labels: Vec::new(),
            label_index: HashMap::new(),
            letters: Vec::new(),
            letter_index: HashMap::new(),
        };
        let root = b.build(f, true)?;
        Ok(Program {
            nodes: b.nodes,
            free: b.free,
            vars: b.vars,
            labels: b.labels,
            letters: b.letters,
            root,
        })
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn free_vars(&self, id: NodeId) -> &[VarId] {
        &self.free[id as usize]
    }
}

impl Builder {
    fn var(&mut self, name: &str, second_order: bool) -> Result<VarId, SortError> {
        if let Some(&v) = self.var_index.get(name) {
            if self.vars[v as usize].second_order != second_order {
                return Err(SortError::BadSort { name: name.to_string() });
            }
            return Ok(v);
        }
        let v = self.vars.len() as VarId;
        self.vars.push(VarInfo { name: name.to_string(), second_order });
        self.var_index.insert(name.to_string(), v);
        Ok(v)
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let mut free: Vec<VarId> = match &node {
            Node::Const(_) => vec![],
            Node::Label(_, x) | Node::Source(x) | Node::Target(x) | Node::Letter(_, x) => vec![*x],
            Node::Less(x, y)
            | Node::EventOrder(x, y)
            | Node::Equal(x, y)
            | Node::Succ(x, y)
            | Node::In(x, y) => vec![*x, *y],
            Node::Not(c) => self.free[*c as usize].clone(),
            Node::And(cs) | Node::Or(cs) => cs.iter().flat_map(|c| self.free[*c as usize].iter().copied()).collect(),
            Node::Exists(v, c) | Node::Forall(v, c) => {
                self.free[*c as usize].iter().copied().filter(|x| x != v).collect()
            }
        };
        free.sort_unstable();
        free.dedup();
        let id = self.nodes.len() as NodeId;
        self.nodes.push(node.clone());
        self.free.push(free);
        self.index.insert(node, id);
        id
    }

    fn constant(&mut self, b: bool) -> NodeId {
        self.intern(Node::Const(b))
    }

    fn negate(&mut self, c: NodeId) -> NodeId {
        match self.nodes[c as usize] {
            Node::Const(b) => self.constant(!b),
            Node::Not(inner) => inner,
            _ => self.intern(Node::Not(c)),
        }
    }

    fn junction(&mut self, conj: bool, parts: Vec<NodeId>) -> NodeId {
        let mut out: Vec<NodeId> = Vec::with_capacity(parts.len());
        for p in parts {
            match &self.nodes[p as usize] {
                Node::Const(b) if *b == conj => continue,
                Node::Const(_) => return self.constant(!conj),
                Node::And(cs) if conj => {
                    for c in cs.clone() {
                        if !out.contains(&c) {
                            out.push(c);
                        }
                    }
                }
                Node::Or(cs) if !conj => {
                    for c in cs.clone() {
                        if !out.contains(&c) {
                            out.push(c);
                        }
                    }
                }
                _ => {
                    if !out.contains(&p) {
                        out.push(p);
                    }
                }
            }
        }
        match out.len() {
            0 => self.constant(conj),
            1 => out[0],
            _ if conj => self.intern(Node::And(out)),
            _ => self.intern(Node::Or(out)),
        }
    }

    /// Collects the operands of a left- or right-nested chain of one
    /// connective without recursing on the chain itself.
    fn chain<'f>(f: &'f Formula, conj: bool, out: &mut Vec<&'f Formula>) {
        let mut stack = vec![f];
        while let Some(g) = stack.pop() {
            match (g, conj) {
                (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
                    stack.push(b);
                    stack.push(a);
                }
                _ => out.push(g),
            }
        }
    }

    fn build(&mut self, f: &Formula, _top: bool) -> Result<NodeId, SortError> {
        use Formula as F;
        Ok(match f {
            F::True => self.constant(true),
            F::False => self.constant(false),
            F::Label(a, x) => {
                let x = self.var(x, false)?;
                let next = self.labels.len() as u32;
                let id = *self.label_index.entry(a.clone()).or_insert(next);
                if id == next {
                    self.labels.push(a.clone());
                }
                self.intern(Node::Label(id, x))
            }
            F::Source(x) => {
                let x = self.var(x, false)?;
                self.intern(Node::Source(x))
            }
            F::Target(x) => {
                let x = self.var(x, false)?;
                self.intern(Node::Target(x))
            }
            F::Letter(l, x) => {
                let x = self.var(x, false)?;
                let next = self.letters.len() as u32;
                let id = *self.letter_index.entry(l.clone()).or_insert(next);
                if id == next {
                    self.letters.push(l.clone());
                }
                self.intern(Node::Letter(id, x))
            }
            F::Less(x, y) | F::EventOrder(x, y) | F::Equal(x, y) | F::Succ(x, y) => {
                let x = self.var(x, false)?;
                let y = self.var(y, false)?;
                self.intern(match f {
                    F::Less(..) => Node::Less(x, y),
                    F::EventOrder(..) => Node::EventOrder(x, y),
                    F::Equal(..) => Node::Equal(x, y),
                    _ => Node::Succ(x, y),
                })
            }
            F::In(x, s) => {
                let x = self.var(x, false)?;
                let s = self.var(s, true)?;
                self.intern(Node::In(x, s))
            }
            F::Not(a) => {
                let a = self.build(a, false)?;
                self.negate(a)
            }
            F::And(..) | F::Or(..) => {
                let conj = matches!(f, F::And(..));
                let mut operands = Vec::new();
                Self::chain(f, conj, &mut operands);
                let mut parts = Vec::with_capacity(operands.len());
                for g in operands {
                    let id = self.build(g, false)?;
                    if let Node::Const(b) = self.nodes[id as usize] {
                        if b != conj {
                            return Ok(self.constant(!conj));
                        }
                    }
                    parts.push(id);
                }
                self.junction(conj, parts)
            }
            F::Implies(a, b) => {
                let a = self.build(a, false)?;
                let na = self.negate(a);
                let b = self.build(b, false)?;
                self.junction(false, vec![na, b])
            }
            F::Iff(a, b) => {
                let a = self.build(a, false)?;
                let b = self.build(b, false)?;
                let na = self.negate(a);
                let nb = self.negate(b);
                let both = self.junction(true, vec![a, b]);
                let neither = self.junction(true, vec![na, nb]);
                self.junction(false, vec![both, neither])
            }
            F::Exists(x, a) | F::Forall(x, a) | F::ExistsSet(x, a) | F::ForallSet(x, a) => {
                let so = matches!(f, F::ExistsSet(..) | F::ForallSet(..));
                let v = self.var(x, so)?;
                let body = self.build(a, false)?;
                if let Node::Const(_) = self.nodes[body as usize] {
                    if so {
                        return Ok(body);
                    }
                }
                if !self.free[body as usize].contains(&v) && so {
                    return Ok(body);
                }
                match f {
                    F::Exists(..) | F::ExistsSet(..) => self.intern(Node::Exists(v, body)),
                    _ => self.intern(Node::Forall(v, body)),
                }
            }
        })
    }
}
