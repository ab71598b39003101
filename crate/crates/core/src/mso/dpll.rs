//! Clause store and a small DPLL solver over occurrence lists.
//!
//! Literals are `var << 1 | negated`.

pub(crate) fn lit(var: u32, positive: bool) -> u32 {
    var << 1 | !positive as u32
}

#[derive(Default)]
pub(crate) struct Cnf {
    vars: u32,
    lits: Vec<u32>,
    starts: Vec<usize>,
    empty: bool,
}

impl Cnf {
    pub fn new(vars: u32) -> Cnf {
        Cnf { vars, ..Cnf::default() }
    }

    pub fn fresh(&mut self) -> u32 {
        self.vars += 1;
        self.vars - 1
    }

    pub fn clause(&mut self, lits: &[u32]) {
        if lits.is_empty() {
            self.empty = true;
        }
        self.starts.push(self.lits.len());
        self.lits.extend_from_slice(lits);
    }

    fn range(&self, c: usize) -> std::ops::Range<usize> {
        self.starts[c]..self.starts.get(c + 1).copied().unwrap_or(self.lits.len())
    }
}

struct Solver {
    lits: Vec<u32>,
    ranges: Vec<(usize, usize)>,
    /// Clauses containing each literal, `occ[occ_start[l]..occ_start[l + 1]]`.
    occ_start: Vec<u32>,
    occ: Vec<u32>,
    /// 0 unassigned, 1 true, -1 false
    value: Vec<i8>,
    trail: Vec<u32>,
    head: usize,
}

impl Solver {
    fn lit_value(&self, l: u32) -> i8 {
        let v = self.value[(l >> 1) as usize];
        if l & 1 == 1 {
            -v
        } else {
            v
        }
    }

    fn assign(&mut self, l: u32) {
        self.value[(l >> 1) as usize] = if l & 1 == 1 { -1 } else { 1 };
        self.trail.push(l);
    }

    /// Returns false on conflict.
    fn propagate(&mut self) -> bool {
        while self.head < self.trail.len() {
            let falsified = (self.trail[self.head] ^ 1) as usize;
            self.head += 1;
            for i in self.occ_start[falsified]..self.occ_start[falsified + 1] {
                let (s, e) = self.ranges[self.occ[i as usize] as usize];
                let mut open = None;
                let mut satisfied = false;
                for k in s..e {
                    match self.lit_value(self.lits[k]) {
                        1 => {
                            satisfied = true;
                            break;
                        }
                        0 if open.is_none() => open = Some(self.lits[k]),
                        0 => {
                            open = Some(u32::MAX);
                        }
                        _ => {}
                    }
                }
                if satisfied {
                    continue;
                }
                match open {
                    None => return false,
                    Some(u32::MAX) => {}
                    Some(l) => self.assign(l),
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let l = self.trail.pop().unwrap();
            self.value[(l >> 1) as usize] = 0;
        }
        self.head = mark;
    }
}

/// Satisfiability of `cnf`; variables are tried false first.
pub(crate) fn solve(cnf: Cnf) -> bool {
    if cnf.empty {
        return false;
    }
    let nvars = cnf.vars as usize;
    let ranges: Vec<(usize, usize)> = (0..cnf.starts.len()).map(|c| (cnf.range(c).start, cnf.range(c).end)).collect();
    let mut occ_start = vec![0u32; 2 * nvars + 1];
    for &l in &cnf.lits {
        occ_start[l as usize + 1] += 1;
    }
    for i in 0..2 * nvars {
        occ_start[i + 1] += occ_start[i];
    }
    let mut fill = occ_start.clone();
    let mut occ = vec![0u32; cnf.lits.len()];
    for (c, &(b, e)) in ranges.iter().enumerate() {
        for &l in &cnf.lits[b..e] {
            occ[fill[l as usize] as usize] = c as u32;
            fill[l as usize] += 1;
        }
    }
    let mut s = Solver { lits: cnf.lits, ranges, occ_start, occ, value: vec![0; nvars], trail: Vec::new(), head: 0 };
    for c in 0..s.ranges.len() {
        let (b, e) = s.ranges[c];
        if e - b == 1 {
            let l = s.lits[b];
            match s.lit_value(l) {
                0 => s.assign(l),
                -1 => return false,
                _ => {}
            }
        }
    }
    // (trail mark, decision literal, both polarities tried)
    let mut levels: Vec<(usize, u32, bool)> = Vec::new();
    let mut next = 0;
    loop {
        if !s.propagate() {
            loop {
                let Some((mark, l, tried)) = levels.pop() else {
                    return false;
                };
                s.undo(mark);
                next = next.min((l >> 1) as usize);
                if !tried {
                    levels.push((mark, l ^ 1, true));
                    s.assign(l ^ 1);
                    break;
                }
            }
            continue;
        }
        while next < nvars && s.value[next] != 0 {
            next += 1;
        }
        if next == nvars {
            return true;
        }
        let l = lit(next as u32, false);
        levels.push((s.trail.len(), l, false));
        s.assign(l);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n: u32, clauses: &[Vec<u32>]) -> bool {
        (0..1u32 << n).any(|m| clauses.iter().all(|c| c.iter().any(|&l| (m >> (l >> 1) & 1 == 1) == (l & 1 == 0))))
    }

    #[test]
    fn agrees_with_truth_tables() {
        let mut seed = 7u64;
        let mut rand = move |k: u32| {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % k as u64) as u32
        };
        for _ in 0..2000 {
            let n = 1 + rand(6);
            let clauses: Vec<Vec<u32>> =
                (0..rand(12)).map(|_| (0..1 + rand(3)).map(|_| rand(2 * n)).collect()).collect();
            let mut cnf = Cnf::new(n);
            for c in &clauses {
                cnf.clause(c);
            }
            assert_eq!(solve(cnf), brute(n, &clauses), "{clauses:?}");
        }
    }
}
