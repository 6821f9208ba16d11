//! CDCL SAT solver: two-watched-literal propagation, first-UIP clause
//! learning, activity-based branching with phase saving, and geometric
//! restarts. Literals use the DIMACS convention (nonzero i32, negative =
//! negated); variables are numbered from 1.

use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// Model assigns every variable, indexed by var - 1.
    Sat(Vec<bool>),
    Unsat,
    Timeout,
}

const UNASSIGNED: i8 = 0;

#[derive(Clone, Copy)]
struct Watcher {
    clause: u32,
    blocker: i32,
}

pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
    watches: Vec<Vec<Watcher>>, // indexed by literal
    assign: Vec<i8>,            // +1 true, -1 false, 0 unassigned; indexed by var
    level: Vec<u32>,
    reason: Vec<i32>, // clause index + 1, or 0
    trail: Vec<i32>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    heap: std::collections::BinaryHeap<(u64, u32)>,
    contradiction: bool,
}

fn lit_index(lit: i32) -> usize {
    let v = lit.unsigned_abs() as usize;
    2 * v + (lit < 0) as usize
}

impl Solver {
    pub fn new(num_vars: usize) -> Self {
        Solver {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * (num_vars + 1)],
            assign: vec![UNASSIGNED; num_vars + 1],
            level: vec![0; num_vars + 1],
            reason: vec![0; num_vars + 1],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; num_vars + 1],
            var_inc: 1.0,
            phase: vec![false; num_vars + 1],
            heap: std::collections::BinaryHeap::new(),
            contradiction: false,
        }
    }

    pub fn from_clauses(num_vars: usize, clauses: &[Vec<i32>]) -> Self {
        let mut s = Solver::new(num_vars);
        for c in clauses {
            s.add_clause(c.clone());
        }
        s
    }

    fn value(&self, lit: i32) -> i8 {
        let v = self.assign[lit.unsigned_abs() as usize];
        if lit > 0 {
            v
        } else {
            -v
        }
    }

    pub fn add_clause(&mut self, mut lits: Vec<i32>) {
        if self.contradiction {
            return;
        }
        lits.sort_unstable();
        lits.dedup();
        // tautology?
        for w in lits.windows(2) {
            if w[0] == -w[1] {
                return;
            }
        }
        match lits.len() {
            0 => self.contradiction = true,
            1 => {
                match self.value(lits[0]) {
                    -1 => self.contradiction = true,
                    0 => {
                        self.enqueue(lits[0], 0);
                        if self.propagate().is_some() {
                            self.contradiction = true;
                        }
                    }
                    _ => {}
                }
            }
            _ => {
                let idx = self.clauses.len() as u32;
                self.watch(lits[0], idx, lits[1]);
                self.watch(lits[1], idx, lits[0]);
                self.clauses.push(lits);
            }
        }
    }

    fn watch(&mut self, lit: i32, clause: u32, blocker: i32) {
        self.watches[lit_index(lit)].push(Watcher { clause, blocker });
    }

    fn enqueue(&mut self, lit: i32, reason: i32) {
        let v = lit.unsigned_abs() as usize;
        self.assign[v] = if lit > 0 { 1 } else { -1 };
        self.level[v] = self.trail_lim.len() as u32;
        self.reason[v] = reason;
        self.phase[v] = lit > 0;
        self.trail.push(lit);
    }

    /// Returns the conflicting clause index, if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let lit = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = -lit;
            let widx = lit_index(false_lit);
            let mut ws = std::mem::take(&mut self.watches[widx]);
            let mut i = 0;
            while i < ws.len() {
                let w = ws[i];
                if self.value(w.blocker) == 1 {
                    i += 1;
                    continue;
                }
                let cidx = w.clause as usize;
                // ensure false_lit is at position 1
                if self.clauses[cidx][0] == false_lit {
                    self.clauses[cidx].swap(0, 1);
                }
                let first = self.clauses[cidx][0];
                if self.value(first) == 1 {
                    ws[i].blocker = first;
                    i += 1;
                    continue;
                }
                // search replacement watch
                let mut moved = false;
                for k in 2..self.clauses[cidx].len() {
                    if self.value(self.clauses[cidx][k]) != -1 {
                        self.clauses[cidx].swap(1, k);
                        let new_watch = self.clauses[cidx][1];
                        self.watch(new_watch, w.clause, first);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    ws.swap_remove(i);
                    continue;
                }
                if self.value(first) == -1 {
                    // conflict
                    let mut tail = std::mem::replace(&mut self.watches[widx], ws);
                    self.watches[widx].append(&mut tail);
                    self.qhead = self.trail.len();
                    return Some(w.clause);
                }
                self.enqueue(first, w.clause as i32 + 1);
                i += 1;
            }
            let mut old = std::mem::replace(&mut self.watches[widx], ws);
            self.watches[widx].append(&mut old);
        }
        None
    }

    fn bump(&mut self, var: usize) {
        self.activity[var] += self.var_inc;
        if self.activity[var] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.push((self.activity[var].to_bits(), var as u32));
    }

    fn analyze(&mut self, confl: u32) -> (Vec<i32>, usize) {
        let mut learnt = vec![0i32]; // slot 0 for the asserting literal
        let mut seen = vec![false; self.num_vars + 1];
        let mut counter = 0usize;
        let mut lit0 = 0i32;
        let mut idx = self.trail.len();
        let mut clause = confl as usize;
        let cur_level = self.trail_lim.len() as u32;
        loop {
            let start = if lit0 == 0 { 0 } else { 1 };
            let lits: Vec<i32> = self.clauses[clause][start..].to_vec();
            for q in lits {
                let v = q.unsigned_abs() as usize;
                if !seen[v] && self.level[v] > 0 {
                    seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= cur_level {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // pick next literal to resolve on from the trail
            loop {
                idx -= 1;
                lit0 = self.trail[idx];
                if seen[lit0.unsigned_abs() as usize] {
                    break;
                }
            }
            counter -= 1;
            if counter == 0 {
                break;
            }
            clause = (self.reason[lit0.unsigned_abs() as usize] - 1) as usize;
        }
        learnt[0] = -lit0;
        // backjump level = second-highest level in learnt
        let mut bt = 0usize;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].unsigned_abs() as usize]
                    > self.level[learnt[max_i].unsigned_abs() as usize]
                {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].unsigned_abs() as usize] as usize;
        }
        (learnt, bt)
    }

    fn cancel_until(&mut self, level: usize) {
        while self.trail_lim.len() > level {
            let lim = self.trail_lim.pop().unwrap();
            while self.trail.len() > lim {
                let lit = self.trail.pop().unwrap();
                let v = lit.unsigned_abs() as usize;
                self.assign[v] = UNASSIGNED;
                self.heap.push((self.activity[v].to_bits(), v as u32));
            }
        }
        self.qhead = self.trail.len();
    }

    fn decide(&mut self) -> Option<i32> {
        while let Some((_, v)) = self.heap.pop() {
            if self.assign[v as usize] == UNASSIGNED {
                let lit = if self.phase[v as usize] { v as i32 } else { -(v as i32) };
                return Some(lit);
            }
        }
        for v in 1..=self.num_vars {
            if self.assign[v] == UNASSIGNED {
                let lit = if self.phase[v] { v as i32 } else { -(v as i32) };
                return Some(lit);
            }
        }
        None
    }

    pub fn solve(&mut self, timeout: Duration) -> SatResult {
        if self.contradiction {
            return SatResult::Unsat;
        }
        let deadline = Instant::now() + timeout;
        for v in 1..=self.num_vars {
            self.heap.push((self.activity[v].to_bits(), v as u32));
        }
        if self.propagate().is_some() {
            return SatResult::Unsat;
        }
        let mut conflicts_until_restart = 100u64;
        let mut conflict_budget = conflicts_until_restart;
        let mut conflicts_total = 0u64;
        loop {
            match self.propagate() {
                Some(confl) => {
                    conflicts_total += 1;
                    if self.trail_lim.is_empty() {
                        return SatResult::Unsat;
                    }
                    let (learnt, bt) = self.analyze(confl);
                    self.cancel_until(bt);
                    self.var_inc /= 0.95;
                    if learnt.len() == 1 {
                        self.cancel_until(0);
                        if self.value(learnt[0]) == -1 {
                            return SatResult::Unsat;
                        }
                        if self.value(learnt[0]) == 0 {
                            self.enqueue(learnt[0], 0);
                        }
                    } else {
                        let idx = self.clauses.len() as u32;
                        let asserting = learnt[0];
                        self.watch(learnt[0], idx, learnt[1]);
                        self.watch(learnt[1], idx, learnt[0]);
                        self.clauses.push(learnt);
                        self.enqueue(asserting, idx as i32 + 1);
                    }
                    if conflict_budget > 0 {
                        conflict_budget -= 1;
                    }
                    if conflicts_total % 512 == 0 && Instant::now() > deadline {
                        return SatResult::Timeout;
                    }
                }
                None => {
                    if conflict_budget == 0 {
                        conflicts_until_restart = conflicts_until_restart * 3 / 2;
                        conflict_budget = conflicts_until_restart;
                        self.cancel_until(0);
                        if Instant::now() > deadline {
                            return SatResult::Timeout;
                        }
                        continue;
                    }
                    match self.decide() {
                        None => {
                            let model = (1..=self.num_vars)
                                .map(|v| self.assign[v] == 1)
                                .collect();
                            return SatResult::Sat(model);
                        }
                        Some(lit) => {
                            self.trail_lim.push(self.trail.len());
                            self.enqueue(lit, 0);
                        }
                    }
                }
            }
        }
    }
}

/// Exhaustive model search; the test oracle for small formulas. Evaluates
/// 64 assignments per machine word (bit-sliced).
pub fn brute_force(num_vars: usize, clauses: &[Vec<i32>]) -> Option<Vec<bool>> {
    assert!(num_vars <= 24, "brute force oracle limited to 24 vars");
    const MASKS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    let total = 1u64 << num_vars;
    let width = total.min(64);
    let live: u64 = if width == 64 { !0 } else { (1u64 << width) - 1 };
    let mut a = 0u64;
    while a < total {
        let mut ok = live;
        for c in clauses {
            let mut sat: u64 = 0;
            for &lit in c {
                let v = (lit.unsigned_abs() - 1) as usize;
                // assignment a + k assigns var v the value of bit v of (a + k)
                let pat = if v < 6 {
                    MASKS[v]
                } else if (a >> v) & 1 == 1 {
                    !0u64
                } else {
                    0u64
                };
                sat |= if lit > 0 { pat } else { !pat };
            }
            ok &= sat;
            if ok == 0 {
                break;
            }
        }
        if ok != 0 {
            let chosen = a + ok.trailing_zeros() as u64;
            return Some((0..num_vars).map(|v| (chosen >> v) & 1 == 1).collect());
        }
        a += width;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(nv: usize, cls: &[Vec<i32>]) -> SatResult {
        Solver::from_clauses(nv, cls).solve(Duration::from_secs(5))
    }

    #[test]
    fn trivial_unsat() {
        let r = solve(2, &[vec![1, 2], vec![-1], vec![-2]]);
        assert_eq!(r, SatResult::Unsat);
    }

    #[test]
    fn unit_clause_sat() {
        match solve(1, &[vec![1]]) {
            SatResult::Sat(m) => assert!(m[0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_formula_sat() {
        assert!(matches!(solve(3, &[]), SatResult::Sat(_)));
    }

    #[test]
    fn model_satisfies_clauses() {
        let cls = vec![
            vec![1, -3, 4],
            vec![-1, 2],
            vec![-2, -4],
            vec![3, 4],
            vec![-3, -4],
        ];
        match solve(4, &cls) {
            SatResult::Sat(m) => {
                for c in &cls {
                    assert!(c.iter().any(|&l| {
                        let v = m[l.unsigned_abs() as usize - 1];
                        (l > 0) == v
                    }));
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn matches_brute_force_on_random_3cnf() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let nv = 10;
            let nc = rng.random_range(30..55);
            let cls: Vec<Vec<i32>> = (0..nc)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = rng.random_range(1..=nv as i32);
                            if rng.random_bool(0.5) {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let expect = brute_force(nv, &cls).is_some();
            let got = matches!(solve(nv, &cls), SatResult::Sat(_));
            assert_eq!(got, expect);
        }
    }
}
