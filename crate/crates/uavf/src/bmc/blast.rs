//! Tseitin bit-blasting of the bit-vector DAG into CNF. Var 1 is the
//! constant-true literal; node variables map to CNF variable runs recorded
//! in `var_bits` for model decoding. The emitted gate trace allows direct
//! circuit evaluation, used by the encoding correctness tests.

use std::collections::HashMap;

use super::bv::{BvBuilder, Node, NodeId};

pub type Lit = i32;

pub const LIT_TRUE: Lit = 1;
pub const LIT_FALSE: Lit = -1;

#[derive(Debug, Clone, Copy)]
pub enum Gate {
    And(Lit, Lit, Lit),
    Xor(Lit, Lit, Lit),
    Ite(Lit, Lit, Lit, Lit),
}

/// CNF together with the bit mapping of bit-vector variables.
#[derive(Debug, Clone, Default)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    /// Variable tag -> CNF literals of its bits, LSB first.
    pub var_bits: HashMap<u32, Vec<Lit>>,
    pub gates: Vec<Gate>,
}

impl CnfFormula {
    /// Evaluates the Tseitin circuit under the given variable values,
    /// returning the full CNF assignment (var index - 1).
    pub fn eval(&self, inputs: &HashMap<u32, u64>) -> Vec<bool> {
        let mut assign = vec![false; self.num_vars as usize];
        assign[0] = true; // LIT_TRUE
        for (tag, lits) in &self.var_bits {
            let val = inputs.get(tag).copied().unwrap_or(0);
            for (i, &lit) in lits.iter().enumerate() {
                let bit = (val >> i) & 1 == 1;
                if lit > 0 {
                    assign[lit as usize - 1] = bit;
                } else {
                    assign[(-lit) as usize - 1] = !bit;
                }
            }
        }
        let get = |assign: &[bool], l: Lit| {
            let v = assign[l.unsigned_abs() as usize - 1];
            if l > 0 {
                v
            } else {
                !v
            }
        };
        for g in &self.gates {
            match *g {
                Gate::And(o, a, b) => {
                    let v = get(&assign, a) && get(&assign, b);
                    set(&mut assign, o, v);
                }
                Gate::Xor(o, a, b) => {
                    let v = get(&assign, a) ^ get(&assign, b);
                    set(&mut assign, o, v);
                }
                Gate::Ite(o, c, t, e) => {
                    let v = if get(&assign, c) { get(&assign, t) } else { get(&assign, e) };
                    set(&mut assign, o, v);
                }
            }
        }
        assign
    }

    pub fn lit_value(&self, assign: &[bool], l: Lit) -> bool {
        let v = assign[l.unsigned_abs() as usize - 1];
        if l > 0 {
            v
        } else {
            !v
        }
    }

    pub fn decode_bits(&self, model: &[bool], lits: &[Lit]) -> u64 {
        let mut v = 0u64;
        for (i, &lit) in lits.iter().enumerate() {
            let b = match lit {
                LIT_TRUE => true,
                LIT_FALSE => false,
                l if l > 0 => model[l as usize - 1],
                l => !model[(-l) as usize - 1],
            };
            if b {
                v |= 1 << i;
            }
        }
        v
    }
}

fn set(assign: &mut [bool], l: Lit, v: bool) {
    if l > 0 {
        assign[l as usize - 1] = v;
    } else {
        assign[(-l) as usize - 1] = !v;
    }
}

pub struct Blaster {
    pub cnf: CnfFormula,
    bits: HashMap<NodeId, Vec<Lit>>,
    and_cache: HashMap<(Lit, Lit), Lit>,
    xor_cache: HashMap<(Lit, Lit), Lit>,
}

impl Blaster {
    pub fn new() -> Self {
        let mut cnf = CnfFormula { num_vars: 1, ..Default::default() };
        cnf.clauses.push(vec![LIT_TRUE]);
        Blaster { cnf, bits: HashMap::new(), and_cache: HashMap::new(), xor_cache: HashMap::new() }
    }

    fn fresh(&mut self) -> Lit {
        self.cnf.num_vars += 1;
        self.cnf.num_vars as Lit
    }

    fn g_and(&mut self, a: Lit, b: Lit) -> Lit {
        match (a, b) {
            (LIT_FALSE, _) | (_, LIT_FALSE) => return LIT_FALSE,
            (LIT_TRUE, x) | (x, LIT_TRUE) => return x,
            _ => {}
        }
        if a == b {
            return a;
        }
        if a == -b {
            return LIT_FALSE;
        }
        let key = (a.min(b), a.max(b));
        if let Some(&o) = self.and_cache.get(&key) {
            return o;
        }
        let o = self.fresh();
        self.cnf.clauses.push(vec![-o, key.0]);
        self.cnf.clauses.push(vec![-o, key.1]);
        self.cnf.clauses.push(vec![o, -key.0, -key.1]);
        self.cnf.gates.push(Gate::And(o, key.0, key.1));
        self.and_cache.insert(key, o);
        o
    }

    fn g_or(&mut self, a: Lit, b: Lit) -> Lit {
        -self.g_and(-a, -b)
    }

    fn g_xor(&mut self, a: Lit, b: Lit) -> Lit {
        match (a, b) {
            (LIT_FALSE, x) | (x, LIT_FALSE) => return x,
            (LIT_TRUE, x) | (x, LIT_TRUE) => return -x,
            _ => {}
        }
        if a == b {
            return LIT_FALSE;
        }
        if a == -b {
            return LIT_TRUE;
        }
        // xor is invariant under double negation; normalize to positive lits
        let negate = (a < 0) ^ (b < 0);
        let (xa, xb) = (a.abs().min(b.abs()), a.abs().max(b.abs()));
        let o = if let Some(&o) = self.xor_cache.get(&(xa, xb)) {
            o
        } else {
            let o = self.fresh();
            self.cnf.clauses.push(vec![-o, xa, xb]);
            self.cnf.clauses.push(vec![-o, -xa, -xb]);
            self.cnf.clauses.push(vec![o, xa, -xb]);
            self.cnf.clauses.push(vec![o, -xa, xb]);
            self.cnf.gates.push(Gate::Xor(o, xa, xb));
            self.xor_cache.insert((xa, xb), o);
            o
        };
        if negate {
            -o
        } else {
            o
        }
    }

    fn g_ite(&mut self, c: Lit, t: Lit, e: Lit) -> Lit {
        match c {
            LIT_TRUE => return t,
            LIT_FALSE => return e,
            _ => {}
        }
        if t == e {
            return t;
        }
        if t == -e {
            return -self.g_xor(c, t); // c ? t : !t  ==  xnor(c, t)
        }
        match (t, e) {
            (LIT_TRUE, _) => return self.g_or(c, e),
            (LIT_FALSE, _) => return self.g_and(-c, e),
            (_, LIT_TRUE) => return self.g_or(-c, t),
            (_, LIT_FALSE) => return self.g_and(c, t),
            _ => {}
        }
        let o = self.fresh();
        self.cnf.clauses.push(vec![-o, -c, t]);
        self.cnf.clauses.push(vec![o, -c, -t]);
        self.cnf.clauses.push(vec![-o, c, e]);
        self.cnf.clauses.push(vec![o, c, -e]);
        self.cnf.gates.push(Gate::Ite(o, c, t, e));
        o
    }

    fn full_adder(&mut self, a: Lit, b: Lit, cin: Lit) -> (Lit, Lit) {
        let x = self.g_xor(a, b);
        let sum = self.g_xor(x, cin);
        let t1 = self.g_and(a, b);
        let t2 = self.g_and(cin, x);
        let cout = self.g_or(t1, t2);
        (sum, cout)
    }

    fn ripple_add(&mut self, a: &[Lit], b: &[Lit], mut carry: Lit) -> Vec<Lit> {
        let mut out = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            let (s, c) = self.full_adder(a[i], b[i], carry);
            out.push(s);
            carry = c;
        }
        out
    }

    fn ult_lit(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        // LSB-first recurrence: lt_i = (!a_i & b_i) | ((a_i == b_i) & lt_{i-1})
        let mut lt = LIT_FALSE;
        for i in 0..a.len() {
            let strictly = self.g_and(-a[i], b[i]);
            let eq = -self.g_xor(a[i], b[i]);
            let keep = self.g_and(eq, lt);
            lt = self.g_or(strictly, keep);
        }
        lt
    }

    fn shift(&mut self, bv: &BvBuilder, a: NodeId, b: NodeId, kind: ShiftKind) -> Vec<Lit> {
        let w = bv.width(a) as usize;
        let ab = self.bits_of(bv, a);
        let bb = self.bits_of(bv, b);
        let fill = match kind {
            ShiftKind::Ashr => ab[w - 1],
            _ => LIT_FALSE,
        };
        let mut cur = ab.clone();
        let mut k = 0usize;
        while (1usize << k) < w {
            let amt = 1usize << k;
            let sel = bb[k];
            let mut next = Vec::with_capacity(w);
            for i in 0..w {
                let shifted = match kind {
                    ShiftKind::Shl => {
                        if i >= amt {
                            cur[i - amt]
                        } else {
                            LIT_FALSE
                        }
                    }
                    ShiftKind::Lshr | ShiftKind::Ashr => {
                        if i + amt < w {
                            cur[i + amt]
                        } else {
                            fill
                        }
                    }
                };
                next.push(self.g_ite(sel, shifted, cur[i]));
            }
            cur = next;
            k += 1;
        }
        // amounts >= w: result is all fill
        let wlits: Vec<Lit> = (0..bb.len())
            .map(|i| {
                if (w >> i) & 1 == 1 {
                    LIT_TRUE
                } else {
                    LIT_FALSE
                }
            })
            .collect();
        let in_range = self.ult_lit(&bb, &wlits);
        cur.iter().map(|&l| self.g_ite(in_range, l, fill)).collect()
    }

    /// Blasts `id`, returning its bit literals LSB first (memoized).
    pub fn bits_of(&mut self, bv: &BvBuilder, id: NodeId) -> Vec<Lit> {
        if let Some(b) = self.bits.get(&id) {
            return b.clone();
        }
        let w = bv.width(id) as usize;
        let out: Vec<Lit> = match *bv.node(id) {
            Node::Const { val, .. } => (0..w)
                .map(|i| if (val >> i) & 1 == 1 { LIT_TRUE } else { LIT_FALSE })
                .collect(),
            Node::Var { tag, .. } => {
                let lits: Vec<Lit> = (0..w).map(|_| self.fresh()).collect();
                self.cnf.var_bits.insert(tag, lits.clone());
                lits
            }
            Node::Not(a) => {
                let ab = self.bits_of(bv, a);
                ab.iter().map(|&l| -l).collect()
            }
            Node::And(a, b) => {
                let (ab, bb) = (self.bits_of(bv, a), self.bits_of(bv, b));
                (0..w).map(|i| self.g_and(ab[i], bb[i])).collect()
            }
            Node::Or(a, b) => {
                let (ab, bb) = (self.bits_of(bv, a), self.bits_of(bv, b));
                (0..w).map(|i| self.g_or(ab[i], bb[i])).collect()
            }
            Node::Xor(a, b) => {
                let (ab, bb) = (self.bits_of(bv, a), self.bits_of(bv, b));
                (0..w).map(|i| self.g_xor(ab[i], bb[i])).collect()
            }
            Node::Add(a, b) => {
                let (ab, bb) = (self.bits_of(bv, a), self.bits_of(bv, b));
                self.ripple_add(&ab, &bb, LIT_FALSE)
            }
            Node::Sub(a, b) => {
                let (ab, bb) = (self.bits_of(bv, a), self.bits_of(bv, b));
                let nb: Vec<Lit> = bb.iter().map(|&l| -l).collect();
                self.ripple_add(&ab, &nb, LIT_TRUE)
            }
            Node::Mul(a, b) => {
                let (ab, bb) = (self.bits_of(bv, a), self.bits_of(bv, b));
                let mut acc = vec![LIT_FALSE; w];
                for (i, &sel) in ab.iter().enumerate() {
                    if sel == LIT_FALSE {
                        continue;
                    }
                    let mut row = vec![LIT_FALSE; w];
                    for j in 0..w - i {
                        row[i + j] = self.g_and(sel, bb[j]);
                    }
                    acc = self.ripple_add(&acc, &row, LIT_FALSE);
                }
                acc
            }
            Node::Shl(a, b) => self.shift(bv, a, b, ShiftKind::Shl),
            Node::Lshr(a, b) => self.shift(bv, a, b, ShiftKind::Lshr),
            Node::Ashr(a, b) => self.shift(bv, a, b, ShiftKind::Ashr),
            Node::Eq(a, b) => {
                let (ab, bb) = (self.bits_of(bv, a), self.bits_of(bv, b));
                let mut acc = LIT_TRUE;
                for i in 0..ab.len() {
                    let eq = -self.g_xor(ab[i], bb[i]);
                    acc = self.g_and(acc, eq);
                }
                vec![acc]
            }
            Node::Ult(a, b) => {
                let (ab, bb) = (self.bits_of(bv, a), self.bits_of(bv, b));
                vec![self.ult_lit(&ab, &bb)]
            }
            Node::Ite(c, t, e) => {
                let cb = self.bits_of(bv, c)[0];
                let (tb, eb) = (self.bits_of(bv, t), self.bits_of(bv, e));
                (0..w).map(|i| self.g_ite(cb, tb[i], eb[i])).collect()
            }
            Node::ZExt { a, .. } => {
                let ab = self.bits_of(bv, a);
                let mut out = ab.clone();
                out.resize(w, LIT_FALSE);
                out
            }
            Node::SExt { a, .. } => {
                let ab = self.bits_of(bv, a);
                let sign = *ab.last().unwrap();
                let mut out = ab.clone();
                out.resize(w, sign);
                out
            }
            Node::Trunc { a, .. } => {
                let ab = self.bits_of(bv, a);
                ab[..w].to_vec()
            }
        };
        self.bits.insert(id, out.clone());
        out
    }

    /// Asserts a width-1 node true (unit clause).
    pub fn assert_true(&mut self, bv: &BvBuilder, id: NodeId) {
        let b = self.bits_of(bv, id);
        self.cnf.clauses.push(vec![b[0]]);
    }

    pub fn finish(self) -> CnfFormula {
        self.cnf
    }
}

impl Default for Blaster {
    fn default() -> Self {
        Self::new()
    }
}

enum ShiftKind {
    Shl,
    Lshr,
    Ashr,
}
