//! Hash-consed bit-vector constraint DAG with constant folding. Widths run
//! up to 64 bits; width 1 doubles as the boolean sort.

use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Const { w: u8, val: u64 },
    /// Free variable; `tag` identifies it for model decoding.
    Var { w: u8, tag: u32 },
    Not(NodeId),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Xor(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Shl(NodeId, NodeId),
    Lshr(NodeId, NodeId),
    Ashr(NodeId, NodeId),
    Eq(NodeId, NodeId),
    Ult(NodeId, NodeId),
    Ite(NodeId, NodeId, NodeId),
    ZExt { a: NodeId, w: u8 },
    SExt { a: NodeId, w: u8 },
    Trunc { a: NodeId, w: u8 },
}

fn mask(w: u8) -> u64 {
    if w == 64 {
        !0
    } else {
        (1u64 << w) - 1
    }
}

/// Sign-extend a `w`-bit value to i64.
pub fn sext_val(val: u64, w: u8) -> i64 {
    let shift = 64 - w as u32;
    ((val << shift) as i64) >> shift
}

#[derive(Default)]
pub struct BvBuilder {
    nodes: Vec<Node>,
    widths: Vec<u8>,
    cache: HashMap<Node, NodeId>,
    next_tag: u32,
}

impl BvBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub fn width(&self, id: NodeId) -> u8 {
        self.widths[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn const_val(&self, id: NodeId) -> Option<u64> {
        match self.node(id) {
            Node::Const { val, .. } => Some(*val),
            _ => None,
        }
    }

    fn intern(&mut self, n: Node, w: u8) -> NodeId {
        if let Some(&id) = self.cache.get(&n) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(n);
        self.widths.push(w);
        self.cache.insert(n, id);
        id
    }

    pub fn constant(&mut self, w: u8, val: u64) -> NodeId {
        self.intern(Node::Const { w, val: val & mask(w) }, w)
    }

    pub fn const_i32(&mut self, v: i32) -> NodeId {
        self.constant(32, v as u32 as u64)
    }

    pub fn bool_const(&mut self, b: bool) -> NodeId {
        self.constant(1, b as u64)
    }

    pub fn fresh_var(&mut self, w: u8) -> NodeId {
        let tag = self.next_tag;
        self.next_tag += 1;
        self.intern(Node::Var { w, tag }, w)
    }

    fn binop(
        &mut self,
        a: NodeId,
        b: NodeId,
        fold: impl Fn(u64, u64, u8) -> u64,
        mk: impl Fn(NodeId, NodeId) -> Node,
    ) -> NodeId {
        let w = self.width(a);
        debug_assert_eq!(w, self.width(b));
        if let (Some(x), Some(y)) = (self.const_val(a), self.const_val(b)) {
            return self.constant(w, fold(x, y, w));
        }
        self.intern(mk(a, b), w)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if self.const_val(a) == Some(0) {
            return b;
        }
        if self.const_val(b) == Some(0) {
            return a;
        }
        self.binop(a, b, |x, y, w| x.wrapping_add(y) & mask(w), Node::Add)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if self.const_val(b) == Some(0) {
            return a;
        }
        if a == b {
            return self.constant(self.width(a), 0);
        }
        self.binop(a, b, |x, y, w| x.wrapping_sub(y) & mask(w), Node::Sub)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        for (c, o) in [(a, b), (b, a)] {
            match self.const_val(c) {
                Some(0) => return self.constant(self.width(a), 0),
                Some(1) => return o,
                _ => {}
            }
        }
        self.binop(a, b, |x, y, w| x.wrapping_mul(y) & mask(w), Node::Mul)
    }

    pub fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let w = self.width(a);
        for (c, o) in [(a, b), (b, a)] {
            match self.const_val(c) {
                Some(0) => return self.constant(w, 0),
                Some(v) if v == mask(w) => return o,
                _ => {}
            }
        }
        if a == b {
            return a;
        }
        self.binop(a, b, |x, y, _| x & y, Node::And)
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let w = self.width(a);
        for (c, o) in [(a, b), (b, a)] {
            match self.const_val(c) {
                Some(0) => return o,
                Some(v) if v == mask(w) => return self.constant(w, mask(w)),
                _ => {}
            }
        }
        if a == b {
            return a;
        }
        self.binop(a, b, |x, y, _| x | y, Node::Or)
    }

    pub fn xor(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if a == b {
            return self.constant(self.width(a), 0);
        }
        self.binop(a, b, |x, y, _| x ^ y, Node::Xor)
    }

    pub fn not(&mut self, a: NodeId) -> NodeId {
        let w = self.width(a);
        if let Some(x) = self.const_val(a) {
            return self.constant(w, !x & mask(w));
        }
        if let Node::Not(inner) = *self.node(a) {
            return inner;
        }
        self.intern(Node::Not(a), w)
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        let zero = self.constant(self.width(a), 0);
        self.sub(zero, a)
    }

    pub fn shl(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binop(
            a,
            b,
            |x, y, w| if y >= w as u64 { 0 } else { (x << y) & mask(w) },
            Node::Shl,
        )
    }

    pub fn lshr(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binop(
            a,
            b,
            |x, y, w| if y >= w as u64 { 0 } else { x >> y },
            Node::Lshr,
        )
    }

    pub fn ashr(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binop(
            a,
            b,
            |x, y, w| {
                let sh = (y).min(w as u64 - 1) as u32;
                (sext_val(x, w) >> sh) as u64 & mask(w)
            },
            Node::Ashr,
        )
    }

    pub fn eq(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if a == b {
            return self.bool_const(true);
        }
        if let (Some(x), Some(y)) = (self.const_val(a), self.const_val(b)) {
            return self.bool_const(x == y);
        }
        // canonical operand order for consing
        let (a, b) = if a.0 <= b.0 { (a, b) } else { (b, a) };
        self.intern(Node::Eq(a, b), 1)
    }

    pub fn ne(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let e = self.eq(a, b);
        self.not(e)
    }

    pub fn ult(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if a == b {
            return self.bool_const(false);
        }
        if let (Some(x), Some(y)) = (self.const_val(a), self.const_val(b)) {
            return self.bool_const(x < y);
        }
        self.intern(Node::Ult(a, b), 1)
    }

    pub fn slt(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let w = self.width(a);
        if let (Some(x), Some(y)) = (self.const_val(a), self.const_val(b)) {
            return self.bool_const(sext_val(x, w) < sext_val(y, w));
        }
        let sign = self.constant(w, 1u64 << (w - 1));
        let af = self.xor(a, sign);
        let bf = self.xor(b, sign);
        self.ult(af, bf)
    }

    pub fn sle(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let gt = self.slt(b, a);
        self.not(gt)
    }

    pub fn ite(&mut self, c: NodeId, t: NodeId, e: NodeId) -> NodeId {
        debug_assert_eq!(self.width(c), 1);
        match self.const_val(c) {
            Some(1) => return t,
            Some(0) => return e,
            _ => {}
        }
        if t == e {
            return t;
        }
        self.intern(Node::Ite(c, t, e), self.width(t))
    }

    pub fn zext(&mut self, a: NodeId, w: u8) -> NodeId {
        if self.width(a) == w {
            return a;
        }
        if let Some(x) = self.const_val(a) {
            return self.constant(w, x);
        }
        self.intern(Node::ZExt { a, w }, w)
    }

    pub fn sext(&mut self, a: NodeId, w: u8) -> NodeId {
        let aw = self.width(a);
        if aw == w {
            return a;
        }
        if let Some(x) = self.const_val(a) {
            return self.constant(w, sext_val(x, aw) as u64 & mask(w));
        }
        self.intern(Node::SExt { a, w }, w)
    }

    pub fn trunc(&mut self, a: NodeId, w: u8) -> NodeId {
        if self.width(a) == w {
            return a;
        }
        if let Some(x) = self.const_val(a) {
            return self.constant(w, x & mask(w));
        }
        self.intern(Node::Trunc { a, w }, w)
    }

    /// Boolean helpers over width-1 nodes.
    pub fn bool_and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.and(a, b)
    }

    pub fn bool_or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.or(a, b)
    }

    /// i32 truthiness: nonzero becomes 1.
    pub fn is_nonzero(&mut self, a: NodeId) -> NodeId {
        let zero = self.constant(self.width(a), 0);
        self.ne(a, zero)
    }
}
