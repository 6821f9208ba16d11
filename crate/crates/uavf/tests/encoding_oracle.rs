//! Oracle test for the bit-vector → CNF encoding: for each operator, the
//! blasted circuit evaluated on concrete operand bits must agree with plain
//! two's-complement reference semantics over thousands of random operand
//! pairs.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uavf::bmc::blast::Blaster;
use uavf::bmc::bv::BvBuilder;

const PAIRS: usize = 10_000;

fn mask(w: u8) -> u64 {
    if w >= 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

fn sext(v: u64, w: u8) -> i64 {
    let shift = 64 - w as u32;
    ((v << shift) as i64) >> shift
}

/// Builds the circuit for one operator over two fresh w-bit vars, then
/// evaluates it on random operand pairs via the recorded gate trace and
/// compares against the plain-Rust reference semantics.
fn run_case(
    name: &str,
    w: u8,
    build: impl Fn(&mut BvBuilder, uavf::bmc::bv::NodeId, uavf::bmc::bv::NodeId) -> uavf::bmc::bv::NodeId,
    reference: impl Fn(u64, u64) -> u64,
) {
    let mut bv = BvBuilder::new();
    let a = bv.fresh_var(w);
    let b = bv.fresh_var(w);
    let out = build(&mut bv, a, b);
    let out_w = bv.width(out);
    let mut blaster = Blaster::new();
    let lits = blaster.bits_of(&bv, out);
    let cnf = blaster.finish();

    let mut rng = ChaCha8Rng::seed_from_u64(0xE0C0DE ^ w as u64 ^ name.len() as u64);
    let m = mask(w);
    for i in 0..PAIRS {
        // mix uniform randomness with boundary values so carries, sign
        // flips, and overshooting shift amounts all get exercised
        let pick = |rng: &mut ChaCha8Rng, i: usize| -> u64 {
            match i % 7 {
                0 => 0,
                1 => m,
                2 => 1u64 << (w - 1),        // sign bit
                3 => (1u64 << (w - 1)) - 1,  // max positive
                _ => rng.random::<u64>() & m,
            }
        };
        let x = pick(&mut rng, i);
        let y = pick(&mut rng, i / 7);
        let mut inputs = HashMap::new();
        inputs.insert(0u32, x);
        inputs.insert(1u32, y);
        let assignment = cnf.eval(&inputs);
        let got = cnf.decode_bits(&assignment, &lits);
        let want = reference(x, y) & mask(out_w);
        assert_eq!(got, want, "{name} w={w}: operands {x:#x}, {y:#x}");
    }
}

fn shift_amt(b: u64, w: u8) -> Option<u32> {
    if b >= w as u64 {
        None
    } else {
        Some(b as u32)
    }
}

#[test]
fn arithmetic_ops_match_reference() {
    for &w in &[8u8, 32] {
        let m = mask(w);
        run_case("add", w, |bv, a, b| bv.add(a, b), move |x, y| x.wrapping_add(y) & m);
        run_case("sub", w, |bv, a, b| bv.sub(a, b), move |x, y| x.wrapping_sub(y) & m);
        run_case("mul", w, |bv, a, b| bv.mul(a, b), move |x, y| x.wrapping_mul(y) & m);
        run_case("neg", w, |bv, a, _| bv.neg(a), move |x, _| x.wrapping_neg() & m);
    }
}

#[test]
fn bitwise_ops_match_reference() {
    for &w in &[8u8, 32] {
        let m = mask(w);
        run_case("and", w, |bv, a, b| bv.and(a, b), |x, y| x & y);
        run_case("or", w, |bv, a, b| bv.or(a, b), |x, y| x | y);
        run_case("xor", w, |bv, a, b| bv.xor(a, b), |x, y| x ^ y);
        run_case("not", w, |bv, a, _| bv.not(a), move |x, _| !x & m);
    }
}

#[test]
fn shifts_match_reference() {
    for &w in &[8u8, 32] {
        let m = mask(w);
        run_case("shl", w, |bv, a, b| bv.shl(a, b), move |x, y| {
            shift_amt(y, w).map_or(0, |s| (x << s) & m)
        });
        run_case("lshr", w, |bv, a, b| bv.lshr(a, b), move |x, y| {
            shift_amt(y, w).map_or(0, |s| x >> s)
        });
        run_case("ashr", w, |bv, a, b| bv.ashr(a, b), move |x, y| {
            let fill = if sext(x, w) < 0 { m } else { 0 };
            shift_amt(y, w).map_or(fill, |s| ((sext(x, w) >> s) as u64) & m)
        });
    }
}

#[test]
fn comparisons_match_reference() {
    for &w in &[8u8, 32] {
        run_case("eq", w, |bv, a, b| bv.eq(a, b), |x, y| (x == y) as u64);
        run_case("ne", w, |bv, a, b| bv.ne(a, b), |x, y| (x != y) as u64);
        run_case("ult", w, |bv, a, b| bv.ult(a, b), |x, y| (x < y) as u64);
        run_case("slt", w, move |bv, a, b| bv.slt(a, b), move |x, y| {
            (sext(x, w) < sext(y, w)) as u64
        });
        run_case("sle", w, move |bv, a, b| bv.sle(a, b), move |x, y| {
            (sext(x, w) <= sext(y, w)) as u64
        });
    }
}

#[test]
fn width_changes_match_reference() {
    let w = 16u8;
    run_case("zext", w, |bv, a, _| bv.zext(a, 33), |x, _| x);
    run_case("sext", w, |bv, a, _| bv.sext(a, 33), move |x, _| sext(x, w) as u64);
    run_case("trunc", w, |bv, a, _| bv.trunc(a, 8), |x, _| x);
    run_case("ite", 8, |bv, a, b| {
        let c = bv.ult(a, b);
        bv.ite(c, a, b)
    }, |x, y| if x < y { x } else { y });
}
