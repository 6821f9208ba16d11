//! Mutation operators. Each operator is a pure function, plus a random
//! dispatcher that picks one operator per call; a (parent, rng seed, corpus
//! snapshot) triple always yields the same child.

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MAX_TESTCASE_LEN;

/// Constants that frequently sit on interesting boundaries.
pub const INTERESTING: [i32; 6] = [0, 1, -1, i32::MAX, i32::MIN, 1024];

pub fn bit_flip(bytes: &[u8], pos: usize, bit: u8) -> Vec<u8> {
    let mut out = bytes.to_vec();
    out[pos] ^= 1 << (bit & 7);
    out
}

pub fn substitute(bytes: &[u8], pos: usize, byte: u8) -> Vec<u8> {
    let mut out = bytes.to_vec();
    out[pos] = byte;
    out
}

pub fn insert(bytes: &[u8], pos: usize, byte: u8) -> Vec<u8> {
    let mut out = bytes.to_vec();
    out.insert(pos.min(out.len()), byte);
    out
}

pub fn delete(bytes: &[u8], pos: usize) -> Vec<u8> {
    let mut out = bytes.to_vec();
    out.remove(pos);
    out
}

/// Adds `delta` (±1..=35) to the little-endian u32 at `pos`.
pub fn arith4(bytes: &[u8], pos: usize, delta: i32) -> Vec<u8> {
    let mut out = bytes.to_vec();
    let mut w = [0u8; 4];
    w.copy_from_slice(&out[pos..pos + 4]);
    let v = u32::from_le_bytes(w).wrapping_add_signed(delta);
    out[pos..pos + 4].copy_from_slice(&v.to_le_bytes());
    out
}

/// Duplicates the block `[start, start+len)` right after itself.
pub fn dup_block(bytes: &[u8], start: usize, len: usize) -> Vec<u8> {
    let mut out = bytes.to_vec();
    let block: Vec<u8> = bytes[start..start + len].to_vec();
    out.splice(start + len..start + len, block);
    out
}

/// Head of `a` up to `cut_a` followed by the tail of `b` from `cut_b`.
pub fn splice(a: &[u8], b: &[u8], cut_a: usize, cut_b: usize) -> Vec<u8> {
    let mut out = a[..cut_a].to_vec();
    out.extend_from_slice(&b[cut_b..]);
    out
}

/// Overwrites 4 bytes at `pos` with an interesting constant (LE).
pub fn inject_interesting(bytes: &[u8], pos: usize, value: i32) -> Vec<u8> {
    let mut out = bytes.to_vec();
    out[pos..pos + 4].copy_from_slice(&value.to_le_bytes());
    out
}

/// Applies one randomly chosen operator to `parent`; `corpus` supplies
/// splice partners. Returns the child bytes and the operator name.
pub fn mutate(parent: &[u8], corpus: &[Vec<u8>], rng_seed: u64) -> (Vec<u8>, &'static str) {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    if parent.is_empty() {
        return (insert(parent, 0, rng.random()), "insert");
    }
    let ops: &[&'static str] = &[
        "bit-flip",
        "substitute",
        "insert",
        "delete",
        "arith4",
        "dup-block",
        "splice",
        "interesting",
    ];
    let op = *ops.choose(&mut rng).unwrap();
    let n = parent.len();
    let mut child = match op {
        "bit-flip" => bit_flip(parent, rng.random_range(0..n), rng.random_range(0..8)),
        "substitute" => substitute(parent, rng.random_range(0..n), rng.random()),
        "insert" => insert(parent, rng.random_range(0..=n), rng.random()),
        "delete" => delete(parent, rng.random_range(0..n)),
        "arith4" => {
            if n < 4 {
                return (insert(parent, rng.random_range(0..=n), rng.random()), "insert");
            }
            let pos = rng.random_range(0..=n - 4);
            let mag = rng.random_range(1..=35);
            let delta = if rng.random_bool(0.5) { mag } else { -mag };
            arith4(parent, pos, delta)
        }
        "dup-block" => {
            let start = rng.random_range(0..n);
            let len = rng.random_range(1..=n - start);
            dup_block(parent, start, len)
        }
        "splice" => {
            if corpus.is_empty() {
                return (substitute(parent, rng.random_range(0..n), rng.random()), "substitute");
            }
            let other = corpus.choose(&mut rng).unwrap();
            let cut_a = rng.random_range(0..=n);
            let cut_b = rng.random_range(0..=other.len());
            splice(parent, other, cut_a, cut_b)
        }
        "interesting" => {
            if n < 4 {
                return (insert(parent, rng.random_range(0..=n), rng.random()), "insert");
            }
            let pos = rng.random_range(0..=n - 4);
            let value = *INTERESTING.choose(&mut rng).unwrap();
            inject_interesting(parent, pos, value)
        }
        _ => unreachable!(),
    };
    child.truncate(MAX_TESTCASE_LEN);
    (child, op)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitute_turns_plus_into_percent() {
        // "index +=" with '+' at position 6 replaced by '%'
        let parent = b"index +=";
        let child = substitute(parent, 6, b'%');
        assert_eq!(child, b"index %=");
    }

    #[test]
    fn empty_parent_gets_one_inserted_byte() {
        let (child, op) = mutate(&[], &[], 42);
        assert_eq!(child.len(), 1);
        assert_eq!(op, "insert");
    }

    #[test]
    fn mutate_is_deterministic() {
        let parent = b"takeoff".to_vec();
        let corpus = vec![b"land".to_vec()];
        for seed in 0..64u64 {
            let a = mutate(&parent, &corpus, seed);
            let b = mutate(&parent, &corpus, seed);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn children_stay_within_length_cap() {
        let parent = vec![7u8; MAX_TESTCASE_LEN];
        for seed in 0..64u64 {
            let (child, _) = mutate(&parent, &[parent.clone()], seed);
            assert!(child.len() <= MAX_TESTCASE_LEN);
        }
    }

    #[test]
    fn arith4_wraps_little_endian() {
        let bytes = 0xFFFF_FFFFu32.to_le_bytes();
        assert_eq!(arith4(&bytes, 0, 1), 0u32.to_le_bytes());
        assert_eq!(arith4(&bytes, 0, -1), 0xFFFF_FFFEu32.to_le_bytes());
    }
}
