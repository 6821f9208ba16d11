//! Crash-input minimization: greedy chunk removal with halving chunk
//! sizes, followed by a byte-zeroing pass. The minimized input always
//! reproduces the original fault kind and location.

use thiserror::Error;

use crate::exec::{self, ExecStatus};
use crate::mini_ir::{FaultKind, Loc, Program};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("input does not reproduce a fault")]
pub struct NonReproducible;

fn fault_of(program: &Program, bytes: &[u8], step_budget: u64) -> Option<(FaultKind, Loc)> {
    match exec::run(program, bytes, step_budget).status {
        ExecStatus::Fault { kind, loc } => Some((kind, loc)),
        _ => None,
    }
}

/// Shrinks `crash` while preserving its fault kind and location.
pub fn minimize(
    program: &Program,
    crash: &[u8],
    step_budget: u64,
) -> Result<Vec<u8>, NonReproducible> {
    let target = fault_of(program, crash, step_budget).ok_or(NonReproducible)?;
    let mut cur = crash.to_vec();

    // chunk removal, halving chunk sizes down to single bytes
    let mut chunk = (cur.len() / 2).max(1);
    loop {
        let mut start = 0;
        while start < cur.len() {
            let end = (start + chunk).min(cur.len());
            let mut candidate = cur.clone();
            candidate.drain(start..end);
            if fault_of(program, &candidate, step_budget) == Some(target) {
                cur = candidate;
            } else {
                start = end;
            }
        }
        if chunk == 1 {
            break;
        }
        chunk /= 2;
    }

    // byte zeroing
    for i in 0..cur.len() {
        if cur[i] == 0 {
            continue;
        }
        let mut candidate = cur.clone();
        candidate[i] = 0;
        if fault_of(program, &candidate, step_budget) == Some(target) {
            cur = candidate;
        }
    }

    debug_assert_eq!(fault_of(program, &cur, step_budget), Some(target));
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mini_ir::parse_program;

    const BUDGET: u64 = 1_000_000;

    #[test]
    fn trailing_ignored_bytes_are_removed() {
        let p = parse_program("fn main() { i32 x; x = input(); assert(x != 5); }").unwrap();
        let mut crash = 5i32.to_le_bytes().to_vec();
        crash.extend(std::iter::repeat_n(0xAA, 100));
        let min = minimize(&p, &crash, BUDGET).unwrap();
        assert!(min.len() <= crash.len() - 100);
        assert_eq!(min, vec![5]); // the three zero bytes read past the end
    }

    #[test]
    fn already_minimal_crash_is_a_fixed_point() {
        let p = parse_program(
            "fn main() { i32 x; x = input_byte(); assert(x != 9); }",
        )
        .unwrap();
        let min = minimize(&p, &[9], BUDGET).unwrap();
        assert_eq!(min, vec![9]);
    }

    #[test]
    fn input_independent_fault_minimizes_to_empty() {
        let p = parse_program("fn main() { assert(0); }").unwrap();
        let min = minimize(&p, b"irrelevant bytes", BUDGET).unwrap();
        assert!(min.is_empty());
    }

    #[test]
    fn non_faulting_input_is_rejected() {
        let p = parse_program("fn main() { i32 x; x = input(); assert(x != 5); }").unwrap();
        assert_eq!(minimize(&p, &[0, 0, 0, 0], BUDGET), Err(NonReproducible));
    }
}
