//! Bounded model checking: path-wise unrolling of the program up to a bound
//! k, encoding each potential fault as a bit-vector verification condition,
//! bit-blasting to CNF, and solving with the in-tree CDCL solver. Satisfiable
//! conditions are decoded back to input bytes and confirmed by concrete
//! replay before being reported.

pub mod blast;
pub mod bv;
pub mod dimacs;
pub mod sat;
mod symex;

use std::collections::HashSet;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::exec::TraceState;
use crate::mini_ir::{compute_completeness_threshold, Program, SafetyProperty};

pub use blast::CnfFormula;
pub use sat::SatResult;
pub use symex::{encode, enumerate_paths, EncodeError, InputSite, SymPath, VerificationCondition};

pub const DEFAULT_SOLVER_TIMEOUT: Duration = Duration::from_secs(60);
pub const DEFAULT_K: u32 = 10;

/// Reasons a check can end without a definite answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnknownReason {
    Timeout,
    Memory,
    /// A loop without a computable bound was truncated below its (unknown)
    /// completeness threshold.
    UnboundedLoop,
    SolverGaveUp,
}

impl std::fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            UnknownReason::Timeout => "timeout",
            UnknownReason::Memory => "memory",
            UnknownReason::UnboundedLoop => "unbounded-loop-with-k-below-threshold",
            UnknownReason::SolverGaveUp => "solver-gave-up",
        };
        f.write_str(s)
    }
}

/// A concrete witness of a property violation, already confirmed by replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub input: Vec<u8>,
    pub trace: Vec<TraceState>,
    pub property: SafetyProperty,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    False(Counterexample),
    True { complete: bool, bound: u32 },
    Unknown(UnknownReason),
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::True { .. } => 0,
            Verdict::False(_) => 1,
            Verdict::Unknown(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BmcStats {
    pub paths_enumerated: u64,
    pub vcs_checked: u64,
    pub sat: u64,
    pub unsat: u64,
    pub timeouts: u64,
    pub pruned_infeasible: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BmcReport {
    pub verdict: Verdict,
    pub stats: BmcStats,
    pub k: u32,
}

/// The default unroll bound: the completeness threshold when the loop
/// analysis can compute one, else [`DEFAULT_K`].
pub fn default_k(program: &Program) -> u32 {
    match compute_completeness_threshold(program).program_threshold {
        Some(t) => (t.max(1)).min(u32::MAX as u64) as u32,
        None => DEFAULT_K,
    }
}

/// Solves a bit-blasted formula with the CDCL solver.
pub fn solve(formula: &CnfFormula, timeout: Duration) -> SatResult {
    let mut s = sat::Solver::from_clauses(formula.num_vars as usize, &formula.clauses);
    s.solve(timeout)
}

/// Checks all safety properties of `program` along every CFG path unrolled
/// at most `k` times, skipping paths in `exclude` (fuzzer-explored path
/// ids). Returns the first counterexample in deterministic path order, or
/// True with a completeness flag, or Unknown.
pub fn check(
    program: &Program,
    k: u32,
    exclude: &HashSet<u64>,
    timeout: Duration,
) -> BmcReport {
    let run = symex::explore(program, k, exclude, timeout, true, false, None);
    let verdict = if let Some(cex) = run.cex {
        Verdict::False(cex)
    } else if run.timed_out {
        Verdict::Unknown(UnknownReason::Timeout)
    } else if run.overflowed {
        Verdict::Unknown(UnknownReason::Memory)
    } else if run.replay_mismatch {
        Verdict::Unknown(UnknownReason::SolverGaveUp)
    } else {
        let threshold = compute_completeness_threshold(program).program_threshold;
        match (run.truncated, threshold) {
            (true, None) => Verdict::Unknown(UnknownReason::UnboundedLoop),
            (true, Some(_)) => Verdict::True { complete: false, bound: k },
            (false, t) => Verdict::True {
                complete: matches!(t, Some(t) if k as u64 >= t),
                bound: k,
            },
        }
    };
    BmcReport { verdict, stats: run.stats, k }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec;
    use crate::mini_ir::{parse_program, FaultKind};

    fn check_src(src: &str, k: u32) -> BmcReport {
        let p = parse_program(src).unwrap();
        check(&p, k, &HashSet::new(), Duration::from_secs(30))
    }

    #[test]
    fn assert_false_is_false_at_depth_one() {
        let r = check_src("fn main() { assert(0); }", 1);
        match r.verdict {
            Verdict::False(cex) => {
                assert_eq!(cex.property.kind, FaultKind::AssertViolation);
                assert!(cex.input.is_empty());
            }
            other => panic!("expected False, got {other:?}"),
        }
    }

    #[test]
    fn safe_loop_free_program_is_true_complete() {
        let r = check_src(
            "fn main() { i32 x; x = input(); if (x > 0) { x = 1; } assert(x < 2); }",
            1,
        );
        assert_eq!(r.verdict, Verdict::True { complete: true, bound: 1 });
    }

    #[test]
    fn magic_guard_model_is_decoded_and_replayed() {
        let src = "fn main() {\n i32 x;\n x = input();\n if (x == 0x4D41474B) { assert(0); }\n}";
        let p = parse_program(src).unwrap();
        let r = check(&p, 1, &HashSet::new(), Duration::from_secs(30));
        match r.verdict {
            Verdict::False(cex) => {
                assert_eq!(cex.input, 0x4D41474Bu32.to_le_bytes().to_vec());
                exec::replay(&p, &cex.input, cex.property.kind, cex.property.loc).unwrap();
            }
            other => panic!("expected False, got {other:?}"),
        }
    }

    #[test]
    fn overflow_has_unique_model() {
        let r = check_src("fn main() { i32 x; i32 y; x = input(); y = x + 1; }", 1);
        match r.verdict {
            Verdict::False(cex) => {
                assert_eq!(cex.input, i32::MAX.to_le_bytes().to_vec());
                assert_eq!(cex.property.kind, FaultKind::SignedOverflow);
            }
            other => panic!("expected False, got {other:?}"),
        }
    }

    #[test]
    fn bug_beyond_bound_is_true_incomplete() {
        let src = "fn main() {\n i32 i;\n i = 0;\n while (i < 10) { i = i + 1; }\n assert(i < 10);\n}";
        let r = check_src(src, 5);
        assert_eq!(r.verdict, Verdict::True { complete: false, bound: 5 });
        let r = check_src(src, 10);
        assert!(matches!(r.verdict, Verdict::False(_)));
    }

    #[test]
    fn division_by_zero_and_safe_division() {
        let r = check_src("fn main() { i32 x; x = input(); x = 100 / x; }", 1);
        match r.verdict {
            Verdict::False(cex) => {
                assert_eq!(cex.property.kind, FaultKind::DivByZero);
                assert_eq!(cex.input, vec![0, 0, 0, 0]);
            }
            other => panic!("expected False, got {other:?}"),
        }
        let r = check_src(
            "fn main() { i32 x; x = input(); if (x > 1) { x = 100 / x; assert(x <= 50); } }",
            1,
        );
        assert_eq!(r.verdict, Verdict::True { complete: true, bound: 1 });
    }

    #[test]
    fn buffer_overflow_index_is_solved() {
        let src = "fn main() {\n i32[8] a;\n i32 i;\n i = input();\n a[i] = 1;\n}";
        let r = check_src(src, 1);
        match r.verdict {
            Verdict::False(cex) => assert_eq!(cex.property.kind, FaultKind::BufferOverflow),
            other => panic!("expected False, got {other:?}"),
        }
    }

    #[test]
    fn excluding_the_only_error_path_suppresses_the_violation() {
        let src = "fn main() { i32 x; x = input(); if (x == 7) { assert(0); } }";
        let p = parse_program(src).unwrap();
        let crash = exec::run(&p, &7i32.to_le_bytes(), 1_000_000);
        assert!(crash.status.is_fault());
        let exclude: HashSet<u64> = [crash.path.id()].into_iter().collect();
        let r = check(&p, 1, &exclude, Duration::from_secs(30));
        assert_eq!(r.verdict, Verdict::True { complete: true, bound: 1 });
    }

    #[test]
    fn unbounded_loop_below_threshold_is_unknown() {
        let src =
            "fn main() {\n i32 n;\n i32 i;\n n = input();\n i = 0;\n while (i < n) { i = i + 1; }\n}";
        let r = check_src(src, 3);
        assert_eq!(r.verdict, Verdict::Unknown(UnknownReason::UnboundedLoop));
    }
}
