//! The campaign loop: seeds, then mutational or generational input
//! creation with coverage-based admission, stuck detection, and frontier
//! analysis. Optional sharding across worker threads merges edge sets and
//! crash lists; reproducibility is guaranteed in single-worker mode.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::{self, ExecStatus};
use crate::mini_ir::{BinOp, Expr, Program, Terminator};

use super::grammar::{self, ProtocolSpec};
use super::{mutate, Corpus, CrashRecord, InputFraming, Origin, TestCase};

pub const DEFAULT_STUCK_WINDOW: u64 = 50_000;

/// "Complex guard" heuristic: a frontier guard comparing against a
/// constant of at least this many significant bits.
pub const COMPLEX_GUARD_BITS: u32 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    Mutational,
    Generational(ProtocolSpec),
    /// Mutational over a corpus that already contains BMC-derived cases;
    /// used for the synergy bursts of the hybrid loop.
    HybridStage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub budget: u64,
    pub rng_seed: u64,
    pub stuck_window: u64,
    pub stop_on_crash: bool,
    pub step_budget: u64,
    pub anomaly_rate: f64,
    pub framing: InputFraming,
    pub jobs: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            budget: 100_000,
            rng_seed: 0,
            stuck_window: DEFAULT_STUCK_WINDOW,
            stop_on_crash: true,
            step_budget: exec::DEFAULT_STEP_BUDGET,
            anomaly_rate: grammar::DEFAULT_ANOMALY_RATE,
            framing: InputFraming::Raw,
            jobs: 1,
        }
    }
}

/// A branch site with one side never taken, annotated with the guard's
/// comparison-constant width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierBranch {
    pub block: u32,
    /// Which side is missing: true = then, false = else.
    pub missing_then: bool,
    pub guard_const_bits: u32,
    pub complex_guard: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StuckReport {
    pub executions: u64,
    pub executions_since_new_edge: u64,
    pub stuck: bool,
    pub frontier: Vec<FrontierBranch>,
}

/// Runs a fuzzing campaign. Stops at budget exhaustion, at the first crash
/// when `stop_on_crash` is set, or when the stuck window fires.
pub fn campaign(
    program: &Program,
    seeds: &[TestCase],
    config: &CampaignConfig,
    mode: &Mode,
) -> (Corpus, StuckReport) {
    assert!(config.budget >= 1, "budget must be positive");
    if config.jobs <= 1 {
        return campaign_worker(program, seeds, config, mode);
    }
    let shard = config.budget / config.jobs as u64;
    let results: Vec<(Corpus, StuckReport)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.jobs)
            .map(|w| {
                let mut cfg = config.clone();
                cfg.jobs = 1;
                cfg.budget = if w == 0 {
                    shard + config.budget % config.jobs as u64
                } else {
                    shard
                };
                cfg.rng_seed =
                    config.rng_seed ^ (w as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                scope.spawn(move || campaign_worker(program, seeds, &cfg, mode))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    // merge point: edge-set and path-set unions are commutative and
    // idempotent; cases and crashes concatenate in worker order
    let mut merged = Corpus::default();
    let mut stuck_all = true;
    let mut since = u64::MAX;
    let mut execs = 0;
    for (c, s) in results {
        execs += s.executions;
        for case in c.cases {
            if matches!(case.origin, Origin::Seed) && !merged.cases.is_empty() {
                continue; // seeds are shared; keep one copy
            }
            merged.cases.push(case);
        }
        merged.coverage.extend(c.coverage.iter().copied());
        merged.paths.extend(c.paths);
        merged.crashes.extend(c.crashes);
        stuck_all &= s.stuck;
        since = since.min(s.executions_since_new_edge);
    }
    let report = StuckReport {
        executions: execs,
        executions_since_new_edge: if since == u64::MAX { 0 } else { since },
        stuck: stuck_all,
        frontier: frontier(program, &merged.coverage),
    };
    (merged, report)
}

fn campaign_worker(
    program: &Program,
    seeds: &[TestCase],
    config: &CampaignConfig,
    mode: &Mode,
) -> (Corpus, StuckReport) {
    let mut corpus = Corpus::default();
    // mirror of corpus case bytes, kept so mutation does not re-clone the
    // corpus on every execution
    let mut pool: Vec<Vec<u8>> = Vec::new();
    let mut master = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut tick: u64 = 0;
    let mut since_new_edge: u64 = 0;
    let mut stuck = false;

    let mut seeds: Vec<TestCase> = seeds.to_vec();
    if seeds.is_empty() {
        seeds.push(TestCase::seed(Vec::new()));
    }

    'outer: for phase in 0..2 {
        loop {
            if tick >= config.budget {
                break 'outer;
            }
            let (bytes, origin) = if phase == 0 {
                let Some(s) = seeds.get(tick as usize) else {
                    break;
                };
                // seeds keep their own origin (e.g. BmcModel cases fed
                // back by the hybrid loop)
                (s.bytes.clone(), s.origin.clone())
            } else {
                let sub = master.random::<u64>();
                match mode {
                    Mode::Generational(spec) => {
                        let tc = grammar::generate(spec, sub, config.anomaly_rate);
                        (config.framing.frame(&tc.bytes), tc.origin)
                    }
                    Mode::Mutational | Mode::HybridStage => {
                        let mut rng = ChaCha8Rng::seed_from_u64(sub);
                        let parent = rng.random_range(0..pool.len());
                        let (bytes, op) = mutate::mutate(&pool[parent], &pool, sub);
                        (bytes, Origin::Mutated { parent, operator: op.to_string() })
                    }
                }
            };
            tick += 1;
            let outcome = exec::run(program, &bytes, config.step_budget);
            let new_edges: Vec<u32> =
                outcome.edges.iter().copied().filter(|e| !corpus.coverage.contains(e)).collect();
            corpus.coverage.extend(new_edges.iter().copied());
            let id = outcome.path.id();
            if let Some(prev) = corpus.paths.get(&id) {
                debug_assert_eq!(prev, &outcome.path.decisions, "path id collision");
            } else {
                corpus.paths.insert(id, outcome.path.decisions.clone());
            }
            let is_seed = phase == 0;
            if is_seed || !new_edges.is_empty() {
                corpus.cases.push(TestCase {
                    bytes: bytes.clone(),
                    origin: origin.clone(),
                    tick,
                    new_edges: new_edges.len() as u32,
                });
                pool.push(bytes.clone());
            }
            if let ExecStatus::Fault { kind, loc } = &outcome.status {
                let known = corpus.crashes.iter().any(|c| match &c.outcome.status {
                    ExecStatus::Fault { kind: k, loc: l } => {
                        k == kind && l == loc && c.outcome.path.id() == id
                    }
                    _ => false,
                });
                if !known {
                    corpus.crashes.push(CrashRecord {
                        case: TestCase { bytes, origin, tick, new_edges: new_edges.len() as u32 },
                        outcome: outcome.clone(),
                        minimized: None,
                    });
                }
                if config.stop_on_crash {
                    break 'outer;
                }
            }
            if new_edges.is_empty() {
                since_new_edge += 1;
                if since_new_edge >= config.stuck_window {
                    stuck = true;
                    break 'outer;
                }
            } else {
                since_new_edge = 0;
            }
            if phase == 0 && tick as usize >= seeds.len() {
                break;
            }
        }
    }

    let report = StuckReport {
        executions: tick,
        executions_since_new_edge: since_new_edge,
        stuck,
        frontier: frontier(program, &corpus.coverage),
    };
    (corpus, report)
}

/// Branch sites where one side was never taken, with the guard's
/// comparison-constant width (the "complex guard" signal).
pub fn frontier(program: &Program, coverage: &BTreeSet<u32>) -> Vec<FrontierBranch> {
    let mut out = Vec::new();
    for (bid, block) in program.blocks.iter().enumerate() {
        let Terminator::Branch { cond, .. } = &block.term else {
            continue;
        };
        let ids = &program.edge_ids[bid];
        let then_cov = coverage.contains(&ids[0]);
        let else_cov = coverage.contains(&ids[1]);
        if then_cov == else_cov {
            continue; // both sides taken, or the site was never reached
        }
        let bits = guard_const_bits(cond);
        out.push(FrontierBranch {
            block: bid as u32,
            missing_then: !then_cov,
            guard_const_bits: bits,
            complex_guard: bits >= COMPLEX_GUARD_BITS,
        });
    }
    out
}

/// Significant-bit width of the constant a comparison guard tests against
/// (0 when the guard is not a comparison with a constant).
fn guard_const_bits(e: &Expr) -> u32 {
    match e {
        Expr::Binary(op, a, b) => {
            let cmp = matches!(
                op,
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
            );
            if cmp {
                for side in [a, b] {
                    if let Expr::Const(c) = side.as_ref() {
                        return 32 - (*c as u32).leading_zeros();
                    }
                }
            }
            guard_const_bits(a).max(guard_const_bits(b))
        }
        Expr::Unary(_, a) => guard_const_bits(a),
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareRow {
    pub approach: String,
    pub target: String,
    pub budget: u64,
    pub faults: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    /// Renders the comparison in the familiar four-column table layout.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<22} {:<14} {:>10} {:>8}\n",
            "Fuzzing Approach", "Target", "Budget", "Faults"
        ));
        out.push_str(&"-".repeat(58));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{:<22} {:<14} {:>10} {:>8}\n",
                r.approach, r.target, r.budget, r.faults
            ));
        }
        out
    }
}

/// Runs one mutational campaign (single valid-message seed) and one
/// generational campaign with equal budgets and reports distinct fault
/// locations found by each.
pub fn compare_modes(
    program: &Program,
    spec: &ProtocolSpec,
    budget: u64,
    rng_seed: u64,
    target: &str,
) -> CompareReport {
    let cfg = CampaignConfig {
        budget: budget.max(1),
        rng_seed,
        stuck_window: u64::MAX, // equal budgets: neither mode stops early
        stop_on_crash: false,
        framing: InputFraming::LenPrefixed,
        ..Default::default()
    };
    let seed_msg = cfg.framing.frame(b"command");
    let run_faults = |mode: &Mode, seeds: &[TestCase]| {
        if budget == 0 {
            return 0;
        }
        let (corpus, _) = campaign(program, seeds, &cfg, mode);
        corpus.fault_locations().len()
    };
    let mutational = run_faults(&Mode::Mutational, &[TestCase::seed(seed_msg)]);
    let generational = run_faults(&Mode::Generational(spec.clone()), &[]);
    CompareReport {
        rows: vec![
            CompareRow {
                approach: "Mutational Fuzzer".into(),
                target: target.into(),
                budget,
                faults: mutational,
            },
            CompareRow {
                approach: "Generational Fuzzer".into(),
                target: target.into(),
                budget,
                faults: generational,
            },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mini_ir::parse_program;

    #[test]
    fn unconditional_fault_crashes_on_first_execution() {
        let p = parse_program("fn main() { assert(0); }").unwrap();
        let cfg = CampaignConfig { budget: 10, ..Default::default() };
        let (corpus, _) = campaign(&p, &[], &cfg, &Mode::Mutational);
        assert_eq!(corpus.crashes.len(), 1);
        assert_eq!(corpus.crashes[0].case.tick, 1);
    }

    #[test]
    fn magic_guard_program_reports_stuck_with_complex_frontier() {
        let src = "fn main() {\n i32 x;\n x = input();\n if (x == 0x4D41474B) { assert(0); }\n}";
        let p = parse_program(src).unwrap();
        let cfg = CampaignConfig { budget: 100_000, rng_seed: 7, ..Default::default() };
        let (corpus, report) = campaign(&p, &[], &cfg, &Mode::Mutational);
        assert!(corpus.crashes.is_empty(), "seed 7 must miss the 32-bit magic");
        assert!(report.stuck);
        let f: Vec<_> = report.frontier.iter().filter(|f| f.complex_guard).collect();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].guard_const_bits, 31);
        assert!(f[0].missing_then);
    }

    #[test]
    fn four_bit_branches_explore_sixteen_paths() {
        let src = "fn main() {\n i32 x;\n i32 acc;\n x = input();\n acc = 0;\n \
                   if (x & 1) { acc = acc + 1; }\n if (x & 2) { acc = acc + 1; }\n \
                   if (x & 4) { acc = acc + 1; }\n if (x & 8) { acc = acc + 1; }\n}";
        let p = parse_program(src).unwrap();
        let cfg = CampaignConfig { budget: 100_000, rng_seed: 1, ..Default::default() };
        let (corpus, _) = campaign(&p, &[], &cfg, &Mode::Mutational);
        assert_eq!(corpus.paths.len(), 16);
    }

    #[test]
    fn campaign_is_reproducible() {
        let src = "fn main() { i32 x; x = input(); if (x > 100) { x = x - 1; } }";
        let p = parse_program(src).unwrap();
        let cfg = CampaignConfig { budget: 2_000, rng_seed: 3, ..Default::default() };
        let a = campaign(&p, &[], &cfg, &Mode::Mutational);
        let b = campaign(&p, &[], &cfg, &Mode::Mutational);
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn admission_is_credited_with_new_edges() {
        let src = "fn main() { i32 x; x = input(); if (x > 100) { x = x - 1; } }";
        let p = parse_program(src).unwrap();
        let cfg = CampaignConfig { budget: 5_000, rng_seed: 3, ..Default::default() };
        let (corpus, _) = campaign(&p, &[], &cfg, &Mode::Mutational);
        for case in &corpus.cases {
            if !matches!(case.origin, Origin::Seed) {
                assert!(case.new_edges >= 1);
            }
        }
    }

    #[test]
    fn sharded_campaign_merges_coverage() {
        let src = "fn main() { i32 x; x = input(); if (x > 100) { x = x - 1; } }";
        let p = parse_program(src).unwrap();
        let cfg = CampaignConfig { budget: 4_000, rng_seed: 3, jobs: 4, ..Default::default() };
        let (corpus, _) = campaign(&p, &[], &cfg, &Mode::Mutational);
        let cfg1 = CampaignConfig { jobs: 1, ..cfg };
        let (single, _) = campaign(&p, &[], &cfg1, &Mode::Mutational);
        assert_eq!(corpus.coverage, single.coverage);
    }
}
