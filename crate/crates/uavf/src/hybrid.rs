//! The hybrid coordinator: fuzz until crash, stuck, or budget; hand the
//! unexplored frontier to BMC with the fuzzer's PathSet as exclusion; feed
//! solver models back into the corpus as new test cases; repeat up to a
//! bounded number of synergy rounds; assemble the final verdict.

use std::collections::BTreeSet;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::bmc::{self, BmcStats, Counterexample, Verdict};
use crate::exec::{self, ExecStatus};
use crate::fuzz::{
    self, campaign, CampaignConfig, InputFraming, Mode, Origin, StuckReport, TestCase,
};
use crate::mini_ir::{Program, SafetyProperty};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    pub fuzz_budget: u64,
    pub stuck_window: u64,
    /// Unroll bound; `None` selects the completeness threshold when known.
    pub k: Option<u32>,
    pub solver_timeout_secs: f64,
    pub stop_on_first_crash: bool,
    pub rng_seed: u64,
    pub mode: Mode,
    pub framing: InputFraming,
    pub step_budget: u64,
    pub jobs: usize,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig {
            fuzz_budget: 100_000,
            stuck_window: fuzz::DEFAULT_STUCK_WINDOW,
            k: None,
            solver_timeout_secs: 60.0,
            stop_on_first_crash: true,
            rng_seed: 0,
            mode: Mode::Mutational,
            framing: InputFraming::Raw,
            step_budget: exec::DEFAULT_STEP_BUDGET,
            jobs: 1,
        }
    }
}

/// Maximum fuzz→BMC→fuzz synergy rounds; guarantees termination.
pub const MAX_SYNERGY_ROUNDS: u32 = 3;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzStats {
    pub executions: u64,
    pub paths: u64,
    pub edges_covered: u64,
    pub crashes: u64,
    pub stuck: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CexRecord {
    /// "fuzz" or "bmc".
    pub stage: String,
    pub cex: Counterexample,
    pub minimized: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridReport {
    pub verdict: Verdict,
    pub fuzz: FuzzStats,
    pub bmc: BmcStats,
    pub synergy_rounds: u32,
    pub coverage_percent: f64,
    pub covered_edges: Vec<u32>,
    pub total_edges: u32,
    pub counterexamples: Vec<CexRecord>,
    pub frontier: Vec<fuzz::FrontierBranch>,
}

/// Algorithm: (1) seed the corpus; (2–3) fuzz until crash, stuck, or
/// budget; (4–5) if no stopping crash, BMC over the paths the fuzzer did
/// not explore, feeding each model back as a test case and resuming a
/// short fuzz burst; (6) assemble the verdict.
pub fn verify(program: &Program, seeds: &[TestCase], config: &HybridConfig) -> HybridReport {
    let k = config.k.unwrap_or_else(|| bmc::default_k(program));
    let solver_timeout = Duration::from_secs_f64(config.solver_timeout_secs);
    let burst = (config.fuzz_budget / 10).max(1);

    let mut corpus = fuzz::Corpus::default();
    let mut stuck_report: StuckReport;
    let mut fuzz_execs = 0u64;
    let mut bmc_stats = BmcStats::default();
    let mut bmc_cexs: Vec<Counterexample> = Vec::new();
    let mut bmc_true: Option<Verdict> = None;
    let mut bmc_unknown: Option<bmc::UnknownReason> = None;
    let mut rounds = 0u32;
    let mut next_seeds: Vec<TestCase> = seeds.to_vec();

    loop {
        let cfg = CampaignConfig {
            budget: if rounds == 0 { config.fuzz_budget } else { burst },
            rng_seed: config.rng_seed.wrapping_add(rounds as u64),
            stuck_window: config.stuck_window,
            stop_on_crash: config.stop_on_first_crash,
            step_budget: config.step_budget,
            framing: config.framing,
            jobs: config.jobs,
            ..Default::default()
        };
        let (stage, report) = campaign(program, &next_seeds, &cfg, &config.mode);
        fuzz_execs += report.executions;
        merge(&mut corpus, stage);
        stuck_report = report;

        let have_crash = !corpus.crashes.is_empty();
        if have_crash && config.stop_on_first_crash {
            break;
        }
        if rounds >= MAX_SYNERGY_ROUNDS {
            break;
        }
        let exclude = corpus.path_set();
        let bmc_report = bmc::check(program, k, &exclude, solver_timeout);
        add_stats(&mut bmc_stats, &bmc_report.stats);
        rounds += 1;
        match bmc_report.verdict {
            Verdict::False(cex) => {
                // feed the model back and resume a short fuzz burst
                let mut case = TestCase::seed(cex.input.clone());
                case.origin = Origin::BmcModel;
                next_seeds = corpus.cases.clone();
                next_seeds.push(case);
                bmc_cexs.push(cex);
                if config.stop_on_first_crash {
                    break;
                }
            }
            v @ Verdict::True { .. } => {
                bmc_true = Some(v);
                break;
            }
            Verdict::Unknown(r) => {
                bmc_unknown = Some(r);
                break;
            }
        }
    }

    // counterexamples: every distinct fuzz fault location plus BMC models
    let mut counterexamples = Vec::new();
    let mut seen: BTreeSet<(String, crate::mini_ir::Loc)> = BTreeSet::new();
    for crash in &corpus.crashes {
        let ExecStatus::Fault { kind, loc } = crash.outcome.status else {
            continue;
        };
        if !seen.insert((kind.to_string(), loc)) {
            continue;
        }
        let minimized = fuzz::minimize(program, &crash.case.bytes, config.step_budget)
            .unwrap_or_else(|_| crash.case.bytes.clone());
        let (_, trace) = exec::run_traced(program, &crash.case.bytes, config.step_budget);
        let stage = if matches!(crash.case.origin, Origin::BmcModel) { "bmc" } else { "fuzz" };
        counterexamples.push(CexRecord {
            stage: stage.into(),
            cex: Counterexample {
                input: crash.case.bytes.clone(),
                depth: trace.len() as u32,
                trace,
                property: SafetyProperty { kind, loc },
            },
            minimized,
        });
    }
    for cex in bmc_cexs {
        if !seen.insert((cex.property.kind.to_string(), cex.property.loc)) {
            continue;
        }
        let minimized = fuzz::minimize(program, &cex.input, config.step_budget)
            .unwrap_or_else(|_| cex.input.clone());
        counterexamples.push(CexRecord { stage: "bmc".into(), cex, minimized });
    }

    let verdict = if let Some(first) = counterexamples.first() {
        Verdict::False(first.cex.clone())
    } else if let Some(t) = bmc_true {
        t
    } else {
        Verdict::Unknown(bmc_unknown.unwrap_or(bmc::UnknownReason::SolverGaveUp))
    };

    let covered_edges: Vec<u32> = corpus.coverage.iter().copied().collect();
    let coverage_percent = if program.total_edges == 0 {
        100.0
    } else {
        covered_edges.len() as f64 * 100.0 / program.total_edges as f64
    };
    HybridReport {
        verdict,
        fuzz: FuzzStats {
            executions: fuzz_execs,
            paths: corpus.paths.len() as u64,
            edges_covered: covered_edges.len() as u64,
            crashes: corpus.crashes.len() as u64,
            stuck: stuck_report.stuck,
        },
        bmc: bmc_stats,
        synergy_rounds: rounds,
        coverage_percent,
        covered_edges,
        total_edges: program.total_edges,
        counterexamples,
        frontier: stuck_report.frontier,
    }
}

fn merge(into: &mut fuzz::Corpus, from: fuzz::Corpus) {
    for case in from.cases {
        if !into.cases.iter().any(|c| c.bytes == case.bytes) {
            into.cases.push(case);
        }
    }
    into.coverage.extend(from.coverage);
    into.paths.extend(from.paths);
    for crash in from.crashes {
        let dup = into.crashes.iter().any(|c| {
            c.outcome.status == crash.outcome.status && c.outcome.path == crash.outcome.path
        });
        if !dup {
            into.crashes.push(crash);
        }
    }
}

fn add_stats(into: &mut BmcStats, s: &BmcStats) {
    into.paths_enumerated += s.paths_enumerated;
    into.vcs_checked += s.vcs_checked;
    into.sat += s.sat;
    into.unsat += s.unsat;
    into.timeouts += s.timeouts;
    into.pruned_infeasible += s.pruned_infeasible;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub coverage_percent: f64,
    pub edges_covered: u64,
    pub total_edges: u32,
    pub fuzz_paths: u64,
    pub bmc_paths: u64,
    pub missed_edges: Vec<u32>,
    pub unreached_blocks: Vec<u32>,
}

/// Machine-readable coverage summary plus a human-readable rendering.
pub fn coverage_report(program: &Program, report: &HybridReport) -> (CoverageSummary, String) {
    let covered: BTreeSet<u32> = report.covered_edges.iter().copied().collect();
    let missed_edges: Vec<u32> =
        (0..program.total_edges).filter(|e| !covered.contains(e)).collect();

    // a block is reached if it is the program entry or the target of a
    // covered edge
    let mut reached = BTreeSet::new();
    reached.insert(program.functions[program.entry].entry_block);
    for (bid, ids) in program.edge_ids.iter().enumerate() {
        let succs = program.successors(bid);
        for (slot, &eid) in ids.iter().enumerate() {
            if covered.contains(&eid) {
                reached.insert(bid);
                reached.insert(succs[slot]);
            }
        }
    }
    let unreached_blocks: Vec<u32> = (0..program.blocks.len() as u32)
        .filter(|b| !reached.contains(&(*b as usize)))
        .collect();

    let summary = CoverageSummary {
        coverage_percent: report.coverage_percent,
        edges_covered: report.covered_edges.len() as u64,
        total_edges: program.total_edges,
        fuzz_paths: report.fuzz.paths,
        bmc_paths: report.bmc.paths_enumerated,
        missed_edges,
        unreached_blocks,
    };
    let mut text = String::new();
    text.push_str(&format!(
        "edge coverage: {:.1}% ({}/{})\n",
        summary.coverage_percent, summary.edges_covered, summary.total_edges
    ));
    text.push_str(&format!(
        "paths: {} fuzz, {} bmc\n",
        summary.fuzz_paths, summary.bmc_paths
    ));
    if summary.missed_edges.is_empty() {
        text.push_str("missed edges: none\n");
    } else {
        let list: Vec<String> = summary.missed_edges.iter().map(|e| e.to_string()).collect();
        text.push_str(&format!("missed edges: {}\n", list.join(", ")));
    }
    if !summary.unreached_blocks.is_empty() {
        let list: Vec<String> =
            summary.unreached_blocks.iter().map(|b| format!("bb{b}")).collect();
        text.push_str(&format!("unreached blocks: {}\n", list.join(", ")));
    }
    (summary, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mini_ir::parse_program;

    #[test]
    fn assert_false_crashes_in_fuzz_stage_without_bmc() {
        let p = parse_program("fn main() { assert(0); }").unwrap();
        let report = verify(&p, &[], &HybridConfig::default());
        assert!(matches!(report.verdict, Verdict::False(_)));
        assert_eq!(report.bmc.paths_enumerated, 0);
        assert_eq!(report.bmc.vcs_checked, 0);
        assert_eq!(report.synergy_rounds, 0);
        assert_eq!(report.counterexamples[0].stage, "fuzz");
    }

    #[test]
    fn magic_guard_bug_found_by_bmc_stage() {
        let src = "fn main() {\n i32 x;\n x = input();\n if (x == 0x4D41474B) { assert(0); }\n}";
        let p = parse_program(src).unwrap();
        let config = HybridConfig { rng_seed: 7, ..Default::default() };
        let report = verify(&p, &[], &config);
        assert!(report.fuzz.stuck, "fuzz stage must get stuck on the magic");
        match &report.verdict {
            Verdict::False(cex) => {
                assert_eq!(cex.input, 0x4D41474Bu32.to_le_bytes().to_vec());
            }
            other => panic!("expected False, got {other:?}"),
        }
        assert_eq!(report.counterexamples[0].stage, "bmc");
        assert!(report.bmc.sat >= 1);
    }

    #[test]
    fn safe_program_verdict_is_true_complete() {
        let src = "fn main() { i32 x; x = input(); if (x > 0) { x = 1; } assert(x < 2); }";
        let p = parse_program(src).unwrap();
        let report = verify(&p, &[], &HybridConfig::default());
        assert_eq!(report.verdict, Verdict::True { complete: true, bound: 1 });
        assert_eq!(report.coverage_percent, 100.0);
    }

    #[test]
    fn coverage_report_lists_the_missed_side() {
        let src = "fn main() { i32 x; x = input(); if (x == 0x7A3F9C1D) { x = 1; } }";
        let p = parse_program(src).unwrap();
        let config = HybridConfig {
            rng_seed: 7,
            fuzz_budget: 2_000,
            stuck_window: 1_000,
            ..Default::default()
        };
        // fuzz-only coverage: use a campaign directly so BMC cannot close
        // the frontier
        let cfg = CampaignConfig {
            budget: 2_000,
            rng_seed: 7,
            stuck_window: 1_000,
            ..Default::default()
        };
        let (corpus, _) = campaign(&p, &[], &cfg, &Mode::Mutational);
        let report = HybridReport {
            verdict: Verdict::True { complete: false, bound: 1 },
            fuzz: FuzzStats::default(),
            bmc: BmcStats::default(),
            synergy_rounds: 0,
            coverage_percent: corpus.coverage.len() as f64 * 100.0 / p.total_edges as f64,
            covered_edges: corpus.coverage.iter().copied().collect(),
            total_edges: p.total_edges,
            counterexamples: vec![],
            frontier: vec![],
        };
        let (summary, text) = coverage_report(&p, &report);
        // the never-taken then side contributes its branch edge and the
        // join goto behind it
        assert_eq!(summary.missed_edges.len(), 2);
        assert_eq!(summary.unreached_blocks.len(), 1);
        assert!(text.contains("missed edges:"));
        let _ = config;
    }

    #[test]
    fn hybrid_finds_at_least_as_many_faults_as_fuzz_alone() {
        let src = "fn main() {\n i32 x;\n x = input();\n \
                   if (x == 0x1357BEEF) { assert(0); }\n if (x == 3) { x = x / (x - 3); }\n}";
        let p = parse_program(src).unwrap();
        let cfg = CampaignConfig {
            budget: 20_000,
            rng_seed: 11,
            stop_on_crash: false,
            stuck_window: u64::MAX,
            ..Default::default()
        };
        let (fuzz_corpus, _) = campaign(&p, &[], &cfg, &Mode::Mutational);
        let config = HybridConfig {
            fuzz_budget: 20_000,
            rng_seed: 11,
            stop_on_first_crash: false,
            stuck_window: u64::MAX,
            ..Default::default()
        };
        let report = verify(&p, &[], &config);
        assert!(
            report.counterexamples.len() >= fuzz_corpus.fault_locations().len(),
            "hybrid must not lose fault locations"
        );
        // and the magic-guarded fault specifically requires the BMC stage
        assert!(report.counterexamples.iter().any(|c| c.stage == "bmc"));
    }
}
