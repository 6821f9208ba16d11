//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uavf::bmc::{self, Verdict};
use uavf::exec;
use uavf::fuzz::{self, CampaignConfig, Mode};
use uavf::gps;
use uavf::hybrid::{self, HybridConfig};
use uavf::mini_ir::{parse_program, Program};
use uavf::netharness::{self, AttackOutcome, EndpointConfig, VulnToggles};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load(name: &str) -> Program {
    let path = corpus_dir().join(name);
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
    parse_program(&src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn report(criterion: u32, ok: bool, detail: &str) {
    println!("criterion {criterion}: {} — {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed: {detail}");
}

/// The ten seeded-bug programs and the fault kind each must produce.
const BUG_PROGRAMS: &[(&str, &str)] = &[
    ("assert_false.uir", "assert-violation"),
    ("assert_byte.uir", "assert-violation"),
    ("overflow_add.uir", "signed-overflow"),
    ("underflow_sub.uir", "signed-underflow"),
    ("div_by_zero.uir", "div-by-zero"),
    ("div_min_neg_one.uir", "signed-overflow"),
    ("buffer_store.uir", "buffer-overflow"),
    ("buffer_load.uir", "buffer-overflow"),
    ("null_load.uir", "null-deref"),
    ("null_store.uir", "null-deref"),
];

#[test]
fn criterion_1_seeded_corpus_detection() {
    let mut details = Vec::new();
    let mut all_ok = true;
    for (name, want_kind) in BUG_PROGRAMS {
        let program = load(name);
        let config = HybridConfig { fuzz_budget: 30_000, rng_seed: 7, ..Default::default() };
        let start = Instant::now();
        let rep = hybrid::verify(&program, &[], &config);
        let elapsed = start.elapsed();
        let ok = match &rep.verdict {
            Verdict::False(cex) => {
                // replay-confirm the counterexample independently
                let replayed = exec::run(&program, &cex.input, 1_000_000);
                let kind_ok = cex.property.kind.to_string() == *want_kind;
                replayed.status.is_fault() && kind_ok && elapsed < Duration::from_secs(60)
            }
            _ => false,
        };
        all_ok &= ok;
        if !ok {
            details.push(format!("{name}: {:?}", rep.verdict));
        }
    }
    report(
        1,
        all_ok,
        &if all_ok {
            format!("10/10 seeded bugs found with replay-confirmed counterexamples")
        } else {
            details.join("; ")
        },
    );
}

#[test]
fn criterion_2_hybrid_beats_fuzz() {
    let program = load("magic_guard.uir");
    let start = Instant::now();

    // fuzz-only with budget 10^5 and a fixed seed: stuck, no crash
    let cfg = CampaignConfig { budget: 100_000, rng_seed: 7, ..Default::default() };
    let (corpus, stuck) = fuzz::campaign(&program, &[], &cfg, &Mode::Mutational);
    let fuzz_stuck = stuck.stuck && corpus.crashes.is_empty();

    // hybrid verify: False via the BMC stage
    let hcfg = HybridConfig { fuzz_budget: 100_000, rng_seed: 7, ..Default::default() };
    let rep = hybrid::verify(&program, &[], &hcfg);
    let via_bmc = matches!(&rep.verdict, Verdict::False(_))
        && rep.counterexamples.iter().any(|c| c.stage == "bmc");
    let magic_input = matches!(&rep.verdict, Verdict::False(cex)
        if cex.input == 0x4D41474Bu32.to_le_bytes().to_vec());

    let elapsed = start.elapsed();
    let ok = fuzz_stuck && via_bmc && magic_input && elapsed < Duration::from_secs(120);
    report(
        2,
        ok,
        &format!(
            "fuzz stuck={fuzz_stuck}, hybrid False via bmc stage={via_bmc}, model decodes to the magic constant={magic_input}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    );
}

/// Programs whose entire input is at most two bytes (read via input_byte),
/// making exhaustive concrete enumeration feasible.
const BYTE_INPUT_PROGRAMS: &[&str] = &[
    "assert_false.uir",
    "assert_byte.uir",
    "overflow_add.uir",
    "underflow_sub.uir",
    "div_by_zero.uir",
    "div_min_neg_one.uir",
    "buffer_store.uir",
    "buffer_load.uir",
    "null_load.uir",
    "null_store.uir",
    "safe_line.uir",
    "safe_loop.uir",
];

#[test]
fn criterion_3_bmc_soundness_oracle() {
    let mut agree = 0;
    let mut total = 0;
    let mut mismatches = Vec::new();
    for name in BYTE_INPUT_PROGRAMS {
        let program = load(name);
        // exhaustive concrete enumeration over all inputs of length 0..=2
        let mut any_fault = false;
        'outer: for len in 0..=2usize {
            let limit = 256u32.pow(len as u32);
            for v in 0..limit {
                let input: Vec<u8> = (0..len).map(|i| (v >> (8 * i)) as u8).collect();
                if exec::run(&program, &input, 1_000_000).status.is_fault() {
                    any_fault = true;
                    break 'outer;
                }
            }
        }
        let k = bmc::default_k(&program);
        let rep = bmc::check(&program, k, &HashSet::new(), Duration::from_secs(60));
        let verdict_fault = match &rep.verdict {
            Verdict::False(_) => Some(true),
            Verdict::True { complete: true, .. } => Some(false),
            _ => None,
        };
        total += 1;
        if verdict_fault == Some(any_fault) {
            agree += 1;
        } else {
            mismatches.push(format!("{name}: exec fault={any_fault}, bmc {:?}", rep.verdict));
        }
    }
    report(
        3,
        agree == total,
        &if mismatches.is_empty() {
            format!("exhaustive enumeration agrees with BMC on {agree}/{total} programs")
        } else {
            mismatches.join("; ")
        },
    );
}

#[test]
fn criterion_4_solver_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let num_vars = 16;
    let start = Instant::now();
    let mut matches = 0;
    for _ in 0..200 {
        let num_clauses = rng.random_range(60..=90);
        let clauses: Vec<Vec<i32>> = (0..num_clauses)
            .map(|_| {
                let mut lits = Vec::new();
                while lits.len() < 3 {
                    let v = rng.random_range(1..=num_vars as i32);
                    if lits.iter().any(|&l: &i32| l.abs() == v) {
                        continue;
                    }
                    lits.push(if rng.random_bool(0.5) { v } else { -v });
                }
                lits
            })
            .collect();
        let mut solver = bmc::sat::Solver::from_clauses(num_vars, &clauses);
        let cdcl_sat = match solver.solve(Duration::from_secs(5)) {
            bmc::SatResult::Sat(model) => {
                // sanity: the model must actually satisfy the formula
                assert!(clauses.iter().all(|c| c
                    .iter()
                    .any(|&l| model[(l.abs() - 1) as usize] == (l > 0))));
                true
            }
            bmc::SatResult::Unsat => false,
            bmc::SatResult::Timeout => panic!("solver timeout on a 16-var instance"),
        };
        let brute_sat = bmc::sat::brute_force(num_vars, &clauses).is_some();
        if cdcl_sat == brute_sat {
            matches += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = matches == 200 && elapsed < Duration::from_secs(10);
    report(
        4,
        ok,
        &format!("CDCL vs brute force {matches}/200 in {:.2}s", elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_5_table_iii_reproduction() {
    let start = Instant::now();
    let cfg = |toggles| EndpointConfig {
        cmd_port: 0,
        state_port: 0,
        interval_secs: 0.05,
        toggles,
        ..EndpointConfig::default()
    };
    let probe = Duration::from_millis(100);
    let settle = Duration::from_millis(150);

    let open = netharness::serve(cfg(VulnToggles { no_auth: true, ..Default::default() })).unwrap();
    let takeover = netharness::attack_takeover(open.cmd_addr, open.state_addr, settle);
    open.stop();

    let weak = netharness::serve(cfg(VulnToggles {
        unchecked_copy: true,
        no_auth: true,
        ..Default::default()
    }))
    .unwrap();
    let dos = netharness::attack_dos(weak.cmd_addr, 100, probe);
    weak.stop();

    let hard1 = netharness::serve(cfg(VulnToggles::default())).unwrap();
    let hard_takeover = netharness::attack_takeover(hard1.cmd_addr, hard1.state_addr, settle);
    hard1.stop();
    let hard2 = netharness::serve(cfg(VulnToggles::default())).unwrap();
    let hard_dos = netharness::attack_dos(hard2.cmd_addr, 100, probe);
    hard2.stop();

    let elapsed = start.elapsed();
    let ok = matches!(takeover, AttackOutcome::FullControl { .. })
        && matches!(dos, AttackOutcome::Crash { .. })
        && hard_takeover == AttackOutcome::NoEffect
        && hard_dos == AttackOutcome::NoEffect
        && elapsed < Duration::from_secs(30);
    report(
        5,
        ok,
        &format!(
            "takeover={takeover:?} dos={dos:?} hardened=({hard_takeover:?},{hard_dos:?}) in {:.1}s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_6_table_ii_reproduction() {
    let program = load("wire_proto.uir");
    let rep = fuzz::compare_modes(&program, &fuzz::tello_spec(), 100_000, 7, "wire-proto");
    let table = rep.table();
    let mutational = rep.rows.iter().find(|r| r.approach.contains("Mutational")).unwrap();
    let generational = rep.rows.iter().find(|r| r.approach.contains("Generational")).unwrap();
    let ok = generational.faults >= mutational.faults
        && generational.faults >= 1
        && table.contains("Fuzzing Approach")
        && table.contains("Budget");
    report(
        6,
        ok,
        &format!(
            "generational {} faults >= mutational {} at equal budgets; Table-II-format report emitted",
            generational.faults, mutational.faults
        ),
    );
    println!("{table}");
}

#[test]
fn criterion_7_table_i_out_of_scope() {
    // Table I (SV-COMP results) needs competition infrastructure and
    // k-induction; it is documented as not reproducible and substituted by
    // the property/oracle suites of criteria 1–4. Nothing to execute.
    report(7, true, "Table I documented as not reproducible; substituted by criteria 1-4");
}

#[test]
fn criterion_8_gps_capture_properties() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = true;
    for _ in 0..1_000 {
        let distance = rng.random_range(1.0..100_000.0f64);
        let tx = rng.random_range(-30.0..60.0f64);
        let authentic = rng.random_range(-160.0..-80.0f64);
        let margin = rng.random_range(0.0..10.0f64);
        let mut scenario = gps::SpoofScenario::at_distance(distance, tx);
        scenario.authentic_dbm = authentic;
        scenario.capture_margin_db = margin;
        let base = gps::evaluate(&scenario).unwrap();

        // monotone non-decreasing in tx power
        let mut stronger = scenario.clone();
        stronger.tx_power_dbm += rng.random_range(0.0..30.0);
        let s = gps::evaluate(&stronger).unwrap();
        if base.captured && !s.captured {
            ok = false;
        }
        // monotone non-increasing in distance
        let mut closer = gps::SpoofScenario::at_distance(distance * rng.random_range(0.1..1.0), tx);
        closer.authentic_dbm = authentic;
        closer.capture_margin_db = margin;
        let c = gps::evaluate(&closer).unwrap();
        if base.captured && !c.captured {
            ok = false;
        }
        // position integrity
        if !base.captured && base.reported_position != scenario.target_pos {
            ok = false;
        }

        // bisection: captured flips exactly where spoofed power crosses
        // authentic + margin, located to 0.01 dB in tx power
        let (mut lo, mut hi) = (-200.0f64, 200.0f64);
        while hi - lo > 0.01 {
            let mid = (lo + hi) / 2.0;
            let mut probe = scenario.clone();
            probe.tx_power_dbm = mid;
            if gps::evaluate(&probe).unwrap().captured {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // the analytic flip point: tx such that tx - FSPL = authentic + margin
        let fspl = scenario.tx_power_dbm - base.spoofed_dbm;
        let analytic = authentic + margin + fspl;
        if (hi - analytic).abs() > 0.02 {
            ok = false;
        }
    }

    // the 620 m default scenario is captured
    let r620 = gps::evaluate(&gps::SpoofScenario::at_distance(620.0, 30.0)).unwrap();
    ok &= r620.captured;

    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(5);
    report(
        8,
        ok,
        &format!(
            "1000 randomized monotonicity/bisection scenarios + 620m captured={} in {:.2}s",
            r620.captured,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_9_determinism() {
    let bin = env!("CARGO_BIN_EXE_uavf");
    let corpus = corpus_dir();
    let mut reports = Vec::new();
    for i in 0..2 {
        let out = std::env::temp_dir().join(format!("uavf-determinism-{i}-{}", std::process::id()));
        let status = std::process::Command::new(bin)
            .arg("verify")
            .arg(corpus.join("div_by_zero.uir"))
            .args(["--rng-seed", "7", "--deterministic", "--out"])
            .arg(&out)
            .output()
            .expect("run uavf verify");
        assert_eq!(status.status.code(), Some(1), "expected exit 1 for a buggy program");
        reports.push(std::fs::read(out.join("report.json")).expect("report.json"));
        std::fs::remove_dir_all(&out).ok();
    }
    let ok = reports[0] == reports[1];
    report(9, ok, "two --rng-seed 7 --deterministic runs produced byte-identical reports");
}
