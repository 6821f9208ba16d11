//! Command-line frontend: verify / fuzz / bmc / serve / attack / gps /
//! compare, with structured report emission.
//!
//! Exit status: 0 for True / NoFault, 1 for False / fault / FullControl /
//! Crash / captured, 2 for Unknown or usage errors.

use std::collections::HashSet;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use uavf::bmc;
use uavf::fuzz::{self, CampaignConfig, InputFraming, Mode, TestCase};
use uavf::gps;
use uavf::hybrid::{self, HybridConfig};
use uavf::mini_ir::{parse_program, Program};
use uavf::netharness::{self, AttackOutcome, EndpointConfig, VulnToggles};

#[derive(Parser)]
#[command(name = "uavf", version, about = "Hybrid fuzzing + bounded model checking for UAV command software")]
struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    rng_seed: u64,
    /// Omit timestamps so repeated runs produce byte-identical reports.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker parallelism for fuzzing campaigns.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Output directory for report.json, crashes/, corpus/, coverage.txt.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct TargetArgs {
    /// Mini-IR program to analyze.
    program: PathBuf,
    /// Directory of seed inputs (one file per seed).
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Use grammar-based (generational) input synthesis.
    #[arg(long)]
    generational: bool,
    /// Frame inputs as [len u32 LE][bytes] before execution.
    #[arg(long)]
    len_prefixed: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Hybrid verification: fuzz, then BMC over unexplored paths.
    Verify {
        #[command(flatten)]
        target: TargetArgs,
        /// Fuzzing execution budget.
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        /// BMC unroll bound (default: completeness threshold when known).
        #[arg(long)]
        k: Option<u32>,
        /// Solver timeout in seconds.
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
    },
    /// Coverage-guided fuzzing only.
    Fuzz {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        /// Keep fuzzing after the first crash.
        #[arg(long)]
        keep_going: bool,
        /// Anomaly injection rate for generational mode.
        #[arg(long, default_value_t = fuzz::DEFAULT_ANOMALY_RATE)]
        anomaly_rate: f64,
    },
    /// Bounded model checking only.
    Bmc {
        /// Mini-IR program to analyze.
        program: PathBuf,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
    },
    /// Run the simulated UDP endpoint until interrupted.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        #[arg(long, default_value_t = netharness::DEFAULT_CMD_PORT)]
        cmd_port: u16,
        #[arg(long, default_value_t = netharness::DEFAULT_STATE_PORT)]
        state_port: u16,
        /// State broadcast interval in seconds.
        #[arg(long, default_value_t = netharness::DEFAULT_INTERVAL_SECS)]
        interval: f64,
        /// Seed the unchecked-copy buffer overflow.
        #[arg(long)]
        unchecked_copy: bool,
        /// Disable the controller-address authorization check.
        #[arg(long)]
        no_auth: bool,
        /// Remove the backlog cap in the command handler.
        #[arg(long)]
        unbounded_queue: bool,
    },
    /// Attack clients against a running endpoint.
    Attack {
        #[command(subcommand)]
        kind: AttackCmd,
    },
    /// Evaluate a GPS spoofing scenario file.
    Gps {
        /// Scenario file (JSON SpoofScenario record).
        scenario: PathBuf,
    },
    /// Mutational vs. generational fuzzing with equal budgets.
    Compare {
        /// Mini-IR wire-protocol target.
        program: PathBuf,
        /// Protocol spec name (only "tello" is built in).
        #[arg(default_value = "tello")]
        spec: String,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        /// Target label for the report table.
        #[arg(long, default_value = "wire-proto")]
        label: String,
    },
}

#[derive(Subcommand)]
enum AttackCmd {
    /// Oversize datagrams plus a command flood, then liveness probes.
    Dos {
        /// Endpoint command address, e.g. 127.0.0.1:8889.
        addr: SocketAddr,
        #[arg(long, default_value_t = 10_000)]
        flood: u32,
        /// Seconds between liveness probes.
        #[arg(long, default_value_t = 1.0)]
        probe_interval: f64,
    },
    /// Command injection from an unauthorized source address.
    Takeover {
        /// Endpoint command address.
        addr: SocketAddr,
        /// Endpoint state-broadcast address.
        #[arg(long)]
        state_addr: SocketAddr,
        /// Seconds to watch state broadcasts after each command.
        #[arg(long, default_value_t = 0.5)]
        settle: f64,
    },
}

#[derive(Serialize)]
struct ReportEnvelope<T: Serialize> {
    command: String,
    rng_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp_unix: Option<u64>,
    report: T,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let Cli { rng_seed, deterministic, jobs, out, cmd } = cli;
    let common = Common { rng_seed, deterministic, out };
    match cmd {
        Cmd::Verify { target, budget, k, timeout } => {
            let program = load_program(&target.program)?;
            let seeds = load_seeds(target.seeds.as_deref())?;
            let config = HybridConfig {
                fuzz_budget: budget,
                k,
                solver_timeout_secs: timeout,
                rng_seed,
                mode: mode_of(&target),
                framing: framing_of(&target),
                jobs: jobs.max(1),
                ..HybridConfig::default()
            };
            let report = hybrid::verify(&program, &seeds, &config);
            let (_, coverage_text) = hybrid::coverage_report(&program, &report);
            write_report(&common, "verify", &report)?;
            write_text(&common.out.join("coverage.txt"), &coverage_text)?;
            let crash_inputs: Vec<(Vec<u8>, Option<Vec<u8>>)> = report
                .counterexamples
                .iter()
                .map(|c| (c.cex.input.clone(), Some(c.minimized.clone())))
                .collect();
            write_crashes(&common.out, &crash_inputs)?;
            println!("{}", verdict_line(&report.verdict));
            println!(
                "fuzz: {} executions, {} paths, {} crashes{}; bmc: {} paths, {} VCs, {} sat; coverage {:.1}%",
                report.fuzz.executions,
                report.fuzz.paths,
                report.fuzz.crashes,
                if report.fuzz.stuck { " (stuck)" } else { "" },
                report.bmc.paths_enumerated,
                report.bmc.vcs_checked,
                report.bmc.sat,
                report.coverage_percent
            );
            Ok(report.verdict.exit_code() as u8)
        }
        Cmd::Fuzz { target, budget, keep_going, anomaly_rate } => {
            let program = load_program(&target.program)?;
            let seeds = load_seeds(target.seeds.as_deref())?;
            let config = CampaignConfig {
                budget,
                rng_seed,
                stop_on_crash: !keep_going,
                anomaly_rate,
                framing: framing_of(&target),
                jobs: jobs.max(1),
                ..CampaignConfig::default()
            };
            let mode = mode_of(&target);
            let (corpus, stuck) = fuzz::campaign(&program, &seeds, &config, &mode);
            write_report(&common, "fuzz", &(&stuck, corpus.fault_locations()))?;
            write_corpus(&common.out, &corpus)?;
            let crash_inputs: Vec<(Vec<u8>, Option<Vec<u8>>)> = corpus
                .crashes
                .iter()
                .map(|c| (c.case.bytes.clone(), c.minimized.clone()))
                .collect();
            write_crashes(&common.out, &crash_inputs)?;
            println!(
                "{} executions, {} edges covered, {} crashes ({} distinct faults){}",
                stuck.executions,
                corpus.coverage.len(),
                corpus.crashes.len(),
                corpus.fault_locations().len(),
                if stuck.stuck { ", stuck" } else { "" }
            );
            Ok(if corpus.crashes.is_empty() { 0 } else { 1 })
        }
        Cmd::Bmc { program, k, timeout } => {
            let program = load_program(&program)?;
            let k = k.unwrap_or_else(|| bmc::default_k(&program));
            let report =
                bmc::check(&program, k, &HashSet::new(), Duration::from_secs_f64(timeout));
            write_report(&common, "bmc", &report)?;
            println!("{}", verdict_line(&report.verdict));
            println!(
                "k={}, {} paths, {} VCs ({} sat, {} unsat, {} pruned)",
                report.k,
                report.stats.paths_enumerated,
                report.stats.vcs_checked,
                report.stats.sat,
                report.stats.unsat,
                report.stats.pruned_infeasible
            );
            Ok(report.verdict.exit_code() as u8)
        }
        Cmd::Serve {
            bind,
            cmd_port,
            state_port,
            interval,
            unchecked_copy,
            no_auth,
            unbounded_queue,
        } => {
            let config = EndpointConfig {
                bind_addr: bind,
                cmd_port,
                state_port,
                interval_secs: interval,
                toggles: VulnToggles { unchecked_copy, no_auth, unbounded_queue },
                ..EndpointConfig::default()
            };
            let handle = netharness::serve(config).map_err(|e| e.to_string())?;
            println!("endpoint listening: cmd {} state {}", handle.cmd_addr, handle.state_addr);
            loop {
                std::thread::sleep(Duration::from_millis(200));
                if !handle.snapshot().alive {
                    println!("endpoint died (handler fault)");
                    return Ok(1);
                }
            }
        }
        Cmd::Attack { kind } => {
            let outcome = match kind {
                AttackCmd::Dos { addr, flood, probe_interval } => {
                    netharness::attack_dos(addr, flood, Duration::from_secs_f64(probe_interval))
                }
                AttackCmd::Takeover { addr, state_addr, settle } => {
                    netharness::attack_takeover(addr, state_addr, Duration::from_secs_f64(settle))
                }
            };
            write_report(&common, "attack", &outcome)?;
            match &outcome {
                AttackOutcome::FullControl { transitions } => {
                    println!("FullControl");
                    for t in transitions {
                        println!("  {t}");
                    }
                }
                AttackOutcome::Crash { failed_probes } => {
                    println!("Crash ({failed_probes} failed liveness probes)")
                }
                AttackOutcome::NoEffect => println!("NoEffect"),
            }
            Ok(outcome.exit_code() as u8)
        }
        Cmd::Gps { scenario } => {
            let text = fs::read_to_string(&scenario)
                .map_err(|e| format!("{}: {e}", scenario.display()))?;
            let scenario: gps::SpoofScenario =
                serde_json::from_str(&text).map_err(|e| format!("bad scenario: {e}"))?;
            let result = gps::evaluate(&scenario).map_err(|e| e.to_string())?;
            write_report(&common, "gps", &result)?;
            println!(
                "spoofed power {:.2} dBm vs authentic {:.2} dBm (margin {} dB) => captured = {}",
                result.spoofed_dbm, scenario.authentic_dbm, scenario.capture_margin_db, result.captured
            );
            println!(
                "reported position: [{:.1}, {:.1}, {:.1}]",
                result.reported_position[0], result.reported_position[1], result.reported_position[2]
            );
            Ok(if result.captured { 1 } else { 0 })
        }
        Cmd::Compare { program, spec, budget, label } => {
            if spec != "tello" {
                return Err(format!("unknown protocol spec `{spec}` (only \"tello\" is built in)"));
            }
            let program = load_program(&program)?;
            let report = fuzz::compare_modes(
                &program,
                &fuzz::tello_spec(),
                budget,
                rng_seed,
                &label,
            );
            write_report(&common, "compare", &report)?;
            print!("{}", report.table());
            Ok(0)
        }
    }
}

fn load_program(path: &Path) -> Result<Program, String> {
    let src = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_program(&src).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_seeds(dir: Option<&Path>) -> Result<Vec<TestCase>, String> {
    let Some(dir) = dir else { return Ok(Vec::new()) };
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    entries.sort();
    let mut seeds = Vec::new();
    for p in entries {
        let bytes = fs::read(&p).map_err(|e| format!("{}: {e}", p.display()))?;
        seeds.push(TestCase::seed(bytes));
    }
    Ok(seeds)
}

fn mode_of(target: &TargetArgs) -> Mode {
    if target.generational {
        Mode::Generational(fuzz::tello_spec())
    } else {
        Mode::Mutational
    }
}

fn framing_of(target: &TargetArgs) -> InputFraming {
    if target.len_prefixed {
        InputFraming::LenPrefixed
    } else {
        InputFraming::Raw
    }
}

fn verdict_line(v: &bmc::Verdict) -> String {
    match v {
        bmc::Verdict::False(cex) => format!(
            "verdict: False — {} at {} (input {} bytes, depth {})",
            cex.property.kind, cex.property.loc, cex.input.len(), cex.depth
        ),
        bmc::Verdict::True { complete, bound } => format!(
            "verdict: True (k={bound}, {})",
            if *complete { "complete" } else { "bounded only" }
        ),
        bmc::Verdict::Unknown(reason) => format!("verdict: Unknown ({reason})"),
    }
}

struct Common {
    rng_seed: u64,
    deterministic: bool,
    out: PathBuf,
}

fn write_report<T: Serialize>(common: &Common, command: &str, report: &T) -> Result<(), String> {
    fs::create_dir_all(&common.out).map_err(|e| e.to_string())?;
    let envelope = ReportEnvelope {
        command: command.to_string(),
        rng_seed: common.rng_seed,
        timestamp_unix: if common.deterministic {
            None
        } else {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs())
        },
        report,
    };
    let json = serde_json::to_string_pretty(&envelope).map_err(|e| e.to_string())?;
    write_text(&common.out.join("report.json"), &json)
}

fn write_text(path: &Path, text: &str) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| e.to_string())?;
    }
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_crashes(out: &Path, crashes: &[(Vec<u8>, Option<Vec<u8>>)]) -> Result<(), String> {
    let dir = out.join("crashes");
    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    for (i, (input, minimized)) in crashes.iter().enumerate() {
        fs::write(dir.join(format!("crash-{i:04}.bin")), input).map_err(|e| e.to_string())?;
        if let Some(m) = minimized {
            fs::write(dir.join(format!("crash-{i:04}.min.bin")), m)
                .map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

fn write_corpus(out: &Path, corpus: &fuzz::Corpus) -> Result<(), String> {
    let dir = out.join("corpus");
    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    for (i, case) in corpus.cases.iter().enumerate() {
        fs::write(dir.join(format!("case-{i:04}.bin")), &case.bytes)
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}
