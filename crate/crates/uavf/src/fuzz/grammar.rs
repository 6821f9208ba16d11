//! Generational input model: a small command grammar (Tello-style GCS
//! messages) plus anomaly operators that turn a valid message into a
//! well-defined invalid one.

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use serde::{Deserialize, Serialize};

use super::{Origin, TestCase};

pub const DEFAULT_ANOMALY_RATE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntField {
    pub min: i64,
    pub max: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandSpec {
    pub name: String,
    pub arg: Option<IntField>,
}

/// Grammar of valid messages: token alternatives with optional ranged
/// integer fields, space separated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub commands: Vec<CommandSpec>,
}

impl ProtocolSpec {
    /// True iff `msg` is a grammar-valid message.
    pub fn is_valid(&self, msg: &[u8]) -> bool {
        let Ok(text) = std::str::from_utf8(msg) else {
            return false;
        };
        let mut parts = text.splitn(2, ' ');
        let name = parts.next().unwrap_or("");
        let rest = parts.next();
        self.commands.iter().any(|c| {
            if c.name != name {
                return false;
            }
            match (&c.arg, rest) {
                (None, None) => true,
                (Some(f), Some(arg)) => {
                    arg.parse::<i64>().is_ok_and(|v| v >= f.min && v <= f.max)
                }
                _ => false,
            }
        })
    }
}

/// The Tello-style command grammar used by the simulated endpoint.
pub fn tello_spec() -> ProtocolSpec {
    let arg = Some(IntField { min: 20, max: 500 });
    ProtocolSpec {
        commands: vec![
            CommandSpec { name: "command".into(), arg: None },
            CommandSpec { name: "takeoff".into(), arg: None },
            CommandSpec { name: "land".into(), arg: None },
            CommandSpec { name: "up".into(), arg },
            CommandSpec { name: "down".into(), arg },
            CommandSpec { name: "battery?".into(), arg: None },
        ],
    }
}

fn valid_message(spec: &ProtocolSpec, rng: &mut ChaCha8Rng, trace: &mut Vec<String>) -> Vec<u8> {
    let cmd = spec.commands.choose(rng).unwrap();
    trace.push(format!("cmd:{}", cmd.name));
    let mut msg = cmd.name.clone().into_bytes();
    if let Some(f) = cmd.arg {
        let v = rng.random_range(f.min..=f.max);
        trace.push(format!("arg:{v}"));
        msg.push(b' ');
        msg.extend_from_slice(v.to_string().as_bytes());
    }
    msg
}

/// With probability `1 - anomaly_rate` emits a grammar-valid message;
/// otherwise applies exactly one anomaly operator to a valid message. The
/// rule trace is recorded in the test-case origin.
pub fn generate(spec: &ProtocolSpec, rng_seed: u64, anomaly_rate: f64) -> TestCase {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut trace = Vec::new();
    let mut msg = valid_message(spec, &mut rng, &mut trace);
    if rng.random_bool(anomaly_rate.clamp(0.0, 1.0)) {
        let anomalies = ["oversize-field", "out-of-range-int", "token-corruption"];
        let op = *anomalies.choose(&mut rng).unwrap();
        trace.push(format!("anomaly:{op}"));
        msg = apply_anomaly(&msg, op, &mut rng);
    }
    TestCase { bytes: msg, origin: Origin::Generated { trace }, tick: 0, new_edges: 0 }
}

fn apply_anomaly(msg: &[u8], op: &str, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let token_end = msg.iter().position(|&b| b == b' ').unwrap_or(msg.len());
    match op {
        // blow the integer field (or append one) far past any declared size
        "oversize-field" => {
            let digits = rng.random_range(64..=512);
            let mut out = msg[..token_end].to_vec();
            out.push(b' ');
            out.push(rng.random_range(b'1'..=b'9'));
            for _ in 1..digits {
                out.push(rng.random_range(b'0'..=b'9'));
            }
            out
        }
        // keep the field well-formed but outside its declared range
        "out-of-range-int" => {
            let v: i64 = if rng.random_bool(0.5) {
                rng.random_range(501..=100_000)
            } else {
                rng.random_range(-100_000..=19)
            };
            let mut out = msg[..token_end].to_vec();
            out.push(b' ');
            out.extend_from_slice(v.to_string().as_bytes());
            out
        }
        "token-corruption" => {
            let mut out = msg.to_vec();
            let pos = rng.random_range(0..token_end.max(1));
            let old = out[pos];
            let mut new = old;
            while new == old {
                new = rng.random_range(b'a'..=b'z');
            }
            out[pos] = new;
            out
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_generation_reparses_against_the_grammar() {
        let spec = tello_spec();
        for seed in 0..200u64 {
            let tc = generate(&spec, seed, 0.0);
            assert!(spec.is_valid(&tc.bytes), "invalid: {:?}", String::from_utf8_lossy(&tc.bytes));
        }
    }

    #[test]
    fn forced_anomalies_are_invalid() {
        let spec = tello_spec();
        for seed in 0..200u64 {
            let tc = generate(&spec, seed, 1.0);
            assert!(!spec.is_valid(&tc.bytes), "valid: {:?}", String::from_utf8_lossy(&tc.bytes));
            match &tc.origin {
                Origin::Generated { trace } => {
                    assert!(trace.iter().any(|s| s.starts_with("anomaly:")));
                }
                other => panic!("wrong origin {other:?}"),
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = tello_spec();
        for seed in 0..64u64 {
            assert_eq!(generate(&spec, seed, 0.5), generate(&spec, seed, 0.5));
        }
    }

    #[test]
    fn integer_fields_respect_declared_ranges() {
        let spec = tello_spec();
        assert!(spec.is_valid(b"up 20"));
        assert!(spec.is_valid(b"up 500"));
        assert!(!spec.is_valid(b"up 19"));
        assert!(!spec.is_valid(b"up 501"));
        assert!(!spec.is_valid(b"takeoff 30"));
        assert!(!spec.is_valid(b"explode"));
        assert!(spec.is_valid(b"battery?"));
    }
}
