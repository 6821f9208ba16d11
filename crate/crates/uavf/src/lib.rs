//! Hybrid fuzzing + bounded model checking for a small imperative command
//! language, plus a simulated UAV UDP endpoint and a GPS-spoofing power
//! model. The pipeline: parse a `.uir` program, fuzz it with coverage
//! feedback, hand unexplored frontiers to the bounded model checker, and
//! feed solver models back into the fuzzer until a verdict emerges.

pub mod bmc;
pub mod exec;
pub mod fuzz;
pub mod gps;
pub mod hybrid;
pub mod mini_ir;
pub mod netharness;
