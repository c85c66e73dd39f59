//! Benchmark suite comparing sequential and data-parallel execution of four
//! classic workloads (dense matrix multiplication, batched radix-2 FFT,
//! quicksort, and a Hamming(7,4) encode/BSC-channel/decode pipeline) with
//! explicit accounting for the cost of staging data in and out of a
//! device-style arena.
//!
//! The crate is organized around a small executor: every kernel runs under an
//! [`exec::ExecPlan`] that selects a sequential backend, a worker-pool backend,
//! or a staged mode that wraps either one and times the copy-in/copy-out
//! boundary separately from the kernel itself. Backends are required to be
//! bit-identical: per-element arithmetic order is fixed, so swapping backends
//! never changes a result, only its timing.
//!
//! - [`kernels`]: the workloads themselves, pure and deterministic.
//! - [`hamming`]: (7,4) Hamming codec, binary symmetric channel, pipeline.
//! - [`exec`]: execution plans, `par_map`, staged execution, hardware info.
//! - [`harness`]: seeded input generation, warmup/repetition protocol,
//!   median/min statistics.
//! - [`oracles`]: independent reference implementations every kernel is
//!   validated against before any timing claim is made.
//! - [`report`]: speedup tables, CSV/JSON serialization, and a replay of the
//!   reference timing tables bundled with the crate.
//!
//! All randomness flows through [`rng`]: ChaCha8 streams with fixed integer
//!-to-float mappings, so identical seeds produce identical inputs on every
//! platform, forever.

pub mod error;
pub mod exec;
pub mod hamming;
pub mod harness;
pub mod kernels;
pub mod oracles;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
