//! The benchmark workloads: dense matmul, batched radix-2 FFT, quicksort.
//!
//! Kernels are pure and deterministic. Each one fixes its per-element
//! arithmetic order, so sequential, parallel, and staged execution produce
//! bit-identical outputs; backends change only who computes which element.

mod fft;
mod matmul;
mod sort;

pub use fft::{fft_batch, ifft_roundtrip, Direction, SignalBuffer};
pub use matmul::{matmul, DenseMatrix};
pub use sort::{quicksort, SortBuffer};
