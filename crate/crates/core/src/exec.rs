//! Execution backends.
//!
//! Every kernel in the suite runs under an [`ExecPlan`]: plain sequential,
//! data-parallel on a worker pool, or staged: the same compute backend behind
//! an explicit copy boundary, with the copy-in, kernel, and copy-out phases
//! timed separately. The staged mode is how the suite models an accelerator:
//! parallel compute that can only touch operands after they have been moved
//! into its own memory.
//!
//! Backends must be observationally identical. [`par_map`] guarantees
//! `output[i] == f(i)` for every backend, worker count, and chunk size, and
//! the kernels fix per-element arithmetic order so results are bit-identical
//! across backends.
//!
//! The executor owns the only worker pools in the suite; kernels receive their
//! parallelism from here and never spawn threads themselves. Kernels must not
//! nest `par_map` calls.

use std::sync::OnceLock;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Split threshold above which the parallel quicksort recurses concurrently.
pub const DEFAULT_SORT_PAR_THRESHOLD: usize = 4096;
/// Slice length at or below which quicksort switches to insertion sort.
pub const DEFAULT_SORT_INSERTION_THRESHOLD: usize = 16;

/// Compute backend: sequential, or a worker pool with a chunking policy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Backend {
    Sequential,
    Parallel {
        workers: usize,
        /// Indices per task; `None` means `len / (4 * workers)`, minimum 1.
        chunk: Option<usize>,
    },
}

/// Backend selection plus staging flag and kernel tuning knobs.
///
/// A staged plan wraps a non-staged compute backend; `compute()` always
/// returns the inner backend, so kernels can ignore staging entirely while
/// [`staged_execute`] handles the copy boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecPlan {
    compute: Backend,
    staged: bool,
    pub sort_par_threshold: usize,
    pub sort_insertion_threshold: usize,
}

impl ExecPlan {
    fn with_backend(compute: Backend) -> Self {
        ExecPlan {
            compute,
            staged: false,
            sort_par_threshold: DEFAULT_SORT_PAR_THRESHOLD,
            sort_insertion_threshold: DEFAULT_SORT_INSERTION_THRESHOLD,
        }
    }

    pub fn sequential() -> Self {
        Self::with_backend(Backend::Sequential)
    }

    /// Parallel plan with the default worker count and automatic chunking.
    pub fn parallel() -> Self {
        Self::with_backend(Backend::Parallel {
            workers: default_workers(),
            chunk: None,
        })
    }

    pub fn parallel_with(workers: usize, chunk: Option<usize>) -> Result<Self> {
        if workers == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        if chunk == Some(0) {
            return Err(Error::Config("chunk size must be at least 1".into()));
        }
        Ok(Self::with_backend(Backend::Parallel { workers, chunk }))
    }

    /// Wrap a compute plan in the staged (copy-boundary) mode.
    pub fn staged(inner: ExecPlan) -> Self {
        ExecPlan {
            staged: true,
            ..inner
        }
    }

    pub fn is_staged(&self) -> bool {
        self.staged
    }

    /// The compute backend, with any staging wrapper stripped.
    pub fn compute(&self) -> &Backend {
        &self.compute
    }

    /// The same plan without the staging wrapper.
    pub fn inner(&self) -> ExecPlan {
        ExecPlan {
            staged: false,
            ..self.clone()
        }
    }

    /// True when the compute backend routes work through the worker pool.
    pub fn is_parallel(&self) -> bool {
        matches!(self.compute, Backend::Parallel { .. })
    }

    pub fn workers(&self) -> usize {
        match self.compute {
            Backend::Sequential => 1,
            Backend::Parallel { workers, .. } => workers,
        }
    }

    /// Stable label used in reports: "seq", "par", or "staged".
    pub fn label(&self) -> &'static str {
        if self.staged {
            "staged"
        } else {
            match self.compute {
                Backend::Sequential => "seq",
                Backend::Parallel { .. } => "par",
            }
        }
    }

    fn chunk_size(&self, len: usize) -> usize {
        match self.compute {
            Backend::Sequential => len.max(1),
            Backend::Parallel { workers, chunk } => match chunk {
                Some(c) => c,
                None => (len / (4 * workers)).max(1),
            },
        }
    }
}

fn parse_workers(value: &str) -> Option<usize> {
    value.trim().parse::<usize>().ok().filter(|&w| w >= 1)
}

/// Default worker count: `HETBENCH_WORKERS` if set and valid, otherwise the
/// hardware thread count. Resolved once per process.
pub fn default_workers() -> usize {
    static WORKERS: OnceLock<usize> = OnceLock::new();
    *WORKERS.get_or_init(|| {
        std::env::var("HETBENCH_WORKERS")
            .ok()
            .as_deref()
            .and_then(parse_workers)
            .unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            })
    })
}

fn chunk_ranges(len: usize, chunk: usize) -> Vec<std::ops::Range<usize>> {
    let chunk = chunk.max(1);
    let mut ranges = Vec::with_capacity(len.div_ceil(chunk));
    let mut start = 0;
    while start < len {
        let end = (start + chunk).min(len);
        ranges.push(start..end);
        start = end;
    }
    ranges
}

#[cfg(feature = "parallel")]
mod pool {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};

    /// One pool per distinct worker count, built lazily and shared.
    pub(super) fn get(workers: usize) -> Arc<rayon::ThreadPool> {
        static POOLS: OnceLock<Mutex<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();
        let pools = POOLS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut pools = pools.lock().expect("worker pool registry poisoned");
        pools
            .entry(workers)
            .or_insert_with(|| {
                Arc::new(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(workers)
                        .thread_name(|i| format!("hetbench-worker-{i}"))
                        .build()
                        .expect("failed to build worker pool"),
                )
            })
            .clone()
    }
}

/// Run `op` inside the plan's worker pool (or inline for sequential plans).
///
/// Divide-and-conquer kernels enter the pool once through here and then use
/// [`maybe_join`] for inner splits.
pub fn run_on_pool<R, OP>(plan: &ExecPlan, op: OP) -> R
where
    R: Send,
    OP: FnOnce() -> R + Send,
{
    match plan.compute() {
        Backend::Sequential => op(),
        #[cfg(feature = "parallel")]
        Backend::Parallel { workers, .. } => pool::get(*workers).install(op),
        #[cfg(not(feature = "parallel"))]
        Backend::Parallel { .. } => op(),
    }
}

/// Potentially-parallel fork: `rayon::join` when `parallel` is set (and the
/// feature is enabled), plain sequential calls otherwise.
pub fn maybe_join<A, B, RA, RB>(parallel: bool, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return rayon::join(a, b);
    }
    let _ = parallel;
    (a(), b())
}

/// Ordered map over an index range: `output[i] == f(i)` under every backend.
pub fn par_map<T, F>(len: usize, plan: &ExecPlan, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    match plan.compute() {
        Backend::Sequential => (0..len).map(f).collect(),
        Backend::Parallel { .. } => {
            let ranges = chunk_ranges(len, plan.chunk_size(len));
            map_chunks(plan, ranges, |r| r.map(&f).collect::<Vec<_>>())
                .into_iter()
                .flatten()
                .collect()
        }
    }
}

/// Fallible ordered map. On failure the whole map aborts with the error of
/// the smallest failing index, regardless of execution order.
pub fn try_par_map<T, E, F>(len: usize, plan: &ExecPlan, f: F) -> std::result::Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> std::result::Result<T, E> + Sync,
{
    let per_chunk = |r: std::ops::Range<usize>| -> std::result::Result<Vec<T>, E> {
        // In-order scan, so the chunk reports its lowest failing index.
        r.map(&f).collect()
    };
    // Sequential plans report chunk_size == len, i.e. a single chunk.
    let chunks = chunk_ranges(len, plan.chunk_size(len));
    let results = map_chunks(plan, chunks, per_chunk);
    let mut out = Vec::with_capacity(len);
    // Chunks cover ascending index ranges, so the first Err seen here carries
    // the globally smallest failing index.
    for chunk in results {
        out.extend(chunk?);
    }
    Ok(out)
}

fn map_chunks<T, F>(plan: &ExecPlan, ranges: Vec<std::ops::Range<usize>>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    match plan.compute() {
        Backend::Sequential => ranges.into_iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Backend::Parallel { workers, .. } => {
            use rayon::prelude::*;
            pool::get(*workers).install(|| ranges.into_par_iter().map(f).collect())
        }
        #[cfg(not(feature = "parallel"))]
        Backend::Parallel { .. } => ranges.into_iter().map(f).collect(),
    }
}

/// Per-phase wall-clock accounting for one staged execution.
///
/// `total_s` is the sum of the three phases by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StagingTimes {
    pub ingress_s: f64,
    pub kernel_s: f64,
    pub egress_s: f64,
    pub total_s: f64,
}

impl StagingTimes {
    pub fn new(ingress_s: f64, kernel_s: f64, egress_s: f64) -> Self {
        StagingTimes {
            ingress_s,
            kernel_s,
            egress_s,
            total_s: ingress_s + kernel_s + egress_s,
        }
    }

    /// Transport-only share: copy-in plus copy-out.
    pub fn transfer_s(&self) -> f64 {
        self.ingress_s + self.egress_s
    }
}

/// Byte-for-byte copy into freshly allocated storage, the "device" side of
/// the staged mode. Allocation failure surfaces as a resource error instead
/// of aborting.
pub trait Stage: Sized {
    fn stage(&self) -> Result<Self>;
}

/// Copy a flat buffer into a new allocation.
pub(crate) fn copy_arena<T: Copy>(src: &[T]) -> Result<Vec<T>> {
    let mut dst = Vec::new();
    dst.try_reserve_exact(src.len()).map_err(|_| {
        Error::Resource(format!(
            "staging arena allocation of {} bytes failed",
            std::mem::size_of_val(src)
        ))
    })?;
    dst.extend_from_slice(src);
    Ok(dst)
}

impl<T: Copy> Stage for Vec<T> {
    fn stage(&self) -> Result<Self> {
        copy_arena(self)
    }
}

impl<A: Stage, B: Stage> Stage for (A, B) {
    fn stage(&self) -> Result<Self> {
        Ok((self.0.stage()?, self.1.stage()?))
    }
}

/// Run `kernel` behind the copy boundary of a staged plan.
///
/// The input is copied into a staging arena (ingress timed), the kernel runs
/// on the arena copy under the inner backend (timed), and the output is
/// copied back out (egress timed). The result is bit-identical to running the
/// kernel directly; only the accounting differs.
pub fn staged_execute<I, O, F>(input: &I, plan: &ExecPlan, kernel: F) -> Result<(O, StagingTimes)>
where
    I: Stage,
    O: Stage,
    F: FnOnce(&I, &ExecPlan) -> Result<O>,
{
    if !plan.is_staged() {
        return Err(Error::Config(
            "staged_execute requires a staged plan".into(),
        ));
    }
    let inner = plan.inner();

    let t = Instant::now();
    let arena_in = input.stage()?;
    let ingress_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let arena_out = kernel(&arena_in, &inner)?;
    let kernel_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let output = arena_out.stage()?;
    let egress_s = t.elapsed().as_secs_f64();

    Ok((output, StagingTimes::new(ingress_s, kernel_s, egress_s)))
}

/// Execution environment descriptor, embedded in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardwareReport {
    /// Default worker count (HETBENCH_WORKERS or hardware threads).
    pub workers: usize,
    /// Measured minimum nonzero delta of the monotonic clock, in seconds.
    pub clock_resolution_s: f64,
    /// `os-arch`, e.g. `linux-x86_64`.
    pub platform: String,
    /// Whether the worker-pool feature is compiled in.
    pub parallel_enabled: bool,
}

fn measure_clock_resolution() -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..256 {
        let t = Instant::now();
        let mut d = t.elapsed();
        while d.is_zero() {
            d = t.elapsed();
        }
        best = best.min(d.as_secs_f64());
    }
    best
}

/// Stable within a process; computed on first use.
pub fn hardware_report() -> &'static HardwareReport {
    static REPORT: OnceLock<HardwareReport> = OnceLock::new();
    REPORT.get_or_init(|| HardwareReport {
        workers: default_workers(),
        clock_resolution_s: measure_clock_resolution(),
        platform: format!("{}-{}", std::env::consts::OS, std::env::consts::ARCH),
        parallel_enabled: cfg!(feature = "parallel"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn splitmix64(mut x: u64) -> u64 {
        x = x.wrapping_add(0x9e3779b97f4a7c15);
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
        x ^ (x >> 31)
    }

    #[test]
    fn par_map_squares_under_every_backend() {
        let expected = vec![0u64, 1, 4, 9];
        for plan in [
            ExecPlan::sequential(),
            ExecPlan::parallel(),
            ExecPlan::parallel_with(3, Some(1)).unwrap(),
        ] {
            assert_eq!(par_map(4, &plan, |i| (i * i) as u64), expected);
        }
    }

    #[test]
    fn par_map_empty_range() {
        let out: Vec<u64> = par_map(0, &ExecPlan::parallel(), |i| i as u64);
        assert!(out.is_empty());
    }

    #[test]
    fn par_map_hash_million_matches_sequential() {
        let seq = par_map(1_000_000, &ExecPlan::sequential(), |i| splitmix64(i as u64));
        let par = par_map(1_000_000, &ExecPlan::parallel_with(8, None).unwrap(), |i| {
            splitmix64(i as u64)
        });
        assert_eq!(seq, par);
    }

    #[test]
    fn try_par_map_reports_first_error_by_index() {
        for plan in [
            ExecPlan::sequential(),
            ExecPlan::parallel_with(4, Some(7)).unwrap(),
        ] {
            let res: std::result::Result<Vec<u64>, usize> = try_par_map(1000, &plan, |i| {
                if i == 313 || i == 100 || i == 999 {
                    Err(i)
                } else {
                    Ok(i as u64)
                }
            });
            assert_eq!(res.unwrap_err(), 100);
        }
    }

    #[test]
    fn plan_validation() {
        assert!(ExecPlan::parallel_with(0, None).is_err());
        assert!(ExecPlan::parallel_with(2, Some(0)).is_err());
        let staged = ExecPlan::staged(ExecPlan::parallel());
        assert!(staged.is_staged());
        assert!(!staged.inner().is_staged());
        assert_eq!(staged.label(), "staged");
        assert_eq!(ExecPlan::sequential().label(), "seq");
        assert_eq!(ExecPlan::parallel().label(), "par");
    }

    #[test]
    fn chunk_sizing_defaults() {
        let plan = ExecPlan::parallel_with(4, None).unwrap();
        assert_eq!(plan.chunk_size(1600), 100);
        assert_eq!(plan.chunk_size(3), 1);
        let fixed = ExecPlan::parallel_with(4, Some(64)).unwrap();
        assert_eq!(fixed.chunk_size(1600), 64);
    }

    #[test]
    fn workers_env_parsing() {
        assert_eq!(parse_workers("8"), Some(8));
        assert_eq!(parse_workers(" 2 "), Some(2));
        assert_eq!(parse_workers("0"), None);
        assert_eq!(parse_workers("abc"), None);
    }

    #[test]
    fn staged_execute_on_empty_input() {
        let plan = ExecPlan::staged(ExecPlan::sequential());
        let (out, times) = staged_execute(&Vec::<f32>::new(), &plan, |v, _| Ok(v.clone())).unwrap();
        assert!(out.is_empty());
        assert!(times.ingress_s >= 0.0 && times.egress_s >= 0.0);
    }

    #[test]
    fn staged_execute_accounting_identity() {
        let plan = ExecPlan::staged(ExecPlan::sequential());
        let input: Vec<f32> = (0..4096).map(|i| i as f32).collect();
        let (out, times) = staged_execute(&input, &plan, |v, _| {
            Ok(v.iter().map(|x| x * 2.0).collect::<Vec<f32>>())
        })
        .unwrap();
        assert_eq!(out[5], 10.0);
        assert_eq!(
            times.total_s,
            times.ingress_s + times.kernel_s + times.egress_s
        );
        assert!(times.total_s >= 0.0);
    }

    #[test]
    fn staged_execute_rejects_unstaged_plan() {
        let err = staged_execute(&vec![1.0f32], &ExecPlan::sequential(), |v, _| Ok(v.clone()))
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn hardware_report_is_stable_and_sane() {
        let a = hardware_report();
        let b = hardware_report();
        assert_eq!(a, b);
        assert!(a.workers >= 1);
        assert!(
            a.clock_resolution_s <= 1e-3,
            "clock resolution {} s",
            a.clock_resolution_s
        );
    }
}
