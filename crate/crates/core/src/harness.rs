//! Measurement protocol: seeded input generation, warmup, repeated timing on
//! a monotonic clock, and median/min statistics.
//!
//! The harness is a single-threaded orchestrator; all parallelism lives
//! inside kernels via the executor. Inputs are generated once per (workload,
//! size, seed) and reused across repetitions, so a run's correctness
//! artifacts are fully determined by its seed; only timings vary.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{hardware_report, staged_execute, ExecPlan, HardwareReport, Stage, StagingTimes};
use crate::hamming::{self, ChannelConfig, Codeword, InfoWord};
use crate::kernels::{
    fft_batch, matmul, quicksort, DenseMatrix, Direction, SignalBuffer, SortBuffer,
};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Workload {
    Matmul,
    Fft,
    Qsort,
    Hamming,
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Workload::Matmul => "matmul",
            Workload::Fft => "fft",
            Workload::Qsort => "qsort",
            Workload::Hamming => "hamming",
        };
        f.write_str(s)
    }
}

impl FromStr for Workload {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matmul" => Ok(Workload::Matmul),
            "fft" => Ok(Workload::Fft),
            "qsort" => Ok(Workload::Qsort),
            "hamming" => Ok(Workload::Hamming),
            other => Err(Error::Config(format!(
                "unknown workload '{other}' (expected matmul, fft, qsort, or hamming)"
            ))),
        }
    }
}

/// One benchmark size. The interpretation depends on the workload: square
/// matrix dimension, NxM signal batch, array length, or info-word count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Size {
    Square(usize),
    Signal { len: usize, batch: usize },
    Length(usize),
    Words(usize),
}

impl Size {
    /// Parse a CLI size token for the given workload: a plain integer for
    /// matmul / qsort / hamming, `NxM` for fft (N must be a power of two).
    pub fn parse(workload: Workload, text: &str) -> Result<Size> {
        let int = |t: &str| -> Result<usize> {
            t.parse::<usize>()
                .map_err(|_| Error::Config(format!("invalid size '{t}'")))
        };
        match workload {
            Workload::Matmul => {
                let n = int(text)?;
                if n == 0 {
                    return Err(Error::Config("matrix dimension must be positive".into()));
                }
                Ok(Size::Square(n))
            }
            Workload::Fft => {
                let (n, m) = text.split_once('x').ok_or_else(|| {
                    Error::Config(format!("fft size '{text}' must have the form NxM"))
                })?;
                let (len, batch) = (int(n)?, int(m)?);
                if !len.is_power_of_two() || len == 0 {
                    return Err(Error::Config(format!(
                        "fft column length {len} must be a power of two"
                    )));
                }
                if batch == 0 {
                    return Err(Error::Config("fft batch count must be positive".into()));
                }
                Ok(Size::Signal { len, batch })
            }
            Workload::Qsort => Ok(Size::Length(int(text)?)),
            Workload::Hamming => {
                let n = int(text)?;
                if n == 0 {
                    return Err(Error::Config("word count must be positive".into()));
                }
                Ok(Size::Words(n))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Size::Square(n) => format!("{n}x{n}"),
            Size::Signal { len, batch } => format!("{len}x{batch}"),
            Size::Length(n) | Size::Words(n) => format!("{n}"),
        }
    }
}

/// The size grids of the four reference tables.
pub fn default_sizes(workload: Workload) -> Vec<Size> {
    match workload {
        Workload::Matmul => [50, 100, 200, 500, 1000].map(Size::Square).to_vec(),
        Workload::Fft => [
            (1024, 32),
            (1024, 128),
            (1024, 512),
            (1024, 1024),
            (2048, 2048),
        ]
        .map(|(len, batch)| Size::Signal { len, batch })
        .to_vec(),
        Workload::Qsort => [500, 1000, 5000, 10_000, 100_000, 1_000_000]
            .map(Size::Length)
            .to_vec(),
        Workload::Hamming => [10_000, 15_000, 20_000, 50_000, 100_000]
            .map(Size::Words)
            .to_vec(),
    }
}

/// Default backend sweep: sequential baseline, worker pool, and the worker
/// pool behind the staged copy boundary.
pub fn default_backends() -> Vec<ExecPlan> {
    vec![
        ExecPlan::sequential(),
        ExecPlan::parallel(),
        ExecPlan::staged(ExecPlan::parallel()),
    ]
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub workload: Workload,
    pub sizes: Vec<Size>,
    pub backends: Vec<ExecPlan>,
    pub reps: usize,
    pub warmup: usize,
    pub seed: u64,
    /// BSC crossover probability; only meaningful for the hamming workload.
    pub bsc_p: f64,
}

impl BenchConfig {
    pub fn new(workload: Workload) -> Self {
        BenchConfig {
            workload,
            sizes: default_sizes(workload),
            backends: default_backends(),
            reps: 30,
            warmup: 10,
            seed: 42,
            bsc_p: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::Config("at least one size is required".into()));
        }
        if self.backends.is_empty() {
            return Err(Error::Config("at least one backend is required".into()));
        }
        let kind_ok = |s: &Size| {
            matches!(
                (self.workload, s),
                (Workload::Matmul, Size::Square(_))
                    | (Workload::Fft, Size::Signal { .. })
                    | (Workload::Qsort, Size::Length(_))
                    | (Workload::Hamming, Size::Words(_))
            )
        };
        if let Some(bad) = self.sizes.iter().find(|s| !kind_ok(s)) {
            return Err(Error::Config(format!(
                "size {} does not fit workload {}",
                bad.label(),
                self.workload
            )));
        }
        if !(0.0..=0.5).contains(&self.bsc_p) {
            return Err(Error::Config(format!(
                "crossover probability {} outside [0, 0.5]",
                self.bsc_p
            )));
        }
        Ok(())
    }
}

/// Pre-generated operands for one benchmark cell.
#[derive(Clone, Debug)]
pub enum WorkloadInput {
    Matmul(DenseMatrix, DenseMatrix),
    Fft(SignalBuffer),
    Qsort(SortBuffer),
    Hamming(Vec<InfoWord>),
}

/// Deterministic inputs for (workload, size, seed): floats uniform in [0, 1),
/// info bits by fair coin, all from stream 0 of the suite generator.
pub fn gen_inputs(workload: Workload, size: &Size, seed: u64) -> Result<WorkloadInput> {
    match (workload, size) {
        (Workload::Matmul, Size::Square(n)) => {
            let mut r = rng::from_seed(seed);
            let mut fill =
                |n: usize| -> Vec<f32> { (0..n).map(|_| rng::unit_f32(&mut r)).collect() };
            let a = DenseMatrix::new(*n, *n, fill(n * n))?;
            let b = DenseMatrix::new(*n, *n, fill(n * n))?;
            Ok(WorkloadInput::Matmul(a, b))
        }
        (Workload::Fft, Size::Signal { len, batch }) => {
            let mut r = rng::from_seed(seed);
            let re = (0..len * batch).map(|_| rng::unit_f32(&mut r)).collect();
            // Real-valued inputs, matching the random real matrices the
            // reference tables were produced from.
            let im = vec![0.0; len * batch];
            Ok(WorkloadInput::Fft(SignalBuffer::new(*len, *batch, re, im)?))
        }
        (Workload::Qsort, Size::Length(n)) => {
            let mut r = rng::from_seed(seed);
            let data = (0..*n).map(|_| rng::unit_f32(&mut r)).collect();
            Ok(WorkloadInput::Qsort(SortBuffer::new(data)))
        }
        (Workload::Hamming, Size::Words(n)) => {
            if *n == 0 {
                return Err(Error::Config("word count must be positive".into()));
            }
            Ok(WorkloadInput::Hamming(hamming::gen_info_words(*n, seed)))
        }
        (w, s) => Err(Error::Config(format!(
            "size {} does not fit workload {w}",
            s.label()
        ))),
    }
}

/// Timing samples for one (workload, size, backend) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub workload: String,
    pub size: String,
    pub backend: String,
    /// Per-repetition kernel seconds (staging excluded).
    pub samples_s: Vec<f64>,
    /// Per-component medians across repetitions; staged plans only.
    pub staging: Option<StagingTimes>,
    pub median_s: f64,
    pub min_s: f64,
}

pub(crate) fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty());
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("timing samples are finite"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn min_sample(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Warm up, then time `reps` kernel runs. Staged plans run behind the copy
/// boundary and additionally aggregate per-phase staging medians.
fn time_kernel<I, O, F>(
    label: &str,
    size_label: &str,
    input: &I,
    plan: &ExecPlan,
    cfg: &BenchConfig,
    kernel: F,
) -> Result<Measurement>
where
    I: Stage,
    O: Stage,
    F: Fn(&I, &ExecPlan) -> Result<O>,
{
    let mut samples_s = Vec::with_capacity(cfg.reps);
    let staging = if plan.is_staged() {
        let mut ingress = Vec::with_capacity(cfg.reps);
        let mut egress = Vec::with_capacity(cfg.reps);
        for _ in 0..cfg.warmup {
            staged_execute(input, plan, &kernel)?;
        }
        for _ in 0..cfg.reps {
            let (_, times) = staged_execute(input, plan, &kernel)?;
            samples_s.push(times.kernel_s);
            ingress.push(times.ingress_s);
            egress.push(times.egress_s);
        }
        Some(StagingTimes::new(
            median(&ingress),
            median(&samples_s),
            median(&egress),
        ))
    } else {
        for _ in 0..cfg.warmup {
            kernel(input, plan)?;
        }
        for _ in 0..cfg.reps {
            let t = Instant::now();
            kernel(input, plan)?;
            samples_s.push(t.elapsed().as_secs_f64());
        }
        None
    };
    Ok(Measurement {
        workload: label.to_string(),
        size: size_label.to_string(),
        backend: plan.label().to_string(),
        median_s: median(&samples_s),
        min_s: min_sample(&samples_s),
        samples_s,
        staging,
    })
}

/// Measure one cell. Returns one Measurement, except for the hamming
/// pipeline which yields two: encode+channel and decode, timed over the same
/// transmitted data.
pub fn measure(
    input: &WorkloadInput,
    size: &Size,
    plan: &ExecPlan,
    cfg: &BenchConfig,
) -> Result<Vec<Measurement>> {
    let size_label = size.label();
    match input {
        WorkloadInput::Matmul(a, b) => {
            let pair = (a.clone(), b.clone());
            let m = time_kernel(
                "matmul",
                &size_label,
                &pair,
                plan,
                cfg,
                |(a, b): &(DenseMatrix, DenseMatrix), p| matmul(a, b, p),
            )?;
            Ok(vec![m])
        }
        WorkloadInput::Fft(s) => {
            let m = time_kernel("fft", &size_label, s, plan, cfg, |s: &SignalBuffer, p| {
                fft_batch(s, Direction::Forward, p)
            })?;
            Ok(vec![m])
        }
        WorkloadInput::Qsort(v) => {
            let m = time_kernel("qsort", &size_label, v, plan, cfg, |v: &SortBuffer, p| {
                Ok(quicksort(v, p))
            })?;
            Ok(vec![m])
        }
        WorkloadInput::Hamming(words) => {
            let channel = ChannelConfig::new(cfg.bsc_p, cfg.seed)?;
            let encode_and_send = move |w: &Vec<InfoWord>, p: &ExecPlan| -> Result<Vec<Codeword>> {
                let encoded = hamming::encode_block(w, p);
                hamming::bsc_transmit(&encoded, &channel, p)
            };
            let words = words.clone();
            let enc = time_kernel(
                "hamming-encode",
                &size_label,
                &words,
                plan,
                cfg,
                encode_and_send,
            )?;
            // Decode is timed over the transmitted data of this same run;
            // the channel is deterministic, so every rep above produced
            // exactly this codeword sequence.
            let sent = encode_and_send(&words, &plan.inner())?;
            let dec = time_kernel(
                "hamming-decode",
                &size_label,
                &sent,
                plan,
                cfg,
                |s: &Vec<Codeword>, p| Ok(hamming::decode_block(s, p)),
            )?;
            Ok(vec![enc, dec])
        }
    }
}

/// Run parameters echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub workload: String,
    pub seed: u64,
    pub reps: usize,
    pub warmup: usize,
    pub bsc_p: Option<f64>,
    pub backends: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub hardware: HardwareReport,
    pub run: RunMeta,
    pub measurements: Vec<Measurement>,
}

/// The full sweep: one measurement per (size, backend), two for hamming.
/// The first failing cell aborts with its (workload, size, backend) context.
pub fn run_suite(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let mut measurements = Vec::new();
    for size in &cfg.sizes {
        let input = gen_inputs(cfg.workload, size, cfg.seed)?;
        for plan in &cfg.backends {
            let cell = measure(&input, size, plan, cfg)
                .map_err(|e| e.in_cell(&cfg.workload.to_string(), &size.label(), plan.label()))?;
            measurements.extend(cell);
        }
    }
    Ok(BenchReport {
        hardware: hardware_report().clone(),
        run: RunMeta {
            workload: cfg.workload.to_string(),
            seed: cfg.seed,
            reps: cfg.reps,
            warmup: cfg.warmup,
            bsc_p: (cfg.workload == Workload::Hamming).then_some(cfg.bsc_p),
            backends: cfg.backends.iter().map(|p| p.label().to_string()).collect(),
        },
        measurements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_and_even_match_naive() {
        let mut r = rng::from_seed(8);
        for n in 1..=20usize {
            let xs: Vec<f64> = (0..n).map(|_| rng::unit_f64(&mut r)).collect();
            let mut sorted = xs.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let naive = if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            };
            assert_eq!(median(&xs), naive, "n = {n}");
        }
    }

    #[test]
    fn gen_inputs_is_deterministic() {
        let size = Size::Square(50);
        let a = gen_inputs(Workload::Matmul, &size, 1).unwrap();
        let b = gen_inputs(Workload::Matmul, &size, 1).unwrap();
        match (a, b) {
            (WorkloadInput::Matmul(a1, a2), WorkloadInput::Matmul(b1, b2)) => {
                assert_eq!(a1, b1);
                assert_eq!(a2, b2);
            }
            _ => panic!("wrong input kind"),
        }
    }

    #[test]
    fn gen_inputs_seeds_differ() {
        let size = Size::Square(200);
        let a = gen_inputs(Workload::Matmul, &size, 1).unwrap();
        let b = gen_inputs(Workload::Matmul, &size, 2).unwrap();
        match (a, b) {
            (WorkloadInput::Matmul(a1, _), WorkloadInput::Matmul(b1, _)) => {
                assert_ne!(&a1.data()[..100], &b1.data()[..100]);
            }
            _ => panic!("wrong input kind"),
        }
    }

    #[test]
    fn gen_inputs_fft_contract() {
        let size = Size::Signal {
            len: 1024,
            batch: 32,
        };
        match gen_inputs(Workload::Fft, &size, 1).unwrap() {
            WorkloadInput::Fft(buf) => {
                assert_eq!(buf.len(), 1024);
                assert_eq!(buf.batch(), 32);
                assert!(buf.re().iter().all(|&x| (0.0..1.0).contains(&x)));
                assert!(buf.im().iter().all(|&x| (0.0..1.0).contains(&x)));
            }
            _ => panic!("wrong input kind"),
        }
    }

    #[test]
    fn size_parsing() {
        assert_eq!(
            Size::parse(Workload::Matmul, "50").unwrap(),
            Size::Square(50)
        );
        assert_eq!(
            Size::parse(Workload::Fft, "1024x32").unwrap(),
            Size::Signal {
                len: 1024,
                batch: 32
            }
        );
        let err = Size::parse(Workload::Fft, "1023x32").unwrap_err();
        assert!(err.to_string().contains("power of two"), "{err}");
        assert!(Size::parse(Workload::Matmul, "0").is_err());
        assert!(Size::parse(Workload::Hamming, "abc").is_err());
        assert_eq!(Size::parse(Workload::Qsort, "500").unwrap().label(), "500");
        assert_eq!(Size::Square(50).label(), "50x50");
    }

    #[test]
    fn measure_sample_counts_and_order_statistics() {
        let mut cfg = BenchConfig::new(Workload::Qsort);
        cfg.reps = 5;
        cfg.warmup = 1;
        let size = Size::Length(100);
        let input = gen_inputs(Workload::Qsort, &size, 3).unwrap();
        let ms = measure(&input, &size, &ExecPlan::sequential(), &cfg).unwrap();
        assert_eq!(ms.len(), 1);
        let m = &ms[0];
        assert_eq!(m.samples_s.len(), 5);
        let mut sorted = m.samples_s.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(m.median_s, sorted[2]);
        assert!(m.min_s <= m.median_s);
    }

    #[test]
    fn sleep_stub_lands_in_sanity_band() {
        let mut cfg = BenchConfig::new(Workload::Qsort);
        cfg.reps = 3;
        cfg.warmup = 0;
        let input: Vec<f32> = vec![];
        let m = time_kernel(
            "stub",
            "0",
            &input,
            &ExecPlan::sequential(),
            &cfg,
            |v: &Vec<f32>, _| {
                std::thread::sleep(std::time::Duration::from_millis(10));
                Ok(v.clone())
            },
        )
        .unwrap();
        assert!(
            (0.009..=0.030).contains(&m.median_s),
            "median {} s",
            m.median_s
        );
    }

    #[test]
    fn suite_cardinality_and_hamming_phases() {
        let mut cfg = BenchConfig::new(Workload::Matmul);
        cfg.sizes = vec![Size::Square(50), Size::Square(100)];
        cfg.backends = vec![ExecPlan::sequential(), ExecPlan::parallel()];
        cfg.reps = 2;
        cfg.warmup = 1;
        let report = run_suite(&cfg).unwrap();
        assert_eq!(report.measurements.len(), 4);

        let mut cfg = BenchConfig::new(Workload::Hamming);
        cfg.sizes = vec![Size::Words(1000)];
        cfg.backends = vec![ExecPlan::sequential()];
        cfg.reps = 2;
        cfg.warmup = 1;
        let report = run_suite(&cfg).unwrap();
        let labels: Vec<&str> = report
            .measurements
            .iter()
            .map(|m| m.workload.as_str())
            .collect();
        assert_eq!(labels, vec!["hamming-encode", "hamming-decode"]);
    }

    #[test]
    fn staged_measurement_carries_staging_medians() {
        let mut cfg = BenchConfig::new(Workload::Matmul);
        cfg.reps = 3;
        cfg.warmup = 1;
        let size = Size::Square(32);
        let input = gen_inputs(Workload::Matmul, &size, 7).unwrap();
        let plan = ExecPlan::staged(ExecPlan::sequential());
        let m = &measure(&input, &size, &plan, &cfg).unwrap()[0];
        let st = m.staging.as_ref().expect("staged plan records staging");
        assert_eq!(st.kernel_s, m.median_s);
        assert_eq!(st.total_s, st.ingress_s + st.kernel_s + st.egress_s);
        assert_eq!(m.backend, "staged");
    }

    #[test]
    fn config_validation() {
        let mut cfg = BenchConfig::new(Workload::Matmul);
        cfg.reps = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = BenchConfig::new(Workload::Matmul);
        cfg.sizes = vec![Size::Length(5)];
        assert!(cfg.validate().is_err());
        let mut cfg = BenchConfig::new(Workload::Hamming);
        cfg.bsc_p = 0.7;
        assert!(cfg.validate().is_err());
    }
}
