//! Independent reference implementations and the named verification checks.
//!
//! Every kernel is validated against a deliberately simple oracle before any
//! timing claim is made. Oracles run sequentially, accumulate in f64 so the
//! kernels' single-precision error is measured against a near-exact baseline,
//! and share no computation helpers with the kernels they check.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exec::ExecPlan;
use crate::hamming::{self, ChannelConfig, Codeword, InfoWord};
use crate::harness::Workload;
use crate::kernels::{
    fft_batch, matmul, quicksort, DenseMatrix, Direction, SignalBuffer, SortBuffer,
};
use crate::rng;

/// Outcome of one named verification check.
#[derive(Clone, Debug)]
pub struct OracleCheck {
    pub name: &'static str,
    pub workload: Workload,
    pub passed: bool,
    pub detail: String,
}

impl OracleCheck {
    fn pass(name: &'static str, workload: Workload, detail: String) -> Self {
        OracleCheck {
            name,
            workload,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, workload: Workload, detail: String) -> Self {
        OracleCheck {
            name,
            workload,
            passed: false,
            detail,
        }
    }
}

/// Naive triple loop, f64 accumulation, rounded to f32 at the end.
pub fn reference_matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols() != b.rows() {
        return Err(Error::ShapeMismatch {
            a_rows: a.rows(),
            a_cols: a.cols(),
            b_rows: b.rows(),
            b_cols: b.cols(),
        });
    }
    let mut data = vec![0.0f32; a.rows() * b.cols()];
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut acc = 0.0f64;
            for k in 0..a.cols() {
                acc += a.at(i, k) as f64 * b.at(k, j) as f64;
            }
            data[i * b.cols() + j] = acc as f32;
        }
    }
    DenseMatrix::new(a.rows(), b.cols(), data)
}

/// Direct O(N²) DFT in f64, same normalization convention as the kernel:
/// forward unnormalized, inverse carries 1/N.
pub fn naive_dft(re: &[f64], im: &[f64], dir: Direction) -> (Vec<f64>, Vec<f64>) {
    let n = re.len();
    let sign = match dir {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let scale = match dir {
        Direction::Forward => 1.0,
        Direction::Inverse => 1.0 / n as f64,
    };
    let mut out_re = vec![0.0; n];
    let mut out_im = vec![0.0; n];
    for (k, (or, oi)) in out_re.iter_mut().zip(out_im.iter_mut()).enumerate() {
        let mut acc_re = 0.0;
        let mut acc_im = 0.0;
        for t in 0..n {
            let angle = sign * 2.0 * std::f64::consts::PI * (t * k % n) as f64 / n as f64;
            let (s, c) = angle.sin_cos();
            acc_re += re[t] * c - im[t] * s;
            acc_im += re[t] * s + im[t] * c;
        }
        *or = acc_re * scale;
        *oi = acc_im * scale;
    }
    (out_re, out_im)
}

/// Known-correct merge sort.
pub fn reference_sort(v: &[f32]) -> Vec<f32> {
    if v.len() <= 1 {
        return v.to_vec();
    }
    let mid = v.len() / 2;
    let left = reference_sort(&v[..mid]);
    let right = reference_sort(&v[mid..]);
    let mut out = Vec::with_capacity(v.len());
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        if left[i] <= right[j] {
            out.push(left[i]);
            i += 1;
        } else {
            out.push(right[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&left[i..]);
    out.extend_from_slice(&right[j..]);
    out
}

/// Multiset equality by bit pattern, independent of any sort.
pub fn same_multiset(a: &[f32], b: &[f32]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut counts: HashMap<u32, i64> = HashMap::new();
    for x in a {
        *counts.entry(x.to_bits()).or_insert(0) += 1;
    }
    for x in b {
        *counts.entry(x.to_bits()).or_insert(0) -= 1;
    }
    counts.values().all(|&c| c == 0)
}

/// Probability of an uncorrectable block: two or more bit errors among 7,
/// i.e. 1 − (1−p)⁷ − 7p(1−p)⁶.
pub fn analytic_block_error(p: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::Config(format!(
            "crossover probability {p} outside [0, 0.5]"
        )));
    }
    Ok(1.0 - (1.0 - p).powi(7) - 7.0 * p * (1.0 - p).powi(6))
}

fn all_info_words() -> Vec<InfoWord> {
    (0..16u8)
        .map(|v| InfoWord([(v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1]))
        .collect()
}

/// Independent parity check: syndrome bit s is the XOR of the received bits
/// whose 1-indexed position has bit s set: the parity-check matrix written
/// out positionally, with no reference to the codec's equations.
fn oracle_syndrome(c: &Codeword) -> u8 {
    let mut s = 0u8;
    for check in 0..3u8 {
        let mut parity = 0u8;
        for (pos0, &bit) in c.0.iter().enumerate() {
            if ((pos0 + 1) >> check) & 1 == 1 {
                parity ^= bit;
            }
        }
        s |= parity << check;
    }
    s
}

fn hamming_distance(a: &Codeword, b: &Codeword) -> usize {
    a.0.iter().zip(&b.0).filter(|(x, y)| x != y).count()
}

fn codebook_check_with(encode: &dyn Fn(&InfoWord) -> Codeword) -> OracleCheck {
    let name = "hamming codebook";
    for w in all_info_words() {
        let c = encode(&w);
        let s = oracle_syndrome(&c);
        if s != 0 {
            return OracleCheck::fail(
                name,
                Workload::Hamming,
                format!("info word {:?} encodes to {:?} with syndrome {s}", w.0, c.0),
            );
        }
    }
    OracleCheck::pass(name, Workload::Hamming, "16/16 codewords valid".into())
}

fn min_distance_check_with(encode: &dyn Fn(&InfoWord) -> Codeword) -> OracleCheck {
    let name = "hamming min distance";
    let codebook: Vec<Codeword> = all_info_words().iter().map(encode).collect();
    let mut min = usize::MAX;
    let mut pairs = 0;
    for i in 0..codebook.len() {
        for j in i + 1..codebook.len() {
            pairs += 1;
            min = min.min(hamming_distance(&codebook[i], &codebook[j]));
        }
    }
    if min == 3 {
        OracleCheck::pass(
            name,
            Workload::Hamming,
            format!("minimum pairwise distance 3 over {pairs} pairs"),
        )
    } else {
        OracleCheck::fail(
            name,
            Workload::Hamming,
            format!("minimum pairwise distance {min}, expected 3"),
        )
    }
}

fn correction_check_with(
    encode: &dyn Fn(&InfoWord) -> Codeword,
    decode: &dyn Fn(&Codeword) -> (InfoWord, bool),
) -> OracleCheck {
    let name = "hamming correction table";
    let mut recovered = 0;
    for w in all_info_words() {
        let clean = encode(&w);
        // Error pattern 0 is "no flip"; patterns 1..=7 flip that position.
        for pattern in 0..8usize {
            let mut damaged = clean;
            if pattern > 0 {
                damaged.0[pattern - 1] ^= 1;
            }
            let (got, _) = decode(&damaged);
            if got == w {
                recovered += 1;
            } else {
                return OracleCheck::fail(
                    name,
                    Workload::Hamming,
                    format!(
                        "info word {:?}, error pattern {pattern}: decoded {:?}",
                        w.0, got.0
                    ),
                );
            }
        }
    }
    OracleCheck::pass(
        name,
        Workload::Hamming,
        format!("{recovered}/128 cases recovered"),
    )
}

/// The three exhaustive codec checks: codebook validity, minimum distance,
/// and the full 128-case correction table.
pub fn hamming_exhaustive_check() -> Vec<OracleCheck> {
    vec![
        codebook_check_with(&hamming::encode),
        min_distance_check_with(&hamming::encode),
        correction_check_with(&hamming::encode, &hamming::decode),
    ]
}

fn block_error_check() -> OracleCheck {
    let name = "hamming block error vs analytic";
    let (n, p, seed) = (100_000usize, 0.01, 42u64);
    let cfg = ChannelConfig::new(p, seed).expect("valid channel config");
    let stats = match hamming::run_pipeline(n, &cfg, &ExecPlan::sequential()) {
        Ok(s) => s,
        Err(e) => return OracleCheck::fail(name, Workload::Hamming, e.to_string()),
    };
    let expected = analytic_block_error(p).expect("p in range");
    let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
    let delta = (stats.block_error_rate - expected).abs();
    let detail = format!(
        "rate {:.6} vs analytic {:.6}, |delta| {:.6} with 3 sigma = {:.6}",
        stats.block_error_rate,
        expected,
        delta,
        3.0 * sigma
    );
    if delta <= 3.0 * sigma {
        OracleCheck::pass(name, Workload::Hamming, detail)
    } else {
        OracleCheck::fail(name, Workload::Hamming, detail)
    }
}

fn random_matrix(n: usize, rng: &mut rng::SuiteRng) -> DenseMatrix {
    let data = (0..n * n).map(|_| rng::unit_f32(rng)).collect();
    DenseMatrix::new(n, n, data).expect("square matrix")
}

fn matmul_identity_check() -> OracleCheck {
    let name = "matmul identity";
    let plan = ExecPlan::sequential();
    let mut r = rng::from_seed(101);
    for n in [1usize, 7, 64, 200] {
        let a = random_matrix(n, &mut r);
        let id = DenseMatrix::identity(n).expect("identity");
        let prod = match matmul(&a, &id, &plan) {
            Ok(p) => p,
            Err(e) => return OracleCheck::fail(name, Workload::Matmul, e.to_string()),
        };
        if prod.data() != a.data() {
            return OracleCheck::fail(
                name,
                Workload::Matmul,
                format!("A x I differs from A at size {n}"),
            );
        }
    }
    OracleCheck::pass(
        name,
        Workload::Matmul,
        "A x I bit-exact up to 200x200".into(),
    )
}

fn matmul_reference_check() -> OracleCheck {
    let name = "matmul vs reference";
    let plan = ExecPlan::sequential();
    let mut worst = 0.0f64;
    for (i, n) in [50usize, 100, 200].into_iter().enumerate() {
        let mut r = rng::from_seed(200 + i as u64);
        let a = random_matrix(n, &mut r);
        let b = random_matrix(n, &mut r);
        let fast = match matmul(&a, &b, &plan) {
            Ok(m) => m,
            Err(e) => return OracleCheck::fail(name, Workload::Matmul, e.to_string()),
        };
        let slow = match reference_matmul(&a, &b) {
            Ok(m) => m,
            Err(e) => return OracleCheck::fail(name, Workload::Matmul, e.to_string()),
        };
        for (x, y) in fast.data().iter().zip(slow.data()) {
            let rel = (*x as f64 - *y as f64).abs() / ((*y as f64).abs() + 1e-30);
            worst = worst.max(rel);
            if rel > 1e-3 {
                return OracleCheck::fail(
                    name,
                    Workload::Matmul,
                    format!("size {n}: relative error {rel:.2e} exceeds 1e-3"),
                );
            }
        }
    }
    OracleCheck::pass(
        name,
        Workload::Matmul,
        format!("sizes 50/100/200 agree, worst relative error {worst:.2e}"),
    )
}

/// Relative RMS distance between a kernel buffer column and an f64 oracle column.
fn relative_rms(kr: &[f32], ki: &[f32], or: &[f64], oi: &[f64]) -> f64 {
    let mut err = 0.0;
    let mut norm = 0.0;
    for t in 0..kr.len() {
        let dr = kr[t] as f64 - or[t];
        let di = ki[t] as f64 - oi[t];
        err += dr * dr + di * di;
        norm += or[t] * or[t] + oi[t] * oi[t];
    }
    (err / (norm + 1e-30)).sqrt()
}

fn fft_reference_check() -> OracleCheck {
    let name = "fft vs naive dft";
    let plan = ExecPlan::sequential();
    let mut worst = 0.0f64;
    for n in [8usize, 64, 1024] {
        let mut r = rng::from_seed(300 + n as u64);
        let re: Vec<f32> = (0..n).map(|_| rng::unit_f32(&mut r)).collect();
        let im: Vec<f32> = (0..n).map(|_| rng::unit_f32(&mut r)).collect();
        let buf = SignalBuffer::new(n, 1, re.clone(), im.clone()).expect("buffer");
        for dir in [Direction::Forward, Direction::Inverse] {
            let out = match fft_batch(&buf, dir, &plan) {
                Ok(o) => o,
                Err(e) => return OracleCheck::fail(name, Workload::Fft, e.to_string()),
            };
            let re64: Vec<f64> = re.iter().map(|&x| x as f64).collect();
            let im64: Vec<f64> = im.iter().map(|&x| x as f64).collect();
            let (or, oi) = naive_dft(&re64, &im64, dir);
            let rms = relative_rms(out.re(), out.im(), &or, &oi);
            worst = worst.max(rms);
            if rms > 1e-3 {
                return OracleCheck::fail(
                    name,
                    Workload::Fft,
                    format!("N={n} {dir:?}: relative RMS {rms:.2e} exceeds 1e-3"),
                );
            }
        }
    }
    OracleCheck::pass(
        name,
        Workload::Fft,
        format!("N in 8/64/1024 both directions, worst relative RMS {worst:.2e}"),
    )
}

fn fft_roundtrip_check() -> OracleCheck {
    let name = "fft roundtrip";
    let plan = ExecPlan::sequential();
    let mut r = rng::from_seed(400);
    let (n, m) = (1024usize, 32usize);
    let re: Vec<f32> = (0..n * m).map(|_| rng::unit_f32(&mut r)).collect();
    let im = vec![0.0f32; n * m];
    let buf = SignalBuffer::new(n, m, re, im).expect("buffer");
    let back = match crate::kernels::ifft_roundtrip(&buf, &plan) {
        Ok(b) => b,
        Err(e) => return OracleCheck::fail(name, Workload::Fft, e.to_string()),
    };
    let or: Vec<f64> = buf.re().iter().map(|&x| x as f64).collect();
    let oi: Vec<f64> = buf.im().iter().map(|&x| x as f64).collect();
    let rms = relative_rms(back.re(), back.im(), &or, &oi);
    let detail = format!("1024x32 inverse(forward(x)) relative RMS {rms:.2e}");
    if rms <= 1e-3 {
        OracleCheck::pass(name, Workload::Fft, detail)
    } else {
        OracleCheck::fail(name, Workload::Fft, detail)
    }
}

fn fft_parseval_check() -> OracleCheck {
    let name = "fft parseval";
    let plan = ExecPlan::sequential();
    let mut worst = 0.0f64;
    for n in [8usize, 64, 1024] {
        let mut r = rng::from_seed(500 + n as u64);
        let re: Vec<f32> = (0..n).map(|_| rng::unit_f32(&mut r)).collect();
        let im: Vec<f32> = (0..n).map(|_| rng::unit_f32(&mut r)).collect();
        let buf = SignalBuffer::new(n, 1, re, im).expect("buffer");
        let out = match fft_batch(&buf, Direction::Forward, &plan) {
            Ok(o) => o,
            Err(e) => return OracleCheck::fail(name, Workload::Fft, e.to_string()),
        };
        let time_energy: f64 = buf
            .re()
            .iter()
            .zip(buf.im())
            .map(|(&a, &b)| (a as f64).powi(2) + (b as f64).powi(2))
            .sum();
        let freq_energy: f64 = out
            .re()
            .iter()
            .zip(out.im())
            .map(|(&a, &b)| (a as f64).powi(2) + (b as f64).powi(2))
            .sum::<f64>()
            / n as f64;
        let rel = (time_energy - freq_energy).abs() / time_energy;
        worst = worst.max(rel);
        if rel > 1e-3 {
            return OracleCheck::fail(
                name,
                Workload::Fft,
                format!("N={n}: energy mismatch {rel:.2e} exceeds 1e-3"),
            );
        }
    }
    OracleCheck::pass(
        name,
        Workload::Fft,
        format!("N in 8/64/1024, worst energy mismatch {worst:.2e}"),
    )
}

fn quicksort_reference_check() -> OracleCheck {
    let name = "quicksort vs reference";
    let plan = ExecPlan::sequential();
    let lengths = [0usize, 1, 2, 500, 10_000];
    let per_length = 200; // 5 lengths x 200 seeds = 1000 inputs
    let mut checked = 0;
    for (li, &len) in lengths.iter().enumerate() {
        for s in 0..per_length {
            let seed = (li * per_length + s) as u64;
            let mut r = rng::from_seed(seed);
            let data: Vec<f32> = (0..len).map(|_| rng::unit_f32(&mut r)).collect();
            let sorted = quicksort(&SortBuffer::new(data.clone()), &plan);
            let expect = reference_sort(&data);
            if sorted.data != expect {
                return OracleCheck::fail(
                    name,
                    Workload::Qsort,
                    format!("length {len}, seed {seed}: output differs from reference"),
                );
            }
            if !same_multiset(&data, &sorted.data) {
                return OracleCheck::fail(
                    name,
                    Workload::Qsort,
                    format!("length {len}, seed {seed}: output is not a permutation"),
                );
            }
            checked += 1;
        }
    }
    OracleCheck::pass(
        name,
        Workload::Qsort,
        format!("{checked} seeded inputs match exactly"),
    )
}

/// Run every verification check, optionally restricted to one workload.
pub fn run_all_checks(filter: Option<Workload>) -> Vec<OracleCheck> {
    let mut checks = Vec::new();
    let want = |w: Workload| filter.is_none() || filter == Some(w);
    if want(Workload::Matmul) {
        checks.push(matmul_identity_check());
        checks.push(matmul_reference_check());
    }
    if want(Workload::Fft) {
        checks.push(fft_reference_check());
        checks.push(fft_roundtrip_check());
        checks.push(fft_parseval_check());
    }
    if want(Workload::Qsort) {
        checks.push(quicksort_reference_check());
    }
    if want(Workload::Hamming) {
        checks.extend(hamming_exhaustive_check());
        checks.push(block_error_check());
    }
    checks
}
