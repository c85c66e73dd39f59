//! Batched iterative radix-2 decimation-in-time FFT.
//!
//! A [`SignalBuffer`] holds M independent complex columns of power-of-two
//! length N in column-major split re/im storage. Columns transform
//! independently, so the parallel backend partitions the column range; the
//! butterfly schedule within a column is fixed, which keeps backends
//! bit-identical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{copy_arena, par_map, ExecPlan, Stage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Batch of complex columns: column m occupies `[m*len, (m+1)*len)` of the
/// flat re/im arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalBuffer {
    len: usize,
    batch: usize,
    re: Vec<f32>,
    im: Vec<f32>,
}

impl SignalBuffer {
    pub fn new(len: usize, batch: usize, re: Vec<f32>, im: Vec<f32>) -> Result<Self> {
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { len });
        }
        if batch == 0 {
            return Err(Error::Config("batch count must be positive".into()));
        }
        if re.len() != len * batch || im.len() != len * batch {
            return Err(Error::Config(format!(
                "re/im lengths {}/{} do not match {len}x{batch}",
                re.len(),
                im.len()
            )));
        }
        Ok(SignalBuffer { len, batch, re, im })
    }

    pub fn zeros(len: usize, batch: usize) -> Result<Self> {
        Self::new(len, batch, vec![0.0; len * batch], vec![0.0; len * batch])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // len and batch are always positive
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn re(&self) -> &[f32] {
        &self.re
    }

    pub fn im(&self) -> &[f32] {
        &self.im
    }

    pub fn column(&self, m: usize) -> (&[f32], &[f32]) {
        let span = m * self.len..(m + 1) * self.len;
        (&self.re[span.clone()], &self.im[span])
    }
}

impl Stage for SignalBuffer {
    fn stage(&self) -> Result<Self> {
        Ok(SignalBuffer {
            len: self.len,
            batch: self.batch,
            re: copy_arena(&self.re)?,
            im: copy_arena(&self.im)?,
        })
    }
}

/// Twiddle table w[k] = e^{∓2πik/N} for k in 0..N/2, f64 trig cast to f32.
fn twiddles(n: usize, dir: Direction) -> Vec<(f32, f32)> {
    let sign = match dir {
        Direction::Forward => -1.0f64,
        Direction::Inverse => 1.0f64,
    };
    (0..n / 2)
        .map(|k| {
            let angle = sign * 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            (angle.cos() as f32, angle.sin() as f32)
        })
        .collect()
}

fn bit_reverse_permute(re: &mut [f32], im: &mut [f32]) {
    let n = re.len();
    let shift = usize::BITS - n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> shift;
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
}

fn transform_column(re: &mut [f32], im: &mut [f32], tw: &[(f32, f32)], dir: Direction) {
    let n = re.len();
    if n == 1 {
        return;
    }
    bit_reverse_permute(re, im);
    let mut span = 2;
    while span <= n {
        let half = span / 2;
        let stride = n / span;
        for base in (0..n).step_by(span) {
            for j in 0..half {
                let (wr, wi) = tw[j * stride];
                let i0 = base + j;
                let i1 = i0 + half;
                let (xr, xi) = (re[i1], im[i1]);
                let tr = xr * wr - xi * wi;
                let ti = xr * wi + xi * wr;
                let (ur, ui) = (re[i0], im[i0]);
                re[i1] = ur - tr;
                im[i1] = ui - ti;
                re[i0] = ur + tr;
                im[i0] = ui + ti;
            }
        }
        span *= 2;
    }
    if dir == Direction::Inverse {
        // n is a power of two, so scaling by 1/n is exact.
        let inv = 1.0 / n as f32;
        for x in re.iter_mut() {
            *x *= inv;
        }
        for x in im.iter_mut() {
            *x *= inv;
        }
    }
}

/// Transform every column of `s` independently. Forward is unnormalized
/// (X[k] = Σ x[n]·e^{-2πink/N}); inverse carries the 1/N factor.
pub fn fft_batch(s: &SignalBuffer, dir: Direction, plan: &ExecPlan) -> Result<SignalBuffer> {
    if !s.len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { len: s.len });
    }
    let tw = twiddles(s.len, dir);
    let n = s.len;
    let cols = par_map(s.batch, plan, |m| {
        let (cre, cim) = s.column(m);
        let mut re = cre.to_vec();
        let mut im = cim.to_vec();
        transform_column(&mut re, &mut im, &tw, dir);
        (re, im)
    });
    let mut re = Vec::with_capacity(n * s.batch);
    let mut im = Vec::with_capacity(n * s.batch);
    for (cre, cim) in cols {
        re.extend_from_slice(&cre);
        im.extend_from_slice(&cim);
    }
    SignalBuffer::new(n, s.batch, re, im)
}

/// inverse(forward(s)), the self-inverse check used by verification.
pub fn ifft_roundtrip(s: &SignalBuffer, plan: &ExecPlan) -> Result<SignalBuffer> {
    let spectrum = fft_batch(s, Direction::Forward, plan)?;
    fft_batch(&spectrum, Direction::Inverse, plan)
}
