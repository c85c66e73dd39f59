//! (7,4) Hamming codec, binary symmetric channel, and the end-to-end
//! encode / transmit / decode pipeline.
//!
//! Codeword layout is `[p1, p2, d1, p4, d2, d3, d4]` (parity bits at
//! positions 1, 2, 4), so the syndrome value is the 1-indexed position of a
//! single flipped bit. Bits are stored one byte per bit in working buffers.
//!
//! The channel splits the codeword sequence into fixed-size chunks of
//! [`CHANNEL_CHUNK_WORDS`] and derives one ChaCha8 stream per chunk from
//! `(seed, 1 + chunk_index)`. Chunk boundaries do not depend on the plan, so
//! sequential and parallel transmissions flip exactly the same bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{par_map, ExecPlan, Stage};
use crate::rng;

/// Codewords per channel RNG stream; fixed so noise is plan-independent.
pub const CHANNEL_CHUNK_WORDS: usize = 1024;

/// Four information bits d1..d4, one byte per bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoWord(pub [u8; 4]);

/// Seven code bits `[p1, p2, d1, p4, d2, d3, d4]`, one byte per bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codeword(pub [u8; 7]);

/// Binary symmetric channel parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Crossover probability, in [0, 0.5].
    pub crossover_p: f64,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn new(crossover_p: f64, seed: u64) -> Result<Self> {
        let cfg = ChannelConfig { crossover_p, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.crossover_p) {
            return Err(Error::Config(format!(
                "crossover probability {} outside [0, 0.5]",
                self.crossover_p
            )));
        }
        Ok(())
    }
}

/// Tallies for one pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub words_total: usize,
    /// Words whose syndrome was nonzero (a correction was applied).
    pub words_corrected: usize,
    /// Decoded info words that differ from what was sent.
    pub words_wrong_after_decode: usize,
    pub block_error_rate: f64,
}

/// Decoded batch: recovered info words plus per-word correction flags.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodedBlock {
    pub words: Vec<InfoWord>,
    pub corrected: Vec<bool>,
}

impl Stage for DecodedBlock {
    fn stage(&self) -> Result<Self> {
        Ok(DecodedBlock {
            words: self.words.stage()?,
            corrected: {
                let mut v = Vec::new();
                v.try_reserve_exact(self.corrected.len())
                    .map_err(|_| Error::Resource("staging arena allocation failed".into()))?;
                v.extend_from_slice(&self.corrected);
                v
            },
        })
    }
}

/// p1 = d1⊕d2⊕d4, p2 = d1⊕d3⊕d4, p4 = d2⊕d3⊕d4.
pub fn encode(w: &InfoWord) -> Codeword {
    let [d1, d2, d3, d4] = w.0;
    let p1 = d1 ^ d2 ^ d4;
    let p2 = d1 ^ d3 ^ d4;
    let p4 = d2 ^ d3 ^ d4;
    Codeword([p1, p2, d1, p4, d2, d3, d4])
}

/// s1 + 2·s2 + 4·s4: zero for a valid codeword, otherwise the 1-indexed
/// position of a single flipped bit.
pub fn syndrome(c: &Codeword) -> u8 {
    let b = &c.0;
    let s1 = b[0] ^ b[2] ^ b[4] ^ b[6];
    let s2 = b[1] ^ b[2] ^ b[5] ^ b[6];
    let s4 = b[3] ^ b[4] ^ b[5] ^ b[6];
    s1 + 2 * s2 + 4 * s4
}

/// Correct at most one flipped bit, then extract d1..d4 from positions
/// 3, 5, 6, 7. The flag reports whether a correction was applied.
pub fn decode(c: &Codeword) -> (InfoWord, bool) {
    let s = syndrome(c);
    let mut bits = c.0;
    if s != 0 {
        bits[(s - 1) as usize] ^= 1;
    }
    (InfoWord([bits[2], bits[4], bits[5], bits[6]]), s != 0)
}

pub fn encode_block(words: &[InfoWord], plan: &ExecPlan) -> Vec<Codeword> {
    par_map(words.len(), plan, |i| encode(&words[i]))
}

pub fn decode_block(codewords: &[Codeword], plan: &ExecPlan) -> DecodedBlock {
    let decoded = par_map(codewords.len(), plan, |i| decode(&codewords[i]));
    let mut words = Vec::with_capacity(decoded.len());
    let mut corrected = Vec::with_capacity(decoded.len());
    for (w, c) in decoded {
        words.push(w);
        corrected.push(c);
    }
    DecodedBlock { words, corrected }
}

/// Flip each bit independently with probability `cfg.crossover_p`, using one
/// RNG stream per fixed-size chunk so the flip pattern depends only on
/// `(seed, input)` and never on the backend.
pub fn bsc_transmit(
    codewords: &[Codeword],
    cfg: &ChannelConfig,
    plan: &ExecPlan,
) -> Result<Vec<Codeword>> {
    cfg.validate()?;
    let n_chunks = codewords.len().div_ceil(CHANNEL_CHUNK_WORDS);
    let chunks = par_map(n_chunks, plan, |ci| {
        let start = ci * CHANNEL_CHUNK_WORDS;
        let end = (start + CHANNEL_CHUNK_WORDS).min(codewords.len());
        let mut stream = rng::from_seed_stream(cfg.seed, 1 + ci as u64);
        codewords[start..end]
            .iter()
            .map(|cw| {
                let mut bits = cw.0;
                for b in bits.iter_mut() {
                    if rng::unit_f64(&mut stream) < cfg.crossover_p {
                        *b ^= 1;
                    }
                }
                Codeword(bits)
            })
            .collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// Random info words, one fair coin per bit, drawn from stream 0 of `seed`.
pub fn gen_info_words(n: usize, seed: u64) -> Vec<InfoWord> {
    let mut r = rng::from_seed(seed);
    (0..n)
        .map(|_| {
            InfoWord([
                rng::bit(&mut r),
                rng::bit(&mut r),
                rng::bit(&mut r),
                rng::bit(&mut r),
            ])
        })
        .collect()
}

/// Compare what was sent to what was decoded.
pub fn tally(sent: &[InfoWord], decoded: &DecodedBlock) -> PipelineStats {
    let words_total = sent.len();
    let words_corrected = decoded.corrected.iter().filter(|&&c| c).count();
    let words_wrong_after_decode = sent
        .iter()
        .zip(&decoded.words)
        .filter(|(a, b)| a != b)
        .count();
    PipelineStats {
        words_total,
        words_corrected,
        words_wrong_after_decode,
        block_error_rate: words_wrong_after_decode as f64 / words_total as f64,
    }
}

/// Generate, encode, transmit, decode, tally.
pub fn run_pipeline(n_words: usize, cfg: &ChannelConfig, plan: &ExecPlan) -> Result<PipelineStats> {
    if n_words == 0 {
        return Err(Error::Config("pipeline needs at least one word".into()));
    }
    cfg.validate()?;
    let words = gen_info_words(n_words, cfg.seed);
    let encoded = encode_block(&words, plan);
    let sent = bsc_transmit(&encoded, cfg, plan)?;
    let decoded = decode_block(&sent, plan);
    Ok(tally(&words, &decoded))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(bits: [u8; 4]) -> InfoWord {
        InfoWord(bits)
    }

    #[test]
    fn encode_known_words() {
        assert_eq!(encode(&word([0, 0, 0, 0])).0, [0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(encode(&word([1, 1, 1, 1])).0, [1, 1, 1, 1, 1, 1, 1]);
        // 1011: p1 = 1^0^1 = 0, p2 = 1^1^1 = 1, p4 = 0^1^1 = 0.
        assert_eq!(encode(&word([1, 0, 1, 1])).0, [0, 1, 1, 0, 0, 1, 1]);
    }

    #[test]
    fn syndrome_zero_for_all_codewords() {
        for v in 0..16u8 {
            let w = word([(v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1]);
            assert_eq!(syndrome(&encode(&w)), 0);
        }
    }

    #[test]
    fn syndrome_locates_single_flip() {
        let c = encode(&word([1, 0, 1, 1]));
        let mut flipped = c;
        flipped.0[4] ^= 1; // bit 5, 1-indexed
        assert_eq!(flipped.0, [0, 1, 1, 0, 1, 1, 1]);
        assert_eq!(syndrome(&flipped), 5);
        let (back, corrected) = decode(&flipped);
        assert!(corrected);
        assert_eq!(back, word([1, 0, 1, 1]));
    }

    #[test]
    fn decode_clean_zero_word() {
        let (w, corrected) = decode(&Codeword([0; 7]));
        assert_eq!(w, word([0, 0, 0, 0]));
        assert!(!corrected);
    }

    #[test]
    fn all_single_errors_recovered() {
        for v in 0..16u8 {
            let w = word([(v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1]);
            let c = encode(&w);
            let (clean, corrected) = decode(&c);
            assert_eq!(clean, w);
            assert!(!corrected);
            for pos in 0..7 {
                let mut damaged = c;
                damaged.0[pos] ^= 1;
                let (got, corrected) = decode(&damaged);
                assert_eq!(got, w, "word {v:04b} flip {pos}");
                assert!(corrected);
            }
        }
    }

    #[test]
    fn noiseless_channel_is_identity() {
        let words = gen_info_words(500, 9);
        let encoded = encode_block(&words, &ExecPlan::sequential());
        let cfg = ChannelConfig::new(0.0, 9).unwrap();
        let sent = bsc_transmit(&encoded, &cfg, &ExecPlan::sequential()).unwrap();
        assert_eq!(sent, encoded);
    }

    #[test]
    fn half_probability_flips_about_half() {
        // 10^6 bits at p = 0.5: flip fraction within 3 sigma (sigma = 0.0005).
        let n_words = 1_000_000 / 7 + 1;
        let words = vec![word([0, 0, 0, 0]); n_words];
        let encoded = encode_block(&words, &ExecPlan::sequential());
        let cfg = ChannelConfig::new(0.5, 31).unwrap();
        let sent = bsc_transmit(&encoded, &cfg, &ExecPlan::sequential()).unwrap();
        let flipped: usize = sent
            .iter()
            .map(|c| c.0.iter().filter(|&&b| b == 1).count())
            .sum();
        let frac = flipped as f64 / (7 * n_words) as f64;
        assert!((frac - 0.5).abs() <= 3.0 * 0.0005, "flip fraction {frac}");
    }

    #[test]
    fn channel_is_deterministic_and_plan_independent() {
        let words = gen_info_words(5000, 42);
        let encoded = encode_block(&words, &ExecPlan::sequential());
        let cfg = ChannelConfig::new(0.1, 42).unwrap();
        let a = bsc_transmit(&encoded, &cfg, &ExecPlan::sequential()).unwrap();
        let b = bsc_transmit(&encoded, &cfg, &ExecPlan::sequential()).unwrap();
        let c = bsc_transmit(
            &encoded,
            &cfg,
            &ExecPlan::parallel_with(8, Some(1)).unwrap(),
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn invalid_crossover_probability() {
        assert!(ChannelConfig::new(0.6, 1).is_err());
        assert!(ChannelConfig::new(-0.1, 1).is_err());
        let bad = ChannelConfig {
            crossover_p: 0.7,
            seed: 1,
        };
        let cws = [Codeword([0; 7])];
        assert!(bsc_transmit(&cws, &bad, &ExecPlan::sequential()).is_err());
    }

    #[test]
    fn pipeline_noiseless_has_zero_error_rate() {
        let cfg = ChannelConfig::new(0.0, 5).unwrap();
        let stats = run_pipeline(1000, &cfg, &ExecPlan::sequential()).unwrap();
        assert_eq!(stats.words_total, 1000);
        assert_eq!(stats.words_corrected, 0);
        assert_eq!(stats.words_wrong_after_decode, 0);
        assert_eq!(stats.block_error_rate, 0.0);
    }

    #[test]
    fn pipeline_same_seed_same_stats() {
        let cfg = ChannelConfig::new(0.05, 77).unwrap();
        let a = run_pipeline(20_000, &cfg, &ExecPlan::sequential()).unwrap();
        let b = run_pipeline(20_000, &cfg, &ExecPlan::sequential()).unwrap();
        let c = run_pipeline(20_000, &cfg, &ExecPlan::parallel_with(6, None).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn pipeline_rejects_zero_words() {
        let cfg = ChannelConfig::new(0.01, 1).unwrap();
        assert!(run_pipeline(0, &cfg, &ExecPlan::sequential()).is_err());
    }
}
