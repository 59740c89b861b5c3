//! Statistical and structural quality checks: avalanche bias, reduction
//! differential fuzzing, Monte Carlo collision estimation, mixing
//! round-trips and the n-bit-product image-fraction measurement.
//!
//! Every verdict is deterministic given its seed, and reports embed the
//! seed so failures replay exactly.

use crate::arith::{mod_p, TripleAccumulator, Word, BLOCK_WIDTH};
use crate::keygen;
use crate::tree::{hash_oneshot, Finalizer, KeySchedule};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum QualityError {
    #[error("image-fraction width {0} exceeds the configured cap of {1} bits")]
    OutOfRange(u32, u32),
}

/// Flip-frequency matrix for one input length.
pub struct AvalancheReport {
    pub word_bits: u32,
    pub input_len: usize,
    pub trials: u64,
    pub seed: u64,
    /// bias[input_bit][output_bit] = observed flip frequency.
    pub bias: Vec<Vec<f64>>,
    pub worst_bias: f64,
}

impl AvalancheReport {
    pub fn kv_lines(&self) -> String {
        format!(
            "suite=avalanche bits={} input_len={} trials={} seed={} worst_bias={:.6}\n",
            self.word_bits, self.input_len, self.trials, self.seed, self.worst_bias
        )
    }

    /// One CSV row per (input_bit, output_bit) pair.
    pub fn csv(&self) -> String {
        let mut out = String::from("input_bit,output_bit,flip_frequency\n");
        for (i, row) in self.bias.iter().enumerate() {
            for (o, freq) in row.iter().enumerate() {
                let _ = writeln!(out, "{i},{o},{freq:.6}");
            }
        }
        out
    }
}

/// For each trial draws a random input, flips every input bit in turn and
/// records which digest bits change.
pub fn avalanche_test<W: Word + Finalizer>(
    schedule: &KeySchedule<W>,
    input_len: usize,
    trials: u64,
    seed: u64,
) -> AvalancheReport {
    let in_bits = 8 * input_len;
    let out_bits = W::BITS as usize;
    let mut flips = vec![vec![0u64; out_bits]; in_bits];
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut buf = vec![0u8; input_len];
    for _ in 0..trials {
        rng.fill_bytes(&mut buf);
        let base = hash_oneshot(schedule, &buf).unwrap();
        for bit in 0..in_bits {
            buf[bit / 8] ^= 1 << (bit % 8);
            let flipped = hash_oneshot(schedule, &buf).unwrap();
            buf[bit / 8] ^= 1 << (bit % 8);
            let delta = base.to_u64() ^ flipped.to_u64();
            for (out, row) in flips[bit].iter_mut().enumerate() {
                *row += (delta >> out) & 1;
            }
        }
    }
    let bias: Vec<Vec<f64>> = flips
        .iter()
        .map(|row| row.iter().map(|&f| f as f64 / trials as f64).collect())
        .collect();
    let worst_bias = bias
        .iter()
        .flatten()
        .map(|&f| (f - 0.5).abs())
        .fold(0.0f64, f64::max);
    AvalancheReport { word_bits: W::BITS, input_len, trials, seed, bias, worst_bias }
}

/// Outcome of a differential fuzz run; a mismatch is a failing verdict,
/// never a panic.
pub struct FuzzVerdict {
    pub checked: u64,
    pub seed: u64,
    pub mismatches: Vec<String>,
}

impl FuzzVerdict {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn accumulator_oracle<W: Word>(acc: TripleAccumulator<W>) -> u128 {
    let value = BigUint::from(acc.w0.to_u128())
        + (BigUint::from(acc.w1.to_u128()) << W::BITS)
        + (BigUint::from(acc.w2.to_u128()) << (2 * W::BITS));
    (value % BigUint::from(W::prime())).to_u128().unwrap()
}

fn check_one<W: Word>(acc: TripleAccumulator<W>, verdict: &mut FuzzVerdict) {
    verdict.checked += 1;
    let got = mod_p(acc);
    let want = accumulator_oracle(acc);
    let in_range = got.value() < W::prime() && (!got.hi() || got.lo().to_u64() < W::K);
    if got.value() != want || !in_range {
        verdict
            .mismatches
            .push(format!("acc={acc:?} got={} want={want}", got.value()));
    }
}

/// Random 3-word accumulators with w2 <= m against the big-integer modulo.
pub fn reduction_fuzz<W: Word>(iterations: u64, seed: u64) -> FuzzVerdict {
    let mut verdict = FuzzVerdict { checked: 0, seed, mismatches: Vec::new() };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // Boundary battery first.
    let max = W::from_u128((1u128 << W::BITS) - 1);
    let k = W::from_u64(W::K);
    for acc in [
        TripleAccumulator::new(max, max, W::from_u64(BLOCK_WIDTH as u64)),
        TripleAccumulator::new(W::ZERO, W::ZERO, W::ZERO),
        TripleAccumulator::new(W::ZERO, W::ONE, W::ZERO),
        TripleAccumulator::new(k.wrapping_sub(W::ONE), W::ZERO, W::ZERO),
        TripleAccumulator::new(
            W::from_u64(2 * W::K - 1),
            W::from_u64(2),
            W::ZERO,
        ),
    ] {
        check_one(acc, &mut verdict);
    }
    for _ in 0..iterations {
        let acc = TripleAccumulator::new(
            W::random(&mut rng),
            W::random(&mut rng),
            W::from_u64(rng.gen_range(0..=BLOCK_WIDTH as u64)),
        );
        check_one(acc, &mut verdict);
    }
    verdict
}

/// Exhaustive toy-width reduction check over every (w0, w1, w2 <= m).
pub fn reduction_exhaustive_toy() -> FuzzVerdict {
    let mut verdict = FuzzVerdict { checked: 0, seed: 0, mismatches: Vec::new() };
    for w2 in 0..=BLOCK_WIDTH as u64 {
        for w1 in 0..=u8::MAX {
            for w0 in 0..=u8::MAX {
                let acc = TripleAccumulator::<u8>::new(w0, w1, w2 as u8);
                verdict.checked += 1;
                let got = mod_p(acc).value();
                let want = acc.value_u128() % u8::prime();
                if got != want {
                    verdict.mismatches.push(format!("acc={acc:?} got={got} want={want}"));
                }
            }
        }
    }
    verdict
}

/// Fraction of random schedules on which a fixed input pair collides.
pub fn collision_monte_carlo<W: Word + Finalizer>(
    schedules: u64,
    pair: (&[u8], &[u8]),
    seed: u64,
) -> f64 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut collisions = 0u64;
    for _ in 0..schedules {
        let schedule = keygen::generate::<W, _>(&mut rng);
        if hash_oneshot(&schedule, pair.0).unwrap() == hash_oneshot(&schedule, pair.1).unwrap() {
            collisions += 1;
        }
    }
    collisions as f64 / schedules as f64
}

/// Exact fraction of [0, 2^(2n)) reachable as a product of two n-bit
/// integers, by marking a membership bitset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageFractionPoint {
    pub n: u32,
    pub reachable: u64,
    pub fraction: f64,
}

pub const IMAGE_FRACTION_CAP: u32 = 14;

pub fn nh_image_fraction(n: u32) -> Result<ImageFractionPoint, QualityError> {
    if n == 0 || n > IMAGE_FRACTION_CAP {
        return Err(QualityError::OutOfRange(n, IMAGE_FRACTION_CAP));
    }
    let total = 1u64 << (2 * n);
    let mut bits = vec![0u64; total.div_ceil(64) as usize];
    for x in 0..1u64 << n {
        for y in x..1u64 << n {
            let prod = x * y;
            bits[(prod / 64) as usize] |= 1 << (prod % 64);
        }
    }
    let reachable: u64 = bits.iter().map(|w| w.count_ones() as u64).sum();
    Ok(ImageFractionPoint { n, reachable, fraction: reachable as f64 / total as f64 })
}

/// CSV over a range of widths: one row per n.
pub fn image_fraction_csv(max_n: u32) -> Result<String, QualityError> {
    let mut out = String::from("n,reachable,fraction\n");
    for n in 1..=max_n {
        let point = nh_image_fraction(n)?;
        let _ = writeln!(out, "{},{},{:.6}", point.n, point.reachable, point.fraction);
    }
    Ok(out)
}

/// Round-trips the mixing finalizer in both directions on sampled words.
pub fn mix_roundtrip<W: Word + Finalizer>(iterations: u64, seed: u64) -> FuzzVerdict {
    let mut verdict = FuzzVerdict { checked: 0, seed, mismatches: Vec::new() };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let zero = W::ZERO;
    if zero.mix() != zero || zero.unmix() != zero {
        verdict.mismatches.push("mix(0) != 0".into());
    }
    for _ in 0..iterations {
        verdict.checked += 1;
        let z = W::random(&mut rng);
        if z.mix().unmix() != z || z.unmix().mix() != z {
            verdict.mismatches.push(format!("mix round-trip failed for {z:x}"));
        }
    }
    verdict
}

/// Exhaustive 32-bit round-trip; long-running, opt-in.
pub fn mix_roundtrip_exhaustive_32() -> bool {
    (0..=u32::MAX).all(|z| z.mix().unmix() == z)
}

/// Digest of a message with the mixing step removed; only used for the
/// documented negative-control comparison in avalanche reporting.
pub fn hash_unmixed<W: Word + Finalizer>(schedule: &KeySchedule<W>, bytes: &[u8]) -> W {
    let mut h = crate::tree::Hasher::new(schedule);
    h.update(bytes).unwrap();
    h.finalize_tree().mod_word()
}

/// Avalanche over a raw word-valued hash function; used to compare the
/// mixed and unmixed paths at equal trial counts.
pub fn avalanche_over<F: Fn(&[u8]) -> u64>(
    hash: F,
    out_bits: u32,
    input_len: usize,
    trials: u64,
    seed: u64,
) -> f64 {
    let in_bits = 8 * input_len;
    let mut flips = vec![vec![0u64; out_bits as usize]; in_bits];
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut buf = vec![0u8; input_len];
    for _ in 0..trials {
        rng.fill_bytes(&mut buf);
        let base = hash(&buf);
        for bit in 0..in_bits {
            buf[bit / 8] ^= 1 << (bit % 8);
            let delta = base ^ hash(&buf);
            buf[bit / 8] ^= 1 << (bit % 8);
            for (out, row) in flips[bit].iter_mut().enumerate() {
                *row += (delta >> out) & 1;
            }
        }
    }
    flips
        .iter()
        .flatten()
        .map(|&f| (f as f64 / trials as f64 - 0.5).abs())
        .fold(0.0f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_fraction_hand_examples() {
        // n=1: products of {0,1} are {0,1}: 2 of 4.
        let p = nh_image_fraction(1).unwrap();
        assert_eq!((p.reachable, p.fraction), (2, 0.5));
        // n=2: {0,1,2,3,4,6,9}: 7 of 16.
        let p = nh_image_fraction(2).unwrap();
        assert_eq!(p.reachable, 7);
        assert!((p.fraction - 7.0 / 16.0).abs() < 1e-12);
        assert_eq!(
            nh_image_fraction(15),
            Err(QualityError::OutOfRange(15, IMAGE_FRACTION_CAP))
        );
        assert!(matches!(nh_image_fraction(0), Err(QualityError::OutOfRange(0, _))));
    }

    #[test]
    fn image_fraction_declines() {
        let mut prev = f64::INFINITY;
        for n in 1..=10 {
            let point = nh_image_fraction(n).unwrap();
            assert!(point.fraction < prev, "n={n}");
            prev = point.fraction;
        }
    }

    #[test]
    fn reduction_fuzz_small_runs_clean() {
        assert!(reduction_fuzz::<u32>(20_000, 1).passed());
        assert!(reduction_fuzz::<u64>(20_000, 2).passed());
    }

    #[test]
    fn mix_roundtrip_small_runs_clean() {
        assert!(mix_roundtrip::<u32>(50_000, 3).passed());
        assert!(mix_roundtrip::<u64>(50_000, 4).passed());
    }

    #[test]
    fn collision_controls() {
        let rate = collision_monte_carlo::<u32>(200, (b"same", b"same"), 5);
        assert_eq!(rate, 1.0);
        let rate = collision_monte_carlo::<u32>(500, (b"left", b"right"), 6);
        assert!(rate < 0.05);
    }

    #[test]
    fn avalanche_report_shape() {
        let schedule = keygen::generate_seeded::<u64>(7);
        let report = avalanche_test(&schedule, 4, 300, 8);
        assert_eq!(report.bias.len(), 32);
        assert_eq!(report.bias[0].len(), 64);
        assert!(report.worst_bias <= 0.5 + 1e-12);
        assert!(report.csv().lines().count() == 32 * 64 + 1);
        assert!(report.kv_lines().contains("seed=8"));
    }
}
