//! Key-schedule generation and the binary key-file format.
//!
//! A schedule is L * (m + 1) independent uniform draws: multipliers by
//! rejection sampling over whole words (rejecting 0 and the handful of
//! values above p - kappa - 1), offsets as raw words. Cross-implementation
//! reproducibility is anchored to the serialized file, not to the RNG;
//! seeded mode uses ChaCha12 keyed via `seed_from_u64`.

use crate::arith::{Word, BLOCK_WIDTH};
use crate::block::BlockKeys;
use crate::tree::{KeySchedule, LEVELS};
use rand::{rngs::OsRng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"PMPH";
pub const VERSION: u8 = 0x01;
const HEADER_LEN: usize = 8;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum KeyError {
    #[error("bad magic or truncated header")]
    BadMagic,
    #[error("unsupported key file version {0:#04x}")]
    UnsupportedVersion(u8),
    #[error("unsupported word size {0:#04x}")]
    BadWordSize(u8),
    #[error("unsupported level count {0}")]
    BadLevelCount(u8),
    #[error("key file length {actual} does not match expected {expected}")]
    BadLength { expected: usize, actual: usize },
    #[error("multiplier out of range at level {level}, index {index}")]
    KeyOutOfRange { level: usize, index: usize },
    #[error("key file word size {found} bits, expected {expected}")]
    WordSizeMismatch { found: u32, expected: u32 },
}

fn draw_multiplier<W: Word, R: RngCore + ?Sized>(rng: &mut R) -> W {
    let max = W::max_key();
    loop {
        let r = W::random(rng);
        if r != W::ZERO && r <= max {
            return r;
        }
    }
}

/// Generates a schedule from any RNG; all draws are independent.
pub fn generate<W: Word, R: RngCore + ?Sized>(rng: &mut R) -> KeySchedule<W> {
    let levels = (0..LEVELS)
        .map(|_| {
            let mut a = [W::ZERO; BLOCK_WIDTH];
            for slot in &mut a {
                *slot = draw_multiplier::<W, R>(rng);
            }
            BlockKeys { a, b: W::random(rng) }
        })
        .collect();
    KeySchedule::new(levels)
}

/// Deterministic schedule: same seed, byte-identical keys.
pub fn generate_seeded<W: Word>(seed: u64) -> KeySchedule<W> {
    generate(&mut ChaCha12Rng::seed_from_u64(seed))
}

/// Schedule from OS entropy.
pub fn generate_entropy<W: Word>() -> KeySchedule<W> {
    generate(&mut OsRng)
}

/// Exact serialized size for a given word width.
pub fn file_len(word_bits: u32) -> usize {
    HEADER_LEN + LEVELS * (1 + BLOCK_WIDTH) * (word_bits / 8) as usize
}

/// Serializes as: "PMPH", version, word-size byte (0x20/0x40), level
/// count, reserved zero, then per level b followed by a_1..a_m, all words
/// little-endian.
pub fn save<W: Word>(schedule: &KeySchedule<W>) -> Vec<u8> {
    let mut out = Vec::with_capacity(file_len(W::BITS));
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(W::BITS as u8);
    out.push(LEVELS as u8);
    out.push(0x00);
    for keys in schedule.levels() {
        keys.b.write_le(&mut out);
        for a in &keys.a {
            a.write_le(&mut out);
        }
    }
    debug_assert_eq!(out.len(), file_len(W::BITS));
    out
}

fn parse_header(bytes: &[u8]) -> Result<(u8, u8), KeyError> {
    if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
        return Err(KeyError::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(KeyError::UnsupportedVersion(bytes[4]));
    }
    let word_size = bytes[5];
    if word_size != 0x20 && word_size != 0x40 {
        return Err(KeyError::BadWordSize(word_size));
    }
    if bytes[6] as usize != LEVELS {
        return Err(KeyError::BadLevelCount(bytes[6]));
    }
    Ok((word_size, bytes[7]))
}

/// Parses and fully validates a key file of the expected width. Out-of-range
/// multipliers are rejected: they would break both regularity and the
/// two-word product guarantee.
pub fn load<W: Word>(bytes: &[u8]) -> Result<KeySchedule<W>, KeyError> {
    let (word_size, _) = parse_header(bytes)?;
    if word_size as u32 != W::BITS {
        return Err(KeyError::WordSizeMismatch { found: word_size as u32, expected: W::BITS });
    }
    let expected = file_len(W::BITS);
    if bytes.len() != expected {
        return Err(KeyError::BadLength { expected, actual: bytes.len() });
    }
    let wb = (W::BITS / 8) as usize;
    let max = W::max_key();
    let mut cursor = HEADER_LEN;
    let mut levels = Vec::with_capacity(LEVELS);
    for level in 0..LEVELS {
        let b = W::from_le(&bytes[cursor..cursor + wb]);
        cursor += wb;
        let mut a = [W::ZERO; BLOCK_WIDTH];
        for (index, slot) in a.iter_mut().enumerate() {
            let v = W::from_le(&bytes[cursor..cursor + wb]);
            cursor += wb;
            if v == W::ZERO || v > max {
                return Err(KeyError::KeyOutOfRange { level, index });
            }
            *slot = v;
        }
        levels.push(BlockKeys { a, b });
    }
    Ok(KeySchedule::new(levels))
}

/// A schedule of either width, as determined by the file header.
pub enum AnySchedule {
    W32(KeySchedule<u32>),
    W64(KeySchedule<u64>),
}

pub fn load_any(bytes: &[u8]) -> Result<AnySchedule, KeyError> {
    let (word_size, _) = parse_header(bytes)?;
    match word_size {
        0x20 => load::<u32>(bytes).map(AnySchedule::W32),
        0x40 => load::<u64>(bytes).map(AnySchedule::W64),
        other => Err(KeyError::BadWordSize(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn seeded_generation_is_deterministic() {
        let a = generate_seeded::<u64>(1);
        let b = generate_seeded::<u64>(1);
        assert_eq!(save(&a), save(&b));
        assert_ne!(save(&a), save(&generate_seeded::<u64>(2)));
    }

    #[test]
    fn file_sizes_match_format_arithmetic() {
        assert_eq!(file_len(64), 8264);
        assert_eq!(file_len(32), 4136);
        assert_eq!(save(&generate_seeded::<u64>(0)).len(), 8264);
        assert_eq!(save(&generate_seeded::<u32>(0)).len(), 4136);
    }

    #[test]
    fn roundtrip_is_identity() {
        let sched = generate_seeded::<u64>(3);
        let bytes = save(&sched);
        assert_eq!(load::<u64>(&bytes).unwrap(), sched);
        let sched = generate_seeded::<u32>(3);
        let bytes = save(&sched);
        assert_eq!(load::<u32>(&bytes).unwrap(), sched);
    }

    #[test]
    fn load_rejects_malformed_files() {
        let good = save(&generate_seeded::<u64>(4));

        let mut bad = good.clone();
        bad[0] = b'X';
        assert_eq!(load::<u64>(&bad), Err(KeyError::BadMagic));

        let mut bad = good.clone();
        bad[4] = 0x02;
        assert_eq!(load::<u64>(&bad), Err(KeyError::UnsupportedVersion(2)));

        assert_eq!(
            load::<u64>(&good[..100]),
            Err(KeyError::BadLength { expected: 8264, actual: 100 })
        );
        assert!(matches!(load::<u64>(&good[..7]), Err(KeyError::BadMagic)));

        assert_eq!(
            load::<u32>(&good),
            Err(KeyError::WordSizeMismatch { found: 64, expected: 32 })
        );

        // Zero multiplier: first a-word of level 0 sits after the header
        // and the level offset b.
        let mut bad = good.clone();
        bad[16..24].fill(0);
        assert_eq!(
            load::<u64>(&bad),
            Err(KeyError::KeyOutOfRange { level: 0, index: 0 })
        );

        // Multiplier above p - kappa - 1 = 2^64 - 12.
        let mut bad = good;
        bad[16..24].copy_from_slice(&(u64::MAX - 5).to_le_bytes());
        assert_eq!(
            load::<u64>(&bad),
            Err(KeyError::KeyOutOfRange { level: 0, index: 0 })
        );
    }

    #[test]
    fn multiplier_draws_stay_in_range_with_plausible_mean() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let n = 200_000u64;
        let mut sum = 0f64;
        for _ in 0..n {
            let a = draw_multiplier::<u32, _>(&mut rng);
            assert!(a >= 1 && a <= u32::max_key());
            sum += a as f64;
        }
        let mean = sum / n as f64;
        let mid = (1.0 + u32::max_key() as f64) / 2.0;
        // sigma of the sample mean for a uniform range
        let sigma = (u32::max_key() as f64) / (12f64.sqrt() * (n as f64).sqrt());
        assert!((mean - mid).abs() < 4.0 * sigma, "mean {mean} vs mid {mid}");
    }

    #[test]
    fn rejection_sampling_is_unbiased_chi_squared() {
        // 64 buckets over the admissible range; chi^2 with 63 dof should
        // stay below the p=0.01 critical value ~92.0 for uniform draws.
        let mut rng = ChaCha12Rng::seed_from_u64(20);
        const BUCKETS: usize = 64;
        let mut counts = [0u64; BUCKETS];
        let n = 1_000_000u64;
        let range = u32::max_key() as u64;
        for _ in 0..n {
            let a = draw_multiplier::<u32, _>(&mut rng) as u64 - 1;
            counts[(a * BUCKETS as u64 / range) as usize] += 1;
        }
        let expected = n as f64 / BUCKETS as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 92.0, "chi^2 = {chi2}");
    }

    #[test]
    fn entropy_mode_produces_valid_schedules() {
        let sched = generate_entropy::<u32>();
        assert!(sched.validate());
        assert_ne!(save(&sched), save(&generate_entropy::<u32>()));
    }
}
