//! Exact fixed-width arithmetic over the field GF(p) for p = 2^n + k.
//!
//! Everything here is branch-light word arithmetic: double-word products,
//! a three-word accumulator for exact scalar-product sums, and the
//! two-stage reduction modulo p. The prime is never materialized as a
//! single word; field elements carry a one-bit high part instead.

use rand::RngCore;
use std::fmt;

/// Maximum number of products accumulated before a reduction (block width m).
pub const BLOCK_WIDTH: usize = 128;

/// An unsigned machine word that serves as the character type of one hash
/// family variant. `K` is the prime offset (p = 2^BITS + K) and `KAPPA`
/// shrinks the multiplier range so that every product a*s fits two words.
pub trait Word:
    Copy + Eq + Ord + fmt::Debug + fmt::Display + fmt::LowerHex + Send + Sync + 'static
{
    const BITS: u32;
    const K: u64;
    const KAPPA: u64;
    const ZERO: Self;
    const ONE: Self;

    fn from_u64(v: u64) -> Self;
    fn to_u64(self) -> u64;
    fn from_u128(v: u128) -> Self;
    fn to_u128(self) -> u128;

    /// Full 2n-bit product, returned as (lo, hi).
    fn mul_wide(self, rhs: Self) -> (Self, Self);
    fn wrapping_add(self, rhs: Self) -> Self;
    fn wrapping_sub(self, rhs: Self) -> Self;
    fn wrapping_mul(self, rhs: Self) -> Self;
    fn overflowing_add(self, rhs: Self) -> (Self, bool);

    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self;
    fn write_le(self, out: &mut Vec<u8>);
    /// Reads `BITS/8` little-endian bytes. Panics on a short slice.
    fn from_le(bytes: &[u8]) -> Self;

    /// The prime p = 2^n + k.
    fn prime() -> u128 {
        (1u128 << Self::BITS) + Self::K as u128
    }

    /// Largest admissible multiplier, p - kappa - 1.
    fn max_key() -> Self {
        Self::from_u128(Self::prime() - Self::KAPPA as u128 - 1)
    }
}

macro_rules! impl_word {
    ($ty:ty, $wide:ty, $bits:expr, $k:expr, $kappa:expr, $rand:ident) => {
        impl Word for $ty {
            const BITS: u32 = $bits;
            const K: u64 = $k;
            const KAPPA: u64 = $kappa;
            const ZERO: Self = 0;
            const ONE: Self = 1;

            #[inline]
            fn from_u64(v: u64) -> Self {
                v as $ty
            }
            #[inline]
            fn to_u64(self) -> u64 {
                self as u64
            }
            #[inline]
            fn from_u128(v: u128) -> Self {
                v as $ty
            }
            #[inline]
            fn to_u128(self) -> u128 {
                self as u128
            }

            #[inline]
            fn mul_wide(self, rhs: Self) -> (Self, Self) {
                let wide = (self as $wide) * (rhs as $wide);
                (wide as $ty, (wide >> $bits) as $ty)
            }
            #[inline]
            fn wrapping_add(self, rhs: Self) -> Self {
                <$ty>::wrapping_add(self, rhs)
            }
            #[inline]
            fn wrapping_sub(self, rhs: Self) -> Self {
                <$ty>::wrapping_sub(self, rhs)
            }
            #[inline]
            fn wrapping_mul(self, rhs: Self) -> Self {
                <$ty>::wrapping_mul(self, rhs)
            }
            #[inline]
            fn overflowing_add(self, rhs: Self) -> (Self, bool) {
                <$ty>::overflowing_add(self, rhs)
            }

            #[inline]
            fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
                rng.$rand() as $ty
            }
            fn write_le(self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }
            fn from_le(bytes: &[u8]) -> Self {
                const LEN: usize = ($bits / 8) as usize;
                let mut buf = [0u8; LEN];
                buf.copy_from_slice(&bytes[..LEN]);
                <$ty>::from_le_bytes(buf)
            }
        }
    };
}

// Production variants: p = 2^32 + 15 and p = 2^64 + 13 (smallest primes
// above the respective powers of two). kappa keeps (p-kappa-1)(p-1) < 2^(2n).
impl_word!(u32, u64, 32, 15, 28, next_u32);
impl_word!(u64, u128, 64, 13, 24, next_u64);
// Toy width for exhaustive verification: p = 2^8 + 1 = 257.
impl_word!(u8, u16, 8, 1, 2, next_u32);

/// A canonical residue modulo p = 2^n + k: value = lo + hi*2^n, and when
/// `hi` is set, `lo < k`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FieldElement<W: Word> {
    lo: W,
    hi: bool,
}

impl<W: Word> FieldElement<W> {
    pub const ZERO: Self = Self { lo: W::ZERO, hi: false };
    pub const ONE: Self = Self { lo: W::ONE, hi: false };

    #[inline]
    pub fn from_word(lo: W) -> Self {
        Self { lo, hi: false }
    }

    /// Builds from parts, checking the representation invariant.
    pub fn from_parts(lo: W, hi: bool) -> Self {
        assert!(!hi || lo.to_u64() < W::K, "hi set requires lo < k");
        Self { lo, hi }
    }

    #[inline]
    pub fn lo(self) -> W {
        self.lo
    }
    #[inline]
    pub fn hi(self) -> bool {
        self.hi
    }

    #[inline]
    pub fn value(self) -> u128 {
        self.lo.to_u128() + ((self.hi as u128) << W::BITS)
    }

    /// The digest-side reduction modulo 2^n. When hi is set the value is
    /// 2^n + lo with lo < k, so the residue is lo either way.
    #[inline]
    pub fn mod_word(self) -> W {
        self.lo
    }
}

/// Exact 3-word sum S = w0 + w1*2^n + w2*2^(2n) of up to `BLOCK_WIDTH`
/// double-word products plus one initial word. The top word stays small:
/// at most one carry per accumulated product.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct TripleAccumulator<W: Word> {
    pub w0: W,
    pub w1: W,
    pub w2: W,
}

impl<W: Word> TripleAccumulator<W> {
    #[inline]
    pub fn from_word(w0: W) -> Self {
        Self { w0, w1: W::ZERO, w2: W::ZERO }
    }

    pub fn new(w0: W, w1: W, w2: W) -> Self {
        Self { w0, w1, w2 }
    }

    /// S as an exact integer; only valid for widths whose 3-word value
    /// fits u128 (the toy and 32-bit paths; tests for 64-bit use bigints).
    pub fn value_u128(self) -> u128 {
        debug_assert!(W::BITS <= 32);
        self.w0.to_u128()
            + (self.w1.to_u128() << W::BITS)
            + (self.w2.to_u128() << (2 * W::BITS))
    }

    /// Adds one double-word product with carry propagation.
    #[inline]
    pub fn add_product(&mut self, prod: (W, W)) {
        debug_assert!(self.w2.to_u64() < BLOCK_WIDTH as u64, "accumulator over capacity");
        let (lo, c0) = self.w0.overflowing_add(prod.0);
        let (mid, c1a) = self.w1.overflowing_add(prod.1);
        let (mid, c1b) = mid.overflowing_add(if c0 { W::ONE } else { W::ZERO });
        self.w0 = lo;
        self.w1 = mid;
        if c1a || c1b {
            self.w2 = self.w2.wrapping_add(W::ONE);
        }
    }
}

/// Exact 2n-bit product of a multiplier and a word character.
#[inline]
pub fn mul_wide<W: Word>(a: W, b: W) -> (W, W) {
    a.mul_wide(b)
}

/// Exact product of a multiplier and a field element. The key range
/// a <= p - kappa - 1 guarantees a*s < 2^(2n), so two words suffice.
#[inline]
pub fn mul_field<W: Word>(a: W, s: FieldElement<W>) -> (W, W) {
    debug_assert!(a != W::ZERO && a <= W::max_key(), "multiplier out of key range");
    let (lo, hi) = a.mul_wide(s.lo());
    if s.hi() {
        // a*s = a*lo + a*2^n; the high-word add cannot overflow because
        // the total is below 2^(2n).
        let (hi, carry) = hi.overflowing_add(a);
        debug_assert!(!carry);
        (lo, hi)
    } else {
        (lo, hi)
    }
}

/// First reduction stage: folds a 3-word sum into v0 + v1*2^n with
/// v1 in {0,1,2}, using 2^n = -k and (2^n)^2 = k^2 modulo p.
///
/// With u0 = (k*w1) mod 2^n and u1 = (k*w1) div 2^n the sum is congruent to
/// (w0 + k^2*w2 + k*u1) + (2^n + k - u0). All the small terms together are
/// bounded by k^2*m + k*(k-1), which fits a word for every supported width.
pub fn reduce3_to_2<W: Word>(acc: TripleAccumulator<W>) -> (W, u8) {
    debug_assert!(acc.w2.to_u64() <= BLOCK_WIDTH as u64);
    // k^2*(m+1) + k*(k-1) < 2^n keeps v1 <= 2 for any admissible (n, k, m).
    debug_assert!(
        W::K * W::K * (BLOCK_WIDTH as u64 + 1) + W::K * (W::K - 1) < (1u128 << W::BITS) as u64
            || W::BITS >= 64
    );
    let k = W::from_u64(W::K);
    let (u0, u1) = k.mul_wide(acc.w1);
    // k^2 <= 225 and w2 <= m, so k^2*w2 fits the low word.
    let k_sq = k.wrapping_mul(k);
    let (small, small_hi) = k_sq.mul_wide(acc.w2);
    debug_assert!(small_hi == W::ZERO);
    let small = small.wrapping_add(k.wrapping_mul(u1));

    let mut v1: u8 = 0;
    let (t, c) = acc.w0.overflowing_add(small);
    v1 += c as u8;
    // Add 2^n + k - u0: low word is k - u0 mod 2^n, and the high bit is
    // present exactly when the subtraction does not borrow (u0 <= k).
    let (v0, c) = t.overflowing_add(k.wrapping_sub(u0));
    v1 += c as u8;
    v1 += (u0 <= k) as u8;
    debug_assert!(v1 <= 2, "reduction bound violated: v1 = {v1}");
    (v0, v1)
}

/// Second reduction stage: canonicalizes v0 + v1*2^n into [0, p).
pub fn reduce2_final<W: Word>(v0: W, v1: u8) -> FieldElement<W> {
    debug_assert!(v1 <= 2);
    let k = W::from_u64(W::K);
    let kv1 = W::from_u64(W::K * v1 as u64);
    if kv1 <= v0 {
        // 2^n*v1 = -k*v1 (mod p). Fast path; v0 >= 2k implies this branch.
        FieldElement { lo: v0.wrapping_sub(kv1), hi: false }
    } else if v1 == 1 {
        // v0 < k, so v0 + 2^n is already canonical.
        FieldElement { lo: v0, hi: true }
    } else {
        // v1 = 2 and v0 < 2k: use 2*2^n = 2^n - k (mod p), giving
        // 2^n + v0 - k, which is below p.
        if v0 >= k {
            FieldElement { lo: v0.wrapping_sub(k), hi: true }
        } else {
            FieldElement { lo: v0.wrapping_sub(k), hi: false }
        }
    }
}

/// Canonical residue of a 3-word accumulator modulo p.
#[inline]
pub fn mod_p<W: Word>(acc: TripleAccumulator<W>) -> FieldElement<W> {
    let (v0, v1) = reduce3_to_2(acc);
    reduce2_final(v0, v1)
}
