//! The multilinear block hash f(s) = (b + sum a_i*s_i) mod p over exactly
//! m inputs, with word inputs at the bottom tree level and field-element
//! inputs above it.

use crate::arith::{mod_p, mul_field, FieldElement, TripleAccumulator, Word, BLOCK_WIDTH};

/// The random identity of one block function: m multipliers in
/// (0, p - kappa) and an offset in [0, 2^n).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlockKeys<W: Word> {
    pub a: [W; BLOCK_WIDTH],
    pub b: W,
}

impl<W: Word> BlockKeys<W> {
    /// Checks every multiplier against the key-range invariant.
    pub fn validate(&self) -> bool {
        let max = W::max_key();
        self.a.iter().all(|&a| a != W::ZERO && a <= max)
    }
}

/// Block hash over plain words (first tree level). Inputs shorter than m
/// are treated as zero-padded: missing terms contribute nothing to the sum.
pub fn hash_block_words<W: Word>(keys: &BlockKeys<W>, s: &[W]) -> FieldElement<W> {
    debug_assert!(s.len() <= BLOCK_WIDTH);
    let mut acc = TripleAccumulator::from_word(keys.b);
    for (&a, &s) in keys.a.iter().zip(s) {
        acc.add_product(a.mul_wide(s));
    }
    mod_p(acc)
}

/// Block hash over field elements (all upper tree levels).
pub fn hash_block_elems<W: Word>(keys: &BlockKeys<W>, s: &[FieldElement<W>]) -> FieldElement<W> {
    debug_assert!(s.len() <= BLOCK_WIDTH);
    let mut acc = TripleAccumulator::from_word(keys.b);
    for (&a, &s) in keys.a.iter().zip(s) {
        acc.add_product(mul_field(a, s));
    }
    mod_p(acc)
}
