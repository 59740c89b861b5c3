//! Tree-based hashing of arbitrary-length byte strings.
//!
//! The input is packed into little-endian machine words, a 1-marker is
//! appended (as a 0x01 byte inside the last partial word, or as a whole
//! word equal to 1 on a word boundary), and the word stream is folded
//! level by level through independently keyed block hashes. The streaming
//! form keeps at most m pending values per level, so memory stays bounded
//! by m*(L-1) elements regardless of input length.

use crate::arith::{FieldElement, Word, BLOCK_WIDTH};
use crate::block::{hash_block_elems, hash_block_words, BlockKeys};
use thiserror::Error;

/// Number of tree levels; bounds input length at m^L - 1 words.
pub const LEVELS: usize = 8;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum HashError {
    /// Input longer than m^L - 1 words cannot be represented by an
    /// L-level tree.
    #[error("input exceeds the maximum length of {0} words")]
    LengthExceeded(u128),
}

/// One complete hash-function identity: L independent block-key sets,
/// with `level(0)` applied to leaf words.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KeySchedule<W: Word> {
    levels: Box<[BlockKeys<W>]>,
}

impl<W: Word> KeySchedule<W> {
    pub fn new(levels: Vec<BlockKeys<W>>) -> Self {
        assert_eq!(levels.len(), LEVELS);
        Self { levels: levels.into_boxed_slice() }
    }

    pub fn level(&self, j: usize) -> &BlockKeys<W> {
        &self.levels[j]
    }

    pub fn levels(&self) -> &[BlockKeys<W>] {
        &self.levels
    }

    pub fn validate(&self) -> bool {
        self.levels.iter().all(|k| k.validate())
    }
}

/// Per-level block hashing for the streaming tree fold. Implementations
/// decide the leaf and node types; the fold itself is width-agnostic so
/// the same promotion logic can be exercised at toy scale.
pub trait BlockFamily {
    type Leaf: Copy;
    type Node: Copy;

    /// Block width m (> 1).
    fn block_width(&self) -> usize;
    /// Level count L (>= 1).
    fn level_count(&self) -> usize;
    /// f_1 applied to a leaf block; short blocks are implicitly zero-padded.
    fn hash_leaf_block(&self, block: &[Self::Leaf]) -> Self::Node;
    /// f_{level+1} applied at `level` >= 1.
    fn hash_node_block(&self, level: usize, block: &[Self::Node]) -> Self::Node;
    /// The |sigma| = 1 exit: when the whole tree consists of one leaf,
    /// `Some` embeds it as the result, `None` sends it through the leaf
    /// block hash anyway.
    fn single_leaf_exit(&self, leaf: Self::Leaf) -> Option<Self::Node>;
}

/// Bounded-memory fold of a leaf stream through an L-level block-hash tree.
///
/// Level j holds pending inputs to f_{j+1}; a buffer reaching m elements is
/// hashed and the result pushed one level up. At finish, levels are flushed
/// bottom-up, except that a level whose entire population is one value ends
/// the fold with that value, reproducing the |sigma| = 1 loop exit of the
/// per-level formulation.
pub struct TreeStream<F: BlockFamily> {
    family: F,
    leaf_buf: Vec<F::Leaf>,
    node_bufs: Vec<Vec<F::Node>>,
    /// pushed[j] counts every value that ever arrived at level j.
    pushed: Vec<u128>,
}

impl<F: BlockFamily> TreeStream<F> {
    pub fn new(family: F) -> Self {
        let levels = family.level_count();
        assert!(levels >= 1 && family.block_width() > 1);
        Self {
            leaf_buf: Vec::with_capacity(family.block_width()),
            node_bufs: vec![Vec::new(); levels],
            pushed: vec![0; levels + 1],
            family,
        }
    }

    pub fn family(&self) -> &F {
        &self.family
    }

    /// Total leaves consumed.
    pub fn leaf_count(&self) -> u128 {
        self.pushed[0]
    }

    pub fn push_leaf(&mut self, leaf: F::Leaf) {
        self.pushed[0] += 1;
        self.leaf_buf.push(leaf);
        if self.leaf_buf.len() == self.family.block_width() {
            let node = self.family.hash_leaf_block(&self.leaf_buf);
            self.leaf_buf.clear();
            self.push_node(1, node);
        }
    }

    fn push_node(&mut self, level: usize, node: F::Node) {
        self.pushed[level] += 1;
        let buf = &mut self.node_bufs[level - 1];
        buf.push(node);
        if buf.len() == self.family.block_width() {
            // The top level can only fill at the very end of a maximal
            // input; mid-stream it would mean the length bound was broken.
            debug_assert!(level < self.family.level_count(), "tree level overflow");
            let node = self.family.hash_node_block(level, &self.node_bufs[level - 1]);
            self.node_bufs[level - 1].clear();
            self.push_node(level + 1, node);
        }
    }

    /// Flushes all levels bottom-up and returns the tree value.
    /// The caller must have pushed at least one leaf (the 1-marker).
    pub fn finish(mut self) -> F::Node {
        assert!(self.pushed[0] >= 1, "finish before any leaf was pushed");
        if self.pushed[0] == 1 {
            if let Some(node) = self.family.single_leaf_exit(self.leaf_buf[0]) {
                return node;
            }
        }
        if !self.leaf_buf.is_empty() {
            let node = self.family.hash_leaf_block(&self.leaf_buf);
            self.leaf_buf.clear();
            self.push_node_no_cascade(1, node);
        }
        let levels = self.family.level_count();
        for level in 1..=levels {
            if self.pushed[level] == 1 {
                // This level's whole population is one value: done.
                return self.node_bufs[level - 1][0];
            }
            if self.node_bufs[level - 1].is_empty() {
                // Everything at this level was already promoted mid-stream.
                continue;
            }
            let node = self.family.hash_node_block(level, &self.node_bufs[level - 1]);
            if level == levels {
                return node;
            }
            self.push_node_no_cascade(level + 1, node);
        }
        unreachable!("tree fold must terminate at or below level L");
    }

    /// Push during the final flush: full buffers are handled by the flush
    /// loop itself, so no recursive promotion here.
    fn push_node_no_cascade(&mut self, level: usize, node: F::Node) {
        self.pushed[level] += 1;
        self.node_bufs[level - 1].push(node);
    }
}

/// The production family: leaf words hashed by f_1, field elements above.
pub struct PmFamily<'k, W: Word> {
    schedule: &'k KeySchedule<W>,
}

impl<'k, W: Word> BlockFamily for PmFamily<'k, W> {
    type Leaf = W;
    type Node = FieldElement<W>;

    fn block_width(&self) -> usize {
        BLOCK_WIDTH
    }
    fn level_count(&self) -> usize {
        LEVELS
    }
    fn hash_leaf_block(&self, block: &[W]) -> FieldElement<W> {
        hash_block_words(self.schedule.level(0), block)
    }
    fn hash_node_block(&self, level: usize, block: &[FieldElement<W>]) -> FieldElement<W> {
        hash_block_elems(self.schedule.level(level), block)
    }
    fn single_leaf_exit(&self, leaf: W) -> Option<FieldElement<W>> {
        // A lone leaf equal to 1 can only be the marker of the empty
        // input; it is the tree result verbatim. Any other lone leaf is a
        // sub-word input packed with its marker byte and goes through f_1
        // so short digests stay keyed.
        (leaf == W::ONE).then_some(FieldElement::ONE)
    }
}

/// Invertible xorshift-multiply-xorshift output mixing.
pub trait Finalizer: Word {
    fn mix(self) -> Self;
    fn unmix(self) -> Self;
}

const fn inv_mul_u64(a: u64) -> u64 {
    // Newton iteration for the inverse of an odd number modulo 2^64.
    let mut x = a;
    let mut i = 0;
    while i < 6 {
        x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
        i += 1;
    }
    x
}

const MIX64_MUL: u64 = 0xc4ceb9fe1a85ec53;
const MIX64_INV: u64 = inv_mul_u64(MIX64_MUL);
const MIX32_MUL: u32 = 0xab3be54f;
const MIX32_INV: u32 = inv_mul_u64(MIX32_MUL as u64) as u32;

#[inline]
fn unxorshift<W: Word>(z: W, shift: u32) -> W {
    let mut x = z;
    let mut covered = shift;
    while covered < W::BITS {
        x = W::from_u128(z.to_u128() ^ (x.to_u128() >> shift));
        covered += shift;
    }
    x
}

impl Finalizer for u64 {
    #[inline]
    fn mix(self) -> Self {
        let mut z = self;
        z ^= z >> 33;
        z = z.wrapping_mul(MIX64_MUL);
        z ^= z >> 33;
        z
    }
    fn unmix(self) -> Self {
        let z = unxorshift(self, 33);
        let z = z.wrapping_mul(MIX64_INV);
        unxorshift(z, 33)
    }
}

impl Finalizer for u32 {
    #[inline]
    fn mix(self) -> Self {
        let mut z = self;
        z ^= z >> 13;
        z = z.wrapping_mul(MIX32_MUL);
        z ^= z >> 16;
        z
    }
    fn unmix(self) -> Self {
        let z = unxorshift(self, 16);
        let z = z.wrapping_mul(MIX32_INV);
        unxorshift(z, 13)
    }
}

/// Streaming hasher over byte input.
///
/// `finalize` consumes the state, so double-finalization is ruled out at
/// the type level. A state is single-owner; the schedule it borrows is
/// immutable and freely shared.
pub struct Hasher<'k, W: Word + Finalizer> {
    stream: TreeStream<PmFamily<'k, W>>,
    partial: [u8; 8],
    partial_len: usize,
    total_words: u64,
}

impl<'k, W: Word + Finalizer> Hasher<'k, W> {
    pub fn new(schedule: &'k KeySchedule<W>) -> Self {
        Self {
            stream: TreeStream::new(PmFamily { schedule }),
            partial: [0; 8],
            partial_len: 0,
            total_words: 0,
        }
    }

    /// Maximum data words: m^L - 1 (one slot is reserved for the marker).
    pub fn max_words() -> u128 {
        (BLOCK_WIDTH as u128).pow(LEVELS as u32) - 1
    }

    fn word_bytes() -> usize {
        (W::BITS / 8) as usize
    }

    fn push_word(&mut self, w: W) {
        self.total_words += 1;
        self.stream.push_leaf(w);
    }

    pub fn update(&mut self, mut bytes: &[u8]) -> Result<(), HashError> {
        let wb = Self::word_bytes();
        let incoming_words =
            (self.partial_len + bytes.len()) / wb;
        if self.total_words as u128 + incoming_words as u128 > Self::max_words() {
            return Err(HashError::LengthExceeded(Self::max_words()));
        }
        if self.partial_len > 0 {
            let need = wb - self.partial_len;
            let take = need.min(bytes.len());
            self.partial[self.partial_len..self.partial_len + take]
                .copy_from_slice(&bytes[..take]);
            self.partial_len += take;
            bytes = &bytes[take..];
            if self.partial_len < wb {
                return Ok(());
            }
            let w = W::from_le(&self.partial[..wb]);
            self.partial_len = 0;
            self.push_word(w);
        }
        let mut chunks = bytes.chunks_exact(wb);
        for chunk in &mut chunks {
            self.push_word(W::from_le(chunk));
        }
        let rem = chunks.remainder();
        self.partial[..rem.len()].copy_from_slice(rem);
        self.partial_len = rem.len();
        Ok(())
    }

    /// Tree value in [0, p) before the final word reduction and mixing.
    pub fn finalize_tree(mut self) -> FieldElement<W> {
        let wb = Self::word_bytes();
        if self.partial_len > 0 {
            // 0x01 marker byte after the data, zeros to the word boundary.
            self.partial[self.partial_len] = 1;
            for b in &mut self.partial[self.partial_len + 1..wb] {
                *b = 0;
            }
            let w = W::from_le(&self.partial[..wb]);
            self.stream.push_leaf(w);
        } else {
            // Word-aligned input (including empty): a whole marker word.
            self.stream.push_leaf(W::ONE);
        }
        self.stream.finish()
    }

    /// Digest: tree value reduced mod 2^n, then mixed.
    pub fn finalize(self) -> W {
        self.finalize_tree().mod_word().mix()
    }
}

/// Convenience one-shot hash; identical to the streaming path.
pub fn hash_oneshot<W: Word + Finalizer>(
    schedule: &KeySchedule<W>,
    bytes: &[u8],
) -> Result<W, HashError> {
    let mut h = Hasher::new(schedule);
    h.update(bytes)?;
    Ok(h.finalize())
}

/// Fixed-width lowercase hex, most significant digit first.
pub fn digest_hex<W: Word>(digest: W) -> String {
    format!("{:0width$x}", digest, width = (W::BITS / 4) as usize)
}
