//! Almost-delta-universal, component-wise-regular hashing over
//! pseudo+Mersenne prime fields p = 2^n + k, in 32-bit and 64-bit
//! variants.
//!
//! The block primitive is the multilinear form (b + sum a_i*s_i) mod p
//! with multipliers restricted so every product fits two machine words;
//! arbitrary-length byte strings are hashed by folding blocks through a
//! fixed-height tree with bounded streaming memory, reducing mod 2^n and
//! applying an invertible bit-mixing step. The crate also ships the key
//! schedule file format, a brute-force arbitrary-precision oracle over
//! arbitrary small primes of the same shape, and a statistical quality
//! suite.
//!
//! ```
//! use pmplus::{keygen, tree};
//!
//! let schedule = keygen::generate_seeded::<u64>(42);
//! let digest = tree::hash_oneshot(&schedule, b"hello").unwrap();
//! println!("{}", tree::digest_hex(digest));
//! ```

pub mod arith;
pub mod block;
pub mod keygen;
pub mod quality;
pub mod toy;
pub mod tree;

pub use arith::{FieldElement, TripleAccumulator, Word, BLOCK_WIDTH};
pub use block::BlockKeys;
pub use tree::{digest_hex, hash_oneshot, Finalizer, HashError, Hasher, KeySchedule, LEVELS};
