//! Lossy re-encoding of an existing bit array for cheap storage or
//! shipment: the array is cut into `bp` blocks of `nb` bits and each block
//! becomes one `w`-bit code (`w < nb`). Sparse and a few lucky dense blocks
//! survive exactly; heavily loaded blocks round up to all-ones (adding only
//! false positives), and awkward middling blocks keep a single randomly
//! chosen bit (introducing false negatives). The code ranges are disjoint,
//! so decoding needs no side information.
//!
//! Codes, for a block of `nb` bits with integer value `V` (bit i weighs
//! 2^i) and `ones` set bits:
//!
//! | code            | meaning                         |
//! |-----------------|---------------------------------|
//! | `0`             | empty block                     |
//! | `1..=nb`        | single set bit at `code - 1`    |
//! | `nb+1..=2^w-2`  | the block's value `V`, verbatim |
//! | `2^w-1`         | every bit set                   |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::api::FilterError;
use crate::bits::BitVector;
use crate::support::invalid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BlockRule {
    /// No set bits: code 0, exact.
    Empty,
    /// One set bit: its 1-based position, exact.
    Single,
    /// Value fits strictly between `nb` and `2^w - 1`: stored as-is, exact.
    Verbatim,
    /// Half or more bits set: round up to all-ones (false positives only).
    Saturate,
    /// Anything else: keep one randomly chosen set bit (false negatives).
    Sample,
}

fn classify(set_positions: &[usize], nb: u16, w: u8) -> BlockRule {
    match set_positions.len() {
        0 => return BlockRule::Empty,
        1 => return BlockRule::Single,
        _ => {}
    }
    if let Some(value) = block_value(set_positions) {
        if u64::from(nb) < value && value < top_code(w) {
            return BlockRule::Verbatim;
        }
    }
    if 2 * set_positions.len() >= usize::from(nb) {
        BlockRule::Saturate
    } else {
        BlockRule::Sample
    }
}

/// The block's bits as an integer, when that integer fits 63 bits.
fn block_value(set_positions: &[usize]) -> Option<u64> {
    if set_positions.iter().any(|&p| p >= 63) {
        return None;
    }
    Some(set_positions.iter().map(|&p| 1u64 << p).sum())
}

fn top_code(w: u8) -> u64 {
    (1u64 << w) - 1
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompactedBitArray {
    nb: u16,
    w: u8,
    /// One `w`-bit code per block.
    codes: Vec<u64>,
}

fn check_geometry(nb: u16, w: u8) -> Result<(), FilterError> {
    if !(2..=32).contains(&w) {
        return Err(invalid("w", "code width must lie in 2..=32"));
    }
    if u64::from(nb) <= u64::from(w) {
        return Err(invalid("nb", "blocks must be wider than their codes"));
    }
    if u64::from(nb) > top_code(w) - 1 {
        return Err(invalid(
            "nb",
            "single-bit codes 1..=nb must stay below the all-ones code",
        ));
    }
    Ok(())
}

impl CompactedBitArray {
    /// Re-encodes `bits` (whose length must be a whole number of `nb`-bit
    /// blocks) into `w`-bit codes. `seed` drives only the choice of which
    /// bit survives in sampled blocks.
    pub fn compress(bits: &BitVector, nb: u16, w: u8, seed: u64) -> Result<Self, FilterError> {
        check_geometry(nb, w)?;
        if bits.is_empty() || bits.len() % usize::from(nb) != 0 {
            return Err(invalid(
                "bits",
                "input length must be a positive multiple of the block size",
            ));
        }
        let bp = bits.len() / usize::from(nb);
        if bp > u32::MAX as usize {
            return Err(invalid("bits", "too many blocks for the wire header"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut codes = Vec::with_capacity(bp);
        for block in 0..bp {
            let base = block * usize::from(nb);
            let set: Vec<usize> = (0..usize::from(nb))
                .filter(|&i| bits.get(base + i))
                .collect();
            let code = match classify(&set, nb, w) {
                BlockRule::Empty => 0,
                BlockRule::Single => set[0] as u64 + 1,
                BlockRule::Verbatim => block_value(&set).expect("verbatim blocks have a value"),
                BlockRule::Saturate => top_code(w),
                BlockRule::Sample => set[rng.gen_range(0..set.len())] as u64 + 1,
            };
            codes.push(code);
        }
        Ok(CompactedBitArray { nb, w, codes })
    }

    pub fn nb(&self) -> u16 {
        self.nb
    }

    pub fn w(&self) -> u8 {
        self.w
    }

    /// Number of blocks.
    pub fn bp(&self) -> u32 {
        self.codes.len() as u32
    }

    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    /// Expands back to a full bit array of `nb * bp` bits.
    pub fn decode(&self) -> BitVector {
        let nb = usize::from(self.nb);
        let mut bits = BitVector::new(nb * self.codes.len());
        for (block, &code) in self.codes.iter().enumerate() {
            let base = block * nb;
            if code == 0 {
                continue;
            }
            if code <= u64::from(self.nb) {
                bits.set(base + (code - 1) as usize);
            } else if code == top_code(self.w) {
                for i in 0..nb {
                    bits.set(base + i);
                }
            } else {
                for i in 0..63.min(nb) {
                    if code >> i & 1 == 1 {
                        bits.set(base + i);
                    }
                }
            }
        }
        bits
    }

    /// Serializes as `[w: 1 byte][nb: 2 bytes LE][bp: 4 bytes LE]` followed
    /// by the codes packed `w` bits each, least-significant bit first
    /// within a little-endian bit stream (stream bit j lives in byte `j/8`,
    /// bit `j%8`).
    pub fn to_bytes(&self) -> Vec<u8> {
        let total_bits = self.codes.len() * usize::from(self.w);
        let mut out = vec![0u8; 7 + total_bits.div_ceil(8)];
        out[0] = self.w;
        out[1..3].copy_from_slice(&self.nb.to_le_bytes());
        out[3..7].copy_from_slice(&self.bp().to_le_bytes());
        for (block, &code) in self.codes.iter().enumerate() {
            for i in 0..usize::from(self.w) {
                if code >> i & 1 == 1 {
                    let j = block * usize::from(self.w) + i;
                    out[7 + j / 8] |= 1 << (j % 8);
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FilterError> {
        let fail = |offset: usize, reason: &str| FilterError::Format {
            offset,
            reason: reason.to_string(),
        };
        if bytes.len() < 7 {
            return Err(fail(bytes.len(), "header needs 7 bytes"));
        }
        let w = bytes[0];
        let nb = u16::from_le_bytes([bytes[1], bytes[2]]);
        let bp = u32::from_le_bytes([bytes[3], bytes[4], bytes[5], bytes[6]]) as usize;
        check_geometry(nb, w).map_err(|_| fail(0, "inconsistent block and code widths"))?;
        if bp == 0 {
            return Err(fail(3, "at least one block is required"));
        }
        let total_bits = bp
            .checked_mul(usize::from(w))
            .ok_or_else(|| fail(3, "code stream size overflows"))?;
        let expected = 7 + total_bits.div_ceil(8);
        if bytes.len() != expected {
            return Err(fail(bytes.len().min(expected), "payload length mismatch"));
        }
        let mut codes = Vec::with_capacity(bp);
        for block in 0..bp {
            let mut code = 0u64;
            for i in 0..usize::from(w) {
                let j = block * usize::from(w) + i;
                if bytes[7 + j / 8] >> (j % 8) & 1 == 1 {
                    code |= 1 << i;
                }
            }
            codes.push(code);
        }
        // padding bits beyond the last code must be zero
        for j in total_bits..(bytes.len() - 7) * 8 {
            if bytes[7 + j / 8] >> (j % 8) & 1 == 1 {
                return Err(fail(7 + j / 8, "nonzero padding after the code stream"));
            }
        }
        Ok(CompactedBitArray { nb, w, codes })
    }
}
