//! On-disk filter container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset 0   magic "BFSK" (4 bytes)
//! offset 4   format version (1 byte, currently 1)
//! offset 5   variant tag (1 byte: position in the canonical variant list)
//! offset 6   params length (u32) followed by that many bytes of JSON
//!            holding the full descriptor (variant, geometry, seed)
//! then       word count (u64) followed by that many u64 payload words,
//!            exactly the filter's snapshot state
//! ```
//!
//! Every parse error names the byte offset it failed at, and a failed load
//! never returns a partial filter.

use std::path::Path;

use bfsk::api::params::FilterDescriptor;
use bfsk::api::{FilterError, MembershipFilter, Variant, ALL_VARIANTS};

use crate::construct::construct;
use crate::error::CliError;

pub const MAGIC: [u8; 4] = *b"BFSK";
pub const VERSION: u8 = 1;

/// Stable one-byte tag: the variant's position in the canonical list.
pub fn variant_tag(variant: Variant) -> u8 {
    ALL_VARIANTS
        .iter()
        .position(|v| *v == variant)
        .expect("every variant appears in the canonical list") as u8
}

fn format_error(offset: usize, reason: impl Into<String>) -> CliError {
    CliError::Filter(FilterError::Format {
        offset,
        reason: reason.into(),
    })
}

pub fn save_bytes(filter: &dyn MembershipFilter) -> Result<Vec<u8>, CliError> {
    let descriptor = filter.descriptor();
    let words = filter.state_words()?;
    let params = serde_json::to_vec(&descriptor)?;
    let params_len = u32::try_from(params.len())
        .map_err(|_| format_error(6, "params block exceeds u32 length"))?;

    let mut out = Vec::with_capacity(4 + 1 + 1 + 4 + params.len() + 8 + 8 * words.len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(variant_tag(descriptor.variant()));
    out.extend_from_slice(&params_len.to_le_bytes());
    out.extend_from_slice(&params);
    out.extend_from_slice(&(words.len() as u64).to_le_bytes());
    for word in &words {
        out.extend_from_slice(&word.to_le_bytes());
    }
    Ok(out)
}

/// Byte cursor that reports the offset of whatever is missing or malformed.
struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], CliError> {
        if self.bytes.len() - self.at < n {
            return Err(format_error(
                self.at,
                format!("truncated: need {n} bytes for {what}, have {}", self.bytes.len() - self.at),
            ));
        }
        let slice = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(slice)
    }
}

pub fn load_bytes(bytes: &[u8]) -> Result<Box<dyn MembershipFilter>, CliError> {
    let mut cur = Cursor { bytes, at: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(format_error(0, format!("bad magic {magic:02x?}, expected \"BFSK\"")));
    }
    let version = cur.take(1, "version")?[0];
    if version != VERSION {
        return Err(format_error(4, format!("unsupported version {version}, expected {VERSION}")));
    }
    let tag = cur.take(1, "variant tag")?[0];
    if usize::from(tag) >= ALL_VARIANTS.len() {
        return Err(format_error(5, format!("variant tag {tag} out of range")));
    }

    let params_offset = cur.at;
    let params_len = u32::from_le_bytes(cur.take(4, "params length")?.try_into().unwrap());
    let params = cur.take(params_len as usize, "params block")?;
    let descriptor: FilterDescriptor = serde_json::from_slice(params)
        .map_err(|e| format_error(params_offset + 4, format!("params block: {e}")))?;
    let declared = ALL_VARIANTS[usize::from(tag)];
    if descriptor.variant() != declared {
        return Err(format_error(
            params_offset + 4,
            format!(
                "variant tag says {} but params describe {}",
                declared.name(),
                descriptor.variant().name()
            ),
        ));
    }

    let count_offset = cur.at;
    let count = u64::from_le_bytes(cur.take(8, "word count")?.try_into().unwrap());
    let payload_len = usize::try_from(count)
        .ok()
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| format_error(count_offset, "word count does not fit in memory"))?;
    let payload_offset = cur.at;
    let payload = cur.take(payload_len, "payload words")?;
    if cur.at != bytes.len() {
        return Err(format_error(
            cur.at,
            format!("{} trailing bytes after payload", bytes.len() - cur.at),
        ));
    }
    let words: Vec<u64> = payload
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let mut filter = construct(&descriptor)?;
    filter
        .load_state(&words)
        .map_err(|e| format_error(payload_offset, format!("payload rejected: {e}")))?;
    Ok(filter)
}

pub fn save_file(filter: &dyn MembershipFilter, path: &Path) -> Result<(), CliError> {
    let bytes = save_bytes(filter)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn load_file(path: &Path) -> Result<Box<dyn MembershipFilter>, CliError> {
    let bytes = std::fs::read(path)?;
    load_bytes(&bytes)
}
