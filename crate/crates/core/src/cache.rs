//! Disk cache for Kloosterman tables, keyed by (s, p, format version).
//!
//! File layout (little-endian throughout):
//!
//! ```text
//! magic "KLSM" | version u32 | s u32 | p u64 | method u8 | max_abs_error f64
//! followed by p entries of interleaved (re f64, im f64)
//! ```
//!
//! Writes go through a temporary file and an atomic rename, so concurrent
//! writers of the same key are idempotent. Readers treat any mismatch or
//! truncation as a miss; the cache is advisory and corrupt files are simply
//! rebuilt.

use num_complex::Complex64;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::kloosterman::{Method, KloostermanTable};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: [u8; 4] = *b"KLSM";
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 1 + 8;

pub fn table_path(dir: &Path, s: u32, p: u64) -> PathBuf {
    dir.join(format!("k_s{s}_p{p}_v{FORMAT_VERSION}.klsm"))
}

pub fn write_table(dir: &Path, table: &KloostermanTable) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let final_path = table_path(dir, table.s, table.p);
    let tmp_path = dir.join(format!(
        "k_s{}_p{}_v{FORMAT_VERSION}.klsm.tmp.{}",
        table.s,
        table.p,
        std::process::id()
    ));
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * table.values.len());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&table.s.to_le_bytes());
    buf.extend_from_slice(&table.p.to_le_bytes());
    buf.push(match table.method {
        Method::Direct => 0,
        Method::Bulk => 1,
    });
    buf.extend_from_slice(&table.max_abs_error.to_le_bytes());
    for v in &table.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    {
        let mut f = fs::File::create(&tmp_path)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(&tmp_path, &final_path)?;
    Ok(final_path)
}

/// Load a cached table. Returns `None` when absent, truncated, or when any
/// header field disagrees with the requested key.
pub fn read_table(dir: &Path, s: u32, p: u64) -> Option<KloostermanTable> {
    let path = table_path(dir, s, p);
    let mut bytes = Vec::new();
    fs::File::open(&path).ok()?.read_to_end(&mut bytes).ok()?;
    if bytes.len() != HEADER_LEN + 16 * p as usize {
        return None;
    }
    if bytes[0..4] != MAGIC {
        return None;
    }
    let rd_u32 = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let rd_u64 = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let rd_f64 = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    if rd_u32(4) != FORMAT_VERSION || rd_u32(8) != s || rd_u64(12) != p {
        return None;
    }
    let method = match bytes[20] {
        0 => Method::Direct,
        1 => Method::Bulk,
        _ => return None,
    };
    let max_abs_error = rd_f64(21);
    let mut values = Vec::with_capacity(p as usize);
    let mut off = HEADER_LEN;
    for _ in 0..p {
        values.push(Complex64::new(rd_f64(off), rd_f64(off + 8)));
        off += 16;
    }
    Some(KloostermanTable { s, p, values, method, max_abs_error })
}

/// Remove every cache file under `dir`; returns how many were deleted.
pub fn clear(dir: &Path) -> std::io::Result<usize> {
    let mut removed = 0;
    if !dir.exists() {
        return Ok(0);
    }
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "klsm") {
            fs::remove_file(&path)?;
            removed += 1;
        }
    }
    Ok(removed)
}

/// Fetch from cache or compute and store. The boolean reports a cache hit.
pub fn bulk_cached(
    ctx: &crate::fields::PrimeFieldCtx,
    s: u32,
    dir: &Path,
) -> crate::error::Result<(KloostermanTable, bool)> {
    if let Some(t) = read_table(dir, s, ctx.p()) {
        return Ok((t, true));
    }
    let t = crate::kloosterman::bulk(ctx, s)?;
    write_table(dir, &t)?;
    Ok((t, false))
}
