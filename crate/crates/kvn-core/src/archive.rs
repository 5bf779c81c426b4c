//! Binary archive for estimated generator matrices.
//!
//! Layout: magic string `KVNGEN1`, a little-endian u64 header length, a JSON
//! header, then row-major binary64 (little-endian) blocks for G, A, C, L,
//! Lstar, Q, T, Qt, and the KvN cross matrix B, in that order. C and B are
//! written as zeros with `has_kvn_blocks: false` when the assembly path could
//! not form them (trajectory data).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KvnError, Result};
use crate::estimator::{GeneratorMatrices, WhitenedRepresentation};

pub const MAGIC: &[u8; 7] = b"KVNGEN1";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveHeader {
    pub version: u32,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub basis: String,
    pub system: String,
    pub truncation: f64,
    pub has_kvn_blocks: bool,
}

fn write_block<W: Write>(w: &mut W, m: &Array2<f64>) -> Result<()> {
    for v in m.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Serializes the generator matrices and whitened representation.
pub fn save_matrices(
    gen: &GeneratorMatrices,
    white: &WhitenedRepresentation,
    basis: &str,
    system: &str,
    path: &Path,
) -> Result<()> {
    let n = gen.size();
    let k = white.rank();
    let header = ArchiveHeader {
        version: VERSION,
        n,
        k,
        m: gen.sample_count,
        basis: basis.to_string(),
        system: system.to_string(),
        truncation: gen.truncation,
        has_kvn_blocks: gen.c.is_some() && gen.b_cross.is_some(),
    };
    let header_bytes = serde_json::to_vec(&header)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(header_bytes.len() as u64).to_le_bytes())?;
    w.write_all(&header_bytes)?;
    let zeros = Array2::zeros((n, n));
    write_block(&mut w, &gen.g)?;
    write_block(&mut w, &gen.a)?;
    write_block(&mut w, gen.c.as_ref().unwrap_or(&zeros))?;
    write_block(&mut w, &gen.l)?;
    write_block(&mut w, &gen.lstar)?;
    write_block(&mut w, &gen.q)?;
    write_block(&mut w, &white.t)?;
    write_block(&mut w, &white.qt)?;
    write_block(&mut w, gen.b_cross.as_ref().unwrap_or(&zeros))?;
    w.flush()?;
    Ok(())
}

struct Cursor<R> {
    reader: R,
    offset: u64,
}

impl<R: Read> Cursor<R> {
    fn read_exact(&mut self, buf: &mut [u8], what: &str) -> Result<()> {
        match self.reader.read_exact(buf) {
            Ok(()) => {
                self.offset += buf.len() as u64;
                Ok(())
            }
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Err(KvnError::Parse {
                offset: self.offset,
                reason: format!("truncated file while reading {what}"),
            }),
            Err(e) => Err(e.into()),
        }
    }

    fn read_block(&mut self, rows: usize, cols: usize, what: &str) -> Result<Array2<f64>> {
        let mut buf = vec![0u8; rows * cols * 8];
        self.read_exact(&mut buf, what)?;
        let data: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Array2::from_shape_vec((rows, cols), data).map_err(|e| KvnError::Parse {
            offset: self.offset,
            reason: format!("bad {what} shape: {e}"),
        })
    }
}

/// Reads an archive back; the round trip through save/load is binary64 exact.
pub fn load_matrices(
    path: &Path,
) -> Result<(GeneratorMatrices, WhitenedRepresentation, ArchiveHeader)> {
    let mut cur = Cursor { reader: BufReader::new(File::open(path)?), offset: 0 };
    let mut magic = [0u8; 7];
    cur.read_exact(&mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(KvnError::Parse {
            offset: 0,
            reason: format!("bad magic {:?}", String::from_utf8_lossy(&magic)),
        });
    }
    let mut len_bytes = [0u8; 8];
    cur.read_exact(&mut len_bytes, "header length")?;
    let header_len = u64::from_le_bytes(len_bytes) as usize;
    if header_len > 1 << 20 {
        return Err(KvnError::Parse {
            offset: 7,
            reason: format!("implausible header length {header_len}"),
        });
    }
    let mut header_bytes = vec![0u8; header_len];
    let header_offset = cur.offset;
    cur.read_exact(&mut header_bytes, "header")?;
    let header: ArchiveHeader =
        serde_json::from_slice(&header_bytes).map_err(|e| KvnError::Parse {
            offset: header_offset,
            reason: format!("header json: {e}"),
        })?;
    if header.version != VERSION {
        return Err(KvnError::VersionMismatch { found: header.version, expected: VERSION });
    }
    let (n, k) = (header.n, header.k);
    let g = cur.read_block(n, n, "G")?;
    let a = cur.read_block(n, n, "A")?;
    let c = cur.read_block(n, n, "C")?;
    let l = cur.read_block(n, n, "L")?;
    let lstar = cur.read_block(n, n, "Lstar")?;
    let q = cur.read_block(n, n, "Q")?;
    let t = cur.read_block(n, k, "T")?;
    let qt = cur.read_block(k, k, "Qt")?;
    let b = cur.read_block(n, n, "B")?;
    let (c, b) = if header.has_kvn_blocks {
        (Some(c), Some(b))
    } else {
        (None, None)
    };
    let gen = GeneratorMatrices::from_stored(
        g,
        a,
        b,
        c,
        l,
        lstar,
        q,
        k,
        header.truncation,
        header.m,
    )?;
    let white = WhitenedRepresentation::from_stored(t, qt, header.truncation);
    Ok((gen, white, header))
}
