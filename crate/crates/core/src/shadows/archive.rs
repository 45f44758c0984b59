//! `QSH1` shadow archives.
//!
//! Layout (little endian): magic `QSH1`, u32 register size, u32 ensemble tag,
//! u64 snapshot count, then per snapshot a u32 source index, one basis byte per
//! qubit (zero for global snapshots) and the outcomes packed LSB-first into
//! `ceil(n/8)` bytes. The master seed is not stored, so global archives need it
//! supplied again on read.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use super::{Basis, Ensemble, Shadow, Snapshot};
use crate::error::{Error, Result};
use crate::linalg::MAX_QUBITS;

pub const MAGIC: &[u8; 4] = b"QSH1";

pub fn write_qsh<W: Write>(shadow: &Shadow, mut w: W) -> Result<()> {
    let n = shadow.n_qubits;
    w.write_all(MAGIC)?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&shadow.ensemble.tag().to_le_bytes())?;
    w.write_all(&(shadow.len() as u64).to_le_bytes())?;
    let mut packed = vec![0u8; n.div_ceil(8)];
    for s in &shadow.snapshots {
        w.write_all(&s.source_index.to_le_bytes())?;
        match shadow.ensemble {
            Ensemble::Pauli => {
                let codes: Vec<u8> = s.bases.iter().map(|b| b.code()).collect();
                w.write_all(&codes)?;
            }
            Ensemble::Global => w.write_all(&vec![0u8; n])?,
        }
        packed.fill(0);
        for (k, &bit) in s.outcomes.iter().enumerate() {
            packed[k / 8] |= (bit & 1) << (k % 8);
        }
        w.write_all(&packed)?;
    }
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format(format!("truncated QSH1 archive ({what})")),
        _ => Error::Io(e),
    })
}

/// Parse an archive. `seed` becomes the shadow's master seed.
pub fn read_qsh<R: Read>(mut r: R, seed: u64) -> Result<Shadow> {
    let mut head = [0u8; 20];
    read_exact(&mut r, &mut head, "header")?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("bad magic, expected QSH1".into()));
    }
    let n = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Format(format!("register size {n} out of range")));
    }
    let ensemble = Ensemble::from_tag(u32::from_le_bytes(head[8..12].try_into().unwrap()))
        .map_err(|_| Error::Format("unknown ensemble tag".into()))?;
    let count = u64::from_le_bytes(head[12..20].try_into().unwrap());
    let nbytes = n.div_ceil(8);
    let mut rec = vec![0u8; 4 + n + nbytes];
    let mut snapshots = Vec::with_capacity(count.min(1 << 20) as usize);
    for i in 0..count {
        read_exact(&mut r, &mut rec, &format!("snapshot {i}"))?;
        let source_index = u32::from_le_bytes(rec[..4].try_into().unwrap());
        let codes = &rec[4..4 + n];
        let bases = match ensemble {
            Ensemble::Pauli => codes
                .iter()
                .map(|&c| Basis::from_code(c).map_err(|_| Error::Format(format!("bad basis byte {c}"))))
                .collect::<Result<Vec<_>>>()?,
            Ensemble::Global => Vec::new(),
        };
        let packed = &rec[4 + n..];
        let outcomes: Vec<u8> = (0..n).map(|k| (packed[k / 8] >> (k % 8)) & 1).collect();
        if (n..nbytes * 8).any(|k| (packed[k / 8] >> (k % 8)) & 1 != 0) {
            return Err(Error::Format(format!("snapshot {i}: padding bits set")));
        }
        snapshots.push(Snapshot { source_index, bases, outcomes });
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after QSH1 payload".into()));
    }
    Ok(Shadow { n_qubits: n, ensemble, seed, snapshots })
}

pub fn save_qsh(shadow: &Shadow, path: &Path) -> Result<()> {
    crate::io::write_atomic(path, |w| write_qsh(shadow, w))
}

pub fn load_qsh(path: &Path, seed: u64) -> Result<Shadow> {
    let file = File::open(path).map_err(|e| crate::io::with_path(e, path))?;
    read_qsh(BufReader::new(file), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Bipartition, DensityOperator};
    use crate::shadows::{simulate, SourceSequence};

    fn source(n: usize) -> SourceSequence {
        let bip = Bipartition::new(n / 2, n - n / 2).unwrap();
        SourceSequence::Constant(DensityOperator::maximally_mixed(bip))
    }

    #[test]
    fn round_trip_both_ensembles() {
        for (n, ens) in [(3, Ensemble::Pauli), (9, Ensemble::Pauli), (2, Ensemble::Global)] {
            let shadow = simulate(&source(n), 40, ens, 17).unwrap();
            let mut buf = Vec::new();
            write_qsh(&shadow, &mut buf).unwrap();
            assert_eq!(buf.len(), 20 + 40 * (4 + n + n.div_ceil(8)));
            assert_eq!(read_qsh(&buf[..], 17).unwrap(), shadow);
        }
    }

    #[test]
    fn rejects_malformed() {
        let shadow = simulate(&source(3), 5, Ensemble::Pauli, 1).unwrap();
        let mut buf = Vec::new();
        write_qsh(&shadow, &mut buf).unwrap();
        assert!(matches!(read_qsh(&buf[..buf.len() - 1], 1), Err(Error::Format(_))));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(read_qsh(&long[..], 1), Err(Error::Format(_))));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_qsh(&bad[..], 1), Err(Error::Format(_))));
        let mut bad = buf.clone();
        bad[24] = 7;
        assert!(matches!(read_qsh(&bad[..], 1), Err(Error::Format(_))));
        let mut bad = buf;
        bad[27] |= 0x80;
        assert!(matches!(read_qsh(&bad[..], 1), Err(Error::Format(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.qsh");
        let shadow = simulate(&source(4), 10, Ensemble::Pauli, 3).unwrap();
        save_qsh(&shadow, &path).unwrap();
        assert_eq!(load_qsh(&path, 3).unwrap(), shadow);
    }
}
