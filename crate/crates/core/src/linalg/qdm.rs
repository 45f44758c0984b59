//! `QDM1` binary density-matrix files.
//!
//! Layout: magic `QDM1`, `n_a` and `n_b` as u32 LE, then `4^(n_a+n_b)`
//! complex entries as (re, im) f64 LE pairs in row-major order. `n_b = 0`
//! encodes an unsplit register.

use std::io::{Read, Write};
use std::path::Path;

use super::{Bipartition, CMatrix, DensityOperator, C64, MAX_QUBITS};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"QDM1";

pub fn write_qdm<W: Write>(mut w: W, rho: &DensityOperator) -> Result<()> {
    let bip = rho.bipartition();
    w.write_all(MAGIC)?;
    w.write_all(&(bip.n_a() as u32).to_le_bytes())?;
    w.write_all(&(bip.n_b() as u32).to_le_bytes())?;
    let m = rho.matrix();
    let d = m.nrows();
    let mut buf = Vec::with_capacity(16 * d);
    for r in 0..d {
        buf.clear();
        for c in 0..d {
            let z = m[(r, c)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| Error::Format("truncated QDM1 header".into()))?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_qdm<R: Read>(mut r: R) -> Result<DensityOperator> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| Error::Format("file too short for QDM1 magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}, expected QDM1", String::from_utf8_lossy(&magic))));
    }
    let n_a = read_u32(&mut r)? as usize;
    let n_b = read_u32(&mut r)? as usize;
    if n_a + n_b > MAX_QUBITS || n_a == 0 {
        return Err(Error::Format(format!("unsupported register n_a={n_a}, n_b={n_b}")));
    }
    let bip = if n_b == 0 { Bipartition::unsplit(n_a)? } else { Bipartition::new(n_a, n_b)? };
    let d = bip.dim();
    let mut bytes = vec![0u8; 16 * d * d];
    r.read_exact(&mut bytes)
        .map_err(|_| Error::Format(format!("expected {} matrix entries for {n_a}+{n_b} qubits", d * d)))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after QDM1 payload".into()));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
    let m = CMatrix::from_fn(d, d, |row, col| {
        let k = 2 * (row * d + col);
        C64::new(f(k), f(k + 1))
    });
    DensityOperator::new(bip, m)
}

pub fn save_qdm(path: impl AsRef<Path>, rho: &DensityOperator) -> Result<()> {
    crate::io::write_atomic(path, |w| write_qdm(w, rho))
}

pub fn load_qdm(path: impl AsRef<Path>) -> Result<DensityOperator> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| crate::io::with_path(e, path))?;
    read_qdm(std::io::BufReader::new(file))
}
