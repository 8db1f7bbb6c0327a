//! Flat binary export of sampled kernels.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 8 | magic `JCKERN01` |
//! | 8 × 2 | `i64` first and last time node |
//! | 8 | `i64` spatial reach `R` |
//! | 8 × 6 | `f64` ε, 𝔢, `a`, `r` (as f64), `t0` (time of the first node), `dt` |
//! | 8 × M | `f64` values, time node outermost, then offsets `[-R, R]³` with axis 0 fastest |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{KernelError, Result, SpaceTimeKernel};

pub const EXPORT_MAGIC: [u8; 8] = *b"JCKERN01";

#[derive(Debug, Clone, PartialEq)]
pub struct KernelHeader {
    pub nodes: (i64, i64),
    pub reach: i64,
    pub eps: f64,
    pub e: f64,
    pub a: f64,
    pub r: i32,
    pub t0: f64,
    pub dt: f64,
}

impl KernelHeader {
    /// Number of values following the header.
    pub fn values(&self) -> usize {
        let side = (2 * self.reach + 1) as usize;
        (self.nodes.1 - self.nodes.0 + 1) as usize * side.pow(3)
    }
}

fn io(e: std::io::Error) -> KernelError {
    KernelError::Io(e.to_string())
}

pub fn export_kernel(k: &dyn SpaceTimeKernel, path: &Path) -> Result<KernelHeader> {
    let label = k.label();
    let nodes = k.node_range();
    let header = KernelHeader {
        nodes,
        reach: k.reach(),
        eps: k.eps(),
        e: label.e,
        a: label.a,
        r: label.r,
        t0: k.node_time(nodes.0),
        dt: k.dt(),
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(&EXPORT_MAGIC).map_err(io)?;
    for v in [nodes.0, nodes.1, header.reach] {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    for v in [header.eps, header.e, header.a, f64::from(header.r), header.t0, header.dt] {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    let r = header.reach;
    for i in nodes.0..=nodes.1 {
        for c in -r..=r {
            for b in -r..=r {
                for a in -r..=r {
                    w.write_all(&k.node_value(i, [a, b, c]).to_le_bytes()).map_err(io)?;
                }
            }
        }
    }
    w.flush().map_err(io)?;
    Ok(header)
}

fn read8(r: &mut impl Read) -> Result<[u8; 8]> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(io)?;
    Ok(b)
}

/// Read the header of an exported kernel and check the file length.
pub fn read_kernel_header(path: &Path) -> Result<KernelHeader> {
    let file = File::open(path).map_err(io)?;
    let len = file.metadata().map_err(io)?.len();
    let mut r = BufReader::new(file);
    if read8(&mut r)? != EXPORT_MAGIC {
        return Err(KernelError::Io(format!("{}: not a kernel export", path.display())));
    }
    let mut ints = [0i64; 3];
    for v in ints.iter_mut() {
        *v = i64::from_le_bytes(read8(&mut r)?);
    }
    let mut fl = [0f64; 6];
    for v in fl.iter_mut() {
        *v = f64::from_le_bytes(read8(&mut r)?);
    }
    let header = KernelHeader {
        nodes: (ints[0], ints[1]),
        reach: ints[2],
        eps: fl[0],
        e: fl[1],
        a: fl[2],
        r: fl[3] as i32,
        t0: fl[4],
        dt: fl[5],
    };
    if ints[1] < ints[0] || ints[2] < 0 || len != 80 + 8 * header.values() as u64 {
        return Err(KernelError::Io(format!("{}: truncated or inconsistent export", path.display())));
    }
    Ok(header)
}
