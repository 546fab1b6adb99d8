//! Flat-binary distribution snapshots and CSV moment exports.
//!
//! Snapshot layout, all little-endian: the magic `LWDF`, a format version,
//! the scaling parameter, the spatial axes (count, then points and length
//! per axis), the velocity axes (count, then points and bounds per axis),
//! then the distribution values as f64 in C order with spatial axes
//! leading. Values are stored at f64 width regardless of the in-memory
//! scalar type.

use crate::error::{CoreError, Result};
use crate::phasespace::{DistributionField, MomentSet, PhaseGrid, VelocityAxis};
use crate::grid::TorusGrid;
use crate::scalar::Real;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"LWDF";
const VERSION: u32 = 1;

fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn write_snapshot<T: Real>(
    path: impl AsRef<Path>,
    f: &DistributionField<T>,
    eps: T,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    put_u32(&mut w, VERSION)?;
    put_f64(&mut w, eps.to_f64())?;
    let grid = f.grid();
    put_u32(&mut w, grid.space.ndim() as u32)?;
    for a in 0..grid.space.ndim() {
        put_u64(&mut w, grid.space.len(a) as u64)?;
        put_f64(&mut w, grid.space.length(a).to_f64())?;
    }
    put_u32(&mut w, grid.ndim_v() as u32)?;
    for v in &grid.velocity {
        put_u64(&mut w, v.n as u64)?;
        put_f64(&mut w, v.min.to_f64())?;
        put_f64(&mut w, v.max.to_f64())?;
    }
    for v in f.values().iter() {
        put_f64(&mut w, (*v).to_f64())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot<T: Real>(path: impl AsRef<Path>) -> Result<(DistributionField<T>, T)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoreError::Invalid("not a distribution snapshot".into()));
    }
    let version = get_u32(&mut r)?;
    if version != VERSION {
        return Err(CoreError::Invalid(format!(
            "snapshot format version {version}, expected {VERSION}"
        )));
    }
    let eps = T::of(get_f64(&mut r)?);
    let dx = get_u32(&mut r)? as usize;
    let mut axes = Vec::with_capacity(dx);
    for _ in 0..dx {
        let n = get_u64(&mut r)? as usize;
        let len = T::of(get_f64(&mut r)?);
        axes.push((n, len));
    }
    let space = TorusGrid::new(&axes)?;
    let dv = get_u32(&mut r)? as usize;
    let mut velocity = Vec::with_capacity(dv);
    for _ in 0..dv {
        let n = get_u64(&mut r)? as usize;
        let min = T::of(get_f64(&mut r)?);
        let max = T::of(get_f64(&mut r)?);
        velocity.push(VelocityAxis::new(n, min, max)?);
    }
    let grid = PhaseGrid::new(space, velocity)?;
    let mut f = DistributionField::zeros(&grid);
    for v in f.values_mut().iter_mut() {
        *v = T::of(get_f64(&mut r)?);
    }
    Ok((f, eps))
}

/// Moments as CSV: one row per spatial node carrying its coordinates,
/// the density, and the per-axis current and second-moment values.
pub fn write_moments_csv<T: Real>(path: impl AsRef<Path>, m: &MomentSet<T>) -> Result<()> {
    let grid = m.rho.grid();
    let dx = grid.ndim();
    let d = m.current.len();
    let mut w = BufWriter::new(File::create(path)?);
    let mut header: Vec<String> = (0..dx).map(|a| format!("x{}", a + 1)).collect();
    header.push("rho".into());
    for a in 0..d {
        header.push(format!("j{}", a + 1));
    }
    for a in 0..d {
        header.push(format!("s{}", a + 1));
    }
    writeln!(w, "{}", header.join(","))?;
    let nodes: Vec<Vec<T>> = (0..dx).map(|a| grid.nodes(a)).collect();
    let shape: Vec<usize> = (0..dx).map(|a| grid.len(a)).collect();
    let total = grid.total_points();
    let mut idx = vec![0usize; dx];
    for flat in 0..total {
        let mut rem = flat;
        for a in (0..dx).rev() {
            idx[a] = rem % shape[a];
            rem /= shape[a];
        }
        let mut row: Vec<String> = (0..dx).map(|a| format!("{:.17e}", nodes[a][idx[a]].to_f64())).collect();
        row.push(format!("{:.17e}", m.rho.as_slice()[flat].to_f64()));
        for a in 0..d {
            row.push(format!("{:.17e}", m.current[a].as_slice()[flat].to_f64()));
        }
        for a in 0..d {
            row.push(format!("{:.17e}", m.second[a].as_slice()[flat].to_f64()));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::moments;

    fn sample_field() -> DistributionField<f64> {
        let space = TorusGrid::line_2pi(16).unwrap();
        let vel = vec![VelocityAxis::new(24, -3.0, 3.0).unwrap()];
        let grid = PhaseGrid::new(space, vel).unwrap();
        DistributionField::from_fn(&grid, |x, v| {
            (1.0 + 0.4 * x[0].cos()) * (-(v[0] - 0.1).powi(2) / 0.3).exp()
        })
    }

    #[test]
    fn snapshot_roundtrip_is_exact() {
        let f = sample_field();
        let dir = std::env::temp_dir().join("lw_io_test_rt");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("snap.lwdf");
        write_snapshot(&path, &f, 0.05).unwrap();
        let (g, eps): (DistributionField<f64>, f64) = read_snapshot(&path).unwrap();
        assert_eq!(eps, 0.05);
        assert_eq!(g.grid(), f.grid());
        assert_eq!(
            f.values().as_slice().unwrap(),
            g.values().as_slice().unwrap()
        );
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn corrupt_magic_is_rejected() {
        let dir = std::env::temp_dir().join("lw_io_test_bad");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.lwdf");
        std::fs::write(&path, b"NOPE0000000000000000").unwrap();
        assert!(read_snapshot::<f64>(&path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn moments_csv_has_one_row_per_node_and_parses_back() {
        let f = sample_field();
        let m = moments(&f);
        let dir = std::env::temp_dir().join("lw_io_test_csv");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("moments.csv");
        write_moments_csv(&path, &m).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[0], "x1,rho,j1,s1");
        let first: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(first[1], m.rho.as_slice()[0]);
        std::fs::remove_dir_all(&dir).ok();
    }
}
