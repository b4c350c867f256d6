//! Flat binary and CSV export of grid data and point clouds.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic   8 bytes  "FPPGRID1"
//! kind    u32      0 = field, 1 = density/colouring, 2 = travel times
//! dim     u32
//! spacing f64
//! origin  dim × f64
//! extents dim × u64
//! values  (Π extents) × f64, row-major, last axis fastest
//! ```
//!
//! Travel times are non-negative, so `+inf` (unreachable) is stored as the
//! sentinel `-1.0`; the CSV form writes `inf`.

use std::io::{Read, Write};

use crate::colourings::{Colouring, PointCloud};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::metric::TimeField;

pub const MAGIC: &[u8; 8] = b"FPPGRID1";
pub const UNREACHABLE_SENTINEL: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum GridKind {
    Field = 0,
    Density = 1,
    Time = 2,
}

/// Anything with one value per grid node.
pub trait NodeData {
    fn kind(&self) -> GridKind;
    fn grid(&self) -> &GridSpec;
    fn node_values(&self) -> &[f64];
}

impl NodeData for ScalarField {
    fn kind(&self) -> GridKind {
        GridKind::Field
    }
    fn grid(&self) -> &GridSpec {
        ScalarField::grid(self)
    }
    fn node_values(&self) -> &[f64] {
        self.values()
    }
}

impl NodeData for Colouring {
    fn kind(&self) -> GridKind {
        GridKind::Density
    }
    fn grid(&self) -> &GridSpec {
        Colouring::grid(self)
    }
    fn node_values(&self) -> &[f64] {
        self.density()
    }
}

impl NodeData for TimeField {
    fn kind(&self) -> GridKind {
        GridKind::Time
    }
    fn grid(&self) -> &GridSpec {
        TimeField::grid(self)
    }
    fn node_values(&self) -> &[f64] {
        self.times()
    }
}

pub fn write_binary<W: Write>(mut w: W, data: &impl NodeData) -> Result<()> {
    let g = data.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(data.kind() as u32).to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&g.spacing().to_le_bytes())?;
    for o in g.origin() {
        w.write_all(&o.to_le_bytes())?;
    }
    for &e in g.extents() {
        w.write_all(&(e as u64).to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(8 * data.node_values().len());
    for &v in data.node_values() {
        let v = if v == f64::INFINITY { UNREACHABLE_SENTINEL } else { v };
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a binary grid file back; time sentinels are restored to `+inf`.
pub fn read_binary<R: Read>(mut r: R) -> Result<(GridKind, GridSpec, Vec<f64>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut u4 = [0u8; 4];
    let mut u8b = [0u8; 8];
    r.read_exact(&mut u4)?;
    let kind = match u32::from_le_bytes(u4) {
        0 => GridKind::Field,
        1 => GridKind::Density,
        2 => GridKind::Time,
        k => return Err(Error::Format(format!("unknown kind {k}"))),
    };
    r.read_exact(&mut u4)?;
    let dim = u32::from_le_bytes(u4) as usize;
    if !(2..=3).contains(&dim) {
        return Err(Error::Format(format!("unsupported dimension {dim}")));
    }
    let mut f64_next = |r: &mut R| -> Result<f64> {
        r.read_exact(&mut u8b)?;
        Ok(f64::from_le_bytes(u8b))
    };
    let spacing = f64_next(&mut r)?;
    let origin = (0..dim).map(|_| f64_next(&mut r)).collect::<Result<Vec<_>>>()?;
    let extents = (0..dim)
        .map(|_| f64_next(&mut r).map(|x| x.to_bits() as usize))
        .collect::<Result<Vec<_>>>()?;
    let grid = GridSpec::new(origin, spacing, extents)?;
    let mut values = (0..grid.node_count()).map(|_| f64_next(&mut r)).collect::<Result<Vec<_>>>()?;
    if kind == GridKind::Time {
        for v in &mut values {
            if *v == UNREACHABLE_SENTINEL {
                *v = f64::INFINITY;
            }
        }
    }
    Ok((kind, grid, values))
}

/// One row per node: coordinates then value.
pub fn write_csv<W: Write>(mut w: W, data: &impl NodeData) -> Result<()> {
    let g = data.grid();
    let axes = ["x", "y", "z"];
    writeln!(w, "{},value", axes[..g.dim()].join(","))?;
    for (v, val) in data.node_values().iter().enumerate() {
        let x = g.coords(v);
        for c in &x[..g.dim()] {
            write!(w, "{c},")?;
        }
        writeln!(w, "{val}")?;
    }
    Ok(())
}

/// Point cloud rows `x,y[,z][,radius],colour_uniform`; the uniform is the
/// hash-derived mark under `colour_key` (the Voronoi colour coupling).
pub fn write_point_cloud_csv<W: Write>(
    mut w: W,
    cloud: &PointCloud,
    radii: Option<&[f64]>,
    colour_key: u64,
) -> Result<()> {
    let dim = cloud.dim();
    if let Some(r) = radii {
        if r.len() != cloud.len() {
            return Err(Error::param("radii", "one radius per point required"));
        }
    }
    let axes = ["x", "y", "z"];
    write!(w, "{}", axes[..dim].join(","))?;
    if radii.is_some() {
        write!(w, ",radius")?;
    }
    writeln!(w, ",colour_uniform")?;
    for (i, p) in cloud.points().iter().enumerate() {
        for c in &p[..dim] {
            write!(w, "{c},")?;
        }
        if let Some(r) = radii {
            write!(w, "{},", r[i])?;
        }
        writeln!(w, "{}", cloud.uniform(i, colour_key))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colourings::{sample_poisson, BoxRegion};
    use crate::metric::shortest_time_until;
    use crate::RngSeed;

    #[test]
    fn time_field_round_trip_keeps_infinity() {
        let grid = GridSpec::new(vec![-1.0, 0.5], 0.5, vec![3, 4]).unwrap();
        let c = Colouring::constant(grid.clone(), 1.0).unwrap();
        let tf = shortest_time_until(&c, &[0], |u, _| u == 1).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &tf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 4 + 8 + 16 + 16 + 12 * 8);
        let (kind, g, v) = read_binary(&buf[..]).unwrap();
        assert_eq!(kind, GridKind::Time);
        assert_eq!(g, grid);
        assert_eq!(v, tf.times());
        assert!(v[11].is_infinite());
    }

    #[test]
    fn csv_shapes() {
        let grid = GridSpec::new(vec![0.0, 0.0, 0.0], 1.0, vec![2, 1, 2]).unwrap();
        let f = ScalarField::new(grid, vec![0.0, 1.0, 2.0, 3.5]).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &f).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "x,y,z,value\n0,0,0,0\n0,0,1,1\n1,0,0,2\n1,0,1,3.5\n");
        assert!(read_binary(&b"NOTMAGIC"[..]).is_err());
    }

    #[test]
    fn point_cloud_csv() {
        let region = BoxRegion::new(vec![0.0, 0.0], vec![3.0, 3.0]).unwrap();
        let cloud = sample_poisson(&region, 1.0, &RngSeed::new(4, 0, "pts")).unwrap();
        let radii = vec![1.0; cloud.len()];
        let mut buf = Vec::new();
        write_point_cloud_csv(&mut buf, &cloud, Some(&radii), 7).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("x,y,radius,colour_uniform"));
        assert_eq!(lines.count(), cloud.len());
        assert!(write_point_cloud_csv(Vec::new(), &cloud, Some(&[]), 7).is_err() || cloud.is_empty());
    }
}
