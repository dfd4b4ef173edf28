//! Leaf serialization.
//!
//! CSV: one row per grid node with angles, embedding point, `H`, `|Å|²` and
//! the induced area density. Binary: magic `CMCLEAF1`, `u32` band limit,
//! center (3 × `f64`), radius, then the `(L+1)²` profile coefficients, all
//! little endian.

use std::io::{Read, Write};
use std::sync::Arc;

use super::{LeafSurface, SurfaceGeometry};
use crate::error::{Error, Result};
use crate::harmonics::{HarmonicCoeffs, SphereGrid};

pub const LEAF_MAGIC: &[u8; 8] = b"CMCLEAF1";

pub fn write_leaf_csv<W: Write>(mut out: W, leaf: &LeafSurface, geo: &SurfaceGeometry) -> Result<()> {
    writeln!(out, "# cmcfol-schema-version: 1 leaf")?;
    writeln!(out, "theta,phi,x,y,z,mean_curvature,traceless_a2,area_density")?;
    for (n, g) in geo.nodes.iter().enumerate() {
        let (t, p) = leaf.grid().angles(n);
        writeln!(
            out,
            "{t:.17e},{p:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            g.z[0], g.z[1], g.z[2], g.mean_curvature, g.traceless_a2, g.area_density
        )?;
    }
    Ok(())
}

pub fn write_leaf_binary<W: Write>(mut out: W, leaf: &LeafSurface) -> Result<()> {
    out.write_all(LEAF_MAGIC)?;
    out.write_all(&(leaf.profile.lmax() as u32).to_le_bytes())?;
    for v in leaf.center.iter().chain(std::iter::once(&leaf.radius)) {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in leaf.profile.as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a binary leaf; a grid of the stored band limit is built unless one
/// is supplied.
pub fn read_leaf_binary<R: Read>(mut inp: R, grid: Option<Arc<SphereGrid>>) -> Result<LeafSurface> {
    let fmt = |e: std::io::Error| Error::Format(format!("truncated leaf file: {e}"));
    let mut magic = [0u8; 8];
    inp.read_exact(&mut magic).map_err(fmt)?;
    if &magic != LEAF_MAGIC {
        return Err(Error::Format("not a leaf file (bad magic)".into()));
    }
    let mut b4 = [0u8; 4];
    inp.read_exact(&mut b4).map_err(fmt)?;
    let lmax = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    let mut next = |inp: &mut R| -> Result<f64> {
        inp.read_exact(&mut b8).map_err(fmt)?;
        Ok(f64::from_le_bytes(b8))
    };
    let center = [next(&mut inp)?, next(&mut inp)?, next(&mut inp)?];
    let radius = next(&mut inp)?;
    let data = (0..(lmax + 1) * (lmax + 1))
        .map(|_| next(&mut inp))
        .collect::<Result<Vec<_>>>()?;
    let profile = HarmonicCoeffs::from_vec(lmax, data).expect("length matches band limit");
    let grid = match grid {
        Some(g) => g,
        None => Arc::new(SphereGrid::new(lmax.max(1))?),
    };
    LeafSurface::new(center, radius, profile, grid)
}
