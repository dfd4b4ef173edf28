//! Mean curvature and area of round and perturbed spheres in Schwarzschild.

use std::sync::Arc;

use cmcfol::surface::{area, fundamental_forms, surface_distance, traceless_a_norm};
use cmcfol::{HarmonicCoeffs, LeafSurface, MetricField, SphereGrid};

fn main() -> cmcfol::Result<()> {
    let field = MetricField::schwarzschild(1.0, [0.0; 3]);
    let grid = Arc::new(SphereGrid::new(10)?);
    let r = 10.0;

    let round = LeafSurface::round([0.0; 3], r, grid.clone())?;
    let geo = fundamental_forms(&round, &field)?;
    let h = geo.mean_curvature();
    let a = 0.5 / r;
    let exact = (2.0 / r) * (1.0 - a) / (1.0 + a).powi(3);
    println!("H on the centered sphere: {:.12} (closed form {exact:.12})", h[0]);
    let (area_g, area_e) = area(&round, &field)?;
    println!("area {area_g:.6}, euclidean area {area_e:.6}");

    let bumpy = LeafSurface::new([0.0; 3], r, HarmonicCoeffs::single(10, 2, 0, 0.2), grid)?;
    let geo = fundamental_forms(&bumpy, &field)?;
    let h = geo.mean_curvature();
    let (lo, hi) = h
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), v| (l.min(*v), u.max(*v)));
    println!(
        "perturbed sphere: H in [{lo:.6}, {hi:.6}], |Å| = {:.3e}",
        traceless_a_norm(&geo)
    );
    println!("distance to the round sphere {:.6}", surface_distance(&bumpy, &round)?);
    Ok(())
}
