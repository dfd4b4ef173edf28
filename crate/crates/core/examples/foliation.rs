//! Builds a warm-started foliation, checks nesting and extrapolates the center.

use cmcfol::metric::{HarmonicAsymptotics, MetricFamily};
use cmcfol::{build_foliation, MetricField, SolveConfig};

fn main() -> cmcfol::Result<()> {
    let field = MetricField::new(MetricFamily::HarmonicAsymptotics(HarmonicAsymptotics::new(
        1.0,
        [0.5, 0.0, 0.0],
    )));
    let radii = [20.0, 30.0, 45.0, 70.0, 100.0, 150.0];
    let fol = build_foliation(&field, &radii, &SolveConfig::with_lmax(8), true)?;
    for (leaf, ch) in fol.leaves.iter().zip(&fol.charges) {
        println!(
            "R = {:>5}: H = {:.10}, hawking mass {:.6}, centroid x {:.5}",
            leaf.radius, leaf.h_achieved, ch.hawking_mass, ch.centroid[0]
        );
    }
    for n in &fol.nesting {
        println!("gap {:>5} -> {:>5}: {:.4}", n.r_inner, n.r_outer, n.lapse_min);
    }
    if let Some(c) = &fol.geometric_center {
        println!("geometric center {:?} (expected [0.5, 0, 0])", c.limit);
    }
    println!("success: {}", fol.success);
    Ok(())
}
