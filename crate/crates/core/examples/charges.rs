//! ADM mass and center of mass from flux integrals, extrapolated in R.

use cmcfol::charges::{compute_charges, hawking_mass};
use cmcfol::metric::{HarmonicAsymptotics, MetricFamily};
use cmcfol::{solve_leaf, MetricField, SolveConfig};

fn main() -> cmcfol::Result<()> {
    let field = MetricField::new(MetricFamily::HarmonicAsymptotics(HarmonicAsymptotics::new(
        2.0,
        [0.0, 1.0, -0.5],
    )));
    let ch = compute_charges(&field, &[25.0, 50.0, 100.0, 200.0])?;
    println!("m (flux)  samples {:?} -> {:.8}", ch.m_flux.values, ch.m_flux.limit);
    println!("m (ricci) samples {:?} -> {:.8}", ch.m_ricci.values, ch.m_ricci.limit);
    println!("center of mass {:?} (expected [0, 0.5, -0.25])", ch.center);

    let leaf = solve_leaf(&field, 40.0, &SolveConfig::with_lmax(8))?;
    println!(
        "hawking mass of the R = 40 leaf {:.6}",
        hawking_mass(&leaf.leaf, &field)?
    );
    Ok(())
}
