//! Evaluates a dipole-shifted harmonic metric and audits its decay rates.

use cmcfol::metric::{constraint_residuals, decay_audit, HarmonicAsymptotics, MetricFamily, MetricField};

fn main() -> cmcfol::Result<()> {
    let field = MetricField::new(MetricFamily::HarmonicAsymptotics(HarmonicAsymptotics::new(
        1.0,
        [0.5, 0.0, 0.0],
    )));
    let x = [12.0, -3.0, 4.0];
    let g = field.metric(x)?;
    let curv = field.curvature(x)?;
    let (ham, _) = constraint_residuals(&field, x, false)?;
    println!("g_11 at {x:?} = {:.12}", g[0][0]);
    println!(
        "scalar curvature = {:.3e}, hamiltonian residual = {:.3e}",
        curv.scalar, ham
    );

    let audit = decay_audit(&field, &[20.0, 40.0, 80.0, 160.0])?;
    for q in &audit.quantities {
        match &q.fit {
            Some(fit) => println!("{:>12}: exponent {:+.3}", q.name, fit.exponent),
            None => println!("{:>12}: vanishes", q.name),
        }
    }
    Ok(())
}
