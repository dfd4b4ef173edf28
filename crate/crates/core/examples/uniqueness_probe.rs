//! Restarts the solver from perturbed spheres and checks that every start
//! lands on the reference leaf.

use cmcfol::solver::uniqueness_probe;
use cmcfol::{solve_leaf, HarmonicCoeffs, MetricField, SolveConfig};

fn main() -> cmcfol::Result<()> {
    let field = MetricField::schwarzschild(1.0, [0.0; 3]);
    let cfg = SolveConfig::with_lmax(6);
    let reference = solve_leaf(&field, 20.0, &cfg)?;
    let starts = vec![
        HarmonicCoeffs::single(6, 2, 0, 0.05),
        HarmonicCoeffs::single(6, 3, 1, -0.04),
        HarmonicCoeffs::single(6, 1, 0, 0.08),
    ];
    let report = uniqueness_probe(&field, &reference, &starts, &cfg)?;
    println!("threshold {:.3e}", report.threshold);
    for s in &report.starts {
        println!(
            "amplitude {:.3}: converged {}, distance {:?}",
            s.amplitude, s.converged, s.distance
        );
    }
    println!("unique: {}", report.success);
    Ok(())
}
