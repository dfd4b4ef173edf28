//! Jacobi operator spectrum of a solved leaf and of the round flat sphere.

use std::sync::Arc;

use cmcfol::spectrum::{assemble_jacobi, assemble_l0, eigen_solve};
use cmcfol::{solve_leaf, MetricField, SolveConfig, SphereGrid};

fn main() -> cmcfol::Result<()> {
    let r = 20.0;
    let grid = Arc::new(SphereGrid::new(8)?);
    let flat = eigen_solve(&assemble_l0(r, &grid), 6)?;
    println!("flat sphere R = {r}: {:?}", flat.eigenvalues);

    let field = MetricField::schwarzschild(1.0, [0.0; 3]);
    let leaf = solve_leaf(&field, r, &SolveConfig::with_lmax(8))?;
    let spec = eigen_solve(&assemble_jacobi(&leaf.leaf, &field)?, 6)?;
    println!("schwarzschild leaf: {:?}", spec.eigenvalues);
    println!(
        "eta0 = {:.6e}, eta1 = {:.6e}, mu0 = {:.6e}, 6m/R^3 = {:.6e}",
        spec.eta0,
        spec.eta1,
        spec.mu0,
        6.0 / r.powi(3)
    );
    Ok(())
}
