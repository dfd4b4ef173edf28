//! Spectral round trip and the l = 1 split on a Gauss-Legendre grid.

use cmcfol::{HarmonicCoeffs, SphereGrid};

fn main() -> cmcfol::Result<()> {
    let grid = SphereGrid::new(8)?;
    println!(
        "grid: {} x {} nodes, {} basis functions",
        grid.n_theta(),
        grid.n_phi(),
        grid.n_basis()
    );

    let values: Vec<f64> = grid
        .directions()
        .iter()
        .map(|d| 1.0 + 0.3 * d[0] - 0.2 * d[2] + d[0] * d[1])
        .collect();
    let c = grid.analysis(&values)?;
    for (l, m, v) in c.iter().filter(|(_, _, v)| v.abs() > 1e-12) {
        println!("a_{l},{m:+} = {v:+.10}");
    }

    let back = grid.synthesis(&c)?;
    let err = back.iter().zip(&values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    println!("round-trip error {err:.2e}");

    let (b, rest) = c.l1_projection();
    println!("l = 1 vector {b:?}");
    let lap = rest.laplace_beltrami_apply();
    println!("|Δ rest|_max = {:.6}", lap.max_abs());
    let rebuilt = rest.axpy(1.0, &HarmonicCoeffs::from_l1_vector(8, b));
    println!("split defect {:.2e}", rebuilt.axpy(-1.0, &c).max_abs());
    Ok(())
}
